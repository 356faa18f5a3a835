#include <stdio.h>

int is_prime_v5(int y)
{
    int d = 2;
    if (y <= 1) return 0;
    while (d <= y / d) {
        if (y % d == 0) return 0;
        d++;
    }
    return 1;
}

int main()
{
    int y;
    scanf("%d", &y);
    printf(is_prime_v5(y) ? "yes\n" : "no\n");
    return 0;
}
