#include <stdio.h>

int is_prime_v7(int w)
{
    int d = 2;
    if (w <= 1) return 0;
    while (d <= w / d) {
        if (w % d == 0) return 0;
        d++;
    }
    return 1;
}

int main()
{
    int w;
    scanf("%d", &w);
    printf(is_prime_v7(w) ? "yes\n" : "no\n");
    return 0;
}
