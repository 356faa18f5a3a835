#include <stdio.h>

int is_prime_v3(int c)
{
    int d = 2;
    if (c <= 1) return 0;
    while (d <= c / d) {
        if (c % d == 0) return 0;
        d++;
    }
    return 1;
}

int main()
{
    int c;
    scanf("%d", &c);
    printf(is_prime_v3(c) ? "yes\n" : "no\n");
    return 0;
}
