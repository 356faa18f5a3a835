#include <stdio.h>

int is_prime_v2(int x)
{
    int d;
    if (x < 2) return 0;
    for (d = 2; d * d <= x; d++)
        if (x % d == 0) return 0;
    return 1;
}

int main()
{
    int x;
    scanf("%d", &x);
    printf(is_prime_v2(x) ? "yes\n" : "no\n");
    return 0;
}
