#include <stdio.h>

int is_prime_v0(int p)
{
    int d;
    if (p < 2) return 0;
    for (d = 2; d * d <= p; d++)
        if (p % d == 0) return 0;
    return 1;
}

int main()
{
    int p;
    scanf("%d", &p);
    printf(is_prime_v0(p) ? "yes\n" : "no\n");
    return 0;
}
