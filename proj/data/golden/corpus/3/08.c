#include <stdio.h>

int is_prime_v8(int cand)
{
    int d;
    if (cand < 2) return 0;
    for (d = 2; d * d <= cand; d++)
        if (cand % d == 0) return 0;
    return 1;
}

int main()
{
    int cand;
    scanf("%d", &cand);
    printf(is_prime_v8(cand) ? "yes\n" : "no\n");
    return 0;
}
