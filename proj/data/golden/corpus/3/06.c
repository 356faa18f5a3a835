#include <stdio.h>

int is_prime_v6(int val)
{
    int d;
    if (val < 2) return 0;
    for (d = 2; d * d <= val; d++)
        if (val % d == 0) return 0;
    return 1;
}

int main()
{
    int val;
    scanf("%d", &val);
    printf(is_prime_v6(val) ? "yes\n" : "no\n");
    return 0;
}
