#include <stdio.h>

int is_prime_v4(int num)
{
    int d;
    if (num < 2) return 0;
    for (d = 2; d * d <= num; d++)
        if (num % d == 0) return 0;
    return 1;
}

int main()
{
    int num;
    scanf("%d", &num);
    printf(is_prime_v4(num) ? "yes\n" : "no\n");
    return 0;
}
