#include <stdio.h>

int is_prime_v1(int n)
{
    int d = 2;
    if (n <= 1) return 0;
    while (d <= n / d) {
        if (n % d == 0) return 0;
        d++;
    }
    return 1;
}

int main()
{
    int n;
    scanf("%d", &n);
    printf(is_prime_v1(n) ? "yes\n" : "no\n");
    return 0;
}
