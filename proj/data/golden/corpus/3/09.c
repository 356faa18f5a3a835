#include <stdio.h>

int is_prime_v9(int u)
{
    int d = 2;
    if (u <= 1) return 0;
    while (d <= u / d) {
        if (u % d == 0) return 0;
        d++;
    }
    return 1;
}

int main()
{
    int u;
    scanf("%d", &u);
    printf(is_prime_v9(u) ? "yes\n" : "no\n");
    return 0;
}
