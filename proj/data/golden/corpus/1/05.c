#include <stdio.h>

int sum_digits_v5(int m)
{
    if (m < 10) return m;
    return m % 10 + sum_digits_v5(m / 10);
}

int main()
{
    int m;
    scanf("%d", &m);
    printf("%d\n", sum_digits_v5(m));
    return 0;
}
