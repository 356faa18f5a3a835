#include <stdio.h>

int sum_digits_v2(int x)
{
    if (x < 10) return x;
    return x % 10 + sum_digits_v2(x / 10);
}

int main()
{
    int x;
    scanf("%d", &x);
    printf("%d\n", sum_digits_v2(x));
    return 0;
}
