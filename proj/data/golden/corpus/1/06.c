#include <stdio.h>

int sum_digits_v6(int a)
{
    int t = 0;
    while (a > 0) {
        t += a % 10;
        a /= 10;
    }
    return t;
}

int main()
{
    int a;
    scanf("%d", &a);
    printf("%d\n", sum_digits_v6(a));
    return 0;
}
