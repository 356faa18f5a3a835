#include <stdio.h>

int sum_digits_v8(int v)
{
    if (v < 10) return v;
    return v % 10 + sum_digits_v8(v / 10);
}

int main()
{
    int v;
    scanf("%d", &v);
    printf("%d\n", sum_digits_v8(v));
    return 0;
}
