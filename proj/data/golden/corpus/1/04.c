#include <stdio.h>

int sum_digits_v4(int k)
{
    int res;
    for (res = 0; k != 0; k = k / 10)
        res = res + k % 10;
    return res;
}

int main()
{
    int k;
    scanf("%d", &k);
    printf("%d\n", sum_digits_v4(k));
    return 0;
}
