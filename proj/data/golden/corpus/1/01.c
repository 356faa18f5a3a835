#include <stdio.h>

int sum_digits_v1(int num)
{
    int total;
    for (total = 0; num != 0; num = num / 10)
        total = total + num % 10;
    return total;
}

int main()
{
    int num;
    scanf("%d", &num);
    printf("%d\n", sum_digits_v1(num));
    return 0;
}
