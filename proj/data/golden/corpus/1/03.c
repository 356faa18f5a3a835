#include <stdio.h>

int sum_digits_v3(int value)
{
    int acc = 0;
    while (value > 0) {
        acc += value % 10;
        value /= 10;
    }
    return acc;
}

int main()
{
    int value;
    scanf("%d", &value);
    printf("%d\n", sum_digits_v3(value));
    return 0;
}
