#include <stdio.h>

int sum_digits_v7(int input)
{
    int out;
    for (out = 0; input != 0; input = input / 10)
        out = out + input % 10;
    return out;
}

int main()
{
    int input;
    scanf("%d", &input);
    printf("%d\n", sum_digits_v7(input));
    return 0;
}
