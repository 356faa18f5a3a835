#include <stdio.h>

int sum_digits_v9(int z)
{
    int q = 0;
    while (z > 0) {
        q += z % 10;
        z /= 10;
    }
    return q;
}

int main()
{
    int z;
    scanf("%d", &z);
    printf("%d\n", sum_digits_v9(z));
    return 0;
}
