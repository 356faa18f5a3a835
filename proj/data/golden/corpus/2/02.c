#include <stdio.h>

void sort_values_v2(int b[], int n)
{
    int i, j, t;
    for (i = 0; i < n - 1; i++)
        for (j = 0; j < n - 1 - i; j++)
            if (b[j] > b[j + 1]) {
                t = b[j];
                b[j] = b[j + 1];
                b[j + 1] = t;
            }
}

int main()
{
    int n, i, b[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &b[i]);
    sort_values_v2(b, n);
    for (i = 0; i < n; i++) printf("%d ", b[i]);
    return 0;
}
