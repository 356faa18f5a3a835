#include <stdio.h>

void sort_values_v7(int x[], int n)
{
    int i, j, key;
    for (i = 1; i < n; i++) {
        key = x[i];
        for (j = i - 1; j >= 0 && x[j] > key; j--)
            x[j + 1] = x[j];
        x[j + 1] = key;
    }
}

int main()
{
    int n, i, x[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &x[i]);
    sort_values_v7(x, n);
    for (i = 0; i < n; i++) printf("%d ", x[i]);
    return 0;
}
