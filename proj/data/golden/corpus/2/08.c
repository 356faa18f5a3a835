#include <stdio.h>

void sort_values_v8(int items[], int n)
{
    int i, j, t;
    for (i = 0; i < n - 1; i++)
        for (j = 0; j < n - 1 - i; j++)
            if (items[j] > items[j + 1]) {
                t = items[j];
                items[j] = items[j + 1];
                items[j + 1] = t;
            }
}

int main()
{
    int n, i, items[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &items[i]);
    sort_values_v8(items, n);
    for (i = 0; i < n; i++) printf("%d ", items[i]);
    return 0;
}
