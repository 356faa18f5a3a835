#include <stdio.h>

void sort_values_v5(int list[], int n)
{
    int i, j, key;
    for (i = 1; i < n; i++) {
        key = list[i];
        for (j = i - 1; j >= 0 && list[j] > key; j--)
            list[j + 1] = list[j];
        list[j + 1] = key;
    }
}

int main()
{
    int n, i, list[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &list[i]);
    sort_values_v5(list, n);
    for (i = 0; i < n; i++) printf("%d ", list[i]);
    return 0;
}
