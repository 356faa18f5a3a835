#include <stdio.h>

void sort_values_v3(int data[], int n)
{
    int i, j, key;
    for (i = 1; i < n; i++) {
        key = data[i];
        for (j = i - 1; j >= 0 && data[j] > key; j--)
            data[j + 1] = data[j];
        data[j + 1] = key;
    }
}

int main()
{
    int n, i, data[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &data[i]);
    sort_values_v3(data, n);
    for (i = 0; i < n; i++) printf("%d ", data[i]);
    return 0;
}
