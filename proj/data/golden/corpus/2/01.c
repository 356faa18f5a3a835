#include <stdio.h>

void sort_values_v1(int arr[], int n)
{
    int i, j, key;
    for (i = 1; i < n; i++) {
        key = arr[i];
        for (j = i - 1; j >= 0 && arr[j] > key; j--)
            arr[j + 1] = arr[j];
        arr[j + 1] = key;
    }
}

int main()
{
    int n, i, arr[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &arr[i]);
    sort_values_v1(arr, n);
    for (i = 0; i < n; i++) printf("%d ", arr[i]);
    return 0;
}
