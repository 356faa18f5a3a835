#include <stdio.h>

void sort_values_v9(int buf[], int n)
{
    int i, j, key;
    for (i = 1; i < n; i++) {
        key = buf[i];
        for (j = i - 1; j >= 0 && buf[j] > key; j--)
            buf[j + 1] = buf[j];
        buf[j + 1] = key;
    }
}

int main()
{
    int n, i, buf[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &buf[i]);
    sort_values_v9(buf, n);
    for (i = 0; i < n; i++) printf("%d ", buf[i]);
    return 0;
}
