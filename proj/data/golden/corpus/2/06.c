#include <stdio.h>

void sort_values_v6(int v[], int n)
{
    int i, j, t;
    for (i = 0; i < n - 1; i++)
        for (j = 0; j < n - 1 - i; j++)
            if (v[j] > v[j + 1]) {
                t = v[j];
                v[j] = v[j + 1];
                v[j + 1] = t;
            }
}

int main()
{
    int n, i, v[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &v[i]);
    sort_values_v6(v, n);
    for (i = 0; i < n; i++) printf("%d ", v[i]);
    return 0;
}
