#include <stdio.h>

void sort_values_v4(int nums[], int n)
{
    int i, j, t;
    for (i = 0; i < n - 1; i++)
        for (j = 0; j < n - 1 - i; j++)
            if (nums[j] > nums[j + 1]) {
                t = nums[j];
                nums[j] = nums[j + 1];
                nums[j + 1] = t;
            }
}

int main()
{
    int n, i, nums[100];
    scanf("%d", &n);
    for (i = 0; i < n; i++) scanf("%d", &nums[i]);
    sort_values_v4(nums, n);
    for (i = 0; i < n; i++) printf("%d ", nums[i]);
    return 0;
}
