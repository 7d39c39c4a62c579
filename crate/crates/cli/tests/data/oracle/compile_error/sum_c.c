#include <stdio.h>

int main(void) {
    int n, x;
    long total = 0;
    if (scanf("%d", &n) != 1) return 2;
    for (int i = 0; i < n; i++) {
        scanf("%d", &x);
        total += x;
    }
    total = undeclared_value;
    printf("%ld\n", total);
    return 0;
}
