#include <stdio.h>

static long factorial(int n) {
    return n <= 1 ? 1 : n * factorial(n - 1);
}

int main(void) {
    int n;
    scanf("%d", &n);
    printf("%ld\n", factorial(n - 1));
    return 0;
}
