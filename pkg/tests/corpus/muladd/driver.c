#include <stdio.h>

void muladd(long int *res, int a, int b);

int main(void) {
    long int res = 10;
    muladd(&res, 3, 4);
    printf("%ld\n", res);
    return (int)res;
}
