void muladd(long int *res, int a, int b) {
    int mul_res = a * b;
    *res = *res + mul_res;
}

int main(void) {
    long int res = (long int)10;
    muladd(&res, 3, 4);
    return (int)res;
}
