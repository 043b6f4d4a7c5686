#include <stdio.h>

int main(void) {
    int c = getchar();
    signed char out;
    if (c == -1) {
        putchar(33);
        putchar(10);
        return 1;
    }
    if (c >= 97) {
        if (c <= 122)
            out = (signed char)(c - 32);
        else
            out = (signed char)63;
    } else {
        out = (signed char)63;
    }
    putchar((int)out);
    putchar(10);
    return 0;
}
