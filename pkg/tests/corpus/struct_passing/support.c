struct Point {
    int x;
    long y;
};

void point_init(struct Point *p) {
    p->x = 5;
    p->y = 7;
}

int point_sum(struct Point *p) {
    return p->x + (int)p->y;
}
