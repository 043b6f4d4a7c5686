#ifndef VEC_MATH_H
#define VEC_MATH_H

struct vec3 {
    float x;
    float y;
    float z;
};

double vec3_dot(struct vec3 *a, struct vec3 *b);
void vec3_scale(struct vec3 *v, double factor);

#endif
