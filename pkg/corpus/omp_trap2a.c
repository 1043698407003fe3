/* Trapezoidal rule integration of f(x) = x*x over [a, b]. */
#include <stdio.h>
#include <omp.h>

double f(double x) {
    return x * x;
}

int main(void) {
    double a = 0.0;
    double b = 3.0;
    int n = 1024;
    double h;
    double approx;
    int i;

    h = (b - a) / n;
    approx = (f(a) + f(b)) / 2.0;

    #pragma omp parallel for num_threads(8) shared(a) shared(h) shared(n) reduction(+: approx)
    for (i = 1; i <= n - 1; i++) {
        approx += f(a + i * h);
    }

    approx = h * approx;
    printf("With n = %d trapezoids, estimate = %.12f\n", n, approx);
    return 0;
}
