/* Leibniz series estimate of pi, reduced across the team. */
#include <stdio.h>
#include <omp.h>

int main(void) {
    long n = 100000;
    long k;
    double factor = 1.0;
    double sum = 0.0;
    double pi_approx;

    #pragma omp parallel for num_threads(8) shared(n) private(factor) reduction(+: sum)
    for (k = 0; k < n; k++) {
        factor = (k % 2 == 0) ? 1.0 : -1.0;
        sum += factor / (2 * k + 1);
    }

    pi_approx = 4.0 * sum;
    printf("pi estimate with %ld terms = %.12f\n", n, pi_approx);
    return 0;
}
