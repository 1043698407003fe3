/* Exercises the worksharing loop inside a plain parallel region. */
#include <stdio.h>
#include <omp.h>

int main(void) {
    int i;
    int limit = 16;

    #pragma omp parallel num_threads(8) shared(limit)
    {
        #pragma omp single
        {
            printf("Loop of %d iterations starting\n", limit);
        }
        #pragma omp for
        for (i = 0; i < limit; i++) {
            printf("iteration %2d handled by thread %d\n", i, omp_get_thread_num());
        }
    }

    printf("Loop done\n");
    return 0;
}
