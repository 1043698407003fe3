/* Parallel hello world: each team member reports its rank. */
#include <stdio.h>
#include <omp.h>

int main(void) {
    printf("Greetings requested\n");

    #pragma omp parallel num_threads(8)
    {
        int my_rank = omp_get_thread_num();
        int team = omp_get_num_threads();
        printf("Hello from thread %d of %d\n", my_rank, team);
    }

    printf("All greetings sent\n");
    return 0;
}
