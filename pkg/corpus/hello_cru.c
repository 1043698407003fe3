/* Crew roll call: combines every supported directive and clause. */
#include <stdio.h>
#include <omp.h>

int tickets[8];

int main(void) {
    int visits = 0;
    int i;
    double scale = 1.0;
    double balance = 100.0;

    #pragma omp parallel num_threads(8) shared(visits)
    {
        int rank = omp_get_thread_num();
        #pragma omp single
        {
            printf("Crew of %d members reporting\n", omp_get_num_threads());
        }
        printf("Hello from thread %d of %d\n", rank, omp_get_num_threads());
        #pragma omp critical
        {
            visits = visits + 1;
        }
        #pragma omp for
        for (i = 0; i < 8; i++) {
            tickets[i] = 100 + i;
        }
    }

    printf("Ticket booth had %d visits\n", visits);
    for (i = 0; i < 8; i++) {
        printf("ticket %d priced %d\n", i, tickets[i]);
    }

    #pragma omp parallel for num_threads(8) private(scale) reduction(-: balance)
    for (i = 0; i < 8; i++) {
        scale = 0.5;
        balance -= scale * tickets[i];
    }

    printf("Final balance %.2f\n", balance);
    return 0;
}
