/*
 * Soundness tests for the host cluster shim.
 *
 * Modes (argv[1]): forks | barrier | critical | join | restart | l1 |
 * soundness (forks+barrier+critical) | all. Exit 0 on success.
 */
#include <stdio.h>
#include <string.h>

#include "gap_shim.h"

#define CHECK(cond, msg)                                                  \
    do {                                                                  \
        if (!(cond)) {                                                    \
            fprintf(stderr, "FAIL: %s (%s:%d)\n", msg, __FILE__, __LINE__); \
            return 1;                                                     \
        }                                                                 \
    } while (0)

#define FORK_ROUNDS 1000
#define BARRIER_PHASES 64
#define CRITICAL_INCREMENTS 10000

/* ---- fork exactness ---------------------------------------------------- */

static int hit_count[GAP_SHIM_MAX_CORES];

static void count_worker(void *arg) {
    (void)arg;
    hit_count[CLUSTER_CoreId()] += 1;
}

static void count_master(void *arg) {
    CLUSTER_CoresFork(count_worker, arg);
}

static int test_forks(void) {
    for (int round = 0; round < FORK_ROUNDS; round++) {
        int team = (round % GAP_SHIM_MAX_CORES) + 1;
        memset(hit_count, 0, sizeof(hit_count));
        CLUSTER_Start(0, team);
        CLUSTER_SendTask(0, count_master, (void *)0, 0);
        CLUSTER_Wait(0);
        CLUSTER_Stop(0);
        for (int core = 0; core < GAP_SHIM_MAX_CORES; core++) {
            int want = core < team ? 1 : 0;
            CHECK(hit_count[core] == want, "each core id occurs exactly once per fork");
        }
    }
    return 0;
}

/* ---- barrier rendezvous -------------------------------------------------- */

static int arrived[BARRIER_PHASES][GAP_SHIM_MAX_CORES];
static int barrier_failures[GAP_SHIM_MAX_CORES];

static void barrier_worker(void *arg) {
    (void)arg;
    int me = CLUSTER_CoreId();
    int team = CLUSTER_TeamSize();
    for (int phase = 0; phase < BARRIER_PHASES; phase++) {
        arrived[phase][me] = 1;
        CLUSTER_Barrier();
        int seen = 0;
        for (int core = 0; core < team; core++) {
            seen += arrived[phase][core];
        }
        if (seen != team) {
            barrier_failures[me] += 1;
        }
        CLUSTER_Barrier();
    }
}

static void barrier_master(void *arg) {
    CLUSTER_CoresFork(barrier_worker, arg);
}

static int test_barrier(void) {
    memset(arrived, 0, sizeof(arrived));
    memset(barrier_failures, 0, sizeof(barrier_failures));
    CLUSTER_Start(0, GAP_SHIM_MAX_CORES);
    CLUSTER_SendTask(0, barrier_master, (void *)0, 0);
    CLUSTER_Wait(0);
    CLUSTER_Stop(0);
    for (int core = 0; core < GAP_SHIM_MAX_CORES; core++) {
        CHECK(barrier_failures[core] == 0, "no core proceeds before the full team arrives");
    }
    return 0;
}

/* ---- critical-section counter -------------------------------------------- */

static long shared_counter;

static void critical_worker(void *arg) {
    (void)arg;
    for (int i = 0; i < CRITICAL_INCREMENTS; i++) {
        CRITICAL_ENTER();
        shared_counter += 1;
        CRITICAL_EXIT();
    }
}

static void critical_master(void *arg) {
    CLUSTER_CoresFork(critical_worker, arg);
}

static int test_critical(void) {
    shared_counter = 0;
    CLUSTER_Start(0, GAP_SHIM_MAX_CORES);
    CLUSTER_SendTask(0, critical_master, (void *)0, 0);
    CLUSTER_Wait(0);
    CLUSTER_Stop(0);
    CHECK(shared_counter == (long)GAP_SHIM_MAX_CORES * CRITICAL_INCREMENTS,
          "critical section serializes every increment");
    return 0;
}

/* ---- join visibility ------------------------------------------------------ */

static int results[GAP_SHIM_MAX_CORES];
static int master_sum;

static void join_worker(void *arg) {
    (void)arg;
    int me = CLUSTER_CoreId();
    results[me] = me * me + 1;
}

static void join_master(void *arg) {
    CLUSTER_CoresFork(join_worker, arg);
    /* everything the team wrote is visible once the fork joins */
    master_sum = 0;
    for (int core = 0; core < CLUSTER_TeamSize(); core++) {
        master_sum += results[core];
    }
}

static int test_join(void) {
    memset(results, 0, sizeof(results));
    master_sum = 0;
    CLUSTER_Start(0, GAP_SHIM_MAX_CORES);
    CLUSTER_SendTask(0, join_master, (void *)0, 0);
    CLUSTER_Wait(0);
    CLUSTER_Stop(0);
    int want = 0;
    for (int core = 0; core < GAP_SHIM_MAX_CORES; core++) {
        CHECK(results[core] == core * core + 1, "worker writes visible after CLUSTER_Wait");
        want += core * core + 1;
    }
    CHECK(master_sum == want, "worker writes visible to the dispatcher after the fork");
    return 0;
}

/* ---- restart --------------------------------------------------------------- */

static int test_restart(void) {
    CLUSTER_Start(0, GAP_SHIM_MAX_CORES);
    CHECK(CLUSTER_TeamSize() == GAP_SHIM_MAX_CORES, "team size follows CLUSTER_Start");
    CLUSTER_Stop(0);
    CLUSTER_Start(0, 4);
    CHECK(CLUSTER_TeamSize() == 4, "restart reconfigures the team size");
    memset(hit_count, 0, sizeof(hit_count));
    CLUSTER_SendTask(0, count_master, (void *)0, 0);
    CLUSTER_Wait(0);
    CLUSTER_Stop(0);
    for (int core = 0; core < 4; core++) {
        CHECK(hit_count[core] == 1, "fork works after a restart");
    }
    CLUSTER_Start(0, 1);
    memset(hit_count, 0, sizeof(hit_count));
    CLUSTER_SendTask(0, count_master, (void *)0, 0);
    CLUSTER_Wait(0);
    CLUSTER_Stop(0);
    CHECK(hit_count[0] == 1 && hit_count[1] == 0, "a one-core team forks exactly once");
    return 0;
}

/* ---- L1 bookkeeping ---------------------------------------------------------- */

static int test_l1(void) {
    CHECK(L1_Malloc(0) == NULL, "zero-size allocation yields NULL");
    size_t before = L1_HighWater();
    void *a = L1_Malloc(1024);
    void *b = L1_Malloc(512);
    CHECK(a != NULL && b != NULL, "allocations succeed");
    CHECK(L1_HighWater() >= before + 1536, "high-water mark tracks peak usage");
    L1_Free(b, 512);
    L1_Free(a, 1024);
    size_t peak = L1_HighWater();
    CHECK(peak >= 1536, "high-water mark is not lowered by frees");
    return 0;
}

/* ---- driver ------------------------------------------------------------------- */

static int run_mode(const char *mode) {
    if (strcmp(mode, "forks") == 0) return test_forks();
    if (strcmp(mode, "barrier") == 0) return test_barrier();
    if (strcmp(mode, "critical") == 0) return test_critical();
    if (strcmp(mode, "join") == 0) return test_join();
    if (strcmp(mode, "restart") == 0) return test_restart();
    if (strcmp(mode, "l1") == 0) return test_l1();
    if (strcmp(mode, "soundness") == 0) {
        return test_forks() || test_barrier() || test_critical();
    }
    if (strcmp(mode, "all") == 0) {
        return test_forks() || test_barrier() || test_critical() || test_join()
               || test_restart() || test_l1();
    }
    fprintf(stderr, "unknown mode '%s'\n", mode);
    return 2;
}

int main(int argc, char **argv) {
    const char *mode = argc > 1 ? argv[1] : "all";
    int rc = run_mode(mode);
    if (rc == 0) {
        printf("ok %s\n", mode);
    }
    return rc;
}
