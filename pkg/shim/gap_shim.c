/* Host implementation of the cluster API declared in gap_shim.h. */
#define _POSIX_C_SOURCE 200809L

#include "gap_shim.h"

#include <pthread.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>

static void gap_fatal(const char *msg) {
    fprintf(stderr, "gap_shim: fatal: %s\n", msg);
    abort();
}

/* ---- per-thread bookkeeping ------------------------------------------- */

static pthread_key_t g_core_key;      /* core id + 1; 0 means "not in a fork" */
static pthread_key_t g_dispatch_key;  /* 1 on the dispatcher thread */
static pthread_key_t g_critical_key;  /* nesting depth of CRITICAL_ENTER */
static pthread_once_t g_keys_once = PTHREAD_ONCE_INIT;

static void make_keys(void) {
    if (pthread_key_create(&g_core_key, NULL) != 0 ||
        pthread_key_create(&g_dispatch_key, NULL) != 0 ||
        pthread_key_create(&g_critical_key, NULL) != 0) {
        gap_fatal("cannot create thread-local keys");
    }
}

static void ensure_keys(void) {
    pthread_once(&g_keys_once, make_keys);
}

static void set_core_id(int core) {
    pthread_setspecific(g_core_key, (void *)(intptr_t)(core + 1));
}

static void clear_core_id(void) {
    pthread_setspecific(g_core_key, NULL);
}

static int current_core(void) {
    return (int)(intptr_t)pthread_getspecific(g_core_key) - 1;
}

/* ---- cluster state ----------------------------------------------------- */

typedef struct {
    void (*fn)(void *);
    void *arg;
} gap_task_t;

static struct {
    int started;
    int team_size;
    int task_pending;
    int in_fork;
    gap_task_t task;
    pthread_t dispatcher;
} g_cluster;

static pthread_mutex_t g_critical_mutex = PTHREAD_MUTEX_INITIALIZER;
static pthread_barrier_t g_team_barrier;

static void require_cluster0(int cluster_id) {
    if (cluster_id != 0) {
        gap_fatal("only cluster 0 exists");
    }
}

void CLUSTER_Start(int cluster_id, int number_of_cores) {
    ensure_keys();
    require_cluster0(cluster_id);
    if (g_cluster.started) {
        gap_fatal("CLUSTER_Start: cluster already started");
    }
    if (number_of_cores < 1 || number_of_cores > GAP_SHIM_MAX_CORES) {
        gap_fatal("CLUSTER_Start: core count must be in 1..8");
    }
    g_cluster.team_size = number_of_cores;
    g_cluster.started = 1;
}

static void *dispatch_main(void *unused) {
    (void)unused;
    pthread_setspecific(g_dispatch_key, (void *)(intptr_t)1);
    g_cluster.task.fn(g_cluster.task.arg);
    return NULL;
}

void CLUSTER_SendTask(int cluster_id, void (*entry)(void *), void *arg, int flags) {
    ensure_keys();
    require_cluster0(cluster_id);
    (void)flags;
    if (!g_cluster.started) {
        gap_fatal("CLUSTER_SendTask: cluster is not started");
    }
    if (entry == NULL) {
        gap_fatal("CLUSTER_SendTask: entry function is NULL");
    }
    if (g_cluster.task_pending) {
        /* dispatch is serialized: finish the previous task first */
        pthread_join(g_cluster.dispatcher, NULL);
        g_cluster.task_pending = 0;
    }
    g_cluster.task.fn = entry;
    g_cluster.task.arg = arg;
    if (pthread_create(&g_cluster.dispatcher, NULL, dispatch_main, NULL) != 0) {
        gap_fatal("CLUSTER_SendTask: cannot create dispatcher thread");
    }
    g_cluster.task_pending = 1;
}

void CLUSTER_Wait(int cluster_id) {
    ensure_keys();
    require_cluster0(cluster_id);
    if (!g_cluster.task_pending) {
        return;
    }
    pthread_join(g_cluster.dispatcher, NULL);
    g_cluster.task_pending = 0;
}

void CLUSTER_Stop(int cluster_id) {
    ensure_keys();
    require_cluster0(cluster_id);
    if (!g_cluster.started) {
        gap_fatal("CLUSTER_Stop: cluster is not started");
    }
    if (g_cluster.task_pending) {
        gap_fatal("CLUSTER_Stop: a task is still pending; call CLUSTER_Wait first");
    }
    g_cluster.started = 0;
    g_cluster.team_size = 0;
}

int CLUSTER_TeamSize(void) {
    ensure_keys();
    if (!g_cluster.started) {
        gap_fatal("CLUSTER_TeamSize: cluster is not started");
    }
    return g_cluster.team_size;
}

/* ---- fork-join --------------------------------------------------------- */

typedef struct {
    void (*fn)(void *);
    void *arg;
    int core;
} gap_fork_slot_t;

static void *fork_main(void *slot_ptr) {
    gap_fork_slot_t *slot = (gap_fork_slot_t *)slot_ptr;
    set_core_id(slot->core);
    slot->fn(slot->arg);
    clear_core_id();
    return NULL;
}

void CLUSTER_CoresFork(void (*fn)(void *), void *arg) {
    ensure_keys();
    if (!pthread_getspecific(g_dispatch_key)) {
        gap_fatal("CLUSTER_CoresFork: must be called from a dispatched task");
    }
    if (g_cluster.in_fork) {
        gap_fatal("CLUSTER_CoresFork: nested forks are unsupported");
    }
    if (fn == NULL) {
        gap_fatal("CLUSTER_CoresFork: worker function is NULL");
    }
    int team = g_cluster.team_size;
    g_cluster.in_fork = 1;
    if (pthread_barrier_init(&g_team_barrier, NULL, (unsigned)team) != 0) {
        gap_fatal("CLUSTER_CoresFork: cannot initialize the team barrier");
    }

    gap_fork_slot_t slots[GAP_SHIM_MAX_CORES];
    pthread_t threads[GAP_SHIM_MAX_CORES];
    for (int core = 1; core < team; core++) {
        slots[core].fn = fn;
        slots[core].arg = arg;
        slots[core].core = core;
        if (pthread_create(&threads[core], NULL, fork_main, &slots[core]) != 0) {
            gap_fatal("CLUSTER_CoresFork: cannot create worker thread");
        }
    }
    /* the dispatcher itself acts as core 0 */
    set_core_id(0);
    fn(arg);
    clear_core_id();
    for (int core = 1; core < team; core++) {
        pthread_join(threads[core], NULL);
    }
    pthread_barrier_destroy(&g_team_barrier);
    g_cluster.in_fork = 0;
}

int CLUSTER_CoreId(void) {
    ensure_keys();
    int core = current_core();
    if (core < 0) {
        gap_fatal("CLUSTER_CoreId: only valid inside a fork");
    }
    return core;
}

void CLUSTER_Barrier(void) {
    ensure_keys();
    if (current_core() < 0) {
        gap_fatal("CLUSTER_Barrier: only valid inside a fork");
    }
    int rc = pthread_barrier_wait(&g_team_barrier);
    if (rc != 0 && rc != PTHREAD_BARRIER_SERIAL_THREAD) {
        gap_fatal("CLUSTER_Barrier: barrier wait failed");
    }
}

/* ---- critical sections -------------------------------------------------- */

void gap_shim_critical_enter(void) {
    ensure_keys();
    if (current_core() < 0) {
        gap_fatal("CRITICAL_ENTER: only valid inside a fork");
    }
    intptr_t depth = (intptr_t)pthread_getspecific(g_critical_key);
    if (depth != 0) {
        gap_fatal("CRITICAL_ENTER: critical sections do not nest");
    }
    pthread_mutex_lock(&g_critical_mutex);
    pthread_setspecific(g_critical_key, (void *)(intptr_t)1);
}

void gap_shim_critical_exit(void) {
    ensure_keys();
    intptr_t depth = (intptr_t)pthread_getspecific(g_critical_key);
    if (depth == 0) {
        gap_fatal("CRITICAL_EXIT: no matching CRITICAL_ENTER");
    }
    pthread_setspecific(g_critical_key, NULL);
    pthread_mutex_unlock(&g_critical_mutex);
}

/* ---- cluster-local memory ------------------------------------------------ */

static pthread_mutex_t g_l1_mutex = PTHREAD_MUTEX_INITIALIZER;
static size_t g_l1_current;
static size_t g_l1_peak;

void *L1_Malloc(size_t size) {
    if (size == 0) {
        return NULL;
    }
    void *ptr = malloc(size);
    if (ptr == NULL) {
        gap_fatal("L1_Malloc: out of memory");
    }
    pthread_mutex_lock(&g_l1_mutex);
    g_l1_current += size;
    if (g_l1_current > g_l1_peak) {
        g_l1_peak = g_l1_current;
    }
    pthread_mutex_unlock(&g_l1_mutex);
    return ptr;
}

void L1_Free(void *ptr, size_t size) {
    if (ptr == NULL) {
        return;
    }
    pthread_mutex_lock(&g_l1_mutex);
    if (size > g_l1_current) {
        pthread_mutex_unlock(&g_l1_mutex);
        gap_fatal("L1_Free: size exceeds outstanding allocations");
    }
    g_l1_current -= size;
    pthread_mutex_unlock(&g_l1_mutex);
    free(ptr);
}

size_t L1_HighWater(void) {
    pthread_mutex_lock(&g_l1_mutex);
    size_t peak = g_l1_peak;
    pthread_mutex_unlock(&g_l1_mutex);
    return peak;
}
