/*
 * gap_shim.h - host-side stand-in for the GAP8 cluster API.
 *
 * One fabric-controller thread drives the program; CLUSTER_SendTask hands a
 * master function to a dispatcher context, and CLUSTER_CoresFork replicates a
 * worker across the configured team (at most 8 logical cores). Misuse of the
 * protocol aborts with a message rather than emulating undefined hardware
 * behavior.
 *
 * Compile translated programs together with gap_shim.c using any C99
 * toolchain and the platform's standard threading linkage (-pthread).
 */
#ifndef GAP_SHIM_H
#define GAP_SHIM_H

#include <stddef.h>

#define GAP_SHIM_MAX_CORES 8

/* Cluster lifecycle. cluster_id must be 0. */
void CLUSTER_Start(int cluster_id, int number_of_cores);
void CLUSTER_SendTask(int cluster_id, void (*entry)(void *), void *arg, int flags);
void CLUSTER_Wait(int cluster_id);
void CLUSTER_Stop(int cluster_id);

/* Team control, valid only inside a dispatched task / fork. */
void CLUSTER_CoresFork(void (*fn)(void *), void *arg);
int CLUSTER_CoreId(void);
void CLUSTER_Barrier(void);

/* Team size, valid between Start and Stop. */
int CLUSTER_TeamSize(void);

/* Cluster-local scratch memory, backed by host allocation. */
void *L1_Malloc(size_t size);
void L1_Free(void *ptr, size_t size);
size_t L1_HighWater(void);

/* Unnamed critical section: one global mutual-exclusion primitive. */
void gap_shim_critical_enter(void);
void gap_shim_critical_exit(void);
#define CRITICAL_ENTER() gap_shim_critical_enter()
#define CRITICAL_EXIT() gap_shim_critical_exit()

#endif /* GAP_SHIM_H */
