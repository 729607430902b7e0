#ifndef POSTSIM_H
#define POSTSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PostsimStatus {
  POSTSIM_STATUS_OK = 0,
  POSTSIM_STATUS_NULL_POINTER = 1,
  POSTSIM_STATUS_INVALID_UTF8 = 2,
  POSTSIM_STATUS_SYNTAX = 3,
  POSTSIM_STATUS_VALIDATION = 4,
  POSTSIM_STATUS_ZERO_PROBABILITY = 5,
  POSTSIM_STATUS_ZERO_MASS = 6,
  POSTSIM_STATUS_UNSUPPORTED_GATE = 7,
  POSTSIM_STATUS_PATH_BUDGET_EXCEEDED = 8,
  POSTSIM_STATUS_PRECONDITION_VIOLATED = 9,
  POSTSIM_STATUS_DOMAIN = 10,
  POSTSIM_STATUS_PANIC = 11,
} PostsimStatus;

/**
 * A parsed circuit.
 */
typedef struct PostsimCircuit PostsimCircuit;

/**
 * A Boolean function given by its truth table.
 */
typedef struct PostsimInstance PostsimInstance;

/**
 * The outcome of a majority decision.
 */
typedef struct PostsimReport PostsimReport;

/**
 * A final state vector.
 */
typedef struct PostsimState PostsimState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *postsim_last_error_message(void);

/**
 * Parses circuit text into a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PostsimStatus postsim_circuit_parse(const char *text, struct PostsimCircuit **out);

/**
 * # Safety
 * `circuit` must come from `postsim_circuit_parse` or be NULL.
 */
void postsim_circuit_free(struct PostsimCircuit *circuit);

/**
 * Qubit count, or 0 for a NULL handle.
 *
 * # Safety
 * `circuit` must be a live handle or NULL.
 */
size_t postsim_circuit_num_qubits(const struct PostsimCircuit *circuit);

/**
 * Dense simulation from basis input `input`; postselections are applied
 * and the result renormalized.
 *
 * # Safety
 * `circuit` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_run_dense(const struct PostsimCircuit *circuit,
                                     size_t input,
                                     struct PostsimState **out);

/**
 * # Safety
 * `state` must come from `postsim_run_dense` or be NULL.
 */
void postsim_state_free(struct PostsimState *state);

/**
 * Number of amplitudes, or 0 for a NULL handle.
 *
 * # Safety
 * `state` must be a live handle or NULL.
 */
size_t postsim_state_dim(const struct PostsimState *state);

/**
 * # Safety
 * `state` must be a live handle; `re` and `im` valid pointers.
 */
enum PostsimStatus postsim_state_amplitude(const struct PostsimState *state,
                                           size_t index,
                                           double *re,
                                           double *im);

/**
 * P(accept = 1 | flag = 1).
 *
 * # Safety
 * `circuit` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_conditional_accept_prob(const struct PostsimCircuit *circuit,
                                                   size_t input,
                                                   double *out);

/**
 * Exact path-sum test of P(accept | flag) > 1/2; `tie` is set when the two
 * sides are exactly equal.
 *
 * # Safety
 * `circuit` must be a live handle; `accept` and `tie` valid pointers.
 */
enum PostsimStatus postsim_pp_decide(const struct PostsimCircuit *circuit,
                                     size_t input,
                                     bool *accept,
                                     bool *tie);

/**
 * Builds an instance on `n` inputs from `len == 2^n` bytes, nonzero = 1.
 *
 * # Safety
 * `bits` must point to `len` readable bytes and `out` be a valid pointer.
 */
enum PostsimStatus postsim_instance_new(size_t n,
                                        const uint8_t *bits,
                                        size_t len,
                                        struct PostsimInstance **out);

/**
 * Parses truth-table text (`n <n>` then the bits).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PostsimStatus postsim_instance_parse(const char *text, struct PostsimInstance **out);

/**
 * Widened instance with the same answer and at least one 1.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_instance_pad(const struct PostsimInstance *inst,
                                        struct PostsimInstance **out);

/**
 * Number of ones in the table, or 0 for a NULL handle.
 *
 * # Safety
 * `inst` must be a live handle or NULL.
 */
uint64_t postsim_instance_count(const struct PostsimInstance *inst);

/**
 * # Safety
 * `inst` must come from this library or be NULL.
 */
void postsim_instance_free(struct PostsimInstance *inst);

/**
 * Closed-form sweep decision.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_decide_analytic(const struct PostsimInstance *inst,
                                           struct PostsimReport **out);

/**
 * Seeded sampling decision with exact postselection.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_decide_sampled(const struct PostsimInstance *inst,
                                          uint32_t reps,
                                          uint64_t seed,
                                          struct PostsimReport **out);

/**
 * Seeded sampling decision under the |amp|^p rule with mass-boost
 * postselection; `p` must differ from 2.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum PostsimStatus postsim_decide_bqp_p(const struct PostsimInstance *inst,
                                        double p,
                                        uint32_t reps,
                                        uint64_t seed,
                                        uint32_t q_poly,
                                        struct PostsimReport **out);

/**
 * True when the report concluded s < 2^(n-1); false for a NULL handle.
 *
 * # Safety
 * `report` must be a live handle or NULL.
 */
bool postsim_report_verdict(const struct PostsimReport *report);

/**
 * Largest overlap in an analytic or circuit report, or NaN if there is none.
 *
 * # Safety
 * `report` must be a live handle or NULL.
 */
double postsim_report_max_overlap(const struct PostsimReport *report);

/**
 * The report as one JSON object. Release with `postsim_string_free`.
 *
 * # Safety
 * `report` must be a live handle or NULL.
 */
char *postsim_report_json(const struct PostsimReport *report);

/**
 * # Safety
 * `report` must come from this library or be NULL.
 */
void postsim_report_free(struct PostsimReport *report);

/**
 * # Safety
 * `s` must come from `postsim_report_json` or be NULL.
 */
void postsim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSTSIM_H */
