#ifndef ROSTER_MILP_H
#define ROSTER_MILP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RM_STATUS_OK = 0,
  RM_STATUS_NULL_ARGUMENT = 1,
  RM_STATUS_INVALID_UTF8 = 2,
  RM_STATUS_INVALID_ARGUMENT = 3,
  RM_STATUS_IO = 4,
  RM_STATUS_PARSE = 5,
  RM_STATUS_IDENTIFY = 6,
  RM_STATUS_EXTRACT = 7,
  RM_STATUS_ASSEMBLE = 8,
  RM_STATUS_SOLVER = 9,
  RM_STATUS_CONFIG = 10,
  RM_STATUS_NOT_AVAILABLE = 11,
  RM_STATUS_PANIC = 12,
} RmStatus;

typedef enum {
  RM_SOLVE_STATUS_OPTIMAL = 0,
  RM_SOLVE_STATUS_INFEASIBLE = 1,
  RM_SOLVE_STATUS_UNBOUNDED = 2,
  RM_SOLVE_STATUS_NODE_LIMIT = 3,
} RmSolveStatus;

/**
 * A modelling graph.
 */
typedef struct RmGraph RmGraph;

/**
 * A formulated model with its LaTeX and LP renderings.
 */
typedef struct RmModel RmModel;

/**
 * Solver outcome with the variable assignment in model order.
 */
typedef struct RmSolveResult RmSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. The pointer stays valid
 * until the next failing call on the same thread; never free it.
 */
const char *rm_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void rm_string_free(char *s);

/**
 * Bundled graph for `problem_type` (`"shift"` or `"days-off"`, or the long names).
 *
 * # Safety
 * `problem_type` must be a NUL-terminated string; `out` must be writable.
 */
RmStatus rm_graph_bundled(const char *problem_type, RmGraph **out);

/**
 * Loads and validates a graph file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
RmStatus rm_graph_load(const char *path, RmGraph **out);

/**
 * Number of nodes in the graph, 0 for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
size_t rm_graph_node_count(const RmGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null; it is invalid afterwards.
 */
void rm_graph_free(RmGraph *graph);

/**
 * Formulates `description` with the bundled task registry, replaying LLM
 * responses for `model_id` from `fixture_dir`. `max_overtime` below 0
 * keeps the extracted value.
 *
 * # Safety
 * String arguments must be NUL-terminated; `graph` must be live; `out` writable.
 */
RmStatus rm_formulate_replay(const RmGraph *graph,
                             const char *description,
                             const char *model_id,
                             const char *fixture_dir,
                             int32_t max_overtime,
                             RmModel **out);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
size_t rm_model_var_count(const RmModel *model);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
size_t rm_model_row_count(const RmModel *model);

/**
 * LaTeX document for the model, freed with `rm_string_free`.
 *
 * # Safety
 * `model` must be live; `out` writable.
 */
RmStatus rm_model_latex(const RmModel *model, char **out);

/**
 * LP-format text for the model, freed with `rm_string_free`.
 *
 * # Safety
 * `model` must be live; `out` writable.
 */
RmStatus rm_model_lp(const RmModel *model, char **out);

/**
 * # Safety
 * `model` must be a live handle or null; it is invalid afterwards.
 */
void rm_model_free(RmModel *model);

/**
 * Solves the model. `node_limit` 0 uses the default limit.
 *
 * # Safety
 * `model` must be live; `out` writable.
 */
RmStatus rm_model_solve(const RmModel *model, size_t node_limit, RmSolveResult **out);

/**
 * Parses and solves an LP-format model. `node_limit` 0 uses the default limit.
 *
 * # Safety
 * `lp_text` must be NUL-terminated; `out` writable.
 */
RmStatus rm_lp_solve(const char *lp_text, size_t node_limit, RmSolveResult **out);

/**
 * # Safety
 * `result` must be live; `out` writable.
 */
RmStatus rm_result_status(const RmSolveResult *result, RmSolveStatus *out);

/**
 * Objective of the returned assignment; `NotAvailable` when there is none.
 *
 * # Safety
 * `result` must be live; `out` writable.
 */
RmStatus rm_result_objective(const RmSolveResult *result, double *out);

/**
 * Number of variables, 0 for a null handle.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
size_t rm_result_var_count(const RmSolveResult *result);

/**
 * Name of variable `index`, borrowed from the result.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
const char *rm_result_var_name(const RmSolveResult *result, size_t index);

/**
 * Value of variable `index` in the assignment.
 *
 * # Safety
 * `result` must be live; `out` writable.
 */
RmStatus rm_result_var_value(const RmSolveResult *result, size_t index, double *out);

/**
 * # Safety
 * `result` must be a live handle or null; it is invalid afterwards.
 */
void rm_result_free(RmSolveResult *result);

/**
 * Execution accuracy `matches / total`.
 *
 * # Safety
 * `out` must be writable.
 */
RmStatus rm_compute_ea(size_t matches, size_t total, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROSTER_MILP_H */
