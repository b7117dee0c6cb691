/* C interface to the relulab shared library.
 *
 * Conventions:
 *   - Every fallible call returns rrl_status; RRL_OK is 0.
 *   - On failure, rrl_last_error() returns a thread-local message describing
 *     the most recent failure on the calling thread.
 *   - Strings returned through char** out-parameters are heap-allocated and
 *     must be released with rrl_string_free().
 *   - Handles (rrl_ensemble*) are opaque and must be released with their
 *     matching _free function.
 */
#ifndef RELULAB_H
#define RELULAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrl_status {
  RRL_OK = 0,
  RRL_ERR_INVALID_ARGUMENT = 1,
  RRL_ERR_SHAPE = 2,
  RRL_ERR_INFEASIBLE = 3,
  RRL_ERR_CONSTRUCTION = 4,
  RRL_ERR_PARSE = 5,
  RRL_ERR_IO = 6,
  RRL_ERR_INTERNAL = 7
} rrl_status;

const char* rrl_version(void);
const char* rrl_last_error(void);
void rrl_string_free(char* s);

/* ---- closed-form bound calculators ---- */

typedef struct rrl_theory_inputs {
  uint64_t n;    /* training samples, >= 1 */
  uint32_t d;    /* input dimension, >= 10 */
  double sigma;  /* noise std, > 0 */
  double tau;    /* packing constant, > 0 */
  double vs;     /* layer l1 budget, > 0 */
  uint32_t depth;/* hidden layers, >= 1 */
  double kappa;  /* local-packing constant, >= 1 (use 4 by default) */
} rrl_theory_inputs;

rrl_status rrl_capacity_factor(double vs, uint32_t depth, double* out);
rrl_status rrl_critical_radius(const rrl_theory_inputs* in, double* out);
rrl_status rrl_minimax_lower_bound(const rrl_theory_inputs* in, double* out);
/* in->n is ignored; epsilon is the target error sqrt. */
rrl_status rrl_sample_complexity(const rrl_theory_inputs* in, double epsilon, uint64_t* out);
/* Full report as JSON: vf, c, delta, minimax_lb, mi_upper, packing_log_lb. */
rrl_status rrl_bound_report_json(const rrl_theory_inputs* in, char** json_out);

/* ---- packing ensembles ---- */

typedef struct rrl_ensemble rrl_ensemble;

rrl_status rrl_ensemble_build(uint32_t d, uint32_t m, double tau, double vf, uint64_t seed,
                              rrl_ensemble** out);
/* Picks the codeword weight from the packing radius delta. */
rrl_status rrl_ensemble_build_for_radius(uint32_t d, double delta, double tau, double vf,
                                         uint64_t seed, rrl_ensemble** out);
void rrl_ensemble_free(rrl_ensemble* ensemble);

rrl_status rrl_ensemble_size(const rrl_ensemble* ensemble, uint32_t* out);
rrl_status rrl_ensemble_weight(const rrl_ensemble* ensemble, uint32_t* out);
rrl_status rrl_ensemble_codebook_text(const rrl_ensemble* ensemble, char** out);
rrl_status rrl_ensemble_json(const rrl_ensemble* ensemble, char** out);
/* Pairwise closed-form separations; all_pass = 1 iff every pair clears the
 * floor (tau*vf)^2/(25m). */
rrl_status rrl_ensemble_certificate_csv(const rrl_ensemble* ensemble, char** out, int* all_pass);

/* ---- Monte Carlo verification ---- */

/* CSV columns: lemma,target,estimate,std_error,n_samples,seed,pass.
 * all_pass = 1 iff every estimate is within 4 standard errors of its target. */
rrl_status rrl_verify_csv(uint64_t n_samples, uint64_t seed, char** csv_out, int* all_pass);

/* ---- scaling sweeps and rate fits ---- */

/* config_json schema is documented in the README (student, teacher, sigma,
 * n_grid, seeds, test_size, train). Outputs are the rows and aggregate CSVs. */
rrl_status rrl_sweep_run(const char* config_json, char** rows_csv_out, char** aggregate_csv_out);

/* Echoes the parsed sweep config back as canonical JSON (validation + echo). */
rrl_status rrl_sweep_config_echo(const char* config_json, char** canonical_json_out);

/* aggregate_csv has columns n,mean_error,std_error,count. verdict_json_out
 * carries both fits and the winner; plot_csv_out has columns
 * n,observed,fitted_sqrt,fitted_inv. */
rrl_status rrl_fit_aggregate_csv(const char* aggregate_csv, char** verdict_json_out,
                                 char** plot_csv_out);

#ifdef __cplusplus
}
#endif

#endif /* RELULAB_H */
