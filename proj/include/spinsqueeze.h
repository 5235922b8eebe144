/* C interface to the spinsqueeze simulation core.
 *
 * All functions return either an owned pointer (NULL on failure) or a
 * status code (SSQ_OK on success). On failure, ssq_last_error() returns a
 * thread-local message and ssq_last_error_code() the matching status.
 * Objects are opaque; free them with the matching *_free function.
 */
#ifndef SPINSQUEEZE_H
#define SPINSQUEEZE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SSQ_OK 0
#define SSQ_ERR_INVALID_ARGUMENT 2
#define SSQ_ERR_BUDGET 3
#define SSQ_ERR_NUMERICAL 4
#define SSQ_ERR_IO 5
#define SSQ_ERR_NOT_BRACKETED 6
#define SSQ_ERR_INTERNAL 7

typedef struct ssq_operator ssq_operator; /* sparse Hermitian operator */
typedef struct ssq_state ssq_state;       /* complex amplitude vector  */

const char* ssq_version(void);
const char* ssq_last_error(void);
int ssq_last_error_code(void);

/* ---- states ---------------------------------------------------------- */

/* Coherent spin state of n particles along (theta, phi). */
ssq_state* ssq_state_css(int n, double theta, double phi);
/* |css(n_s; theta_s, phi_s)> (x) |css(n_j; theta_j, phi_j)>. */
ssq_state* ssq_state_product_css(int n_s, int n_j, double theta_s,
                                 double phi_s, double theta_j, double phi_j);
ssq_state* ssq_state_clone(const ssq_state* state);
void ssq_state_free(ssq_state* state);

int64_t ssq_state_dim(const ssq_state* state);
/* Copies amplitudes into caller buffers of length len (= dimension). */
int ssq_state_amplitudes(const ssq_state* state, double* re, double* im,
                         int64_t len);

/* ---- Hamiltonians ---------------------------------------------------- */

/* Exact two-ensemble coupling gx Sx Jx + gy Sy Jy + gz Sz Jz. */
ssq_operator* ssq_build_h_int(int n_s, int n_j, double gx, double gy,
                              double gz);
/* Effective single-ensemble Hamiltonians derived from the coupling. */
ssq_operator* ssq_build_h_oat(int n_s, double gx, double gy, double gz);
ssq_operator* ssq_build_h_eff(int n_s, int n_j, double gx, double gy,
                              double gz);
ssq_operator* ssq_build_h_tat(int n_s, double gx, double gy, double gz);
void ssq_operator_free(ssq_operator* op);
int64_t ssq_operator_dim(const ssq_operator* op);
int64_t ssq_operator_nnz(const ssq_operator* op);

/* ---- dynamics and observables ---------------------------------------- */

/* In-place psi <- exp(-i H t) psi. propagator_json may be NULL or a JSON
 * object with keys krylov_dim, step_tol, max_substeps, dense_threshold. */
int ssq_evolve(const ssq_operator* h, ssq_state* psi, double t,
               const char* propagator_json);

/* Applies exp(-i angle S_axis) ("x"/"y"/"z") to the S factor; dim_j = 1
 * for a bare single-ensemble state. */
int ssq_rotate_s(ssq_state* psi, int n_s, int64_t dim_j, const char* axis,
                 double angle);

/* Collective moments of the S ensemble: out_mean = {<Sx>,<Sy>,<Sz>},
 * out_second = row-major symmetrized second moments. dim_j = 1 for bare
 * states, (n_j + 1) for product states. */
int ssq_moments(const ssq_state* psi, int n_s, int64_t dim_j,
                double out_mean[3], double out_second[9]);

/* xi^2 = 4 (Delta S_perp)^2_min / n_s. */
int ssq_squeezing_parameter(const ssq_state* psi, int n_s, int64_t dim_j,
                            double* out_xi2);

/* ---- experiment drivers ---------------------------------------------- */

/* Runs a complete experiment described by a JSON config (see the README
 * for the schema; "task" selects trace | scaling | noise | husimi) and
 * returns a newly allocated JSON summary. Output files are written when
 * the config names an output_prefix. Free the result with ssq_string_free.
 */
char* ssq_run_experiment(const char* config_json);

/* Runs the library invariant suite; returns a JSON report. Sets
 * *out_all_pass to 1 when every check passed. */
char* ssq_run_verify(int* out_all_pass);

void ssq_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPINSQUEEZE_H */
