/* C interface to the line spectral estimation library.
 *
 * Structured inputs and results are JSON strings. Strings returned through `char**`
 * are owned by the caller and released with lse_string_free. On failure every call
 * returns a nonzero status and lse_last_error() describes the problem (per thread). */
#ifndef LSE_LSE_H
#define LSE_LSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(LSE_BUILDING_LIBRARY)
#define LSE_API __attribute__((visibility("default")))
#else
#define LSE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lse_status {
  LSE_OK = 0,
  LSE_ERR_INVALID_ARGUMENT = 1,
  LSE_ERR_DOMAIN = 2,
  LSE_ERR_SOLVER = 3,
  LSE_ERR_IO = 4,
  LSE_ERR_INTERNAL = 5
} lse_status;

typedef struct lse_observation lse_observation;

LSE_API const char* lse_version(void);
LSE_API const char* lse_last_error(void);
LSE_API void lse_string_free(char* s);

/* omega holds L one-based ascending indices in [1, M]; y is given as separate re/im arrays. */
LSE_API lse_status lse_observation_create(int M, const int* omega, size_t L, const double* re,
                                          const double* im, lse_observation** out);
/* {"M", "sampling", "model", "noise"}; phases, random index sets and noise come from seed. */
LSE_API lse_status lse_observation_generate(const char* config_json, uint64_t seed,
                                            lse_observation** out);
LSE_API lse_status lse_observation_from_json(const char* json, lse_observation** out);
/* CSV with header index,re,im. M <= 0 takes the largest index. */
LSE_API lse_status lse_observation_from_csv(const char* csv, int M, lse_observation** out);
LSE_API lse_status lse_observation_to_json(const lse_observation* obs, char** out);
LSE_API lse_status lse_observation_to_csv(const lse_observation* obs, char** out);
LSE_API lse_status lse_observation_size(const lse_observation* obs, int* M, int* L);
LSE_API void lse_observation_free(lse_observation* obs);

/* Gridless solve. options: {"variant": "lasso"|"sr"|"lad"|"bp", "weight", "sigma" (lasso
 * weight from the noise variance when no weight is given), "solver": {...}, "full": bool}.
 * The result carries the solution and its Vandermonde decomposition. */
LSE_API lse_status lse_solve(const lse_observation* obs, const char* options_json, char** out);

/* options: {"assumption": "hetero"|"homo"|{"kind": "known", "sigma0"}, "solver": {...},
 * "rank_tol", "equivalence": bool, "sigma0"}. */
LSE_API lse_status lse_gls(const lse_observation* obs, const char* options_json, char** out);

/* Covariance cleaning, SORTE and root-MUSIC on the covariance of a base method.
 * options: {"method": "gls-hetero"|"gls-homo"|"ast"|"bp"|"and-lad"|"and-sr", "sigma",
 * "order", "shift_before_sorte", "solver": {...}}. */
LSE_API lse_status lse_postprocess(const lse_observation* obs, const char* options_json,
                                   char** out);

/* Grid l1 baseline. options: {"variant", "weight", "N", "grid": {...}, "sandwich": bool,
 * "solver": {...}}. */
LSE_API lse_status lse_grid(const lse_observation* obs, const char* options_json, char** out);

/* Lasso dual certificate. options: {"mu" | "sigma", "grid_size", "solver": {...}}. */
LSE_API lse_status lse_certify(const lse_observation* obs, const char* options_json, char** out);

/* Monte-Carlo experiment. Outputs are written under out_dir when it is not NULL.
 * acceptance_passed (optional) receives 1 when every acceptance-tagged check passed. */
LSE_API lse_status lse_run_experiment(const char* config_json, const char* out_dir,
                                      int* acceptance_passed, char** summary_json);

LSE_API lse_status lse_mu_star(int L, int M_bar, double sigma, double* mu, double* p_star);

#ifdef __cplusplus
}
#endif

#endif
