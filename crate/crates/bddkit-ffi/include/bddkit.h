/* C interface for the bddkit lattice/BDD toolkit.
 *
 * Conventions:
 *   - every fallible call returns an int error code (BDDKIT_OK == 0);
 *   - instance handles are opaque and freed with bddkit_instance_free;
 *   - strings returned by the library are freed with bddkit_string_free;
 *   - the norm order p is passed as the fraction p_num/p_den (p >= 1);
 *   - the rank ratio C is a double, with INFINITY for the limit definition.
 */

#ifndef BDDKIT_H
#define BDDKIT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define BDDKIT_OK 0
#define BDDKIT_ERR_ARGUMENT 1
#define BDDKIT_ERR_PARSE 2
#define BDDKIT_ERR_CONSTRAINT 3
#define BDDKIT_ERR_INTERNAL 4

#define BDDKIT_POLICY_SMALLEST 0
#define BDDKIT_POLICY_RANDOM 1

typedef struct BddkitInstance BddkitInstance;

/* Static message for an error code; do not free. */
const char *bddkit_strerror(int code);

/* The relative-distance threshold alpha*_{p,C}, bracketed to tol. */
int bddkit_alpha_star(uint64_t p_num, uint64_t p_den, double c, double tol,
                      double *out);

/* The p at which alpha*_{p,C} crosses target_alpha. */
int bddkit_crossover_p(double target_alpha, double c, double tol, double *out);

/* The analytic upper bound on the number of integer points of lp norm
 * at most r in n dimensions. */
int bddkit_mo_bound(uint64_t p_num, uint64_t p_den, double r, uint32_t n,
                    double *out);

/* Parse an instance-file JSON document (kinds: gapcvp, stbdd, bdd). */
int bddkit_instance_from_json(const char *json, BddkitInstance **out);

/* Serialize a handle back to JSON; free the result with
 * bddkit_string_free. */
int bddkit_instance_to_json(const BddkitInstance *inst, char **out);

/* Run the randomized GapCVP' -> BDD reduction on a "gapcvp" handle.
 * alpha is "auto" or a rational/decimal string; policy is one of the
 * BDDKIT_POLICY_* constants. Returns a new "bdd" handle in *out.
 * BDDKIT_ERR_CONSTRAINT signals parameters outside the theorem's regime
 * (alpha not above the threshold, or T < 10S). */
int bddkit_reduce(const BddkitInstance *inst, double c, const char *alpha,
                  int policy, uint64_t seed, BddkitInstance **out);

void bddkit_instance_free(BddkitInstance *inst);
void bddkit_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* BDDKIT_H */
