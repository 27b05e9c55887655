#ifndef HANKELOPS_H
#define HANKELOPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum HankelopsStatus {
  HankelopsStatus_Ok = 0,
  HankelopsStatus_InvalidParameter = 1,
  HankelopsStatus_GridMismatch = 2,
  HankelopsStatus_NonConvergent = 3,
  HankelopsStatus_Singular = 4,
  HankelopsStatus_InvalidInput = 5,
  HankelopsStatus_NullPointer = 6,
} HankelopsStatus;

/**
 * Opaque weighted-grid handle.
 */
typedef struct HankelopsGrid HankelopsGrid;

/**
 * Opaque transform-plan handle.
 */
typedef struct HankelopsPlan HankelopsPlan;

/**
 * Opaque multiplier-symbol handle.
 */
typedef struct HankelopsSymbol HankelopsSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message (UTF-8, NUL-terminated) into `buf`; returns
 * the full message length in bytes, excluding the terminator.
 */
uintptr_t hankelops_last_error(char *buf, uintptr_t cap);

/**
 * Build a weighted grid with geometric axes `[lowers[j], uppers[j]]`, one
 * order exponent per axis, and `per_panel` quadrature nodes per panel.
 *
 * # Safety
 * `lambdas`, `lowers` and `uppers` must point to `dim` readable doubles and
 * `out` to a writable pointer slot.
 */
enum HankelopsStatus hankelops_grid_new(const double *lambdas,
                                        const double *lowers,
                                        const double *uppers,
                                        uintptr_t dim,
                                        uintptr_t per_panel,
                                        int origin_strip,
                                        struct HankelopsGrid **out);

/**
 * Free a grid handle (accepts NULL).
 *
 * # Safety
 * `grid` must be NULL or a pointer returned by `hankelops_grid_new` that
 * has not been freed.
 */
void hankelops_grid_free(struct HankelopsGrid *grid);

/**
 * Total number of grid nodes (the flat array length for functions).
 *
 * # Safety
 * `grid` must be a live grid handle and `out` writable.
 */
enum HankelopsStatus hankelops_grid_node_count(const struct HankelopsGrid *grid, uintptr_t *out);

/**
 * Write the coordinates of flat node `index` into `out` (dim doubles).
 *
 * # Safety
 * `grid` must be a live grid handle; `out` must hold `dim` doubles.
 */
enum HankelopsStatus hankelops_grid_node(const struct HankelopsGrid *grid,
                                         uintptr_t index,
                                         double *out);

/**
 * The quadrature weight (including the measure density) of flat node
 * `index`, so callers can form weighted norms and integrals.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` writable.
 */
enum HankelopsStatus hankelops_grid_measure_weight(const struct HankelopsGrid *grid,
                                                   uintptr_t index,
                                                   double *out);

/**
 * Build a transform plan for `grid`.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` a writable pointer slot.
 */
enum HankelopsStatus hankelops_plan_new(const struct HankelopsGrid *grid,
                                        struct HankelopsPlan **out);

/**
 * Free a plan handle (accepts NULL).
 *
 * # Safety
 * `plan` must be NULL or a live plan handle.
 */
void hankelops_plan_free(struct HankelopsPlan *plan);

/**
 * Create a symbol from a preset string such as `"identity"`,
 * `"imaginary-power:1.0"`, `"resolvent:2.0"`, `"indicator:0.5"` or
 * `"custom:exp(-t)*cos(t)"`.
 *
 * # Safety
 * `preset` must be a NUL-terminated string and `out` writable.
 */
enum HankelopsStatus hankelops_symbol_new(const char *preset, struct HankelopsSymbol **out);

/**
 * Free a symbol handle (accepts NULL).
 *
 * # Safety
 * `symbol` must be NULL or a live symbol handle.
 */
void hankelops_symbol_free(struct HankelopsSymbol *symbol);

/**
 * Apply the Hankel transform to a function given as flat node arrays.
 * `im` may be NULL for real input; `out_im` may be NULL to drop the
 * imaginary part.
 *
 * # Safety
 * `plan` must be a live plan handle; `re`, `im`, `out_re`, `out_im` must
 * be NULL or arrays of `node_count` doubles.
 */
enum HankelopsStatus hankelops_transform_apply(const struct HankelopsPlan *plan,
                                               const double *re,
                                               const double *im,
                                               double *out_re,
                                               double *out_im);

/**
 * Apply the spectral-path multiplier operator for `symbol`.
 *
 * # Safety
 * As for `hankelops_transform_apply`, plus a live symbol handle.
 */
enum HankelopsStatus hankelops_spectral_apply(const struct HankelopsSymbol *symbol,
                                              const struct HankelopsPlan *plan,
                                              const double *re,
                                              const double *im,
                                              double *out_re,
                                              double *out_im);

/**
 * Evaluate the n-dimensional heat kernel W_t(x, y).
 *
 * # Safety
 * `lambdas`, `x`, `y` must point to `dim` doubles; `out` writable.
 */
enum HankelopsStatus hankelops_heat_kernel(const double *lambdas,
                                           uintptr_t dim,
                                           double t,
                                           const double *x,
                                           const double *y,
                                           double *out);

/**
 * Evaluate the time derivative of the n-dimensional heat kernel.
 *
 * # Safety
 * As for `hankelops_heat_kernel`.
 */
enum HankelopsStatus hankelops_dt_heat_kernel(const double *lambdas,
                                              uintptr_t dim,
                                              double t,
                                              const double *x,
                                              const double *y,
                                              double *out);

/**
 * Evaluate the off-diagonal multiplier kernel K(x, y); returns
 * `Singular` when x == y.
 *
 * # Safety
 * `lambdas`, `x`, `y` must point to `dim` doubles; outputs writable.
 */
enum HankelopsStatus hankelops_kernel_k(const struct HankelopsSymbol *symbol,
                                        const double *lambdas,
                                        uintptr_t dim,
                                        const double *x,
                                        const double *y,
                                        double *out_re,
                                        double *out_im);

/**
 * Evaluate the Euclidean comparison kernel H(x, y); returns `Singular`
 * when x == y.
 *
 * # Safety
 * `x`, `y` must point to `dim` doubles; outputs writable.
 */
enum HankelopsStatus hankelops_kernel_h(const struct HankelopsSymbol *symbol,
                                        uintptr_t dim,
                                        const double *x,
                                        const double *y,
                                        double *out_re,
                                        double *out_im);

/**
 * The principal-value normalization constant C for dimension `n` (equals
 * 1 for profiles with a unit right-limit at zero).
 *
 * # Safety
 * `symbol` must be a live symbol handle and `out` writable.
 */
enum HankelopsStatus hankelops_normalization_c(const struct HankelopsSymbol *symbol,
                                               uintptr_t n,
                                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HANKELOPS_H */
