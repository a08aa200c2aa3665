#ifndef SKELLAMK_H
#define SKELLAMK_H

/* Generated by cbindgen from the skellamk-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_UTF8 = 2,
  SK_STATUS_PARSE_ERROR = 3,
  SK_STATUS_DOMAIN_ERROR = 4,
  SK_STATUS_UNSUPPORTED_FAMILY = 5,
  SK_STATUS_NON_CONVERGENCE = 6,
  SK_STATUS_OVERFLOW = 7,
  SK_STATUS_IO_ERROR = 8,
  SK_STATUS_INTERNAL_ERROR = 9,
} SkStatus;

/*
 Opaque PMF table handle.
 */
typedef struct SkPmfTable SkPmfTable;

/*
 Opaque process handle.
 */
typedef struct SkProcess SkProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy the last error message into `buf` (NUL-terminated, truncated to
 `len` bytes including the terminator). Returns the full message length.

 # Safety
 `buf` must point to at least `len` writable bytes, or be NULL (in which
 case only the required length is returned).
 */
size_t skellamk_last_error(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *skellamk_version(void);

/*
 Create a process handle from a family name and `key=value` parameters
 (same syntax as the CLI, e.g. `"spok"`, `"k=2,l1=1,l2=1"`).

 # Safety
 `name` and `params` are NUL-terminated strings; `out` must be valid.
 */
enum SkStatus skellamk_process_parse(const char *name, const char *params, struct SkProcess **out);

/*
 Create a process handle from its JSON description.

 # Safety
 `json` is a NUL-terminated string; `out` must be valid.
 */
enum SkStatus skellamk_process_from_json(const char *json, struct SkProcess **out);

/*
 Release a process handle.

 # Safety
 `p` must come from a `skellamk_process_*` constructor (or be NULL).
 */
void skellamk_process_free(struct SkProcess *p);

/*
 Evaluate `P(X(t) = m)`.

 # Safety
 `p` is a live process handle; `out` must be valid.
 */
enum SkStatus skellamk_pmf(const struct SkProcess *p, double t, int64_t m, double tol, double *out);

/*
 Mean and variance of `X(t)`.

 # Safety
 `p` is a live process handle; `mean` and `variance` must be valid.
 */
enum SkStatus skellamk_moments(const struct SkProcess *p, double t, double *mean, double *variance);

/*
 Build the PMF table over the automatically selected window.

 # Safety
 `p` is a live process handle; `out` must be valid. The returned handle
 must be released with [`skellamk_pmf_table_free`].
 */
enum SkStatus skellamk_pmf_table_new(const struct SkProcess *p,
                                     double t,
                                     double tol,
                                     struct SkPmfTable **out);

/*
 Lowest location of the table window.

 # Safety
 `table` must be a live table handle.
 */
int64_t skellamk_pmf_table_lo(const struct SkPmfTable *table);

/*
 Highest location of the table window.

 # Safety
 `table` must be a live table handle.
 */
int64_t skellamk_pmf_table_hi(const struct SkPmfTable *table);

/*
 Bound on the probability mass outside the window.

 # Safety
 `table` must be a live table handle.
 */
double skellamk_pmf_table_bound(const struct SkPmfTable *table);

/*
 Probability at `m` (0 outside the window).

 # Safety
 `table` must be a live table handle.
 */
double skellamk_pmf_table_prob(const struct SkPmfTable *table, int64_t m);

/*
 Release a table handle.

 # Safety
 `table` must come from [`skellamk_pmf_table_new`] (or be NULL).
 */
void skellamk_pmf_table_free(struct SkPmfTable *table);

/*
 Simulate one path over `[0, horizon]` and write it as `t,value` CSV.

 # Safety
 `p` is a live process handle; `path` is a NUL-terminated file path.
 */
enum SkStatus skellamk_simulate_csv(const struct SkProcess *p,
                                    double horizon,
                                    uint64_t seed,
                                    const char *path);

/*
 One terminal draw of `X(t)` under the replicate-keyed stream
 `(seed, replicate)`.

 # Safety
 `p` is a live process handle; `out` must be valid.
 */
enum SkStatus skellamk_sample_terminal(const struct SkProcess *p,
                                       double t,
                                       uint64_t seed,
                                       uint64_t replicate,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKELLAMK_H */
