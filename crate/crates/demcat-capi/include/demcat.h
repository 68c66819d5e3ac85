#ifndef DEMCAT_H
#define DEMCAT_H

/* generated by cbindgen from the demcat-capi crate; do not edit */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes of every C entry point.
 */
typedef enum DemcatStatus {
  DemcatStatus_Ok = 0,
  DemcatStatus_InvalidArgument = 1,
  DemcatStatus_NotClusterTilting = 2,
  DemcatStatus_VerificationFailed = 3,
  DemcatStatus_InternalError = 4,
} DemcatStatus;

/*
 Opaque handle to a built cluster category over the rationals.
 */
typedef struct DemcatCategory DemcatCategory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 The message of the most recent failure on this thread, or null.
 The pointer stays valid until the next failing call on the same thread.
 */
const char *demcat_last_error(void);

/*
 Builds the (d+1)-cluster category of the linearly oriented A_n quiver.

 # Safety
 `out` must be a valid pointer; the returned handle must be released with
 `demcat_category_free`.
 */
enum DemcatStatus demcat_category_new(uintptr_t n, uintptr_t d, struct DemcatCategory **out);

/*
 # Safety
 `handle` must come from `demcat_category_new` and not be used afterwards.
 */
void demcat_category_free(struct DemcatCategory *handle);

/*
 Number of indecomposable objects.

 # Safety
 `handle` must be a live handle.
 */
uintptr_t demcat_object_count(const struct DemcatCategory *handle);

/*
 The name of one object, as a fresh string.

 # Safety
 `handle` must be live and `out` valid; release the string with
 `demcat_string_free`.
 */
enum DemcatStatus demcat_object_name(const struct DemcatCategory *handle,
                                     uintptr_t index,
                                     char **out);

/*
 Checks whether `m` (e.g. "P(0,1)+P(2,1)") is a (d+1)-cluster tilting
 object; writes 1 or 0 into `out`.

 # Safety
 `handle`, `m` and `out` must be valid.
 */
enum DemcatStatus demcat_ct_check(const struct DemcatCategory *handle, const char *m, int32_t *out);

/*
 The dimension of `Hom(X, Y[degree])` in the cluster category.

 # Safety
 All pointers must be valid.
 */
enum DemcatStatus demcat_hom_dim(const struct DemcatCategory *handle,
                                 const char *x,
                                 const char *y,
                                 int32_t degree,
                                 uintptr_t *out);

/*
 Runs the full quotient/module verification for the cluster tilting
 object `m` and returns the report as a JSON string. A verification that
 runs but fails yields `VerificationFailed` and still writes the report.

 # Safety
 All pointers must be valid; release the string with `demcat_string_free`.
 */
enum DemcatStatus demcat_verify_json(const struct DemcatCategory *handle,
                                     const char *m,
                                     char **out_json);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void demcat_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEMCAT_H */
