#ifndef HAARMOMENT_H
#define HAARMOMENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum HmStatus {
  HM_STATUS_OK = 0,
  HM_STATUS_NULL_POINTER = 1,
  HM_STATUS_INVALID_ARGUMENT = 2,
  HM_STATUS_DOMAIN = 3,
  HM_STATUS_NOT_HERMITIAN = 4,
  HM_STATUS_DIMENSION_MISMATCH = 5,
  HM_STATUS_CAPACITY = 6,
  HM_STATUS_CONSISTENCY = 7,
  HM_STATUS_PANIC = 8,
} HmStatus;

// Coefficient families accepted by [`hm_coefficients`] and [`hm_average`].
typedef enum HmFamily {
  // Pure-state average of the uncertainty product.
  HM_FAMILY_PURE_PRODUCT = 0,
  // Pure-state average of the Robertson–Schrödinger bound.
  HM_FAMILY_PURE_BOUND = 1,
  // Hilbert–Schmidt average of the uncertainty product.
  HM_FAMILY_HS_PRODUCT = 2,
  // Hilbert–Schmidt average of the Robertson–Schrödinger bound.
  HM_FAMILY_HS_BOUND = 3,
  // Isospectral average of the uncertainty product; needs a spectrum.
  HM_FAMILY_ISO_PRODUCT = 4,
} HmFamily;

// Opaque Hermitian observable.
typedef struct HmObservable HmObservable;

// Opaque probability spectrum.
typedef struct HmSpectrum HmSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hm_version(void);

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *hm_last_error(void);

// Creates an observable from row-major `re` and `im` arrays of length `d*d`.
// The matrix must be Hermitian to within `1e-10`.
//
// # Safety
// `re` and `im` must point to `d*d` readable doubles; `out` must be writable.
enum HmStatus hm_observable_new(size_t d,
                                const double *re,
                                const double *im,
                                struct HmObservable **out);

// Creates a named builtin observable: `pauli_x`, `pauli_y`, `pauli_z`,
// `gell_mann_1` … `gell_mann_8`, or `identity` (of dimension `d`; `d` is
// ignored otherwise).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum HmStatus hm_observable_builtin(const char *name, size_t d, struct HmObservable **out);

// Dimension of an observable, or 0 for NULL.
//
// # Safety
// `obs` must be NULL or a live handle.
size_t hm_observable_dimension(const struct HmObservable *obs);

// Releases an observable. NULL is ignored.
//
// # Safety
// `obs` must be NULL or a handle not yet freed.
void hm_observable_free(struct HmObservable *obs);

// Creates a spectrum from `len` nonnegative values summing to one.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be writable.
enum HmStatus hm_spectrum_new(const double *values, size_t len, struct HmSpectrum **out);

// Releases a spectrum. NULL is ignored.
//
// # Safety
// `spectrum` must be NULL or a handle not yet freed.
void hm_spectrum_free(struct HmSpectrum *spectrum);

// Writes the eight trace functionals `Ω_1..Ω_8` of `(a, b)` into `out[0..8]`.
//
// # Safety
// `a` and `b` must be live handles; `out` must hold 8 doubles.
enum HmStatus hm_omega_vector(const struct HmObservable *a,
                              const struct HmObservable *b,
                              double *out);

// Writes the coefficient vector of `family` at dimension `d` into
// `out[0..8]`. `spectrum` is required for `HM_FAMILY_ISO_PRODUCT` and
// ignored otherwise.
//
// # Safety
// `spectrum` must be NULL or a live handle; `out` must hold 8 doubles.
enum HmStatus hm_coefficients(enum HmFamily family,
                              size_t d,
                              const struct HmSpectrum *spectrum,
                              double *out);

// Exact ensemble average `Σ_j c_j Ω_j(a, b)` for `family`.
//
// # Safety
// `a`, `b` must be live handles, `spectrum` NULL or live; `out` writable.
enum HmStatus hm_average(enum HmFamily family,
                         const struct HmObservable *a,
                         const struct HmObservable *b,
                         const struct HmSpectrum *spectrum,
                         double *out);

// Hilbert–Schmidt averages `(⟨t₂⟩, ⟨t₃⟩, ⟨t₄⟩, ⟨t₂²⟩)` with `t_p = Tr ρ^p`,
// written to `out[0..4]`.
//
// # Safety
// `out` must hold 4 doubles.
enum HmStatus hm_hs_moments(size_t d,
                            double *out);

// Weingarten function `Wg(π, d)` for the permutation of `{0..k-1}` given by
// its images, `k ≤ 4`.
//
// # Safety
// `images` must point to `k` readable values; `out` must be writable.
enum HmStatus hm_weingarten(const size_t *images, size_t k, size_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAARMOMENT_H */
