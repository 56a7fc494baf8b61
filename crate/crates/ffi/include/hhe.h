#ifndef HHE_H
#define HHE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HheScheme {
  HHE_SCHEME_HERA = 0,
  HHE_SCHEME_RUBATO = 1,
} HheScheme;

typedef enum HheStatus {
  HHE_STATUS_OK = 0,
  HHE_STATUS_NULL_POINTER = 1,
  HHE_STATUS_INVALID_PARAMETER = 2,
  HHE_STATUS_LENGTH_MISMATCH = 3,
  HHE_STATUS_NONCE_TOO_LONG = 4,
  HHE_STATUS_STREAM_FAULT = 5,
  HHE_STATUS_ENCODING_OVERFLOW = 6,
  HHE_STATUS_PARSE = 7,
  HHE_STATUS_DEADLOCK = 8,
  HHE_STATUS_DIVERGENCE = 9,
  HHE_STATUS_IO = 10,
  HHE_STATUS_BUFFER_TOO_SMALL = 11,
  HHE_STATUS_PANIC = 12,
} HheStatus;

typedef enum HheVariant {
  HHE_VARIANT_D1 = 1,
  HHE_VARIANT_D2 = 2,
  HHE_VARIANT_D3 = 3,
  HHE_VARIANT_VECTORIZED = 4,
} HheVariant;

/**
 * Opaque cipher instance (parameters plus the noise table).
 */
typedef struct HheCipher HheCipher;

/**
 * Opaque key bound to the cipher it was created for.
 */
typedef struct HheKey HheKey;

/**
 * Headline numbers of one simulation run.
 */
typedef struct HheSimSummary {
  uint64_t latency_cycles;
  double initiation_interval;
  double elements_per_cycle;
  double state_elements_per_cycle;
  uint64_t total_cycles;
  uint64_t rng_stall_cycles;
  uint64_t fifo_max_occupancy;
  uint64_t constants_consumed;
} HheSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hhe_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hhe_version(void);

/**
 * Cipher with the built-in parameter set of `scheme`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HheStatus hhe_cipher_new(enum HheScheme scheme, struct HheCipher **out);

/**
 * Cipher from a `key = value` parameter file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` as for [`hhe_cipher_new`].
 */
enum HheStatus hhe_cipher_from_params_file(const char *path, struct HheCipher **out);

/**
 * # Safety
 * `c` must be NULL or a handle from this library that has not been freed.
 */
void hhe_cipher_free(struct HheCipher *c);

/**
 * Keystream elements per block (`l`); 0 for a NULL handle.
 *
 * # Safety
 * `c` must be NULL or a live handle.
 */
size_t hhe_cipher_block_len(const struct HheCipher *c);

/**
 * Key length in elements (`n`); 0 for a NULL handle.
 *
 * # Safety
 * `c` must be NULL or a live handle.
 */
size_t hhe_cipher_key_len(const struct HheCipher *c);

/**
 * # Safety
 * `c` must be NULL or a live handle.
 */
uint64_t hhe_cipher_modulus(const struct HheCipher *c);

/**
 * Key from `len` canonical elements.
 *
 * # Safety
 * `values` must point to `len` readable `uint64_t`; `out` as above.
 */
enum HheStatus hhe_key_new(const struct HheCipher *c,
                           const uint64_t *values,
                           size_t len,
                           struct HheKey **out);

/**
 * Key expanded from a seed of at most 16 bytes.
 *
 * # Safety
 * `seed` must point to `len` readable bytes; `out` as above.
 */
enum HheStatus hhe_key_derive(const struct HheCipher *c,
                              const uint8_t *seed,
                              size_t len,
                              struct HheKey **out);

/**
 * # Safety
 * `k` must be NULL or a live key handle.
 */
void hhe_key_free(struct HheKey *k);

/**
 * Writes block `block` of the keystream into `out` (`out_len >= l`).
 *
 * # Safety
 * Handles must be live; `nonce` must point to `nonce_len` bytes and `out`
 * to `out_len` writable `uint64_t`.
 */
enum HheStatus hhe_keystream(const struct HheCipher *c,
                             const struct HheKey *k,
                             const uint8_t *nonce,
                             size_t nonce_len,
                             uint64_t block,
                             uint64_t *out,
                             size_t out_len);

/**
 * Encrypts `len == l` reals scaled by `delta` into `out`.
 *
 * # Safety
 * As for [`hhe_keystream`]; `msg` must point to `len` readable doubles and
 * `out` to `len` writable `uint64_t`.
 */
enum HheStatus hhe_encrypt(const struct HheCipher *c,
                           const struct HheKey *k,
                           const uint8_t *nonce,
                           size_t nonce_len,
                           uint64_t block,
                           const double *msg,
                           size_t len,
                           double delta,
                           uint64_t *out);

/**
 * Inverse of [`hhe_encrypt`].
 *
 * # Safety
 * As for [`hhe_encrypt`] with the roles of the buffers swapped.
 */
enum HheStatus hhe_decrypt(const struct HheCipher *c,
                           const struct HheKey *k,
                           const uint8_t *nonce,
                           size_t nonce_len,
                           uint64_t block,
                           const uint64_t *ct,
                           size_t len,
                           double delta,
                           double *out);

/**
 * Simulates `blocks` blocks per lane on a design point with its default
 * configuration. `fifo_depth` and `lanes` override the defaults when
 * nonzero.
 *
 * # Safety
 * Handles must be live; `nonce` must point to `nonce_len` bytes; `out` must
 * be writable.
 */
enum HheStatus hhe_simulate(const struct HheCipher *c,
                            enum HheVariant variant,
                            const struct HheKey *k,
                            const uint8_t *nonce,
                            size_t nonce_len,
                            size_t blocks,
                            size_t fifo_depth,
                            size_t lanes,
                            struct HheSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HHE_H */
