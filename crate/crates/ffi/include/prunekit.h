#ifndef PRUNEKIT_H
#define PRUNEKIT_H

/* Generated from the prunekit-ffi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every API function.
 */
typedef enum PkStatus {
  PK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PK_STATUS_NULL_ARGUMENT = 1,
  /**
   * Invalid configuration or request (bad dimensions, bad enum value).
   */
  PK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Array or tensor shapes do not line up.
   */
  PK_STATUS_SHAPE_MISMATCH = 3,
  /**
   * Non-finite values where finite math is required.
   */
  PK_STATUS_NUMERIC_ERROR = 4,
  /**
   * Malformed artifact bytes.
   */
  PK_STATUS_FORMAT_ERROR = 5,
  PK_STATUS_IO_ERROR = 6,
  /**
   * The provided buffer is too small; the required size was reported.
   */
  PK_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * An internal panic was caught at the boundary.
   */
  PK_STATUS_PANIC = 8,
} PkStatus;

/**
 * Serialization layout for [`pk_model_serialize`].
 */
typedef enum PkVariant {
  /**
   * Every tensor stored as dense f32.
   */
  PK_VARIANT_DENSE = 0,
  /**
   * Mostly-zero tensors stored as bitmap plus packed nonzeros.
   */
  PK_VARIANT_SPARSE = 1,
  /**
   * Per-tensor affine int8 codes.
   */
  PK_VARIANT_QUANTIZED = 2,
} PkVariant;

/**
 * Pruning schedule family for [`pk_schedule_sparsity`].
 */
typedef enum PkScheduleKind {
  PK_SCHEDULE_KIND_CONSTANT = 0,
  PK_SCHEDULE_KIND_DYNAMIC = 1,
} PkScheduleKind;

/**
 * Opaque handle to a loaded f32 model.
 */
typedef struct PkModel PkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message for this thread into `buf` as a
 * NUL-terminated UTF-8 string, truncating if needed. Returns the full
 * message length in bytes, excluding the NUL; call with a null `buf` (or
 * zero `len`) to query the length.
 */
size_t pk_last_error_message(char *buf, size_t len);

/**
 * Parses artifact bytes into a model handle. Quantized artifacts are
 * dequantized to f32. On success the caller owns the handle and must
 * release it with [`pk_model_free`].
 */
enum PkStatus pk_model_load(const uint8_t *bytes, size_t len, struct PkModel **out_model);

/**
 * Releases a model handle. Null is a no-op.
 */
void pk_model_free(struct PkModel *model);

/**
 * Number of dense layers in the model.
 */
enum PkStatus pk_model_layer_count(const struct PkModel *model, size_t *out_count);

/**
 * Input width of the first layer.
 */
enum PkStatus pk_model_input_dim(const struct PkModel *model, size_t *out_dim);

/**
 * Output width of the last layer.
 */
enum PkStatus pk_model_output_dim(const struct PkModel *model, size_t *out_dim);

/**
 * Fraction of weights (biases excluded) that are exactly zero, over all
 * layers.
 */
enum PkStatus pk_model_sparsity(const struct PkModel *model, double *out_sparsity);

/**
 * Runs the model on `n_rows` samples of width `in_dim`, both row-major.
 * `outputs` must hold at least `n_rows * output_dim` floats; `outputs_len`
 * is that capacity in elements.
 */
enum PkStatus pk_model_predict(const struct PkModel *model,
                               const float *inputs,
                               size_t n_rows,
                               size_t in_dim,
                               float *outputs,
                               size_t outputs_len);

/**
 * Serializes the model in the requested layout. Two-call pattern: pass a
 * null `buf` to receive the required size in `out_len`; with a buffer too
 * small, returns `BufferTooSmall` and still reports the required size.
 */
enum PkStatus pk_model_serialize(const struct PkModel *model,
                                 enum PkVariant variant,
                                 uint8_t *buf,
                                 size_t buf_len,
                                 size_t *out_len);

/**
 * Size in bytes of the deterministic gzip encoding of `bytes`.
 */
enum PkStatus pk_gzip_size(const uint8_t *bytes, size_t len, size_t *out_size);

/**
 * Evaluates the scheduled sparsity at `epoch`. Constant schedules ignore
 * `s_i`. Arguments are validated like the training pipeline's.
 */
enum PkStatus pk_schedule_sparsity(enum PkScheduleKind kind,
                                   double s_i,
                                   double s_f,
                                   size_t t0,
                                   size_t tf,
                                   size_t delta_t,
                                   size_t epoch,
                                   double *out_sparsity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRUNEKIT_H */
