//! C ABI over the prunekit core: load .pmk artifacts, run inference,
//! serialize models, and evaluate pruning schedules.
//!
//! Conventions: every function returns a [`PkStatus`]; out-parameters are
//! written only on `Ok`; models are opaque handles owned by the caller and
//! released with [`pk_model_free`]. On any failure a thread-local message is
//! set, readable via [`pk_last_error_message`]. All entry points catch
//! panics and turn them into [`PkStatus::Panic`].

use prunekit::error::Error;
use prunekit::model_io::{
    gzip_size, load, quantize, serialize_dense, serialize_quantized, serialize_sparse,
};
use prunekit::nn::model::{forward, Model};
use prunekit::prune::PruningSchedule;
use prunekit::tensor::Tensor;
use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Invalid configuration or request (bad dimensions, bad enum value).
    InvalidArgument = 2,
    /// Array or tensor shapes do not line up.
    ShapeMismatch = 3,
    /// Non-finite values where finite math is required.
    NumericError = 4,
    /// Malformed artifact bytes.
    FormatError = 5,
    IoError = 6,
    /// The provided buffer is too small; the required size was reported.
    BufferTooSmall = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

/// Serialization layout for [`pk_model_serialize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkVariant {
    /// Every tensor stored as dense f32.
    Dense = 0,
    /// Mostly-zero tensors stored as bitmap plus packed nonzeros.
    Sparse = 1,
    /// Per-tensor affine int8 codes.
    Quantized = 2,
}

/// Pruning schedule family for [`pk_schedule_sparsity`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkScheduleKind {
    Constant = 0,
    Dynamic = 1,
}

/// Opaque handle to a loaded f32 model.
pub struct PkModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PkStatus {
    match err {
        Error::Config(_) | Error::Usage(_) => PkStatus::InvalidArgument,
        Error::Shape(_) => PkStatus::ShapeMismatch,
        Error::Numeric(_) => PkStatus::NumericError,
        Error::Format { .. } => PkStatus::FormatError,
        Error::Io(_) => PkStatus::IoError,
    }
}

fn fail(err: Error) -> PkStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f` with panics converted to [`PkStatus::Panic`].
fn guarded(name: &str, f: impl FnOnce() -> PkStatus) -> PkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error(format!("panic inside {name}"));
            PkStatus::Panic
        }
    }
}

macro_rules! require_nonnull {
    ($($ptr:expr),+ $(,)?) => {
        $(
            if $ptr.is_null() {
                set_error(concat!("null argument: ", stringify!($ptr)));
                return PkStatus::NullArgument;
            }
        )+
    };
}

/// Copies the most recent error message for this thread into `buf` as a
/// NUL-terminated UTF-8 string, truncating if needed. Returns the full
/// message length in bytes, excluding the NUL; call with a null `buf` (or
/// zero `len`) to query the length.
#[no_mangle]
pub unsafe extern "C" fn pk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses artifact bytes into a model handle. Quantized artifacts are
/// dequantized to f32. On success the caller owns the handle and must
/// release it with [`pk_model_free`].
#[no_mangle]
pub unsafe extern "C" fn pk_model_load(
    bytes: *const u8,
    len: usize,
    out_model: *mut *mut PkModel,
) -> PkStatus {
    guarded("pk_model_load", || {
        require_nonnull!(bytes, out_model);
        let data = std::slice::from_raw_parts(bytes, len);
        match load(data).and_then(|m| m.into_model()) {
            Ok(inner) => {
                *out_model = Box::into_raw(Box::new(PkModel { inner }));
                PkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a model handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pk_model_free(model: *mut PkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of dense layers in the model.
#[no_mangle]
pub unsafe extern "C" fn pk_model_layer_count(
    model: *const PkModel,
    out_count: *mut usize,
) -> PkStatus {
    guarded("pk_model_layer_count", || {
        require_nonnull!(model, out_count);
        *out_count = (*model).inner.layers().len();
        PkStatus::Ok
    })
}

/// Input width of the first layer.
#[no_mangle]
pub unsafe extern "C" fn pk_model_input_dim(
    model: *const PkModel,
    out_dim: *mut usize,
) -> PkStatus {
    guarded("pk_model_input_dim", || {
        require_nonnull!(model, out_dim);
        *out_dim = (*model).inner.layers()[0].spec.in_dim;
        PkStatus::Ok
    })
}

/// Output width of the last layer.
#[no_mangle]
pub unsafe extern "C" fn pk_model_output_dim(
    model: *const PkModel,
    out_dim: *mut usize,
) -> PkStatus {
    guarded("pk_model_output_dim", || {
        require_nonnull!(model, out_dim);
        *out_dim = (*model).inner.layers().last().expect("models have layers").spec.out_dim;
        PkStatus::Ok
    })
}

/// Fraction of weights (biases excluded) that are exactly zero, over all
/// layers.
#[no_mangle]
pub unsafe extern "C" fn pk_model_sparsity(
    model: *const PkModel,
    out_sparsity: *mut f64,
) -> PkStatus {
    guarded("pk_model_sparsity", || {
        require_nonnull!(model, out_sparsity);
        let (mut zeros, mut total) = (0usize, 0usize);
        for layer in (*model).inner.layers() {
            zeros += layer.weights.data().iter().filter(|w| **w == 0.0).count();
            total += layer.weights.data().len();
        }
        *out_sparsity = zeros as f64 / total as f64;
        PkStatus::Ok
    })
}

/// Runs the model on `n_rows` samples of width `in_dim`, both row-major.
/// `outputs` must hold at least `n_rows * output_dim` floats; `outputs_len`
/// is that capacity in elements.
#[no_mangle]
pub unsafe extern "C" fn pk_model_predict(
    model: *const PkModel,
    inputs: *const f32,
    n_rows: usize,
    in_dim: usize,
    outputs: *mut f32,
    outputs_len: usize,
) -> PkStatus {
    guarded("pk_model_predict", || {
        require_nonnull!(model, inputs, outputs);
        let m = &(*model).inner;
        let Some(n_in) = n_rows.checked_mul(in_dim) else {
            set_error("input size overflows");
            return PkStatus::InvalidArgument;
        };
        let out_dim = m.layers().last().expect("models have layers").spec.out_dim;
        let needed = n_rows * out_dim;
        if outputs_len < needed {
            set_error(format!(
                "output buffer holds {outputs_len} elements, need {needed}"
            ));
            return PkStatus::BufferTooSmall;
        }
        let x = match Tensor::new(vec![n_rows, in_dim], std::slice::from_raw_parts(inputs, n_in).to_vec()) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match forward(m, &x) {
            Ok(y) => {
                std::ptr::copy_nonoverlapping(y.data().as_ptr(), outputs, needed);
                PkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn serialize_variant(model: &Model, variant: PkVariant) -> Result<Vec<u8>, Error> {
    match variant {
        PkVariant::Dense => serialize_dense(model),
        PkVariant::Sparse => serialize_sparse(model),
        PkVariant::Quantized => serialize_quantized(&quantize(model)?),
    }
}

/// Serializes the model in the requested layout. Two-call pattern: pass a
/// null `buf` to receive the required size in `out_len`; with a buffer too
/// small, returns `BufferTooSmall` and still reports the required size.
#[no_mangle]
pub unsafe extern "C" fn pk_model_serialize(
    model: *const PkModel,
    variant: PkVariant,
    buf: *mut u8,
    buf_len: usize,
    out_len: *mut usize,
) -> PkStatus {
    guarded("pk_model_serialize", || {
        require_nonnull!(model, out_len);
        let bytes = match serialize_variant(&(*model).inner, variant) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        *out_len = bytes.len();
        if buf.is_null() {
            return PkStatus::Ok;
        }
        if buf_len < bytes.len() {
            set_error(format!("buffer holds {buf_len} bytes, need {}", bytes.len()));
            return PkStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        PkStatus::Ok
    })
}

/// Size in bytes of the deterministic gzip encoding of `bytes`.
#[no_mangle]
pub unsafe extern "C" fn pk_gzip_size(
    bytes: *const u8,
    len: usize,
    out_size: *mut usize,
) -> PkStatus {
    guarded("pk_gzip_size", || {
        require_nonnull!(bytes, out_size);
        *out_size = gzip_size(std::slice::from_raw_parts(bytes, len));
        PkStatus::Ok
    })
}

/// Evaluates the scheduled sparsity at `epoch`. Constant schedules ignore
/// `s_i`. Arguments are validated like the training pipeline's.
#[no_mangle]
pub unsafe extern "C" fn pk_schedule_sparsity(
    kind: PkScheduleKind,
    s_i: f64,
    s_f: f64,
    t0: usize,
    tf: usize,
    delta_t: usize,
    epoch: usize,
    out_sparsity: *mut f64,
) -> PkStatus {
    guarded("pk_schedule_sparsity", || {
        require_nonnull!(out_sparsity);
        let schedule = match kind {
            PkScheduleKind::Constant => PruningSchedule::constant(s_f, t0, tf, delta_t),
            PkScheduleKind::Dynamic => PruningSchedule::dynamic(s_i, s_f, t0, tf, delta_t),
        };
        match schedule {
            Ok(s) => {
                *out_sparsity = s.sparsity_at(epoch);
                PkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
