//! C ABI for the pairembed engine.
//!
//! Datasets and models are opaque handles created and destroyed through
//! `pe_*` calls; every fallible function returns a [`PeStatus`] and leaves a
//! human-readable message retrievable with [`pe_last_error`]. The header in
//! `include/pairembed.h` is generated from this file by cbindgen.
//!
//! Conventions:
//! - output parameters are written only on [`PeStatus::Ok`];
//! - handles returned by `pe_*` calls are freed exactly once with the
//!   matching `pe_*_free`; `free` on null is a no-op;
//! - strings are NUL-terminated UTF-8;
//! - no call panics across the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use pairembed::checkpoint::Checkpoint;
use pairembed::data::{self, SyntheticMode, SyntheticSpec};
use pairembed::eval;
use pairembed::gradcheck;
use pairembed::losses::Margin;
use pairembed::net;
use pairembed::train::{self, TrainConfig};
use pairembed::Tensor;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    InvalidArgument = 3,
    DimensionMismatch = 4,
    DatasetError = 5,
    ParseError = 6,
    IoError = 7,
    Diverged = 8,
    InternalError = 9,
}

/// Opaque labeled dataset.
pub struct PeDataset {
    inner: data::LabeledDataset,
}

/// Opaque trained model (parameters plus the training-data mean).
pub struct PeModel {
    inner: Checkpoint,
}

/// Training options; get defaults from [`pe_train_options_default`].
/// The extractor is the default single dense layer of width `embed_dim`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PeTrainOptions {
    pub lambda: f64,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub embed_dim: usize,
}

/// Evaluation summary; `separability` is +inf when the intra-class mean
/// distance is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PeMetrics {
    pub accuracy: f64,
    pub mean_intra: f64,
    pub mean_inter: f64,
    pub separability: f64,
    pub margin_violation_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: &pairembed::Error) -> PeStatus {
    use pairembed::Error::*;
    set_error(&err.to_string());
    match err {
        Dimension(_) | Consistency(_) => PeStatus::DimensionMismatch,
        Dataset(_) => PeStatus::DatasetError,
        Parse { .. } | Checkpoint(_) => PeStatus::ParseError,
        Io(_) => PeStatus::IoError,
        Diverged { .. } => PeStatus::Diverged,
        Domain(_) | Index(_) | Spec(_) | Config(_) | Degenerate(_) => PeStatus::InvalidArgument,
    }
}

fn invalid(what: &str) -> PeStatus {
    set_error(what);
    PeStatus::InvalidArgument
}

fn null_pointer(what: &str) -> PeStatus {
    set_error(&format!("null pointer: {what}"));
    PeStatus::NullPointer
}

/// Runs a body, converting a panic into `InternalError` so unwinding never
/// crosses the ABI boundary.
fn guarded(body: impl FnOnce() -> PeStatus) -> PeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PeStatus::InternalError
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PeStatus> {
    if ptr.is_null() {
        return Err(null_pointer(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        PeStatus::InvalidString
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread. The pointer stays valid
/// until the next failing `pe_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pe_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Default training options (λ = 1, m = 1, η = 0.01, 50 epochs, batch 32,
/// seed 0, embedding width 16).
#[no_mangle]
pub extern "C" fn pe_train_options_default() -> PeTrainOptions {
    let cfg = TrainConfig::default();
    PeTrainOptions {
        lambda: cfg.lambda,
        margin: cfg.margin,
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        embed_dim: cfg.embed_dim,
    }
}

fn gen_dataset(spec: SyntheticSpec, out: *mut *mut PeDataset) -> PeStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match data::gen_synthetic(&spec) {
        Ok(ds) => {
            unsafe {
                *out = Box::into_raw(Box::new(PeDataset { inner: ds }));
            }
            PeStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Generates Gaussian blobs: class centers on a sphere of radius
/// `separation`, per-feature noise std `spread`.
///
/// # Safety
/// `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_gen_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    spread: f64,
    separation: f64,
    seed: u64,
    out: *mut *mut PeDataset,
) -> PeStatus {
    guarded(|| {
        gen_dataset(
            SyntheticSpec {
                mode: SyntheticMode::Blobs { dim },
                n_classes: classes,
                per_class,
                spread,
                separation,
                seed,
            },
            out,
        )
    })
}

/// Generates sinusoidal texture images of `side`×`side` pixels, stored flat.
///
/// # Safety
/// `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_gen_textures(
    classes: usize,
    per_class: usize,
    side: usize,
    spread: f64,
    separation: f64,
    seed: u64,
    out: *mut *mut PeDataset,
) -> PeStatus {
    guarded(|| {
        gen_dataset(
            SyntheticSpec {
                mode: SyntheticMode::Textures { side },
                n_classes: classes,
                per_class,
                spread,
                separation,
                seed,
            },
            out,
        )
    })
}

/// Loads a dataset from the CSV interchange format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid location for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut PeDataset,
) -> PeStatus {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match data::load_csv(path) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(PeDataset { inner: ds }));
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes a dataset in the CSV interchange format.
///
/// # Safety
/// `ds` must be a live dataset handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_save_csv(
    ds: *const PeDataset,
    path: *const c_char,
) -> PeStatus {
    guarded(|| {
        let Some(ds) = ds.as_ref() else {
            return null_pointer("ds");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match data::save_csv(&ds.inner, path) {
            Ok(()) => PeStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `ds` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_len(ds: *const PeDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Feature width; 0 for null.
///
/// # Safety
/// `ds` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_feature_dim(ds: *const PeDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.feature_dim())
}

/// Number of classes; 0 for null.
///
/// # Safety
/// `ds` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_n_classes(ds: *const PeDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_classes())
}

/// Frees a dataset handle. Null is a no-op.
///
/// # Safety
/// `ds` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pe_dataset_free(ds: *mut PeDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Trains on a raw dataset: the per-feature mean is computed, subtracted,
/// and stored in the model. `opts` may be null for defaults.
///
/// # Safety
/// `ds` must be a live dataset handle; `opts` null or valid; `out` a valid
/// location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pe_train(
    ds: *const PeDataset,
    opts: *const PeTrainOptions,
    out: *mut *mut PeModel,
) -> PeStatus {
    guarded(|| {
        let Some(ds) = ds.as_ref() else {
            return null_pointer("ds");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let o = opts
            .as_ref()
            .copied()
            .unwrap_or_else(|| pe_train_options_default());
        let cfg = TrainConfig {
            lambda: o.lambda,
            margin: o.margin,
            learning_rate: o.learning_rate,
            epochs: o.epochs,
            batch_size: o.batch_size,
            seed: o.seed,
            layers: Vec::new(),
            embed_dim: o.embed_dim,
        };
        let mut normalized = ds.inner.clone();
        let mean = match data::normalize_mean(&mut normalized, &mut []) {
            Ok(mean) => mean,
            Err(e) => return fail(&e),
        };
        match train::train(&normalized, &cfg).and_then(|(params, _)| Checkpoint::new(params, mean))
        {
            Ok(ckpt) => {
                *out = Box::into_raw(Box::new(PeModel { inner: ckpt }));
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a model checkpoint.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid location for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn pe_model_load(path: *const c_char, out: *mut *mut PeModel) -> PeStatus {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match Checkpoint::load(path) {
            Ok(ckpt) => {
                *out = Box::into_raw(Box::new(PeModel { inner: ckpt }));
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Saves a model checkpoint.
///
/// # Safety
/// `model` must be a live model handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pe_model_save(model: *const PeModel, path: *const c_char) -> PeStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return null_pointer("model");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match model.inner.save(path) {
            Ok(()) => PeStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Embedding width of the model; 0 for null.
///
/// # Safety
/// `model` must be a live model handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_model_embed_dim(model: *const PeModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.params.embed_dim())
}

/// Input width the model expects; 0 for null.
///
/// # Safety
/// `model` must be a live model handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_model_input_dim(model: *const PeModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.params.in_dim())
}

/// Number of classes the model predicts; 0 for null.
///
/// # Safety
/// `model` must be a live model handle or null.
#[no_mangle]
pub unsafe extern "C" fn pe_model_n_classes(model: *const PeModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.params.n_classes())
}

/// Frees a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pe_model_free(model: *mut PeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Embeds one raw feature vector: subtracts the model's stored mean and
/// runs the feature extractor. `input_len` must equal the model's input
/// width and `out_len` its embedding width.
///
/// # Safety
/// `input` must point to `input_len` doubles, `out` to `out_len` writable
/// doubles; `model` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn pe_embed(
    model: *const PeModel,
    input: *const f64,
    input_len: usize,
    out: *mut f64,
    out_len: usize,
) -> PeStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return null_pointer("model");
        };
        if input.is_null() {
            return null_pointer("input");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let params = &model.inner.params;
        if input_len != params.in_dim() {
            return invalid(&format!(
                "input length {input_len} does not match model input width {}",
                params.in_dim()
            ));
        }
        if out_len != params.embed_dim() {
            return invalid(&format!(
                "output length {out_len} does not match embedding width {}",
                params.embed_dim()
            ));
        }
        let raw = std::slice::from_raw_parts(input, input_len);
        let centered: Vec<f64> = raw
            .iter()
            .zip(model.inner.mean.data())
            .map(|(v, m)| v - m)
            .collect();
        match net::forward_features(params, &Tensor::from_vec(centered)) {
            Ok((f, _)) => {
                std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(f.data());
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluates a model on a raw dataset (the model's stored mean is applied
/// first), filling `out_metrics`.
///
/// # Safety
/// `model` and `ds` must be live handles; `out_metrics` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_evaluate(
    model: *const PeModel,
    ds: *const PeDataset,
    margin: f64,
    out_metrics: *mut PeMetrics,
) -> PeStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return null_pointer("model");
        };
        let Some(ds) = ds.as_ref() else {
            return null_pointer("ds");
        };
        if out_metrics.is_null() {
            return null_pointer("out_metrics");
        }
        let m = match Margin::new(margin) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        };
        let mut normalized = ds.inner.clone();
        if let Err(e) = data::apply_mean(&mut normalized, &model.inner.mean) {
            return fail(&e);
        }
        match eval::metrics(&model.inner.params, &normalized, m) {
            Ok(metrics) => {
                *out_metrics = PeMetrics {
                    accuracy: metrics.accuracy,
                    mean_intra: metrics.mean_intra,
                    mean_inter: metrics.mean_inter,
                    separability: metrics.separability,
                    margin_violation_rate: metrics.margin_violation_rate,
                };
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Checks every analytic gradient of a seeded random configuration against
/// central finite differences, writing the worst relative error.
///
/// # Safety
/// `out_max_rel_err` must be a writable double location.
#[no_mangle]
pub unsafe extern "C" fn pe_gradcheck(seed: u64, eps: f64, out_max_rel_err: *mut f64) -> PeStatus {
    guarded(|| {
        if out_max_rel_err.is_null() {
            return null_pointer("out_max_rel_err");
        }
        match gradcheck::check_joint_objective(seed, eps) {
            Ok(report) => {
                *out_max_rel_err = report.max_rel_err;
                PeStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
