//! C interface to the root-cause classifier: load a model file, classify
//! text, stem words and compute weighted metrics.
//!
//! Every fallible function returns an [`RcStatus`]; on failure a message is
//! available from [`rc_last_error`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`rc_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rootcause::eval::classification_metrics;
use rootcause::models::{load_model, ModelError, TextClassifier};
use rootcause::textprep::porter;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidModel = 4,
    OutOfRange = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Opaque handle to a loaded model.
pub struct RcModel {
    inner: TextClassifier,
    kind: CString,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RcWeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(RcStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(RcStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

fn model_failure(e: ModelError) -> Failure {
    let status = match e {
        ModelError::Io { .. } => RcStatus::Io,
        _ => RcStatus::InvalidModel,
    };
    Failure(status, e.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null. Valid
/// until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a pointer returned by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model file. On success `*out` holds a handle to release with
/// [`rc_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_load(path: *const c_char, out: *mut *mut RcModel) -> RcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = load_model(Path::new(path)).map_err(model_failure)?;
        let kind = CString::new(inner.model.kind.as_str()).expect("kind names have no nul");
        *out = Box::into_raw(Box::new(RcModel { inner, kind }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`rc_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_model_free(model: *mut RcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_model_num_classes(model: *const RcModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.model.n_classes())
}

/// Classifier kind (`mnb`, `lsvc`, `sgdc`, `rfc` or `lrc`) as a string
/// owned by the handle, or null for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_model_kind(model: *const RcModel) -> *const c_char {
    model.as_ref().map_or(std::ptr::null(), |m| m.kind.as_ptr())
}

/// Name of class `index`; free the result with [`rc_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_class_name(model: *const RcModel, index: usize, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let names = &m.inner.model.class_names;
        let name = names.get(index).ok_or_else(|| {
            Failure(
                RcStatus::OutOfRange,
                format!("class index {index} out of range (model has {} classes)", names.len()),
            )
        })?;
        *out = owned(name);
        Ok(())
    })
}

/// Classifies `text`. The predicted index goes to `*out_class`; if
/// `scores` is non-null it must hold `scores_len` doubles, at least the
/// number of classes, and receives the per-class scores.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string,
/// `out_class` writable and `scores` null or valid for `scores_len` writes.
#[no_mangle]
pub unsafe extern "C" fn rc_model_predict(
    model: *const RcModel,
    text: *const c_char,
    out_class: *mut usize,
    scores: *mut f64,
    scores_len: usize,
) -> RcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let text = str_arg(text, "text")?;
        if out_class.is_null() {
            return Err(null("out_class"));
        }
        let n = m.inner.model.n_classes();
        if !scores.is_null() && scores_len < n {
            return Err(Failure(
                RcStatus::InvalidArgument,
                format!("scores buffer holds {scores_len} values but the model has {n} classes"),
            ));
        }
        let p = m.inner.predict_text(text).map_err(model_failure)?;
        *out_class = p.class;
        if !scores.is_null() {
            std::slice::from_raw_parts_mut(scores, n).copy_from_slice(&p.scores);
        }
        Ok(())
    })
}

/// Porter stem of a single lowercase word; free the result with
/// [`rc_string_free`].
///
/// # Safety
/// `word` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_stem(word: *const c_char, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        let word = str_arg(word, "word")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = owned(&porter::stem(word));
        Ok(())
    })
}

/// Support-weighted precision, recall and F1 plus accuracy of an
/// `n x n` row-major confusion matrix (rows are true classes).
///
/// # Safety
/// `matrix` must be valid for `n * n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_weighted_metrics(matrix: *const u64, n: usize, out: *mut RcWeightedMetrics) -> RcStatus {
    guard(|| {
        if matrix.is_null() {
            return Err(null("matrix"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n
            .checked_mul(n)
            .filter(|&l| l > 0)
            .ok_or_else(|| Failure(RcStatus::InvalidArgument, format!("invalid matrix size {n}")))?;
        let flat = std::slice::from_raw_parts(matrix, len);
        let rows: Vec<Vec<u64>> = flat.chunks(n).map(<[u64]>::to_vec).collect();
        let r = classification_metrics(&rows).map_err(|e| Failure(RcStatus::InvalidArgument, e.to_string()))?;
        *out = RcWeightedMetrics {
            precision: r.weighted_precision,
            recall: r.weighted_recall,
            f1: r.weighted_f1,
            accuracy: r.accuracy,
        };
        Ok(())
    })
}
