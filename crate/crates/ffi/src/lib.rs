//! C ABI over trained trollgraph models.
//!
//! Every fallible function returns a [`TgStatus`]; on failure the message is
//! available from [`tg_last_error`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`tg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trollgraph::cli::selfcheck;
use trollgraph::eval::{fleiss_kappa, AnnotationTable};
use trollgraph::features::featurize_snippet;
use trollgraph::lexicons::LexiconSet;
use trollgraph::models::{load_model, read_model, Model, ModelKind, ModelMeta, PredictionRecord, Predictor};
use trollgraph::snippets::SnippetRecord;
use trollgraph::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Model = 5,
    Data = 6,
    Panic = 7,
}

/// A loaded model with the lexicons it featurizes with.
pub struct TgModel {
    model: Model,
    meta: ModelMeta,
    lexicons: LexiconSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(TgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => TgStatus::Io,
            Error::Json(_) | Error::Record { .. } => TgStatus::Parse,
            Error::ModelFile(_) => TgStatus::Model,
            _ => TgStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(TgStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TgStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn null(name: &str) -> Failure {
    Failure(TgStatus::NullArgument, format!("{name} is null"))
}

fn boxed(model: Model, meta: ModelMeta) -> *mut TgModel {
    Box::into_raw(Box::new(TgModel {
        model,
        meta,
        lexicons: LexiconSet::bundled(),
    }))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn tg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a model file written by `trollgraph train`.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_model_load(path: *const c_char, out: *mut *mut TgModel) -> TgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let (model, meta) = load_model(Path::new(path))?;
        *out = boxed(model, meta);
        Ok(())
    })
}

/// Parses a model from the contents of a model file.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_model_from_json(json: *const c_char, out: *mut *mut TgModel) -> TgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let json = str_arg(json, "json")?;
        let (model, meta) = read_model(json.as_bytes())?;
        *out = boxed(model, meta);
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tg_model_free(model: *mut TgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Model kind (`baseline`, `joint` or `hybrid`) as a static string, or null
/// for a null model.
///
/// # Safety
/// `model` must be null or a live model.
#[no_mangle]
pub unsafe extern "C" fn tg_model_kind(model: *const TgModel) -> *const c_char {
    match model.as_ref() {
        None => ptr::null(),
        Some(m) => match m.model.kind() {
            ModelKind::Baseline => c"baseline".as_ptr(),
            ModelKind::Joint => c"joint".as_ptr(),
            ModelKind::Hybrid => c"hybrid".as_ptr(),
        },
    }
}

/// Predicts one snippet given as a snippet-file JSON record. Writes the
/// prediction record as JSON to `out_json`.
///
/// # Safety
/// `model` must be a live model, `snippet_json` a nul-terminated string and
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_model_predict_json(
    model: *const TgModel,
    snippet_json: *const c_char,
    out_json: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let text = str_arg(snippet_json, "snippet_json")?;
        let record: SnippetRecord =
            serde_json::from_str(text).map_err(|e| Failure(TgStatus::Parse, e.to_string()))?;
        let features = featurize_snippet(&record.snippet(), None, &m.lexicons, m.meta.feature_set);
        let labels = m.model.predict(&features)?;
        let out = PredictionRecord {
            snippet_id: record.snippet_id,
            labels,
        };
        let json = serde_json::to_string(&out).map_err(|e| Failure(TgStatus::Data, e.to_string()))?;
        *out_json = CString::new(json).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fleiss' kappa of a row-major `items × categories` count matrix.
///
/// # Safety
/// `counts` must point to `items * categories` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_fleiss_kappa(
    counts: *const usize,
    items: usize,
    categories: usize,
    out: *mut f64,
) -> TgStatus {
    guard(|| {
        if counts.is_null() {
            return Err(null("counts"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if items == 0 || categories == 0 {
            return Err(Failure(TgStatus::Data, "empty count matrix".into()));
        }
        let flat = std::slice::from_raw_parts(counts, items * categories);
        let rows: Vec<Vec<usize>> = flat.chunks(categories).map(<[usize]>::to_vec).collect();
        let table = AnnotationTable {
            aspect: "ffi".into(),
            items: (0..items).map(|i| i.to_string()).collect(),
            categories: (0..categories).map(|c| c.to_string()).collect(),
            raters: rows[0].iter().sum(),
            counts: rows,
        };
        *out = fleiss_kappa(&table)?;
        Ok(())
    })
}

/// Runs the inference and gradient self-check; writes the largest
/// inference deviation and returns `Data` if any check fails.
///
/// # Safety
/// `max_deviation` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn tg_selfcheck(seed: u64, trials: usize, max_deviation: *mut f64) -> TgStatus {
    guard(|| {
        let r = selfcheck(seed, trials);
        if let Some(d) = max_deviation.as_mut() {
            *d = r.max_inference_deviation;
        }
        if r.passed() {
            Ok(())
        } else {
            Err(Failure(TgStatus::Data, format!("self-check failed: {r:?}")))
        }
    })
}
