// SPDX-License-Identifier: Apache-2.0

//! C ABI over `szz-core`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`SzzStatus`];
//! on failure [`szz_last_error`] describes what went wrong on this thread.
//! Strings handed out by the library must be released with
//! [`szz_string_free`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use szz_core::blame::{blame_lines, BlameMode, BlameOptions};
use szz_core::history::{load_history, CommitId, LoadOptions, RepositoryHistory};
use szz_core::linker::{TrainedModel, FEATURE_NAMES};
use szz_core::variants::{run_variant, VariantConfig, VariantId};
use szz_core::{error::ErrorClass, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzzStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad option value, such as an unknown variant or blame mode.
    Usage = 3,
    /// Unreadable input, unknown commit, corrupt history and the like.
    Data = 4,
    /// The version-control backend could not be used.
    Backend = 5,
    /// An internal panic was caught at the boundary.
    Internal = 6,
}

/// Loaded repository history.
pub struct SzzHistory(RepositoryHistory);

/// Trained linker classifier.
pub struct SzzModel(TrainedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(SzzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Usage => SzzStatus::Usage,
            ErrorClass::Data => SzzStatus::Data,
            ErrorClass::Backend => SzzStatus::Backend,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SzzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SzzStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SzzStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SzzStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SzzStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SzzStatus::NullArgument, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure(SzzStatus::NullArgument, format!("{name} is null")));
    }
    Ok(())
}

fn json_string(value: &impl serde::Serialize) -> Result<*mut c_char, Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure(SzzStatus::Internal, e.to_string()))?;
    Ok(CString::new(text)
        .map_err(|e| Failure(SzzStatus::Internal, e.to_string()))?
        .into_raw())
}

/// Parses a newline-separated skip list; null means empty.
unsafe fn skip_list(p: *const c_char) -> Result<BTreeSet<CommitId>, Failure> {
    if p.is_null() {
        return Ok(BTreeSet::new());
    }
    let text = str_arg(p, "skip_list")?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(CommitId::new)
        .collect())
}

/// Message for the most recent failure on this thread, or null. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn szz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn szz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a git working tree or JSON history fixture.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn szz_history_load(
    path: *const c_char,
    first_parent: bool,
    out: *mut *mut SzzHistory,
) -> SzzStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let h = load_history(
            Path::new(path),
            LoadOptions {
                first_parent_only: first_parent,
            },
        )?;
        *out = Box::into_raw(Box::new(SzzHistory(h)));
        Ok(())
    })
}

/// Number of commits in the history; 0 for null.
///
/// # Safety
/// `history` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szz_history_len(history: *const SzzHistory) -> usize {
    history.as_ref().map_or(0, |h| h.0.len())
}

/// # Safety
/// `history` must be null or a handle from [`szz_history_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn szz_history_free(history: *mut SzzHistory) {
    if !history.is_null() {
        drop(Box::from_raw(history));
    }
}

/// Runs one SZZ variant (`B`, `AG`, `L`, `R`, `X`) on a fixing commit and
/// writes the candidate report as JSON to `out_json`.
///
/// # Safety
/// Pointers must be valid; `skip_list` may be null.
#[no_mangle]
pub unsafe extern "C" fn szz_run_variant(
    history: *const SzzHistory,
    commit: *const c_char,
    variant: *const c_char,
    skip_list: *const c_char,
    out_json: *mut *mut c_char,
) -> SzzStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let h = ref_arg(history, "history")?;
        let variant: VariantId = str_arg(variant, "variant")?.parse()?;
        let config = VariantConfig {
            skip_list: self::skip_list(skip_list)?,
            ..VariantConfig::default()
        };
        let report = run_variant(&h.0, &CommitId::new(str_arg(commit, "commit")?), variant, &config)?;
        *out_json = json_string(&report)?;
        Ok(())
    })
}

/// Blames the lines a fixing commit removed or changed. `mode` is `plain`,
/// `skip` or `graph`; the result is JSON in `out_json`.
///
/// # Safety
/// Pointers must be valid; `skip_list` may be null.
#[no_mangle]
pub unsafe extern "C" fn szz_blame(
    history: *const SzzHistory,
    commit: *const c_char,
    mode: *const c_char,
    skip_list: *const c_char,
    out_json: *mut *mut c_char,
) -> SzzStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let h = ref_arg(history, "history")?;
        let options = match str_arg(mode, "mode")?.parse::<BlameMode>()? {
            BlameMode::Plain => BlameOptions::plain(),
            BlameMode::Skip => BlameOptions::skip(self::skip_list(skip_list)?),
            BlameMode::Graph => BlameOptions::graph(),
        };
        let result = blame_lines(&h.0, &CommitId::new(str_arg(commit, "commit")?), &options)?;
        *out_json = json_string(&result)?;
        Ok(())
    })
}

/// Loads a model written by `szz train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn szz_model_load(path: *const c_char, out: *mut *mut SzzModel) -> SzzStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = TrainedModel::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(SzzModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`szz_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn szz_model_free(model: *mut SzzModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of raw features a model expects.
#[no_mangle]
pub extern "C" fn szz_feature_count() -> usize {
    FEATURE_NAMES.len()
}

/// Scores one unscaled feature vector of length [`szz_feature_count`].
/// `out_accepted` may be null.
///
/// # Safety
/// `features` must point at `len` doubles; `out_score` must be writable.
#[no_mangle]
pub unsafe extern "C" fn szz_model_score(
    model: *const SzzModel,
    features: *const f64,
    len: usize,
    out_score: *mut f64,
    out_accepted: *mut bool,
) -> SzzStatus {
    guard(|| {
        out_arg(out_score, "out_score")?;
        let m = ref_arg(model, "model")?;
        let first = ref_arg(features, "features")?;
        if len != FEATURE_NAMES.len() {
            return Err(Failure(
                SzzStatus::Usage,
                format!("expected {} features, got {len}", FEATURE_NAMES.len()),
            ));
        }
        let row = std::slice::from_raw_parts(first as *const f64, len);
        let score = m.0.score(row);
        *out_score = score;
        if !out_accepted.is_null() {
            *out_accepted = score >= m.0.threshold;
        }
        Ok(())
    })
}
