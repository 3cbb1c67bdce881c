// SPDX-License-Identifier: Apache-2.0

use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use szz_core::linker::{train, ModelKind, TrainSpec, FEATURE_NAMES};
use szz_ffi::*;

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = szz_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn take(p: *mut c_char) -> serde_json::Value {
    let v = serde_json::from_str(CStr::from_ptr(p).to_str().unwrap()).unwrap();
    szz_string_free(p);
    v
}

fn load(name: &str) -> *mut SzzHistory {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { szz_history_load(fixture(name).as_ptr(), false, &mut h) },
        SzzStatus::Ok
    );
    h
}

#[test]
fn variant_and_blame_round_trip() {
    let h = load("sets_example.json");
    unsafe {
        assert_eq!(szz_history_len(h), 8);
        let mut out = ptr::null_mut();
        let st = szz_run_variant(h, cstr("c6").as_ptr(), cstr("B").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::Ok);
        let report = take(out);
        assert_eq!(report["candidates"], serde_json::json!(["c1", "c3", "c4"]));

        let skip = cstr("c4\n");
        let st = szz_run_variant(h, cstr("c6").as_ptr(), cstr("X").as_ptr(), skip.as_ptr(), &mut out);
        assert_eq!(st, SzzStatus::Ok);
        assert!(!take(out)["candidates"].as_array().unwrap().contains(&"c4".into()));

        let st = szz_blame(h, cstr("c6").as_ptr(), cstr("plain").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::Ok);
        assert_eq!(take(out)["entries"].as_array().unwrap().len(), 3);
        szz_history_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let h = load("linear.json");
    let mut out = ptr::null_mut();
    unsafe {
        let st = szz_run_variant(h, cstr("nope").as_ptr(), cstr("B").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::Data);
        assert!(last_error().contains("unknown commit"));
        let st = szz_run_variant(h, cstr("c3").as_ptr(), cstr("Q").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::Usage);
        let st = szz_blame(h, cstr("c3").as_ptr(), cstr("sideways").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::Usage);
        let st = szz_run_variant(
            ptr::null(),
            cstr("c3").as_ptr(),
            cstr("B").as_ptr(),
            ptr::null(),
            &mut out,
        );
        assert_eq!(st, SzzStatus::NullArgument);
        let bad = [0xffu8, 0];
        let st = szz_run_variant(h, bad.as_ptr().cast(), cstr("B").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, SzzStatus::InvalidUtf8);
        assert!(out.is_null());

        let mut other = ptr::null_mut();
        assert_eq!(
            szz_history_load(cstr("/not/here.json").as_ptr(), false, &mut other),
            SzzStatus::Data
        );
        assert!(other.is_null());

        // Success clears the message.
        assert_eq!(
            szz_blame(h, cstr("c3").as_ptr(), cstr("graph").as_ptr(), ptr::null(), &mut out),
            SzzStatus::Ok
        );
        szz_string_free(out);
        assert!(szz_last_error().is_null());
        szz_history_free(h);
        szz_history_free(ptr::null_mut());
        szz_string_free(ptr::null_mut());
    }
}

#[test]
fn model_scores_match_library() {
    let x: Vec<Vec<f64>> = (0..40)
        .map(|i| (0..8).map(|j| ((i * 7 + j * 3) % 11) as f64).collect())
        .collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] > 5.0).collect();
    let model = train(
        &x,
        &y,
        &TrainSpec::new(ModelKind::LogisticRegression, 1),
        &FEATURE_NAMES,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();

    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            szz_model_load(cstr(path.to_str().unwrap()).as_ptr(), &mut m),
            SzzStatus::Ok
        );
        assert_eq!(szz_feature_count(), 8);
        for row in &x {
            let (mut score, mut accepted) = (f64::NAN, false);
            assert_eq!(
                szz_model_score(m, row.as_ptr(), row.len(), &mut score, &mut accepted),
                SzzStatus::Ok
            );
            assert_eq!(score, model.score(row));
            assert_eq!(accepted, model.predict(row));
        }
        let mut score = 0.0;
        assert_eq!(
            szz_model_score(m, x[0].as_ptr(), 3, &mut score, ptr::null_mut()),
            SzzStatus::Usage
        );
        szz_model_free(m);
    }
}

/// The generated header compiles and links against the static library.
#[test]
fn c_program_links_against_header() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc")) else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/szz.h");
    assert!(header.exists());
    let lib_dir = target_dir();
    let staticlib = lib_dir.join("libszz_ffi.a");
    if !staticlib.exists() {
        eprintln!("static library not built at {}; skipping link", staticlib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "szz.h"
int main(int argc, char **argv) {
  SzzHistory *h = NULL;
  if (szz_history_load(argv[1], false, &h) != SZZ_STATUS_OK) return 10;
  char *json = NULL;
  if (szz_run_variant(h, "c6", "AG", NULL, &json) != SZZ_STATUS_OK) return 11;
  printf("%s\n", json);
  szz_string_free(json);
  if (szz_run_variant(h, "zz", "B", NULL, &json) != SZZ_STATUS_DATA) return 12;
  if (strstr(szz_last_error(), "unknown commit") == NULL) return 13;
  szz_history_free(h);
  return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe)
        .arg(fixture("sets_example.json").to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["variant"], "AG");
}

fn which(name: &str) -> Result<String, ()> {
    let out = Command::new("sh")
        .args(["-c", &format!("command -v {name}")])
        .output()
        .map_err(|_| ())?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_owned())
        .ok_or(())
}

/// Directory holding this profile's library artifacts.
fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}
