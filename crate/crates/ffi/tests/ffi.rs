use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use trollgraph::features::FeatureSet;
use trollgraph::lexicons::LexiconSet;
use trollgraph::models::{
    labeled_features, predict_all, save_model, train_model, DownstreamFeatures, ModelKind, ModelMeta, TrainConfig,
};
use trollgraph::snippets::read_snippets_from;
use trollgraph::synth::BUNDLED_SNIPPETS;
use trollgraph_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tg_last_error()) }.to_string_lossy().into_owned()
}

fn trained_model_file(dir: &Path, kind: ModelKind) -> (std::path::PathBuf, Vec<String>) {
    let records = read_snippets_from(BUNDLED_SNIPPETS.as_bytes()).unwrap();
    let data = labeled_features(&records[..60], None, &LexiconSet::bundled(), FeatureSet::Basic).unwrap();
    let model = train_model(kind, &data, &TrainConfig::default()).unwrap();
    let meta = ModelMeta {
        feature_set: FeatureSet::Basic,
        l2: 0.1,
        min_count: 1,
        downstream_features: DownstreamFeatures::Gold,
    };
    let path = dir.join(format!("{kind}.json"));
    save_model(&path, Some("#trollgraph v0 seed=0 cmd=train"), &model, &meta).unwrap();
    let feats: Vec<_> = data.into_iter().map(|(f, _)| f).collect();
    let expected = predict_all(&model, &feats)
        .unwrap()
        .into_iter()
        .map(|l| serde_json::to_value(l).unwrap().to_string())
        .collect();
    (path, expected)
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tg_version()) }.to_str().unwrap();
    assert_eq!(v, trollgraph::VERSION);
}

#[test]
fn predictions_through_the_c_abi_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let (path, expected) = trained_model_file(dir.path(), kind);
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        let mut model = ptr::null_mut();
        assert_eq!(unsafe { tg_model_load(cpath.as_ptr(), &mut model) }, TgStatus::Ok);
        assert!(!model.is_null());
        let k = unsafe { CStr::from_ptr(tg_model_kind(model)) }.to_str().unwrap();
        assert_eq!(k, kind.name());
        for (line, want) in BUNDLED_SNIPPETS.lines().zip(&expected) {
            let input = CString::new(line).unwrap();
            let mut out = ptr::null_mut();
            let status = unsafe { tg_model_predict_json(model, input.as_ptr(), &mut out) };
            assert_eq!(status, TgStatus::Ok, "{}", last_error());
            let json: serde_json::Value =
                serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
            unsafe { tg_string_free(out) };
            let mut labels = json.clone();
            labels.as_object_mut().unwrap().remove("snippet_id");
            assert_eq!(&labels.to_string(), want);
        }
        unsafe { tg_model_free(model) };
    }
}

#[test]
fn model_from_json_matches_model_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = trained_model_file(dir.path(), ModelKind::Hybrid);
    let text = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { tg_model_from_json(text.as_ptr(), &mut model) }, TgStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(tg_model_kind(model)) }.to_str().unwrap(), "hybrid");
    unsafe { tg_model_free(model) };
}

#[test]
fn failures_set_status_and_message() {
    let mut model = ptr::null_mut();
    let missing = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(unsafe { tg_model_load(missing.as_ptr(), &mut model) }, TgStatus::Io);
    assert!(model.is_null());
    assert!(last_error().contains("/nonexistent/model.json"));

    assert_eq!(unsafe { tg_model_load(ptr::null(), &mut model) }, TgStatus::NullArgument);
    let junk = CString::new("{\"format\":\"other\"}").unwrap();
    assert_eq!(unsafe { tg_model_from_json(junk.as_ptr(), &mut model) }, TgStatus::Model);

    let dir = tempfile::tempdir().unwrap();
    let (path, _) = trained_model_file(dir.path(), ModelKind::Baseline);
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tg_model_load(cpath.as_ptr(), &mut model) }, TgStatus::Ok);
    assert!(last_error().is_empty());
    let mut out = ptr::null_mut();
    let bad = CString::new("not json").unwrap();
    assert_eq!(unsafe { tg_model_predict_json(model, bad.as_ptr(), &mut out) }, TgStatus::Parse);
    assert!(out.is_null());
    assert_eq!(unsafe { tg_model_predict_json(ptr::null(), bad.as_ptr(), &mut out) }, TgStatus::NullArgument);
    unsafe {
        tg_model_free(model);
        tg_model_free(ptr::null_mut());
        tg_string_free(ptr::null_mut());
    }
    assert!(unsafe { tg_model_kind(ptr::null()) }.is_null());
}

#[test]
fn kappa_and_selfcheck() {
    let mut k = 0.0;
    let hand = [3usize, 0, 2, 1];
    assert_eq!(unsafe { tg_fleiss_kappa(hand.as_ptr(), 2, 2, &mut k) }, TgStatus::Ok);
    assert!((k + 0.2).abs() < 1e-12);
    let perfect = [3usize, 0, 0, 3];
    assert_eq!(unsafe { tg_fleiss_kappa(perfect.as_ptr(), 2, 2, &mut k) }, TgStatus::Ok);
    assert_eq!(k, 1.0);
    let ragged = [3usize, 0, 1, 1];
    assert_eq!(unsafe { tg_fleiss_kappa(ragged.as_ptr(), 2, 2, &mut k) }, TgStatus::Data);
    assert!(!last_error().is_empty());

    let mut dev = f64::NAN;
    assert_eq!(unsafe { tg_selfcheck(3, 30, &mut dev) }, TgStatus::Ok);
    assert!(dev < 1e-8);
}

/// Compiles and runs a C program against the generated header and the
/// static library. Skipped when no C compiler is installed.
#[test]
fn c_program_links_against_header() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libtrollgraph_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "trollgraph.h"
int main(void) {
    size_t counts[4] = {3, 0, 2, 1};
    double k = 0.0;
    TgModel *m = NULL;
    if (tg_fleiss_kappa(counts, 2, 2, &k) != TG_STATUS_OK) return 1;
    if (tg_model_load("/nonexistent", &m) != TG_STATUS_IO || m != NULL) return 2;
    if (strlen(tg_last_error()) == 0) return 3;
    printf("%s %.3f\n", tg_version(), k);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        format!("{} -0.200", trollgraph::VERSION)
    );
}
