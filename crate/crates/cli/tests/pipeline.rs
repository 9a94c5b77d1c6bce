use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 11

[task]
name = "Asset Wealth"

[splits]
val = 100
test = 100
subsets = [50, 200]
size = 200

[fewshot]
k = 4
test_size = 20
"#;

fn geollm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geollm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = geollm(dir, args);
    assert!(
        out.status.success(),
        "geollm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// The scripted mock pipeline, from synthetic world to ablation reports.
fn pipeline(work: &Path) -> PathBuf {
    std::fs::write(work.join("run.toml"), CONFIG).unwrap();
    let c = ["--config", "run.toml", "--out", "run"];
    let step = |extra: &[&str]| {
        let args: Vec<&str> = c.iter().chain(extra).copied().collect();
        ok(work, &args);
    };
    step(&["synth", "--n", "600", "--places", "150"]);
    step(&["ingest"]);
    step(&["split"]);
    step(&["prompts"]);
    step(&["export-finetune", "--format", "completion"]);
    step(&["export-fewshot"]);
    step(&["mock-answer", "--input", "run/corpus/whole-prompt/test.jsonl", "--knowledge", "gaussian", "--sigma", "0.7"]);
    step(&["baseline", "--model", "knn"]);
    step(&["baseline", "--model", "gbt", "--trees", "20", "--embed-dim", "8"]);
    step(&["evaluate", "--predictions", "run/predictions/mock.jsonl"]);
    step(&["evaluate", "--predictions", "run/predictions/knn-200.jsonl"]);
    step(&["ablate", "--mock"]);
    step(&["error-map", "--predictions", "run/predictions/mock.jsonl"]);
    step(&[
        "table",
        "--entry",
        "Asset Wealth:200:mock=run/reports/mock.json",
        "--entry",
        "Asset Wealth:200:knn=run/reports/knn-200.json",
        "--output",
        "run/reports/table.txt",
    ]);
    work.join("run")
}

#[test]
fn mock_pipeline_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (pipeline(a.path()), pipeline(b.path()));
    let (mut fa, mut fb) = (files(&ra), files(&rb));
    // Wall-clock times live only in the manifest.
    assert!(fa.remove(Path::new("manifest.json")).is_some());
    assert!(fb.remove(Path::new("manifest.json")).is_some());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (path, bytes) in &fa {
        assert!(bytes == &fb[path], "{} differs between runs", path.display());
    }

    let report = String::from_utf8(fa[Path::new("reports/mock.json")].clone()).unwrap();
    assert!(report.contains("\"n_evaluated\": 100"), "{report}");
    let table = String::from_utf8(fa[Path::new("reports/table.txt")].clone()).unwrap();
    assert!(table.starts_with("Task") && table.contains("**"), "{table}");

    let reports: Vec<String> = fa
        .keys()
        .filter(|p| p.starts_with("reports/ablation") && p.extension().is_some_and(|e| e == "json"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    let mut want = vec![
        "whole-prompt",
        "removed-coordinates",
        "removed-address",
        "removed-nearby-places",
        "only-nearby-places",
        "only-address",
        "only-coordinates",
    ];
    want.sort();
    assert_eq!(reports, want);
    let summary = String::from_utf8(fa[Path::new("reports/ablation/summary.csv")].clone()).unwrap();
    assert_eq!(summary.lines().count(), 8);
    assert!(summary.lines().nth(1).unwrap().starts_with("Whole prompt,whole-prompt,"));
}

#[test]
fn duplicate_coordinates_fail_split_with_overlap_code() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    std::fs::create_dir_all(&run).unwrap();
    let mut csv = String::from("id,lat,lon,value\n");
    for i in 0..200 {
        let (lat, lon) = (8.0 + i as f64 * 0.01, 7.0 + i as f64 * 0.013);
        csv.push_str(&format!("s{i:03},{lat:.5},{lon:.5},{i}\n"));
        // Every sample has a twin under another id.
        csv.push_str(&format!("d{i:03},{lat:.5},{lon:.5},{i}\n"));
    }
    std::fs::write(run.join("dataset.csv"), csv).unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    let out = geollm(dir.path(), &["--config", "run.toml", "--out", "run", "split"]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
    assert!(!run.join("splits.json").exists());
    assert!(!run.join("labels.json").exists());
}

#[test]
fn failures_leave_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    let c = ["--config", "run.toml", "--out", "run"];
    ok(dir.path(), &[&c[..], &["synth", "--n", "400", "--places", "100"]].concat());
    ok(dir.path(), &[&c[..], &["ingest"]].concat());
    ok(dir.path(), &[&c[..], &["split"]].concat());
    ok(dir.path(), &[&c[..], &["prompts"]].concat());
    // k larger than the training subset: the few-shot export must fail cleanly.
    let out = geollm(dir.path(), &[&c[..], &["export-fewshot", "--k", "500"]].concat());
    assert_eq!(out.status.code(), Some(6), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("run/corpus").exists() || files(&dir.path().join("run/corpus")).is_empty());

    let out = geollm(dir.path(), &[&c[..], &["export-finetune", "--ablation", "nearby"]].concat());
    assert_eq!(out.status.code(), Some(3));
    let out = geollm(dir.path(), &["--out", "missing", "split"]);
    assert_eq!(out.status.code(), Some(3));
}
