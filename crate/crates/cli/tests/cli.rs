use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use visdet_core::corpus::synthetic::{write_synthetic_corpus, SyntheticSpec};
use visdet_core::corpus::{ClassTable, GtRecord, NormBox, PredRecord};
use visdet_core::eval::{evaluate_split, EvalSummary, MatchConfig};

fn visdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_visdet")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &Path, images: usize) -> PathBuf {
    let spec = SyntheticSpec {
        images,
        ..SyntheticSpec::default()
    };
    write_synthetic_corpus(&dir.join("src"), &ClassTable::kiit_mita(), &spec).unwrap()
}

/// Copies labels as predictions with a fixed confidence.
fn perfect_predictions(labels: &Path, out: &Path) {
    fs::create_dir_all(out).unwrap();
    for entry in fs::read_dir(labels).unwrap() {
        let path = entry.unwrap().path();
        let text: String = fs::read_to_string(&path)
            .unwrap()
            .lines()
            .map(|l| format!("{l} 0.900000\n"))
            .collect();
        fs::write(out.join(path.file_name().unwrap()), text).unwrap();
    }
}

#[test]
fn validate_prints_counts() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 4);
    let out = visdet(&["validate", "--manifest", s(&manifest)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("images\t4\n"), "{stdout}");
    assert!(stdout.contains("violations\t0"));
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 3);
    fs::write(dir.path().join("src/test/labels/img_0001.txt"), "9 0.5 0.5 0.1 0.1\n").unwrap();
    let out = visdet(&["validate", "--manifest", s(&manifest)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("img_0001.txt:1: ClassIdOutOfRange"), "{stderr}");
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let out = visdet(&[
        "transform",
        "--modality",
        "infrared",
        "--manifest",
        "m.toml",
        "--out",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--modality"));

    let out = visdet(&["evaluate", "--manifest", "m.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--predictions"));

    let out = visdet(&["compare", "--summary", "only-one", "--timing", "a=b"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--summary"));

    assert_eq!(visdet(&[]).status.code(), Some(2));
}

#[test]
fn domain_errors_carry_the_error_name() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 2);
    let preds = dir.path().join("preds");
    perfect_predictions(&dir.path().join("src/test/labels"), &preds);

    let out = visdet(&[
        "evaluate",
        "--manifest",
        s(&manifest),
        "--split",
        "train",
        "--predictions",
        s(&preds),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SplitMissing"));

    fs::write(preds.join("stranger.txt"), "0 0.5 0.5 0.1 0.1 0.5\n").unwrap();
    let out = visdet(&["evaluate", "--manifest", s(&manifest), "--predictions", s(&preds)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnknownImageId"));

    let out = visdet(&["validate", "--manifest", s(&dir.path().join("missing.toml"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ManifestUnreadable"));
}

#[test]
fn transform_then_evaluate_perfect_predictions() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 5);
    let night = dir.path().join("night");
    let out = visdet(&[
        "transform",
        "--manifest",
        s(&manifest),
        "--modality",
        "night",
        "--out",
        s(&night),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(night.join("transform_report.json")).unwrap()).unwrap();
    assert_eq!(report["image_count"], 5);
    assert_eq!(report["seed"], 20250001);
    assert_eq!(report["rows"][0]["severity"], "-");

    let preds = dir.path().join("preds");
    perfect_predictions(&night.join("labels"), &preds);
    let summary_path = dir.path().join("eval/summary.json");
    let out = visdet(&[
        "evaluate",
        "--manifest",
        s(&night.join("manifest.toml")),
        "--predictions",
        s(&preds),
        "--out",
        s(&summary_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = EvalSummary::from_json(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!((summary.map50, summary.map50_95, summary.f1), (1.0, 1.0, 1.0));

    // stdout carries the summary when no --out is given
    let out = visdet(&["evaluate", "--manifest", s(&manifest), "--predictions", s(&preds)]);
    let again = EvalSummary::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(again, summary);
}

#[test]
fn obscura_seed_changes_output_and_default_is_fixed() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 3);
    let run = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "transform",
            "--manifest",
            s(&manifest),
            "--modality",
            "obscura",
            "--out",
            s(&out_dir),
        ];
        args.extend_from_slice(extra);
        let out = visdet(&args);
        assert!(out.status.success());
        fs::read(out_dir.join("images/img_0000.png")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &["--seed", "20250001"]);
    let c = run("c", &["--seed", "7"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

fn fake_summary(dir: &Path, name: &str, map50: f64, map50_95: f64) -> PathBuf {
    let table = ClassTable::new(["a"]).unwrap();
    let b = NormBox {
        cx: 0.5,
        cy: 0.5,
        w: 0.2,
        h: 0.2,
    };
    let gts = [("x".to_string(), vec![GtRecord { class_id: 0, bbox: b }])]
        .into_iter()
        .collect();
    let preds = [(
        "x".to_string(),
        vec![PredRecord {
            class_id: 0,
            bbox: b,
            confidence: 0.9,
        }],
    )]
    .into_iter()
    .collect();
    let mut summary = evaluate_split(&gts, &preds, &table, &MatchConfig::default()).unwrap();
    summary.map50 = map50;
    summary.map50_95 = map50_95;
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, summary.to_json()).unwrap();
    path
}

#[test]
fn compare_ranks_published_rows() {
    let dir = TempDir::new().unwrap();
    let rows = [
        ("Gray Scale", 0.3, 5.3, 3.0, 0.603, 0.374),
        ("Thermal Vision", 0.6, 5.2, 3.9, 0.680, 0.466),
        ("Night Vision", 0.3, 5.3, 4.5, 0.701, 0.484),
        ("ObscuraVision", 0.6, 5.2, 3.6, 0.694, 0.467),
    ];
    let mut args: Vec<String> = vec!["compare".into(), "--format".into(), "csv".into()];
    for (i, (name, pre, inf, post, m50, m5095)) in rows.iter().enumerate() {
        let summary = fake_summary(dir.path(), &format!("s{i}"), *m50, *m5095);
        let timing = dir.path().join(format!("t{i}.jsonl"));
        fs::write(
            &timing,
            format!(
                "{{\"image_id\":\"x\",\"preprocess_ms\":{pre},\"inference_ms\":{inf},\"postprocess_ms\":{post}}}\n"
            ),
        )
        .unwrap();
        args.push("--summary".into());
        args.push(format!("{name}={}", summary.display()));
        args.push("--timing".into());
        args.push(format!("{name}={}", timing.display()));
    }
    args.push("--training-hours".into());
    args.push("Night Vision=1.042".into());
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = visdet(&argv);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["Night Vision", "ObscuraVision", "Thermal Vision", "Gray Scale"]);
    assert!(
        csv.lines()
            .nth(1)
            .unwrap()
            .ends_with(",10.1,0.701,0.484,1.000,1.000,1.000,1.042"),
        "{csv}"
    );
    assert!(csv.lines().nth(4).unwrap().ends_with(",-"));
}

#[test]
fn render_writes_one_png_per_image() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 3);
    let preds = dir.path().join("preds");
    perfect_predictions(&dir.path().join("src/test/labels"), &preds);
    let out_dir = dir.path().join("render");
    let out = visdet(&[
        "render",
        "--manifest",
        s(&manifest),
        "--predictions",
        s(&preds),
        "--out",
        s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(&out_dir).unwrap().count(), 3);
    let source = fs::read(dir.path().join("src/test/images/img_0000.png")).unwrap();
    assert_ne!(fs::read(out_dir.join("img_0000.png")).unwrap(), source);
}

#[test]
fn oracle_subcommand_passes() {
    let out = visdet(&["oracle", "--instances", "50", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with("PASS"));
}

#[test]
fn inputs_are_not_modified() {
    let dir = TempDir::new().unwrap();
    let manifest = corpus(dir.path(), 3);
    let snapshot = |root: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut files = Vec::new();
        for sub in ["test/images", "test/labels"] {
            for e in fs::read_dir(root.join(sub)).unwrap() {
                let p = e.unwrap().path();
                files.push((p.clone(), fs::read(&p).unwrap()));
            }
        }
        files.sort();
        files
    };
    let before = snapshot(&dir.path().join("src"));
    for modality in ["gray", "thermal", "night", "obscura"] {
        let out_dir = dir.path().join(modality);
        assert!(visdet(&[
            "transform",
            "--manifest",
            s(&manifest),
            "--modality",
            modality,
            "--out",
            s(&out_dir)
        ])
        .status
        .success());
    }
    let clash = visdet(&[
        "transform",
        "--manifest",
        s(&manifest),
        "--modality",
        "gray",
        "--out",
        s(&dir.path().join("src/test")),
    ]);
    assert_eq!(clash.status.code(), Some(1));
    assert_eq!(snapshot(&dir.path().join("src")), before);
}
