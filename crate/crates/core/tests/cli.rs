use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_68.csv")
}

fn cirsharp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cirsharp"))
        .args(args)
        .arg("--input")
        .arg(data())
        .arg("--out")
        .arg(out)
        .env_remove("CIRSHARP_OUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "group_size = 8\nwindow_sise = 3\n").unwrap();
    let o = cirsharp(&["segment", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("window_sise"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cirsharp(&["calibrate", "--no-such-flag"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_maturity_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cirsharp(&["compare", "--maturity", "10Y"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("10Y"), "{}", stderr(&o));
}

#[test]
fn window_longer_than_series_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cirsharp(&["forecast", "--maturity", "synthetic", "--window", "80"], tmp.path());
    assert!(!o.status.success());
    assert!(!stderr(&o).is_empty());
}

#[test]
fn config_file_and_flags_merge() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "group_size = 16\nmaturities = [\"synthetic\"]\n").unwrap();
    let o = cirsharp(&["segment", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("segment/synthetic/segments.csv"));
    assert_eq!(rows.len(), 4);
    let o = cirsharp(
        &["segment", "--config", cfg.to_str().unwrap(), "--group-size", "8"],
        tmp.path(),
    );
    assert!(o.status.success());
    assert_eq!(csv_rows(&tmp.path().join("segment/synthetic/segments.csv")).len(), 8);
}

#[test]
fn segmentation_modes_differ_only_in_grouping() {
    let tmp = tempfile::tempdir().unwrap();
    let fixed = tmp.path().join("fixed");
    let cp = tmp.path().join("cp");
    for (mode, out) in [("fixed", &fixed), ("change_point", &cp)] {
        let o = cirsharp(&["calibrate", "--maturity", "synthetic", "--segmentation", mode], out);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
    }
    let summary = |root: &Path| -> serde_json::Value {
        let text = std::fs::read_to_string(root.join("calibrate/synthetic/summary.json")).unwrap();
        serde_json::from_str(&text).unwrap()
    };
    let (a, b) = (summary(&fixed), summary(&cp));
    assert_eq!(a["maturity"], b["maturity"]);
    assert_eq!(a["observations"], b["observations"]);
    assert_eq!(a["delta"], b["delta"]);
    assert_eq!(a["segmentation"]["source"], "fixed");
    assert_eq!(b["segmentation"]["source"], "change_point");
    // same columns, rows driven by the grouping
    for file in ["parameters.csv", "candidates.csv", "fitted.csv"] {
        let head = |root: &Path| {
            csv::Reader::from_path(root.join("calibrate/synthetic").join(file))
                .unwrap()
                .headers()
                .unwrap()
                .clone()
        };
        assert_eq!(head(&fixed), head(&cp), "{file}");
    }
}

#[test]
fn forecast_writes_one_row_per_predictable_index() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cirsharp(&["forecast", "--maturity", "synthetic", "--window", "8"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("forecast/synthetic/forecast.csv"));
    // targets 9..=68 plus one step past the end
    assert_eq!(rows.len(), 61);
}

#[test]
fn compare_has_a_row_per_maturity() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cirsharp(&["compare"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let file = tmp.path().join("compare/compare.csv");
    let mut reader = csv::Reader::from_path(&file).unwrap();
    let headers = reader.headers().unwrap().clone();
    for metric in ["r2", "rmse"] {
        for col in ["a", "b", "c", "d"] {
            let name = format!("{metric}_{col}");
            assert!(headers.iter().any(|h| h == name), "missing {name}");
        }
    }
    let rows = csv_rows(&file);
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "synthetic");
    assert_eq!(&rows[1][0], "synthetic_alt");

    let single = tmp.path().join("single");
    let o = cirsharp(&["compare", "--maturity", "synthetic_alt"], &single);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&single.join("compare/compare.csv")).len(), 1);
}

#[test]
fn output_directory_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cirsharp"))
        .args(["segment", "--maturity", "synthetic", "--input"])
        .arg(data())
        .env("CIRSHARP_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("segment/synthetic/segments.csv").exists());
}
