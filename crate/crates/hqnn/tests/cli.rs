use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hqnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqnn")).args(args).output().unwrap()
}

fn write_config(dir: &Path, models: &str) -> String {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{
  "data": {{ "source": "synthetic", "n_bars": 200 }},
  "models": [{models}],
  "features": [3],
  "n_splits": 2,
  "seed": 7
}}"#
    );
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_comparison_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#""CustomQNN", "HybridQNN2""#);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = hqnn(&["run", "--config", &config, "--output-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read(out.join("comparison.csv")).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("CustomQNN,3,") && text.contains("HybridQNN2,3,"));
        let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "ok");
        assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
        assert!(out.join("report_HybridQNN2_3.json").exists());
        assert!(out.join("loss_CustomQNN_3_1.csv").exists());
        outputs.push(csv);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn unknown_model_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#""LSTM", "QuantumMagic""#);
    let o = hqnn(&["run", "--config", &config, "--output-dir", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("QuantumMagic"));
}

#[test]
fn subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let bars = dir.path().join("bars.csv");
    let o = hqnn(&["synth", "--bars", "150", "--seed", "3", "--regime", "trend-shift", "--out", bars.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&bars).unwrap().lines().count(), 151);

    let features = dir.path().join("features.csv");
    let o = hqnn(&["prepare", "--input", bars.to_str().unwrap(), "--out", features.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&features).unwrap().starts_with("bar,open,high,low,close,rsi14"));

    let model = dir.path().join("rnn.json");
    let o = hqnn(&["train", "--input", bars.to_str().unwrap(), "--model", "RNN", "--k", "2", "--out", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(model.with_extension("loss.csv").exists());

    let o = hqnn(&["evaluate", "--input", bars.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("rmse="));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bars = dir.path().join("bars.csv");
    fs::write(&bars, "date,open,high,close\n2024-01-01,1,2,1.5\n").unwrap();
    let o = hqnn(&["prepare", "--input", bars.to_str().unwrap(), "--out", dir.path().join("f.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("low"));

    let o = hqnn(&["run", "--help"]);
    let help = String::from_utf8_lossy(&o.stdout);
    assert!(help.contains("default"), "{help}");
    assert_ne!(hqnn(&["run"]).status.code(), Some(0));
}
