use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TWO_POINT: &str = "suite = \"homogeneous\"\n\n[law]\nkind = \"masses\"\nmasses = [0.5, 0.5]\n\n[grid]\ndelta = [0.6931471805599453, 0.2]\nn = [16, 64]\n";

fn pinlab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pinlab"));
    cmd.args(args).env_remove("PINLAB_OUT");
    if let Some(p) = env_out {
        cmd.env("PINLAB_OUT", p);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn homogeneous_suite_writes_closed_form_row_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", TWO_POINT);
    let out = tmp.path().join("out");
    let o = pinlab(&["homogeneous", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("homogeneous.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "delta,n,f,df,d2f,residual,f_n,finite_size_gap");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    let f: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();
    assert!((f - 0.4812118250596034).abs() < 1e-12);

    let meta = fs::read_to_string(out.join("runs.jsonl")).unwrap();
    let record: serde_json::Value = serde_json::from_str(meta.lines().next().unwrap()).unwrap();
    assert_eq!(record["suite"], "homogeneous");
    assert_eq!(record["config_sha256"].as_str().unwrap().len(), 64);
    assert!(record["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(record["exit_code"], 0);
    assert_eq!(record["config"]["law"]["masses"][1], 0.5);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "suite = \"bounds_grid\"\n[law]\nalpha = 0.3\nn_max = 1024\n[grid]\nbeta = [0.1, 0.3]\ndelta = [0.2]\nn = [128, 256]\n[batch]\nnum_samples = 16\n",
    );
    let mut bodies = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let o = pinlab(&["bounds_grid", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers], None);
        // small horizons may fail the sandwich; only the bytes matter here
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
        bodies.push(fs::read(out.join("bounds_grid.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_dir = tmp.path().join("cfg-out");
    let cfg = write(tmp.path(), "c.toml", &format!("output_dir = {:?}\n{TWO_POINT}", cfg_dir.display().to_string()));
    let env_dir = tmp.path().join("env-out");
    let cli_dir = tmp.path().join("cli-out");

    let o = pinlab(&["homogeneous", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(cfg_dir.join("homogeneous.csv").exists());

    let o = pinlab(&["homogeneous", "--config", &cfg], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("homogeneous.csv").exists());

    let o = pinlab(&["homogeneous", "--config", &cfg, "--out", cli_dir.to_str().unwrap()], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(cli_dir.join("homogeneous.csv").exists());
    assert_eq!(fs::read_to_string(env_dir.join("runs.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn validate_echoes_defaults_and_lists_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write(tmp.path(), "ok.toml", "suite = \"quenched_grid\"\n[law]\nalpha = 1.5\n");
    let o = pinlab(&["validate", &ok], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = String::from_utf8(o.stdout).unwrap();
    assert!(echo.contains("num_samples = 200"));
    assert!(echo.contains("epsilon = 0.1"));
    assert!(echo.contains("inapplicable"));

    let bad = write(tmp.path(), "bad.toml", "suite = \"quenched_grid\"\n[law]\nalpha = 0.3\n[batch]\nnum_samples = -3\n");
    let o = pinlab(&["validate", &bad], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("1 configuration error"), "{err}");
    assert!(err.contains("batch.num_samples"), "{err}");

    let broken = write(tmp.path(), "broken.toml", "suite = \"quenched_grid\"\n[law\nalpha = 0.3\n");
    let o = pinlab(&["validate", &broken], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_and_output_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", TWO_POINT);
    assert_eq!(pinlab(&["everything", "--config", &cfg], None).status.code(), Some(2));
    let blocker = write(tmp.path(), "file", "");
    let o = pinlab(&["homogeneous", "--config", &cfg, "--out", &format!("{blocker}/sub")], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("output directory"));
}

#[test]
fn failed_checks_exit_one() {
    // strong disorder pushes the quenched estimate far below the lower sandwich
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "suite = \"bounds_grid\"\n[law]\nalpha = 0.3\nn_max = 1024\n[grid]\nbeta = [3.0]\ndelta = [0.2]\nn = [512]\n[batch]\nnum_samples = 16\n",
    );
    let out = tmp.path().join("out");
    let o = pinlab(&["bounds_grid", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("bounds_grid.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",fail"));
}
