use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "n_qubits = [2, 3]\nlayers = [2, 3]\nn_runs = 2\nn_epochs = 4\n\n[diagnostics]\ngrad_samples = 200\nloss_pairs = 200\nframe_samples_a = 200\nframe_samples_b = 200\n";

fn vqa_lab(dir: &Path, args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vqa-lab"));
    cmd.current_dir(dir).args(args).env_remove("VQA_LAB_WORKERS");
    if let Some(w) = workers {
        cmd.env("VQA_LAB_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn grid_output_ignores_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), CONFIG).unwrap();
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "a", "--workers", "1", "thresholds"], None));
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "a", "--workers", "1", "grid"], None));
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "b", "thresholds"], Some("4")));
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "b", "grid"], Some("4")));
    for f in ["heatmap.csv", "runs.csv", "thresholds.csv", "manifest.json"] {
        assert_eq!(read(&tmp.path().join("a"), f), read(&tmp.path().join("b"), f), "{f}");
    }
    let heatmap = read(&tmp.path().join("a"), "heatmap.csv");
    assert_eq!(heatmap.lines().count(), 1 + 2 * 2 * 5);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), CONFIG).unwrap();
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "o", "grid"], None));
    let before = read(&tmp.path().join("o"), "runs.csv");
    fs::remove_file(tmp.path().join("o/cells/n3_l2_r1.json")).unwrap();
    fs::remove_file(tmp.path().join("o/runs.csv")).unwrap();
    ok(vqa_lab(tmp.path(), &["--out", "o", "export"], None));
    assert!(read(&tmp.path().join("o"), "runs.csv").len() < before.len());
    ok(vqa_lab(tmp.path(), &["--out", "o", "resume"], None));
    assert_eq!(read(&tmp.path().join("o"), "runs.csv"), before);
}

#[test]
fn seed_flag_changes_runs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), CONFIG).unwrap();
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "a", "grid"], None));
    ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "b", "--seed", "7", "grid"], None));
    assert_ne!(read(&tmp.path().join("a"), "runs.csv"), read(&tmp.path().join("b"), "runs.csv"));
}

#[test]
fn gd_with_learning_rate() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), CONFIG).unwrap();
    ok(vqa_lab(
        tmp.path(),
        &["--config", "c.toml", "--out", "o", "--optimizer", "gd", "--lr", "0.1", "grid"],
        None,
    ));
    let manifest = read(&tmp.path().join("o"), "manifest.json");
    assert!(manifest.contains("\"optimizer\": \"gd\""), "{manifest}");
    assert!(manifest.contains("\"learning_rate\": 0.1"), "{manifest}");
}

#[test]
fn diagnostic_scans_write_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), CONFIG).unwrap();
    let stdout = ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "o", "exact-diag"], None));
    assert!(stdout.contains("N=2 lambda_min=-1.481194"), "{stdout}");
    for (cmd, file, header) in [
        ("qfim-rank", "qfim_rank.csv", "N,L,p,rank,rank_ceiling,rel_tol"),
        ("grad-variance", "grad_variance.csv", "N,L,variance,std_error,n_samples"),
        ("loss-diff-variance", "loss_diff_variance.csv", "N,L,variance,std_error,n_samples"),
        ("frame-potential", "frame_potential.csv", "N,L,f2,std_error,f_haar,normalized,normalized_std_error"),
    ] {
        ok(vqa_lab(tmp.path(), &["--config", "c.toml", "--out", "o", cmd], None));
        let text = read(&tmp.path().join("o"), file);
        assert_eq!(text.lines().next(), Some(header), "{cmd}");
    }
}

#[test]
fn bad_inputs_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "layers = [1]\n").unwrap();
    let out = vqa_lab(tmp.path(), &["--config", "bad.toml", "grid"], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("L = 1"));
    let out = vqa_lab(tmp.path(), &["--out", "missing", "export"], None);
    assert!(!out.status.success());
    let out = vqa_lab(tmp.path(), &["--workers", "0", "exact-diag"], None);
    assert!(!out.status.success());
}
