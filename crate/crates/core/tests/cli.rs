use std::path::Path;
use std::process::Command;

use channel_gan::cli::{compare_runs, list_presets, load_report, preset, run_experiment, ExperimentConfig};

const BIN: &str = env!("CARGO_BIN_EXE_channel-gan");

fn tiny(name: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = preset(name).unwrap();
    cfg.train.iterations = 40;
    cfg.train.batch_size = 32;
    cfg.train.snapshot_every = 10;
    cfg.eval.samples_per_condition = 2_000;
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn artifact_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn runs_are_byte_identical_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["qpsk-awgn-gan", "qam16-nonlinear-wgan", "bpsk-awgn-mse"] {
        let a = run_experiment(&tiny(name, &tmp.path().join(format!("{name}-a")))).unwrap();
        let b = run_experiment(&tiny(name, &tmp.path().join(format!("{name}-b")))).unwrap();
        let fa = artifact_bytes(&a.output_dir);
        let fb = artifact_bytes(&b.output_dir);
        assert_eq!(fa.len(), fb.len());
        for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
            assert_eq!(na, nb);
            if na == "config_echo.toml" {
                // differs only in output_dir
                let strip = |b: &[u8]| {
                    String::from_utf8(b.to_vec())
                        .unwrap()
                        .lines()
                        .filter(|l| !l.starts_with("output_dir"))
                        .collect::<Vec<_>>()
                        .join("\n")
                };
                assert_eq!(strip(ba), strip(bb), "{name}");
            } else {
                assert!(ba == bb, "{name}: {na} differs");
            }
        }
        let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
        for expected in ["config_echo.toml", "history.csv", "model.bin", "report.json", "density_true_0.csv", "density_model_0.csv", "density_true_marginal.csv"] {
            assert!(names.contains(&expected), "{name}: missing {expected}");
        }
    }
    let c = run_experiment(&tiny("qpsk-awgn-gan", &tmp.path().join("other")).with_seed(2)).unwrap();
    let a = load_report(tmp.path().join("qpsk-awgn-gan-a")).unwrap();
    assert_ne!(a.to_json().unwrap(), c.report.to_json().unwrap());
}

#[test]
fn config_echo_reloads_to_the_same_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny("bpsk-chi2-gan", tmp.path());
    run_experiment(&cfg).unwrap();
    let echoed = ExperimentConfig::load(tmp.path().join("config_echo.toml")).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn comparing_a_report_to_itself_has_zero_deltas() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_experiment(&tiny("bpsk-awgn-gan", tmp.path())).unwrap();
    let cmp = compare_runs(&run.report, &run.report).unwrap();
    assert!(cmp.conditions.iter().all(|r| r.js_delta() == 0.0 && r.mean_error_delta() == 0.0));
    assert_eq!(cmp.marginal_js_a, cmp.marginal_js_b);
}

#[test]
fn incompatible_reports_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_experiment(&tiny("bpsk-awgn-gan", &tmp.path().join("a"))).unwrap();
    let b = run_experiment(&tiny("bpsk-chi2-gan", &tmp.path().join("b"))).unwrap();
    assert!(compare_runs(&a.report, &b.report).is_err());
}

#[test]
fn presets_cover_every_experiment() {
    let names = list_presets();
    assert_eq!(names.len(), 6);
    let out = Command::new(BIN).arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for n in names {
        assert!(text.contains(n), "{n}");
    }
}

#[test]
fn binary_runs_a_config_and_compares() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny("bpsk-awgn-mse", &tmp.path().join("mse"));
    let path = tmp.path().join("mse.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let out = Command::new(BIN).arg("run").arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("mse/report.json").exists());

    let out = Command::new(BIN)
        .args(["run", "--seed", "3", "--out"])
        .arg(tmp.path().join("mse3"))
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = ExperimentConfig::load(tmp.path().join("mse3/config_echo.toml")).unwrap();
    assert_eq!(echoed.seed, 3);

    let out = Command::new(BIN)
        .arg("compare")
        .arg(tmp.path().join("mse"))
        .arg(tmp.path().join("mse3/report.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("marginal"));
}

#[test]
fn invalid_config_exits_nonzero_with_field_message() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny("bpsk-awgn-gan", tmp.path());
    cfg.output_dir = tmp.path().join("never");
    let text = cfg.to_toml().unwrap().replace("batch_size = 32", "batch_size = 1");
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = Command::new(BIN).arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch_size"));
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn missing_files_and_presets_fail_cleanly() {
    let out = Command::new(BIN).args(["compare", "/nonexistent/a", "/nonexistent/b"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read report"));
    let out = Command::new(BIN).args(["run", "--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}
