use std::process::Command;

fn ntr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntr"))
}

#[test]
fn check_passes_on_builtin_problems() {
    for p in ["quadratic8", "tridiag:30", "s271", "s289", "s293"] {
        let out = ntr().args(["check", p, "--points", "5"]).output().unwrap();
        assert!(out.status.success(), "{p}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn errors_are_machine_readable() {
    let out = ntr().args(["check", "s999"]).output().unwrap();
    assert!(!out.status.success());
    let line = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["error"], "not_implemented");

    let out = ntr().args(["preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "config");
    assert_eq!(v["path"], "preset");
}

#[test]
fn run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[problem]\nid = \"quadratic8\"\n[noise]\nfamily = \"uniform\"\neps_f = 0.1\neps_g = 1e-5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = ntr()
        .args(["run", cfg.to_str().unwrap(), "--seeds", "1-3", "--iters", "50", "--variant", "noisy"])
        .args(["--solver", "dogleg", "--delta0", "0.5", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for s in 1..=3 {
        let text = std::fs::read_to_string(out_dir.join(format!("noisy_seed{s}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 51);
    }
    assert!(!out_dir.join("classical_seed1.csv").exists());

    let bad = ntr().args(["run", cfg.to_str().unwrap(), "--seeds", ""]).output().unwrap();
    assert!(!bad.status.success());
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(bad.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["path"], "experiment.seeds");
}

#[test]
fn constants_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[problem]\nid = \"quadratic8\"\n[noise]\nfamily = \"uniform\"\neps_f = 0.1\neps_g = 1e-5\n[driver]\nmax_iters = 20\n",
    )
    .unwrap();
    let out = ntr().args(["constants", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("r = 4"));
    let c1: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("c1_radius = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((c1 - 0.2545725354697).abs() < 1e-9, "{c1}");
}
