//! End-to-end runs of the `gfrac` binary.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const SMOKE: &str = "family = power\np = 4\ns = 0.3\nM = 65\nf = const:1\nq = 0.5\n";

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gfrac"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap(), text)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn columns(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn check_young_power_passes() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run(dir.path(), "check-young", "family = power\np = 4\n", &[]);
    assert_eq!(code, 0);
    let csv = read(dir.path(), "checks.csv");
    assert!(csv.starts_with("name,samples,worst_margin,pass,best_constant,threshold,offending\n"));
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("true")));
}

#[test]
fn check_young_wrong_declared_bound_fails() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run(dir.path(), "check-young", "family = power\np = 4\np_minus = 5\n", &[]);
    assert_eq!(code, 1);
    assert!(text.contains("FAIL"));
    let csv = read(dir.path(), "checks.csv");
    let growth = csv.lines().find(|l| l.starts_with("growth_bounds")).unwrap();
    assert!(growth.contains("false") && growth.contains("offending t"));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    for bad in [
        "family power\n",
        "family = power\np = 4\ncolour = red\n",
        "family = power\np = 4\np = 4\n",
        "family = power\np = 4\nf = sin:1\n",
        "family = cubic\n",
        "family = power\np = 4\ncase = main1\nq = 2\n",
    ] {
        let (code, _) = run(dir.path(), "solve", bad, &[]);
        assert_eq!(code, 2, "{bad}");
    }
}

#[test]
fn missing_arguments_exit_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_gfrac")).arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_gfrac"))
        .args(["solve", "--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_smoke_scenario() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run(dir.path(), "solve", SMOKE, &[]);
    assert_eq!(code, 0, "{text}");
    let sol = read(dir.path(), "solution.csv");
    assert_eq!(sol.lines().next(), Some("x,u_1,u_2,u_4,u_8,u_16"));
    let rows = columns(&sol);
    assert_eq!(rows.len(), 65);
    for r in &rows {
        for w in r[1..].windows(2) {
            assert!(w[0] <= w[1] + 1e-7);
        }
    }
    assert!(!sol.contains('\r'));
    let diag = read(dir.path(), "diagnostics.csv");
    assert_eq!(diag.lines().count(), 6);
    assert!(diag.starts_with("n,fixed_point_iterations,residual,modular_W,seminorm_W,lower_bound_lK,"));
    assert!(dir.path().join("out/solution.svg").exists());
}

#[test]
fn no_plot_skips_svg() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run(dir.path(), "solve", SMOKE, &["--no-plot"]);
    assert_eq!(code, 0);
    assert!(!dir.path().join("out/solution.svg").exists());
}

#[test]
fn zero_datum_gives_zero_solution() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run(dir.path(), "solve", "family = power\np = 4\nf = 0\n", &[]);
    assert_eq!(code, 0);
    for r in columns(&read(dir.path(), "solution.csv")) {
        assert!(r[1..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn solve_is_byte_stable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(run(a.path(), "solve", SMOKE, &["--seed", "11"]).0, 0);
    assert_eq!(run(b.path(), "solve", SMOKE, &["--seed", "11"]).0, 0);
    for f in ["solution.csv", "diagnostics.csv", "solution.svg"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn main2_hypothesis_violation_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let base = "family = power\np = 4\ncase = main2\nq = 1.5\nq_star = 2\n";
    let (code, text) = run(dir.path(), "solve", &format!("{base}r = 2.5\n"), &[]);
    assert_eq!(code, 2);
    assert!(text.contains("rq^* < p^-"));
    let (code, text) = run(dir.path(), "solve", base, &[]);
    assert_eq!(code, 0, "{text}");
}

#[test]
fn failing_gate_stops_the_solver() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run(dir.path(), "solve", "family = power\np = 4\np_minus = 5\n", &[]);
    assert_eq!(code, 1);
    assert!(dir.path().join("out/checks.csv").exists());
    assert!(!dir.path().join("out/solution.csv").exists());
}

#[test]
fn nodal_datum_file() {
    let dir = TempDir::new().unwrap();
    let values: String = (0..33).map(|i| format!("{}\n", 1.0 + (i % 3) as f64)).collect();
    std::fs::write(dir.path().join("f.txt"), values).unwrap();
    let (code, text) = run(dir.path(), "solve", "family = power\np = 4\nf_file = f.txt\n", &[]);
    assert_eq!(code, 0, "{text}");
    let (code, _) = run(dir.path(), "solve", "family = power\np = 4\nM = 65\nf_file = f.txt\n", &[]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), "convergence", "family = power\np = 4\nf_file = f.txt\n", &[]);
    assert_eq!(code, 2);
}

#[test]
fn convergence_study() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run(dir.path(), "convergence", "family = power\np = 4\n", &[]);
    assert_eq!(code, 0, "{text}");
    let csv = read(dir.path(), "convergence.csv");
    assert!(csv.starts_with("M_coarse,M_fine,sup_diff\n"));
    let d: Vec<f64> = columns(&csv).iter().map(|r| r[2]).collect();
    assert_eq!(d.len(), 2);
    assert!(d[1] < d[0]);

    let (code, _) = run(dir.path(), "convergence", "family = power\np = 4\nf = 0\n", &[]);
    assert_eq!(code, 0);
    assert!(columns(&read(dir.path(), "convergence.csv")).iter().all(|r| r[2] == 0.0));

    let (code, _) = run(dir.path(), "convergence", "family = power\np = 4\nmeshes = 33\n", &[]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), "convergence", "family = power\np = 4\nmeshes = 33,64\n", &[]);
    assert_eq!(code, 2);
}
