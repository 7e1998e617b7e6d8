//! End-to-end tests of the `mstrack` binary: argument handling, spec
//! parsing, output layout, determinism, and the reference queries.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Reference radii at t = 1/2 hold to three significant digits.
const REFERENCE_RADII_TOL: f64 = 5e-3;
/// Acceptance band for the linear scheme's level-0 volume drift.
const DRIFT_BAND: (f64, f64) = (6e-3, 2.4e-2);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mstrack"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mstrack-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Extracts the number after `prefix ... = ` on the line starting with `prefix`.
fn value_line(text: &str, prefix: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no line starting with {prefix:?} in {text:?}"));
    line.rsplit('=').next().unwrap().trim().parse().unwrap()
}

fn tiny_spec(dir: &Path, out_name: &str) -> PathBuf {
    let out_dir = dir.join(out_name);
    let spec = format!(
        r#"
name = "tiny"

[shape]
kind = "circle"
radius = 2.0
k = 64

[scheme]
scheme = "sp_fixed_point"
integration = "lumped"
dt = 1e-3
t_end = 5e-3

[mesh]
half_width = 4.0
n_fine = 32
n_coarse = 8

[output]
dir = "{}"
snapshot_times = [0.0, 5e-3]
"#,
        out_dir.display()
    );
    let path = dir.join(format!("{out_name}.toml"));
    std::fs::write(&path, spec).unwrap();
    path
}

#[test]
fn exact_echoes_initial_data_at_time_zero() {
    let out = bin()
        .args(["exact", "--t", "0", "--r1", "2.5", "--r2", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(value_line(&text, "r1("), 2.5);
    assert_eq!(value_line(&text, "r2("), 3.0);
}

#[test]
fn exact_matches_reference_radii_at_half_time() {
    let out = bin()
        .args(["exact", "--t", "0.5", "--r1", "2.5", "--r2", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!((value_line(&text, "r1(") - 1.66).abs() < REFERENCE_RADII_TOL);
    assert!((value_line(&text, "r2(") - 2.35).abs() < REFERENCE_RADII_TOL);
    assert!(text.contains("extinction time in ["));
}

#[test]
fn exact_rejects_time_past_extinction() {
    let out = bin()
        .args(["exact", "--t", "99", "--r1", "2.5", "--r2", "3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("extinction"));
}

#[test]
fn exact_rejects_inverted_radii() {
    let out = bin()
        .args(["exact", "--t", "0.1", "--r1", "3", "--r2", "2.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn simulate_writes_outputs_and_is_deterministic() {
    let dir = scratch("simulate");
    let spec_a = tiny_spec(&dir, "a");
    let spec_b = tiny_spec(&dir, "b");
    let out_a = bin().arg("simulate").arg(&spec_a).output().unwrap();
    assert!(out_a.status.success(), "{}", stderr_of(&out_a));
    // Second run under a requested thread cap: capped to the sequential
    // backend with a notice, and every artifact is bitwise identical.
    let out_b = bin()
        .arg("simulate")
        .arg(&spec_b)
        .env("MSTRACK_THREADS", "4")
        .output()
        .unwrap();
    assert!(out_b.status.success(), "{}", stderr_of(&out_b));
    assert!(stderr_of(&out_b).contains("MSTRACK_THREADS=4"));

    for name in [
        "diagnostics.csv",
        "snapshot_t0.txt",
        "snapshot_t0.005.txt",
        "curves.svg",
        "energy.svg",
        "volume.svg",
    ] {
        let a = std::fs::read(dir.join("a").join(name)).unwrap();
        let b = std::fs::read(dir.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    let diag = std::fs::read_to_string(dir.join("a").join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("m,t,energy,"));
    assert_eq!(diag.lines().count(), 1 + 5, "header plus one row per step");
}

#[test]
fn simulate_missing_field_writes_nothing() {
    let dir = scratch("missing");
    let out_dir = dir.join("out");
    let spec = format!(
        "name = \"broken\"\n\n[shape]\nkind = \"circle\"\nradius = 2.0\nk = 64\n\n\
         [scheme]\nscheme = \"sp_fixed_point\"\nintegration = \"lumped\"\ndt = 1e-3\n\n\
         [mesh]\nhalf_width = 4.0\nn_fine = 32\nn_coarse = 8\n\n\
         [output]\ndir = \"{}\"\n",
        out_dir.display()
    );
    let path = dir.join("broken.toml");
    std::fs::write(&path, spec).unwrap();
    let out = bin().arg("simulate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("t_end"));
    assert!(!out_dir.exists(), "failed run must not leave partial outputs");
}

#[test]
fn simulate_rejects_unknown_fields() {
    let dir = scratch("unknown");
    let spec = "name = \"typo\"\n\n[scheme]\nscheme = \"sp_fixed_point\"\n\
                integration = \"lumped\"\ndt = 1e-3\nt_end = 1e-2\nwarp = 9\n\n\
                [output]\ndir = \"/tmp/never\"\n";
    let path = dir.join("typo.toml");
    std::fs::write(&path, spec).unwrap();
    let out = bin().arg("simulate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("warp"));
}

#[test]
fn converge_level0_linear_tabulates_the_study_row() {
    let dir = scratch("converge");
    let out_dir = dir.join("out");
    let spec = format!(
        "name = \"ladder\"\n\n[output]\ndir = \"{}\"\n\n[converge]\nlevels = [0]\n",
        out_dir.display()
    );
    let path = dir.join("ladder.toml");
    std::fs::write(&path, spec).unwrap();
    let run = || {
        bin()
            .args(["converge"])
            .arg(&path)
            .args(["--scheme", "bgn-linear", "--integration", "lumped"])
            .output()
            .unwrap()
    };
    let out = run();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let csv = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h_f,h_gamma_M,err_u,err_gamma,K_Omega_M,K,v_delta_M,wall_secs"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 8);
    let h_f: f64 = row[0].parse().unwrap();
    assert_eq!(h_f, 0.0625, "level-0 fine mesh size is 8/128");
    let k: usize = row[5].parse().unwrap();
    assert_eq!(k, 256);
    let drift: f64 = row[6].parse().unwrap();
    assert!(
        DRIFT_BAND.0 <= drift && drift <= DRIFT_BAND.1,
        "linear level-0 drift {drift} outside {DRIFT_BAND:?}"
    );
    // A second identical run reproduces every column except the timing one.
    let again = run();
    assert!(again.status.success());
    let csv_again = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    let strip_wall = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip_wall(&csv), strip_wall(&csv_again));
}

#[test]
fn converge_rejects_levels_past_the_ladder() {
    let dir = scratch("badlevel");
    let spec = format!(
        "name = \"ladder\"\n\n[output]\ndir = \"{}\"\n\n[converge]\nlevels = [0]\n",
        dir.join("out").display()
    );
    let path = dir.join("ladder.toml");
    std::fs::write(&path, spec).unwrap();
    let out = bin()
        .args(["converge"])
        .arg(&path)
        .args(["--levels", "9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("level 9"));
}

#[test]
fn thread_cap_must_be_a_positive_integer() {
    let out = bin()
        .args(["exact", "--t", "0", "--r1", "2.5", "--r2", "3"])
        .env("MSTRACK_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("MSTRACK_THREADS"));
}
