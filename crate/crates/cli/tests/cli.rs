use std::path::Path;
use std::process::{Command, Output};

fn unruh(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unruh")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_golden_prints_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(&["list-golden"], dir.path());
    assert!(o.status.success());
    let names = stdout(&o);
    for n in ["fig2_static", "fig3_superposed", "tomography_round_trip", "feasibility_electron"] {
        assert!(names.lines().any(|l| l == n), "{n}");
    }
    let o = unruh(&["list-golden", "--show", "fig2_static"], dir.path());
    assert!(stdout(&o).contains("kind = \"dynamics\""));
}

#[test]
fn run_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(&["run", "fig2_oscillating", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("res/fig2_oscillating.csv");
    assert!(csv.exists());

    let o = unruh(&["plot", "res/fig2_oscillating.csv", "--cols", "sigma_z,n", "--out", "p.svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("p.svg")).unwrap().starts_with("<svg"));

    let o = unruh(&["plot", "res/fig2_oscillating.csv", "--cols", "bogus", "--out", "q.svg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("q.svg").exists());
}

#[test]
fn tomography_outputs_feed_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(&["run", "tomography_round_trip", "--out", "."], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = unruh(
        &["fit", "tomography_round_trip_red.scan", "tomography_round_trip_blue.scan", "--n-max", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.starts_with("n,p_g,p_e,p_g_sigma,p_e_sigma"));
    assert_eq!(table.lines().count(), 5);

    // Red scan passed twice: branch mismatch is a validation error.
    let o = unruh(&["fit", "tomography_round_trip_red.scan", "tomography_round_trip_red.scan"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ill_conditioned_fit_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    for branch in ["red", "blue"] {
        let mut text =
            format!("# sideband-scan branch={branch} eta=0.065 omega0_over_2pi_khz=150\ntime_us,p_g,shots\n");
        for i in 0..5 {
            text.push_str(&format!("{},1,0\n", i as f64 * 0.5));
        }
        std::fs::write(dir.path().join(format!("{branch}.scan")), text).unwrap();
    }
    let o = unruh(&["fit", "red.scan", "blue.scan"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn feasibility_prints_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = unruh(&["feasibility", "feasibility_electron"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').take(3).map(|x| x.parse().unwrap()).collect();
    assert!((row[2] - 2e-4).abs() / 2e-4 < 0.05, "{}", row[2]);

    let o = unruh(&["feasibility", "fig2_static"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn truncation_exits_with_warning_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unruh(&["list-golden", "--show", "fig2_oscillating"], dir.path());
    let text =
        stdout(&cfg).replace("fock_dim = 6", "fock_dim = 2").replace("name = \"fig2_oscillating\"", "name = \"small\"");
    std::fs::write(dir.path().join("small.toml"), text).unwrap();
    let o = unruh(&["run", "small.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/small.csv").exists());
}

#[test]
fn bad_config_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "kind = \"dynamics\"\nname = \"x\"\nbogus = 1\n").unwrap();
    let o = unruh(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = unruh(&["run", "does_not_exist.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = unruh(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
