use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rabi(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi-kzm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RABI_KZM_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn local_maxima(rho: &[f64]) -> usize {
    let top = rho.iter().copied().fold(0.0, f64::max);
    (1..rho.len() - 1)
        .filter(|&i| rho[i] > rho[i - 1] && rho[i] >= rho[i + 1] && rho[i] > 0.05 * top)
        .count()
}

const FAST_SCAN: &[&str] = &[
    "--set",
    "Omega=100",
    "--set",
    "n_points=512",
    "--set",
    "half_width=32",
    "--set",
    "lambdas=1,-1",
];

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = rabi(dir.path(), &["gap", "--set", "lamda=1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'lamda'"));
}

#[test]
fn malformed_config_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nlambda 1\n").unwrap();
    let o = rabi(dir.path(), &["gap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = rabi(dir.path(), &["quench", "--set", "eps_start=0.2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gap_outputs_and_resolved_config_round_trip() {
    let a = TempDir::new().unwrap();
    let o = rabi(
        a.path(),
        &["gap", "--set", "gap_points=6", "--set", "lambda=-0.5"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let gap = read(a.path(), "gap.csv");
    assert_eq!(
        gap.lines().next().unwrap(),
        "ratio,g_tilde,gap_analytic,gap_ed,n_max,status"
    );
    assert_eq!(gap.lines().count(), 7);
    // Decoupled gap is ω.
    assert_eq!(column(&gap, "gap_analytic")[0], 1.0);
    assert!((column(&gap, "gap_ed")[0] - 1.0).abs() < 1e-10);
    let inset = read(a.path(), "gap_inset.csv");
    assert_eq!(inset.lines().next().unwrap(), "side,abs_eps,gap_analytic");
    assert_eq!(inset.lines().count(), 1 + 2 * 13);

    let resolved = a.path().join("resolved_config.txt");
    let b = TempDir::new().unwrap();
    let o = rabi(b.path(), &["gap", "--config", resolved.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(gap, read(b.path(), "gap.csv"));
}

#[test]
fn plots_are_written_on_request() {
    let dir = TempDir::new().unwrap();
    let o = rabi(
        dir.path(),
        &["gap", "--set", "gap_points=5", "--plots", "true"],
    );
    assert_eq!(code(&o), 0);
    for name in ["gap.svg", "gap_inset.svg"] {
        assert!(read(dir.path(), name).starts_with("<svg"), "{name}");
    }
}

#[test]
fn decoupled_ground_state_is_centered_gaussian() {
    let dir = TempDir::new().unwrap();
    let o = rabi(
        dir.path(),
        &[
            "ground",
            "--set",
            "ratios=0",
            "--set",
            "sweep_points=0",
            "--set",
            "Omega=100",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "ground_density_0.csv");
    let x = column(&csv, "x");
    let rho = column(&csv, "density");
    assert_eq!(local_maxima(&rho), 1);
    let peak = rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(x[peak].abs() < 1e-12);
    // φ₀ has density e^{−x²}/√π.
    assert!((rho[peak] - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-6);
}

#[test]
fn ground_defaults_go_from_one_to_two_peaks() {
    let dir = TempDir::new().unwrap();
    let o = rabi(
        dir.path(),
        &["ground", "--set", "Omega=200", "--set", "sweep_points=3"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let peaks: Vec<usize> = ["0.5", "1.02", "1.5"]
        .iter()
        .map(|r| {
            local_maxima(&column(
                &read(dir.path(), &format!("ground_density_{r}.csv")),
                "density",
            ))
        })
        .collect();
    assert_eq!(peaks[0], 1);
    assert_eq!(peaks[2], 2);
    let summary = read(dir.path(), "ground_summary.csv");
    assert_eq!(summary.lines().count(), 4);
    assert_eq!(read(dir.path(), "ground_sweep.csv").lines().count(), 4);
}

#[test]
fn quench_writes_series_with_conserved_norm() {
    let dir = TempDir::new().unwrap();
    let o = rabi(
        dir.path(),
        &[
            "quench",
            "--set",
            "Omega=100",
            "--set",
            "n_points=512",
            "--set",
            "half_width=32",
            "--set",
            "tau_q=5,10",
            "--set",
            "snapshots=11",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = read(dir.path(), "quench_tau_5_series.csv");
    assert_eq!(
        series.lines().next().unwrap(),
        "t,s,g_tilde,n_c,dx,dp,mean_x,mean_p,norm,energy"
    );
    assert!(column(&series, "norm")
        .iter()
        .all(|n| (n - 1.0).abs() < 1e-8));
    let long = read(dir.path(), "quench_tau_10_density_long.csv");
    assert_eq!(long.lines().next().unwrap(), "t,x,density");
    assert_eq!(long.lines().count(), 1 + 11 * 512);
    let matrix = read(dir.path(), "quench_tau_10_density_matrix.csv");
    assert_eq!(matrix.lines().count(), 12);
    let summary = read(dir.path(), "quench_summary.csv");
    let b_d = column(&summary, "b_d");
    assert!(column(&summary, "t_hat").iter().all(|&t| t > 0.0));
    // The slower ramp freezes out closer to the critical point.
    assert!(b_d[1] < b_d[0]);
}

#[test]
fn scan_rows_identical_across_worker_counts() {
    let one = TempDir::new().unwrap();
    let two = TempDir::new().unwrap();
    let mut args = vec!["kzscan", "--set", "tau_q=10,20,40"];
    args.extend_from_slice(FAST_SCAN);
    let a = rabi(one.path(), &[&args[..], &["--workers", "1"]].concat());
    let b = rabi(two.path(), &[&args[..], &["--workers", "2"]].concat());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    for name in [
        "kz_scan.csv",
        "kz_exponents.csv",
        "kz_errors.csv",
        "kz_rescaled.csv",
    ] {
        assert_eq!(read(one.path(), name), read(two.path(), name), "{name}");
    }
    let rows = read(one.path(), "kz_scan.csv");
    assert_eq!(
        rows.lines().next().unwrap(),
        "lambda,tau_q,t_hat,b_d,length_at_freeze,length_kind"
    );
    assert_eq!(rows.lines().count(), 7);
    assert!(rows.lines().nth(1).unwrap().ends_with(",dp"));
    let exps = read(one.path(), "kz_exponents.csv");
    assert_eq!(
        exps.lines().next().unwrap(),
        "lambda,z,z_err,nu,nu_err,slope_delay,slope_length,r2_delay,r2_length"
    );
    assert_eq!(exps.lines().count(), 3);
}

#[test]
fn single_tau_q_fails_at_fit_stage() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["kzscan", "--set", "tau_q=10"];
    args.extend_from_slice(FAST_SCAN);
    let o = rabi(dir.path(), &args);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.path(), "kz_scan.csv").lines().count(), 3);
    assert_eq!(read(dir.path(), "kz_exponents.csv").lines().count(), 1);
    let errors = read(dir.path(), "kz_errors.csv");
    let fit_failures: Vec<&str> = errors
        .lines()
        .skip(1)
        .filter(|l| l.contains(",,"))
        .collect();
    assert_eq!(fit_failures.len(), 2, "{errors}");
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rabi-kzm"))
        .args(["gap", "--set", "gap_points=3"])
        .env("RABI_KZM_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("gap.csv").exists());
    assert!(read(dir.path(), "resolved_config.txt")
        .contains(&format!("out = {}", dir.path().display())));
}
