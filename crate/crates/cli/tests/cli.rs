use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sigexec"));
    cmd.env("EXEC_SIGNAL_THREADS", "2");
    cmd
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sigexec-acceptance-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn sigexec");
    assert!(out.status.success(), "sigexec {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn injected_kernel_fault_is_caught() {
    let out = bin().args(["validate", "--fault", "kernel"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL  kernel-oracle"));
}

#[test]
fn invalid_horizon_exits_with_config_error() {
    let dir = scratch("invalid");
    let path = dir.join("bad.toml");
    std::fs::write(&path, "[execution]\nT = -1.0\n").unwrap();
    let out = bin().args(["--config", path.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`T`"));
}

#[test]
fn figure_bundles_have_documented_columns() {
    let dir = scratch("bundles");
    let out = dir.to_str().unwrap();
    for n in ["1", "2", "3", "4", "5"] {
        run_ok(&["figure", n, "--paths", "40", "--out", out]);
    }
    let expect = [
        ("fig1_static_inventory.csv", "t,X_iota_0.5,X_iota_0,X_iota_-0.5"),
        ("fig2_static_inventory.csv", "t,X_sigmaP_1,X_sigmaP_5,X_sigmaP_10"),
        ("fig3_envelope.csv", "t,q05,q50,q95,static"),
        ("fig4_horizon.csv", "T,static_mean,static_stderr,adaptive_mean,adaptive_stderr,gap,gap_stderr"),
        ("fig4_sigma.csv", "sigma,static_mean,static_stderr,adaptive_mean,adaptive_stderr,gap,gap_stderr"),
        ("fig5_trajectories.csv", "t,X_n1,X_n2,X_n3"),
        ("fig5_envelope.csv", "t,n1_q05,n1_q50,n1_q95,n2_q05,n2_q50,n2_q95,n3_q05,n3_q50,n3_q95"),
        ("fig5_convergence.csv", "paths,mean_n1,stderr_n1,mean_n2,stderr_n2,mean_n3,stderr_n3"),
    ];
    for (file, header) in expect {
        let text = std::fs::read_to_string(dir.join(file)).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# sigexec "), "{file}");
        assert_eq!(lines.next().unwrap(), header, "{file}");
        assert!(lines.next().is_some(), "{file} has no rows");
    }
    let paths = std::fs::read_to_string(dir.join("fig3_paths.csv")).unwrap();
    assert!(paths.lines().nth(1).unwrap().starts_with("t,path_0,"));
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn static_simulation_reproduces_closed_form_inventory() {
    use sigexec_core::instant::StaticSchedule;
    use sigexec_core::{Regime, Scenario};
    let text = String::from_utf8(run_ok(&["simulate", "--strategy", "static"]).stdout).unwrap();
    let scenario = Scenario::reference(Regime::InstantFuel);
    let schedule = StaticSchedule::new(&scenario.instant_model().unwrap(), &scenario.spec, &scenario.signal).unwrap();
    let (t, x) = (csv_column(&text, "t"), csv_column(&text, "X"));
    assert_eq!(t.len(), scenario.steps + 1);
    for (t, x) in t.iter().zip(&x) {
        assert!((x - schedule.inventory(*t)).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn seeded_simulation_writes_identical_files() {
    let dir = scratch("seeded");
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    run_ok(&["simulate", "--seed", "1", "--out", a.to_str().unwrap()]);
    run_ok(&["simulate", "--seed", "1", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = run_ok(&["simulate", "--seed", "2"]).stdout;
    assert_ne!(std::fs::read(&a).unwrap(), other);
}
