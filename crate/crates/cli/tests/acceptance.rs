//! Acceptance suite: one PASS/FAIL line per criterion, run at full size.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Instant;

use sigexec_core::validation::{self, Check, Faults};

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

fn timed(f: impl FnOnce() -> sigexec_core::Result<Check>) -> Check {
    let started = Instant::now();
    let mut check = f().expect("check ran");
    check.seconds = started.elapsed().as_secs_f64();
    check
}

fn with_runtime(check: Check, limit: f64) -> Check {
    if check.seconds < limit {
        return check;
    }
    Check { passed: false, detail: format!("{} (runtime {:.1}s over {limit}s)", check.detail, check.seconds), ..check }
}

/// Every command run twice with identical inputs must produce identical bytes.
fn cli_determinism() -> Check {
    let started = Instant::now();
    let dir = scratch("determinism");
    let transient = dir.join("transient.toml");
    std::fs::write(&transient, "[regime]\nkind = \"transient\"\n[simulation]\nseed = 11\n").unwrap();
    let transient = transient.to_str().unwrap().to_string();
    let commands: Vec<Vec<String>> = [
        vec!["simulate", "--seed", "7"],
        vec!["simulate", "--seed", "7", "--strategy", "twap"],
        vec!["--config", &transient, "simulate", "--strategy", "update-3"],
        vec!["sweep", "--param", "T", "--values", "5,10", "--paths", "200", "--seed", "3"],
        vec!["--config", &transient, "sweep", "--param", "n", "--values", "2,3", "--paths", "100"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut failures = Vec::new();
    for args in &commands {
        let a = run_ok(&args.iter().map(String::as_str).collect::<Vec<_>>()).stdout;
        let b = run_ok(&args.iter().map(String::as_str).collect::<Vec<_>>()).stdout;
        if a != b || a.is_empty() {
            failures.push(args.join(" "));
        }
    }
    for n in ["1", "3"] {
        let (x, y) = (dir.join(format!("a{n}")), dir.join(format!("b{n}")));
        run_ok(&["figure", n, "--paths", "100", "--out", x.to_str().unwrap()]);
        run_ok(&["figure", n, "--paths", "100", "--out", y.to_str().unwrap()]);
        for entry in std::fs::read_dir(&x).unwrap() {
            let name = entry.unwrap().file_name();
            if std::fs::read(x.join(&name)).unwrap() != std::fs::read(y.join(&name)).unwrap() {
                failures.push(format!("figure {n} {}", name.to_string_lossy()));
            }
        }
    }
    let core = validation::determinism().expect("determinism check");
    let passed = failures.is_empty() && core.passed;
    Check {
        name: "determinism",
        passed,
        detail: format!("{} CLI runs byte-identical: {}; {}", commands.len() + 2, failures.is_empty(), core.detail),
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn main() {
    let checks = vec![
        with_runtime(timed(|| validation::static_vs_bvp(10_000)), 1.0),
        timed(|| validation::euler_lagrange_constancy(1001)),
        timed(|| validation::riccati_residuals(101)),
        timed(|| validation::deterministic_collapse(1e-3)),
        timed(|| validation::kernel_oracle(20, Faults::default())),
        with_runtime(timed(|| validation::figure4_trends(1000)), 300.0),
        with_runtime(timed(|| validation::figure5_trend(10_000)), 300.0),
        timed(|| validation::ou_sampler(1_000_000, 100_000)),
        cli_determinism(),
    ];
    for c in &checks {
        println!("{}  {:<24} {:>7.2}s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
