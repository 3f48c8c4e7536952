use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xbar-mul"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn demo_prints_exact_product() {
    let (code, stdout, _) = run(&["demo"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("0.0101101100011110"));
    assert!(stdout.contains("error    = 0\n"));
    assert!(stdout.contains("1 1 2 3 0 1 3 2"));
}

#[test]
fn bound_reports_feasible() {
    let (code, stdout, _) = run(&["bound", "--k", "16", "--m", "1", "--dw", "2^-8"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().any(|l| l == "feasible"));
    assert!(stdout.contains("effective_bits=4"));

    let (code, stdout, _) = run(&["bound", "--k", "32", "--m", "1", "--dw", "2^-10"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("effective_bits=5"));
}

#[test]
fn strict_bound_exits_two_when_infeasible() {
    let args = [
        "bound", "--k", "16", "--m", "1", "--dw", "2^-8", "--dx", "2^-8",
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    assert!(stdout.lines().any(|l| l == "infeasible"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict).0, 2);
}

#[test]
fn config_errors_exit_one() {
    let (code, _, stderr) = run(&["sweep", "--trials", "0", "--k", "4", "--seed", "1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("trials"));
    // seed is mandatory
    assert_eq!(run(&["sweep", "--k", "4", "--trials", "3"]).0, 1);
    assert_eq!(run(&["sweep", "--bogus"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(
        run(&["sweep", "--n", "16", "--m", "2", "--k", "4", "--seed", "1"]).0,
        1
    );
    assert_eq!(run(&["bound", "--k", "4", "--dw", "2^y"]).0, 1);
    assert_eq!(
        run(&["sweep", "--config", "/nonexistent/cfg", "--seed", "1"]).0,
        1
    );
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let (code, stdout, _) = run(&[
            "sweep",
            "--n",
            "16",
            "--m",
            "1",
            "--dw",
            "2^-8",
            "--dx",
            "2^-8",
            "--trials",
            "500",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(stdout.contains("trials=500"));
    }
    let ca = std::fs::read(&a).unwrap();
    assert_eq!(ca, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ca).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,error,error_exact"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 4);
    assert!(first[0].parse::<f64>().unwrap() < 1.0);
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn sweep_reads_config_file_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# heavy noise\nn = 8\nm = 2\nwrite_noise = 2^-3\ninput_noise = 2^-3\ntrials = 50\nseed = 7\n").unwrap();
    let (code, stdout, stderr) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout.lines().count(), 51);
    assert!(stderr.contains("trials=50"));
    assert!(!stderr.contains("success_rate=1 "));

    let (code, _, stderr) = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--dw",
        "0",
        "--dx",
        "0",
    ]);
    assert_eq!(code, 0);
    assert!(stderr.contains("success_rate=1 "));
    assert!(stderr.contains("max_error=0 "));
}

#[test]
fn iv_emits_trace_csv() {
    let (code, stdout, _) = run(&["iv", "--period", "10", "--periods", "1", "--dt", "0.1"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("t,v,i,w"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    for r in &rows {
        if r[1] == 0.0 {
            assert_eq!(r[2], 0.0);
        }
        assert!((0.0..=1.0).contains(&r[3]));
    }
    assert_eq!(run(&["iv", "--dt", "0"]).0, 1);
    assert_eq!(run(&["iv", "--preset", "graphene"]).0, 1);
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sweep"));
}
