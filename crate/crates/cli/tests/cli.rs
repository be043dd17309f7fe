use std::path::Path;
use std::process::{Command, Output};

fn tfcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfcd"))
        .args(args)
        .env_remove("TFCD_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn zero_problem_writes_zero_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let out = tfcd(&[
        "solve", "--problem", "zero", "--nt", "8", "--mx", "4", "--levels", "all",
        "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,u"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 25);
    for row in rows {
        let u: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(u, 0.0);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn solve_summary_matches_error_norms() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let out = tfcd(&[
        "solve", "--problem", "singular", "--alpha", "0.5", "--theta", "4", "--nt", "16",
        "--mx", "8", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stderr(&out);
    let reported: f64 = summary
        .split("L2 error ")
        .nth(1)
        .and_then(|s| s.split(',').next())
        .unwrap()
        .parse()
        .unwrap();

    // Recompute the interior L2 error from the CSV against the exact solution.
    let h: f64 = 1.0 / 8.0;
    let mut sum = 0.0;
    for row in read(&csv).lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, x, y, u) = (v[0], v[1], v[2], v[3]);
        let interior = x > 0.0 && x < 1.0 - 1e-12 && y > 0.0 && y < 1.0 - 1e-12;
        if interior {
            let exact = (1.0 + t.sqrt()) * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
            sum += h * h * (u - exact).powi(2);
        }
    }
    let recomputed = sum.sqrt();
    assert!((recomputed - reported).abs() <= 1e-6 * recomputed, "{recomputed} vs {reported}");
}

#[test]
fn solve_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "3"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let out = tfcd(&[
            "solve", "--nt", "12", "--mx", "9", "--my", "7", "--mu1", "0.5", "--gamma", "-0.1",
            "--threads", threads, "--levels", "0,6,12", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_tfcd"))
        .args(["solve", "--nt", "4", "--mx", "4"])
        .env("TFCD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("threads"));
}

#[test]
fn usage_errors_exit_with_one() {
    let out = tfcd(&["solve", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha must lie in (0,1)"));

    let out = tfcd(&["solve", "--nt", "16", "--nhat", "32"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nhat"));

    let out = tfcd(&["solve", "--nt", "many"]);
    assert_eq!(out.status.code(), Some(1));

    let out = tfcd(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let out = tfcd(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "problem = \"zero\"\nnt = 4\nmx = 3\nalpha = 0.3\n").unwrap();
    let csv = dir.path().join("u.csv");
    let out = tfcd(&[
        "solve", "--config", cfg.to_str().unwrap(), "--mx", "2", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    // Flag mx = 2 wins over the file's mx = 3: 3 x 3 nodes at the final level.
    assert_eq!(read(&csv).lines().count(), 1 + 9);

    std::fs::write(&cfg, "nt = 4\nunknown_key = 1\n").unwrap();
    let out = tfcd(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown field"));

    std::fs::write(&cfg, "nt = \"four\"\n").unwrap();
    let out = tfcd(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spatial_convergence_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let out = tfcd(&[
        "convergence", "--problem", "steady", "--axis", "spatial", "--levels", "4,8,16",
        "--nt", "16", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = read(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,param,l2_error,max_error,observed_order,predicted_order");
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let predicted: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(predicted, 4.0);
    }
    assert!(stderr(&out).contains("PASS"));
}

#[test]
fn temporal_convergence_predicted_order_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let args = [
        "convergence", "--problem", "singular", "--alpha", "0.5", "--theta", "4", "--axis",
        "temporal", "--levels", "8,16,32", "--mx", "16", "--out", csv.to_str().unwrap(),
    ];
    let out = tfcd(&args);
    let text = read(&csv);
    for row in text.lines().skip(1) {
        let predicted: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(predicted, 2.0);
    }
    let observed: f64 = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    let expected_code = if (observed - 2.0).abs() <= 0.3 { 0 } else { 2 };
    assert_eq!(out.status.code(), Some(expected_code), "{}", stderr(&out));

    // A tolerance wide enough to cover the gap flips the status to success.
    let mut wide = args.to_vec();
    wide.extend(["--tolerance", "5"]);
    assert_eq!(tfcd(&wide).status.code(), Some(0));
}

#[test]
fn check_report_lists_every_property() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("check.txt");
    let out = tfcd(&["check", "--out", report.to_str().unwrap()]);
    let text = read(&report);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    for prefix in ["weights (i)", "weights (v)", "telescoping", "stability", "rho bounded"] {
        let line = lines.iter().find(|l| l.contains(prefix)).unwrap();
        assert!(line.starts_with("PASS"), "{line}");
    }
    let claimed = lines.iter().find(|l| l.contains("rho within [1.6597542")).unwrap();
    let all_pass = lines.iter().all(|l| l.starts_with("PASS"));
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 2 }), "{claimed}");
}
