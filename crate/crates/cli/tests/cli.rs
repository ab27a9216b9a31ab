use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdp"))
        .args(args)
        .env_remove("MDP_SEED")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tiny_rate_curve_has_forty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdp(&["rate-curve", "--overrides", "replications=100", "n=10", "--out", out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("rate_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,hits,censored,p_hat,empirical_rate,theoretical_rate,ci_low,ci_high"));
    assert_eq!(lines.count(), 40);
    assert!(dir.path().join("manifest.txt").exists());
    assert!(stdout(&o).starts_with("rate-curve:"));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(mdp(&["validate", "--set", "bogus=1", "--out", out]).status.code(), Some(2));
    assert_eq!(mdp(&["rate-curve", "--set", "r=2", "--out", out]).status.code(), Some(2));
    assert_eq!(mdp(&["rate-curve", "--preset", "example9", "--out", out]).status.code(), Some(2));
    assert_eq!(mdp(&["validate", "--set", "dist=exponential", "--out", out]).status.code(), Some(0));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let nested = blocker.join("sub");
    let o = mdp(&["rate-curve", "--set", "replications=10", "n=10", "--out", nested.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let missing = dir.path().join("missing.txt");
    let o = mdp(&["path-rate", "--path", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let o = mdp(&["validate", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let exp = stdout(&mdp(&["validate", "--set", "dist=exponential", "rate=1", "--out", out]));
    assert!(exp.contains("assumption1: fails (Λ(a)=+inf for a≥1)"), "{exp}");

    let normal = stdout(&mdp(&["validate", "--set", "dist=normal", "mean=1", "sd=1", "--out", out]));
    assert!(normal.contains("assumption1: holds"), "{normal}");
    assert!(normal.contains("assumption2: holds (witness search: theta="), "{normal}");

    let poisson = stdout(&mdp(&["validate", "--set", "dist=poisson", "--out", out]));
    assert!(poisson.contains("assumption1: holds"), "{poisson}");
}

#[test]
fn manifest_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = mdp(&[
        "rate-curve",
        "--set",
        "dist=normal",
        "mean=1.5",
        "sd=0.7",
        "n=50",
        "replications=300",
        "tail=both",
        "--seed",
        "5",
        "--out",
        out_arg(a.path()),
    ]);
    assert!(o.status.success());
    let manifest = a.path().join("manifest.txt");
    let o = mdp(&["rate-curve", "--config", manifest.to_str().unwrap(), "--out", out_arg(b.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["manifest.txt", "rate_curve.csv", "rate_curve_lower.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_precedence() {
    let a = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mdp"))
        .args(["validate", "--seed", "9", "--out", out_arg(a.path())])
        .env("MDP_SEED", "4")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(fs::read_to_string(a.path().join("manifest.txt")).unwrap().contains("seed = 9"));

    let o = Command::new(env!("CARGO_BIN_EXE_mdp"))
        .args(["validate", "--out", out_arg(a.path())])
        .env("MDP_SEED", "4")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(fs::read_to_string(a.path().join("manifest.txt")).unwrap().contains("seed = 4"));
}

#[test]
fn svg_points_match_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdp(&["rate-curve", "--preset", "example2", "--set", "replications=2000", "--plot", "--out", out_arg(dir.path())]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("rate_curve.csv")).unwrap();
    let svg = fs::read_to_string(dir.path().join("rate_curve.svg")).unwrap();
    let series = |name: &str| -> Vec<(f64, f64)> {
        let tag = format!("data-series=\"{name}\"");
        let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
        let start = line.find("data-points=\"").unwrap() + "data-points=\"".len();
        let end = start + line[start..].find('"').unwrap();
        line[start..end]
            .split_whitespace()
            .map(|p| {
                let (t, v) = p.split_once(',').unwrap();
                (t.parse().unwrap(), v.parse().unwrap())
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| if f == "inf" { f64::INFINITY } else { f.parse().unwrap() }).collect())
        .collect();
    let empirical: Vec<(f64, f64)> = rows.iter().filter(|r| r[4].is_finite()).map(|r| (r[0], r[4])).collect();
    let theoretical: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[5])).collect();
    assert_eq!(series("empirical"), empirical);
    assert_eq!(series("theoretical"), theoretical);
    assert!(svg.contains("blue") && svg.contains("red"));
}

#[test]
fn raw_deviations_and_lower_tail_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdp(&["rate-curve", "--set", "n=20", "replications=50", "tail=both", "--raw", "--out", out_arg(dir.path())]);
    assert!(o.status.success());
    let devs = fs::read_to_string(dir.path().join("deviations.csv")).unwrap();
    assert_eq!(devs.lines().count(), 51);
    assert_eq!(fs::read_to_string(dir.path().join("rate_curve_lower.csv")).unwrap().lines().count(), 41);
}

#[test]
fn path_rate_prints_both_functionals() {
    let dir = tempfile::tempdir().unwrap();
    let knots = dir.path().join("path.txt");
    fs::write(&knots, "# t value\n0 0\n0.5 1\n1 1.25\n").unwrap();
    let o = mdp(&[
        "path-rate",
        "--set",
        "dist=normal",
        "mean=1",
        "sd=1",
        "--path",
        knots.to_str().unwrap(),
        "--endpoint",
        "1",
        "2",
        "--out",
        out_arg(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    // slopes 2 and 0.5 over half-unit segments: (4 + 0.25)/4 = 1.0625
    assert!(text.contains("I_T: 1.0625"), "{text}");
    // Λ*(x) = (x − 1)²/2: (1/2 + 1/8)/2 = 0.3125
    assert!(text.contains("J_T: 0.3125"), "{text}");
    assert!(text.contains("endpoint_infimum: 0.25"), "{text}");
    assert!(text.contains("verify_endpoint_infimum: 0.25"), "{text}");

    fs::write(&knots, "0 0\n1 1\n0.5 2\n").unwrap();
    let o = mdp(&["path-rate", "--path", knots.to_str().unwrap(), "--out", out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_is_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = mdp(&["rate-curve", "--set", "n=30", "replications=500", "--seed", "3", "--out", out_arg(d.path())]);
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(a.path().join("rate_curve.csv")).unwrap(),
        fs::read(b.path().join("rate_curve.csv")).unwrap()
    );
}

#[test]
fn legendre_and_lln_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdp(&["legendre", "--set", "dist=poisson", "x=0,1,2", "--out", out_arg(dir.path())]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("legendre.csv")).unwrap();
    assert!(csv.contains("\n0,1,1\n"), "{csv}");
    assert!(csv.contains("\n1,0,0\n"), "{csv}");

    let o = mdp(&["lln-check", "--set", "replications=100", "n_list=10,100", "--out", out_arg(dir.path())]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("lln.csv")).unwrap().lines().count(), 3);
}
