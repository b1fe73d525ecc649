use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn reldiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reldiv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn version_flag() {
    let o = reldiv(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("reldiv "));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = reldiv(&["oracle", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ordering_on_worked_instance() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"points": [0, 1], "probs": [0.8, 0.2]}"#);
    let q = write(dir.path(), "q.json", r#"{"points": [0, 1], "probs": [0.2, 0.8]}"#);
    let o = reldiv(&["ordering", "--p", &p, "--q", &q, "--loss", "lsgan"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("instance,loss,sy,rp,ralf,ra,pass\n"));
    let r = &rows(&out)[0];
    let val = |i: usize| r[i].parse::<f64>().unwrap();
    assert!((val(2) - 0.72).abs() < 1e-6);
    assert!((val(3) - 1.44 / 1.36).abs() < 1e-6);
    assert!((val(5) - 5.76 / 4.16).abs() < 1e-6);
    assert_eq!(r[6], "true");
}

#[test]
fn weakness_stays_pinned() {
    let o = reldiv(&["weakness", "--loss", "lsgan", "--steps", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("n,w1,sy,rp,ra\n"));
    let table = rows(&out);
    assert_eq!(table.len(), 20);
    let last = &table[19];
    assert!((last[1].parse::<f64>().unwrap() - 0.05).abs() < 1e-12);
    for cell in &last[2..] {
        assert!((cell.parse::<f64>().unwrap() - 2.0).abs() < 1e-3);
    }
}

#[test]
fn identical_distributions_give_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"points": [-1, 0, 2], "probs": [0.3, 0.3, 0.4]}"#);
    let o = reldiv(&["oracle", "--p", &p, "--q", &p, "--loss", "all", "--variant", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 15);
    for r in table {
        assert!(r[3].parse::<f64>().unwrap().abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn estimate_lists_estimators() {
    let o = reldiv(&["estimate", "--real", "2,0", "--fake", "0,0", "--loss", "lsgan", "--estimator", "rp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("estimator,loss,k,value\n"));
    // rows: f(2) = 0 and f(0) = 0, so the paired mean is 0
    assert_eq!(rows(&out)[0][3], "0");
}

#[test]
fn config_missing_seed_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"instances": "random", "count": 3, "loss": "lsgan"}"#);
    let o = reldiv(&["axioms", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn bad_probabilities_name_the_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"p": {"points": [0, 1], "probs": [0.5, 0.6]}, "q": {"points": [0, 1], "probs": [0.5, 0.5]}}"#,
    );
    let o = reldiv(&["oracle", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`p`"), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"loss": "lsgan", "steps": 3, "stpes": 4}"#);
    let o = reldiv(&["weakness", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stpes"), "{}", stderr(&o));
}

#[test]
fn config_for_another_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"subcommand": "oracle", "loss": "lsgan", "steps": 3}"#);
    let o = reldiv(&["weakness", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"loss": "lsgan", "steps": 3}"#);
    let o = reldiv(&["weakness", "--config", &cfg, "--steps", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 5);
}

#[test]
fn failed_check_exits_one() {
    // one ascent step cannot converge on a non-trivial pair
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"points": [0, 1, 2], "probs": [0.7, 0.2, 0.1]}"#);
    let q = write(dir.path(), "q.json", r#"{"points": [0, 1, 2], "probs": [0.1, 0.3, 0.6]}"#);
    let o = reldiv(&["oracle", "--p", &p, "--q", &q, "--loss", "sgan", "--variant", "ra", "--max-iters", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o))[0][4], "false");
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let o = reldiv(&["weakness", "--loss", "hinge", "--steps", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let body = fs::read_to_string(&out).unwrap();
    assert_eq!(body.lines().count(), 5);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn exact_bias_sweep_needs_no_seed() {
    let dir = tempfile::tempdir().unwrap();
    let real = write(dir.path(), "r.json", r#"{"values": [0, 1], "probs": [0.5, 0.5]}"#);
    let fake = write(dir.path(), "f.json", r#"{"values": [-1, 1], "probs": [0.3, 0.7]}"#);
    let o = reldiv(&[
        "bias-sweep", "--real", &real, "--fake", &fake, "--ks", "1,2,4", "--estimator", "ra_term1", "--loss", "lsgan",
        "--exact",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 3);
    // var_y = 0.84, bias = -var_y/k
    for (r, k) in table.iter().zip([1.0, 2.0, 4.0]) {
        assert!((r[5].parse::<f64>().unwrap() + 0.84 / k).abs() < 1e-12, "{r:?}");
        assert_eq!(r[7], "exact");
    }
}

#[test]
fn monte_carlo_sweep_without_seed_is_a_usage_error() {
    let o = reldiv(&["bias-sweep", "--preset", "normal", "--ks", "2", "--estimator", "ra", "--loss", "sgan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}
