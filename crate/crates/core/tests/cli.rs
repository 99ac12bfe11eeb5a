use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autocov-spectra"))
        .args(line.split_whitespace())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(line: &str) -> Value {
    let o = bin(line);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "autocov-spectra/1");
    v
}

fn read_curve(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,density"));
    lines
        .map(|l| {
            let (u, f) = l.split_once(',').unwrap();
            (u.parse().unwrap(), f.parse().unwrap())
        })
        .collect()
}

#[test]
fn support_prints_edges() {
    let o = bin("support --c 1");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "a=0 b=6.75\n");
}

#[test]
fn density_c1_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c1.csv");
    let o = bin(&format!("density --c 1 --law A --points 400 --out {}", path.display()));
    assert_eq!(o.status.code(), Some(0));
    let curve = read_curve(&fs::read_to_string(&path).unwrap());
    assert!(curve.len() >= 400);
    assert!(curve.iter().all(|&(u, f)| u > 0.0 && u <= 6.75 && f.is_finite() && f >= 0.0));
    assert_eq!(curve.last().unwrap().0, 6.75);
}

#[test]
fn density_c2_starts_at_lower_edge() {
    let o = bin("density --c 2 --law A");
    assert_eq!(o.status.code(), Some(0));
    let curve = read_curve(&stdout(&o));
    let step = curve[1].0 - curve[0].0;
    assert!(curve[0].0 >= 0.1134 - step);
}

#[test]
fn density_rejects_nonpositive_c() {
    let o = bin("density --c -1");
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors() {
    assert_eq!(bin("simulate --p 10 --t 5 --tau 5").status.code(), Some(2));
    assert_eq!(bin("simulate --t 5").status.code(), Some(2));
    assert_eq!(bin("").status.code(), Some(2));
    assert_eq!(bin("support --c abc").status.code(), Some(2));
    assert_eq!(bin("--help").status.code(), Some(0));
}

#[test]
fn simulate_writes_report_and_prints_ks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = bin(&format!("simulate --p 100 --t 200 --tau 3 --seed 2 --out {}", path.display()));
    assert_eq!(o.status.code(), Some(0));
    let printed = stdout(&o);
    let ks: f64 = printed.trim().strip_prefix("ks=").unwrap().parse().unwrap();
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["schema"], "autocov-spectra/1");
    assert_eq!(report["tau"], 3);
    assert_eq!(report["T"], 200);
    assert_eq!(report["ks"].as_f64().unwrap(), ks);
    assert!(ks < 0.1);
}

#[test]
fn simulate_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let o = bin(&format!(
            "simulate --p 30 --t 60 --replicates 4 --jobs {} --seed 9 --dist student-t --out {}",
            jobs,
            path.display()
        ));
        assert_eq!(o.status.code(), Some(0));
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.json", "1"), run("b.json", "3"));
}

#[test]
fn simulate_csv_format() {
    let o = bin("simulate --p 20 --t 40 --format csv");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("p,T,tau,c,law,ks"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn stieltjes_root_and_residual() {
    let v = json("stieltjes --c 0.5 --alpha-re 1 --alpha-im 1 --law B --format json");
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["value_im"].as_f64().unwrap() > 0.0);
    let text = stdout(&bin("stieltjes --c 0.5 --alpha-re -2 --alpha-im 0.5"));
    assert!(text.starts_with("value_re="));
}

#[test]
fn every_subcommand_speaks_json() {
    json("density --c 0.5 --points 10 --format json");
    json("support --c 2 --format json");
    json("simulate --p 10 --t 20 --format json");
    let lemma = json("lemma-check --p 20 --t 30 --kmax 40 --format json");
    let diags = lemma["diagnostics"].as_array().unwrap();
    assert_eq!(diags.last().unwrap()["k"], 30);
    assert_eq!(diags.last().unwrap()["abs_xk"], 0.0);
    let demo = json("factor-demo --p 40 --t 80 --m 1 --seeds 2 --format json");
    assert_eq!(demo["estimates"].as_array().unwrap().len(), 2);
}

#[test]
fn factor_demo_reports_modal_two() {
    let o = bin("factor-demo --m 2 --p 200 --t 400 --loading 5 --ar 0.5 --seeds 20");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("modal=2\n"), "{}", stdout(&o));
}
