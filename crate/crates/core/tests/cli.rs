use std::path::Path;
use std::process::Command;

use zeta_chaos::cli::{run, RunConfig, Subcommand};

fn small(sub: Subcommand) -> RunConfig {
    RunConfig {
        subcommand: sub,
        n_primes: 1000,
        grid_size: 256,
        level: 4,
        r_list: vec![0.25, 0.125, 0.0625],
        n_samples: 64,
        seed: 5,
        ..RunConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let text = read(dir, name);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest_sha256="));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn field_runs_are_reproducible() {
    let cfg = small(Subcommand::Field);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, 1, a.path()).unwrap();
    run(&cfg, 4, b.path()).unwrap();
    for f in ["field.csv", "field_summary.txt", "manifest.txt"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn zero_primes_give_a_zero_field() {
    let cfg = RunConfig { n_primes: 0, ..small(Subcommand::Field) };
    let d = tempfile::tempdir().unwrap();
    run(&cfg, 1, d.path()).unwrap();
    let (_, rows) = csv_rows(d.path(), "field.csv");
    assert_eq!(rows.len(), 256);
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn manifest_round_trips() {
    let cfg = RunConfig { beta: 1.25, q_list: vec![0.5, 2.0], seed: 99, ..small(Subcommand::Chaos) };
    let mut back = RunConfig::default();
    back.apply_text(&cfg.manifest_text()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.manifest_hash(), cfg.manifest_hash());
    assert_ne!(RunConfig { seed: 100, ..cfg.clone() }.manifest_hash(), cfg.manifest_hash());
}

fn exe(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_zeta-chaos")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    assert_eq!(exe(&["field", "--alpha", "0.5", "--out", out]), 2);
    assert_eq!(exe(&["chaos", "--level", "8", "--grid", "256", "--out", out]), 2);
    assert_eq!(exe(&["chaos", "--level", "2", "--grid", "256", "--r-list", "0.1", "--out", out]), 2);
    let file = d.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    assert_eq!(exe(&["field", "--n-primes", "10", "--out", file.to_str().unwrap()]), 4);
    assert_eq!(exe(&["field", "--n-primes", "10", "--grid", "16", "--out", out]), 0);
}

#[test]
fn coupling_audit_json() {
    let cfg = small(Subcommand::Coupling);
    let d = tempfile::tempdir().unwrap();
    run(&cfg, 2, d.path()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "coupling_audit.json")).unwrap();
    assert!(v["manifest_sha256"].is_string());
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 5);
    for r in recs {
        for k in ["n", "coupled", "mean_abs_V", "se", "coupling_cost", "w1_bound", "fourier_l1", "ks_v1", "ordering_chain"] {
            assert!(r.get(k).is_some(), "missing {k}");
        }
        if r["n"].as_u64().unwrap() < 4 {
            assert_eq!(r["coupled"], false);
            assert!(r["ordering_chain"].is_null());
        } else {
            assert_eq!(r["coupled"], true);
        }
    }
}

#[test]
fn critical_outputs() {
    let cfg = RunConfig { n_primes: 10_000, ..small(Subcommand::Critical) };
    let d = tempfile::tempdir().unwrap();
    run(&cfg, 1, d.path()).unwrap();
    let (h, rows) = csv_rows(d.path(), "critical_js1.csv");
    assert_eq!(h[0], "N");
    let ns: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, vec![100, 1000, 10_000]);
    let (_, rows) = csv_rows(d.path(), "critical_reference.csv");
    assert_eq!(rows.len(), 256);
    assert!(read(d.path(), "critical_summary.txt").contains("offdiag_01 decreasing in N"));
}

#[test]
fn chaos_outputs_and_warnings() {
    let cfg = RunConfig { beta: 1.6, q_list: vec![1.0, 2.0], n_samples: 200, ..small(Subcommand::Chaos) };
    let d = tempfile::tempdir().unwrap();
    run(&cfg, 2, d.path()).unwrap();
    let summary = read(d.path(), "chaos_summary.txt");
    assert!(summary.contains("second moment does not exist"));
    let (h, rows) = csv_rows(d.path(), "chaos_moments.csv");
    assert!(h.contains(&"moment".to_string()) && h.contains(&"oracle".to_string()));
    // above sqrt(2) there is no second-moment oracle
    assert!(rows.iter().all(|r| r[6].is_empty()));

    let cfg = RunConfig { beta: 0.5, q_list: vec![1.0, 2.0], r_list: vec![0.5, 0.25, 0.125, 0.0625], ..cfg };
    let d = tempfile::tempdir().unwrap();
    run(&cfg, 2, d.path()).unwrap();
    let (_, rows) = csv_rows(d.path(), "chaos_moments.csv");
    for r in &rows {
        let q: f64 = r[2].parse().unwrap();
        let r0: f64 = r[3].parse().unwrap();
        assert_eq!(r[6].is_empty(), q != 2.0 || r0 > 0.25);
    }
    let (_, fits) = csv_rows(d.path(), "chaos_scaling.csv");
    let q1 = fits.iter().find(|r| r[0] == "1.0").unwrap();
    let (slope, se): (f64, f64) = (q1[1].parse().unwrap(), q1[2].parse().unwrap());
    assert!((slope - 1.0).abs() <= 3.0 * se.max(1e-3), "slope {slope} se {se}");
}
