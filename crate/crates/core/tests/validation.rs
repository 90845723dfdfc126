mod common;

use axial::validation::{
    ks_statistic, ks_threshold, rejection_sample_with_stats, second_moment_closed_form, validate_all,
    MarginalT1Density,
};
use axial::{ingest_matrix, RngStream};

#[test]
fn oracle_identity_accepts_everything() {
    let density = common::density(&common::identity(3));
    let out = rejection_sample_with_stats(&density, 10_000, 1).unwrap();
    assert_eq!(out.attempts, 10_000);
    assert!(out.batch.max_norm_error() < 1e-12);
}

#[test]
fn oracle_acceptance_rate() {
    let density = common::density(&common::diag(&[3.0, 2.0, 1.0]));
    let out = rejection_sample_with_stats(&density, 100_000, 2).unwrap();
    let rate = out.acceptance_rate();
    assert!((rate - 6.0 / 9.0).abs() < 0.005, "rate {rate}");
}

#[test]
fn closed_form_moments() {
    for p in [2, 3, 7] {
        let m = second_moment_closed_form(&common::density(&common::identity(p)));
        for i in 0..p {
            for j in 0..p {
                let expected = if i == j { 1.0 / p as f64 } else { 0.0 };
                assert!((m[i * p + j] - expected).abs() < 1e-15);
            }
        }
    }
    let m = second_moment_closed_form(&common::density(&common::diag(&[1.0, 0.0, 0.0])));
    let expected = [0.6, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.2];
    for (a, b) in m.iter().zip(expected) {
        assert!((a - b).abs() < 1e-15);
    }
    for (name, rows) in common::test_matrices() {
        let p = rows.len();
        let m = second_moment_closed_form(&common::density(&rows));
        let trace: f64 = (0..p).map(|i| m[i * p + i]).sum();
        assert!((trace - 1.0).abs() < 1e-12, "{name}");
        for i in 0..p {
            for j in 0..p {
                assert!((m[i * p + j] - m[j * p + i]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn ks_on_uniform_draws() {
    let n = 100_000;
    let mut rng = RngStream::new(3, 0);
    let u: Vec<f64> = (0..n).map(|_| rng.uniform01()).collect();
    assert!(ks_statistic(&u, |x| x) < ks_threshold(n));
}

#[test]
fn marginal_integrates_to_one() {
    for p in 3..=12 {
        let lambda: Vec<f64> = (1..=p).rev().map(|v| v as f64).collect();
        let m = MarginalT1Density::new(&lambda).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-8, "p = {p}: {}", m.total_mass());
    }
}

fn assert_all_pass(rows: &[Vec<f64>], seed: u64) {
    let a = ingest_matrix(rows).unwrap();
    let reports = validate_all(&a, 100_000, seed).unwrap();
    assert_eq!(reports.len(), 6);
    for r in &reports {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.n, 100_000);
        assert_eq!(r.seed, seed);
    }
}

#[test]
fn suite_identity() {
    assert_all_pass(&common::identity(3), 11);
}

#[test]
fn suite_large_gap() {
    assert_all_pass(&common::diag(&[100.0, 1.0, 1.0]), 12);
}

#[test]
fn suite_zero_eigenvalue() {
    assert_all_pass(&common::diag(&[2.0, 1.0, 0.0]), 13);
}

#[test]
fn suite_two_dimensional() {
    let a = ingest_matrix(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let reports = validate_all(&a, 50_000, 14).unwrap();
    assert!(reports.iter().any(|r| r.name == "angle_marginal_ks"));
    assert!(reports.iter().all(|r| r.pass), "{reports:?}");
}

#[test]
fn report_serializes_as_json_line() {
    let a = ingest_matrix(&common::identity(2)).unwrap();
    let report = &validate_all(&a, 1000, 15).unwrap()[0];
    let line = serde_json::to_string(report).unwrap();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    for key in ["name", "statistic", "threshold", "pass", "n", "seed"] {
        assert!(v.get(key).is_some(), "{key} missing in {line}");
    }
}
