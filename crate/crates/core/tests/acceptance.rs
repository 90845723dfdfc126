//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test --test acceptance`.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use axial::angle::solve_phi_star;
use axial::validation::{
    beta_cdf, empirical_second_moment, ks_statistic, ks_threshold, ks_two_sample, ks_two_sample_threshold,
    max_abs_difference, quadratic_form_values, rejection_sample, second_moment_closed_form, uniform_sphere_sample,
    MarginalT1Density,
};
use axial::{eigen_decompose, ingest_matrix, AxialDensity, RngStream};

const SEED: u64 = 20_130_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit_norm() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for (_, rows) in common::test_matrices() {
        worst = worst.max(common::density(&rows).sample(100_000, SEED).unwrap().max_norm_error());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-10 && secs < 10.0, format!("max |‖x‖-1| = {worst:.3e}, {secs:.2} s"))
}

fn uniform_reduction() -> Outcome {
    let n = 100_000;
    let mut worst = 0.0_f64;
    let mut pass = true;
    for p in [2, 3, 5, 10] {
        let batch = common::density(&common::identity(p)).sample(n, SEED + p as u64).unwrap();
        for i in 0..p {
            let sq: Vec<f64> = batch.rows().map(|x| x[i] * x[i]).collect();
            let d = ks_statistic(&sq, |s| beta_cdf(s, 0.5, (p as f64 - 1.0) / 2.0));
            worst = worst.max(d);
            pass &= d < ks_threshold(n);
        }
    }
    outcome(pass, format!("max D = {worst:.5}, threshold {:.5}", ks_threshold(n)))
}

fn oracle_equivalence() -> Outcome {
    let n = 100_000;
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut pass = true;
    for (_, rows) in common::test_matrices() {
        let density = common::density(&rows);
        let exact = density.sample(n, SEED).unwrap();
        let oracle = rejection_sample(&density, n, SEED).unwrap();
        let d = ks_two_sample(&quadratic_form_values(&density, &exact), &quadratic_form_values(&density, &oracle));
        worst = worst.max(d);
        pass &= d < ks_two_sample_threshold(n, n);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        pass && secs < 30.0,
        format!("max D = {worst:.5}, threshold {:.5}, {secs:.2} s", ks_two_sample_threshold(n, n)),
    )
}

fn t1_marginal() -> Outcome {
    let n = 100_000;
    let mut worst = 0.0_f64;
    let mut pass = true;
    for p in [3, 5, 10] {
        let lambda: Vec<f64> = (1..=p).rev().map(|v| v as f64).collect();
        let density = common::density(&common::diag(&lambda));
        let marginal = MarginalT1Density::new(&lambda).unwrap();
        let (_, traces) = density.sample_with_traces(n, SEED + p as u64).unwrap();
        let t1: Vec<f64> = traces.iter().map(|tr| tr.t[0]).collect();
        let d = ks_statistic(&t1, |t| marginal.cdf(t));
        worst = worst.max(d);
        pass &= d < ks_threshold(n);
    }
    outcome(pass, format!("max D = {worst:.5}, threshold {:.5}", ks_threshold(n)))
}

fn second_moments() -> Outcome {
    let n = 1_000_000;
    let start = Instant::now();
    let (mut oracle_worst, mut exact_worst) = (0.0_f64, 0.0_f64);
    for (_, rows) in common::test_matrices() {
        let density = common::density(&rows);
        let closed = second_moment_closed_form(&density);
        let oracle = rejection_sample(&density, n, SEED).unwrap();
        oracle_worst = oracle_worst.max(max_abs_difference(&empirical_second_moment(&oracle), &closed));
        let exact = density.sample(n, SEED).unwrap();
        exact_worst = exact_worst.max(max_abs_difference(&empirical_second_moment(&exact), &closed));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        oracle_worst < 0.005 && exact_worst < 0.005 && secs < 60.0,
        format!("closed form vs oracle {oracle_worst:.5}, vs sampler {exact_worst:.5}, {secs:.2} s"),
    )
}

fn density_normalization() -> Outcome {
    let n = 1_000_000;
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, rows) in common::test_matrices() {
        let density = common::density(&rows);
        let p = density.dim();
        let points = uniform_sphere_sample(p, n, SEED);
        let m = common::mean(points.chunks_exact(p).map(|x| density.density_value(x).unwrap()));
        range = (range.0.min(m), range.1.max(m));
    }
    outcome(range.0 >= 0.99 && range.1 <= 1.01, format!("means in [{:.5}, {:.5}]", range.0, range.1))
}

fn angle_solver() -> Outcome {
    let mut rng = RngStream::new(SEED, 7);
    let mut worst_residual = 0.0_f64;
    let mut monotone = true;
    for _ in 0..10_000 {
        let a = 10.0 * rng.uniform01();
        let b = rng.uniform01();
        let l1 = 10.0 * rng.uniform01();
        let l2 = 10.0 * rng.uniform01();
        let u = rng.uniform01();
        let c2 = a + 0.5 * b * (l1 + l2);
        if c2 <= 0.0 {
            continue;
        }
        let ratio = 0.25 * b * (l1 - l2) / c2;
        let f = |phi: f64| (phi + ratio * (2.0 * phi).sin()) / (2.0 * PI);
        let phi = solve_phi_star(a, b, l1, l2, u).unwrap();
        worst_residual = worst_residual.max((f(phi) - u / 4.0).abs());
        let grid: Vec<f64> = (0..1000).map(|k| f(FRAC_PI_2 * k as f64 / 999.0)).collect();
        monotone &= grid.windows(2).all(|w| w[1] >= w[0]);
    }
    outcome(
        worst_residual < 1e-10 && monotone,
        format!("max residual {worst_residual:.3e}, monotone {monotone}"),
    )
}

fn spectral() -> Outcome {
    let mut rng = RngStream::new(SEED, 8);
    let (mut worst_rec, mut worst_orth) = (0.0_f64, 0.0_f64);
    let mut pass = true;
    for k in 0..100 {
        let p = 2 + (rng.uniform01() * 49.0) as usize;
        let rows = common::random_spd(p, SEED + k, 1e-3);
        let a = ingest_matrix(&rows).unwrap();
        let dec = eigen_decompose(&a).unwrap();
        let r = dec.rotation();
        let lambda = dec.eigenvalues();
        let mut rec = 0.0_f64;
        let mut orth = 0.0_f64;
        let mut norm = 0.0_f64;
        for i in 0..p {
            for j in 0..p {
                let ra: f64 = (0..p).map(|m| r[i * p + m] * lambda[m] * r[j * p + m]).sum();
                rec = rec.max((ra - rows[i][j]).abs());
                norm = norm.max(rows[i][j].abs());
                let rr: f64 = (0..p).map(|m| r[m * p + i] * r[m * p + j]).sum();
                orth = orth.max((rr - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let scaled = rec / norm.max(1.0);
        worst_rec = worst_rec.max(scaled);
        worst_orth = worst_orth.max(orth);
        pass &= scaled < 1e-10 && orth < 1e-12;
    }
    outcome(pass, format!("max reconstruction {worst_rec:.3e} (relative), max orthogonality {worst_orth:.3e}"))
}

fn scale_and_determinism() -> Outcome {
    let mut pass = true;
    for (_, rows) in common::test_matrices() {
        let reference = common::density(&rows).sample(10_000, SEED).unwrap();
        for c in [1e-6, 1.0, 1e6] {
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
            let batch = common::density(&scaled).sample(10_000, SEED).unwrap();
            pass &= batch.vectors.iter().zip(&reference.vectors).all(|(a, b)| a.to_bits() == b.to_bits());
        }
        pass &= common::density(&rows).sample(10_000, SEED).unwrap() == reference;
    }
    outcome(pass, "7 matrices, c in {1e-6, 1, 1e6}, repeated runs".to_string())
}

fn throughput() -> Outcome {
    let density: AxialDensity = common::density(&common::random_spd(10, 2013, 0.1));
    let n = 500_000;
    density.sample_sequential(10_000, 1).unwrap();
    let start = Instant::now();
    let sequential = density.sample_sequential(n, SEED).unwrap();
    let rate = n as f64 / start.elapsed().as_secs_f64();
    let identical = density.sample(n, SEED).unwrap() == sequential;
    outcome(rate >= 1e5 && identical, format!("{rate:.0} draws/s single thread, parallel identical {identical}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("unit norm", unit_norm),
        ("uniform reduction", uniform_reduction),
        ("oracle equivalence", oracle_equivalence),
        ("t1 marginal", t1_marginal),
        ("second moments", second_moments),
        ("density normalization", density_normalization),
        ("angle solver", angle_solver),
        ("spectral decomposition", spectral),
        ("scale and determinism", scale_and_determinism),
        ("throughput", throughput),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.pass);
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
