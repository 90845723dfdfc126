//! Independent checks of the exact sampler: a rejection-sampling oracle,
//! closed-form moments and marginals, and Kolmogorov–Smirnov statistics.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};
use crate::sampler::{AxialDensity, SampleBatch};
use crate::spectral::SymmetricSPDMatrix;

/// Asymptotic one-sample KS coefficient at α ≈ 0.001.
pub const KS_COEFFICIENT: f64 = 1.95;

/// Attempts allowed per accepted oracle sample.
pub const MAX_ORACLE_ATTEMPTS: u64 = 10_000_000;

const ORACLE_TAG: u64 = 0x6f72_6163_6c65;
const SPHERE_TAG: u64 = 0x7370_6865_7265;

/// `1.95 / √n`.
pub fn ks_threshold(n: usize) -> f64 {
    KS_COEFFICIENT / (n as f64).sqrt()
}

/// `1.95 · √((n + m) / (n m))`.
pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFFICIENT * ((n + m) / (n * m)).sqrt()
}

/// One-sample KS distance `sup |F_n - F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

/// Two-sample KS distance between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Regularized incomplete beta `I_x(a, b)`, clamped to `x ∈ [0, 1]`.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    beta_reg(a, b, x.clamp(0.0, 1.0))
}

/// Oracle output with the number of proposals it took.
#[derive(Debug, Clone)]
pub struct OracleBatch {
    pub batch: SampleBatch,
    pub attempts: u64,
}

impl OracleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        self.batch.count as f64 / self.attempts as f64
    }
}

/// Rejection sampler for the same law: propose uniformly on the sphere and
/// accept with probability `xᵀAx / λ_max`.
pub fn rejection_sample(density: &AxialDensity, n: usize, seed: u64) -> Result<SampleBatch> {
    rejection_sample_with_stats(density, n, seed).map(|o| o.batch)
}

pub fn rejection_sample_with_stats(density: &AxialDensity, n: usize, seed: u64) -> Result<OracleBatch> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let p = density.dim();
    let matrix = density.matrix();
    let bound = density.decomposition().max_eigenvalue();
    if !(bound > 0.0) {
        return Err(Error::ZeroTrace(bound));
    }
    let key = derive_seed(seed, ORACLE_TAG);
    let mut vectors = vec![0.0; n * p];
    let attempts = vectors
        .par_chunks_mut(p)
        .enumerate()
        .map(|(i, x)| {
            let mut rng = RngStream::new(key, i as u64);
            for attempt in 1..=MAX_ORACLE_ATTEMPTS {
                rng.draw_uniform_sphere(x);
                if rng.uniform01() * bound < matrix.quadratic_form(x) {
                    return Ok(attempt);
                }
            }
            Err(Error::OracleStalled(MAX_ORACLE_ATTEMPTS))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(OracleBatch {
        batch: SampleBatch { dim: p, count: n, vectors, seed, matrix_fingerprint: density.fingerprint().to_owned() },
        attempts,
    })
}

/// `n` uniform points on the sphere from a stream family unrelated to the
/// sampler and the oracle.
pub fn uniform_sphere_sample(p: usize, n: usize, seed: u64) -> Vec<f64> {
    let key = derive_seed(seed, SPHERE_TAG);
    let mut out = vec![0.0; n * p];
    out.par_chunks_mut(p)
        .enumerate()
        .for_each(|(i, x)| RngStream::new(key, i as u64).draw_uniform_sphere(x));
    out
}

/// `E[x xᵀ] = R diag((tr Λ + 2λ_i) / ((p + 2) tr Λ)) Rᵀ`, row-major.
pub fn second_moment_closed_form(density: &AxialDensity) -> Vec<f64> {
    let d = density.decomposition();
    let p = d.dim();
    let tr = d.trace();
    let m: Vec<f64> = d.eigenvalues().iter().map(|l| (tr + 2.0 * l) / ((p + 2) as f64 * tr)).collect();
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            out[i * p + j] = (0..p).map(|k| d.rotation_entry(i, k) * m[k] * d.rotation_entry(j, k)).sum();
        }
    }
    out
}

/// Sample average of `x xᵀ`, row-major.
pub fn empirical_second_moment(batch: &SampleBatch) -> Vec<f64> {
    let p = batch.dim;
    let mut acc = batch
        .vectors
        .par_chunks(p)
        .fold(
            || vec![0.0; p * p],
            |mut acc, x| {
                for i in 0..p {
                    for j in 0..p {
                        acc[i * p + j] += x[i] * x[j];
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0.0; p * p], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
            a
        });
    let n = batch.count as f64;
    acc.iter_mut().for_each(|v| *v /= n);
    acc
}

pub fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Closed-form law of `t_1 = u_1` in the eigenbasis: a two-component Beta
/// mixture in `t_1²`, symmetric in sign.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalT1Density {
    p: usize,
    weights: (f64, f64),
    ln_norm: (f64, f64),
}

impl MarginalT1Density {
    /// `eigenvalues` in the order the sampler uses them; needs `p >= 3`.
    pub fn new(eigenvalues: &[f64]) -> Result<Self> {
        let p = eigenvalues.len();
        if p < 3 {
            return Err(Error::DimensionTooSmall(p));
        }
        let total: f64 = eigenvalues.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroTrace(total));
        }
        let first = eigenvalues[0] / total;
        let pf = p as f64;
        Ok(MarginalT1Density {
            p,
            weights: (first, 1.0 - first),
            ln_norm: (ln_beta(1.5, (pf - 1.0) / 2.0), ln_beta(0.5, (pf + 1.0) / 2.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// `(π_1, π_2)`.
    pub fn weights(&self) -> (f64, f64) {
        self.weights
    }

    /// Density of `t_1` on `[-1, 1]`.
    pub fn pdf(&self, t: f64) -> f64 {
        if t.abs() > 1.0 {
            return 0.0;
        }
        let pf = self.p as f64;
        let s = 1.0 - t * t;
        let first = t * t * s.powf((pf - 3.0) / 2.0) * (-self.ln_norm.0).exp();
        let second = s.powf((pf - 1.0) / 2.0) * (-self.ln_norm.1).exp();
        self.weights.0 * first + self.weights.1 * second
    }

    /// CDF of `t_1²`.
    pub fn cdf_squared(&self, s: f64) -> f64 {
        let pf = self.p as f64;
        self.weights.0 * beta_cdf(s, 1.5, (pf - 1.0) / 2.0) + self.weights.1 * beta_cdf(s, 0.5, (pf + 1.0) / 2.0)
    }

    /// CDF of the signed `t_1`.
    pub fn cdf(&self, t: f64) -> f64 {
        let g = self.cdf_squared(t * t);
        if t < 0.0 { 0.5 - 0.5 * g } else { 0.5 + 0.5 * g }
    }

    /// `∫_{-1}^{1} pdf` by adaptive Simpson quadrature.
    pub fn total_mass(&self) -> f64 {
        adaptive_simpson(&|t| self.pdf(t), -1.0, 1.0, 1e-12, 50)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)
}

/// Outcome of one check. `pass` holds iff `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
    pub seed: u64,
}

impl ValidationReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n: usize, seed: u64) -> Self {
        ValidationReport { name: name.into(), statistic, threshold, pass: statistic <= threshold, n, seed }
    }
}

/// `xᵀAx` for every row, rounded to a grid of `1e-9 λ_max`. Without the
/// rounding a flat spectrum (an atom at one value) turns the two-sample KS
/// statistic into a comparison of last-bit noise.
pub fn quadratic_form_values(density: &AxialDensity, batch: &SampleBatch) -> Vec<f64> {
    let matrix = density.matrix();
    let step = 1e-9 * density.decomposition().max_eigenvalue();
    batch.rows().map(|x| (matrix.quadratic_form(x) / step).round() * step).collect()
}

/// Run the full check suite on `a` with `n` draws per check.
pub fn validate_all(a: &SymmetricSPDMatrix, n: usize, seed: u64) -> Result<Vec<ValidationReport>> {
    validate_density(&AxialDensity::from_matrix(a)?, n, seed)
}

pub fn validate_density(density: &AxialDensity, n: usize, seed: u64) -> Result<Vec<ValidationReport>> {
    let p = density.dim();
    let (batch, traces) = density.sample_with_traces(n, seed)?;
    let mut reports = Vec::with_capacity(6);

    reports.push(ValidationReport::new("unit_norm", batch.max_norm_error(), 1e-10, n, seed));

    let eigenvalues = density.decomposition().eigenvalues();
    if p >= 3 {
        let marginal = MarginalT1Density::new(eigenvalues)?;
        let t1: Vec<f64> = traces.iter().map(|tr| tr.t[0]).collect();
        reports.push(ValidationReport::new(
            "t1_marginal_ks",
            ks_statistic(&t1, |t| marginal.cdf(t)),
            ks_threshold(n),
            n,
            seed,
        ));
    } else {
        // p = 2: the angle alone carries the law, f(φ) = (1 + k cos 2φ) / 2π.
        let k = (eigenvalues[0] - eigenvalues[1]) / (eigenvalues[0] + eigenvalues[1]);
        let phi: Vec<f64> = traces.iter().map(|tr| tr.phi).collect();
        reports.push(ValidationReport::new(
            "angle_marginal_ks",
            ks_statistic(&phi, |x| (x + 0.5 * k * (2.0 * x).sin()) / TAU),
            ks_threshold(n),
            n,
            seed,
        ));
    }

    let oracle = rejection_sample(density, n, seed)?;
    let s_exact = quadratic_form_values(density, &batch);
    let s_oracle = quadratic_form_values(density, &oracle);
    reports.push(ValidationReport::new(
        "oracle_quadratic_form_ks",
        ks_two_sample(&s_exact, &s_oracle),
        ks_two_sample_threshold(n, n),
        n,
        seed,
    ));

    let moment_error = max_abs_difference(&empirical_second_moment(&batch), &second_moment_closed_form(density));
    reports.push(ValidationReport::new("second_moment", moment_error, 5.0 / (n as f64).sqrt(), n, seed));

    let points = uniform_sphere_sample(p, n, seed);
    let values = points.chunks_exact(p).map(|x| density.density_value(x)).collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
    reports.push(ValidationReport::new(
        "density_normalization",
        (mean - 1.0).abs(),
        4.0 * (var / n as f64).sqrt() + 1e-12,
        n,
        seed,
    ));

    let v: Vec<f64> = (0..p).map(|i| (i + 1) as f64).collect();
    let sign_mean = batch
        .rows()
        .map(|x| {
            let dot: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
            if dot > 0.0 { 1.0 } else if dot < 0.0 { -1.0 } else { 0.0 }
        })
        .sum::<f64>()
        / n as f64;
    reports.push(ValidationReport::new("axial_symmetry_sign", sign_mean.abs(), 4.0 / (n as f64).sqrt(), n, seed));

    Ok(reports)
}
