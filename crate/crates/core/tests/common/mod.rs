#![allow(dead_code)]

use axial::{ingest_matrix, AxialDensity, RngStream};

pub fn diag(values: &[f64]) -> Vec<Vec<f64>> {
    let p = values.len();
    (0..p).map(|i| (0..p).map(|j| if i == j { values[i] } else { 0.0 }).collect()).collect()
}

pub fn identity(p: usize) -> Vec<Vec<f64>> {
    diag(&vec![1.0; p])
}

/// `MᵀM + ridge·I` with standard normal `M`.
pub fn random_spd(p: usize, seed: u64, ridge: f64) -> Vec<Vec<f64>> {
    let mut rng = RngStream::new(seed, 0);
    let m: Vec<f64> = (0..p * p).map(|_| rng.standard_normal()).collect();
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let v: f64 = (0..p).map(|k| m[k * p + i] * m[k * p + j]).sum();
                    v + if i == j { ridge } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Row-major orthogonal matrix from Gram–Schmidt on Gaussian columns.
pub fn random_orthogonal(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 1);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    while cols.len() < p {
        let mut v: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            cols.push(v);
        }
    }
    let mut q = vec![0.0; p * p];
    for (k, c) in cols.iter().enumerate() {
        for i in 0..p {
            q[i * p + k] = c[i];
        }
    }
    q
}

pub fn matmul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            out[i * p + j] = (0..p).map(|k| a[i * p + k] * b[k * p + j]).sum();
        }
    }
    out
}

/// The fixed test-matrix suite.
pub fn test_matrices() -> Vec<(&'static str, Vec<Vec<f64>>)> {
    vec![
        ("I2", identity(2)),
        ("I3", identity(3)),
        ("I10", identity(10)),
        ("diag(3,2,1)", diag(&[3.0, 2.0, 1.0])),
        ("diag(100,1,1)", diag(&[100.0, 1.0, 1.0])),
        ("diag(2,1,0)", diag(&[2.0, 1.0, 0.0])),
        ("random SPD p=7", random_spd(7, 2013, 0.1)),
    ]
}

pub fn density(rows: &[Vec<f64>]) -> AxialDensity {
    AxialDensity::from_matrix(&ingest_matrix(rows).unwrap()).unwrap()
}

pub fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}
