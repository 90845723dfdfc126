//! Input validation and the symmetric eigendecomposition `A = R Λ Rᵀ`.
//!
//! Matrices are stored row-major in a flat `Vec<f64>`. The eigensolver is a
//! cyclic Jacobi scheme with a fixed sweep order, so identical input bits
//! always produce identical output bits.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Eigenvalues in `[-PSD_EPSILON * max(1, λ_max), 0)` are clamped to zero.
pub const PSD_EPSILON: f64 = 1e-10;

/// Relative asymmetry above which an input is rejected instead of symmetrized.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

const MAX_SWEEPS: usize = 100;

/// Grid used when snapping a scale-normalized matrix (2^-40).
const CANONICAL_GRID: f64 = 1099511627776.0;

/// A symmetric `p × p` matrix accepted at ingest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricSPDMatrix {
    dim: usize,
    entries: Vec<f64>,
    asymmetry: f64,
}

impl SymmetricSPDMatrix {
    pub(crate) fn from_reconstruction(dim: usize, entries: Vec<f64>) -> Self {
        SymmetricSPDMatrix { dim, entries, asymmetry: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Half the largest |A - Aᵀ| entry of the raw input.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.entries
            .chunks_exact(self.dim)
            .zip(x)
            .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, xj)| a * xj).sum::<f64>())
            .sum()
    }

    /// Scale-free representative of this matrix: divided by `max|A|` and
    /// snapped to a 2^-40 grid. Matrices that differ only by a positive
    /// factor (including the rounding that factor introduces) map to the same
    /// bits, which makes sampling bit-identical under `A -> cA`.
    pub fn canonical(&self) -> SymmetricSPDMatrix {
        let m = self.max_abs();
        let entries = if m > 0.0 {
            self.entries
                .iter()
                .map(|v| (v / m * CANONICAL_GRID).round() / CANONICAL_GRID)
                .collect()
        } else {
            self.entries.clone()
        };
        SymmetricSPDMatrix { dim: self.dim, entries, asymmetry: 0.0 }
    }

    /// SHA-256 over the dimension and the little-endian entry bytes.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim as u64).to_le_bytes());
        for v in &self.entries {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Validate and symmetrize a raw square matrix given as rows.
pub fn ingest_matrix(raw: &[Vec<f64>]) -> Result<SymmetricSPDMatrix> {
    let p = raw.len();
    for (row, r) in raw.iter().enumerate() {
        if r.len() != p {
            return Err(Error::NonSquare { row, len: r.len(), expected: p });
        }
    }
    if p < 2 {
        return Err(Error::DimensionTooSmall(p));
    }
    for (row, r) in raw.iter().enumerate() {
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }

    let mut entries = vec![0.0; p * p];
    let mut delta = 0.0_f64;
    let mut max_abs = 0.0_f64;
    for i in 0..p {
        for j in 0..p {
            let (aij, aji) = (raw[i][j], raw[j][i]);
            max_abs = max_abs.max(aij.abs());
            delta = delta.max((aij - aji).abs() / 2.0);
            entries[i * p + j] = if i == j { aij } else { (aij + aji) / 2.0 };
        }
    }
    let tolerance = ASYMMETRY_TOLERANCE * max_abs;
    if delta > tolerance {
        return Err(Error::AsymmetryTooLarge { delta, tolerance });
    }
    Ok(SymmetricSPDMatrix { dim: p, entries, asymmetry: delta })
}

/// Orthogonal eigenvectors (columns of `rotation`) and eigenvalues in
/// descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    dim: usize,
    rotation: Vec<f64>,
    eigenvalues: Vec<f64>,
    suffix_sums: Vec<f64>,
}

impl SpectralDecomposition {
    /// Build a decomposition from a known rotation (row-major) and spectrum.
    ///
    /// The rotation must be orthogonal to 1e-12 per entry and the eigenvalues
    /// nonnegative with a positive sum. Eigenvalues are used in the given
    /// order; the columns of `rotation` are the matching eigenvectors.
    pub fn from_parts(rotation: Vec<f64>, eigenvalues: Vec<f64>) -> Result<Self> {
        let p = eigenvalues.len();
        if p < 2 {
            return Err(Error::DimensionTooSmall(p));
        }
        if rotation.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, got: rotation.len() });
        }
        if let Some(pos) = rotation.iter().chain(&eigenvalues).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / p, col: pos % p });
        }
        if let Some(&neg) = eigenvalues.iter().find(|&&l| l < 0.0) {
            return Err(Error::NotPositiveSemiDefinite { eigenvalue: neg, bound: 0.0 });
        }
        let decomposition = Self::assemble(p, rotation, eigenvalues);
        let dev = decomposition.orthogonality_error();
        if dev > 1e-12 {
            return Err(Error::NotOrthogonal(dev));
        }
        let trace = decomposition.trace();
        if trace <= 0.0 {
            return Err(Error::ZeroTrace(trace));
        }
        Ok(decomposition)
    }

    fn assemble(dim: usize, rotation: Vec<f64>, eigenvalues: Vec<f64>) -> Self {
        let mut suffix_sums = vec![0.0; dim];
        let mut acc = 0.0;
        for j in (0..dim).rev() {
            acc += eigenvalues[j];
            suffix_sums[j] = acc;
        }
        SpectralDecomposition { dim, rotation, eigenvalues, suffix_sums }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `R`; column `k` is the eigenvector of `eigenvalues()[k]`.
    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    #[inline]
    pub fn rotation_entry(&self, i: usize, k: usize) -> f64 {
        self.rotation[i * self.dim + k]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `suffix_sums()[j] = Σ_{k ≥ j} λ_k` (0-based).
    pub fn suffix_sums(&self) -> &[f64] {
        &self.suffix_sums
    }

    pub fn trace(&self) -> f64 {
        self.suffix_sums[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l))
    }

    /// `x = R u`.
    pub fn rotate(&self, u: &[f64], x: &mut [f64]) {
        for (xi, row) in x.iter_mut().zip(self.rotation.chunks_exact(self.dim)) {
            *xi = row.iter().zip(u).map(|(r, v)| r * v).sum();
        }
    }

    /// `R Λ Rᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v: f64 = (0..p)
                    .map(|k| self.rotation_entry(i, k) * self.eigenvalues[k] * self.rotation_entry(j, k))
                    .sum();
                out[i * p + j] = v;
                out[j * p + i] = v;
            }
        }
        out
    }

    /// `max |RᵀR - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..p {
            for b in a..p {
                let dot: f64 = (0..p).map(|i| self.rotation_entry(i, a) * self.rotation_entry(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `max |R Λ Rᵀ - A|`.
    pub fn reconstruction_error(&self, a: &SymmetricSPDMatrix) -> f64 {
        self.reconstruct()
            .iter()
            .zip(a.entries())
            .fold(0.0_f64, |m, (r, v)| m.max((r - v).abs()))
    }
}

/// Eigendecomposition by cyclic Jacobi rotations.
pub fn eigen_decompose(a: &SymmetricSPDMatrix) -> Result<SpectralDecomposition> {
    let p = a.dim();
    let (values, vectors) = jacobi(p, a.entries().to_vec())?;

    let mut order: Vec<usize> = (0..p).collect();
    // Descending; ties broken by index so the permutation is deterministic.
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let lambda_max = values[order[0]];
    let bound = -PSD_EPSILON * lambda_max.max(1.0);
    let mut eigenvalues = Vec::with_capacity(p);
    let mut rotation = vec![0.0; p * p];
    for (col, &k) in order.iter().enumerate() {
        let l = values[k];
        if l < bound {
            return Err(Error::NotPositiveSemiDefinite { eigenvalue: l, bound });
        }
        eigenvalues.push(l.max(0.0));
        for i in 0..p {
            rotation[i * p + col] = vectors[i * p + k];
        }
    }

    let decomposition = SpectralDecomposition::assemble(p, rotation, eigenvalues);
    if decomposition.trace() <= 0.0 {
        return Err(Error::ZeroTrace(decomposition.trace()));
    }
    Ok(decomposition)
}

/// Returns (eigenvalues, row-major eigenvector matrix with vectors in columns).
fn jacobi(n: usize, mut a: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].abs())
            .sum();
        if off == 0.0 {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((values, v));
        }

        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                // Off-diagonal entry already below the precision of both
                // diagonal entries: drop it.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }

                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 { -t } else { t }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp - s * (vkq + tau * vkp);
                    v[k * n + q] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}
