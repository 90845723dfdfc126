//! Exact sampler for `f(x) = (p / tr A) xᵀAx` on `S^{p-1}`.
//!
//! Sampling runs in the eigenbasis of `A`. The point `u` is parameterised by
//! `t_1..t_{p-2} ∈ [-1, 1]` and an angle `φ_{p-1}`:
//!
//! ```text
//! u_j     = √b_j · t_j          (j ≤ p-2)
//! u_{p-1} = √b_{p-1} · cos φ
//! u_p     = √b_{p-1} · sin φ
//! ```
//!
//! with `b_1 = 1`, `b_{j+1} = b_j (1 - t_j²)` and `a_1 = 0`,
//! `a_{j+1} = a_j + λ_j b_j t_j²`. Each `t_j²` given its predecessors is a
//! three-component Beta mixture; the angle is drawn by CDF inversion. The
//! result is rotated back with `x = R u`.
//!
//! Draw `i` of a batch reads only substream `i` of the seed, so batches are
//! identical whether generated sequentially or in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::angle::{randomize_quadrant, solve_phi_star};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectral::{eigen_decompose, SpectralDecomposition, SymmetricSPDMatrix};

/// Draws per parallel work item.
const CHUNK: usize = 512;

/// Tolerance on `‖x‖ - 1` accepted by [`AxialDensity::density_value`].
pub const SPHERE_TOLERANCE: f64 = 1e-8;

/// The distribution `f(x) ∝ xᵀAx` together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct AxialDensity {
    matrix: SymmetricSPDMatrix,
    decomposition: SpectralDecomposition,
    input_trace: f64,
    fingerprint: String,
}

impl AxialDensity {
    /// Decompose the scale-canonical form of `a`. The law of `x` does not
    /// depend on the scale of `A`, and working with the canonical form makes
    /// `A` and `cA` sample identically bit for bit.
    pub fn from_matrix(a: &SymmetricSPDMatrix) -> Result<Self> {
        let input_trace = a.trace();
        if !(input_trace > 0.0) {
            return Err(Error::ZeroTrace(input_trace));
        }
        let matrix = a.canonical();
        let decomposition = eigen_decompose(&matrix)?;
        Ok(AxialDensity { matrix, decomposition, input_trace, fingerprint: a.fingerprint() })
    }

    /// Use a known decomposition directly, bypassing the eigensolver.
    pub fn from_decomposition(decomposition: SpectralDecomposition) -> Result<Self> {
        let matrix = SymmetricSPDMatrix::from_reconstruction(decomposition.dim(), decomposition.reconstruct());
        let input_trace = decomposition.trace();
        if !(input_trace > 0.0) {
            return Err(Error::ZeroTrace(input_trace));
        }
        let fingerprint = matrix.fingerprint();
        Ok(AxialDensity { matrix, decomposition, input_trace, fingerprint })
    }

    pub fn dim(&self) -> usize {
        self.decomposition.dim()
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// The matrix the sampler works with (scale-canonical for
    /// [`from_matrix`](Self::from_matrix)).
    pub fn matrix(&self) -> &SymmetricSPDMatrix {
        &self.matrix
    }

    /// Concentration κ = p / tr(A) of the input matrix.
    pub fn kappa(&self) -> f64 {
        self.dim() as f64 / self.input_trace
    }

    /// Normalizing constant p / tr(A); equal to κ.
    pub fn norm_const(&self) -> f64 {
        self.kappa()
    }

    /// Trace of the matrix as given (before canonical scaling).
    pub fn input_trace(&self) -> f64 {
        self.input_trace
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// `(p / tr A) xᵀAx`, the density relative to the uniform probability
    /// measure on the sphere.
    pub fn density_value(&self, x: &[f64]) -> Result<f64> {
        let p = self.dim();
        if x.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: x.len() });
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() < SPHERE_TOLERANCE) {
            return Err(Error::NotOnSphere(norm));
        }
        Ok(p as f64 * self.matrix.quadratic_form(x) / self.matrix.trace())
    }

    /// `n` draws using the rayon pool of the caller.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        let mut batch = self.empty_batch(n, seed)?;
        let p = self.dim();
        batch
            .vectors
            .par_chunks_mut(p * CHUNK)
            .enumerate()
            .try_for_each(|(c, chunk)| self.fill_chunk(chunk, (c * CHUNK) as u64, seed))?;
        Ok(batch)
    }

    /// Same output as [`sample`](Self::sample) on the current thread only.
    pub fn sample_sequential(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        let mut batch = self.empty_batch(n, seed)?;
        self.fill_chunk(&mut batch.vectors, 0, seed)?;
        Ok(batch)
    }

    /// Like [`sample`](Self::sample), also returning every draw's internals.
    pub fn sample_with_traces(&self, n: usize, seed: u64) -> Result<(SampleBatch, Vec<DrawTrace>)> {
        let mut batch = self.empty_batch(n, seed)?;
        let p = self.dim();
        let traces = batch
            .vectors
            .par_chunks_mut(p)
            .enumerate()
            .map(|(i, row)| {
                let trace = self.draw_traced(&mut RngStream::new(seed, i as u64))?;
                row.copy_from_slice(&trace.x);
                Ok(trace)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((batch, traces))
    }

    fn empty_batch(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let p = self.dim();
        Ok(SampleBatch {
            dim: p,
            count: n,
            vectors: vec![0.0; n * p],
            seed,
            matrix_fingerprint: self.fingerprint.clone(),
        })
    }

    fn fill_chunk(&self, chunk: &mut [f64], first_index: u64, seed: u64) -> Result<()> {
        let p = self.dim();
        let mut scratch = Scratch::new(p);
        for (k, x) in chunk.chunks_exact_mut(p).enumerate() {
            let mut rng = RngStream::new(seed, first_index + k as u64);
            self.draw_into(&mut rng, &mut scratch, x)?;
        }
        Ok(())
    }

    /// One draw written into `x`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        let p = self.dim();
        let mut x = vec![0.0; p];
        self.draw_into(rng, &mut Scratch::new(p), &mut x)?;
        Ok(x)
    }

    fn draw_into(&self, rng: &mut RngStream, scratch: &mut Scratch, x: &mut [f64]) -> Result<()> {
        let p = self.dim();
        let eigenvalues = self.decomposition.eigenvalues();
        let suffix = self.decomposition.suffix_sums();

        let mut state = RecurrenceState::initial();
        for j in 1..=p.saturating_sub(2) {
            let step = draw_t(&state, eigenvalues, suffix, rng)?;
            scratch.t[j - 1] = step.t;
            scratch.b[j - 1] = state.b;
            state = step.next;
        }
        scratch.b[p - 2] = state.b;

        let u_phi = rng.uniform01();
        let phi_star = solve_phi_star(state.a, state.b, eigenvalues[p - 2], eigenvalues[p - 1], u_phi)?;
        let phi = randomize_quadrant(phi_star, rng);

        fill_u(&scratch.t, phi, &scratch.b, &mut scratch.u);
        self.decomposition.rotate(&scratch.u, x);
        Ok(())
    }

    /// One draw with its full trace.
    pub fn draw_traced(&self, rng: &mut RngStream) -> Result<DrawTrace> {
        let p = self.dim();
        let eigenvalues = self.decomposition.eigenvalues();
        let suffix = self.decomposition.suffix_sums();
        let m = p - 2;

        let mut trace = DrawTrace {
            t: Vec::with_capacity(m),
            mixture_choice: Vec::with_capacity(m),
            beta_value: Vec::with_capacity(m),
            sign: Vec::with_capacity(m),
            a: Vec::with_capacity(p - 1),
            b: Vec::with_capacity(p - 1),
            u_phi: 0.0,
            phi_star: 0.0,
            phi: 0.0,
            u: vec![0.0; p],
            x: vec![0.0; p],
        };

        let mut state = RecurrenceState::initial();
        for _ in 1..=m {
            let step = draw_t(&state, eigenvalues, suffix, rng)?;
            trace.a.push(state.a);
            trace.b.push(state.b);
            trace.t.push(step.t);
            trace.mixture_choice.push(step.component);
            trace.beta_value.push(step.beta_value);
            trace.sign.push(step.sign);
            state = step.next;
        }
        trace.a.push(state.a);
        trace.b.push(state.b);

        trace.u_phi = rng.uniform01();
        trace.phi_star = solve_phi_star(state.a, state.b, eigenvalues[p - 2], eigenvalues[p - 1], trace.u_phi)?;
        trace.phi = randomize_quadrant(trace.phi_star, rng);

        fill_u(&trace.t, trace.phi, &trace.b, &mut trace.u);
        self.decomposition.rotate(&trace.u, &mut trace.x);
        Ok(trace)
    }
}

struct Scratch {
    t: Vec<f64>,
    b: Vec<f64>,
    u: Vec<f64>,
}

impl Scratch {
    fn new(p: usize) -> Self {
        Scratch { t: vec![0.0; p - 2], b: vec![0.0; p - 1], u: vec![0.0; p] }
    }
}

/// Running values `(j, a_j, b_j)` of the recurrences, `j` 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceState {
    pub j: usize,
    pub a: f64,
    pub b: f64,
}

impl RecurrenceState {
    /// `j = 1`, `a_1 = 0`, `b_1 = 1`.
    pub fn initial() -> Self {
        RecurrenceState { j: 1, a: 0.0, b: 1.0 }
    }

    /// Advance past `t_j`.
    pub fn advance(&self, lambda_j: f64, t: f64) -> Self {
        let t2 = t * t;
        RecurrenceState { j: self.j + 1, a: self.a + lambda_j * self.b * t2, b: self.b * (1.0 - t2) }
    }
}

/// Mixture weights `(π_{j1}, π_{j2}, π_{j3})` of the three Beta components
/// of `t_j²` given `t_1..t_{j-1}`:
///
/// ```text
/// π_{j1} ∝ a_j (p - j + 1)     Beta(1/2, (p-j)/2)
/// π_{j2} ∝ b_j λ_j             Beta(3/2, (p-j)/2)
/// π_{j3} ∝ b_j Σ_{k>j} λ_k     Beta(1/2, (p-j+2)/2)
/// ```
///
/// `eigenvalues` and `suffix_sums` are 0-based as stored in
/// [`SpectralDecomposition`].
pub fn mixture_weights(state: &RecurrenceState, eigenvalues: &[f64], suffix_sums: &[f64]) -> Result<[f64; 3]> {
    let p = eigenvalues.len();
    let j = state.j;
    if j == 0 || j + 2 > p || suffix_sums.len() != p {
        return Err(Error::InconsistentState(format!("j = {j} out of range for p = {p}")));
    }
    let w = [
        state.a * (p - j + 1) as f64,
        state.b * eigenvalues[j - 1],
        state.b * suffix_sums[j],
    ];
    let total = w[0] + w[1] + w[2];
    if !(total > 0.0) {
        return Err(Error::DegenerateState { j, a: state.a, b: state.b });
    }
    Ok([w[0] / total, w[1] / total, w[2] / total])
}

/// Beta shapes of the three mixture components at step `j` (1-based).
pub fn component_shapes(p: usize, j: usize) -> [(f64, f64); 3] {
    let half = (p - j) as f64 / 2.0;
    [(0.5, half), (1.5, half), (0.5, half + 1.0)]
}

/// Result of one conditional draw of `t_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStep {
    pub t: f64,
    /// Mixture component `X_j ∈ {1, 2, 3}`.
    pub component: u8,
    pub beta_value: f64,
    pub sign: i8,
    pub next: RecurrenceState,
}

/// Draw `t_j | t_1..t_{j-1}`. Consumes, in order: one uniform for the
/// component, the Beta variate, one sign.
pub fn draw_t(state: &RecurrenceState, eigenvalues: &[f64], suffix_sums: &[f64], rng: &mut RngStream) -> Result<TStep> {
    let weights = mixture_weights(state, eigenvalues, suffix_sums)?;
    let index = rng.draw_categorical(&weights)?;
    let (alpha, beta) = component_shapes(eigenvalues.len(), state.j)[index];
    let beta_value = rng.draw_beta(alpha, beta)?;
    let sign = rng.draw_sign();
    let t = sign * beta_value.sqrt();
    Ok(TStep {
        t,
        component: index as u8 + 1,
        beta_value,
        sign: sign as i8,
        next: state.advance(eigenvalues[state.j - 1], t),
    })
}

fn fill_u(t: &[f64], phi: f64, b: &[f64], u: &mut [f64]) {
    let m = t.len();
    for j in 0..m {
        u[j] = b[j].sqrt() * t[j];
    }
    let r = b[m].sqrt();
    u[m] = r * phi.cos();
    u[m + 1] = r * phi.sin();
}

/// Build `u` from `t_1..t_{p-2}`, the angle, and `b_1..b_{p-1}`.
pub fn assemble_u(t: &[f64], phi: f64, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != t.len() + 1 {
        return Err(Error::InconsistentState(format!("{} t values but {} b values", t.len(), b.len())));
    }
    if b[0] != 1.0 {
        return Err(Error::InconsistentState(format!("b_1 = {} != 1", b[0])));
    }
    for (j, (tj, pair)) in t.iter().zip(b.windows(2)).enumerate() {
        if !(tj.abs() <= 1.0) {
            return Err(Error::InconsistentState(format!("|t_{}| > 1", j + 1)));
        }
        let expected = pair[0] * (1.0 - tj * tj);
        if (pair[1] - expected).abs() > 1e-12 {
            return Err(Error::InconsistentState(format!("b_{} does not follow from t_{}", j + 2, j + 1)));
        }
    }
    let mut u = vec![0.0; t.len() + 2];
    fill_u(t, phi, b, &mut u);
    Ok(u)
}

/// Internals of one draw. Per-`j` lists have length `p - 2`; `a` and `b`
/// hold `a_1..a_{p-1}` and `b_1..b_{p-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrawTrace {
    pub t: Vec<f64>,
    pub mixture_choice: Vec<u8>,
    pub beta_value: Vec<f64>,
    pub sign: Vec<i8>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u_phi: f64,
    pub phi_star: f64,
    pub phi: f64,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
}

/// `n` unit vectors in ℝᵖ, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub dim: usize,
    pub count: usize,
    pub vectors: Vec<f64>,
    pub seed: u64,
    pub matrix_fingerprint: String,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// `max_i |‖x_i‖ - 1|`.
    pub fn max_norm_error(&self) -> f64 {
        self.rows()
            .map(|x| (x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
