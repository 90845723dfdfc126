//! The final angular coordinate φ_{p-1}.
//!
//! Given the recurrence values `a = a_{p-1}`, `b = b_{p-1}` and the last two
//! eigenvalues `λ_{p-1}`, `λ_p`, the conditional density of the angle is
//!
//! ```text
//! f(φ) = (1/2π) [1 + 2 (c1/c2) cos 2φ],   c1 = b(λ_{p-1} - λ_p)/4,
//!                                         c2 = a + b(λ_{p-1} + λ_p)/2
//! ```
//!
//! which is symmetric under φ ↦ -φ and φ ↦ π ± φ. We invert its CDF on
//! `[0, π/2]` and pick one of the four images uniformly.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-13;

/// Below this `|c1| / c2` the angle is taken as uniform.
const SYMMETRIC_RATIO: f64 = 1e-14;

/// Coefficients `(c1, c2)` of the angular CDF.
pub fn angle_coefficients(a: f64, b: f64, lambda_pm1: f64, lambda_p: f64) -> (f64, f64) {
    (0.25 * b * (lambda_pm1 - lambda_p), a + 0.5 * b * (lambda_pm1 + lambda_p))
}

/// `F(φ) = (1/2π) [φ + (c1/c2) sin 2φ]`, the angular CDF from 0.
pub fn angle_cdf(phi: f64, a: f64, b: f64, lambda_pm1: f64, lambda_p: f64) -> f64 {
    let (c1, c2) = angle_coefficients(a, b, lambda_pm1, lambda_p);
    (phi + c1 * (2.0 * phi).sin() / c2) / TAU
}

/// Solve `F(φ*) = U/4` for `φ* ∈ [0, π/2]` by bisection.
pub fn solve_phi_star(a: f64, b: f64, lambda_pm1: f64, lambda_p: f64, u: f64) -> Result<f64> {
    let (c1, c2) = angle_coefficients(a, b, lambda_pm1, lambda_p);
    if !(c2 > 0.0) {
        return Err(Error::DegenerateAngle(c2));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    let ratio = c1 / c2;
    if ratio.abs() < SYMMETRIC_RATIO {
        return Ok(FRAC_PI_2 * u);
    }

    // 2π F(φ) = φ + ratio·sin 2φ, so the target is 2π · U/4.
    let target = FRAC_PI_2 * u;
    let g = |phi: f64| phi + ratio * (2.0 * phi).sin();
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Map `φ* ∈ [0, π/2]` to one of `{φ*, 2π - φ*, π + φ*, π - φ*}` using two
/// fair signs (half-turn first, then reflection).
pub fn randomize_quadrant(phi_star: f64, rng: &mut RngStream) -> f64 {
    let half_turn = rng.draw_sign() > 0.0;
    let reflect = rng.draw_sign() < 0.0;
    match (half_turn, reflect) {
        (false, false) => phi_star,
        (false, true) if phi_star == 0.0 => 0.0,
        (false, true) => TAU - phi_star,
        (true, false) => PI + phi_star,
        (true, true) => PI - phi_star,
    }
}
