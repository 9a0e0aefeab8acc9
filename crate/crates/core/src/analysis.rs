//! Closed-form analysis of the one-element RIS with a single interferer.
//!
//! With one reflecting element and one interferer the SINR reduces to
//!
//! `γ1(x) = (L' + M' cos(s + x)) / (N' + P' cos(t + x))`
//!
//! whose stationary values have a closed form. These expressions are used
//! as independent oracles for the iterative solvers: the gradient must
//! vanish at the recovered stationary phase, SDR bisection must flip
//! feasibility at the larger stationary value, and the gap formulas bound
//! the signal-alignment solution between the two.

use crate::{Cx, Error, Result};
use std::f64::consts::TAU;

/// Coefficients of the two-term cosine ratio.
///
/// In terms of the physical one-element quantities (signal reflected
/// channel a1, signal direct channel h, interferer reflected channel b1,
/// interferer direct channel g, powers P0/P1, noise c):
/// `num_offset = P0(|a1|²+|h|²)`, `num_amp = 2 P0 |a1||h|`,
/// `den_offset = P1(|b1|²+|g|²)+c`, `den_amp = 2 P1 |b1||g|`,
/// `num_phase = arg a1 - arg h`, `den_phase = arg b1 - arg g`.
#[derive(Debug, Clone, Copy)]
pub struct OneElementParams {
    /// L' ≥ M' by construction (AM-GM).
    pub num_offset: f64,
    pub num_amp: f64,
    /// N' ≥ P' + noise by construction.
    pub den_offset: f64,
    pub den_amp: f64,
    /// s, radians.
    pub num_phase: f64,
    /// t, radians.
    pub den_phase: f64,
    /// Additive noise floor inside `den_offset`, kept for validation.
    pub noise: f64,
}

impl OneElementParams {
    pub fn new(
        num_offset: f64,
        num_amp: f64,
        den_offset: f64,
        den_amp: f64,
        num_phase: f64,
        den_phase: f64,
        noise: f64,
    ) -> Result<Self> {
        if !(den_offset > 0.0) || noise < 0.0 || num_offset < 0.0 || num_amp < 0.0 || den_amp < 0.0
        {
            return Err(Error::InvalidInput(
                "one-element params need den_offset > 0 and non-negative amplitudes".into(),
            ));
        }
        if num_amp > num_offset + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "num_amp {num_amp} exceeds num_offset {num_offset}; violates |a|²+|h|² >= 2|a||h|"
            )));
        }
        if den_amp + noise > den_offset + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "den_amp {den_amp} + noise {noise} exceeds den_offset {den_offset}"
            )));
        }
        Ok(Self {
            num_offset,
            num_amp,
            den_offset,
            den_amp,
            num_phase,
            den_phase,
            noise,
        })
    }

    /// Builds the coefficients from the physical one-element quantities.
    pub fn from_physical(p0: f64, p1: f64, a1: Cx, h: Cx, b1: Cx, g: Cx, noise: f64) -> Result<Self> {
        if p0 < 0.0 || p1 < 0.0 || noise <= 0.0 {
            return Err(Error::InvalidInput(
                "powers must be non-negative and noise positive".into(),
            ));
        }
        Self::new(
            p0 * (a1.norm_sqr() + h.norm_sqr()),
            2.0 * p0 * a1.norm() * h.norm(),
            p1 * (b1.norm_sqr() + g.norm_sqr()) + noise,
            2.0 * p1 * b1.norm() * g.norm(),
            a1.arg() - h.arg(),
            b1.arg() - g.arg(),
            noise,
        )
    }
}

/// `γ1(x)`, the one-element SINR at RIS phase x.
pub fn one_element_sinr(params: &OneElementParams, x: f64) -> f64 {
    (params.num_offset + params.num_amp * (params.num_phase + x).cos())
        / (params.den_offset + params.den_amp * (params.den_phase + x).cos())
}

/// The two candidate SINR values at stationary points.
#[derive(Debug, Clone, Copy)]
pub struct StationaryPair {
    pub upper: f64,
    pub lower: f64,
    /// False when the analytic branch was invalid and a grid search was
    /// used instead.
    pub analytic: bool,
}

/// Closed-form stationary values of `γ1`.
///
/// Degenerate flat ratios return the constant twice. A numerically invalid
/// analytic branch (negative discriminant or a vanishing branch
/// denominator) falls back to an internal grid search and is flagged.
pub fn stationary_values(params: &OneElementParams) -> StationaryPair {
    let (l, m) = (params.num_offset, params.num_amp);
    let (n, p) = (params.den_offset, params.den_amp);
    let delta = params.num_phase - params.den_phase;

    if m == 0.0 && p == 0.0 {
        let v = l / n;
        return StationaryPair { upper: v, lower: v, analytic: true };
    }

    let c_big = (l * p).powi(2) + (m * n).powi(2) - 2.0 * l * m * n * p * delta.cos();
    if c_big <= 0.0 {
        // Only possible when both oscillating amplitudes vanish jointly;
        // the ratio is flat.
        let v = l / n;
        return StationaryPair { upper: v, lower: v, analytic: true };
    }
    let disc = c_big - (m * p * delta.sin()).powi(2);
    if disc < 0.0 {
        let (lower, upper) = grid_extrema(params, 200_001);
        return StationaryPair { upper, lower, analytic: false };
    }
    let base = p * (l * p - m * n * delta.cos());
    let root = n * disc.sqrt();
    let mut values = Vec::with_capacity(2);
    for denom in [base + root, base - root] {
        if denom != 0.0 {
            let v = l / n - c_big / (n * denom);
            if v.is_finite() {
                values.push(v);
            }
        }
    }
    match values.len() {
        2 => StationaryPair {
            upper: values[0].max(values[1]),
            lower: values[0].min(values[1]),
            analytic: true,
        },
        _ => {
            let (lower, upper) = grid_extrema(params, 200_001);
            StationaryPair { upper, lower, analytic: false }
        }
    }
}

/// Grid extrema of `γ1` over one period (fallback path).
fn grid_extrema(params: &OneElementParams, points: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..points {
        let x = TAU * i as f64 / points as f64;
        let v = one_element_sinr(params, x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Gap formulas of the unit-magnitude normalization
/// (|a1| = |b1| = |h| = P0 = P1 = 1, |g| = k):
/// `g1` is how far the SA solution sits below the higher stationary value,
/// `g2` how far above the lower one.
pub fn sa_gap(k: f64, delta: f64, noise: f64) -> (f64, f64) {
    let cd = delta.cos();
    let base = k * k + 2.0 * k * cd + 1.0 + noise;
    let g1 = 16.0 * k * k * delta.sin().powi(2)
        / (base * ((k + 1.0).powi(2) + noise) * ((k - 1.0).powi(2) + noise));
    let g2 = 4.0 / base;
    (g1, g2)
}
