//! Shared helpers for unit tests: synthetic channel instances with O(1)
//! SINR scale, so solver behavior can be exercised without the physical
//! pathloss magnitudes.

use crate::channel::{standard_complex_normal, ChannelSet, CsiErrorParams};
use crate::linkmetrics::{NoiseBudget, SinrContext};
use crate::{CMat, CVec, Cx, Zeta};
use rand::Rng;

pub(crate) fn random_unit_vector<R: Rng>(n: usize, r: &mut R) -> CVec {
    let mut u = CVec::from_fn(n, |_, _| standard_complex_normal(r));
    let norm = u.norm();
    u /= Cx::new(norm, 0.0);
    u
}

/// Synthetic context with CN(0,1) channels; σ_w² = N·N_R keeps the
/// optimized SINR around O(N/N_R), well inside the bisection interval.
pub(crate) fn random_context<R: Rng>(
    n_rx: usize,
    n_ris: usize,
    n_interferers: usize,
    zeta: Zeta,
    robust: bool,
    r: &mut R,
) -> SinrContext {
    let n_tx = n_interferers + 1;
    let mut z = Vec::new();
    let mut h = Vec::new();
    let mut vis = Vec::new();
    for i in 0..n_tx {
        z.push(CMat::from_fn(n_rx, n_ris, |_, _| standard_complex_normal(r)));
        h.push(CVec::from_fn(n_rx, |_, _| standard_complex_normal(r)));
        vis.push(if i == 0 { r.random_bool(0.5) } else { r.random_bool(0.7) });
    }
    let channels = ChannelSet::new(z, h, vis).unwrap();
    let powers: Vec<f64> = (0..n_tx).map(|_| r.random_range(0.5..2.0)).collect();
    let sigma_w_sq = (n_rx * n_ris) as f64;
    let m1: Vec<f64> = (0..n_tx).map(|_| r.random_range(0.0..0.2) * sigma_w_sq).collect();
    let m2: Vec<f64> =
        (0..n_tx).map(|_| r.random_range(0.0..0.05) * sigma_w_sq / n_ris as f64).collect();
    let noise = NoiseBudget::new(zeta, sigma_w_sq, m1, m2, n_ris).unwrap();
    let err = if robust {
        CsiErrorParams::uniform(n_tx, 0.05, 0.02).unwrap()
    } else {
        CsiErrorParams::perfect(n_tx)
    };
    SinrContext::new(channels, powers, noise, err).unwrap()
}
