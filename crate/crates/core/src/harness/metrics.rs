//! Throughput and uncoded 4-QAM symbol-error-rate metrics.

use crate::channel::standard_complex_normal;
use crate::Cx;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

/// Gray-mapped unit-energy 4-QAM: bit 0 selects +, bit 1 selects -, on the
/// in-phase (first bit) and quadrature (second bit) axes.
pub fn modulate_4qam(bit_i: bool, bit_q: bool) -> Cx {
    Cx::new(
        if bit_i { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 },
        if bit_q { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 },
    )
}

/// Coherent minimum-distance detection after dividing out the known
/// effective complex gain.
pub fn demodulate_4qam(received: Cx, gain: Cx) -> (bool, bool) {
    let s = received / gain;
    (s.re < 0.0, s.im < 0.0)
}

/// Shannon-style throughput lower bound, bit/s.
pub fn throughput_bps(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr).log2()
}

/// Fixed scalar link for symbol streaming: the optimizer has already been
/// run, so each symbol only touches effective complex gains.
#[derive(Debug, Clone)]
pub struct ScalarLink {
    /// True effective gains sqrt(P_i)·uᴴH_iθ0, index 0 = signal.
    pub gains: Vec<Cx>,
    /// Detection gain sqrt(P_0)·uᴴĤ_0θ0 from the estimated channel.
    pub detection_gain: Cx,
    /// Receiver noise variance σ_w² + ζσ_m².
    pub noise_var: f64,
}

/// Streams `symbols` random 4-QAM symbols from every transmitter through
/// the link and counts signal symbol errors.
pub fn simulate_ser<R: Rng + ?Sized>(link: &ScalarLink, symbols: usize, rng: &mut R) -> (u64, u64) {
    let noise_amp = link.noise_var.sqrt();
    let mut errors = 0u64;
    for _ in 0..symbols {
        let b0 = rng.random_bool(0.5);
        let b1 = rng.random_bool(0.5);
        let mut y = link.gains[0] * modulate_4qam(b0, b1);
        for gain in &link.gains[1..] {
            let s = modulate_4qam(rng.random_bool(0.5), rng.random_bool(0.5));
            y += gain * s;
        }
        y += standard_complex_normal(rng) * noise_amp;
        let (d0, d1) = demodulate_4qam(y, link.detection_gain);
        if d0 != b0 || d1 != b1 {
            errors += 1;
        }
    }
    (errors, symbols as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact_without_noise() {
        for (b0, b1) in [(false, false), (false, true), (true, false), (true, true)] {
            let s = modulate_4qam(b0, b1);
            let gain = Cx::new(0.3, -0.8);
            assert_eq!(demodulate_4qam(s * gain, gain), (b0, b1));
        }
    }

    #[test]
    fn symbol_energy_is_unit() {
        for (b0, b1) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_relative_eq!(modulate_4qam(b0, b1).norm_sqr(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_noise_zero_interference_gives_zero_errors() {
        let link = ScalarLink {
            gains: vec![Cx::new(0.7, 0.2)],
            detection_gain: Cx::new(0.7, 0.2),
            noise_var: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (errors, total) = simulate_ser(&link, 20_000, &mut rng);
        assert_eq!(errors, 0);
        assert_eq!(total, 20_000);
    }

    /// Gaussian upper-tail probability by Simpson quadrature; an oracle
    /// independent of any closed-form erfc implementation.
    fn q_function(x: f64) -> f64 {
        let span = 14.0f64;
        let steps = 40_000;
        let h = span / steps as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(x) + phi(x + span);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(x + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn awgn_ser_matches_quadrature_oracle() {
        // Scalar AWGN channel at SNR γ: per-axis error Q(sqrt(γ)),
        // symbol error 1 - (1 - Q)².
        let snr: f64 = 5.0;
        let link = ScalarLink {
            gains: vec![Cx::new(snr.sqrt(), 0.0)],
            detection_gain: Cx::new(snr.sqrt(), 0.0),
            noise_var: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let (errors, total) = simulate_ser(&link, n, &mut rng);
        let ser = errors as f64 / total as f64;
        let q = q_function(snr.sqrt());
        let expect = 1.0 - (1.0 - q) * (1.0 - q);
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!(
            (ser - expect).abs() < 3.0 * sigma,
            "ser {ser} vs analytic {expect} (3σ = {})",
            3.0 * sigma
        );
    }
}
