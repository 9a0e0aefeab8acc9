//! ζ-unified Rician channel draws, stacked channels, and the additive CSI
//! error model.
//!
//! Every link is drawn as
//!
//! `h = ( sqrt(K_d/(K_d+1)) f_LOS e^{jϖ} + sqrt((1-ζ)/(K_d+1)) h~ ) c/(4πfd)`
//!
//! with a single random phase ϖ ~ U[-π, π) shared by the whole LOS term and
//! i.i.d. standard complex normal NLOS entries. ζ = 1 keeps the channel
//! LOS-only (the re-radiated power shows up as noise instead); ζ = 0 turns
//! the absorbed power into the NLOS component via `K_d = τ/(1-τ)`.

use crate::geometry::ScenarioGeometry;
use crate::{atmosphere, CMat, CVec, Cx, Error, Result, Zeta, SPEED_OF_LIGHT};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// One sample of a zero-mean circularly symmetric complex normal with unit
/// total variance (each real component has variance 1/2).
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Cx {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Scalar parameters of one unified channel draw.
#[derive(Debug, Clone, Copy)]
pub struct UnifiedChannelParams {
    pub zeta: Zeta,
    pub frequency_hz: f64,
    pub distance_m: f64,
    /// Rician factor K_d = τ/(1-τ); may be infinite in a lossless medium.
    pub rician_k: f64,
    /// Free-space amplitude c/(4πfd).
    pub pathloss_amp: f64,
}

impl UnifiedChannelParams {
    pub fn new(zeta: Zeta, frequency_hz: f64, distance_m: f64, rician_k: f64) -> Result<Self> {
        if !(frequency_hz > 0.0) || !(distance_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "frequency and distance must be positive, got f={frequency_hz}, d={distance_m}"
            )));
        }
        if rician_k < 0.0 {
            return Err(Error::InvalidInput(format!(
                "Rician factor must be non-negative, got {rician_k}"
            )));
        }
        Ok(Self {
            zeta,
            frequency_hz,
            distance_m,
            rician_k,
            pathloss_amp: SPEED_OF_LIGHT / (4.0 * PI * frequency_hz * distance_m),
        })
    }

    /// Builds the params from a transmittance value, `K_d = τ/(1-τ)`.
    pub fn from_transmittance(
        zeta: Zeta,
        frequency_hz: f64,
        distance_m: f64,
        tau: f64,
    ) -> Result<Self> {
        let k = match atmosphere::rician_factor_from_transmittance(tau) {
            Ok(k) => k,
            // τ = 1: lossless medium, LOS-only regardless of ζ.
            Err(Error::Degenerate(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Self::new(zeta, frequency_hz, distance_m, k)
    }

    /// LOS and NLOS amplitude weights, robust to an infinite Rician factor.
    fn weights(&self) -> (f64, f64) {
        if self.rician_k.is_finite() {
            let los_pow = self.rician_k / (self.rician_k + 1.0);
            (los_pow.sqrt(), ((1.0 - self.zeta.value()) / (self.rician_k + 1.0)).sqrt())
        } else {
            (1.0, 0.0)
        }
    }
}

/// Draws a vector channel given its geometric LOS response.
///
/// NLOS variates are always consumed from the RNG, even when their weight is
/// zero (ζ = 1), so paired runs that differ only in ζ see identical draws.
pub fn draw_channel_vector<R: Rng + ?Sized>(
    params: &UnifiedChannelParams,
    los: &CVec,
    rng: &mut R,
) -> CVec {
    let (w_los, w_nlos) = params.weights();
    let phase = rng.random_range(-PI..PI);
    let rot = Cx::new(phase.cos(), phase.sin()) * w_los;
    let mut out = CVec::from_fn(los.len(), |i, _| {
        los[i] * rot + standard_complex_normal(rng) * w_nlos
    });
    out *= Cx::new(params.pathloss_amp, 0.0);
    out
}

/// Matrix variant of [`draw_channel_vector`].
pub fn draw_channel_matrix<R: Rng + ?Sized>(
    params: &UnifiedChannelParams,
    los: &CMat,
    rng: &mut R,
) -> CMat {
    let (w_los, w_nlos) = params.weights();
    let phase = rng.random_range(-PI..PI);
    let rot = Cx::new(phase.cos(), phase.sin()) * w_los;
    // Row-major iteration order fixes the RNG consumption order.
    let mut out = CMat::zeros(los.nrows(), los.ncols());
    for r in 0..los.nrows() {
        for c in 0..los.ncols() {
            out[(r, c)] = (los[(r, c)] * rot + standard_complex_normal(rng) * w_nlos)
                * params.pathloss_amp;
        }
    }
    out
}

/// Stacks the reflected and direct channels: `H_i = [Z_i  I_i h_RT_i]`,
/// with `Z_i = H_SR diag(h_ST_i)`.
pub fn assemble_stacked(
    h_sr: &CMat,
    h_st: &CVec,
    h_rt: &CVec,
    visible: bool,
) -> Result<CMat> {
    if h_sr.ncols() != h_st.len() {
        return Err(Error::DimensionMismatch(format!(
            "H_SR has {} columns but h_ST has {} entries",
            h_sr.ncols(),
            h_st.len()
        )));
    }
    if h_sr.nrows() != h_rt.len() {
        return Err(Error::DimensionMismatch(format!(
            "H_SR has {} rows but h_RT has {} entries",
            h_sr.nrows(),
            h_rt.len()
        )));
    }
    let n_rx = h_sr.nrows();
    let n = h_sr.ncols();
    let mut stacked = CMat::zeros(n_rx, n + 1);
    for c in 0..n {
        for r in 0..n_rx {
            stacked[(r, c)] = h_sr[(r, c)] * h_st[c];
        }
    }
    if visible {
        for r in 0..n_rx {
            stacked[(r, n)] = h_rt[r];
        }
    }
    Ok(stacked)
}

/// True or estimated channels for the signal Tx (index 0) and interferers.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// Reflected channels Z_i = H_SR diag(h_ST_i), one per Tx.
    z: Vec<CMat>,
    /// Direct channels h_RT_i, one per Tx.
    h_rt: Vec<CVec>,
    /// Direct-link visibility indicators I_i.
    visibility: Vec<bool>,
}

impl ChannelSet {
    pub fn new(z: Vec<CMat>, h_rt: Vec<CVec>, visibility: Vec<bool>) -> Result<Self> {
        if z.is_empty() || z.len() != h_rt.len() || z.len() != visibility.len() {
            return Err(Error::DimensionMismatch(
                "channel set needs equal non-zero counts of Z_i, h_RT_i and indicators".into(),
            ));
        }
        let (n_rx, n) = (z[0].nrows(), z[0].ncols());
        for (zi, hi) in z.iter().zip(&h_rt) {
            if zi.nrows() != n_rx || zi.ncols() != n || hi.len() != n_rx {
                return Err(Error::DimensionMismatch(
                    "inconsistent channel dimensions across transmitters".into(),
                ));
            }
        }
        Ok(Self { z, h_rt, visibility })
    }

    pub fn n_tx(&self) -> usize {
        self.z.len()
    }

    /// Number of interferers N_I (total transmitters minus the signal).
    pub fn n_interferers(&self) -> usize {
        self.z.len() - 1
    }

    pub fn n_rx(&self) -> usize {
        self.z[0].nrows()
    }

    pub fn n_ris(&self) -> usize {
        self.z[0].ncols()
    }

    pub fn z(&self, i: usize) -> &CMat {
        &self.z[i]
    }

    pub fn h_rt(&self, i: usize) -> &CVec {
        &self.h_rt[i]
    }

    pub fn visible(&self, i: usize) -> bool {
        self.visibility[i]
    }

    /// Stacked channel H_i = [Z_i  I_i h_RT_i], N_R x (N+1).
    pub fn stacked(&self, i: usize) -> CMat {
        let z = &self.z[i];
        let (n_rx, n) = (z.nrows(), z.ncols());
        let mut out = CMat::zeros(n_rx, n + 1);
        out.view_mut((0, 0), (n_rx, n)).copy_from(z);
        if self.visibility[i] {
            out.view_mut((0, n), (n_rx, 1)).copy_from(&self.h_rt[i]);
        }
        out
    }

    /// Effective receive response H_i θ0 = Z_i θ + I_i h_RT_i.
    pub fn effective(&self, i: usize, theta: &CVec) -> CVec {
        let mut v = &self.z[i] * theta;
        if self.visibility[i] {
            v += &self.h_rt[i];
        }
        v
    }
}

/// Per-transmitter CSI error variances (ρ_i², ρ'_i²), index 0 = signal.
#[derive(Debug, Clone, Default)]
pub struct CsiErrorParams {
    /// Reflected-channel error variance ρ_i² per entry of Z_i.
    pub rho_sq: Vec<f64>,
    /// Direct-channel error variance ρ'_i² per entry of h_RT_i.
    pub rho_prime_sq: Vec<f64>,
}

impl CsiErrorParams {
    pub fn perfect(n_tx: usize) -> Self {
        Self {
            rho_sq: vec![0.0; n_tx],
            rho_prime_sq: vec![0.0; n_tx],
        }
    }

    pub fn uniform(n_tx: usize, rho_sq: f64, rho_prime_sq: f64) -> Result<Self> {
        if rho_sq < 0.0 || rho_prime_sq < 0.0 {
            return Err(Error::InvalidInput("CSI error variances must be >= 0".into()));
        }
        Ok(Self {
            rho_sq: vec![rho_sq; n_tx],
            rho_prime_sq: vec![rho_prime_sq; n_tx],
        })
    }

    pub fn validate(&self, n_tx: usize) -> Result<()> {
        if self.rho_sq.len() != n_tx || self.rho_prime_sq.len() != n_tx {
            return Err(Error::DimensionMismatch(format!(
                "CSI error params cover {} transmitters, channel set has {}",
                self.rho_sq.len(),
                n_tx
            )));
        }
        if self
            .rho_sq
            .iter()
            .chain(self.rho_prime_sq.iter())
            .any(|v| *v < 0.0 || !v.is_finite())
        {
            return Err(Error::InvalidInput("CSI error variances must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        self.rho_sq.iter().all(|v| *v == 0.0) && self.rho_prime_sq.iter().all(|v| *v == 0.0)
    }
}

/// Produces the estimated channel set from the truth by subtracting fresh
/// error draws, so the identity Z_i = Ẑ_i + Δ_i holds with the drawn error.
pub fn corrupt_csi<R: Rng + ?Sized>(
    truth: &ChannelSet,
    err: &CsiErrorParams,
    rng: &mut R,
) -> Result<ChannelSet> {
    err.validate(truth.n_tx())?;
    let mut z_hat = Vec::with_capacity(truth.n_tx());
    let mut h_hat = Vec::with_capacity(truth.n_tx());
    for i in 0..truth.n_tx() {
        let rho = err.rho_sq[i].sqrt();
        let mut z = truth.z[i].clone();
        for r in 0..z.nrows() {
            for c in 0..z.ncols() {
                z[(r, c)] -= standard_complex_normal(rng) * rho;
            }
        }
        z_hat.push(z);

        let rho_p = err.rho_prime_sq[i].sqrt();
        let mut h = truth.h_rt[i].clone();
        for r in 0..h.len() {
            h[r] -= standard_complex_normal(rng) * rho_p;
        }
        h_hat.push(h);
    }
    ChannelSet::new(z_hat, h_hat, truth.visibility.clone())
}

/// Draws the full true channel set for a placed scenario.
pub fn draw_channel_set<R: Rng + ?Sized>(
    scene: &ScenarioGeometry,
    atm: &atmosphere::AtmosphereConfig,
    zeta: Zeta,
    frequency_hz: f64,
    visibility: &[bool],
    rng: &mut R,
) -> Result<ChannelSet> {
    if visibility.len() != scene.links.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} visibility flags for {} transmitters",
            visibility.len(),
            scene.links.len()
        )));
    }
    let lambda = scene.wavelength_m;

    // H_SR: rank-one LOS response between the two arrays (Table 1).
    let a_rx = crate::geometry::array_factor(&scene.dir_ris_at_rx, &scene.rx_layout, lambda);
    let a_ris = crate::geometry::array_factor(&scene.dir_rx_at_ris, &scene.ris_layout, lambda);
    let f_los_sr = a_rx.adjoint() * a_ris;
    let tau_sr = atmosphere::transmittance(frequency_hz, scene.d_sr_m, atm)?;
    let p_sr = UnifiedChannelParams::from_transmittance(zeta, frequency_hz, scene.d_sr_m, tau_sr)?;
    let h_sr = draw_channel_matrix(&p_sr, &f_los_sr, rng);

    let mut z = Vec::with_capacity(scene.links.len());
    let mut h_rt = Vec::with_capacity(scene.links.len());
    for link in &scene.links {
        // h_ST_i over d_{γ_i}.
        let f_los_st =
            crate::geometry::array_factor(&link.dir_at_ris, &scene.ris_layout, lambda).adjoint();
        let tau_st = atmosphere::transmittance(frequency_hz, link.d_ris_m, atm)?;
        let p_st =
            UnifiedChannelParams::from_transmittance(zeta, frequency_hz, link.d_ris_m, tau_st)?;
        let h_st = draw_channel_vector(&p_st, &f_los_st, rng);

        // h_RT_i over d_i.
        let f_los_rt =
            crate::geometry::array_factor(&link.dir_at_rx, &scene.rx_layout, lambda).adjoint();
        let tau_rt = atmosphere::transmittance(frequency_hz, link.d_rx_m, atm)?;
        let p_rt =
            UnifiedChannelParams::from_transmittance(zeta, frequency_hz, link.d_rx_m, tau_rt)?;
        h_rt.push(draw_channel_vector(&p_rt, &f_los_rt, rng));

        let mut zi = h_sr.clone();
        for c in 0..zi.ncols() {
            let s = h_st[c];
            for r in 0..zi.nrows() {
                zi[(r, c)] *= s;
            }
        }
        z.push(zi);
    }

    ChannelSet::new(z, h_rt, visibility.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_cvec<R: Rng>(n: usize, rng: &mut R) -> CVec {
        CVec::from_fn(n, |_, _| standard_complex_normal(rng))
    }

    fn random_cmat<R: Rng>(r: usize, c: usize, rng: &mut R) -> CMat {
        CMat::from_fn(r, c, |_, _| standard_complex_normal(rng))
    }

    #[test]
    fn zeta_one_is_los_only_with_transmittance_weight() {
        let mut rng = rng(7);
        let tau = 0.9;
        let p = UnifiedChannelParams::from_transmittance(Zeta::Noise, 220e9, 1.0, tau).unwrap();
        let los = CVec::from_element(6, Cx::new(1.0, 0.0));
        for _ in 0..20 {
            let h = draw_channel_vector(&p, &los, &mut rng);
            // Every entry has magnitude sqrt(τ) · pathloss; only ϖ varies.
            for e in h.iter() {
                assert_relative_eq!(e.norm(), tau.sqrt() * p.pathloss_amp, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn zeta_zero_k_zero_is_pure_nlos() {
        // With a zero LOS response the draw isolates the NLOS part; its
        // per-entry complex variance is pathloss²/(K+1) = pathloss² at K=0.
        let mut rng = rng(11);
        let p = UnifiedChannelParams::new(Zeta::Scattering, 220e9, 1.0, 0.0).unwrap();
        let los = CVec::zeros(8);
        let draws = 20_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let h = draw_channel_vector(&p, &los, &mut rng);
            acc += h.norm_squared() / h.len() as f64;
        }
        let var = acc / draws as f64;
        assert_relative_eq!(var, p.pathloss_amp.powi(2), max_relative = 0.02);
    }

    #[test]
    fn zeta_zero_k_one_nlos_variance_is_half_pathloss_squared() {
        let mut rng = rng(13);
        let p = UnifiedChannelParams::new(Zeta::Scattering, 220e9, 1.0, 1.0).unwrap();
        let los = CVec::zeros(8);
        let draws = 20_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let h = draw_channel_vector(&p, &los, &mut rng);
            acc += h.norm_squared() / h.len() as f64;
        }
        let var = acc / draws as f64;
        assert_relative_eq!(var, 0.5 * p.pathloss_amp.powi(2), max_relative = 0.02);
    }

    #[test]
    fn mean_power_matches_rician_split() {
        // E||h||² = [ ||f_LOS||² K/(K+1) + len (1-ζ)/(K+1) ] (c/4πfd)².
        let mut r = rng(17);
        let los = random_cvec(5, &mut r);
        for (zeta, k) in [(Zeta::Noise, 3.0), (Zeta::Scattering, 3.0), (Zeta::Scattering, 0.5)] {
            let p = UnifiedChannelParams::new(zeta, 220e9, 1.2, k).unwrap();
            let draws = 30_000;
            let mut acc = 0.0;
            for _ in 0..draws {
                acc += draw_channel_vector(&p, &los, &mut r).norm_squared();
            }
            let mean = acc / draws as f64;
            let expect = (los.norm_squared() * k / (k + 1.0)
                + los.len() as f64 * (1.0 - zeta.value()) / (k + 1.0))
                * p.pathloss_amp.powi(2);
            assert_relative_eq!(mean, expect, max_relative = 0.02);
        }
    }

    #[test]
    fn assemble_stacked_indicator_and_shape() {
        let mut r = rng(23);
        let h_sr = random_cmat(4, 4, &mut r);
        let h_st = random_cvec(4, &mut r);
        let h_rt = random_cvec(4, &mut r);

        let blocked = assemble_stacked(&h_sr, &h_st, &h_rt, false).unwrap();
        assert_eq!(blocked.ncols(), 5);
        assert!(blocked.column(4).iter().all(|e| e.norm() == 0.0));

        let open = assemble_stacked(&h_sr, &h_st, &h_rt, true).unwrap();
        for i in 0..4 {
            assert_eq!(open[(i, 4)], h_rt[i]);
        }
    }

    #[test]
    fn assemble_stacked_single_element() {
        let mut r = rng(29);
        let h_sr = random_cmat(3, 1, &mut r);
        let h_st = random_cvec(1, &mut r);
        let h_rt = random_cvec(3, &mut r);
        let stacked = assemble_stacked(&h_sr, &h_st, &h_rt, true).unwrap();
        for i in 0..3 {
            assert_eq!(stacked[(i, 0)], h_sr[(i, 0)] * h_st[0]);
        }
    }

    #[test]
    fn stacked_times_theta0_matches_signal_model_term() {
        // H_i [θᵀ 1]ᵀ must equal H_SR diag(h_ST) θ + I h_RT evaluated directly.
        let mut r = rng(31);
        let h_sr = random_cmat(4, 4, &mut r);
        let h_st = random_cvec(4, &mut r);
        let h_rt = random_cvec(4, &mut r);
        let theta = CVec::from_fn(4, |i, _| Cx::new(0.0, 0.9 * i as f64).exp());
        let mut theta0 = CVec::zeros(5);
        theta0.rows_mut(0, 4).copy_from(&theta);
        theta0[4] = Cx::new(1.0, 0.0);

        for visible in [true, false] {
            let stacked = assemble_stacked(&h_sr, &h_st, &h_rt, visible).unwrap();
            let lhs = &stacked * &theta0;
            let mut diag = CMat::zeros(4, 4);
            for i in 0..4 {
                diag[(i, i)] = h_st[i];
            }
            let mut rhs = &h_sr * &diag * &theta;
            if visible {
                rhs += &h_rt;
            }
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn corrupt_csi_perfect_is_identity() {
        let mut r = rng(37);
        let truth = ChannelSet::new(
            vec![random_cmat(4, 6, &mut r), random_cmat(4, 6, &mut r)],
            vec![random_cvec(4, &mut r), random_cvec(4, &mut r)],
            vec![false, true],
        )
        .unwrap();
        let est = corrupt_csi(&truth, &CsiErrorParams::perfect(2), &mut r).unwrap();
        for i in 0..2 {
            assert_eq!(est.z(i), truth.z(i));
            assert_eq!(est.h_rt(i), truth.h_rt(i));
        }
    }

    #[test]
    fn corrupt_csi_error_energy_bookkeeping() {
        let (n_rx, n) = (8, 8);
        let sigma_sq = 0.25;
        let mut r = rng(41);
        let truth = ChannelSet::new(
            vec![random_cmat(n_rx, n, &mut r)],
            vec![random_cvec(n_rx, &mut r)],
            vec![true],
        )
        .unwrap();
        let err = CsiErrorParams::uniform(1, sigma_sq, 0.0).unwrap();
        let trials = 2_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let est = corrupt_csi(&truth, &err, &mut r).unwrap();
            acc += (truth.z(0) - est.z(0)).norm_squared();
        }
        let mean = acc / trials as f64;
        assert_relative_eq!(mean, (n_rx * n) as f64 * sigma_sq, max_relative = 0.05);
    }

    #[test]
    fn corrupt_csi_blocked_direct_column_stays_zero() {
        let mut r = rng(43);
        let truth = ChannelSet::new(
            vec![random_cmat(4, 4, &mut r)],
            vec![random_cvec(4, &mut r)],
            vec![false],
        )
        .unwrap();
        let err = CsiErrorParams::uniform(1, 1e-2, 1e-2).unwrap();
        let est = corrupt_csi(&truth, &err, &mut r).unwrap();
        let stacked = est.stacked(0);
        assert!(stacked.column(4).iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn corrupt_csi_reproducible_with_same_seed() {
        let mut r = rng(47);
        let truth = ChannelSet::new(
            vec![random_cmat(3, 5, &mut r)],
            vec![random_cvec(3, &mut r)],
            vec![true],
        )
        .unwrap();
        let err = CsiErrorParams::uniform(1, 1e-3, 1e-3).unwrap();
        let a = corrupt_csi(&truth, &err, &mut rng(99)).unwrap();
        let b = corrupt_csi(&truth, &err, &mut rng(99)).unwrap();
        for (x, y) in a.z(0).iter().zip(b.z(0).iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn draw_channel_set_dimensions_and_determinism() {
        let spec = crate::geometry::PlacementSpec {
            wavelength_m: SPEED_OF_LIGHT / 220e9,
            n_ris: 16,
            n_rx: 9,
            ris_offset_m: 1.0,
            tx_spherical: vec![
                (1.0, 60f64.to_radians(), 0.0),
                (1.5, 110f64.to_radians(), 0.0),
            ],
        };
        let scene = crate::geometry::place_scenario(&spec).unwrap();
        let atm = atmosphere::AtmosphereConfig::default();
        let set = draw_channel_set(
            &scene,
            &atm,
            Zeta::Scattering,
            220e9,
            &[false, true],
            &mut rng(5),
        )
        .unwrap();
        assert_eq!(set.n_rx(), 9);
        assert_eq!(set.n_ris(), 16);
        assert_eq!(set.n_tx(), 2);
        assert_eq!(set.stacked(0).ncols(), 17);

        let again = draw_channel_set(
            &scene,
            &atm,
            Zeta::Scattering,
            220e9,
            &[false, true],
            &mut rng(5),
        )
        .unwrap();
        assert_eq!((set.z(1) - again.z(1)).norm(), 0.0);
    }
}
