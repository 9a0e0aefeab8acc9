//! Molecular re-radiation noise budget, estimation-error covariances, and
//! the SINR in its three algebraically equivalent forms.
//!
//! The same SINR can be written
//! - directly on the stacked channels (receiver view),
//! - as a ratio of quadratic forms in θ0 (the SDR view), and
//! - as a fractional form in θ with the direct-path column folded into
//!   linear terms (the gradient-descent view).
//!
//! All three agree on the feasible set (unit-norm beamformer, unit-modulus
//! RIS phases); the acceptance suite checks agreement to 1e-9 relative.

use crate::channel::{ChannelSet, CsiErrorParams};
use crate::geometry::ScenarioGeometry;
use crate::{atmosphere, CMat, CVec, Cx, Error, Result, Zeta, SPEED_OF_LIGHT};
use rand::Rng;
use std::f64::consts::{PI, TAU};

/// Thermal noise power in watts over a bandwidth, from a spectral density in
/// dBm/Hz (the usual -174 dBm/Hz figure).
pub fn thermal_noise_variance_w(noise_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf(noise_dbm_per_hz / 10.0) * 1e-3 * bandwidth_hz
}

/// Thermal plus molecular re-radiation noise variances.
///
/// `sigma_m1_i_sq` is the direct-path molecular variance of Tx i (already
/// zeroed when that direct link is blocked); `sigma_m2_i_sq` is the
/// per-RIS-element reflected-path variance. The per-Tx total is
/// `σ_{m,i}² = σ_{m1,i}² + N σ_{m2,i}²` and the molecular term enters the
/// receiver noise only under ζ = 1.
#[derive(Debug, Clone)]
pub struct NoiseBudget {
    pub zeta: Zeta,
    pub sigma_w_sq: f64,
    pub sigma_m1_i_sq: Vec<f64>,
    pub sigma_m2_i_sq: Vec<f64>,
    pub sigma_m1_sq: f64,
    pub sigma_m2_sq: f64,
    pub sigma_m_sq: f64,
    pub n_ris: usize,
}

impl NoiseBudget {
    pub fn new(
        zeta: Zeta,
        sigma_w_sq: f64,
        sigma_m1_i_sq: Vec<f64>,
        sigma_m2_i_sq: Vec<f64>,
        n_ris: usize,
    ) -> Result<Self> {
        if sigma_m1_i_sq.len() != sigma_m2_i_sq.len() || sigma_m1_i_sq.is_empty() {
            return Err(Error::DimensionMismatch(
                "per-Tx molecular variances must have equal non-zero lengths".into(),
            ));
        }
        if sigma_w_sq <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "thermal noise variance must be positive, got {sigma_w_sq}"
            )));
        }
        if sigma_m1_i_sq.iter().chain(&sigma_m2_i_sq).any(|v| *v < 0.0) {
            return Err(Error::InvalidInput("molecular variances must be >= 0".into()));
        }
        let sigma_m1_sq: f64 = sigma_m1_i_sq.iter().sum();
        let sigma_m2_sq: f64 = sigma_m2_i_sq.iter().sum();
        Ok(Self {
            zeta,
            sigma_w_sq,
            sigma_m1_i_sq,
            sigma_m2_i_sq,
            sigma_m1_sq,
            sigma_m2_sq,
            sigma_m_sq: sigma_m1_sq + n_ris as f64 * sigma_m2_sq,
            n_ris,
        })
    }

    /// Budget with no molecular contribution (used by synthetic tests and by
    /// true-channel metric evaluation when ζ = 0 anyway).
    pub fn thermal_only(zeta: Zeta, sigma_w_sq: f64, n_tx: usize, n_ris: usize) -> Result<Self> {
        Self::new(zeta, sigma_w_sq, vec![0.0; n_tx], vec![0.0; n_tx], n_ris)
    }

    pub fn n_tx(&self) -> usize {
        self.sigma_m1_i_sq.len()
    }

    /// σ_{m,i}² = σ_{m1,i}² + N σ_{m2,i}².
    pub fn sigma_m_i_sq(&self, i: usize) -> f64 {
        self.sigma_m1_i_sq[i] + self.n_ris as f64 * self.sigma_m2_i_sq[i]
    }

    /// Total receiver noise variance σ_w² + ζ σ_m².
    pub fn effective_noise(&self) -> f64 {
        self.sigma_w_sq + self.zeta.value() * self.sigma_m_sq
    }
}

/// Molecular noise variances per Lemma-1 bookkeeping: the direct path of
/// Tx i contributes `(c/4πfd_i)² P_i [1-τ(f,d_i)]` when visible, and each
/// RIS element relays `(c²/(16(πf)² d_α d_γi))² P_i [1-τ(f,d_α)τ(f,d_γi)]`.
pub fn molecular_noise(
    scene: &ScenarioGeometry,
    powers: &[f64],
    visibility: &[bool],
    atm: &atmosphere::AtmosphereConfig,
    zeta: Zeta,
    frequency_hz: f64,
    sigma_w_sq: f64,
) -> Result<NoiseBudget> {
    if powers.len() != scene.links.len() || visibility.len() != scene.links.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} powers / {} visibilities for {} transmitters",
            powers.len(),
            visibility.len(),
            scene.links.len()
        )));
    }
    if scene.d_sr_m <= 0.0 {
        return Err(Error::InvalidInput("RIS-Rx distance must be positive".into()));
    }
    let tau_alpha = atmosphere::transmittance(frequency_hz, scene.d_sr_m, atm)?;
    let mut m1 = Vec::with_capacity(powers.len());
    let mut m2 = Vec::with_capacity(powers.len());
    for ((link, &p_i), &visible) in scene.links.iter().zip(powers).zip(visibility) {
        if link.d_rx_m <= 0.0 || link.d_ris_m <= 0.0 {
            return Err(Error::InvalidInput("link distances must be positive".into()));
        }
        let tau_direct = atmosphere::transmittance(frequency_hz, link.d_rx_m, atm)?;
        let amp_direct = SPEED_OF_LIGHT / (4.0 * PI * frequency_hz * link.d_rx_m);
        let direct = amp_direct.powi(2) * p_i * (1.0 - tau_direct);
        m1.push(if visible { direct } else { 0.0 });

        let tau_gamma = atmosphere::transmittance(frequency_hz, link.d_ris_m, atm)?;
        let amp_refl = SPEED_OF_LIGHT.powi(2)
            / (16.0 * (PI * frequency_hz).powi(2) * scene.d_sr_m * link.d_ris_m);
        m2.push(amp_refl.powi(2) * p_i * (1.0 - tau_alpha * tau_gamma));
    }
    NoiseBudget::new(zeta, sigma_w_sq, m1, m2, scene.n_ris())
}

/// Scalar of the estimation-error covariance C_{e_i} = (Nρ_i² + I_i ρ'_i²) I.
pub fn error_covariance_scale(err: &CsiErrorParams, i: usize, n_ris: usize, visible: bool) -> f64 {
    n_ris as f64 * err.rho_sq[i] + if visible { err.rho_prime_sq[i] } else { 0.0 }
}

/// ρ_total = Σ_j P_j (Nρ_j² + I_j ρ'_j²).
pub fn rho_total(
    err: &CsiErrorParams,
    powers: &[f64],
    n_ris: usize,
    visibility: &[bool],
) -> f64 {
    powers
        .iter()
        .enumerate()
        .map(|(j, p)| p * error_covariance_scale(err, j, n_ris, visibility[j]))
        .sum()
}

/// RIS configuration: phases φ and the unit-modulus vector θ = e^{jφ}.
#[derive(Debug, Clone)]
pub struct RisPhases {
    phi: Vec<f64>,
    theta: CVec,
}

impl RisPhases {
    pub fn from_phi(phi: Vec<f64>) -> Self {
        let theta = CVec::from_fn(phi.len(), |i, _| Cx::new(phi[i].cos(), phi[i].sin()));
        Self { phi, theta }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_phi((0..n).map(|_| rng.random_range(0.0..TAU)).collect())
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &CVec {
        &self.theta
    }

    /// θ0 = [θᵀ 1]ᵀ, the stacked configuration with the direct-path entry.
    pub fn theta0(&self) -> CVec {
        let n = self.phi.len();
        let mut out = CVec::zeros(n + 1);
        out.rows_mut(0, n).copy_from(&self.theta);
        out[n] = Cx::new(1.0, 0.0);
        out
    }
}

/// Quadratic forms of the RIS sub-problem: γ = θ0ᴴ G0 θ0 / (θ0ᴴ M θ0 + α).
#[derive(Debug, Clone)]
pub struct RisQuadratic {
    pub g0: CMat,
    pub m: CMat,
    pub alpha: f64,
}

impl RisQuadratic {
    pub fn gamma(&self, theta0: &CVec) -> f64 {
        let num = hermitian_quadratic(&self.g0, theta0);
        let den = hermitian_quadratic(&self.m, theta0) + self.alpha;
        num / den
    }

    /// Trace evaluation with an explicit Ψ (used by SDR and its tests).
    pub fn trace_gamma(&self, psi: &CMat) -> f64 {
        let num = trace_product(psi, &self.g0);
        let den = trace_product(psi, &self.m) + self.alpha;
        num / den
    }
}

fn hermitian_quadratic(m: &CMat, x: &CVec) -> f64 {
    (x.adjoint() * m * x)[(0, 0)].re
}

/// Re Tr(A B) for Hermitian A, B.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let mut acc = Cx::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Rank-one factored forms of the fractional (GD) view of the SINR.
///
/// `v_i = Ẑ_iᴴ u`, `w_i = I_i uᴴ ĥ_RT_i`; the matrices of the printed
/// definitions are `R_i = P_i (v_i v_iᴴ + |w_i|²/N I)`,
/// `K = Σ_{i≥1} R_i + k_diag I`, `c_i = P_i conj(w_i) v_iᴴ`,
/// `z = Σ_{i≥1} c_i`. Keeping the factors makes every evaluation O(N).
#[derive(Debug, Clone)]
pub struct GdForms {
    pub v: Vec<CVec>,
    pub w: Vec<Cx>,
    pub powers: Vec<f64>,
    /// (ρ_total + σ_w² + ζσ_m1²)/N + ζσ_m2².
    pub k_diag: f64,
    pub n_ris: usize,
}

impl GdForms {
    pub fn numerator(&self, theta: &CVec) -> f64 {
        let s0 = self.v[0].dotc(theta) + self.w[0];
        self.powers[0] * s0.norm_sqr()
    }

    pub fn denominator(&self, theta: &CVec) -> f64 {
        let mut acc = self.n_ris as f64 * self.k_diag;
        for i in 1..self.v.len() {
            let s = self.v[i].dotc(theta) + self.w[i];
            acc += self.powers[i] * s.norm_sqr();
        }
        acc
    }

    /// SINR value; equals the direct form on unit-modulus θ.
    pub fn gamma(&self, theta: &CVec) -> f64 {
        self.numerator(theta) / self.denominator(theta)
    }

    /// Gradient of the minimized objective -γ with respect to φ.
    pub fn gradient(&self, theta: &CVec) -> Vec<f64> {
        let n = theta.len();
        let num = self.numerator(theta);
        let den = self.denominator(theta);

        // R0 θ and K θ through the rank-one structure.
        let s0 = self.v[0].dotc(theta);
        let mut r0_theta = &self.v[0] * (s0 * self.powers[0]);
        let diag0 = self.powers[0] * self.w[0].norm_sqr() / self.n_ris as f64;
        r0_theta += theta * Cx::new(diag0, 0.0);

        let mut k_theta = theta * Cx::new(self.k_diag, 0.0);
        for i in 1..self.v.len() {
            let s = self.v[i].dotc(theta);
            k_theta += &self.v[i] * (s * self.powers[i]);
            k_theta += theta * Cx::new(self.powers[i] * self.w[i].norm_sqr() / self.n_ris as f64, 0.0);
        }

        let c0 = self.powers[0] * self.w[0].conj();
        let mut grad = vec![0.0; n];
        for k in 0..n {
            let c0_k = c0 * self.v[0][k].conj();
            let z_k: Cx = (1..self.v.len())
                .map(|i| self.v[i][k].conj() * self.w[i].conj() * self.powers[i])
                .sum();
            let jt = Cx::new(0.0, 1.0) * theta[k];
            let t1 = ((r0_theta[k].conj() + c0_k) * (-jt)).re * 2.0 / den;
            let t2 = (num * ((k_theta[k].conj() + z_k) * jt)).re * 2.0 / (den * den);
            grad[k] = t1 + t2;
        }
        grad
    }

    /// Materialized R_i per the printed definition (verification path).
    pub fn r_matrix(&self, i: usize) -> CMat {
        let n = self.n_ris;
        let mut m = &self.v[i] * self.v[i].adjoint();
        let d = self.w[i].norm_sqr() / n as f64;
        for k in 0..n {
            m[(k, k)] += Cx::new(d, 0.0);
        }
        m * Cx::new(self.powers[i], 0.0)
    }

    /// Materialized K per the printed definition (verification path).
    pub fn k_matrix(&self) -> CMat {
        let n = self.n_ris;
        let mut m = CMat::zeros(n, n);
        for i in 1..self.v.len() {
            m += self.r_matrix(i);
        }
        for k in 0..n {
            m[(k, k)] += Cx::new(self.k_diag, 0.0);
        }
        m
    }

    /// Row vector c_i = P_i I_i ĥᴴ u uᴴ Ẑ_i.
    pub fn c_row(&self, i: usize) -> crate::CRow {
        self.v[i].adjoint() * (self.w[i].conj() * self.powers[i])
    }

    /// Row vector z = Σ_{i≥1} c_i.
    pub fn z_row(&self) -> crate::CRow {
        let mut z = crate::CRow::zeros(self.n_ris);
        for i in 1..self.v.len() {
            z += self.c_row(i);
        }
        z
    }
}

/// Everything the solvers need to evaluate and optimize the SINR for one
/// (estimated) channel realization. Immutable once built.
#[derive(Debug, Clone)]
pub struct SinrContext {
    channels: ChannelSet,
    powers: Vec<f64>,
    noise: NoiseBudget,
    err: CsiErrorParams,
    rho_total: f64,
}

impl SinrContext {
    pub fn new(
        channels: ChannelSet,
        powers: Vec<f64>,
        noise: NoiseBudget,
        err: CsiErrorParams,
    ) -> Result<Self> {
        let n_tx = channels.n_tx();
        if powers.len() != n_tx {
            return Err(Error::DimensionMismatch(format!(
                "{} powers for {} transmitters",
                powers.len(),
                n_tx
            )));
        }
        if noise.n_tx() != n_tx {
            return Err(Error::DimensionMismatch(format!(
                "noise budget covers {} transmitters, channel set has {}",
                noise.n_tx(),
                n_tx
            )));
        }
        if noise.n_ris != channels.n_ris() {
            return Err(Error::DimensionMismatch(format!(
                "noise budget built for N = {}, channels have N = {}",
                noise.n_ris,
                channels.n_ris()
            )));
        }
        if powers.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidInput("powers must be non-negative".into()));
        }
        err.validate(n_tx)?;
        let visibility: Vec<bool> = (0..n_tx).map(|i| channels.visible(i)).collect();
        let rho_total = rho_total(&err, &powers, channels.n_ris(), &visibility);
        Ok(Self {
            channels,
            powers,
            noise,
            err,
            rho_total,
        })
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> &NoiseBudget {
        &self.noise
    }

    pub fn err(&self) -> &CsiErrorParams {
        &self.err
    }

    pub fn rho_total(&self) -> f64 {
        self.rho_total
    }

    pub fn n_ris(&self) -> usize {
        self.channels.n_ris()
    }

    pub fn n_rx(&self) -> usize {
        self.channels.n_rx()
    }

    /// ρ_total + σ_w² + ζσ_m², the θ-independent denominator additive.
    pub fn noise_floor(&self) -> f64 {
        self.rho_total + self.noise.effective_noise()
    }

    /// SINR per the direct receiver-side expression; expects ‖u‖ = 1.
    pub fn sinr(&self, u: &CVec, phases: &RisPhases) -> f64 {
        debug_assert!((u.norm() - 1.0).abs() < 1e-6, "sinr expects a unit-norm beamformer");
        let theta = phases.theta();
        let num = self.powers[0] * u.dotc(&self.channels.effective(0, theta)).norm_sqr();
        let mut den = self.noise_floor();
        for i in 1..self.channels.n_tx() {
            den += self.powers[i] * u.dotc(&self.channels.effective(i, theta)).norm_sqr();
        }
        num / den
    }

    /// Matrix and right-hand side of the beamformer subproblem:
    /// `A = Σ_{i≥1} P_i e_i e_iᴴ + (ρ_total + σ_w² + ζσ_m²) I`, `e_0 = Ĥ_0 θ0`.
    pub fn beamformer_system(&self, phases: &RisPhases) -> (CMat, CVec) {
        let theta = phases.theta();
        let n_rx = self.channels.n_rx();
        let mut a = CMat::identity(n_rx, n_rx) * Cx::new(self.noise_floor(), 0.0);
        for i in 1..self.channels.n_tx() {
            let e_i = self.channels.effective(i, theta);
            // a += P_i e_i e_iᴴ
            a.gerc(Cx::new(self.powers[i], 0.0), &e_i, &e_i.clone(), Cx::new(1.0, 0.0));
        }
        let e0 = self.channels.effective(0, theta);
        (a, e0)
    }

    /// Quadratic forms for the SDR view given a fixed beamformer.
    pub fn ris_quadratic(&self, u: &CVec) -> RisQuadratic {
        let n = self.n_ris();
        let np1 = n + 1;
        let mut g0 = CMat::zeros(np1, np1);
        let mut m = CMat::zeros(np1, np1);
        for i in 0..self.channels.n_tx() {
            // w_i = Ĥ_iᴴ u  (length N+1)
            let refl = self.channels.z(i).ad_mul(u);
            let mut w = CVec::zeros(np1);
            w.rows_mut(0, n).copy_from(&refl.column(0));
            if self.channels.visible(i) {
                w[n] = self.channels.h_rt(i).dotc(u);
            }
            if i == 0 {
                g0.gerc(Cx::new(self.powers[0], 0.0), &w, &w.clone(), Cx::new(1.0, 0.0));
            } else {
                m.gerc(Cx::new(self.powers[i], 0.0), &w, &w.clone(), Cx::new(1.0, 0.0));
            }
        }
        let z = self.noise.zeta.value();
        let diag = self.rho_total / self.n_ris() as f64 + z * self.noise.sigma_m2_sq;
        for k in 0..np1 {
            m[(k, k)] += Cx::new(diag, 0.0);
        }
        let alpha = self.noise.sigma_w_sq + z * (self.noise.sigma_m1_sq - self.noise.sigma_m2_sq)
            - self.rho_total / self.n_ris() as f64;
        RisQuadratic { g0, m, alpha }
    }

    /// Rank-one factored fractional forms for GD given a fixed beamformer.
    pub fn gd_forms(&self, u: &CVec) -> GdForms {
        let n_tx = self.channels.n_tx();
        let mut v = Vec::with_capacity(n_tx);
        let mut w = Vec::with_capacity(n_tx);
        for i in 0..n_tx {
            v.push(self.channels.z(i).ad_mul(u).column(0).into_owned());
            w.push(if self.channels.visible(i) {
                u.dotc(self.channels.h_rt(i))
            } else {
                Cx::new(0.0, 0.0)
            });
        }
        let z = self.noise.zeta.value();
        let k_diag = (self.rho_total + self.noise.sigma_w_sq + z * self.noise.sigma_m1_sq)
            / self.n_ris() as f64
            + z * self.noise.sigma_m2_sq;
        GdForms {
            v,
            w,
            powers: self.powers.clone(),
            k_diag,
            n_ris: self.n_ris(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::standard_complex_normal;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::testutil::{random_context, random_unit_vector};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn thermal_noise_conversion() {
        let sigma = thermal_noise_variance_w(-174.0, 10e9);
        assert_relative_eq!(sigma, 10f64.powf(-17.4) * 1e-3 * 1e10, max_relative = 1e-15);
        assert_relative_eq!(sigma, 3.9810717055349695e-11, max_relative = 1e-14);
    }

    #[test]
    fn molecular_noise_lossless_medium_is_zero() {
        // Dry air: k = 0, τ = 1 on every link.
        let spec = crate::geometry::PlacementSpec {
            wavelength_m: SPEED_OF_LIGHT / 220e9,
            n_ris: 16,
            n_rx: 16,
            ris_offset_m: 1.0,
            tx_spherical: vec![(1.0, 1.0, 0.0), (1.5, 1.9, 0.0)],
        };
        let scene = crate::geometry::place_scenario(&spec).unwrap();
        let dry = atmosphere::AtmosphereConfig::new(0.0, 1013.25, 27.0).unwrap();
        let budget = molecular_noise(
            &scene,
            &[2.0, 2.0],
            &[true, true],
            &dry,
            Zeta::Noise,
            220e9,
            1e-11,
        )
        .unwrap();
        assert_eq!(budget.sigma_m_sq, 0.0);
        assert_eq!(budget.effective_noise(), 1e-11);
    }

    #[test]
    fn molecular_noise_matches_scalar_oracle_at_defaults() {
        let spec = crate::geometry::PlacementSpec {
            wavelength_m: SPEED_OF_LIGHT / 220e9,
            n_ris: 100,
            n_rx: 100,
            ris_offset_m: 1.0,
            tx_spherical: vec![
                (1.0, 60f64.to_radians(), 0.0),
                (1.5, 110f64.to_radians(), 0.0),
            ],
        };
        let scene = crate::geometry::place_scenario(&spec).unwrap();
        let atm = atmosphere::AtmosphereConfig::default();
        let budget = molecular_noise(
            &scene,
            &[2.0, 2.0],
            &[false, true],
            &atm,
            Zeta::Noise,
            220e9,
            3.98e-11,
        )
        .unwrap();

        // Independent scalar re-derivation chaining the transmittance.
        let f = 220e9;
        let tau = |d: f64| atmosphere::transmittance(f, d, &atm).unwrap();
        let c = SPEED_OF_LIGHT;
        let m1_1 = (c / (4.0 * PI * f * 1.5)).powi(2) * 2.0 * (1.0 - tau(1.5));
        let d_g0 = scene.links[0].d_ris_m;
        let m2_0 = (c * c / (16.0 * (PI * f).powi(2) * 1.0 * d_g0)).powi(2)
            * 2.0
            * (1.0 - tau(1.0) * tau(d_g0));
        let d_g1 = scene.links[1].d_ris_m;
        let m2_1 = (c * c / (16.0 * (PI * f).powi(2) * 1.0 * d_g1)).powi(2)
            * 2.0
            * (1.0 - tau(1.0) * tau(d_g1));

        assert_eq!(budget.sigma_m1_i_sq[0], 0.0); // blocked signal direct path
        assert_relative_eq!(budget.sigma_m1_i_sq[1], m1_1, max_relative = 1e-12);
        assert_relative_eq!(budget.sigma_m2_i_sq[0], m2_0, max_relative = 1e-12);
        assert_relative_eq!(budget.sigma_m2_i_sq[1], m2_1, max_relative = 1e-12);
        assert_relative_eq!(
            budget.sigma_m_sq,
            m1_1 + 100.0 * (m2_0 + m2_1),
            max_relative = 1e-12
        );
        // Frozen value for the interferer direct path.
        assert_relative_eq!(budget.sigma_m1_i_sq[1], 6.0367976536477e-12, max_relative = 1e-9);
    }

    #[test]
    fn molecular_noise_scales_linearly_in_power() {
        let spec = crate::geometry::PlacementSpec {
            wavelength_m: SPEED_OF_LIGHT / 220e9,
            n_ris: 16,
            n_rx: 16,
            ris_offset_m: 1.0,
            tx_spherical: vec![(1.0, 1.0, 0.0)],
        };
        let scene = crate::geometry::place_scenario(&spec).unwrap();
        let atm = atmosphere::AtmosphereConfig::default();
        let one =
            molecular_noise(&scene, &[1.0], &[true], &atm, Zeta::Noise, 220e9, 1e-11).unwrap();
        let three =
            molecular_noise(&scene, &[3.0], &[true], &atm, Zeta::Noise, 220e9, 1e-11).unwrap();
        assert_relative_eq!(three.sigma_m_sq, 3.0 * one.sigma_m_sq, max_relative = 1e-12);
    }

    #[test]
    fn error_covariance_examples() {
        let err = CsiErrorParams::uniform(1, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(
            error_covariance_scale(&err, 0, 100, true),
            1.01e-11,
            max_relative = 1e-12
        );
        let zero = CsiErrorParams::perfect(1);
        assert_eq!(error_covariance_scale(&zero, 0, 100, true), 0.0);
        // Blocked direct link drops the ρ' term.
        assert_relative_eq!(
            error_covariance_scale(&err, 0, 100, false),
            1e-11,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sinr_noise_only_denominator() {
        let mut r = rng(3);
        // No interferers, perfect CSI, ζ=0 molecular-free: denominator = σ_w².
        let n_rx = 4;
        let n = 6;
        let z0 = CMat::from_fn(n_rx, n, |_, _| standard_complex_normal(&mut r));
        let h0 = CVec::from_fn(n_rx, |_, _| standard_complex_normal(&mut r));
        let channels = ChannelSet::new(vec![z0.clone()], vec![h0.clone()], vec![true]).unwrap();
        let noise = NoiseBudget::thermal_only(Zeta::Scattering, 0.5, 1, n).unwrap();
        let ctx =
            SinrContext::new(channels, vec![2.0], noise, CsiErrorParams::perfect(1)).unwrap();
        let u = random_unit_vector(n_rx, &mut r);
        let phases = RisPhases::random(n, &mut r);
        let got = ctx.sinr(&u, &phases);
        let e0 = &z0 * phases.theta() + &h0;
        let expect = 2.0 * u.dotc(&e0).norm_sqr() / 0.5;
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn sinr_invariant_under_beamformer_phase() {
        let mut r = rng(5);
        let ctx = random_context(4, 8, 2, Zeta::Noise, true, &mut r);
        let u = random_unit_vector(4, &mut r);
        let phases = RisPhases::random(8, &mut r);
        let g1 = ctx.sinr(&u, &phases);
        let rot = Cx::new(0.0, 1.234).exp();
        let u_rot = &u * rot;
        let g2 = ctx.sinr(&u_rot, &phases);
        assert_relative_eq!(g1, g2, max_relative = 1e-12);
    }

    #[test]
    fn three_sinr_forms_agree() {
        let mut r = rng(7);
        for zeta in [Zeta::Scattering, Zeta::Noise] {
            for robust in [false, true] {
                for _ in 0..10 {
                    let ctx = random_context(4, 8, 2, zeta, robust, &mut r);
                    let u = random_unit_vector(4, &mut r);
                    let phases = RisPhases::random(8, &mut r);

                    let direct = ctx.sinr(&u, &phases);
                    let quad = ctx.ris_quadratic(&u);
                    let via_quad = quad.gamma(&phases.theta0());
                    let theta0 = phases.theta0();
                    let psi = &theta0 * theta0.adjoint();
                    let via_trace = quad.trace_gamma(&psi);
                    let via_fractional = ctx.gd_forms(&u).gamma(phases.theta());

                    assert_relative_eq!(direct, via_quad, max_relative = 1e-9);
                    assert_relative_eq!(direct, via_trace, max_relative = 1e-9);
                    assert_relative_eq!(direct, via_fractional, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn quadratic_denominator_matches_direct_denominator() {
        // θ0ᴴ M θ0 + α reproduces the direct denominator (uses θ0ᴴθ0 = N+1).
        let mut r = rng(11);
        let ctx = random_context(4, 8, 2, Zeta::Noise, true, &mut r);
        let u = random_unit_vector(4, &mut r);
        let phases = RisPhases::random(8, &mut r);
        let quad = ctx.ris_quadratic(&u);
        let theta0 = phases.theta0();
        let den_quad = hermitian_quadratic(&quad.m, &theta0) + quad.alpha;

        let mut den_direct = ctx.noise_floor();
        for i in 1..ctx.channels().n_tx() {
            den_direct += ctx.powers()[i]
                * u.dotc(&ctx.channels().effective(i, phases.theta())).norm_sqr();
        }
        assert_relative_eq!(den_quad, den_direct, max_relative = 1e-10);
    }

    #[test]
    fn context_matrices_are_hermitian() {
        let mut r = rng(13);
        let ctx = random_context(5, 7, 2, Zeta::Noise, true, &mut r);
        let u = random_unit_vector(5, &mut r);
        let quad = ctx.ris_quadratic(&u);
        assert!((&quad.m - quad.m.adjoint()).norm() < 1e-12);
        assert!((&quad.g0 - quad.g0.adjoint()).norm() < 1e-12);
        let forms = ctx.gd_forms(&u);
        let k = forms.k_matrix();
        assert!((&k - k.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn no_interference_perfect_csi_zeta_zero_forms() {
        let mut r = rng(17);
        let n = 6;
        let channels = ChannelSet::new(
            vec![CMat::from_fn(4, n, |_, _| standard_complex_normal(&mut r))],
            vec![CVec::from_fn(4, |_, _| standard_complex_normal(&mut r))],
            vec![true],
        )
        .unwrap();
        let noise = NoiseBudget::thermal_only(Zeta::Scattering, 0.7, 1, n).unwrap();
        let ctx =
            SinrContext::new(channels, vec![1.0], noise, CsiErrorParams::perfect(1)).unwrap();
        let u = random_unit_vector(4, &mut r);
        let quad = ctx.ris_quadratic(&u);
        // M reduces to the zero matrix and α to σ_w².
        assert!(quad.m.norm() == 0.0);
        assert_relative_eq!(quad.alpha, 0.7, max_relative = 1e-15);
    }

    #[test]
    fn fractional_form_matches_materialized_matrices() {
        let mut r = rng(19);
        let ctx = random_context(4, 6, 2, Zeta::Noise, true, &mut r);
        let u = random_unit_vector(4, &mut r);
        let forms = ctx.gd_forms(&u);
        let phases = RisPhases::random(6, &mut r);
        let theta = phases.theta();

        let r0 = forms.r_matrix(0);
        let k = forms.k_matrix();
        let c0 = forms.c_row(0);
        let z = forms.z_row();
        let num = (theta.adjoint() * &r0 * theta)[(0, 0)].re + 2.0 * (&c0 * theta)[(0, 0)].re;
        let den = (theta.adjoint() * &k * theta)[(0, 0)].re + 2.0 * (&z * theta)[(0, 0)].re;

        assert_relative_eq!(forms.numerator(theta), num, max_relative = 1e-10);
        assert_relative_eq!(forms.denominator(theta), den, max_relative = 1e-10);
        // And the negated fractional objective equals -γ of the direct form.
        assert_relative_eq!(-(num / den), -ctx.sinr(&u, &phases), max_relative = 1e-9);
    }

    #[test]
    fn zeta_switch_moves_noise_between_channel_and_budget() {
        let mut r = rng(23);
        let n = 5;
        let z0 = CMat::from_fn(3, n, |_, _| standard_complex_normal(&mut r));
        let h0 = CVec::from_fn(3, |_, _| standard_complex_normal(&mut r));
        let channels = ChannelSet::new(vec![z0], vec![h0], vec![true]).unwrap();
        let m1 = vec![0.3];
        let m2 = vec![0.01];
        let mk = |zeta| {
            NoiseBudget::new(zeta, 1.0, m1.clone(), m2.clone(), n).unwrap()
        };
        assert_relative_eq!(
            mk(Zeta::Noise).effective_noise(),
            1.0 + 0.3 + n as f64 * 0.01,
            max_relative = 1e-15
        );
        assert_relative_eq!(mk(Zeta::Scattering).effective_noise(), 1.0, max_relative = 1e-15);
        let _ = channels;
    }
}
