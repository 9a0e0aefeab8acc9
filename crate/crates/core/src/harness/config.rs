//! Scenario / solver / experiment configuration, loadable from TOML.
//!
//! Every field has a default matching the reference simulation setup:
//! 220 GHz carrier over 10 GHz bandwidth, 50% RH at 1 atm and 27 °C,
//! 100-element RIS and 100-antenna Rx in square URAs, 2 W transmitters,
//! -174 dBm/Hz thermal noise, signal direct path blocked.

use crate::channel::CsiErrorParams;
use crate::geometry::PlacementSpec;
use crate::optimizers::{BcdParams, GdParams, SubSolver};
use crate::sdr::SdrParams;
use crate::{atmosphere::AtmosphereConfig, Error, Result, Zeta};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Direct-link availability policy for the interferers ('ND'/'D') or a
/// Bernoulli trial per Monte Carlo realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    /// No direct links (P_L = 0).
    Nd,
    /// Direct links always present (P_L = 1).
    D,
    /// Direct link present with the configured probability.
    Bernoulli,
}

/// Signal direct-path policy; the reference experiments block it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalDirect {
    Blocked,
    Present,
    Bernoulli,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub relative_humidity_percent: f64,
    pub pressure_hpa: f64,
    pub temperature_c: f64,
    /// N: RIS element count (perfect square).
    pub ris_elements: usize,
    /// N_R: receive antenna count (perfect square).
    pub rx_antennas: usize,
    /// N_I: number of co-channel interferers.
    pub interferers: usize,
    pub tx_power_w: f64,
    pub interferer_power_w: f64,
    pub noise_dbm_per_hz: f64,
    /// 0 = re-radiation as NLOS scattering, 1 = as additive noise.
    pub zeta: u8,
    pub interferer_visibility: Visibility,
    pub interferer_los_probability: f64,
    pub signal_direct: SignalDirect,
    pub signal_los_probability: f64,
    /// η1²: CSI error variance of the signal links (reflected and direct).
    pub eta1_sq: f64,
    /// η2²: CSI error variance of every interferer link.
    pub eta2_sq: f64,
    /// When false the optimizer assumes the estimates are exact.
    pub robust: bool,
    /// RIS corner translation along +x from the Rx corner, meters.
    pub ris_offset_m: f64,
    /// Signal Tx position: (r meters, azimuth degrees, elevation degrees).
    pub tx_position: [f64; 3],
    /// Interferer position used when there is exactly one interferer.
    pub interferer_position: [f64; 3],
    /// Ring radius used when there are two or more interferers.
    pub interferer_ring_radius_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 220e9,
            bandwidth_hz: 10e9,
            relative_humidity_percent: 50.0,
            pressure_hpa: 1013.25,
            temperature_c: 27.0,
            ris_elements: 100,
            rx_antennas: 100,
            interferers: 1,
            tx_power_w: 2.0,
            interferer_power_w: 2.0,
            noise_dbm_per_hz: -174.0,
            zeta: 0,
            interferer_visibility: Visibility::Nd,
            interferer_los_probability: 0.5,
            signal_direct: SignalDirect::Blocked,
            signal_los_probability: 0.5,
            eta1_sq: 0.0,
            eta2_sq: 0.0,
            robust: true,
            ris_offset_m: 1.0,
            tx_position: [1.0, 60.0, 0.0],
            interferer_position: [1.5, 110.0, 0.0],
            interferer_ring_radius_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub sub_solver: String,
    pub bcd_rel_tol: f64,
    pub bcd_max_outer_iters: usize,
    pub gd_epsilon_armijo: f64,
    pub gd_shrink: f64,
    pub gd_beta0: f64,
    pub gd_tol: f64,
    pub gd_max_iters: usize,
    pub sdr_bisection_hi: f64,
    pub sdr_bisection_tol: f64,
    pub sdr_randomization_count: usize,
    pub sdp_tol: f64,
    pub sdp_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let bcd = BcdParams::default();
        Self {
            sub_solver: "gd".into(),
            bcd_rel_tol: bcd.rel_tol,
            bcd_max_outer_iters: bcd.max_outer_iters,
            gd_epsilon_armijo: bcd.gd.epsilon_armijo,
            gd_shrink: bcd.gd.shrink,
            gd_beta0: bcd.gd.beta0,
            gd_tol: bcd.gd.tol,
            gd_max_iters: bcd.gd.max_iters,
            sdr_bisection_hi: bcd.sdr.bisection_hi,
            sdr_bisection_tol: bcd.sdr.bisection_tol,
            sdr_randomization_count: bcd.sdr.randomization_count,
            sdp_tol: bcd.sdr.sdp_tol,
            sdp_max_iters: bcd.sdr.sdp_max_iters,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Monte Carlo trials per sweep point (the reference runs use 2000;
    /// the desk-scale default is 200).
    pub trials: usize,
    /// 4-QAM symbols per SER trial (reference: 1e6; desk default 1e5).
    pub symbols_per_trial: usize,
    pub seed: u64,
    /// BCD iterations timed per solver by the runtime experiment.
    pub runtime_outer_iters: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            symbols_per_trial: 100_000,
            seed: 1,
            runtime_outer_iters: 3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if !(s.frequency_hz > 0.0) || !(s.bandwidth_hz > 0.0) {
            return Err(Error::Config("frequency and bandwidth must be positive".into()));
        }
        self.atmosphere()?;
        let square = |n: usize| {
            let side = (n as f64).sqrt().round() as usize;
            side * side == n && n > 0
        };
        if !square(s.ris_elements) {
            return Err(Error::Config(format!(
                "ris_elements = {} is not a perfect square",
                s.ris_elements
            )));
        }
        if !square(s.rx_antennas) {
            return Err(Error::Config(format!(
                "rx_antennas = {} is not a perfect square",
                s.rx_antennas
            )));
        }
        if s.tx_power_w < 0.0 || s.interferer_power_w < 0.0 {
            return Err(Error::Config("transmit powers must be non-negative".into()));
        }
        Zeta::from_int(s.zeta).map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&s.interferer_los_probability)
            || !(0.0..=1.0).contains(&s.signal_los_probability)
        {
            return Err(Error::Config("LOS probabilities must be in [0,1]".into()));
        }
        if s.eta1_sq < 0.0 || s.eta2_sq < 0.0 {
            return Err(Error::Config("CSI error variances must be >= 0".into()));
        }
        if s.tx_position[0] <= 0.0 || (s.interferers == 1 && s.interferer_position[0] <= 0.0) {
            return Err(Error::Config("node ranges must be positive".into()));
        }
        if s.interferers >= 2 && s.interferer_ring_radius_m <= 0.0 {
            return Err(Error::Config("interferer ring radius must be positive".into()));
        }
        if s.ris_offset_m <= 0.0 {
            return Err(Error::Config("ris_offset_m must be positive".into()));
        }
        self.sub_solver()?;
        self.bcd_params()?.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.experiment.trials == 0 || self.experiment.symbols_per_trial == 0 {
            return Err(Error::Config("trials and symbols_per_trial must be >= 1".into()));
        }
        if self.experiment.runtime_outer_iters == 0 {
            return Err(Error::Config("runtime_outer_iters must be >= 1".into()));
        }
        Ok(())
    }

    pub fn atmosphere(&self) -> Result<AtmosphereConfig> {
        AtmosphereConfig::new(
            self.scenario.relative_humidity_percent,
            self.scenario.pressure_hpa,
            self.scenario.temperature_c,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn zeta(&self) -> Zeta {
        Zeta::from_int(self.scenario.zeta).expect("validated")
    }

    pub fn sub_solver(&self) -> Result<SubSolver> {
        self.solver
            .sub_solver
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))
    }

    pub fn bcd_params(&self) -> Result<BcdParams> {
        Ok(BcdParams {
            rel_tol: self.solver.bcd_rel_tol,
            max_outer_iters: self.solver.bcd_max_outer_iters,
            sub_solver: self.sub_solver()?,
            gd: GdParams {
                epsilon_armijo: self.solver.gd_epsilon_armijo,
                shrink: self.solver.gd_shrink,
                beta0: self.solver.gd_beta0,
                tol: self.solver.gd_tol,
                max_iters: self.solver.gd_max_iters,
            },
            sdr: SdrParams {
                bisection_hi: self.solver.sdr_bisection_hi,
                bisection_tol: self.solver.sdr_bisection_tol,
                randomization_count: self.solver.sdr_randomization_count,
                sdp_tol: self.solver.sdp_tol,
                sdp_max_iters: self.solver.sdp_max_iters,
            },
        })
    }

    /// Per-transmitter powers, index 0 = signal.
    pub fn powers(&self) -> Vec<f64> {
        let mut p = vec![self.scenario.tx_power_w];
        p.extend(std::iter::repeat(self.scenario.interferer_power_w).take(self.scenario.interferers));
        p
    }

    /// CSI error variances actually applied to the channel estimates:
    /// η1² on the signal links, η2² on every interferer link.
    pub fn csi_errors(&self) -> CsiErrorParams {
        let n_tx = self.scenario.interferers + 1;
        let mut rho_sq = vec![self.scenario.eta1_sq];
        let mut rho_prime_sq = vec![self.scenario.eta1_sq];
        rho_sq.extend(std::iter::repeat(self.scenario.eta2_sq).take(n_tx - 1));
        rho_prime_sq.extend(std::iter::repeat(self.scenario.eta2_sq).take(n_tx - 1));
        CsiErrorParams { rho_sq, rho_prime_sq }
    }

    /// Node placement: configured position for a single interferer, evenly
    /// spaced ring of the configured radius for two or more.
    pub fn placement(&self) -> PlacementSpec {
        let s = &self.scenario;
        let deg = PI / 180.0;
        let mut tx = vec![(
            s.tx_position[0],
            s.tx_position[1] * deg,
            s.tx_position[2] * deg,
        )];
        match s.interferers {
            0 => {}
            1 => tx.push((
                s.interferer_position[0],
                s.interferer_position[1] * deg,
                s.interferer_position[2] * deg,
            )),
            n => {
                for k in 0..n {
                    let az = -PI + (k as f64 + 0.5) * (2.0 * PI / n as f64);
                    tx.push((s.interferer_ring_radius_m, az, 0.0));
                }
            }
        }
        PlacementSpec {
            wavelength_m: crate::SPEED_OF_LIGHT / s.frequency_hz,
            n_ris: s.ris_elements,
            n_rx: s.rx_antennas,
            ris_offset_m: s.ris_offset_m,
            tx_spherical: tx,
        }
    }

    pub fn sigma_w_sq(&self) -> f64 {
        crate::linkmetrics::thermal_noise_variance_w(
            self.scenario.noise_dbm_per_hz,
            self.scenario.bandwidth_hz,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_reference_setup() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.scenario.frequency_hz, 220e9);
        assert_eq!(cfg.scenario.ris_elements, 100);
        assert_eq!(cfg.scenario.rx_antennas, 100);
        assert_eq!(cfg.scenario.tx_power_w, 2.0);
        assert_eq!(cfg.scenario.noise_dbm_per_hz, -174.0);
        assert_eq!(cfg.experiment.trials, 200);
        assert!(matches!(cfg.scenario.signal_direct, SignalDirect::Blocked));
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [scenario]
            ris_elements = 16
            zeta = 1
            interferer_visibility = "d"

            [experiment]
            trials = 7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario.ris_elements, 16);
        assert_eq!(cfg.scenario.zeta, 1);
        assert!(matches!(cfg.scenario.interferer_visibility, Visibility::D));
        assert_eq!(cfg.experiment.trials, 7);
        assert_eq!(cfg.scenario.rx_antennas, 100);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_toml_str("[scenario]\nris_elements = 10\n").is_err());
        assert!(RunConfig::from_toml_str("[scenario]\nzeta = 2\n").is_err());
        assert!(RunConfig::from_toml_str("[solver]\nsub_solver = \"newton\"\n").is_err());
        assert!(RunConfig::from_toml_str("[scenario]\nunknown_key = 1\n").is_err());
    }

    #[test]
    fn ring_placement_for_many_interferers() {
        let mut cfg = RunConfig::default();
        cfg.scenario.interferers = 4;
        let spec = cfg.placement();
        assert_eq!(spec.tx_spherical.len(), 5);
        for (r, az, el) in &spec.tx_spherical[1..] {
            assert_eq!(*r, 2.0);
            assert!((-PI..PI).contains(az));
            assert_eq!(*el, 0.0);
        }
        // Evenly spaced and distinct.
        let mut azs: Vec<f64> = spec.tx_spherical[1..].iter().map(|t| t.1).collect();
        azs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in azs.windows(2) {
            assert!((w[1] - w[0] - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_mapping_to_error_params() {
        let mut cfg = RunConfig::default();
        cfg.scenario.interferers = 2;
        cfg.scenario.eta1_sq = 1e-12;
        cfg.scenario.eta2_sq = 1e-11;
        let err = cfg.csi_errors();
        assert_eq!(err.rho_sq, vec![1e-12, 1e-11, 1e-11]);
        assert_eq!(err.rho_prime_sq, vec![1e-12, 1e-11, 1e-11]);
    }
}
