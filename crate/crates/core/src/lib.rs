//! RIS-aided terahertz link simulator.
//!
//! The crate models a single-stream THz transmitter talking to a
//! multi-antenna receiver assisted by a passive reconfigurable intelligent
//! surface (RIS), in the presence of co-channel interferers. Molecular
//! absorption by atmospheric water vapor removes a fraction `1 - τ(f,d)` of
//! the signal power; the re-radiated energy is modeled either as additive
//! Gaussian noise (`ζ = 1`) or as an NLOS fading component (`ζ = 0`) of a
//! unified Rician channel.
//!
//! Modules:
//! - [`atmosphere`]: absorption coefficient, transmittance, Rician factor.
//! - [`geometry`]: URA layouts, wave vectors, array factors, node placement.
//! - [`channel`]: ζ-unified channel draws, stacked channels, CSI errors.
//! - [`linkmetrics`]: molecular noise budget and the SINR in its three
//!   algebraically equivalent forms.
//! - [`optimizers`]: analytical receive beamformer, signal-alignment and
//!   gradient-descent RIS solvers, and the outer block-coordinate driver.
//! - [`sdr`]: semidefinite-relaxation RIS solver (diagonal-constrained SDP,
//!   bisection, Gaussian randomization).
//! - [`analysis`]: closed-form one-element stationary points used as
//!   verification oracles.
//! - [`harness`]: scenario configuration, Monte Carlo experiment runners,
//!   throughput / 4-QAM SER metrics and CSV reporting.

pub mod analysis;
pub mod atmosphere;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linkmetrics;
pub mod optimizers;
pub mod sdr;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex scalar used throughout the crate.
pub type Cx = nalgebra::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMat = nalgebra::DMatrix<Cx>;
/// Dynamically sized complex column vector.
pub type CVec = nalgebra::DVector<Cx>;
/// Dynamically sized complex row vector (array factors are rows).
pub type CRow = nalgebra::RowDVector<Cx>;

/// Re-radiation manifestation switch.
///
/// `Noise` (ζ = 1) treats the absorbed-and-re-emitted power as additive
/// Gaussian noise and keeps the channel LOS-only. `Scattering` (ζ = 0)
/// removes the noise term and re-injects the power as an NLOS Rician
/// component. Exactly one manifestation is active at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zeta {
    /// ζ = 0: re-radiation appears as NLOS scattering.
    Scattering,
    /// ζ = 1: re-radiation appears as additive Gaussian noise.
    Noise,
}

impl Zeta {
    /// Numeric value of ζ as used in the channel and noise formulas.
    pub fn value(self) -> f64 {
        match self {
            Zeta::Scattering => 0.0,
            Zeta::Noise => 1.0,
        }
    }

    pub fn from_int(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Zeta::Scattering),
            1 => Ok(Zeta::Noise),
            other => Err(Error::InvalidInput(format!(
                "zeta must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl std::fmt::Display for Zeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value() as u8)
    }
}
