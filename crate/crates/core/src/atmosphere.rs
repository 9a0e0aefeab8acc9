//! Molecular absorption by atmospheric water vapor in the 200–450 GHz band.
//!
//! The absorption coefficient `k(f)` is a sum of four Lorentzian-shaped
//! water-vapor absorption lines (centered near 325, 380, 439 and 448 GHz)
//! plus a polynomial equalization term, all scaled by the volume mixing
//! ratio of water vapor. From `k(f)` follow the transmittance
//! `τ(f,d) = exp(-k(f)·d)` and the Rician factor `K_d = τ/(1-τ)` that
//! splits channel power between LOS and re-radiated NLOS components.

use crate::{Error, Result, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};

/// Atmospheric state driving the absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtmosphereConfig {
    /// Relative humidity φ in percent, 0–100.
    pub relative_humidity_percent: f64,
    /// Barometric pressure in hectopascals (1 atm = 1013.25 hPa).
    pub pressure_hpa: f64,
    /// Temperature in degrees Celsius.
    pub temperature_c: f64,
}

impl Default for AtmosphereConfig {
    /// 50% RH, 1 atm, 27 °C.
    fn default() -> Self {
        Self {
            relative_humidity_percent: 50.0,
            pressure_hpa: 1013.25,
            temperature_c: 27.0,
        }
    }
}

impl AtmosphereConfig {
    pub fn new(relative_humidity_percent: f64, pressure_hpa: f64, temperature_c: f64) -> Result<Self> {
        let cfg = Self {
            relative_humidity_percent,
            pressure_hpa,
            temperature_c,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.relative_humidity_percent)
            || !self.relative_humidity_percent.is_finite()
        {
            return Err(Error::InvalidInput(format!(
                "relative humidity must be in [0, 100] %, got {}",
                self.relative_humidity_percent
            )));
        }
        if !(self.pressure_hpa > 0.0) || !self.pressure_hpa.is_finite() {
            return Err(Error::InvalidInput(format!(
                "pressure must be positive, got {} hPa",
                self.pressure_hpa
            )));
        }
        if self.temperature_c <= BUCK_POLE_C || !self.temperature_c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "temperature must exceed {} °C, got {}",
                BUCK_POLE_C, self.temperature_c
            )));
        }
        Ok(())
    }
}

/// Temperature at which the Buck-equation exponent diverges.
const BUCK_POLE_C: f64 = -240.97;

/// Line centers p1..p4 in cm^-1 (≈ 325, 380, 439, 448 GHz).
pub const LINE_CENTERS_CM_INV: [f64; 4] = [10.84, 12.68, 14.65, 14.94];

/// Polynomial coefficients q1..q5 of the equalization term g(f, μ).
pub const POLY_COEFFS: [f64; 5] = [8.495e-48, -9.932e-36, 4.336e-24, -8.33e-13, 5.953e-2];

/// Validity band of the absorption model, Hz.
pub const VALIDITY_BAND_HZ: (f64, f64) = (200e9, 450e9);

/// Constants of the simplified water-vapor absorption model.
#[derive(Debug, Clone, Copy)]
pub struct AbsorptionModel {
    pub line_centers_cm_inv: [f64; 4],
    pub poly_coeffs: [f64; 5],
    pub validity_band_hz: (f64, f64),
}

impl Default for AbsorptionModel {
    fn default() -> Self {
        Self {
            line_centers_cm_inv: LINE_CENTERS_CM_INV,
            poly_coeffs: POLY_COEFFS,
            validity_band_hz: VALIDITY_BAND_HZ,
        }
    }
}

/// Saturation water-vapor pressure in hPa via the Buck equation.
///
/// `p_w(T, p) = 6.1121 (1.0007 + 3.46e-6 p) exp(17.502 T / (240.97 + T))`
/// with `p` in hPa and `T` in Celsius.
pub fn water_vapor_pressure(temperature_c: f64, pressure_hpa: f64) -> Result<f64> {
    if !(pressure_hpa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pressure must be positive, got {pressure_hpa} hPa"
        )));
    }
    if temperature_c <= BUCK_POLE_C || !temperature_c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "temperature must exceed {BUCK_POLE_C} °C, got {temperature_c}"
        )));
    }
    Ok(6.1121
        * (1.0007 + 3.46e-6 * pressure_hpa)
        * (17.502 * temperature_c / (240.97 + temperature_c)).exp())
}

/// Volume mixing ratio of water vapor, `μ = (φ/100) p_w(T,p) / p`.
pub fn volume_mixing_ratio(atm: &AtmosphereConfig) -> Result<f64> {
    atm.validate()?;
    let pw = water_vapor_pressure(atm.temperature_c, atm.pressure_hpa)?;
    Ok(atm.relative_humidity_percent / 100.0 * pw / atm.pressure_hpa)
}

fn lorentzian_line(wavenumber_cm_inv: f64, numerator: f64, width: f64, center: f64) -> f64 {
    let dev = wavenumber_cm_inv - center;
    numerator / (width + dev * dev)
}

/// Molecular absorption coefficient `k(f)` in 1/m.
///
/// Valid for 200–450 GHz; frequencies outside the band are accepted with a
/// warning. Each line term and the polynomial term carry a factor of μ, so
/// dry air (μ = 0) gives exactly zero absorption.
pub fn absorption_coefficient(frequency_hz: f64, atm: &AtmosphereConfig) -> Result<f64> {
    if !(frequency_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "frequency must be positive, got {frequency_hz} Hz"
        )));
    }
    if frequency_hz < VALIDITY_BAND_HZ.0 || frequency_hz > VALIDITY_BAND_HZ.1 {
        log::warn!(
            "absorption model evaluated at {:.3} GHz, outside its 200-450 GHz validity band",
            frequency_hz / 1e9
        );
    }
    let mu = volume_mixing_ratio(atm)?;
    let f = frequency_hz;
    // f/(100 c) converts frequency to wavenumber in cm^-1.
    let v = f / (100.0 * SPEED_OF_LIGHT);

    let a = 0.2251 * mu * (0.1314 * mu + 0.0297);
    let b = (0.4127 * mu + 0.0932).powi(2);
    let c = 2.053 * mu * (0.1717 * mu + 0.0306);
    let d = (0.5394 * mu + 0.0961).powi(2);
    let e = 0.177 * mu * (0.0832 * mu + 0.0213);
    let ff = (0.2615 * mu + 0.0668).powi(2);
    let g_num = 2.146 * mu * (0.1206 * mu + 0.0277);
    let h = (0.3789 * mu + 0.0871).powi(2);

    let [p1, p2, p3, p4] = LINE_CENTERS_CM_INV;
    let y1 = lorentzian_line(v, a, b, p1);
    let y2 = lorentzian_line(v, c, d, p2);
    let y3 = lorentzian_line(v, e, ff, p3);
    let y4 = lorentzian_line(v, g_num, h, p4);

    let [q1, q2, q3, q4, q5] = POLY_COEFFS;
    let g = mu / 0.0157 * (q1 * f.powi(4) + q2 * f.powi(3) + q3 * f.powi(2) + q4 * f + q5);

    Ok(y1 + y2 + y3 + y4 + g)
}

/// Transmittance `τ(f,d) = exp(-k(f)·d)` in (0, 1].
pub fn transmittance(frequency_hz: f64, distance_m: f64, atm: &AtmosphereConfig) -> Result<f64> {
    if !(distance_m >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "distance must be non-negative, got {distance_m} m"
        )));
    }
    let k = absorption_coefficient(frequency_hz, atm)?;
    Ok((-k * distance_m).exp())
}

/// Rician factor `K_d = τ/(1-τ)`, the LOS-to-NLOS power ratio.
///
/// Signals `Degenerate` when τ = 1 within machine tolerance (lossless
/// medium or zero distance), where the factor diverges.
pub fn rician_factor(frequency_hz: f64, distance_m: f64, atm: &AtmosphereConfig) -> Result<f64> {
    let tau = transmittance(frequency_hz, distance_m, atm)?;
    rician_factor_from_transmittance(tau)
}

/// `K_d` from an already-computed transmittance.
pub fn rician_factor_from_transmittance(tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidInput(format!(
            "transmittance must be in [0, 1], got {tau}"
        )));
    }
    if 1.0 - tau <= f64::EPSILON {
        return Err(Error::Degenerate(format!(
            "transmittance {tau} is 1 within machine tolerance; Rician factor diverges"
        )));
    }
    Ok(tau / (1.0 - tau))
}
