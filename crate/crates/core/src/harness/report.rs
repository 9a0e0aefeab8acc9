//! Experiment rows and CSV emission.
//!
//! Output is fully deterministic for a given (config, seed): floats are
//! written with Rust's shortest round-trip formatting and rows are emitted
//! in sweep/metric order.

use crate::{Error, Result};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ThroughputBps,
    Ser,
    RuntimeS,
    SinrDb,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Metric::ThroughputBps => "throughput_bps",
            Metric::Ser => "ser",
            Metric::RuntimeS => "runtime_s",
            Metric::SinrDb => "sinr_db",
        };
        write!(f, "{s}")
    }
}

/// One aggregated measurement at one sweep point.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    /// Sweep variable name, or "none".
    pub sweep: String,
    pub value: f64,
    pub solver: String,
    pub metric: Metric,
    pub mean: f64,
    /// 95% confidence half-width (binomial for SER, normal elsewhere,
    /// inter-quartile half-range for runtime medians).
    pub ci95: f64,
    pub trials: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "sweep,value,solver,metric,mean,ci95_half_width,trials,seed";

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.sweep, r.value, r.solver, r.metric, r.mean, r.ci95, r.trials, r.seed
        ));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ExperimentRow]) -> Result<()> {
    std::fs::write(path, to_csv(rows)).map_err(Error::Io)
}

/// Mean and 95% normal-approximation half-width of a sample.
pub fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

/// Median and inter-quartile half-range.
pub fn median_iqr(samples: &[f64]) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let med = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
    let q1 = s[n / 4];
    let q3 = s[((3 * n) / 4).min(n - 1)];
    (med, 0.5 * (q3 - q1).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![ExperimentRow {
            sweep: "N".into(),
            value: 16.0,
            solver: "gd".into(),
            metric: Metric::ThroughputBps,
            mean: 1.234e10,
            ci95: 5.6e8,
            trials: 200,
            seed: 1,
        }];
        assert_eq!(to_csv(&rows), to_csv(&rows));
        assert!(to_csv(&rows).starts_with(CSV_HEADER));
        assert_eq!(to_csv(&rows).lines().count(), 2);
    }

    #[test]
    fn mean_ci_basics() {
        let (m, ci) = mean_ci(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!(ci > 0.0);
        let (m1, ci1) = mean_ci(&[5.0]);
        assert_eq!(m1, 5.0);
        assert_eq!(ci1, 0.0);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median_iqr(&[3.0, 1.0, 2.0]).0, 2.0);
        assert_eq!(median_iqr(&[4.0, 1.0, 2.0, 3.0]).0, 2.5);
    }
}
