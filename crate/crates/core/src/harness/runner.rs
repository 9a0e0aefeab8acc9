//! Seeded Monte Carlo experiment runners.
//!
//! Each trial owns three counter-derived RNG streams (channels, optimizer,
//! symbols) split from the master seed, so paired configurations that share
//! a seed see identical channel realizations and symbol noise regardless of
//! how much randomness the optimizer consumes. Trials run on a worker pool
//! (capped by `RIS_THZ_THREADS`) and are aggregated in trial order, making
//! the CSV output byte-identical across runs and thread counts.

use crate::channel::{corrupt_csi, draw_channel_set, CsiErrorParams};
use crate::geometry::ScenarioGeometry;
use crate::harness::config::{RunConfig, SignalDirect, Visibility};
use crate::harness::metrics::{simulate_ser, throughput_bps, ScalarLink};
use crate::harness::report::{mean_ci, median_iqr, ExperimentRow, Metric};
use crate::linkmetrics::{molecular_noise, SinrContext};
use crate::optimizers::{bcd, OptimizationResult, SubSolver};
use crate::{atmosphere::AtmosphereConfig, Cx, Error, Result, Zeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// RNG sub-stream purposes within one trial.
#[derive(Clone, Copy)]
enum Stream {
    Channels = 0,
    Optimizer = 1,
    Symbols = 2,
}

fn trial_rng(seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial * 4 + stream as u64);
    rng
}

/// Sweepable configuration variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    RisElements,
    RxAntennas,
    Interferers,
    Eta1Sq,
    Eta2Sq,
    FrequencyHz,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::RisElements => "N",
            SweepVar::RxAntennas => "NR",
            SweepVar::Interferers => "NI",
            SweepVar::Eta1Sq => "eta1_sq",
            SweepVar::Eta2Sq => "eta2_sq",
            SweepVar::FrequencyHz => "frequency_hz",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parses "N=16,36,64,100" style sweep specifications.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, list) = text
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep '{text}' is not var=v1,v2,...")))?;
        let var = match name.trim() {
            "N" => SweepVar::RisElements,
            "NR" => SweepVar::RxAntennas,
            "NI" => SweepVar::Interferers,
            "eta1_sq" => SweepVar::Eta1Sq,
            "eta2_sq" => SweepVar::Eta2Sq,
            "frequency_hz" => SweepVar::FrequencyHz,
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep variable '{other}' (expected N, NR, NI, eta1_sq, eta2_sq, frequency_hz)"
                )))
            }
        };
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad sweep value '{v}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        Ok(Self { var, values })
    }

    pub fn apply(&self, cfg: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut out = cfg.clone();
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(Error::Config(format!("{what} sweep value {v} is not a count")));
            }
            Ok(v as usize)
        };
        match self.var {
            SweepVar::RisElements => out.scenario.ris_elements = as_count(value, "N")?,
            SweepVar::RxAntennas => out.scenario.rx_antennas = as_count(value, "NR")?,
            SweepVar::Interferers => out.scenario.interferers = as_count(value, "NI")?,
            SweepVar::Eta1Sq => out.scenario.eta1_sq = value,
            SweepVar::Eta2Sq => out.scenario.eta2_sq = value,
            SweepVar::FrequencyHz => out.scenario.frequency_hz = value,
        }
        out.validate()?;
        Ok(out)
    }
}

/// Geometry and derived quantities shared by every trial of one sweep point.
struct TrialEnv {
    cfg: RunConfig,
    scene: ScenarioGeometry,
    atm: AtmosphereConfig,
    zeta: Zeta,
    powers: Vec<f64>,
    sigma_w_sq: f64,
    csi_err: CsiErrorParams,
}

impl TrialEnv {
    fn build(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            scene: crate::geometry::place_scenario(&cfg.placement())?,
            atm: cfg.atmosphere()?,
            zeta: cfg.zeta(),
            powers: cfg.powers(),
            sigma_w_sq: cfg.sigma_w_sq(),
            csi_err: cfg.csi_errors(),
        })
    }

    fn draw_visibility<R: Rng>(&self, rng: &mut R) -> Vec<bool> {
        let s = &self.cfg.scenario;
        let mut vis = Vec::with_capacity(self.powers.len());
        vis.push(match s.signal_direct {
            SignalDirect::Blocked => false,
            SignalDirect::Present => true,
            SignalDirect::Bernoulli => rng.random_bool(s.signal_los_probability),
        });
        for _ in 0..s.interferers {
            vis.push(match s.interferer_visibility {
                Visibility::Nd => false,
                Visibility::D => true,
                Visibility::Bernoulli => rng.random_bool(s.interferer_los_probability),
            });
        }
        vis
    }
}

/// One optimized Monte Carlo realization, evaluated on the true channels.
struct TrialOutcome {
    gamma_true: f64,
    result: OptimizationResult,
    /// Effective-gain link for symbol streaming.
    link: ScalarLink,
}

fn run_trial(env: &TrialEnv, trial: u64) -> Result<TrialOutcome> {
    let seed = env.cfg.experiment.seed;
    let mut rng_ch = trial_rng(seed, trial, Stream::Channels);
    let vis = env.draw_visibility(&mut rng_ch);
    let truth = draw_channel_set(
        &env.scene,
        &env.atm,
        env.zeta,
        env.cfg.scenario.frequency_hz,
        &vis,
        &mut rng_ch,
    )?;
    let estimated = corrupt_csi(&truth, &env.csi_err, &mut rng_ch)?;
    let budget = molecular_noise(
        &env.scene,
        &env.powers,
        &vis,
        &env.atm,
        env.zeta,
        env.cfg.scenario.frequency_hz,
        env.sigma_w_sq,
    )?;

    let assumed_err = if env.cfg.scenario.robust {
        env.csi_err.clone()
    } else {
        CsiErrorParams::perfect(env.powers.len())
    };
    let ctx = SinrContext::new(estimated.clone(), env.powers.clone(), budget.clone(), assumed_err)?;

    let mut rng_opt = trial_rng(seed, trial, Stream::Optimizer);
    let result = bcd(&ctx, &env.cfg.bcd_params()?, &mut rng_opt)?;

    // Realized performance on the true channels, no estimation-error terms.
    let true_ctx = SinrContext::new(
        truth,
        env.powers.clone(),
        budget.clone(),
        CsiErrorParams::perfect(env.powers.len()),
    )?;
    let gamma_true = true_ctx.sinr(&result.u_star, &result.phases_star);

    let theta = result.phases_star.theta();
    let gains: Vec<Cx> = (0..env.powers.len())
        .map(|i| {
            result.u_star.dotc(&true_ctx.channels().effective(i, theta))
                * env.powers[i].sqrt()
        })
        .collect();
    let detection_gain = result.u_star.dotc(&ctx.channels().effective(0, theta))
        * env.powers[0].sqrt();
    let link = ScalarLink {
        gains,
        detection_gain,
        noise_var: budget.effective_noise(),
    };

    Ok(TrialOutcome { gamma_true, result, link })
}

fn worker_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("RIS_THZ_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("worker pool")
}

fn sweep_points(cfg: &RunConfig, sweep: Option<&Sweep>) -> Result<Vec<(String, f64, RunConfig)>> {
    match sweep {
        None => Ok(vec![("none".into(), 0.0, cfg.clone())]),
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((s.var.name().to_string(), v, s.apply(cfg, v)?)))
            .collect(),
    }
}

/// Collects per-trial values in trial order, logging and excluding failures.
fn collect_trials<T: Send>(
    env: &TrialEnv,
    trials: usize,
    f: impl Fn(&TrialEnv, u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let pool = worker_pool();
    let results: Vec<(u64, Result<T>)> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| (t, f(env, t)))
            .collect()
    });
    let mut ok = Vec::with_capacity(trials);
    let mut failed = 0usize;
    for (t, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                log::warn!("trial {t} failed and was excluded: {e}");
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::SolverFailure(format!(
            "all {trials} trials failed (last cause logged)"
        )));
    }
    if failed > 0 {
        log::warn!("{failed}/{trials} trials excluded from aggregation");
    }
    Ok(ok)
}

/// Mean throughput (and the consistent effective SINR) per sweep point.
pub fn run_throughput(cfg: &RunConfig, sweep: Option<&Sweep>) -> Result<Vec<ExperimentRow>> {
    let solver = cfg.sub_solver()?;
    let mut rows = Vec::new();
    for (name, value, point_cfg) in sweep_points(cfg, sweep)? {
        let env = TrialEnv::build(&point_cfg)?;
        let bandwidth = point_cfg.scenario.bandwidth_hz;
        let samples = collect_trials(&env, point_cfg.experiment.trials, |env, t| {
            run_trial(env, t).map(|o| throughput_bps(bandwidth, o.gamma_true))
        })?;
        let (mean, ci) = mean_ci(&samples);
        rows.push(ExperimentRow {
            sweep: name.clone(),
            value,
            solver: solver.to_string(),
            metric: Metric::ThroughputBps,
            mean,
            ci95: ci,
            trials: samples.len(),
            seed: point_cfg.experiment.seed,
        });
        // Effective SINR consistent with the mean throughput:
        // throughput = B log2(1 + sinr) holds exactly for the emitted pair.
        let gamma_eff = (mean / bandwidth).exp2() - 1.0;
        let to_db = |g: f64| 10.0 * g.max(f64::MIN_POSITIVE).log10();
        let lo = ((mean - ci) / bandwidth).exp2() - 1.0;
        let hi = ((mean + ci) / bandwidth).exp2() - 1.0;
        rows.push(ExperimentRow {
            sweep: name,
            value,
            solver: solver.to_string(),
            metric: Metric::SinrDb,
            mean: to_db(gamma_eff),
            ci95: 0.5 * (to_db(hi) - to_db(lo)).abs(),
            trials: samples.len(),
            seed: point_cfg.experiment.seed,
        });
    }
    Ok(rows)
}

/// Uncoded 4-QAM SER per sweep point.
pub fn run_ser(cfg: &RunConfig, sweep: Option<&Sweep>) -> Result<Vec<ExperimentRow>> {
    let solver = cfg.sub_solver()?;
    let mut rows = Vec::new();
    for (name, value, point_cfg) in sweep_points(cfg, sweep)? {
        let env = TrialEnv::build(&point_cfg)?;
        let symbols = point_cfg.experiment.symbols_per_trial;
        let seed = point_cfg.experiment.seed;
        let counts = collect_trials(&env, point_cfg.experiment.trials, |env, t| {
            let outcome = run_trial(env, t)?;
            let mut rng_sym = trial_rng(seed, t, Stream::Symbols);
            Ok(simulate_ser(&outcome.link, symbols, &mut rng_sym))
        })?;
        let errors: u64 = counts.iter().map(|(e, _)| e).sum();
        let total: u64 = counts.iter().map(|(_, n)| n).sum();
        let ser = errors as f64 / total as f64;
        let ci = 1.96 * (ser * (1.0 - ser) / total as f64).sqrt();
        rows.push(ExperimentRow {
            sweep: name,
            value,
            solver: solver.to_string(),
            metric: Metric::Ser,
            mean: ser,
            ci95: ci,
            trials: counts.len(),
            seed,
        });
    }
    Ok(rows)
}

/// Per-iteration wall times of every sub-solver on the configured scenario.
///
/// One iteration means: one closed-form evaluation for SA, one gradient
/// step (line search included, SA initialization amortized) for GD, and one
/// full bisection + randomization pass for SDR. The row mean carries the
/// median; the ci95 column carries the inter-quartile half-range.
pub fn run_runtime(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for solver in [SubSolver::Gd, SubSolver::Sa, SubSolver::Sdr] {
        let mut point_cfg = cfg.clone();
        point_cfg.solver.sub_solver = solver.to_string();
        // SDR cost per iteration is large; cap the BCD length for it.
        point_cfg.solver.bcd_max_outer_iters = match solver {
            SubSolver::Sdr => cfg.experiment.runtime_outer_iters,
            _ => cfg.solver.bcd_max_outer_iters.min(25),
        };
        let env = TrialEnv::build(&point_cfg)?;

        // Warm-up pass, excluded from the measurements.
        let _ = run_trial(&env, 0)?;

        let runs = match solver {
            SubSolver::Sdr => 1usize,
            _ => 5,
        };
        // Median over iterations, not over calls: each call contributes one
        // sample per inner iteration, so a near-converged call that exits
        // after a single step does not drown out the working regime.
        let mut per_iter = Vec::new();
        for t in 0..runs as u64 {
            let outcome = run_trial(&env, t)?;
            for (secs, inner) in outcome
                .result
                .sub_solver_seconds
                .iter()
                .zip(&outcome.result.sub_solver_inner_iters)
            {
                let steps = (*inner).max(1);
                for _ in 0..steps {
                    per_iter.push(secs / steps as f64);
                }
            }
        }
        let (median, iqr) = median_iqr(&per_iter);
        rows.push(ExperimentRow {
            sweep: "none".into(),
            value: 0.0,
            solver: solver.to_string(),
            metric: Metric::RuntimeS,
            mean: median,
            ci95: iqr,
            trials: per_iter.len(),
            seed: cfg.experiment.seed,
        });
    }
    Ok(rows)
}

/// Closed-form oracle self-checks (used by the `oracle` CLI subcommand).
/// Returns (name, passed, detail) triples.
pub fn run_oracle_checks(instances: usize, seed: u64) -> Vec<(String, bool, String)> {
    use crate::analysis::{one_element_sinr, sa_gap, stationary_values, OneElementParams};
    use std::f64::consts::TAU;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Stationary values against a dense grid.
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..instances {
        let mag = |r: &mut ChaCha8Rng| r.random_range(0.1..2.0);
        let ph = |r: &mut ChaCha8Rng| r.random_range(0.0..TAU);
        let cx = |r: &mut ChaCha8Rng| {
            let (m, p) = (mag(r), ph(r));
            Cx::new(p.cos(), p.sin()) * m
        };
        let params = OneElementParams::from_physical(
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            cx(&mut rng),
            cx(&mut rng),
            cx(&mut rng),
            cx(&mut rng),
            rng.random_range(0.01..1.0),
        )
        .expect("admissible parameters");
        let pair = stationary_values(&params);
        let points = 100_000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..points {
            best = best.max(one_element_sinr(&params, TAU * i as f64 / points as f64));
        }
        let rel = (pair.upper - best).abs() / best;
        worst = worst.max(rel);
        pass &= rel < 1e-4;
    }
    checks.push((
        format!("stationary-values-vs-grid ({instances} instances)"),
        pass,
        format!("worst relative deviation {worst:.3e} (tolerance 1e-4)"),
    ));

    // Vanishing-interference limit.
    let mut worst_limit = 0.0f64;
    let mut pass_limit = true;
    for _ in 0..instances {
        let a = rng.random_range(0.1..2.0);
        let h = rng.random_range(0.1..2.0);
        let c = rng.random_range(0.01..1.0);
        let params = OneElementParams::from_physical(
            1.0,
            0.0,
            Cx::new(a, 0.0),
            Cx::new(0.0, h),
            Cx::new(0.4, 0.1),
            Cx::new(0.2, -0.6),
            c,
        )
        .expect("admissible parameters");
        let pair = stationary_values(&params);
        let expect = (params.num_offset + params.num_amp) / params.den_offset;
        let rel = (pair.upper - expect).abs() / expect;
        worst_limit = worst_limit.max(rel);
        pass_limit &= rel < 1e-6;
    }
    checks.push((
        "no-interference limit -> (L'+M')/N'".into(),
        pass_limit,
        format!("worst relative deviation {worst_limit:.3e} (tolerance 1e-6)"),
    ));

    // Gap formulas: k -> infinity decay and the aligned-phase zero.
    let (g1_far, g2_far) = sa_gap(1e9, 1.1, 0.3);
    let (g1_aligned, _) = sa_gap(2.0, 0.0, 0.3);
    let pass_gap = g1_far < 1e-12 && g2_far < 1e-12 && g1_aligned == 0.0;
    checks.push((
        "signal-alignment gap limits".into(),
        pass_gap,
        format!("g1(k→∞) = {g1_far:.3e}, g2(k→∞) = {g2_far:.3e}, g1(δ=0) = {g1_aligned}"),
    ));

    checks
}
