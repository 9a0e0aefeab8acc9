//! Receive-beamformer and RIS-phase optimization under block-coordinate
//! descent.
//!
//! The beamformer block has an exact solution (a Rayleigh-quotient
//! maximizer). The RIS block is solved by one of:
//! - `Sdr`: bisection + diagonal-constrained SDP + Gaussian randomization,
//! - `Sa`: closed-form signal alignment (co-phases all reflected-path
//!   contributions with the direct path),
//! - `Gd`: gradient descent on the torus with Armijo-Goldstein
//!   backtracking, initialized at the SA point,
//! - `Rand`: keeps the random initial phases (baseline).
//!
//! The outer driver alternates the two blocks, rejects any RIS proposal
//! that does not improve the SINR, and stops on relative improvement.

use crate::linkmetrics::{GdForms, RisPhases, SinrContext};
use crate::sdr::{bisection_sdr, gaussian_randomization, SdrParams};
use crate::{CVec, Cx, Error, Result};
use rand::Rng;
use std::time::{Duration, Instant};

/// Armijo-Goldstein gradient-descent parameters.
#[derive(Debug, Clone)]
pub struct GdParams {
    /// ε of the sufficient-decrease condition, in (0,1).
    pub epsilon_armijo: f64,
    /// ϱ: step shrink factor, in (0,1).
    pub shrink: f64,
    /// β0: initial step size of each line search.
    pub beta0: f64,
    /// ε_th: stop when β‖∇‖² falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GdParams {
    fn default() -> Self {
        Self {
            epsilon_armijo: 5e-5,
            shrink: 0.5,
            beta0: 1.0,
            tol: 1e-6,
            max_iters: 200,
        }
    }
}

impl GdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_armijo > 0.0 && self.epsilon_armijo < 1.0) {
            return Err(Error::InvalidInput("Armijo epsilon must be in (0,1)".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidInput("shrink factor must be in (0,1)".into()));
        }
        if !(self.beta0 > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidInput("invalid GD step/tolerance parameters".into()));
        }
        Ok(())
    }
}

/// Cap on line-search shrinks per iteration (β never drops below ϱ^60 β0).
const MAX_ARMIJO_SHRINKS: usize = 60;

/// RIS sub-solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubSolver {
    Sdr,
    Sa,
    Gd,
    /// Random-phase baseline: the RIS keeps its initial configuration and
    /// only the beamformer is optimized.
    Rand,
}

impl std::fmt::Display for SubSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SubSolver::Sdr => "sdr",
            SubSolver::Sa => "sa",
            SubSolver::Gd => "gd",
            SubSolver::Rand => "rand",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for SubSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sdr" => Ok(SubSolver::Sdr),
            "sa" => Ok(SubSolver::Sa),
            "gd" => Ok(SubSolver::Gd),
            "rand" => Ok(SubSolver::Rand),
            other => Err(Error::InvalidInput(format!("unknown sub-solver '{other}'"))),
        }
    }
}

/// Outer BCD parameters plus the sub-solver tunables.
#[derive(Debug, Clone)]
pub struct BcdParams {
    pub rel_tol: f64,
    pub max_outer_iters: usize,
    pub sub_solver: SubSolver,
    pub gd: GdParams,
    pub sdr: SdrParams,
}

impl Default for BcdParams {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_outer_iters: 200,
            sub_solver: SubSolver::Gd,
            gd: GdParams::default(),
            sdr: SdrParams::default(),
        }
    }
}

impl BcdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_outer_iters == 0 {
            return Err(Error::InvalidInput("invalid BCD tolerance or iteration cap".into()));
        }
        self.gd.validate()?;
        self.sdr.validate()
    }
}

/// Joint optimization output.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub u_star: CVec,
    pub phases_star: RisPhases,
    /// SINR after each outer iteration; non-decreasing by construction.
    pub gamma_trace: Vec<f64>,
    pub outer_iters: usize,
    pub wall_time: Duration,
    /// Wall time of each RIS sub-solver invocation, seconds.
    pub sub_solver_seconds: Vec<f64>,
    /// Inner iterations of each sub-solver invocation (1 for closed forms).
    pub sub_solver_inner_iters: Vec<usize>,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn gamma_final(&self) -> f64 {
        *self.gamma_trace.last().unwrap_or(&0.0)
    }
}

/// Exact solution of the beamformer block:
/// `u* = A⁻¹ e0 / ‖A⁻¹ e0‖` with
/// `A = Σ_{i≥1} P_i e_i e_iᴴ + (ρ_total + σ_w² + ζσ_m²) I` and `e_i = Ĥ_i θ0`.
///
/// A is Hermitian positive definite whenever σ_w² > 0, which the noise
/// budget guarantees.
pub fn optimal_beamformer(ctx: &SinrContext, phases: &RisPhases) -> Result<CVec> {
    let (a, e0) = ctx.beamformer_system(phases);
    let solved = a
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&e0))
        .or_else(|| a.lu().solve(&e0))
        .ok_or_else(|| {
            Error::SolverFailure("interference-plus-noise matrix is singular".into())
        })?;
    let norm = solved.norm();
    if !(norm > 0.0) {
        return Err(Error::SolverFailure(
            "beamformer solve produced a zero vector (e0 = 0?)".into(),
        ));
    }
    Ok(solved / Cx::new(norm, 0.0))
}

/// Closed-form signal alignment: `θ_n = exp(-j(arg(uᴴẐ0)_n - arg(uᴴĥ_RT0)))`.
///
/// With the signal direct link absent the reference phase is zero, which
/// co-phases the reflected-path contributions. Entries where the reflected
/// gain vanishes have undefined phase and are set to θ_n = 1.
pub fn sa_phases(u: &CVec, ctx: &SinrContext) -> RisPhases {
    let channels = ctx.channels();
    let gains = channels.z(0).ad_mul(u); // entries are conj(uᴴẐ0)_n
    let reference = if channels.visible(0) {
        let w = u.dotc(channels.h_rt(0));
        if w.norm() > 0.0 {
            w.arg()
        } else {
            0.0
        }
    } else {
        0.0
    };
    let phi = (0..gains.nrows())
        .map(|n| {
            let g = gains[(n, 0)];
            if g.norm() > 0.0 {
                // arg(uᴴẐ0)_n = -arg(conj) ⇒ φ_n = ref + arg(g).
                reference + g.arg()
            } else {
                0.0
            }
        })
        .collect();
    RisPhases::from_phi(phi)
}

/// Analytical gradient of the negated fractional SINR objective at φ.
pub fn gd_gradient(phi: &[f64], u: &CVec, ctx: &SinrContext) -> Vec<f64> {
    let forms = ctx.gd_forms(u);
    let phases = RisPhases::from_phi(phi.to_vec());
    forms.gradient(phases.theta())
}

/// Gradient-descent outcome with line-search diagnostics.
#[derive(Debug, Clone)]
pub struct GdOutcome {
    pub phases: RisPhases,
    pub inner_iters: usize,
    pub converged: bool,
    /// Number of iterations whose line search hit the shrink cap.
    pub armijo_cap_hits: usize,
}

/// Gradient descent on the RIS phases for a fixed beamformer, starting at
/// the signal-alignment point.
pub fn gd_phases(u: &CVec, ctx: &SinrContext, params: &GdParams) -> Result<GdOutcome> {
    params.validate()?;
    let forms: GdForms = ctx.gd_forms(u);
    let init = sa_phases(u, ctx);
    let n = init.len();
    let mut phi = init.phi().to_vec();
    let mut theta = init.theta().clone();

    let mut inner_iters = 0;
    let mut converged = false;
    let mut armijo_cap_hits = 0;
    let mut cand_phi = vec![0.0; n];

    for _ in 0..params.max_iters {
        inner_iters += 1;
        let grad = forms.gradient(&theta);
        let grad_norm_sq: f64 = grad.iter().map(|g| g * g).sum();
        let f_current = -forms.gamma(&theta);

        let mut beta = params.beta0;
        let mut accepted_theta;
        let mut shrinks = 0;
        loop {
            for k in 0..n {
                cand_phi[k] = phi[k] - beta * grad[k];
            }
            accepted_theta = CVec::from_fn(n, |k, _| Cx::new(cand_phi[k].cos(), cand_phi[k].sin()));
            let f_candidate = -forms.gamma(&accepted_theta);
            if f_candidate <= f_current - params.epsilon_armijo * beta * grad_norm_sq {
                break;
            }
            if shrinks >= MAX_ARMIJO_SHRINKS {
                armijo_cap_hits += 1;
                break;
            }
            beta *= params.shrink;
            shrinks += 1;
        }

        phi.copy_from_slice(&cand_phi);
        theta = accepted_theta;
        if beta * grad_norm_sq <= params.tol {
            converged = true;
            break;
        }
    }

    Ok(GdOutcome {
        phases: RisPhases::from_phi(phi),
        inner_iters,
        converged,
        armijo_cap_hits,
    })
}

/// Joint optimization by block-coordinate descent.
///
/// Starts from random RIS phases, alternates the exact beamformer with the
/// selected RIS sub-solver, keeps the previous phases whenever a proposal
/// fails to improve the SINR, and stops once the relative improvement drops
/// to `rel_tol` (absolute improvement on the first iteration, where the
/// baseline is γ_0 = 0).
pub fn bcd<R: Rng + ?Sized>(
    ctx: &SinrContext,
    params: &BcdParams,
    rng: &mut R,
) -> Result<OptimizationResult> {
    params.validate()?;
    let start = Instant::now();
    let mut phases = RisPhases::random(ctx.n_ris(), rng);
    let mut gamma_prev = 0.0;
    let mut gamma_trace = Vec::new();
    let mut sub_solver_seconds = Vec::new();
    let mut sub_solver_inner_iters = Vec::new();
    let mut converged = false;
    let mut u_star = CVec::zeros(ctx.n_rx());
    let mut outer_iters = 0;

    while outer_iters < params.max_outer_iters {
        outer_iters += 1;
        let u = optimal_beamformer(ctx, &phases)?;

        let sub_start = Instant::now();
        let (proposal, inner) = match params.sub_solver {
            SubSolver::Sa => (sa_phases(&u, ctx), 1),
            SubSolver::Gd => {
                let out = gd_phases(&u, ctx, &params.gd)?;
                (out.phases, out.inner_iters)
            }
            SubSolver::Sdr => {
                let quad = ctx.ris_quadratic(&u);
                let bis = bisection_sdr(&quad.g0, &quad.m, quad.alpha, &params.sdr)?;
                let theta = gaussian_randomization(
                    &bis.psi,
                    params.sdr.randomization_count,
                    &u,
                    ctx,
                    rng,
                )?;
                (theta, 1)
            }
            SubSolver::Rand => (phases.clone(), 1),
        };
        sub_solver_seconds.push(sub_start.elapsed().as_secs_f64());
        sub_solver_inner_iters.push(inner);

        let gamma_proposal = ctx.sinr(&u, &proposal);
        let gamma_next = if gamma_proposal <= gamma_prev {
            // Rejection step: keep the previous phases. The fresh beamformer
            // still guarantees γ(u_{i+1}, θ_i) ≥ γ(u_i, θ_i).
            ctx.sinr(&u, &phases)
        } else {
            phases = proposal;
            gamma_proposal
        };
        u_star = u;
        gamma_trace.push(gamma_next);

        let delta = if gamma_prev == 0.0 {
            (gamma_next - gamma_prev).abs()
        } else {
            (gamma_next - gamma_prev).abs() / gamma_prev
        };
        gamma_prev = gamma_next;
        if delta <= params.rel_tol {
            converged = true;
            break;
        }
    }

    Ok(OptimizationResult {
        u_star,
        phases_star: phases,
        gamma_trace,
        outer_iters,
        wall_time: start.elapsed(),
        sub_solver_seconds,
        sub_solver_inner_iters,
        converged,
    })
}
