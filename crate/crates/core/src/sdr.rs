//! Semidefinite-relaxation solver for the RIS phase sub-problem.
//!
//! The unit-modulus quadratic fractional program is lifted to Ψ = θ0 θ0ᴴ
//! with the rank constraint dropped, leaving an SDP with unit diagonal.
//! The fractional objective is handled by bisection on the auxiliary level
//! b: each level asks whether Tr(Ψ(G0 - bM)) ≥ bα is achievable, decided by
//! maximizing the trace objective over the feasible set. A rank-one
//! configuration is then recovered by Gaussian randomization.
//!
//! The SDP backend is a first-order splitting scheme (ADMM): it alternates
//! a Euclidean projection onto the unit-diagonal affine set with a
//! projection onto the PSD cone (eigenvalue clipping), plus scaled dual
//! updates and residual-balanced penalty adaptation. The problems here are
//! small (N+1 ≤ ~128), so the per-iteration eigendecomposition is cheap.

use crate::linkmetrics::{trace_product, GdForms, RisPhases, RisQuadratic, SinrContext};
use crate::{CMat, CVec, Cx, Error, Result};
use rand::Rng;

/// Tunables of the SDR pipeline.
#[derive(Debug, Clone)]
pub struct SdrParams {
    /// ε0: initial upper bound of the bisection interval.
    pub bisection_hi: f64,
    /// ε1: width at which bisection stops.
    pub bisection_tol: f64,
    /// G: number of Gaussian randomization candidates.
    pub randomization_count: usize,
    pub sdp_tol: f64,
    pub sdp_max_iters: usize,
}

impl Default for SdrParams {
    fn default() -> Self {
        Self {
            bisection_hi: 20.0,
            bisection_tol: 1e-6,
            randomization_count: 1000,
            sdp_tol: 1e-7,
            sdp_max_iters: 5000,
        }
    }
}

impl SdrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bisection_hi > self.bisection_tol && self.bisection_tol > 0.0) {
            return Err(Error::InvalidInput(
                "bisection bounds need hi > tol > 0".into(),
            ));
        }
        if self.randomization_count == 0 {
            return Err(Error::InvalidInput("randomization count must be >= 1".into()));
        }
        if !(self.sdp_tol > 0.0) || self.sdp_max_iters == 0 {
            return Err(Error::InvalidInput("SDP tolerance / iteration budget invalid".into()));
        }
        Ok(())
    }
}

/// Result of one diagonal-constrained SDP solve.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Hermitian PSD with exactly unit diagonal.
    pub psi: CMat,
    /// Tr(C Ψ) at the returned iterate.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Internal ADMM state kept across bisection levels for warm starts.
#[derive(Debug, Clone)]
struct AdmmState {
    x: CMat,
    z: CMat,
    u: CMat,
    rho: f64,
}

impl AdmmState {
    fn fresh(n: usize) -> Self {
        Self {
            x: CMat::identity(n, n),
            z: CMat::identity(n, n),
            u: CMat::zeros(n, n),
            rho: 1.0,
        }
    }
}

fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Cx::new(0.5, 0.0)
}

/// Projection onto the PSD cone by eigenvalue clipping.
fn project_psd(m: &CMat) -> CMat {
    let herm = hermitize(m);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut scaled = eig.eigenvectors.clone();
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        let w = Cx::new(lambda.max(0.0), 0.0);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= w;
        }
    }
    &scaled * eig.eigenvectors.adjoint()
}

/// Rescales a PSD matrix to an exactly feasible point: unit diagonal via a
/// congruence transform (which preserves positive semidefiniteness).
fn rescale_unit_diagonal(p: &CMat) -> CMat {
    let n = p.nrows();
    let mut out = p.clone();
    let mut scale = vec![0.0f64; n];
    for i in 0..n {
        let d = out[(i, i)].re;
        scale[i] = if d > 1e-300 { 1.0 / d.sqrt() } else { 0.0 };
    }
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] *= Cx::new(scale[r] * scale[c], 0.0);
        }
    }
    for i in 0..n {
        // A zero diagonal forces a zero row/column in a PSD matrix; filling
        // the diagonal keeps PSD and restores feasibility.
        out[(i, i)] = Cx::new(1.0, 0.0);
        if scale[i] == 0.0 {
            for j in 0..n {
                if j != i {
                    out[(i, j)] = Cx::new(0.0, 0.0);
                    out[(j, i)] = Cx::new(0.0, 0.0);
                }
            }
        }
    }
    out
}

/// Projects onto the PSD cone, then rescales to a unit diagonal.
fn finalize_psi(p: &CMat) -> CMat {
    rescale_unit_diagonal(&project_psd(p))
}

fn max_eigenvalue(m: &CMat) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Valid upper bound on max Tr(CΨ) over unit-diagonal PSD Ψ, for any real
/// diagonal shift y: Tr(CΨ) = Tr((C - diag y)Ψ) + Σ y_i ≤ n λmax(C - diag y) + Σ y_i.
fn dual_upper_bound(c: &CMat, y: &[f64]) -> f64 {
    let mut shifted = c.clone();
    for (i, &yi) in y.iter().enumerate() {
        shifted[(i, i)] -= Cx::new(yi, 0.0);
    }
    y.iter().sum::<f64>() + c.nrows() as f64 * max_eigenvalue(&shifted)
}

/// Feasibility decision attached to an early-exited solve.
enum EarlyExit {
    /// A feasible point already attains the target value.
    Attained,
    /// A dual certificate proves the target is out of reach.
    Unreachable,
}

/// ADMM with over-relaxation. When `target` is set, the solve may stop as
/// soon as either a feasible iterate attains it or a dual bound excludes it.
fn admm_solve_inner(
    c: &CMat,
    params: &SdrParams,
    state: &mut AdmmState,
    target: Option<f64>,
) -> Result<(SdpSolution, Option<EarlyExit>)> {
    params.validate()?;
    let n = c.nrows();
    if n == 0 || c.ncols() != n {
        return Err(Error::DimensionMismatch("SDP cost matrix must be square".into()));
    }
    if (c - c.adjoint()).norm() > 1e-8 * (1.0 + c.norm()) {
        return Err(Error::InvalidInput("SDP cost matrix must be Hermitian".into()));
    }
    let scale = c.norm();
    if scale == 0.0 {
        // Constant objective: any feasible point is optimal.
        let psi = CMat::identity(n, n);
        let early = target.map(|t| {
            if t <= 0.0 {
                EarlyExit::Attained
            } else {
                EarlyExit::Unreachable
            }
        });
        return Ok((
            SdpSolution { psi, value: 0.0, iterations: 0, converged: true },
            early,
        ));
    }
    let c_hat = hermitize(&(c / Cx::new(scale, 0.0)));
    let target_hat = target.map(|t| t / scale);

    const RELAXATION: f64 = 1.6;
    let mut iterations = 0;
    let mut converged = false;
    let nf = n as f64;
    for it in 0..params.sdp_max_iters {
        iterations = it + 1;
        // X-step: unconstrained minimum of the augmented objective with the
        // diagonal pinned to one.
        let mut x = &state.z - &state.u + &c_hat / Cx::new(state.rho, 0.0);
        for i in 0..n {
            x[(i, i)] = Cx::new(1.0, 0.0);
        }
        // Relaxed Z-step: PSD projection.
        let x_relaxed = &x * Cx::new(RELAXATION, 0.0) + &state.z * Cx::new(1.0 - RELAXATION, 0.0);
        let z_new = project_psd(&(&x_relaxed + &state.u));
        let primal = (&x - &z_new).norm();
        let dual = (&z_new - &state.z).norm() * state.rho;
        state.u += &x_relaxed - &z_new;
        state.x = x;
        state.z = z_new;

        let eps_pri = params.sdp_tol * (nf + state.x.norm());
        let eps_dual = params.sdp_tol * (nf + state.rho * state.u.norm());
        if primal <= eps_pri && dual <= eps_dual {
            converged = true;
            break;
        }

        if let Some(t_hat) = target_hat {
            // Z is PSD by construction, so its unit-diagonal rescale is a
            // feasible point; attaining the target certifies feasibility.
            if it % 5 == 4 {
                let cand = rescale_unit_diagonal(&state.z);
                if trace_product(&c_hat, &cand) >= t_hat {
                    let value = trace_product(c, &cand);
                    return Ok((
                        SdpSolution { psi: cand, value, iterations, converged: true },
                        Some(EarlyExit::Attained),
                    ));
                }
            }
            // Dual bound from the current scaled dual iterate.
            if it % 50 == 49 {
                let y: Vec<f64> = (0..n)
                    .map(|i| (c_hat[(i, i)] + state.u[(i, i)] * Cx::new(state.rho, 0.0)).re)
                    .collect();
                let ub = dual_upper_bound(&c_hat, &y);
                if ub < t_hat {
                    let psi = rescale_unit_diagonal(&state.z);
                    return Ok((
                        SdpSolution { psi, value: ub * scale, iterations, converged: true },
                        Some(EarlyExit::Unreachable),
                    ));
                }
            }
        }

        // Residual balancing keeps both residuals shrinking together.
        if it % 10 == 9 {
            if primal > 10.0 * dual {
                state.rho *= 2.0;
                state.u /= Cx::new(2.0, 0.0);
            } else if dual > 10.0 * primal {
                state.rho /= 2.0;
                state.u *= Cx::new(2.0, 0.0);
            }
        }
    }

    let psi = finalize_psi(&state.z);
    let value = trace_product(c, &psi);
    Ok((
        SdpSolution { psi, value, iterations, converged },
        None,
    ))
}

fn admm_solve(c: &CMat, params: &SdrParams, state: &mut AdmmState) -> Result<SdpSolution> {
    admm_solve_inner(c, params, state, None).map(|(sol, _)| sol)
}

/// Maximizes Tr(C Ψ) subject to Ψ ⪰ 0, diag(Ψ) = 1.
pub fn solve_diag_sdp(c: &CMat, params: &SdrParams) -> Result<SdpSolution> {
    let mut state = AdmmState::fresh(c.nrows());
    admm_solve(c, params, &mut state)
}

/// Outcome of one feasibility query of the epigraph system.
#[derive(Debug, Clone)]
pub struct FeasibilityOutcome {
    pub feasible: bool,
    /// Maximizer of the trace objective (present whether or not feasible).
    pub psi: CMat,
    /// max Tr(Ψ (G0 - bM)).
    pub value: f64,
    pub converged: bool,
}

/// Decides whether some unit-diagonal Ψ ⪰ 0 attains
/// `Tr(Ψ(G0 - bM)) ≥ bα`, by maximizing the left side.
///
/// A non-converged SDP solve is treated as infeasible (conservative) and
/// reported through `converged`.
pub fn sdr_feasibility(
    g0: &CMat,
    m: &CMat,
    alpha: f64,
    b: f64,
    params: &SdrParams,
) -> Result<FeasibilityOutcome> {
    if b < 0.0 {
        return Err(Error::InvalidInput(format!("bisection level must be >= 0, got {b}")));
    }
    let mut state = AdmmState::fresh(g0.nrows());
    feasibility_with_state(g0, m, alpha, b, params, &mut state)
}

fn feasibility_with_state(
    g0: &CMat,
    m: &CMat,
    alpha: f64,
    b: f64,
    params: &SdrParams,
    state: &mut AdmmState,
) -> Result<FeasibilityOutcome> {
    let c = g0 - m * Cx::new(b, 0.0);
    let target = b * alpha;
    let n = c.nrows();

    // Static certificates decide most bisection levels without iterating:
    // the identity is feasible, and a diagonal-shift dual bound caps the
    // achievable trace.
    let at_identity: f64 = (0..n).map(|i| c[(i, i)].re).sum();
    if at_identity >= target {
        return Ok(FeasibilityOutcome {
            feasible: true,
            psi: CMat::identity(n, n),
            value: at_identity,
            converged: true,
        });
    }
    let y: Vec<f64> = (0..n).map(|i| c[(i, i)].re).collect();
    let static_ub = dual_upper_bound(&c, &y);
    if static_ub < target {
        return Ok(FeasibilityOutcome {
            feasible: false,
            psi: CMat::identity(n, n),
            value: static_ub,
            converged: true,
        });
    }

    let (sol, early) = admm_solve_inner(&c, params, state, Some(target))?;
    let feasible = match early {
        Some(EarlyExit::Attained) => true,
        Some(EarlyExit::Unreachable) => false,
        // Converged solve: decide by the maximized value. A non-converged
        // solve without a certificate is conservatively infeasible.
        None => sol.converged && sol.value >= target,
    };
    Ok(FeasibilityOutcome {
        feasible,
        psi: sol.psi,
        value: sol.value,
        converged: sol.converged,
    })
}

/// Bisection output: the Ψ from the highest feasible level, plus the
/// certified bracket around the relaxation optimum.
#[derive(Debug, Clone)]
pub struct BisectionOutcome {
    pub psi: CMat,
    /// Highest level proven feasible.
    pub b_feasible: f64,
    /// Lowest level proven infeasible; upper-bounds every unit-modulus SINR.
    pub b_bound: f64,
    pub iterations: usize,
}

/// Bisects the epigraph level over (0, ε0] to within ε1.
pub fn bisection_sdr(
    g0: &CMat,
    m: &CMat,
    alpha: f64,
    params: &SdrParams,
) -> Result<BisectionOutcome> {
    params.validate()?;
    let mut state = AdmmState::fresh(g0.nrows());

    // The problem must be infeasible at the top of the interval, otherwise
    // the caller needs a larger ε0.
    let top = feasibility_with_state(g0, m, alpha, params.bisection_hi, params, &mut state)?;
    if top.feasible {
        return Err(Error::UpperBoundTooLow {
            bound: params.bisection_hi,
        });
    }

    // b = 0 is always feasible: G0 is PSD, so the trace objective is >= 0.
    let base = feasibility_with_state(g0, m, alpha, 0.0, params, &mut state)?;
    let mut psi = base.psi;
    let mut lo = 0.0;
    let mut hi = params.bisection_hi;
    let mut iterations = 0;
    while hi - lo > params.bisection_tol {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let probe = feasibility_with_state(g0, m, alpha, mid, params, &mut state)?;
        if probe.feasible {
            lo = mid;
            psi = probe.psi;
        } else {
            hi = mid;
        }
    }
    Ok(BisectionOutcome {
        psi,
        b_feasible: lo,
        b_bound: hi,
        iterations,
    })
}

/// Draws `count` Gaussian vectors with covariance Ψ, projects each onto the
/// unit torus, and returns the best candidate under the current SINR forms.
///
/// The first N entries are projected entrywise to the unit circle; the
/// candidate is then rotated so its stacked last coordinate is exactly 1
/// (which is what evaluating γ on [θᵀ 1]ᵀ assumes). Zero entries project
/// to 1.
pub fn gaussian_randomization<R: Rng + ?Sized>(
    psi: &CMat,
    count: usize,
    u: &CVec,
    ctx: &SinrContext,
    rng: &mut R,
) -> Result<RisPhases> {
    let np1 = psi.nrows();
    let n = ctx.n_ris();
    if np1 != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "Ψ is {np1}x{np1} but the context expects {}x{}",
            n + 1,
            n + 1
        )));
    }
    if count == 0 {
        return Err(Error::InvalidInput("randomization count must be >= 1".into()));
    }

    // Symmetric factorization with clipped eigenvalues: F = V diag(sqrt λ+).
    // Eigenvalues at the noise floor of the decomposition are zeroed so the
    // sqrt does not amplify them into spurious sample components.
    let eig = nalgebra::SymmetricEigen::new(hermitize(psi));
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-12 * lambda_max;
    let mut factor = eig.eigenvectors.clone();
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        let w = Cx::new(if lambda > floor { lambda.sqrt() } else { 0.0 }, 0.0);
        for r in 0..np1 {
            factor[(r, c)] *= w;
        }
    }

    let forms: GdForms = ctx.gd_forms(u);
    let mut best_phi: Option<Vec<f64>> = None;
    let mut best_gamma = f64::NEG_INFINITY;
    let mut w = CVec::zeros(np1);
    for _ in 0..count {
        for i in 0..np1 {
            w[i] = crate::channel::standard_complex_normal(rng);
        }
        let z = &factor * &w;
        // Global rotation aligning the stacked coordinate with its
        // appended 1 (no-op when the last entry vanishes).
        let last = z[np1 - 1];
        let deref = if last.norm() > 0.0 { -last.arg() } else { 0.0 };
        let phi: Vec<f64> = (0..n)
            .map(|i| if z[i].norm() > 0.0 { z[i].arg() + deref } else { 0.0 })
            .collect();
        let phases = RisPhases::from_phi(phi);
        let gamma = forms.gamma(phases.theta());
        if gamma > best_gamma {
            best_gamma = gamma;
            best_phi = Some(phases.phi().to_vec());
        }
    }
    Ok(RisPhases::from_phi(best_phi.expect("count >= 1 guarantees a candidate")))
}

/// Convenience: the quadratic-form SINR used when scoring SDR outputs.
pub fn quadratic_gamma(quad: &RisQuadratic, phases: &RisPhases) -> f64 {
    quad.gamma(&phases.theta0())
}
