//! Stage-wise adaptation of the smoothing parameter.
//!
//! Each stage maximizes `g_γ` until the unsmoothed dual `g₀` stops improving
//! by more than `(ε_t/2)·g_drop` between checks, then picks the next `γ` so
//! that the smoothing error `γ·ψ(γ)` fits in the next, ten times smaller,
//! budget.

use serde::{Deserialize, Serialize};

use crate::dual::{dot, DualOracle};
use crate::error::{Error, Result};
use crate::optim::{DualAscent, IterRecord, OptimizerConfig};
use crate::problem::{Polytope, PrimalPoint, Problem};

/// `ψ̃ = m·δ/2`
pub fn psi_tilde(m: usize, delta: f64) -> f64 {
    m as f64 * delta / 2.0
}

/// Block-size parameter used for `ψ̃`: the largest per-block value of
/// `max_{x∈C_i} ‖x‖²` (1 for simplices, δ for box-cuts).
pub fn delta_equivalent(p: &Problem) -> f64 {
    p.blocks()
        .iter()
        .map(|b| match &b.polytope {
            Polytope::SimplexEq | Polytope::SimplexIq => 1.0,
            other => other.max_sq_norm(b.dim()),
        })
        .fold(0.0, f64::max)
}

/// `Σ_i max_{x_i ∈ C_i} ½‖x_i‖²`
pub fn psi_max(p: &Problem) -> f64 {
    p.blocks().iter().map(|b| 0.5 * b.polytope.max_sq_norm(b.dim())).sum()
}

/// `ψ = max_{x∈C} ½‖x‖² − ½‖x̃₀‖²`
pub fn psi_gamma(p: &Problem, x0: &PrimalPoint) -> f64 {
    psi_max(p) - 0.5 * dot(x0.as_slice(), x0.as_slice())
}

/// Both halves of the stage exit test: dual progress and smoothing error fit
/// in `(ε/2)·g_drop`.
pub fn sufficient_convergence(g0_bar: f64, g0_tilde: f64, gamma: f64, psi_a: f64, eps: f64, g_drop: f64) -> bool {
    let budget = 0.5 * eps * g_drop;
    g0_bar - g0_tilde <= budget && gamma * psi_a <= budget
}

/// `Q = (g₀(λ) − g₀(0)) / (g₀_best − g₀(0))`
pub fn quality_score(g0_lambda: f64, g0_zero: f64, g0_best: f64) -> Result<f64> {
    let denom = g0_best - g0_zero;
    if denom.abs() < 1e-14 {
        return Err(Error::DegenerateAnchor);
    }
    Ok((g0_lambda - g0_zero) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingLossCheck {
    /// `g₀(λ₀) − g₀(λ̃_γ)`
    pub lhs: f64,
    /// `g₀(λ_γ) − g₀(λ̃_γ) + γψ(γ)`
    pub rhs: f64,
    pub holds: bool,
    /// `g₀(λ₀) − g₀(λ_γ)`
    pub smoothing_gap: f64,
    /// `γψ(γ)`
    pub gap_bound: f64,
    pub gap_holds: bool,
}

/// Evaluates the bound on the loss in `g₀` from maximizing `g_γ` instead of
/// `g₀`. `λ₀` maximizes `g₀`, `λ_γ` maximizes `g_γ`, `λ̃_γ` is any iterate.
pub fn check_smoothing_loss(
    p: &Problem,
    gamma: f64,
    lambda0: &[f64],
    lambda_gamma: &[f64],
    lambda_tilde: &[f64],
) -> Result<SmoothingLossCheck> {
    let oracle = DualOracle::new(p);
    let x0 = oracle.eval(lambda0, gamma, true)?.x_star.expect("retained");
    let psi = psi_gamma(p, &x0);
    let g0_0 = oracle.eval_g0(lambda0)?.value;
    let g0_g = oracle.eval_g0(lambda_gamma)?.value;
    let g0_t = oracle.eval_g0(lambda_tilde)?.value;
    let lhs = g0_0 - g0_t;
    let rhs = (g0_g - g0_t) + gamma * psi;
    Ok(SmoothingLossCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
        smoothing_gap: g0_0 - g0_g,
        gap_bound: gamma * psi,
        gap_holds: g0_0 - g0_g <= gamma * psi + 1e-9,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfig {
    /// Stage count `T`; stages `1..T` are run.
    pub stages: usize,
    /// Optimizer iterations between convergence checks.
    pub inner_iters: usize,
    /// Opportunity fraction `τ`.
    pub tau: f64,
    pub max_repeats: usize,
    pub gamma_floor: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            stages: 4,
            inner_iters: 25,
            tau: 1.0,
            max_repeats: 100,
            gamma_floor: 1e-8,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// Bookkeeping of one finished stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub g_drop: f64,
    pub psi_a: f64,
    pub psi_tilde: f64,
    pub repeats: usize,
    pub iterations: usize,
    /// `g₀` at the stage's final iterate.
    pub g0: f64,
    pub next_gamma: f64,
}

/// One optimizer iteration tagged with its stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageIter {
    pub stage: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub record: IterRecord,
    /// `g₀` when a convergence check followed this iteration.
    pub g0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagewiseResult {
    pub lambda: Vec<f64>,
    pub g0: f64,
    pub g0_zero: f64,
    pub stages: Vec<StageRecord>,
    pub iterations: Vec<StageIter>,
    pub stalled: bool,
    pub warnings: Vec<String>,
}

/// Runs the stage-wise algorithm from `λ = 0` and returns the final iterate.
pub fn stagewise_solve(p: &Problem, cfg: &StageConfig) -> Result<StagewiseResult> {
    stagewise_solve_with(&DualOracle::new(p), cfg)
}

pub fn stagewise_solve_with(oracle: &DualOracle<'_>, cfg: &StageConfig) -> Result<StagewiseResult> {
    if cfg.stages < 2 || cfg.inner_iters == 0 || !(cfg.tau > 0.0) {
        return Err(Error::InvalidConfig("need T ≥ 2, R ≥ 1 and τ > 0".into()));
    }
    let p = oracle.problem();
    let m = p.m();
    let mut warnings = Vec::new();
    let zero = vec![0.0; m];
    let g0_zero = oracle.eval_g0(&zero)?.value;
    let psi_t = psi_tilde(m.max(1), delta_equivalent(p));

    let mut g_drop = cfg.tau * g0_zero.abs();
    let mut anchor = g0_zero.abs();
    if g_drop == 0.0 {
        warnings.push("g₀(0) = 0: using g_drop = 1".to_string());
        g_drop = 1.0;
        anchor = 1.0;
    }
    let mut gamma = (0.5 * 0.1 * anchor / psi_t).max(cfg.gamma_floor);

    let mut lambda_tilde = zero.clone();
    let mut g0_tilde = g0_zero;
    let mut best = (zero.clone(), g0_zero);
    let mut stages = Vec::new();
    let mut iterations = Vec::new();
    let mut stalled = false;
    let mut global_iter = 0;

    for t in 1..cfg.stages {
        let eps = 10f64.powi(-(t as i32));
        let mut run = DualAscent::new(oracle, gamma, &lambda_tilde, cfg.optimizer.clone())?;
        let mut repeats = 0;
        loop {
            let before = run.trace().records.len();
            run.run(cfg.inner_iters)?;
            repeats += 1;
            let g0_bar = oracle.eval_g0(run.lambda())?.value;
            let new_records = &run.trace().records[before..];
            for (k, rec) in new_records.iter().enumerate() {
                global_iter += 1;
                let mut rec = rec.clone();
                rec.iter = global_iter;
                iterations.push(StageIter {
                    stage: t,
                    gamma,
                    epsilon: eps,
                    record: rec,
                    g0: (k + 1 == new_records.len()).then_some(g0_bar),
                });
            }
            let progress = g0_bar - g0_tilde;
            lambda_tilde = run.lambda().to_vec();
            g0_tilde = g0_bar;
            if g0_bar > best.1 {
                best = (lambda_tilde.clone(), g0_bar);
            }
            if progress <= 0.5 * eps * g_drop {
                break;
            }
            if repeats >= cfg.max_repeats {
                warnings.push(format!("stage {t}: no sufficient convergence after {repeats} checks"));
                stalled = true;
                break;
            }
        }
        warnings.extend(run.warnings().iter().cloned());

        let x_bar = oracle.eval(&lambda_tilde, gamma, true)?.x_star.expect("retained");
        let mut psi_a = psi_gamma(p, &x_bar);
        if psi_a <= 0.0 {
            psi_a = psi_t;
        }
        let new_drop = g0_tilde - g0_zero;
        let eps_next = 0.1 * eps;
        let next_gamma = if new_drop > 0.0 {
            (0.5 * eps_next * new_drop / psi_a).max(cfg.gamma_floor)
        } else {
            // smoothing cost more than the stage gained: size γ from the
            // measured ψ and the previous drop instead
            (0.5 * eps_next * g_drop / psi_a).min(0.1 * gamma).max(cfg.gamma_floor)
        };
        stages.push(StageRecord {
            stage: t,
            epsilon: eps,
            gamma,
            g_drop,
            psi_a,
            psi_tilde: psi_t,
            repeats,
            iterations: run.iterations(),
            g0: g0_tilde,
            next_gamma,
        });
        if new_drop <= 0.0 {
            warnings.push(format!("stage {t}: no gain over g₀(0) at γ = {gamma:.3e}; shrinking γ"));
        } else {
            g_drop = new_drop;
        }
        if stalled {
            break;
        }
        gamma = next_gamma;
    }

    let (lambda, g0) = best;
    Ok(StagewiseResult {
        lambda,
        g0,
        g0_zero,
        stages,
        iterations,
        stalled,
        warnings,
    })
}
