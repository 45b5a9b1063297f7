//! One complete run: dual ascent at a fixed `γ` or the stage-wise schedule,
//! followed by infeasibility screening, quality scoring and, where possible,
//! a repaired primal point with its duality gap.

use crate::diagnostics::{check_infeasible, infeasibility_bound, repair_to_feasible, weak_duality_gap, InfeasibilityStatus};
use crate::dual::DualOracle;
use crate::error::{Error, Result};
use crate::io::trace::{RunStatus, RunSummary, TraceRow};
use crate::optim::{DualAscent, OptimizerConfig};
use crate::problem::Problem;
use crate::smoothing::{stagewise_solve_with, StageConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaMode {
    Fixed(f64),
    Adaptive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub gamma: GammaMode,
    pub optimizer: OptimizerConfig,
    pub stages: StageConfig,
    pub threads: usize,
    /// Suspicion factor for the infeasibility heuristic.
    pub suspect_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gamma: GammaMode::Adaptive,
            optimizer: OptimizerConfig::default(),
            stages: StageConfig::default(),
            threads: 1,
            suspect_factor: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutput {
    pub summary: RunSummary,
    pub trace: Vec<TraceRow>,
}

/// Q with a degenerate anchor read as "nothing left to gain".
fn q_value(g0: f64, g0_zero: f64, best: f64) -> f64 {
    let denom = best - g0_zero;
    if denom.abs() < 1e-14 {
        1.0
    } else {
        (g0 - g0_zero) / denom
    }
}

pub fn solve(p: &Problem, opts: &SolveOptions) -> Result<SolveOutput> {
    let report = p.validate();
    if !report.is_ok() {
        return Err(Error::Validation(report));
    }
    let oracle = DualOracle::with_threads(p, opts.threads.max(1))?;
    let zero = vec![0.0; p.m()];
    let g0_zero = oracle.eval_g0(&zero)?.value;
    let mut warnings = Vec::new();

    let (lambda, gamma, mut trace, status, stages) = match opts.gamma {
        GammaMode::Fixed(gamma) => {
            let bound = infeasibility_bound(p, gamma)?;
            let mut run = DualAscent::new(&oracle, gamma, &zero, opts.optimizer.clone())?;
            let mut trace = Vec::new();
            let mut proven = run.current().g > bound;
            while !proven && !run.converged() && run.iterations() < opts.optimizer.max_iters {
                run.step()?;
                let rec = run.trace().records.last().expect("step records").clone();
                let g0 = oracle.eval_g0(run.lambda())?.value;
                trace.push(TraceRow {
                    iter: rec.iter,
                    stage: 0,
                    gamma,
                    epsilon: None,
                    g_gamma: rec.g,
                    g0: Some(g0),
                    grad_norm: rec.grad_norm,
                    step: rec.step,
                    mu: rec.mean_mu,
                    vertex_frac: rec.vertex_frac,
                    q: None,
                    wall_ms: rec.wall_ms,
                });
                proven = rec.g > bound;
            }
            warnings.extend(run.warnings().iter().cloned());
            let status = if proven {
                RunStatus::Infeasible
            } else if run.converged() {
                RunStatus::Converged
            } else {
                RunStatus::IterationLimit
            };
            (run.lambda().to_vec(), gamma, trace, status, Vec::new())
        }
        GammaMode::Adaptive => {
            let cfg = StageConfig {
                optimizer: opts.optimizer.clone(),
                ..opts.stages.clone()
            };
            let res = stagewise_solve_with(&oracle, &cfg)?;
            warnings.extend(res.warnings.iter().cloned());
            let mut trace = Vec::with_capacity(res.iterations.len());
            let mut proven = false;
            let mut bounds: Vec<(f64, f64)> = Vec::new();
            for it in &res.iterations {
                let bound = match bounds.iter().find(|b| b.0 == it.gamma) {
                    Some(b) => b.1,
                    None => {
                        let v = infeasibility_bound(p, it.gamma)?;
                        bounds.push((it.gamma, v));
                        v
                    }
                };
                proven |= it.record.g > bound;
                trace.push(TraceRow {
                    iter: it.record.iter,
                    stage: it.stage,
                    gamma: it.gamma,
                    epsilon: Some(it.epsilon),
                    g_gamma: it.record.g,
                    g0: it.g0,
                    grad_norm: it.record.grad_norm,
                    step: it.record.step,
                    mu: it.record.mean_mu,
                    vertex_frac: it.record.vertex_frac,
                    q: None,
                    wall_ms: it.record.wall_ms,
                });
            }
            let gamma = res.stages.last().map_or(opts.stages.gamma_floor, |s| s.gamma);
            let status = if proven {
                RunStatus::Infeasible
            } else if res.stalled {
                RunStatus::Stalled
            } else {
                RunStatus::Converged
            };
            (res.lambda, gamma, trace, status, res.stages)
        }
    };

    let final_eval = oracle.eval(&lambda, gamma, true)?;
    let g0 = oracle.eval_g0(&lambda)?.value;
    let best = trace.iter().filter_map(|r| r.g0).fold(g0.max(g0_zero), f64::max);
    for r in &mut trace {
        r.q = r.g0.map(|v| q_value(v, g0_zero, best));
    }

    let values: Vec<f64> = trace.iter().map(|r| r.g_gamma).collect();
    let bound = infeasibility_bound(p, gamma)?;
    let mut verdict = check_infeasible(&values, bound, None, opts.suspect_factor);
    if status == RunStatus::Infeasible {
        verdict.status = InfeasibilityStatus::ProvenInfeasible;
    }

    let gap = if status == RunStatus::Infeasible {
        None
    } else {
        let x = final_eval.x_star.as_ref().expect("retained");
        let feasible = if p.is_feasible(x, 1e-9).feasible {
            Some(x.clone())
        } else {
            repair_to_feasible(p, x).ok()
        };
        feasible.and_then(|x| weak_duality_gap(p, &x, &lambda).ok())
    };
    Ok(SolveOutput {
        summary: RunSummary {
            status,
            g_gamma: final_eval.g,
            gamma,
            g0,
            g0_zero,
            q: q_value(g0, g0_zero, best),
            iterations: trace.len(),
            corral: final_eval.stats.clone(),
            infeasibility: verdict,
            gap,
            stages,
            warnings,
            lambda,
        },
        trace,
    })
}
