//! Maximization of the smoothed dual over `λ ≥ 0`.
//!
//! Three methods share one driver: projected gradient ascent (PGA) with an
//! adaptive starting step and weak-Wolfe line search along the projected
//! path, a projected limited-memory quasi-Newton method (LBFGSB) using the
//! same line search, and Nesterov's accelerated gradient (AGD) with a fixed
//! `1/L` step.

mod history;
mod line_search;

pub use history::{estimate_l, initial_step, IterateHistory};
pub use line_search::{pga_step, weak_wolfe_bisection, LineSearchResult, MAX_BISECTIONS};

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dual::{dot, DualEvaluation, DualOracle};
use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pga,
    Agd,
    Lbfgsb,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pga" => Ok(Method::Pga),
            "agd" => Ok(Method::Agd),
            "lbfgsb" | "lbfgs" => Ok(Method::Lbfgsb),
            other => Err(Error::InvalidConfig(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    /// History length `H` for the Lipschitz estimate.
    pub history: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub c1: f64,
    pub c2: f64,
    /// LBFGSB curvature pairs kept.
    pub memory: usize,
    /// Projected-gradient stopping tolerance; `None` means `1e-8·(1 + ‖b‖)`.
    pub tol_grad: Option<f64>,
    /// AGD with step `min(1/L_t, η_max)` from the history estimate.
    pub adaptive_agd: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Lbfgsb,
            max_iters: 1000,
            history: 10,
            eta_min: 1e-6,
            eta_max: 1.0,
            c1: 1e-4,
            c2: 0.9,
            memory: 10,
            tol_grad: None,
            adaptive_agd: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidConfig("need 0 < c1 < c2 < 1".into()));
        }
        if !(self.eta_min > 0.0 && self.eta_min <= self.eta_max) {
            return Err(Error::InvalidConfig("need 0 < eta_min ≤ eta_max".into()));
        }
        if self.history == 0 {
            return Err(Error::InvalidConfig("history length must be at least 1".into()));
        }
        Ok(())
    }
}

/// One optimizer iteration as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub g: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub wall_ms: f64,
    pub evals: usize,
    pub mean_mu: f64,
    pub vertex_frac: f64,
    /// The line search stopped without meeting both Wolfe conditions.
    pub early_exit: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub records: Vec<IterRecord>,
}

impl OptimizerTrace {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.g)
    }
}

/// `‖λ − max(λ + ∇g, 0)‖`
pub fn projected_grad_norm(lambda: &[f64], grad: &[f64]) -> f64 {
    lambda
        .iter()
        .zip(grad)
        .map(|(l, g)| {
            let d = l - (l + g).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Largest singular value of the coupling matrix by power iteration on `AᵀA`.
pub fn sigma_max(p: &Problem, iters: usize, tol: f64) -> f64 {
    let m = p.m();
    if m == 0 || p.n() == 0 {
        return 0.0;
    }
    let mut u = vec![1.0 / (m as f64).sqrt(); m];
    let mut est = 0.0;
    for _ in 0..iters {
        // w = A Aᵀ u
        let mut w = vec![0.0; m];
        for blk in p.blocks() {
            let mut t = vec![0.0; blk.dim()];
            blk.matrix.add_transpose_mul(&u, &mut t);
            blk.matrix.add_mul(&t, &mut w);
        }
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        u.iter_mut().zip(&w).for_each(|(a, b)| *a = b / norm);
        let done = (next - est).abs() <= tol * next;
        est = next;
        if done {
            break;
        }
    }
    est
}

struct AgdState {
    y: Vec<f64>,
    y_eval: DualEvaluation,
    t: f64,
    lipschitz: f64,
}

/// Stateful dual ascent; [`DualAscent::run`] can be called repeatedly to
/// continue from where the previous call stopped.
pub struct DualAscent<'o, 'p> {
    oracle: &'o DualOracle<'p>,
    gamma: f64,
    cfg: OptimizerConfig,
    tol: f64,
    current: DualEvaluation,
    history: IterateHistory,
    pairs: VecDeque<(Vec<f64>, Vec<f64>)>,
    agd: Option<AgdState>,
    iter: usize,
    evals: usize,
    converged: bool,
    warnings: Vec<String>,
    trace: OptimizerTrace,
    started: Instant,
}

impl<'o, 'p> DualAscent<'o, 'p> {
    pub fn new(oracle: &'o DualOracle<'p>, gamma: f64, lambda0: &[f64], cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        if lambda0.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::InvalidConfig("initial multipliers must be nonnegative".into()));
        }
        let p = oracle.problem();
        let current = oracle.eval(lambda0, gamma, false)?;
        let tol = cfg.tol_grad.unwrap_or_else(|| 1e-8 * (1.0 + dot(p.b(), p.b()).sqrt()));
        let mut history = IterateHistory::new(cfg.history);
        history.push(&current.lambda, &current.grad);
        let agd = if cfg.method == Method::Agd {
            let s = sigma_max(p, 20, 1e-6);
            Some(AgdState {
                y: lambda0.to_vec(),
                y_eval: current.clone(),
                t: 1.0,
                lipschitz: s * s / gamma,
            })
        } else {
            None
        };
        let converged = projected_grad_norm(&current.lambda, &current.grad) <= tol;
        Ok(DualAscent {
            oracle,
            gamma,
            cfg,
            tol,
            current,
            history,
            pairs: VecDeque::new(),
            agd,
            iter: 0,
            evals: 1,
            converged,
            warnings: Vec::new(),
            trace: OptimizerTrace::default(),
            started: Instant::now(),
        })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.current.lambda
    }

    pub fn current(&self) -> &DualEvaluation {
        &self.current
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    pub fn evaluations(&self) -> usize {
        self.evals
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn trace(&self) -> &OptimizerTrace {
        &self.trace
    }

    /// AGD's global Lipschitz bound `σ_max(A)²/γ`, if AGD is selected.
    pub fn agd_lipschitz(&self) -> Option<f64> {
        self.agd.as_ref().map(|a| a.lipschitz)
    }

    /// Runs up to `n` iterations, stopping early on convergence. Returns the
    /// number of iterations performed.
    pub fn run(&mut self, n: usize) -> Result<usize> {
        let mut done = 0;
        while done < n && !self.converged {
            self.step()?;
            done += 1;
        }
        Ok(done)
    }

    /// One iteration of the configured method.
    pub fn step(&mut self) -> Result<()> {
        if self.converged {
            return Ok(());
        }
        self.iter += 1;
        let outcome = match self.cfg.method {
            Method::Pga => self.line_search_step(false),
            Method::Lbfgsb => self.line_search_step(true),
            Method::Agd => self.agd_step(),
        };
        let (step, early_exit) = match outcome {
            Ok(s) => s,
            Err(Error::NoImprovement) => {
                self.converged = true;
                self.warnings
                    .push(format!("iteration {}: line search found no ascent; stopping", self.iter));
                (0.0, true)
            }
            Err(e) => return Err(e),
        };
        let grad_norm = projected_grad_norm(&self.current.lambda, &self.current.grad);
        if grad_norm <= self.tol {
            self.converged = true;
        }
        self.trace.records.push(IterRecord {
            iter: self.iter,
            g: self.current.g,
            grad_norm,
            step,
            wall_ms: self.started.elapsed().as_secs_f64() * 1e3,
            evals: self.evals,
            mean_mu: self.current.stats.mean_mu,
            vertex_frac: self.current.stats.vertex_fraction(),
            early_exit,
        });
        Ok(())
    }

    fn line_search_step(&mut self, quasi_newton: bool) -> Result<(f64, bool)> {
        let lambda = self.current.lambda.clone();
        let grad = self.current.grad.clone();
        let mut d = grad.clone();
        let mut eta0 = None;
        if quasi_newton {
            let free: Vec<bool> = lambda.iter().zip(&grad).map(|(&l, &g)| l > 0.0 || g > 0.0).collect();
            for (dj, &f) in d.iter_mut().zip(&free) {
                if !f {
                    *dj = 0.0;
                }
            }
            if !self.pairs.is_empty() {
                let qn = two_loop(&d, &self.pairs, &free);
                if dot(&qn, &d) > 0.0 {
                    d = qn;
                    eta0 = Some(1.0);
                }
            }
        }
        let eta0 = eta0.unwrap_or_else(|| {
            let l_t = estimate_l(&self.history).ok();
            initial_step(self.iter, self.cfg.history, self.cfg.eta_min, self.cfg.eta_max, l_t)
        });

        let dphi0 = path_slope(&lambda, &d, &grad, 0.0);
        if !(dphi0 > 0.0) {
            return Err(Error::NoImprovement);
        }
        let mut evaluated: Vec<(f64, DualEvaluation)> = Vec::new();
        let oracle = self.oracle;
        let gamma = self.gamma;
        let result = weak_wolfe_bisection(
            |eta| {
                let trial = pga_step(&lambda, &d, eta);
                let ev = oracle.eval(&trial, gamma, false)?;
                let slope = path_slope(&lambda, &d, &ev.grad, eta);
                let v = ev.g;
                evaluated.push((eta, ev));
                Ok((v, slope))
            },
            self.current.g,
            dphi0,
            eta0,
            self.cfg.c1,
            self.cfg.c2,
        );
        self.evals += evaluated.len();
        let result = result?;
        let (_, next) = evaluated
            .into_iter()
            .rev()
            .find(|(eta, _)| *eta == result.eta)
            .expect("accepted step was evaluated");

        if quasi_newton && self.cfg.memory > 0 {
            let s: Vec<f64> = next.lambda.iter().zip(&lambda).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(&next.grad).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 1e-12 {
                if self.pairs.len() == self.cfg.memory {
                    self.pairs.pop_front();
                }
                self.pairs.push_back((s, y));
            }
        }
        self.history.push(&next.lambda, &next.grad);
        self.current = next;
        Ok((result.eta, result.early_exit))
    }

    fn agd_step(&mut self) -> Result<(f64, bool)> {
        let l_t = if self.cfg.adaptive_agd { estimate_l(&self.history).ok() } else { None };
        let agd = self.agd.as_mut().expect("AGD state");
        let step = match l_t {
            Some(l) if l > 0.0 => (1.0 / l).min(self.cfg.eta_max),
            _ if agd.lipschitz > 0.0 => 1.0 / agd.lipschitz,
            _ => self.cfg.eta_max,
        };
        let next_lambda = pga_step(&agd.y, &agd.y_eval.grad, step);
        let next = self.oracle.eval(&next_lambda, self.gamma, false)?;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * agd.t * agd.t).sqrt());
        let beta = (agd.t - 1.0) / t_next;
        let y: Vec<f64> = next_lambda
            .iter()
            .zip(&self.current.lambda)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        let y_eval = if beta == 0.0 {
            next.clone()
        } else {
            self.evals += 1;
            self.oracle.eval(&y, self.gamma, false)?
        };
        self.evals += 1;
        agd.y = y;
        agd.y_eval = y_eval;
        agd.t = t_next;
        self.history.push(&next.lambda, &next.grad);
        self.current = next;
        Ok((step, false))
    }
}

/// `φ'(η)` along `λ(η) = max(λ + ηd, 0)`: only coordinates that are positive
/// at `η` move, so the slope sums `∇g_j d_j` over them. At `η = 0` the
/// coordinates leaving zero (`λ_j = 0, d_j > 0`) count as free.
fn path_slope(lambda: &[f64], d: &[f64], grad: &[f64], eta: f64) -> f64 {
    let mut s = 0.0;
    for ((&l, &dj), &g) in lambda.iter().zip(d).zip(grad) {
        let free = if eta == 0.0 { l > 0.0 || dj > 0.0 } else { l + eta * dj > 0.0 };
        if free {
            s += g * dj;
        }
    }
    s
}

/// Two-loop recursion on the free coordinates. Pairs are `(s, y)` with
/// `y = ∇g_old − ∇g_new`, so `sᵀy > 0` for the concave dual.
fn two_loop(q0: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>)>, free: &[bool]) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(&a, &f)| if f { a } else { 0.0 }).collect() };
    let masked: Vec<(Vec<f64>, Vec<f64>)> = pairs.iter().map(|(s, y)| (mask(s), mask(y))).collect();
    let mut q = q0.to_vec();
    let mut alphas = Vec::with_capacity(masked.len());
    for (s, y) in masked.iter().rev() {
        let sy = dot(s, y);
        if sy <= 1e-12 {
            alphas.push(0.0);
            continue;
        }
        let a = dot(s, &q) / sy;
        q.iter_mut().zip(y).for_each(|(qv, yv)| *qv -= a * yv);
        alphas.push(a);
    }
    if let Some((s, y)) = masked.iter().rev().find(|(s, y)| dot(s, y) > 1e-12) {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= scale);
    }
    for ((s, y), a) in masked.iter().zip(alphas.iter().rev()) {
        let sy = dot(s, y);
        if sy <= 1e-12 {
            continue;
        }
        let b = dot(y, &q) / sy;
        q.iter_mut().zip(s).for_each(|(qv, sv)| *qv += (a - b) * sv);
    }
    mask(&q)
}

/// Result of [`maximize_dual`].
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub lambda: Vec<f64>,
    pub eval: DualEvaluation,
    pub trace: OptimizerTrace,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// Maximizes `g_γ` from `λ₀` with the configured method.
pub fn maximize_dual_with(
    oracle: &DualOracle<'_>,
    gamma: f64,
    lambda0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<DualSolution> {
    let mut run = DualAscent::new(oracle, gamma, lambda0, cfg.clone())?;
    run.run(cfg.max_iters)?;
    Ok(DualSolution {
        lambda: run.current.lambda.clone(),
        converged: run.converged,
        iterations: run.iter,
        warnings: run.warnings.clone(),
        trace: run.trace.clone(),
        eval: run.current,
    })
}

pub fn maximize_dual(p: &Problem, gamma: f64, lambda0: &[f64], cfg: &OptimizerConfig) -> Result<DualSolution> {
    maximize_dual_with(&DualOracle::new(p), gamma, lambda0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Block, Polytope, SparseBlock};

    fn scalar_box(gamma_b: f64) -> Problem {
        let blk = Block::new(0, vec![-1.0], SparseBlock::from_dense_rows(&[vec![1.0]]), Polytope::Box);
        Problem::new(vec![blk], vec![gamma_b])
    }

    #[test]
    fn decoupled_converges_immediately() {
        let blk = Block::new(0, vec![1.0, -2.0], SparseBlock::zeros(2, 2), Polytope::SimplexEq);
        let p = Problem::new(vec![blk], vec![0.3, 1.5]);
        for method in [Method::Pga, Method::Agd, Method::Lbfgsb] {
            let cfg = OptimizerConfig { method, ..Default::default() };
            let sol = maximize_dual(&p, 0.1, &[0.0, 0.0], &cfg).unwrap();
            assert!(sol.converged);
            assert!(sol.iterations <= 1);
            assert_eq!(sol.lambda, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn scalar_box_matches_grid() {
        let p = scalar_box(0.5);
        let gamma = 0.1;
        // grid oracle for argmax of g(λ)
        let g = |l: f64| crate::dual::eval_dual(&p, &[l], gamma, false).unwrap().g;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=200_000 {
            let l = i as f64 * 1e-5;
            let v = g(l);
            if v > best.1 {
                best = (l, v);
            }
        }
        for method in [Method::Pga, Method::Agd, Method::Lbfgsb] {
            let cfg = OptimizerConfig { method, ..Default::default() };
            let sol = maximize_dual(&p, gamma, &[0.0], &cfg).unwrap();
            assert!((sol.lambda[0] - best.0).abs() < 1e-4, "{method:?}: {} vs {}", sol.lambda[0], best.0);
        }
    }

    #[test]
    fn sigma_max_of_diagonal() {
        let blk = Block::new(
            0,
            vec![0.0; 2],
            SparseBlock::from_dense_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]),
            Polytope::Box,
        );
        let p = Problem::new(vec![blk], vec![1.0, 1.0]);
        assert!((sigma_max(&p, 100, 1e-12) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let cfg = OptimizerConfig { c1: 0.95, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig { eta_min: 2.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!("lbfgsb".parse::<Method>().is_ok());
        assert!("newton".parse::<Method>().is_err());
    }
}
