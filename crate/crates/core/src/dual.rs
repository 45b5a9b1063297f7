//! Smoothed dual `g_γ(λ) = min_{x ∈ C} cᵀx + (γ/2)‖x‖² + λᵀ(Ax − b)`, its
//! gradient `Ax* − b`, the unsmoothed value `g₀(λ)`, and corral statistics.
//!
//! Blocks are evaluated in fixed chunks (see [`chunk_ranges`]), possibly in
//! parallel, and the chunk partials are folded in order, so every result is
//! bit-identical for any worker count.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{block_objective, chunk_ranges, Block, Polytope, PrimalPoint, Problem};
use crate::projection::{self, linear_minimizer, ProjectionResult};

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

/// `−(A_iᵀλ + c_i)/γ`
pub fn block_target(block: &Block, lambda: &[f64], gamma: f64) -> Vec<f64> {
    let mut t = block.cost.clone();
    block.matrix.add_transpose_mul(lambda, &mut t);
    t.iter_mut().for_each(|v| *v = -*v / gamma);
    t
}

/// `x_i* = Π_{C_i}[−(A_iᵀλ + c_i)/γ]`
pub fn block_argmin(block: &Block, lambda: &[f64], gamma: f64) -> Result<ProjectionResult> {
    check_gamma(gamma)?;
    projection::project(&block.polytope, &block_target(block, lambda, gamma))
}

/// Aggregate corral dimensions over blocks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorralStats {
    pub num_blocks: usize,
    /// Mean corral dimension `Σμ_i / I`.
    pub mean_mu: f64,
    /// Blocks whose solution is a vertex.
    pub vertex_count: usize,
    /// `histogram[d]` counts blocks with corral dimension `d`.
    pub histogram: Vec<usize>,
}

impl CorralStats {
    pub fn from_dims(dims: &[usize]) -> Self {
        let max = dims.iter().copied().max().unwrap_or(0);
        let mut histogram = vec![0; if dims.is_empty() { 0 } else { max + 1 }];
        for &d in dims {
            histogram[d] += 1;
        }
        let total: usize = dims.iter().sum();
        CorralStats {
            num_blocks: dims.len(),
            mean_mu: if dims.is_empty() { 0.0 } else { total as f64 / dims.len() as f64 },
            vertex_count: histogram.first().copied().unwrap_or(0),
            histogram,
        }
    }

    pub fn vertex_fraction(&self) -> f64 {
        if self.num_blocks == 0 {
            return 1.0;
        }
        self.vertex_count as f64 / self.num_blocks as f64
    }
}

pub fn corral_stats(results: &[ProjectionResult]) -> CorralStats {
    let dims: Vec<usize> = results.iter().map(|r| r.corral_dim).collect();
    CorralStats::from_dims(&dims)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualEvaluation {
    pub lambda: Vec<f64>,
    pub gamma: f64,
    /// `g_γ(λ)`
    pub g: f64,
    /// `Ax* − b`
    pub grad: Vec<f64>,
    /// `cᵀx* + (γ/2)‖x*‖²`
    pub primal_part: f64,
    pub x_star: Option<PrimalPoint>,
    /// Per-block corral dimensions.
    pub dims: Vec<usize>,
    pub stats: CorralStats,
}

/// `g₀(λ)` with the minimizing vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct G0Evaluation {
    pub value: f64,
    pub x_bar: PrimalPoint,
    /// `A x̄ − b`, a supergradient of `g₀`.
    pub residual: Vec<f64>,
}

struct ChunkPartial {
    value: f64,
    ax: Vec<f64>,
    x: Vec<f64>,
    dims: Vec<usize>,
}

/// Dual evaluator bound to one problem, optionally with its own worker pool.
pub struct DualOracle<'a> {
    problem: &'a Problem,
    pool: Option<rayon::ThreadPool>,
    chunks: Vec<Range<usize>>,
}

impl<'a> DualOracle<'a> {
    /// Serial evaluator.
    pub fn new(problem: &'a Problem) -> Self {
        DualOracle {
            problem,
            pool: None,
            chunks: chunk_ranges(problem.num_blocks()).collect(),
        }
    }

    /// Evaluator running chunks on `threads` workers (1 means serial).
    pub fn with_threads(problem: &'a Problem, threads: usize) -> Result<Self> {
        let mut oracle = Self::new(problem);
        if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            oracle.pool = Some(pool);
        }
        Ok(oracle)
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    fn map_chunks<T: Send>(&self, f: impl Fn(Range<usize>) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        match &self.pool {
            Some(pool) => pool.install(|| self.chunks.par_iter().cloned().map(&f).collect()),
            None => self.chunks.iter().cloned().map(f).collect(),
        }
    }

    fn check_lambda(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.problem.m() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.m(),
                got: lambda.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, lambda: &[f64], gamma: f64, retain_x: bool) -> Result<DualEvaluation> {
        check_gamma(gamma)?;
        self.check_lambda(lambda)?;
        let p = self.problem;
        let m = p.m();
        let partials = self.map_chunks(|range| {
            let mut part = ChunkPartial {
                value: 0.0,
                ax: vec![0.0; m],
                x: Vec::new(),
                dims: Vec::with_capacity(range.len()),
            };
            for i in range {
                let blk = &p.blocks()[i];
                let res = block_argmin(blk, lambda, gamma).map_err(|e| e.in_block(i))?;
                part.value += block_objective(&blk.cost, &res.x, gamma);
                blk.matrix.add_mul(&res.x, &mut part.ax);
                part.dims.push(res.corral_dim);
                if retain_x {
                    part.x.extend_from_slice(&res.x);
                }
            }
            Ok(part)
        })?;

        let mut primal_part = 0.0;
        let mut grad = vec![0.0; m];
        let mut dims = Vec::with_capacity(p.num_blocks());
        let mut x = Vec::with_capacity(if retain_x { p.n() } else { 0 });
        for part in partials {
            primal_part += part.value;
            for (t, v) in grad.iter_mut().zip(&part.ax) {
                *t += v;
            }
            dims.extend(part.dims);
            x.extend(part.x);
        }
        for (t, bj) in grad.iter_mut().zip(p.b()) {
            *t -= bj;
        }
        let g = primal_part + dot(lambda, &grad);
        Ok(DualEvaluation {
            lambda: lambda.to_vec(),
            gamma,
            g,
            grad,
            primal_part,
            x_star: retain_x.then_some(PrimalPoint(x)),
            stats: CorralStats::from_dims(&dims),
            dims,
        })
    }

    /// `g₀(λ) = Σ_i min_{x_i ∈ C_i} (c_i + A_iᵀλ)ᵀx_i − λᵀb`
    pub fn eval_g0(&self, lambda: &[f64]) -> Result<G0Evaluation> {
        self.check_lambda(lambda)?;
        let p = self.problem;
        let m = p.m();
        let partials = self.map_chunks(|range| {
            let mut value = 0.0;
            let mut ax = vec![0.0; m];
            let mut x = Vec::new();
            for i in range {
                let blk = &p.blocks()[i];
                let mut score = blk.cost.clone();
                blk.matrix.add_transpose_mul(lambda, &mut score);
                let (id, v) = linear_minimizer(&blk.polytope, &score).map_err(|e| e.in_block(i))?;
                value += v;
                let vertices = match &blk.polytope {
                    Polytope::General { vertices } => Some(vertices.as_slice()),
                    _ => None,
                };
                let xi = id.materialize(blk.dim(), vertices);
                blk.matrix.add_mul(&xi, &mut ax);
                x.extend(xi);
            }
            Ok((value, ax, x))
        })?;
        let mut value = 0.0;
        let mut residual = vec![0.0; m];
        let mut x = Vec::with_capacity(p.n());
        for (v, ax, xs) in partials {
            value += v;
            for (t, a) in residual.iter_mut().zip(&ax) {
                *t += a;
            }
            x.extend(xs);
        }
        for (t, bj) in residual.iter_mut().zip(p.b()) {
            *t -= bj;
        }
        Ok(G0Evaluation {
            value: value - dot(lambda, p.b()),
            x_bar: PrimalPoint(x),
            residual,
        })
    }

    /// Projections of every block at `(λ, γ)`, in block order.
    pub fn block_results(&self, lambda: &[f64], gamma: f64) -> Result<Vec<ProjectionResult>> {
        check_gamma(gamma)?;
        self.check_lambda(lambda)?;
        let p = self.problem;
        let parts = self.map_chunks(|range| {
            range
                .map(|i| block_argmin(&p.blocks()[i], lambda, gamma).map_err(|e| e.in_block(i)))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(parts.into_iter().flatten().collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn eval_dual(p: &Problem, lambda: &[f64], gamma: f64, retain_x: bool) -> Result<DualEvaluation> {
    DualOracle::new(p).eval(lambda, gamma, retain_x)
}

pub fn eval_g0(p: &Problem, lambda: &[f64]) -> Result<G0Evaluation> {
    DualOracle::new(p).eval_g0(lambda)
}
