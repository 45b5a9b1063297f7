//! Infeasibility detection, primal repair, duality gaps and a greedy baseline.

use serde::{Deserialize, Serialize};

use crate::dual::{dot, DualOracle};
use crate::error::{Error, Result};
use crate::optim::{DualAscent, OptimizerConfig};
use crate::problem::{Polytope, PrimalPoint, Problem};
use crate::projection::{linear_minimizer, project};

/// Upper bound on the primal optimum of a feasible problem:
/// `Σ_i max_{x_i∈C_i} c_iᵀx_i + (γ/2)‖x_i‖²`.
///
/// The block term is convex, so the max sits at a vertex; on 0/1 vertices
/// `‖v‖² = 1ᵀv` and the max is a linear one.
pub fn infeasibility_bound(p: &Problem, gamma: f64) -> Result<f64> {
    let mut total = 0.0;
    for (i, blk) in p.blocks().iter().enumerate() {
        let term = match &blk.polytope {
            Polytope::General { vertices } => vertices
                .iter()
                .map(|v| dot(&blk.cost, v) + 0.5 * gamma * dot(v, v))
                .fold(f64::NEG_INFINITY, f64::max),
            poly => {
                let score: Vec<f64> = blk.cost.iter().map(|c| -(c + 0.5 * gamma)).collect();
                -linear_minimizer(poly, &score).map_err(|e| e.in_block(i))?.1
            }
        };
        total += term;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibilityStatus {
    /// Some dual value exceeded the primal bound.
    ProvenInfeasible,
    /// The dual is above the relaxed reference by the suspicion factor and
    /// still rising.
    SuspectedInfeasible,
    NoEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityVerdict {
    pub status: InfeasibilityStatus,
    pub bound: f64,
    pub max_value: f64,
    /// First trace index above the bound.
    pub witness: Option<usize>,
    pub relaxed_reference: Option<f64>,
}

/// Classifies a trace of `g_γ` values.
///
/// Weak duality makes any `g_γ(λ) > bound` a certificate. Without one, the
/// run is suspected infeasible when its last value exceeds
/// `G + (factor − 1)|G|` for the relaxed reference `G` and the last tenth of
/// the trace is still increasing.
pub fn check_infeasible(values: &[f64], bound: f64, relaxed: Option<f64>, factor: f64) -> InfeasibilityVerdict {
    let max_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let witness = values.iter().position(|&v| v > bound);
    let status = if witness.is_some() {
        InfeasibilityStatus::ProvenInfeasible
    } else {
        let suspected = match (relaxed, values.last()) {
            (Some(g), Some(&last)) => {
                let n = values.len();
                let rising = n > 1 && last > values[n - 1 - ((n - 1) / 10).max(1)];
                last > g + (factor - 1.0) * g.abs() && rising
            }
            _ => false,
        };
        if suspected {
            InfeasibilityStatus::SuspectedInfeasible
        } else {
            InfeasibilityStatus::NoEvidence
        }
    };
    InfeasibilityVerdict {
        status,
        bound,
        max_value,
        witness,
        relaxed_reference: relaxed,
    }
}

/// `max g_γ` over the problem with every equality polytope relaxed.
pub fn relaxation_reference(p: &Problem, gamma: f64, cfg: &OptimizerConfig) -> Result<f64> {
    let relaxed = p.relaxed();
    let sol = crate::optim::maximize_dual(&relaxed, gamma, &vec![0.0; relaxed.m()], cfg)?;
    Ok(sol.eval.g)
}

/// Runs dual ascent from zero, stopping as soon as the bound is crossed.
pub fn detect_infeasibility(
    p: &Problem,
    gamma: f64,
    cfg: &OptimizerConfig,
    relaxed: Option<f64>,
    factor: f64,
) -> Result<(InfeasibilityVerdict, usize)> {
    let bound = infeasibility_bound(p, gamma)?;
    let oracle = DualOracle::new(p);
    let mut run = DualAscent::new(&oracle, gamma, &vec![0.0; p.m()], cfg.clone())?;
    let mut values = vec![run.current().g];
    while run.iterations() < cfg.max_iters && !run.converged() && values.last().is_some_and(|&v| v <= bound) {
        match run.step() {
            Ok(()) => values.push(run.current().g),
            Err(Error::NoImprovement) => break,
            Err(e) => return Err(e),
        }
    }
    Ok((check_infeasible(&values, bound, relaxed, factor), run.iterations()))
}

/// Scales blocks down until `Ax ≤ b` holds.
///
/// Needs `A ≥ 0`, `b ≥ 0`, and shrinkable polytopes for every block that has
/// to move: `β x_i ∈ C_i` for `β ∈ [0, 1]`, which holds exactly when the
/// origin is in `C_i`.
pub fn repair_to_feasible(p: &Problem, x: &PrimalPoint) -> Result<PrimalPoint> {
    if !p.is_nonnegative_class() {
        return Err(Error::RepairUnavailable("constraint data has negative entries".into()));
    }
    let m = p.m();
    let mut usage = vec![0.0; m];
    let mut contrib = Vec::with_capacity(p.num_blocks());
    for (i, blk) in p.blocks().iter().enumerate() {
        let mut ci = vec![0.0; m];
        blk.matrix.add_mul(x.block(p, i), &mut ci);
        for (u, c) in usage.iter_mut().zip(&ci) {
            *u += c;
        }
        contrib.push(ci);
    }
    let violated: Vec<usize> = (0..m).filter(|&j| usage[j] > p.b()[j]).collect();
    let mut out = x.clone();
    if violated.is_empty() {
        return Ok(out);
    }
    for (i, blk) in p.blocks().iter().enumerate() {
        let beta = violated
            .iter()
            .filter(|&&j| contrib[i][j] > 0.0)
            .map(|&j| p.b()[j] / usage[j])
            .fold(1.0f64, f64::min);
        if beta >= 1.0 {
            continue;
        }
        if !contains_origin(&blk.polytope, blk.dim())? {
            return Err(Error::RepairUnavailable(format!(
                "block {i} ({}) must shrink but does not contain the origin",
                blk.polytope.name()
            )));
        }
        for v in out.block_mut(p, i) {
            *v *= beta;
        }
    }
    let feas = p.is_feasible(&out, 1e-9);
    if !feas.feasible {
        return Err(Error::RepairUnavailable(format!(
            "repaired point still violates by {:.3e}",
            feas.max_violation
        )));
    }
    Ok(out)
}

fn contains_origin(poly: &Polytope, dim: usize) -> Result<bool> {
    Ok(match poly {
        Polytope::SimplexEq | Polytope::BoxCutEq { .. } => false,
        Polytope::General { .. } => {
            let r = project(poly, &vec![0.0; dim])?;
            dot(&r.x, &r.x).sqrt() <= 1e-9
        }
        _ => true,
    })
}

/// `cᵀx + Σ_j max(0, (Ax − b)_j)`
pub fn penalized_objective(p: &Problem, x: &PrimalPoint) -> Result<f64> {
    let lin = p.objective(x, 0.0)?;
    let r = p.residual(x)?;
    Ok(lin + r.iter().map(|v| v.max(0.0)).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityGap {
    pub primal: f64,
    pub dual: f64,
    /// `cᵀx̃ − g₀(λ)`, nonnegative by weak duality.
    pub gap: f64,
    pub relative: f64,
}

/// Gap between a feasible primal point and the unsmoothed dual at `λ`.
pub fn weak_duality_gap(p: &Problem, x: &PrimalPoint, lambda: &[f64]) -> Result<DualityGap> {
    let feas = p.is_feasible(x, 1e-9);
    if !feas.feasible {
        return Err(Error::InfeasibleCandidate(feas.max_violation));
    }
    let primal = p.objective(x, 0.0)?;
    let dual = DualOracle::new(p).eval_g0(lambda)?.value;
    let gap = primal - dual;
    Ok(DualityGap {
        primal,
        dual,
        gap,
        relative: gap / primal.abs().max(1.0),
    })
}

/// Block-by-block greedy on a nonnegative instance.
///
/// Blocks are visited in order; each picks the cheapest items (or listed
/// vertices) whose constraint usage still fits in the remaining budget.
/// Equality kinds must reach their cardinality, otherwise the block is
/// reported as [`Error::BaselineInfeasible`].
pub fn greedy_baseline(p: &Problem) -> Result<(PrimalPoint, f64)> {
    if !p.is_nonnegative_class() {
        return Err(Error::InvalidConfig("greedy baseline needs A ≥ 0 and b ≥ 0".into()));
    }
    let m = p.m();
    let mut remaining = p.b().to_vec();
    let mut x = PrimalPoint::zeros(p);
    for (i, blk) in p.blocks().iter().enumerate() {
        let k = blk.dim();
        let mut cols = vec![Vec::new(); k];
        for &(r, c, v) in blk.matrix.entries() {
            cols[c].push((r, v));
        }
        let fits = |rem: &[f64], col: &[(usize, f64)]| col.iter().all(|&(r, v)| v <= rem[r] + 1e-12);
        let take = |rem: &mut [f64], col: &[(usize, f64)]| {
            for &(r, v) in col {
                rem[r] -= v;
            }
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| blk.cost[a].total_cmp(&blk.cost[b]).then(a.cmp(&b)));

        if let Polytope::General { vertices } = &blk.polytope {
            let mut vorder: Vec<usize> = (0..vertices.len()).collect();
            let costs: Vec<f64> = vertices.iter().map(|v| dot(&blk.cost, v)).collect();
            vorder.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
            let mut chosen = None;
            for r in vorder {
                let mut u = vec![0.0; m];
                blk.matrix.add_mul(&vertices[r], &mut u);
                if u.iter().zip(&remaining).all(|(a, b)| *a <= b + 1e-12) {
                    for (rem, a) in remaining.iter_mut().zip(&u) {
                        *rem -= a;
                    }
                    chosen = Some(r);
                    break;
                }
            }
            let r = chosen.ok_or(Error::BaselineInfeasible(i))?;
            x.block_mut(p, i).copy_from_slice(&vertices[r]);
            continue;
        }

        let (cap, exact, only_negative) = match blk.polytope {
            Polytope::Box => (k, false, true),
            Polytope::SimplexEq => (1, true, false),
            Polytope::SimplexIq => (1, false, true),
            Polytope::BoxCutEq { delta } => (delta, true, false),
            Polytope::BoxCutIq { delta } => (delta, false, true),
            Polytope::Parity => (k, false, true),
            Polytope::General { .. } => unreachable!(),
        };
        let mut picked = Vec::new();
        for &j in &order {
            if picked.len() == cap {
                break;
            }
            if only_negative && blk.cost[j] >= 0.0 {
                break;
            }
            if fits(&remaining, &cols[j]) {
                take(&mut remaining, &cols[j]);
                picked.push(j);
            }
        }
        if exact && picked.len() < cap {
            return Err(Error::BaselineInfeasible(i));
        }
        if matches!(blk.polytope, Polytope::Parity) && picked.len() % 2 == 1 {
            let j = picked.pop().expect("odd count is nonzero");
            for &(r, v) in &cols[j] {
                remaining[r] += v;
            }
        }
        let xi = x.block_mut(p, i);
        for j in picked {
            xi[j] = 1.0;
        }
    }
    let value = p.objective(&x, 0.0)?;
    Ok((x, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Block, SparseBlock};
    use crate::reference::enumerate_vertices;

    fn block(id: usize, cost: Vec<f64>, rows: &[Vec<f64>], poly: Polytope) -> Block {
        Block::new(id, cost, SparseBlock::from_dense_rows(rows), poly)
    }

    #[test]
    fn bound_matches_vertex_scan() {
        let polys = [
            Polytope::Box,
            Polytope::SimplexEq,
            Polytope::SimplexIq,
            Polytope::BoxCutEq { delta: 2 },
            Polytope::BoxCutIq { delta: 2 },
            Polytope::Parity,
        ];
        let cost = vec![-0.7, 0.3, -0.1, 0.9];
        for poly in polys {
            let p = Problem::new(vec![block(0, cost.clone(), &[vec![1.0; 4]], poly.clone())], vec![1.0]);
            let scan = enumerate_vertices(&poly, 4)
                .iter()
                .map(|v| dot(&cost, v) + 0.25 * dot(v, v))
                .fold(f64::NEG_INFINITY, f64::max);
            let got = infeasibility_bound(&p, 0.5).unwrap();
            assert!((got - scan).abs() < 1e-12, "{poly:?}: {got} vs {scan}");
        }
    }

    #[test]
    fn trace_classification() {
        let v = check_infeasible(&[1.0, 2.0, 11.0], 10.0, None, 2.0);
        assert_eq!(v.status, InfeasibilityStatus::ProvenInfeasible);
        assert_eq!(v.witness, Some(2));
        let v = check_infeasible(&[1.0, 2.0, 3.0], 10.0, Some(1.0), 2.0);
        assert_eq!(v.status, InfeasibilityStatus::SuspectedInfeasible);
        let v = check_infeasible(&[1.0, 3.0, 3.0], 10.0, Some(1.0), 2.0);
        assert_eq!(v.status, InfeasibilityStatus::NoEvidence);
        let v = check_infeasible(&[1.0, 1.5, 1.9], 10.0, Some(1.0), 2.0);
        assert_eq!(v.status, InfeasibilityStatus::NoEvidence);
    }

    #[test]
    fn repair_scales_iq_blocks() {
        let b1 = block(0, vec![-1.0, -1.0], &[vec![1.0, 1.0]], Polytope::Box);
        let b2 = block(1, vec![-1.0, -1.0], &[vec![1.0, 1.0]], Polytope::Box);
        let p = Problem::new(vec![b1, b2], vec![2.0]);
        let x = PrimalPoint(vec![1.0, 1.0, 1.0, 0.0]);
        let y = repair_to_feasible(&p, &x).unwrap();
        let r = p.residual(&y).unwrap();
        assert!(r[0] <= 1e-12);
        assert!((y.0[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn repair_rejects_equality_blocks() {
        let b1 = block(0, vec![0.0, 0.0], &[vec![1.0, 1.0]], Polytope::SimplexEq);
        let p = Problem::new(vec![b1], vec![0.5]);
        let x = PrimalPoint(vec![1.0, 0.0]);
        assert!(matches!(repair_to_feasible(&p, &x), Err(Error::RepairUnavailable(_))));
    }

    #[test]
    fn penalty_and_gap() {
        let b1 = block(0, vec![-1.0, 2.0], &[vec![1.0, 1.0]], Polytope::SimplexIq);
        let p = Problem::new(vec![b1], vec![0.5]);
        assert_eq!(penalized_objective(&p, &PrimalPoint(vec![1.0, 0.0])).unwrap(), -0.5);
        let gap = weak_duality_gap(&p, &PrimalPoint(vec![0.5, 0.0]), &[1.0]).unwrap();
        // g₀(1) = min(0, 0, 3) − 0.5
        assert_eq!(gap.dual, -0.5);
        assert_eq!(gap.gap, 0.0);
        assert!(matches!(
            weak_duality_gap(&p, &PrimalPoint(vec![1.0, 0.0]), &[1.0]),
            Err(Error::InfeasibleCandidate(_))
        ));
    }

    #[test]
    fn greedy_respects_budget() {
        let b1 = block(0, vec![-3.0, -2.0, 1.0], &[vec![1.0, 1.0, 1.0]], Polytope::SimplexEq);
        let b2 = block(1, vec![-5.0, -1.0, 0.0], &[vec![1.0, 0.5, 0.0]], Polytope::SimplexEq);
        let p = Problem::new(vec![b1, b2], vec![1.5]);
        let (x, v) = greedy_baseline(&p).unwrap();
        assert_eq!(x.0, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(v, -4.0);
        let p = Problem::new(vec![p.blocks()[0].clone()], vec![0.5]);
        assert!(matches!(greedy_baseline(&p), Err(Error::BaselineInfeasible(0))));
    }
}
