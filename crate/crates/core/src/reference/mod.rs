//! Exact desk-scale solvers used as independent checks: a dense simplex LP
//! solver for the full problem, an active-set QP for the smoothed primal, and
//! a projection oracle that enumerates faces or vertex subsets.

mod active_set;
mod lp;

pub use active_set::{project_polyhedron, Polyhedron, QpOutcome};
pub use lp::{solve_dense_lp, DenseLp, LpOutcome};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{Polytope, PrimalPoint, Problem};
use crate::projection::parity_nearest_vertex;

/// Largest block dimension accepted by [`reference_qp_project`].
pub const QP_PROJECT_MAX_DIM: usize = 10;

/// All vertices of a polytope of dimension `k`, materialized.
pub fn enumerate_vertices(polytope: &Polytope, k: usize) -> Vec<Vec<f64>> {
    let subsets = |keep: &dyn Fn(u32) -> bool| -> Vec<Vec<f64>> {
        (0u32..1 << k)
            .filter(|&m| keep(m))
            .map(|m| (0..k).map(|j| f64::from((m >> j) & 1)).collect())
            .collect()
    };
    match polytope {
        Polytope::Box => subsets(&|_| true),
        Polytope::SimplexEq => subsets(&|m| m.count_ones() == 1),
        Polytope::SimplexIq => subsets(&|m| m.count_ones() <= 1),
        Polytope::BoxCutEq { delta } => subsets(&|m| m.count_ones() as usize == *delta),
        Polytope::BoxCutIq { delta } => subsets(&|m| m.count_ones() as usize <= *delta),
        Polytope::Parity => subsets(&|m| m.count_ones() % 2 == 0),
        Polytope::General { vertices } => vertices.clone(),
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Exact projection by enumeration, for `K ≤ 10`.
///
/// Box, simplex and box-cut kinds enumerate faces (each coordinate at 0, at 1
/// or free, with the sum constraint active or not). Vertex-described kinds
/// solve the affine least-squares problem on every vertex subset of size up
/// to `K + 1` and keep the best one with nonnegative weights. Parity blocks
/// with `K ≥ 4` go through the inequality description instead.
pub fn reference_qp_project(polytope: &Polytope, xhat: &[f64]) -> Result<Vec<f64>> {
    let k = xhat.len();
    if k > QP_PROJECT_MAX_DIM {
        return Err(Error::ScaleExceeded(format!("reference projection needs K ≤ {QP_PROJECT_MAX_DIM}, got {k}")));
    }
    match polytope {
        Polytope::Box => Ok(face_enumeration(xhat, None, false)),
        Polytope::SimplexEq => Ok(face_enumeration(xhat, Some(1.0), true)),
        Polytope::SimplexIq => Ok(face_enumeration(xhat, Some(1.0), false)),
        Polytope::BoxCutEq { delta } => Ok(face_enumeration(xhat, Some(*delta as f64), true)),
        Polytope::BoxCutIq { delta } => Ok(face_enumeration(xhat, Some(*delta as f64), false)),
        Polytope::Parity if k > 3 => {
            let start = parity_nearest_vertex(xhat).materialize(k, None);
            let out = project_polyhedron(&parity_hrep(k), xhat, &start)?;
            Ok(out.x)
        }
        _ => simplicial_enumeration(&enumerate_vertices(polytope, k), xhat),
    }
}

/// `0 ≤ x ≤ 1` and `Σ_S x − Σ_{S̄} x ≤ |S| − 1` for every odd `S`.
pub fn parity_hrep(k: usize) -> Polyhedron {
    let mut ineq = Vec::new();
    for j in 0..k {
        let mut lo = vec![0.0; k];
        lo[j] = -1.0;
        ineq.push((lo, 0.0));
        let mut hi = vec![0.0; k];
        hi[j] = 1.0;
        ineq.push((hi, 1.0));
    }
    for m in 0u32..1 << k {
        if m.count_ones() % 2 == 1 {
            let row = (0..k).map(|j| if (m >> j) & 1 == 1 { 1.0 } else { -1.0 }).collect();
            ineq.push((row, f64::from(m.count_ones()) - 1.0));
        }
    }
    Polyhedron { ineq, eq: Vec::new() }
}

fn face_enumeration(xhat: &[f64], sum_bound: Option<f64>, equality: bool) -> Vec<f64> {
    let k = xhat.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(k as u32);
    let tol = 1e-12;
    let mut state = vec![0u8; k];
    for code in 0..total {
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..k).filter(|&j| state[j] == 2).collect();
        let fixed_sum: f64 = state.iter().filter(|&&s| s == 1).count() as f64;
        let sum_options: &[bool] = match (sum_bound, equality) {
            (None, _) => &[false],
            (Some(_), true) => &[true],
            (Some(_), false) => &[false, true],
        };
        for &active in sum_options {
            let mut x: Vec<f64> = state.iter().map(|&s| if s == 1 { 1.0 } else { 0.0 }).collect();
            if active {
                let s = sum_bound.unwrap();
                if free.is_empty() {
                    if (fixed_sum - s).abs() > tol {
                        continue;
                    }
                } else {
                    let theta = (free.iter().map(|&j| xhat[j]).sum::<f64>() + fixed_sum - s) / free.len() as f64;
                    for &j in &free {
                        x[j] = xhat[j] - theta;
                    }
                }
            } else {
                for &j in &free {
                    x[j] = xhat[j];
                }
            }
            if x.iter().any(|&v| v < -tol || v > 1.0 + tol) {
                continue;
            }
            if let Some(s) = sum_bound {
                if x.iter().sum::<f64>() > s + 1e-10 {
                    continue;
                }
            }
            let d = sq_dist(&x, xhat);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, x));
            }
        }
    }
    best.expect("some face is feasible").1
}

fn simplicial_enumeration(vertices: &[Vec<f64>], xhat: &[f64]) -> Result<Vec<f64>> {
    let k = xhat.len();
    let nv = vertices.len();
    if nv == 0 {
        return Err(Error::EmptyInput("vertex list"));
    }
    let max_size = (k + 1).min(nv);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut count = 0usize;
    let mut subset: Vec<usize> = Vec::with_capacity(max_size);
    fn rec(
        start: usize,
        nv: usize,
        max_size: usize,
        subset: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if !subset.is_empty() && !visit(subset) {
            return false;
        }
        if subset.len() == max_size {
            return true;
        }
        for r in start..nv {
            subset.push(r);
            let ok = rec(r + 1, nv, max_size, subset, visit);
            subset.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut visit = |s: &[usize]| -> bool {
        count += 1;
        if count > 2_000_000 {
            return false;
        }
        if let Some(y) = nonneg_affine_minimizer(vertices, s, xhat) {
            let d = sq_dist(&y, xhat);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, y));
            }
        }
        true
    };
    if !rec(0, nv, max_size, &mut subset, &mut visit) {
        return Err(Error::ScaleExceeded("too many vertex subsets".into()));
    }
    Ok(best.expect("singletons are always candidates").1)
}

/// Affine minimizer over the subset when it is affinely independent and has
/// nonnegative weights.
fn nonneg_affine_minimizer(vertices: &[Vec<f64>], s: &[usize], xhat: &[f64]) -> Option<Vec<f64>> {
    let k = xhat.len();
    let v0 = &vertices[s[0]];
    if s.len() == 1 {
        return Some(v0.clone());
    }
    let d = DMatrix::from_fn(k, s.len() - 1, |row, col| vertices[s[col + 1]][row] - v0[row]);
    let gram = d.transpose() * &d;
    let lu = gram.clone().full_piv_lu();
    if !lu.is_invertible() {
        return None;
    }
    // reject nearly dependent subsets
    let det = lu.determinant().abs();
    let scale: f64 = (0..gram.nrows()).map(|i| gram[(i, i)]).product();
    if det <= 1e-12 * scale {
        return None;
    }
    let r = DVector::from_fn(k, |row, _| xhat[row] - v0[row]);
    let beta = lu.solve(&(d.transpose() * r))?;
    let a0 = 1.0 - beta.sum();
    if a0 < -1e-12 || beta.iter().any(|&b| b < -1e-12) {
        return None;
    }
    let off = &d * &beta;
    Some((0..k).map(|row| v0[row] + off[row]).collect())
}

/// Optimal LP solution with the coupling-row multipliers.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: PrimalPoint,
    pub objective: f64,
    pub lambda: Vec<f64>,
}

/// Variables of one block in the dense LP: either the coordinates themselves
/// or convex weights over an explicit vertex list.
enum BlockVars {
    Direct { offset: usize },
    Hull { offset: usize, vertices: Vec<Vec<f64>> },
}

/// Solves the LP exactly with the dense simplex method.
pub fn reference_lp_solve(p: &Problem) -> Result<LpSolution> {
    let m = p.m();
    let mut vars = Vec::with_capacity(p.num_blocks());
    let mut nvar = 0;
    for blk in p.blocks() {
        let k = blk.dim();
        match &blk.polytope {
            Polytope::Parity | Polytope::General { .. } => {
                if matches!(blk.polytope, Polytope::Parity) && k > 14 {
                    return Err(Error::ScaleExceeded(format!("parity block with K={k}")));
                }
                let vertices = enumerate_vertices(&blk.polytope, k);
                let offset = nvar;
                nvar += vertices.len();
                vars.push(BlockVars::Hull { offset, vertices });
            }
            _ => {
                vars.push(BlockVars::Direct { offset: nvar });
                nvar += k;
            }
        }
    }

    let mut lp = DenseLp {
        c: vec![0.0; nvar],
        a_ub: vec![vec![0.0; nvar]; m],
        b_ub: p.b().to_vec(),
        ..Default::default()
    };
    for (blk, bv) in p.blocks().iter().zip(&vars) {
        let k = blk.dim();
        let dense = blk.matrix.to_dense_rows();
        match bv {
            BlockVars::Direct { offset } => {
                let o = *offset;
                lp.c[o..o + k].copy_from_slice(&blk.cost);
                for (j, row) in dense.iter().enumerate() {
                    lp.a_ub[j][o..o + k].copy_from_slice(row);
                }
                let unit = |j: usize| {
                    let mut r = vec![0.0; nvar];
                    r[o + j] = 1.0;
                    r
                };
                let sum_row = || {
                    let mut r = vec![0.0; nvar];
                    r[o..o + k].iter_mut().for_each(|v| *v = 1.0);
                    r
                };
                let upper = matches!(
                    blk.polytope,
                    Polytope::Box | Polytope::BoxCutEq { .. } | Polytope::BoxCutIq { .. }
                );
                if upper {
                    for j in 0..k {
                        lp.a_ub.push(unit(j));
                        lp.b_ub.push(1.0);
                    }
                }
                match &blk.polytope {
                    Polytope::SimplexEq => {
                        lp.a_eq.push(sum_row());
                        lp.b_eq.push(1.0);
                    }
                    Polytope::SimplexIq => {
                        lp.a_ub.push(sum_row());
                        lp.b_ub.push(1.0);
                    }
                    Polytope::BoxCutEq { delta } => {
                        lp.a_eq.push(sum_row());
                        lp.b_eq.push(*delta as f64);
                    }
                    Polytope::BoxCutIq { delta } => {
                        lp.a_ub.push(sum_row());
                        lp.b_ub.push(*delta as f64);
                    }
                    _ => {}
                }
            }
            BlockVars::Hull { offset, vertices } => {
                let o = *offset;
                let mut weights_row = vec![0.0; nvar];
                for (r, v) in vertices.iter().enumerate() {
                    lp.c[o + r] = blk.cost.iter().zip(v).map(|(c, x)| c * x).sum();
                    for (j, row) in dense.iter().enumerate() {
                        lp.a_ub[j][o + r] = row.iter().zip(v).map(|(a, x)| a * x).sum();
                    }
                    weights_row[o + r] = 1.0;
                }
                lp.a_eq.push(weights_row);
                lp.b_eq.push(1.0);
            }
        }
    }

    let out = solve_dense_lp(&lp)?;
    let mut x = PrimalPoint::zeros(p);
    for (i, bv) in vars.iter().enumerate() {
        let xi = x.block_mut(p, i);
        match bv {
            BlockVars::Direct { offset } => xi.copy_from_slice(&out.x[*offset..*offset + xi.len()]),
            BlockVars::Hull { offset, vertices } => {
                for (r, v) in vertices.iter().enumerate() {
                    let w = out.x[offset + r];
                    if w != 0.0 {
                        for (a, b) in xi.iter_mut().zip(v) {
                            *a += w * b;
                        }
                    }
                }
            }
        }
    }
    Ok(LpSolution {
        x,
        objective: out.objective,
        lambda: out.dual_ub[..m].to_vec(),
    })
}

/// Solution of the smoothed primal `min cᵀx + (γ/2)‖x‖²` with its coupling
/// multipliers, which maximize the smoothed dual.
#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: PrimalPoint,
    pub objective: f64,
    pub lambda: Vec<f64>,
}

/// Inequality description of the whole feasible set, coupling rows first.
fn problem_hrep(p: &Problem) -> Result<Polyhedron> {
    let n = p.n();
    let mut poly = Polyhedron::default();
    let mut coupling = vec![vec![0.0; n]; p.m()];
    for (i, blk) in p.blocks().iter().enumerate() {
        let o = p.block_range(i).start;
        for &(r, c, v) in blk.matrix.entries() {
            coupling[r][o + c] += v;
        }
    }
    for (row, &b) in coupling.into_iter().zip(p.b()) {
        poly.ineq.push((row, b));
    }
    for (i, blk) in p.blocks().iter().enumerate() {
        let range = p.block_range(i);
        let k = blk.dim();
        let embed = |local: &[f64]| {
            let mut r = vec![0.0; n];
            r[range.clone()].copy_from_slice(local);
            r
        };
        let unit = |j: usize, s: f64| {
            let mut r = vec![0.0; k];
            r[j] = s;
            r
        };
        let ones = vec![1.0; k];
        match &blk.polytope {
            Polytope::Parity => {
                for (row, h) in parity_hrep(k).ineq {
                    poly.ineq.push((embed(&row), h));
                }
                continue;
            }
            Polytope::General { .. } => {
                return Err(Error::ScaleExceeded(
                    "general blocks have no inequality description".into(),
                ))
            }
            _ => {}
        }
        for j in 0..k {
            poly.ineq.push((embed(&unit(j, -1.0)), 0.0));
        }
        if matches!(
            blk.polytope,
            Polytope::Box | Polytope::BoxCutEq { .. } | Polytope::BoxCutIq { .. }
        ) {
            for j in 0..k {
                poly.ineq.push((embed(&unit(j, 1.0)), 1.0));
            }
        }
        match &blk.polytope {
            Polytope::SimplexEq => poly.eq.push((embed(&ones), 1.0)),
            Polytope::SimplexIq => poly.ineq.push((embed(&ones), 1.0)),
            Polytope::BoxCutEq { delta } => poly.eq.push((embed(&ones), *delta as f64)),
            Polytope::BoxCutIq { delta } => poly.ineq.push((embed(&ones), *delta as f64)),
            _ => {}
        }
    }
    Ok(poly)
}

/// Solves the smoothed primal exactly; `lambda` is a maximizer of `g_γ`.
///
/// The objective equals `(γ/2)‖x − z‖²` up to a constant with `z = −c/γ`, so
/// the projection multipliers scaled by `γ` are the coupling duals.
pub fn reference_qp_solve(p: &Problem, gamma: f64) -> Result<QpSolution> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let poly = problem_hrep(p)?;
    let start = reference_lp_solve(p)?;
    let z: Vec<f64> = p.blocks().iter().flat_map(|b| b.cost.iter().map(|c| -c / gamma)).collect();
    let out = project_polyhedron(&poly, &z, start.x.as_slice())?;
    let x = PrimalPoint(out.x);
    let objective = p.objective(&x, gamma)?;
    let lambda = out.mu_ineq[..p.m()].iter().map(|mu| gamma * mu).collect();
    Ok(QpSolution { x, objective, lambda })
}
