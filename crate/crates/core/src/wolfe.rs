//! Wolfe's minimum-norm-point method for projecting onto the convex hull of a
//! vertex set that is only accessible through a linear-minimization oracle.
//!
//! The iteration starts at the vertex nearest to `x̂` and returns immediately
//! when that vertex already passes the optimality test, so vertex solutions
//! cost one oracle call and no linear algebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::projection::{ProjectionResult, ProjectionStats, VertexId};

pub const EPS_OPT: f64 = 1e-10;
pub const EPS_DROP: f64 = 1e-12;
const RIDGE: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;

/// Access to the vertices of a polytope.
pub trait VertexOracle {
    fn dim(&self) -> usize;
    /// Vertex closest to `xhat` in Euclidean distance.
    fn nearest_vertex(&self, xhat: &[f64]) -> VertexId;
    /// Vertex minimizing `ηᵀv`.
    fn linmin(&self, eta: &[f64]) -> VertexId;
    fn materialize(&self, v: &VertexId) -> Vec<f64>;
}

/// Oracle over an explicit vertex list.
pub struct ListOracle<'a> {
    vertices: &'a [Vec<f64>],
    dim: usize,
}

impl<'a> ListOracle<'a> {
    pub fn new(vertices: &'a [Vec<f64>]) -> Result<Self> {
        let first = vertices.first().ok_or(Error::EmptyInput("vertex list"))?;
        let dim = first.len();
        if let Some(bad) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(ListOracle { vertices, dim })
    }
}

impl VertexOracle for ListOracle<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nearest_vertex(&self, xhat: &[f64]) -> VertexId {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (r, v) in self.vertices.iter().enumerate() {
            let d: f64 = v.iter().zip(xhat).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = r;
            }
        }
        VertexId::Listed(best)
    }

    fn linmin(&self, eta: &[f64]) -> VertexId {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (r, v) in self.vertices.iter().enumerate() {
            let val = dot(v, eta);
            if val < best_val {
                best_val = val;
                best = r;
            }
        }
        VertexId::Listed(best)
    }

    fn materialize(&self, v: &VertexId) -> Vec<f64> {
        v.materialize(self.dim, Some(self.vertices))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WolfeConfig {
    /// Major iteration cap; `None` means `10·K + 100`.
    pub max_major: Option<usize>,
    pub eps_opt: f64,
    pub eps_drop: f64,
}

impl Default for WolfeConfig {
    fn default() -> Self {
        WolfeConfig {
            max_major: None,
            eps_opt: EPS_OPT,
            eps_drop: EPS_DROP,
        }
    }
}

/// Current corral, its weights and the point they represent.
#[derive(Clone, Debug)]
pub struct WolfeState {
    pub support: Vec<VertexId>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub x: Vec<f64>,
    pub major_iters: usize,
    pub minor_iters: usize,
}

impl WolfeState {
    fn at_vertex(id: VertexId, point: Vec<f64>) -> Self {
        WolfeState {
            support: vec![id],
            x: point.clone(),
            points: vec![point],
            weights: vec![1.0],
            major_iters: 0,
            minor_iters: 0,
        }
    }

    fn into_result(self, affine_solves: usize) -> ProjectionResult {
        ProjectionResult {
            corral_dim: self.support.len() - 1,
            x: self.x,
            support: self.support,
            weights: self.weights,
            stats: ProjectionStats {
                major_iters: self.major_iters,
                minor_iters: self.minor_iters,
                affine_solves,
                heap_pops: 0,
            },
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Returns `None` when `x` is optimal, otherwise the improving vertex.
///
/// With `η = x − x̂`, `x` is optimal iff `ηᵀv ≥ ηᵀx` for every vertex; the
/// test uses the tolerance `eps_opt·(1 + ‖η‖²)`.
pub fn optimality_check<O: VertexOracle + ?Sized>(
    x: &[f64],
    xhat: &[f64],
    oracle: &O,
    eps_opt: f64,
) -> Option<VertexId> {
    let eta: Vec<f64> = x.iter().zip(xhat).map(|(a, b)| a - b).collect();
    let v = oracle.linmin(&eta);
    let lhs = dot(&eta, &oracle.materialize(&v));
    let rhs = dot(&eta, x) - eps_opt * (1.0 + dot(&eta, &eta));
    if lhs >= rhs {
        None
    } else {
        Some(v)
    }
}

/// Point of the affine hull of `points` closest to `xhat`, with its affine
/// coefficients.
///
/// Eliminating the constraint `Σα = 1` from the bordered Gram system leaves
/// the normal equations `DᵀD β = Dᵀ(x̂ − v₀)` with `D = [v_r − v₀]`, which are
/// solved by Cholesky. A singular Gram matrix is retried with a tiny ridge.
pub fn affine_minimizer(points: &[Vec<f64>], xhat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = points.len();
    if s == 0 {
        return Err(Error::EmptyInput("affine minimizer needs a vertex"));
    }
    let v0 = &points[0];
    if s == 1 {
        return Ok((v0.clone(), vec![1.0]));
    }
    let k = v0.len();
    let d = DMatrix::from_fn(k, s - 1, |row, col| points[col + 1][row] - v0[row]);
    let r = DVector::from_fn(k, |row, _| xhat[row] - v0[row]);
    let gram = d.transpose() * &d;
    let rhs = d.transpose() * &r;

    let beta = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            let ridged = &gram + DMatrix::identity(s - 1, s - 1) * RIDGE;
            let beta = ridged
                .cholesky()
                .map(|ch| ch.solve(&rhs))
                .ok_or(Error::DegenerateCorral { size: s })?;
            let residual = (&gram * &beta - &rhs).norm();
            if residual > RESIDUAL_TOL * (1.0 + rhs.norm()) {
                return Err(Error::DegenerateCorral { size: s });
            }
            beta
        }
    };

    let mut alpha = Vec::with_capacity(s);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    let y_offset = &d * &beta;
    let y = (0..k).map(|row| v0[row] + y_offset[row]).collect();
    Ok((y, alpha))
}

/// One minor-cycle step: move from `x` toward `y` until the first weight hits
/// zero, then drop every vertex whose weight fell to `eps_drop` or below.
pub fn minor_cycle_step(state: &mut WolfeState, y: &[f64], alpha: &[f64], eps_drop: f64) {
    let mut theta = f64::INFINITY;
    let mut blocking = 0;
    for (r, (&rho, &a)) in state.weights.iter().zip(alpha).enumerate() {
        if a < 0.0 {
            let t = rho / (rho - a);
            if t < theta {
                theta = t;
                blocking = r;
            }
        }
    }
    if !theta.is_finite() {
        return;
    }
    for (xv, yv) in state.x.iter_mut().zip(y) {
        *xv = theta * yv + (1.0 - theta) * *xv;
    }
    for (rho, &a) in state.weights.iter_mut().zip(alpha) {
        *rho = theta * a + (1.0 - theta) * *rho;
    }
    state.weights[blocking] = 0.0;
    drop_negligible(state, eps_drop);
    state.minor_iters += 1;
}

fn drop_negligible(state: &mut WolfeState, eps_drop: f64) {
    let mut r = 0;
    while r < state.weights.len() && state.weights.len() > 1 {
        if state.weights[r] <= eps_drop {
            state.weights.remove(r);
            state.points.remove(r);
            state.support.remove(r);
        } else {
            r += 1;
        }
    }
    let total: f64 = state.weights.iter().sum();
    for rho in &mut state.weights {
        *rho /= total;
    }
}

/// Projects `xhat` onto the hull of the oracle's vertices.
pub fn wolfe_project<O: VertexOracle + ?Sized>(
    oracle: &O,
    xhat: &[f64],
    cfg: &WolfeConfig,
) -> Result<ProjectionResult> {
    let k = oracle.dim();
    if xhat.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: xhat.len(),
        });
    }
    let max_major = cfg.max_major.unwrap_or(10 * k + 100);
    let v0 = oracle.nearest_vertex(xhat);
    let p0 = oracle.materialize(&v0);
    let mut state = WolfeState::at_vertex(v0, p0);
    let mut solves = 0;
    let mut dist = sq_dist(&state.x, xhat);

    loop {
        let Some(v) = optimality_check(&state.x, xhat, oracle, cfg.eps_opt) else {
            break;
        };
        if state.support.contains(&v) {
            // Rounding: the corral's own minimizer is as good as it gets.
            break;
        }
        if state.major_iters >= max_major {
            return Err(Error::MaxIterationsExceeded {
                limit: max_major,
                best: Some(Box::new(state.into_result(solves))),
            });
        }
        let saved = state.clone();
        state.major_iters += 1;
        state.points.push(oracle.materialize(&v));
        state.support.push(v);
        state.weights.push(0.0);

        loop {
            let (y, alpha) = affine_minimizer(&state.points, xhat)?;
            solves += 1;
            if alpha.iter().all(|&a| a >= 0.0) {
                state.x = y;
                state.weights = alpha;
                drop_negligible(&mut state, cfg.eps_drop);
                break;
            }
            minor_cycle_step(&mut state, &y, &alpha, cfg.eps_drop);
        }

        let new_dist = sq_dist(&state.x, xhat);
        if new_dist >= dist {
            let major = state.major_iters;
            let minor = state.minor_iters;
            state = saved;
            state.major_iters = major;
            state.minor_iters = minor;
            break;
        }
        dist = new_dist;
    }
    Ok(state.into_result(solves))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|j| (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn check_at_zero_distance() {
        let verts = simplex(2);
        let o = ListOracle::new(&verts).unwrap();
        assert!(optimality_check(&[0.5, 0.5], &[0.5, 0.5], &o, EPS_OPT).is_none());
    }

    #[test]
    fn check_simplex_vertex_optimal() {
        let verts = simplex(2);
        let o = ListOracle::new(&verts).unwrap();
        // η = (−4, −1): ηᵀe₂ = −1 ≥ ηᵀx = −4
        assert!(optimality_check(&[1.0, 0.0], &[5.0, 1.0], &o, EPS_OPT).is_none());
    }

    #[test]
    fn check_simplex_vertex_not_optimal() {
        let verts = simplex(2);
        let o = ListOracle::new(&verts).unwrap();
        let v = optimality_check(&[1.0, 0.0], &[0.9, 0.4], &o, EPS_OPT);
        assert_eq!(v, Some(VertexId::Listed(1)));
    }

    #[test]
    fn affine_single_point() {
        let (y, a) = affine_minimizer(&[vec![1.0, 2.0]], &[7.0, 7.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
        assert_eq!(a, vec![1.0]);
    }

    #[test]
    fn affine_segment() {
        let (y, a) = affine_minimizer(&simplex(2), &[0.9, 0.4]).unwrap();
        assert!((y[0] - 0.75).abs() < 1e-14 && (y[1] - 0.25).abs() < 1e-14);
        assert!((a[0] - 0.75).abs() < 1e-14 && (a[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn affine_boxcut_pair() {
        let pts = vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]];
        let (y, a) = affine_minimizer(&pts, &[1.0, 0.6, 0.4]).unwrap();
        assert!((a[0] - 0.6).abs() < 1e-14 && (a[1] - 0.4).abs() < 1e-14);
        for (p, q) in y.iter().zip([1.0, 0.6, 0.4]) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_duplicate_points_use_ridge() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let (y, a) = affine_minimizer(&pts, &[0.9, 0.4]).unwrap();
        assert!((y[0] - 0.75).abs() < 1e-8);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn state_with(weights: Vec<f64>) -> WolfeState {
        let n = weights.len();
        WolfeState {
            support: (0..n).map(VertexId::Listed).collect(),
            points: simplex(n),
            x: weights.clone(),
            weights,
            major_iters: 0,
            minor_iters: 0,
        }
    }

    #[test]
    fn minor_step_two_vertices() {
        let mut st = state_with(vec![0.5, 0.5]);
        // θ = 0.5 / 0.7; new ρ = θα + (1 − θ)ρ = (1, 0)
        minor_cycle_step(&mut st, &[1.2, -0.2], &[1.2, -0.2], EPS_DROP);
        assert_eq!(st.support, vec![VertexId::Listed(0)]);
        assert!((st.weights[0] - 1.0).abs() < 1e-15);
        let theta = 0.5 / 0.7;
        assert!((st.x[0] - (theta * 1.2 + (1.0 - theta) * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn minor_step_no_negative_alpha_is_noop() {
        let mut st = state_with(vec![1.0]);
        minor_cycle_step(&mut st, &[1.0], &[1.0], EPS_DROP);
        assert_eq!(st.weights, vec![1.0]);
        assert_eq!(st.minor_iters, 0);
    }

    #[test]
    fn minor_step_three_vertices() {
        let mut st = state_with(vec![0.2, 0.3, 0.5]);
        minor_cycle_step(&mut st, &[-0.1, 0.6, 0.5], &[-0.1, 0.6, 0.5], EPS_DROP);
        // θ = 2/3 → ρ = (0, 0.5, 0.5)
        assert_eq!(st.support, vec![VertexId::Listed(1), VertexId::Listed(2)]);
        assert!((st.weights[0] - 0.5).abs() < 1e-15 && (st.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simplex_vertex_is_immediate() {
        let verts = simplex(3);
        let o = ListOracle::new(&verts).unwrap();
        let r = wolfe_project(&o, &[5.0, 1.0, 0.0], &WolfeConfig::default()).unwrap();
        assert_eq!(r.x, vec![1.0, 0.0, 0.0]);
        assert_eq!(r.stats.major_iters, 0);
        assert_eq!(r.stats.affine_solves, 0);
    }

    #[test]
    fn triangle_edge() {
        let verts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]];
        let o = ListOracle::new(&verts).unwrap();
        let r = wolfe_project(&o, &[3.0, 3.0], &WolfeConfig::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-12 && (r.x[1] - 1.0).abs() < 1e-12);
        assert_eq!(r.corral_dim, 1);
        let mut s = r.support.clone();
        s.sort_by_key(|v| format!("{v:?}"));
        assert_eq!(s, vec![VertexId::Listed(1), VertexId::Listed(2)]);
    }

    #[test]
    fn interior_point() {
        let verts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]];
        let o = ListOracle::new(&verts).unwrap();
        let r = wolfe_project(&o, &[0.5, 0.4], &WolfeConfig::default()).unwrap();
        assert!(sq_dist(&r.x, &[0.5, 0.4]).sqrt() < 1e-10);
        assert_eq!(r.corral_dim, 2);
    }

    #[test]
    fn iteration_cap_reports_best() {
        let verts = simplex(6);
        let o = ListOracle::new(&verts).unwrap();
        let cfg = WolfeConfig {
            max_major: Some(1),
            ..Default::default()
        };
        match wolfe_project(&o, &[0.3, 0.3, 0.3, 0.3, 0.3, 0.3], &cfg) {
            Err(Error::MaxIterationsExceeded { limit: 1, best: Some(b) }) => {
                assert_eq!(b.stats.major_iters, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let verts = simplex(3);
        let o = ListOracle::new(&verts).unwrap();
        assert!(wolfe_project(&o, &[1.0], &WolfeConfig::default()).is_err());
    }
}
