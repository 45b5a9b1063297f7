//! Primal active-set method for `min ½‖x − z‖²` over `{Gx ≤ h, Ex = e}`,
//! started from a feasible point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Polyhedron {
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub struct QpOutcome {
    pub x: Vec<f64>,
    /// Multipliers of the inequality rows (nonnegative at optimum).
    pub mu_ineq: Vec<f64>,
    pub mu_eq: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Row {
    Ineq(usize),
    Eq(usize),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

impl Polyhedron {
    fn row(&self, r: Row) -> &[f64] {
        match r {
            Row::Ineq(i) => &self.ineq[i].0,
            Row::Eq(i) => &self.eq[i].0,
        }
    }
}

/// Least-squares multipliers `(A Aᵀ) μ = A w` for the working rows, or `None`
/// when the rows are linearly dependent.
fn multipliers(poly: &Polyhedron, work: &[Row], w: &[f64]) -> Option<Vec<f64>> {
    let s = work.len();
    if s == 0 {
        return Some(Vec::new());
    }
    let gram = DMatrix::from_fn(s, s, |a, b| dot(poly.row(work[a]), poly.row(work[b])));
    let rhs = DVector::from_fn(s, |a, _| dot(poly.row(work[a]), w));
    let ch = gram.clone().cholesky()?;
    let l = ch.l();
    let min_diag = (0..s).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    let max_diag = (0..s).map(|i| gram[(i, i)].sqrt()).fold(0.0, f64::max);
    if s > w.len() || min_diag <= 1e-7 * max_diag.max(1.0) {
        return None;
    }
    Some(ch.solve(&rhs).iter().copied().collect())
}

pub fn project_polyhedron(poly: &Polyhedron, z: &[f64], x0: &[f64]) -> Result<QpOutcome> {
    let n = z.len();
    let mut x = x0.to_vec();
    let mut work: Vec<Row> = Vec::new();
    for i in 0..poly.eq.len() {
        work.push(Row::Eq(i));
        if multipliers(poly, &work, &vec![0.0; n]).is_none() {
            work.pop();
        }
    }
    for (i, (g, h)) in poly.ineq.iter().enumerate() {
        if dot(g, &x) >= h - 1e-9 {
            work.push(Row::Ineq(i));
            if multipliers(poly, &work, &vec![0.0; n]).is_none() || work.len() > n {
                work.pop();
            }
        }
    }

    let limit = 20 * (n + poly.ineq.len() + poly.eq.len()) + 100;
    for _ in 0..limit {
        let w: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let mu = multipliers(poly, &work, &w)
            .ok_or_else(|| Error::ScaleExceeded("dependent working set in active-set QP".into()))?;
        let mut p = w.clone();
        for (r, m) in work.iter().zip(&mu) {
            for (pv, a) in p.iter_mut().zip(poly.row(*r)) {
                *pv -= m * a;
            }
        }
        let pnorm = dot(&p, &p).sqrt();
        let xnorm = dot(&x, &x).sqrt();
        if pnorm <= 1e-12 * (1.0 + xnorm + dot(&w, &w).sqrt()) {
            let mut drop: Option<(usize, f64)> = None;
            for (pos, (r, m)) in work.iter().zip(&mu).enumerate() {
                if let Row::Ineq(_) = r {
                    if *m < -1e-12 && drop.map_or(true, |(_, v)| *m < v) {
                        drop = Some((pos, *m));
                    }
                }
            }
            match drop {
                Some((pos, _)) => {
                    work.remove(pos);
                    continue;
                }
                None => {
                    let worst = poly.ineq.iter().map(|(g, h)| dot(g, &x) - h).fold(0.0f64, f64::max);
                    if worst > 1e-7 {
                        return Err(Error::ScaleExceeded(format!("active-set QP ended infeasible by {worst:.1e}")));
                    }
                    let mut mu_ineq = vec![0.0; poly.ineq.len()];
                    let mut mu_eq = vec![0.0; poly.eq.len()];
                    for (r, m) in work.iter().zip(&mu) {
                        match r {
                            Row::Ineq(i) => mu_ineq[*i] = m.max(0.0),
                            Row::Eq(i) => mu_eq[*i] = *m,
                        }
                    }
                    return Ok(QpOutcome { x, mu_ineq, mu_eq });
                }
            }
        }
        // Rows dependent on the working set cannot block in exact arithmetic;
        // a positive `g·p` there is rounding, so such rows are skipped.
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for (i, (g, h)) in poly.ineq.iter().enumerate() {
            if work.contains(&Row::Ineq(i)) {
                continue;
            }
            let gp = dot(g, &p);
            if gp > 1e-14 * pnorm * dot(g, g).sqrt() {
                let t = ((h - dot(g, &x)) / gp).max(0.0);
                if t < 1.0 {
                    candidates.push((t, i));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let zeros = vec![0.0; n];
        let mut step = 1.0;
        let mut blocking = None;
        for (t, i) in candidates {
            work.push(Row::Ineq(i));
            let independent = multipliers(poly, &work, &zeros).is_some();
            work.pop();
            if independent {
                step = t;
                blocking = Some(i);
                break;
            }
        }
        for (xv, pv) in x.iter_mut().zip(&p) {
            *xv += step * pv;
        }
        if let Some(i) = blocking {
            work.push(Row::Ineq(i));
        }
    }
    Err(Error::ScaleExceeded("active-set QP iteration limit".into()))
}
