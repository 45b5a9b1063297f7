//! Dense two-phase tableau simplex for small LPs:
//! `min cᵀx  s.t.  A_ub x ≤ b_ub,  A_eq x = b_eq,  x ≥ 0`.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const MAX_CELLS: usize = 40_000_000;
const BLAND_AFTER: usize = 50;

#[derive(Clone, Debug, Default)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Nonnegative multipliers of the `≤` rows.
    pub dual_ub: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        self.basis[r] = j;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, v) in d.iter_mut().zip(row) {
                    *dj -= cb * v;
                }
            }
        }
        d
    }

    /// Minimizes `cost` over the current tableau; `allowed[j]` gates entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<()> {
        let limit = 50 * (self.rows.len() + self.ncols) + 1000;
        let mut degenerate = 0;
        for _ in 0..limit {
            let d = self.reduced_costs(cost);
            let bland = degenerate >= BLAND_AFTER;
            let mut enter = None;
            let mut best = -PIVOT_TOL;
            for j in 0..self.ncols {
                if !allowed[j] || d[j] >= -PIVOT_TOL {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if d[j] < best {
                    best = d[j];
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                return Ok(());
            };
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > PIVOT_TOL {
                    let t = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => t < ratio - 1e-12 || (t <= ratio + 1e-12 && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        ratio = t;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::InvalidConfig("reference LP is unbounded".into()));
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
        }
        Err(Error::ScaleExceeded("simplex pivot limit reached".into()))
    }
}

pub fn solve_dense_lp(lp: &DenseLp) -> Result<LpOutcome> {
    let n = lp.c.len();
    let n_ub = lp.a_ub.len();
    let n_eq = lp.a_eq.len();
    let rows = n_ub + n_eq;

    // Columns: structural, one slack per ≤ row, then artificials.
    let mut coef: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut rhs = Vec::with_capacity(rows);
    let mut needs_art = Vec::with_capacity(rows);
    for (i, (a, &b)) in lp.a_ub.iter().zip(&lp.b_ub).enumerate() {
        let flip = if b < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; n + n_ub];
        for (k, v) in a.iter().enumerate() {
            row[k] = flip * v;
        }
        row[n + i] = flip;
        coef.push(row);
        rhs.push(flip * b);
        needs_art.push(flip < 0.0);
    }
    for (a, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let flip = if b < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; n + n_ub];
        for (k, v) in a.iter().enumerate() {
            row[k] = flip * v;
        }
        coef.push(row);
        rhs.push(flip * b);
        needs_art.push(true);
    }
    let n_art = needs_art.iter().filter(|&&f| f).count();
    let ncols = n + n_ub + n_art;
    if rows.saturating_mul(ncols) > MAX_CELLS {
        return Err(Error::ScaleExceeded(format!("{rows} rows × {ncols} columns")));
    }

    let mut basis = Vec::with_capacity(rows);
    let mut art = n + n_ub;
    for (i, row) in coef.iter_mut().enumerate() {
        row.resize(ncols, 0.0);
        if needs_art[i] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
    }
    let mut tab = Tableau {
        rows: coef,
        rhs,
        basis,
        ncols,
    };

    let is_art = |j: usize| j >= n + n_ub;
    if n_art > 0 {
        let mut cost1 = vec![0.0; ncols];
        for c in cost1.iter_mut().skip(n + n_ub) {
            *c = 1.0;
        }
        let allowed = vec![true; ncols];
        tab.optimize(&cost1, &allowed)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&j, _)| is_art(j))
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..rows {
            if !is_art(tab.basis[r]) {
                continue;
            }
            if let Some(j) = (0..n + n_ub).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, j);
            }
        }
    }

    let mut cost2 = vec![0.0; ncols];
    cost2[..n].copy_from_slice(&lp.c);
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_art(j)).collect();
    tab.optimize(&cost2, &allowed)?;

    let mut x = vec![0.0; n];
    for (r, &j) in tab.basis.iter().enumerate() {
        if j < n {
            x[j] = tab.rhs[r].max(0.0);
        }
    }
    let d = tab.reduced_costs(&cost2);
    let dual_ub = (0..n_ub).map(|i| d[n + i].max(0.0)).collect();
    let objective = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome { x, objective, dual_ub })
}
