use std::cmp::Ordering;

use super::{ProjectionResult, VertexId};
use crate::error::{Error, Result};
use crate::wolfe::{wolfe_project, VertexOracle, WolfeConfig};

/// Componentwise clamp to `[0, 1]`.
pub fn project_box(xhat: &[f64]) -> ProjectionResult {
    ProjectionResult::box_convention(xhat.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Indices of the `d` largest entries of `eta`, ties to the smaller index,
/// returned in ascending index order.
pub(crate) fn boxcut_top(eta: &[f64], d: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eta.len()).collect();
    if d == 0 {
        return Vec::new();
    }
    if d < idx.len() {
        let cmp = |a: &usize, b: &usize| -> Ordering { eta[*b].total_cmp(&eta[*a]).then(a.cmp(b)) };
        idx.select_nth_unstable_by(d - 1, cmp);
        idx.truncate(d);
    }
    idx.sort_unstable();
    idx
}

fn check_delta(dim: usize, delta: usize) -> Result<()> {
    if delta <= 1 || delta >= dim {
        return Err(Error::DeltaOutOfRange { delta, dim });
    }
    Ok(())
}

/// The Box-Cut vertex maximizing `ηᵀv`: the top-δ components of `η`.
pub fn boxcut_vertex_oracle(eta: &[f64], delta: usize) -> Result<VertexId> {
    check_delta(eta.len(), delta)?;
    Ok(VertexId::Subset(boxcut_top(eta, delta)))
}

/// Vertex oracle for `{0 ≤ x ≤ 1, Σx = δ}`.
pub struct BoxCutOracle {
    dim: usize,
    delta: usize,
}

impl BoxCutOracle {
    pub fn new(dim: usize, delta: usize) -> Result<Self> {
        check_delta(dim, delta)?;
        Ok(BoxCutOracle { dim, delta })
    }
}

impl VertexOracle for BoxCutOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    // All vertices have the same norm, so the nearest one maximizes x̂ᵀv.
    fn nearest_vertex(&self, xhat: &[f64]) -> VertexId {
        VertexId::Subset(boxcut_top(xhat, self.delta))
    }

    fn linmin(&self, eta: &[f64]) -> VertexId {
        let neg: Vec<f64> = eta.iter().map(|v| -v).collect();
        VertexId::Subset(boxcut_top(&neg, self.delta))
    }

    fn materialize(&self, v: &VertexId) -> Vec<f64> {
        v.materialize(self.dim, None)
    }
}

/// Projection onto `{0 ≤ x ≤ 1, Σx = δ}` by the vertex-first Wolfe method.
pub fn project_boxcut_eq(xhat: &[f64], delta: usize) -> Result<ProjectionResult> {
    let oracle = BoxCutOracle::new(xhat.len(), delta)?;
    wolfe_project(&oracle, xhat, &WolfeConfig::default())
}

/// Projection onto `{0 ≤ x ≤ 1, Σx ≤ δ}`.
pub fn project_boxcut_iq(xhat: &[f64], delta: usize) -> Result<ProjectionResult> {
    check_delta(xhat.len(), delta)?;
    let clamped = project_box(xhat);
    if clamped.x.iter().sum::<f64>() <= delta as f64 {
        return Ok(clamped);
    }
    project_boxcut_eq(xhat, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_examples() {
        assert_eq!(project_box(&[1.5, -0.2, 0.3]).x, vec![1.0, 0.0, 0.3]);
        let r = project_box(&[0.5]);
        assert_eq!(r.x, vec![0.5]);
        assert_eq!(r.corral_dim, 1);
        let r = project_box(&[2.0, 3.0]);
        assert_eq!(r.x, vec![1.0, 1.0]);
        assert!(r.is_vertex());
        assert_eq!(r.support, vec![VertexId::Corner(vec![0, 1])]);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(boxcut_vertex_oracle(&[0.9, 0.1, 0.5], 2).unwrap(), VertexId::Subset(vec![0, 2]));
        assert_eq!(boxcut_vertex_oracle(&[1.0, 1.0, 0.0], 2).unwrap(), VertexId::Subset(vec![0, 1]));
        assert_eq!(boxcut_vertex_oracle(&[-1.0, -2.0, -3.0], 2).unwrap(), VertexId::Subset(vec![0, 1]));
        assert!(matches!(
            boxcut_vertex_oracle(&[1.0, 2.0, 3.0], 3),
            Err(Error::DeltaOutOfRange { delta: 3, dim: 3 })
        ));
        assert!(boxcut_vertex_oracle(&[1.0, 2.0, 3.0], 1).is_err());
    }

    #[test]
    fn oracle_tie_rule_on_many_ties() {
        let eta = vec![1.0; 9];
        assert_eq!(boxcut_top(&eta, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn eq_examples() {
        let r = project_boxcut_eq(&[3.0, 2.0, -1.0], 2).unwrap();
        assert_eq!(r.x, vec![1.0, 1.0, 0.0]);
        assert_eq!(r.corral_dim, 0);
        assert_eq!(r.stats.affine_solves, 0);

        let r = project_boxcut_eq(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(r.x, vec![0.0, 1.0, 1.0, 0.0]);

        // Interior solution: shift by θ = (2.0 − 2)/3 = 0 → itself.
        let r = project_boxcut_eq(&[0.8, 0.7, 0.5], 2).unwrap();
        for (a, b) in r.x.iter().zip([0.8, 0.7, 0.5]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(r.corral_dim, 2);
    }

    #[test]
    fn iq_examples() {
        assert_eq!(project_boxcut_iq(&[0.1, 0.2, 0.3], 2).unwrap().x, vec![0.1, 0.2, 0.3]);
        assert_eq!(project_boxcut_iq(&[3.0, 2.0, -1.0], 2).unwrap().x, vec![1.0, 1.0, 0.0]);
        let r = project_boxcut_iq(&[-1.0, -1.0, -1.0], 2).unwrap();
        assert_eq!(r.x, vec![0.0, 0.0, 0.0]);
        assert!(r.is_vertex());
    }
}
