use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ProjectionResult, ProjectionStats, VertexId};
use crate::error::{Error, Result};

/// Heap entry ordered by value, then by smaller index first.
#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Projection onto `{x ≥ 0, Σx = 1}`.
///
/// Grows the support one component at a time in decreasing order of `x̂`,
/// pulling candidates from a max-heap, and stops at the first candidate that
/// would receive a non-positive value. Work is `O(K + q log K)` for a support
/// of size `q`.
pub fn project_simplex_eq(xhat: &[f64]) -> Result<ProjectionResult> {
    let k = xhat.len();
    if k == 0 {
        return Err(Error::EmptyInput("simplex projection needs K ≥ 1"));
    }
    let mut heap: BinaryHeap<Candidate> = xhat
        .iter()
        .enumerate()
        .map(|(index, &value)| Candidate { value, index })
        .collect::<Vec<_>>()
        .into();

    let first = heap.pop().expect("non-empty");
    let mut pops = 1;
    let mut support = vec![first.index];
    let mut sum = first.value;
    while let Some(next) = heap.peek().copied() {
        pops += 1;
        let size = support.len() as f64 + 1.0;
        let alpha = next.value - (sum + next.value - 1.0) / size;
        if alpha <= 0.0 {
            break;
        }
        heap.pop();
        support.push(next.index);
        sum += next.value;
    }

    let theta = (sum - 1.0) / support.len() as f64;
    let mut x = vec![0.0; k];
    for &r in &support {
        x[r] = xhat[r] - theta;
    }
    let stats = ProjectionStats {
        heap_pops: pops,
        ..Default::default()
    };
    if support.len() == 1 {
        let mut res = ProjectionResult::vertex(x, VertexId::Unit(support[0]));
        res.stats = stats;
        return Ok(res);
    }
    support.sort_unstable();
    let weights = support.iter().map(|&r| x[r]).collect();
    Ok(ProjectionResult {
        x,
        corral_dim: support.len() - 1,
        support: support.into_iter().map(VertexId::Unit).collect(),
        weights,
        stats,
    })
}

/// Projection onto `{x ≥ 0, Σx ≤ 1}`: the box point when it satisfies the
/// cut, otherwise the equality projection of `x̂`.
pub fn project_simplex_iq(xhat: &[f64]) -> Result<ProjectionResult> {
    if xhat.is_empty() {
        return Err(Error::EmptyInput("simplex projection needs K ≥ 1"));
    }
    let x: Vec<f64> = xhat.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let sum: f64 = x.iter().sum();
    if sum > 1.0 {
        return project_simplex_eq(xhat);
    }
    // x = (1 − Σx)·0 + Σ x_k e_k
    let mut support = Vec::new();
    let mut weights = Vec::new();
    let rest = 1.0 - sum;
    if rest > 0.0 {
        support.push(VertexId::Origin);
        weights.push(rest);
    }
    for (k, &v) in x.iter().enumerate() {
        if v > 0.0 {
            support.push(VertexId::Unit(k));
            weights.push(v);
        }
    }
    Ok(ProjectionResult {
        x,
        corral_dim: support.len() - 1,
        support,
        weights,
        stats: ProjectionStats::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sort-based projection used as an independent check.
    fn sorted_oracle(xhat: &[f64]) -> Vec<f64> {
        let mut u = xhat.to_vec();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut theta = 0.0;
        for (j, &v) in u.iter().enumerate() {
            acc += v;
            let t = (acc - 1.0) / (j as f64 + 1.0);
            if v - t > 0.0 {
                theta = t;
            }
        }
        xhat.iter().map(|v| (v - theta).max(0.0)).collect()
    }

    #[test]
    fn vertex_case() {
        let r = project_simplex_eq(&[5.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.x, vec![1.0, 0.0, 0.0]);
        assert_eq!(r.corral_dim, 0);
        assert_eq!(r.support, vec![VertexId::Unit(0)]);
        assert_eq!(r.x, sorted_oracle(&[5.0, 1.0, 0.0]));
        assert_eq!(r.stats.heap_pops, 2);
    }

    #[test]
    fn edge_case() {
        let r = project_simplex_eq(&[0.9, 0.4]).unwrap();
        assert!((r.x[0] - 0.75).abs() < 1e-15 && (r.x[1] - 0.25).abs() < 1e-15);
        assert_eq!(r.corral_dim, 1);
        let o = sorted_oracle(&[0.9, 0.4]);
        assert!((r.x[0] - o[0]).abs() < 1e-15);
    }

    #[test]
    fn uniform_point_is_fixed() {
        let k = 7;
        let xhat = vec![1.0 / k as f64; k];
        let r = project_simplex_eq(&xhat).unwrap();
        assert_eq!(r.support.len(), k);
        for (a, b) in r.x.iter().zip(&xhat) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(project_simplex_eq(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let r = project_simplex_eq(&[3.0, 3.0]).unwrap();
        assert_eq!(r.x, vec![0.5, 0.5]);
        let r = project_simplex_eq(&[0.0, 5.0, 5.0 - 1.0]).unwrap();
        assert_eq!(r.support, vec![VertexId::Unit(1)]);
    }

    #[test]
    fn inequality_examples() {
        let r = project_simplex_iq(&[0.2, 0.3]).unwrap();
        assert_eq!(r.x, vec![0.2, 0.3]);
        assert_eq!(r.corral_dim, 2);
        let r = project_simplex_iq(&[-1.0, -2.0]).unwrap();
        assert_eq!(r.x, vec![0.0, 0.0]);
        assert_eq!(r.support, vec![VertexId::Origin]);
        let r = project_simplex_iq(&[0.9, 0.4]).unwrap();
        assert!((r.x[0] - 0.75).abs() < 1e-15 && (r.x[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inequality_support_reconstructs() {
        let r = project_simplex_iq(&[0.2, -0.3, 0.5]).unwrap();
        let mut y = vec![0.0; 3];
        for (id, w) in r.support.iter().zip(&r.weights) {
            for (a, v) in y.iter_mut().zip(id.materialize(3, None)) {
                *a += w * v;
            }
        }
        assert_eq!(y, r.x);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
