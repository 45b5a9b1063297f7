//! Euclidean projections onto the supported polytopes.
//!
//! Every kernel reports the corral it ended on: the vertex support of the
//! projected point together with convex weights. The Box family has no cheap
//! vertex decomposition for interior points, so there the support is left
//! empty and the corral dimension is the number of strictly fractional
//! coordinates (the dimension of the minimal face).

mod boxes;
mod parity;
mod simplex;

pub use boxes::{boxcut_vertex_oracle, project_box, project_boxcut_eq, project_boxcut_iq, BoxCutOracle};
pub use parity::{parity_nearest_vertex, parity_vertex_oracle, project_parity, ParityOracle};
pub use simplex::{project_simplex_eq, project_simplex_iq};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::Polytope;
use crate::wolfe::{wolfe_project, ListOracle, WolfeConfig};

/// A polytope vertex in compact form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexId {
    /// Box corner, given by the coordinates set to one.
    Corner(Vec<usize>),
    /// Unit vector `e_k`.
    Unit(usize),
    /// The zero vector (a vertex of the inequality simplex).
    Origin,
    /// 0/1 vector with ones on the listed indices (Box-Cut δ-subsets, even parity sets).
    Subset(Vec<usize>),
    /// Index into an explicit vertex list.
    Listed(usize),
}

impl VertexId {
    /// Dense coordinates. `vertices` is only consulted for [`VertexId::Listed`].
    pub fn materialize(&self, dim: usize, vertices: Option<&[Vec<f64>]>) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        match self {
            VertexId::Corner(ones) | VertexId::Subset(ones) => {
                for &k in ones {
                    out[k] = 1.0;
                }
            }
            VertexId::Unit(k) => out[*k] = 1.0,
            VertexId::Origin => {}
            VertexId::Listed(r) => {
                if let Some(list) = vertices {
                    out.copy_from_slice(&list[*r]);
                }
            }
        }
        out
    }
}

/// Work counters reported by a projection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub major_iters: usize,
    pub minor_iters: usize,
    pub affine_solves: usize,
    pub heap_pops: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub x: Vec<f64>,
    pub support: Vec<VertexId>,
    pub weights: Vec<f64>,
    pub corral_dim: usize,
    pub stats: ProjectionStats,
}

impl ProjectionResult {
    pub fn is_vertex(&self) -> bool {
        self.corral_dim == 0
    }

    pub(crate) fn vertex(x: Vec<f64>, id: VertexId) -> Self {
        ProjectionResult {
            x,
            support: vec![id],
            weights: vec![1.0],
            corral_dim: 0,
            stats: ProjectionStats::default(),
        }
    }

    /// Box-convention result: a corner when every coordinate is 0 or 1,
    /// otherwise no support and μ = number of fractional coordinates.
    pub(crate) fn box_convention(x: Vec<f64>) -> Self {
        let fractional = x.iter().filter(|&&v| v > 0.0 && v < 1.0).count();
        if fractional == 0 {
            let ones = x.iter().enumerate().filter(|(_, &v)| v == 1.0).map(|(k, _)| k).collect();
            return Self::vertex(x, VertexId::Corner(ones));
        }
        ProjectionResult {
            x,
            support: Vec::new(),
            weights: Vec::new(),
            corral_dim: fractional,
            stats: ProjectionStats::default(),
        }
    }
}

/// Projects `xhat` onto `polytope` with the kernel matching its kind.
pub fn project(polytope: &Polytope, xhat: &[f64]) -> Result<ProjectionResult> {
    match polytope {
        Polytope::Box => Ok(project_box(xhat)),
        Polytope::SimplexEq => project_simplex_eq(xhat),
        Polytope::SimplexIq => project_simplex_iq(xhat),
        Polytope::BoxCutEq { delta } => project_boxcut_eq(xhat, *delta),
        Polytope::BoxCutIq { delta } => project_boxcut_iq(xhat, *delta),
        Polytope::Parity => project_parity(xhat),
        Polytope::General { vertices } => {
            wolfe_project(&ListOracle::new(vertices)?, xhat, &WolfeConfig::default())
        }
    }
}

/// Vertex minimizing `scoreᵀv` over the polytope, with its value.
pub fn linear_minimizer(polytope: &Polytope, score: &[f64]) -> Result<(VertexId, f64)> {
    let k = score.len();
    let neg: Vec<f64> = score.iter().map(|s| -s).collect();
    let id = match polytope {
        Polytope::Box => VertexId::Corner((0..k).filter(|&j| score[j] < 0.0).collect()),
        Polytope::SimplexEq => VertexId::Unit(argmin(score).ok_or(crate::Error::EmptyInput("score"))?),
        Polytope::SimplexIq => match argmin(score) {
            Some(j) if score[j] < 0.0 => VertexId::Unit(j),
            _ => VertexId::Origin,
        },
        Polytope::BoxCutEq { delta } => boxcut_vertex_oracle(&neg, *delta)?,
        Polytope::BoxCutIq { delta } => {
            let top = boxcut_top(&neg, (*delta).min(k));
            VertexId::Subset(top.into_iter().filter(|&j| score[j] < 0.0).collect())
        }
        Polytope::Parity => parity_vertex_oracle(&neg),
        Polytope::General { vertices } => {
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for (r, v) in vertices.iter().enumerate() {
                let val: f64 = v.iter().zip(score).map(|(a, s)| a * s).sum();
                if val < best_val {
                    best_val = val;
                    best = r;
                }
            }
            VertexId::Listed(best)
        }
    };
    let value = vertex_dot(&id, score, polytope);
    Ok((id, value))
}

/// `scoreᵀv` without materializing `v`.
pub fn vertex_dot(id: &VertexId, score: &[f64], polytope: &Polytope) -> f64 {
    match id {
        VertexId::Corner(ones) | VertexId::Subset(ones) => ones.iter().map(|&k| score[k]).sum(),
        VertexId::Unit(k) => score[*k],
        VertexId::Origin => 0.0,
        VertexId::Listed(r) => match polytope {
            Polytope::General { vertices } => vertices[*r].iter().zip(score).map(|(a, s)| a * s).sum(),
            _ => 0.0,
        },
    }
}

/// First index of the smallest entry.
pub(crate) fn argmin(v: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &val) in v.iter().enumerate() {
        match best {
            Some(b) if v[b] <= val => {}
            _ => best = Some(k),
        }
    }
    best
}

pub(crate) use boxes::boxcut_top;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_minimizer_examples() {
        let (id, val) = linear_minimizer(&Polytope::SimplexEq, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(id, VertexId::Unit(1));
        assert_eq!(val, 1.0);

        let (id, val) = linear_minimizer(&Polytope::BoxCutEq { delta: 2 }, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(id, VertexId::Subset(vec![1, 2]));
        assert_eq!(val, 3.0);

        let (id, val) = linear_minimizer(&Polytope::SimplexIq, &[3.0, 1.0]).unwrap();
        assert_eq!(id, VertexId::Origin);
        assert_eq!(val, 0.0);

        let (id, val) = linear_minimizer(&Polytope::Box, &[-1.0, 2.0, -0.5]).unwrap();
        assert_eq!(id, VertexId::Corner(vec![0, 2]));
        assert_eq!(val, -1.5);

        let (id, val) = linear_minimizer(&Polytope::BoxCutIq { delta: 2 }, &[-1.0, 2.0, -0.5, -3.0]).unwrap();
        assert_eq!(id, VertexId::Subset(vec![0, 3]));
        assert_eq!(val, -4.0);

        let (id, _) = linear_minimizer(&Polytope::Parity, &[-1.0, 2.0, -0.5]).unwrap();
        assert_eq!(id, VertexId::Subset(vec![0, 2]));
    }

    #[test]
    fn linear_minimizer_matches_enumeration() {
        use crate::reference::enumerate_vertices;
        let kinds = [
            Polytope::Box,
            Polytope::SimplexEq,
            Polytope::SimplexIq,
            Polytope::BoxCutEq { delta: 2 },
            Polytope::BoxCutIq { delta: 3 },
            Polytope::Parity,
        ];
        let mut seed = 7u64;
        for kind in &kinds {
            for _ in 0..50 {
                let score: Vec<f64> = (0..5)
                    .map(|_| {
                        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
                    })
                    .collect();
                let (_, val) = linear_minimizer(kind, &score).unwrap();
                let best = enumerate_vertices(kind, 5)
                    .iter()
                    .map(|v| v.iter().zip(&score).map(|(a, s)| a * s).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                assert!((val - best).abs() < 1e-12, "{kind:?}");
            }
        }
    }
}
