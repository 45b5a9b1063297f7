use super::{ProjectionResult, VertexId};
use crate::error::{Error, Result};
use crate::wolfe::{wolfe_project, VertexOracle, WolfeConfig};

/// The even-weight binary vector maximizing `ηᵀv`, in one scan.
pub fn parity_vertex_oracle(eta: &[f64]) -> VertexId {
    let mut set = Vec::new();
    let mut weakest_in: Option<usize> = None;
    let mut strongest_out: Option<usize> = None;
    for (k, &v) in eta.iter().enumerate() {
        if v > 0.0 {
            set.push(k);
            if weakest_in.map_or(true, |w| v < eta[w]) {
                weakest_in = Some(k);
            }
        } else if strongest_out.map_or(true, |s| v > eta[s]) {
            strongest_out = Some(k);
        }
    }
    if set.len() % 2 == 1 {
        let i1 = weakest_in.expect("odd set is non-empty");
        match strongest_out {
            Some(i2) if eta[i1] + eta[i2] > 0.0 => {
                let at = set.partition_point(|&k| k < i2);
                set.insert(at, i2);
            }
            _ => set.retain(|&k| k != i1),
        }
    }
    VertexId::Subset(set)
}

/// Nearest even-weight vertex: `‖v − x̂‖² = ‖x̂‖² − 2(x̂ − ½e)ᵀv`.
pub fn parity_nearest_vertex(xhat: &[f64]) -> VertexId {
    let shifted: Vec<f64> = xhat.iter().map(|v| v - 0.5).collect();
    parity_vertex_oracle(&shifted)
}

/// Vertex oracle for the parity polytope.
pub struct ParityOracle {
    dim: usize,
}

impl ParityOracle {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::EmptyInput("parity polytope needs K ≥ 2"));
        }
        Ok(ParityOracle { dim })
    }
}

impl VertexOracle for ParityOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nearest_vertex(&self, xhat: &[f64]) -> VertexId {
        parity_nearest_vertex(xhat)
    }

    fn linmin(&self, eta: &[f64]) -> VertexId {
        let neg: Vec<f64> = eta.iter().map(|v| -v).collect();
        parity_vertex_oracle(&neg)
    }

    fn materialize(&self, v: &VertexId) -> Vec<f64> {
        v.materialize(self.dim, None)
    }
}

pub fn project_parity(xhat: &[f64]) -> Result<ProjectionResult> {
    let oracle = ParityOracle::new(xhat.len())?;
    wolfe_project(&oracle, xhat, &WolfeConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn even_vertices(k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << k)
            .filter(|m| m.count_ones() % 2 == 0)
            .map(|m| (0..k).filter(|&j| m >> j & 1 == 1).collect())
            .collect()
    }

    fn best_by_enumeration(eta: &[f64]) -> f64 {
        even_vertices(eta.len())
            .iter()
            .map(|s| s.iter().map(|&j| eta[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(parity_vertex_oracle(&[0.5, -0.2, 0.3]), VertexId::Subset(vec![0, 2]));
        assert_eq!(parity_vertex_oracle(&[0.5, 0.4, 0.3]), VertexId::Subset(vec![0, 1]));
        assert_eq!(parity_vertex_oracle(&[-1.0, -1.0]), VertexId::Subset(vec![]));
        assert_eq!(best_by_enumeration(&[0.5, -0.2, 0.3]), 0.8);
        assert_eq!(best_by_enumeration(&[0.5, 0.4, 0.3]), 0.9);
    }

    #[test]
    fn oracle_adds_when_pair_gains() {
        // P = {0}, weakest in 0.5, best outside −0.1: adding gains 0.4 > 0.
        assert_eq!(parity_vertex_oracle(&[0.5, -0.1, -3.0]), VertexId::Subset(vec![0, 1]));
    }

    #[test]
    fn nearest_examples() {
        assert_eq!(parity_nearest_vertex(&[0.9, 0.8, 0.1]), VertexId::Subset(vec![0, 1]));
        assert_eq!(parity_nearest_vertex(&[0.0, 0.0]), VertexId::Subset(vec![]));
        assert_eq!(parity_nearest_vertex(&[1.0, 1.0]), VertexId::Subset(vec![0, 1]));
    }

    #[test]
    fn member_vertex_is_fixed() {
        let r = project_parity(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.x, vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(r.corral_dim, 0);
    }

    #[test]
    fn oracle_matches_enumeration_on_grid() {
        let vals = [-1.0, -0.25, 0.0, 0.3, 0.9];
        for a in vals {
            for b in vals {
                for c in vals {
                    for d in vals {
                        let eta = [a, b, c, d];
                        let VertexId::Subset(s) = parity_vertex_oracle(&eta) else { unreachable!() };
                        assert_eq!(s.len() % 2, 0);
                        let got: f64 = s.iter().map(|&j| eta[j]).sum();
                        assert!((got - best_by_enumeration(&eta)).abs() < 1e-15, "{eta:?}");
                    }
                }
            }
        }
    }
}
