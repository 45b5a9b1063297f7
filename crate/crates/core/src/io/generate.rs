//! Seeded synthetic instances.
//!
//! * `matching`: budgeted ad allocation. Costs are negated utilities
//!   `−U(0,1)`, `A ≥ 0` is sparse with entries in `[0.5, 1.5)`, and each
//!   budget is a fraction of what the unconstrained choice would spend.
//! * `diversity`: recommendation slates with lower bounds on group exposure.
//!   Each `≥` row is stored negated, so `A ≤ 0` and `b ≤ 0`.
//! * `infeasible`: a matching instance with equality blocks whose first row
//!   is dense and has a budget below the least any selection can spend.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format::{kind_from_name, ProblemMeta};
use crate::problem::{Block, Polytope, Problem, SparseBlock};
use crate::projection::linear_minimizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Matching,
    Diversity,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub blocks: usize,
    pub dim: usize,
    pub rows: usize,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default)]
    pub seed: u64,
    /// Block polytope name; defaults to `simplex_eq` (`boxcut_eq` for diversity).
    #[serde(default)]
    pub polytope: Option<String>,
    #[serde(default)]
    pub delta: Option<usize>,
    /// Fraction of the unconstrained usage granted as budget.
    #[serde(default = "default_tightness")]
    pub tightness: f64,
}

fn default_density() -> f64 {
    0.3
}

fn default_tightness() -> f64 {
    0.5
}

impl GeneratorSpec {
    pub fn matching(blocks: usize, dim: usize, rows: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Matching,
            blocks,
            dim,
            rows,
            density: default_density(),
            seed,
            polytope: None,
            delta: None,
            tightness: default_tightness(),
        }
    }

    pub fn with_kind(mut self, kind: GeneratorKind) -> Self {
        self.kind = kind;
        self
    }

    fn polytope(&self) -> Result<Polytope> {
        let default = match self.kind {
            GeneratorKind::Diversity => "boxcut_eq",
            _ => "simplex_eq",
        };
        let name = self.polytope.as_deref().unwrap_or(default);
        let delta = self.delta.or(Some((self.dim / 3).max(2)));
        let poly = kind_from_name(name, delta)?;
        if let Some(d) = poly.delta() {
            if d <= 1 || d >= self.dim {
                return Err(Error::DeltaOutOfRange { delta: d, dim: self.dim });
            }
        }
        match poly {
            Polytope::General { .. } => Err(Error::InvalidConfig("generators do not produce general blocks".into())),
            Polytope::Parity if self.dim < 2 => Err(Error::InvalidConfig("parity blocks need K ≥ 2".into())),
            _ => Ok(poly),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.blocks == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig("need at least one block and K ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::InvalidConfig(format!("density {} outside [0, 1]", self.density)));
        }
        if !(self.tightness > 0.0 && self.tightness.is_finite()) {
            return Err(Error::InvalidConfig("tightness must be positive".into()));
        }
        if self.kind == GeneratorKind::Infeasible {
            if self.rows == 0 {
                return Err(Error::InvalidConfig("infeasible instances need m ≥ 1".into()));
            }
            if !self.polytope()?.is_equality_kind() {
                return Err(Error::InvalidConfig("infeasible instances need equality blocks".into()));
            }
        }
        Ok(())
    }
}

/// Per-row usage of the blocks' unconstrained minimizers.
fn unconstrained_usage(blocks: &[Block], m: usize) -> Result<Vec<f64>> {
    let mut usage = vec![0.0; m];
    for blk in blocks {
        let (id, _) = linear_minimizer(&blk.polytope, &blk.cost)?;
        blk.matrix.add_mul(&id.materialize(blk.dim(), None), &mut usage);
    }
    Ok(usage)
}

/// Smallest value of `Σ_i (A_i x_i)_row` over the blocks' polytopes.
fn min_row_usage(blocks: &[Block], row: usize) -> Result<f64> {
    let mut total = 0.0;
    for blk in blocks {
        let mut score = vec![0.0; blk.dim()];
        for &(r, c, v) in blk.matrix.entries() {
            if r == row {
                score[c] = v;
            }
        }
        total += linear_minimizer(&blk.polytope, &score)?.1;
    }
    Ok(total)
}

fn random_blocks(spec: &GeneratorSpec, rng: &mut ChaCha8Rng, sign: f64, dense_first: bool) -> Result<Vec<Block>> {
    let poly = spec.polytope()?;
    let mut blocks = Vec::with_capacity(spec.blocks);
    for i in 0..spec.blocks {
        let cost: Vec<f64> = (0..spec.dim).map(|_| -rng.gen::<f64>()).collect();
        let mut triplets = Vec::new();
        for r in 0..spec.rows {
            for c in 0..spec.dim {
                let hit = (dense_first && r == 0) || rng.gen_bool(spec.density);
                if hit {
                    let v = match spec.kind {
                        GeneratorKind::Diversity => 1.0,
                        _ => rng.gen_range(0.5..1.5),
                    };
                    triplets.push((r, c, sign * v));
                }
            }
        }
        blocks.push(Block::new(
            i,
            cost,
            SparseBlock::from_triplets(spec.rows, spec.dim, triplets),
            poly.clone(),
        ));
    }
    Ok(blocks)
}

/// Matching or diversity instance; a pure function of the spec.
pub fn generate_marketplace(spec: &GeneratorSpec) -> Result<Problem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GeneratorKind::Matching => {
            let blocks = random_blocks(spec, &mut rng, 1.0, false)?;
            let b = unconstrained_usage(&blocks, spec.rows)?
                .into_iter()
                .map(|u| spec.tightness * u)
                .collect();
            Ok(Problem::new(blocks, b))
        }
        GeneratorKind::Diversity => {
            let blocks = random_blocks(spec, &mut rng, -1.0, false)?;
            let delta = blocks[0].polytope.delta().unwrap_or(1) as f64;
            let u = unconstrained_usage(&blocks, spec.rows)?;
            // Exposure of the uniform point δ/K·1, which satisfies every row at once.
            let mut uniform = vec![0.0; spec.rows];
            for blk in &blocks {
                blk.matrix.add_mul(&vec![delta / spec.dim as f64; spec.dim], &mut uniform);
            }
            // Rows hold −count: move each bound from the unconstrained
            // exposure toward the uniform one.
            let b = u
                .iter()
                .zip(&uniform)
                .map(|(&ui, &ei)| ei + (1.0 - spec.tightness.min(1.0)) * (ui - ei).max(0.0))
                .collect();
            Ok(Problem::new(blocks, b))
        }
        GeneratorKind::Infeasible => generate_infeasible(spec),
    }
}

/// Equality-block instance whose first budget sits below its minimum usage.
pub fn generate_infeasible(spec: &GeneratorSpec) -> Result<Problem> {
    let spec = GeneratorSpec {
        kind: GeneratorKind::Infeasible,
        ..spec.clone()
    };
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blocks = random_blocks(&spec, &mut rng, 1.0, true)?;
    let mut b: Vec<f64> = unconstrained_usage(&blocks, spec.rows)?
        .into_iter()
        .map(|u| spec.tightness * u)
        .collect();
    b[0] = 0.5 * min_row_usage(&blocks, 0)?;
    Ok(Problem::new(blocks, b))
}

/// Dispatches on the spec kind and records the provenance.
pub fn generate(spec: &GeneratorSpec) -> Result<(Problem, ProblemMeta)> {
    let p = generate_marketplace(spec)?;
    let name = match spec.kind {
        GeneratorKind::Matching => "matching",
        GeneratorKind::Diversity => "diversity",
        GeneratorKind::Infeasible => "infeasible",
    };
    Ok((
        p,
        ProblemMeta {
            generator: Some(name.into()),
            seed: Some(spec.seed),
            known_optimum: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::format::write_problem;

    #[test]
    fn same_seed_same_bytes() {
        let spec = GeneratorSpec::matching(30, 6, 3, 11);
        let (p, m) = generate(&spec).unwrap();
        let (q, n) = generate(&spec).unwrap();
        assert_eq!(write_problem(&p, &m).unwrap(), write_problem(&q, &n).unwrap());
        let (r, _) = generate(&GeneratorSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(p, r);
    }

    #[test]
    fn zero_density_has_empty_a() {
        let spec = GeneratorSpec {
            density: 0.0,
            ..GeneratorSpec::matching(10, 4, 2, 3)
        };
        let p = generate_marketplace(&spec).unwrap();
        assert!(p.blocks().iter().all(|b| b.matrix.nnz() == 0));
        assert_eq!(p.b(), &[0.0, 0.0]);
    }

    #[test]
    fn infeasible_budget_below_minimum() {
        let spec = GeneratorSpec::matching(8, 5, 2, 4).with_kind(GeneratorKind::Infeasible);
        let p = generate_infeasible(&spec).unwrap();
        assert!(p.b()[0] < min_row_usage(p.blocks(), 0).unwrap());
        assert!(p.b()[0] > 0.0);
    }

    #[test]
    fn infeasible_needs_equality_blocks() {
        let spec = GeneratorSpec {
            polytope: Some("simplex_iq".into()),
            ..GeneratorSpec::matching(8, 5, 2, 4)
        };
        assert!(generate_infeasible(&spec).is_err());
    }

    #[test]
    fn diversity_rows_are_negated() {
        let spec = GeneratorSpec::matching(20, 6, 3, 9).with_kind(GeneratorKind::Diversity);
        let p = generate_marketplace(&spec).unwrap();
        assert!(p.blocks().iter().all(|b| b.matrix.entries().iter().all(|e| e.2 < 0.0)));
        assert!(p.b().iter().all(|&v| v <= 0.0));
        assert!(matches!(p.blocks()[0].polytope, Polytope::BoxCutEq { delta: 2 }));
    }
}
