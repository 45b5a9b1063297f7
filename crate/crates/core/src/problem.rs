//! Block-structured LP model: `min cᵀx  s.t.  Ax ≤ b,  x_i ∈ C_i`.
//!
//! The coupling matrix is stored per block as sparse coordinate triplets, and
//! every reduction over blocks runs over fixed-size contiguous chunks in
//! ascending block order. Parallel callers reuse [`chunk_ranges`] so that the
//! floating point results do not depend on the number of worker threads.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection;

/// Number of blocks folded into one partial sum before chunk partials are combined.
pub const CHUNK_BLOCKS: usize = 64;

/// Contiguous block ranges used by every block reduction.
pub fn chunk_ranges(num_blocks: usize) -> impl Iterator<Item = Range<usize>> {
    (0..num_blocks)
        .step_by(CHUNK_BLOCKS)
        .map(move |start| start..(start + CHUNK_BLOCKS).min(num_blocks))
}

/// Polytope constraint attached to one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Polytope {
    /// `0 ≤ x ≤ 1`
    Box,
    /// `x ≥ 0, Σx = 1`
    SimplexEq,
    /// `x ≥ 0, Σx ≤ 1`
    SimplexIq,
    /// `0 ≤ x ≤ 1, Σx = δ`
    BoxCutEq { delta: usize },
    /// `0 ≤ x ≤ 1, Σx ≤ δ`
    BoxCutIq { delta: usize },
    /// Convex hull of the binary vectors with an even number of ones.
    Parity,
    /// Convex hull of an explicit vertex list.
    General { vertices: Vec<Vec<f64>> },
}

impl Polytope {
    pub fn name(&self) -> &'static str {
        match self {
            Polytope::Box => "box",
            Polytope::SimplexEq => "simplex_eq",
            Polytope::SimplexIq => "simplex_iq",
            Polytope::BoxCutEq { .. } => "boxcut_eq",
            Polytope::BoxCutIq { .. } => "boxcut_iq",
            Polytope::Parity => "parity",
            Polytope::General { .. } => "general",
        }
    }

    pub fn delta(&self) -> Option<usize> {
        match self {
            Polytope::BoxCutEq { delta } | Polytope::BoxCutIq { delta } => Some(*delta),
            _ => None,
        }
    }

    /// True for the kinds whose defining sum constraint is an equality.
    pub fn is_equality_kind(&self) -> bool {
        matches!(self, Polytope::SimplexEq | Polytope::BoxCutEq { .. })
    }

    /// The inequality relaxation used by the infeasibility heuristic.
    pub fn relaxed(&self) -> Polytope {
        match self {
            Polytope::SimplexEq => Polytope::SimplexIq,
            Polytope::BoxCutEq { delta } => Polytope::BoxCutIq { delta: *delta },
            other => other.clone(),
        }
    }

    /// `max_{x ∈ C} ‖x‖²`, attained at a vertex since the norm is convex.
    pub fn max_sq_norm(&self, dim: usize) -> f64 {
        match self {
            Polytope::Box => dim as f64,
            Polytope::SimplexEq | Polytope::SimplexIq => 1.0,
            Polytope::BoxCutEq { delta } | Polytope::BoxCutIq { delta } => *delta as f64,
            Polytope::Parity => (2 * (dim / 2)) as f64,
            Polytope::General { vertices } => vertices
                .iter()
                .map(|v| v.iter().map(|a| a * a).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Dimension of the minimal face containing `x` (a point assumed to lie in
    /// the polytope), with coordinates within `tol` of a bound treated as on it.
    ///
    /// Vertex-described kinds fall back to the corral found by projection.
    pub fn face_dimension(&self, x: &[f64], tol: f64) -> usize {
        let interior = x.iter().filter(|&&v| v > tol && v < 1.0 - tol).count();
        let positive = x.iter().filter(|&&v| v > tol).count();
        let sum: f64 = x.iter().sum();
        match self {
            Polytope::Box => interior,
            Polytope::SimplexEq => positive.saturating_sub(1),
            Polytope::SimplexIq => {
                if (sum - 1.0).abs() <= tol {
                    positive.saturating_sub(1)
                } else {
                    positive
                }
            }
            Polytope::BoxCutEq { .. } => interior.saturating_sub(1),
            Polytope::BoxCutIq { delta } => {
                if (sum - *delta as f64).abs() <= tol {
                    interior.saturating_sub(1)
                } else {
                    interior
                }
            }
            Polytope::Parity | Polytope::General { .. } => projection::project(self, x)
                .map(|r| r.corral_dim)
                .unwrap_or(0),
        }
    }
}

/// One slice `A_i` of the coupling matrix, `m × K_i`, as coordinate triplets
/// sorted by `(col, row)`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseBlock {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseBlock {
    /// Builds the block from `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are summed; explicit zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        SparseBlock { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseBlock {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Dense row-major input, `dense[j][k] = A[j][k]`.
    pub fn from_dense_rows(dense: &[Vec<f64>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                triplets.push((r, c, v));
            }
        }
        Self::from_triplets(rows, cols, triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `out += Aᵀλ`
    pub fn add_transpose_mul(&self, lambda: &[f64], out: &mut [f64]) {
        for &(r, c, v) in &self.entries {
            out[c] += v * lambda[r];
        }
    }

    /// `out += A x`
    pub fn add_mul(&self, x: &[f64], out: &mut [f64]) {
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            dense[r][c] += v;
        }
        dense
    }

    pub fn has_negative(&self) -> bool {
        self.entries.iter().any(|e| e.2 < 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    pub cost: Vec<f64>,
    pub matrix: SparseBlock,
    pub polytope: Polytope,
}

impl Block {
    pub fn new(id: usize, cost: Vec<f64>, matrix: SparseBlock, polytope: Polytope) -> Self {
        Block {
            id,
            cost,
            matrix,
            polytope,
        }
    }

    pub fn dim(&self) -> usize {
        self.cost.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    blocks: Vec<Block>,
    b: Vec<f64>,
    offsets: Vec<usize>,
}

impl Problem {
    /// Assembles a problem without validating it; see [`Problem::validate`].
    pub fn new(blocks: Vec<Block>, b: Vec<f64>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for blk in &blocks {
            acc += blk.dim();
            offsets.push(acc);
        }
        Problem { blocks, b, offsets }
    }

    /// Like [`Problem::new`] but rejects problems that fail validation.
    pub fn validated(blocks: Vec<Block>, b: Vec<f64>) -> Result<Self> {
        let p = Self::new(blocks, b);
        let report = p.validate();
        if report.is_ok() {
            Ok(p)
        } else {
            Err(Error::Validation(report))
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Coupling row count `m`.
    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Total variable count `n = Σ K_i`.
    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Returns the same problem with every equality-kind polytope relaxed.
    pub fn relaxed(&self) -> Problem {
        let blocks = self
            .blocks
            .iter()
            .map(|blk| Block {
                polytope: blk.polytope.relaxed(),
                ..blk.clone()
            })
            .collect();
        Problem::new(blocks, self.b.clone())
    }

    /// True when every entry of `A` and `b` is nonnegative.
    pub fn is_nonnegative_class(&self) -> bool {
        self.b.iter().all(|&v| v >= 0.0) && self.blocks.iter().all(|blk| !blk.matrix.has_negative())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let m = self.m();
        if self.blocks.is_empty() {
            report.push(None, "I=0: problem has no blocks");
        }
        for (j, v) in self.b.iter().enumerate() {
            if !v.is_finite() {
                report.push(None, format!("b[{j}] is not finite"));
            }
        }
        for (pos, blk) in self.blocks.iter().enumerate() {
            let id = Some(blk.id);
            if blk.id != pos {
                report.push(id, format!("block id {} out of order (expected {pos})", blk.id));
            }
            let k = blk.dim();
            if k == 0 {
                report.push(id, "empty block (K=0)");
            }
            if blk.cost.iter().any(|v| !v.is_finite()) {
                report.push(id, "cost vector has non-finite entries");
            }
            if blk.matrix.cols() != k {
                report.push(
                    id,
                    format!("dimension mismatch: A_i has {} columns, K_i = {k}", blk.matrix.cols()),
                );
            }
            if blk.matrix.rows() != m {
                report.push(
                    id,
                    format!("dimension mismatch: A_i has {} rows, m = {m}", blk.matrix.rows()),
                );
            }
            if blk
                .matrix
                .entries()
                .iter()
                .any(|&(r, c, v)| r >= blk.matrix.rows() || c >= blk.matrix.cols() || !v.is_finite())
            {
                report.push(id, "A_i has an out-of-range or non-finite entry");
            }
            match &blk.polytope {
                Polytope::BoxCutEq { delta } | Polytope::BoxCutIq { delta } => {
                    if *delta <= 1 || *delta >= k {
                        report.push(id, format!("δ out of range: δ={delta}, K={k}"));
                    }
                }
                Polytope::Parity if k < 2 => report.push(id, "parity block needs K ≥ 2"),
                Polytope::General { vertices } => {
                    if vertices.is_empty() {
                        report.push(id, "general polytope has no vertices");
                    }
                    if vertices.iter().any(|v| v.len() != k) {
                        report.push(id, "dimension mismatch: vertex length differs from K");
                    }
                    if vertices.iter().flatten().any(|v| !v.is_finite()) {
                        report.push(id, "vertex has non-finite coordinates");
                    }
                }
                _ => {}
            }
        }
        report
    }

    fn check_len(&self, x: &PrimalPoint) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `A x − b`, reduced chunk by chunk in block order.
    pub fn residual(&self, x: &PrimalPoint) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let m = self.m();
        let mut total = vec![0.0; m];
        for chunk in chunk_ranges(self.num_blocks()) {
            let mut partial = vec![0.0; m];
            for i in chunk {
                self.blocks[i].matrix.add_mul(x.block(self, i), &mut partial);
            }
            for (t, p) in total.iter_mut().zip(&partial) {
                *t += p;
            }
        }
        for (t, bj) in total.iter_mut().zip(&self.b) {
            *t -= bj;
        }
        Ok(total)
    }

    /// `cᵀx + (γ/2) xᵀx`
    pub fn objective(&self, x: &PrimalPoint, gamma: f64) -> Result<f64> {
        self.check_len(x)?;
        let mut total = 0.0;
        for chunk in chunk_ranges(self.num_blocks()) {
            let mut partial = 0.0;
            for i in chunk {
                partial += block_objective(&self.blocks[i].cost, x.block(self, i), gamma);
            }
            total += partial;
        }
        Ok(total)
    }

    /// Checks `Ax ≤ b + tol` and that every block lies within Euclidean
    /// distance `tol` of its polytope.
    pub fn is_feasible(&self, x: &PrimalPoint, tol: f64) -> Feasibility {
        let Ok(r) = self.residual(x) else {
            return Feasibility {
                feasible: false,
                max_violation: f64::INFINITY,
            };
        };
        let mut worst = r.iter().fold(0.0f64, |acc, &v| acc.max(v));
        for (i, blk) in self.blocks.iter().enumerate() {
            let xi = x.block(self, i);
            let dist = match projection::project(&blk.polytope, xi) {
                Ok(res) => euclid(&res.x, xi),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(dist);
        }
        Feasibility {
            feasible: worst <= tol,
            max_violation: worst,
        }
    }
}

pub(crate) fn block_objective(cost: &[f64], x: &[f64], gamma: f64) -> f64 {
    let mut lin = 0.0;
    let mut sq = 0.0;
    for (c, v) in cost.iter().zip(x) {
        lin += c * v;
        sq += v * v;
    }
    lin + 0.5 * gamma * sq
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub max_violation: f64,
}

/// A primal point stored flat, partitioned by the owning problem's blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalPoint(pub Vec<f64>);

impl PrimalPoint {
    pub fn zeros(p: &Problem) -> Self {
        PrimalPoint(vec![0.0; p.n()])
    }

    pub fn from_blocks(parts: Vec<Vec<f64>>) -> Self {
        PrimalPoint(parts.into_iter().flatten().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn block<'a>(&'a self, p: &Problem, i: usize) -> &'a [f64] {
        &self.0[p.block_range(i)]
    }

    pub fn block_mut<'a>(&'a mut self, p: &Problem, i: usize) -> &'a mut [f64] {
        let r = p.block_range(i);
        &mut self.0[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub block: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, block: Option<usize>, reason: impl Into<String>) {
        self.violations.push(Violation {
            block,
            reason: reason.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            match v.block {
                Some(id) => write!(f, "block {id}: {}", v.reason)?,
                None => write!(f, "{}", v.reason)?,
            }
        }
        Ok(())
    }
}
