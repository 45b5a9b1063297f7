//! Dual decomposition for block-structured linear programs.
//!
//! The coupling rows `Ax ≤ b` are dualized and the dual is smoothed with a
//! `(γ/2)‖x‖²` term, so every gradient evaluation is a batch of independent
//! Euclidean projections onto small polytopes. Those projections land on
//! vertices most of the time, and the kernels here are built to exploit it.

pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod io;
pub mod optim;
pub mod problem;
pub mod projection;
pub mod reference;
pub mod smoothing;
pub mod solve;
pub mod wolfe;

pub use dual::{eval_dual, eval_g0, DualOracle};
pub use error::{Error, Result};
pub use problem::{Block, Polytope, PrimalPoint, Problem, SparseBlock};
pub use projection::{project, ProjectionResult, VertexId};
pub use solve::{solve, GammaMode, SolveOptions, SolveOutput};
