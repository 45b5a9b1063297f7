//! File formats, generators and run output.

pub mod format;
pub mod generate;
pub mod trace;

pub use format::{parse_problem, parse_problem_str, read_problem_file, write_problem, write_problem_file, ProblemMeta};
pub use generate::{generate, generate_infeasible, generate_marketplace, GeneratorKind, GeneratorSpec};
pub use trace::{plot_data, read_trace, write_plot_data, write_summary, write_trace, RunStatus, RunSummary, TraceRow};
