use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dualproj::diagnostics::{detect_infeasibility, relaxation_reference, InfeasibilityStatus};
use dualproj::io::{self as dio, GeneratorSpec, RunStatus};
use dualproj::optim::{Method, OptimizerConfig};
use dualproj::problem::Polytope;
use dualproj::{project, Error, GammaMode, SolveOptions};

#[derive(Parser)]
#[command(name = "dualproj", version, about = "Dual-decomposition LP solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximize the smoothed dual of a problem file.
    Solve(SolveArgs),
    /// Project a point onto a polytope.
    Project(ProjectArgs),
    /// Write a synthetic problem described by a JSON spec.
    Generate {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Look for a weak-duality certificate of infeasibility.
    CheckInfeasible {
        problem: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 2.0)]
        factor: f64,
    },
    /// Turn a trace into Q-vs-iteration and corral-vs-γ plot data.
    Stats {
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, conflicts_with = "adaptive_gamma")]
    gamma: Option<f64>,
    /// Stage-wise γ schedule (the default when no --gamma is given).
    #[arg(long)]
    adaptive_gamma: bool,
    #[arg(long, default_value = "lbfgsb")]
    optimizer: Method,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, env = "DUALPROJ_THREADS", default_value_t = 1)]
    threads: usize,
    /// Optimizer iterations between stage convergence checks.
    #[arg(long, default_value_t = 25)]
    inner_iters: usize,
    #[arg(long, default_value_t = 4)]
    stages: usize,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// box, simplex_eq, simplex_iq, boxcut_eq, boxcut_iq, parity or general
    kind: String,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Vertices of a general polytope: `v1;v2;...`, coordinates comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    vertices: Option<String>,
}

fn parse_vec(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidConfig(format!("bad number {t:?}")))
        })
        .collect()
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::Parse { .. }
        | Error::InvalidConfig(_)
        | Error::DeltaOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidGamma(_)
        | Error::Json(_)
        | Error::EmptyInput(_) => 3,
        Error::Infeasible => 2,
        Error::MaxIterationsExceeded { .. } | Error::StageStall { .. } => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Solve(a) => {
            let p = dio::parse_problem(&a.problem)?;
            let opts = SolveOptions {
                gamma: match a.gamma {
                    Some(g) => GammaMode::Fixed(g),
                    None => GammaMode::Adaptive,
                },
                optimizer: OptimizerConfig {
                    method: a.optimizer,
                    max_iters: a.max_iters,
                    ..Default::default()
                },
                stages: dualproj::smoothing::StageConfig {
                    stages: a.stages,
                    inner_iters: a.inner_iters,
                    ..Default::default()
                },
                threads: a.threads,
                ..Default::default()
            };
            opts.optimizer.validate()?;
            let out = dualproj::solve(&p, &opts)?;
            if let Some(path) = &a.trace {
                dio::write_trace(BufWriter::new(File::create(path)?), &out.trace)?;
            }
            match &a.summary {
                Some(path) => dio::write_summary(BufWriter::new(File::create(path)?), &out.summary)?,
                None => {
                    dio::write_summary(io::stdout().lock(), &out.summary)?;
                    println!();
                }
            }
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            Ok(match out.summary.status {
                RunStatus::Converged => 0,
                RunStatus::Infeasible => 2,
                RunStatus::IterationLimit | RunStatus::Stalled => 4,
            })
        }
        Cmd::Project(a) => {
            let point = parse_vec(&a.point)?;
            let mut poly = dio::format::kind_from_name(&a.kind, a.delta)?;
            if let Polytope::General { vertices } = &mut poly {
                let spec = a
                    .vertices
                    .ok_or_else(|| Error::InvalidConfig("general polytopes need --vertices".into()))?;
                for v in spec.split(';') {
                    vertices.push(parse_vec(v)?);
                }
            }
            let res = project(&poly, &point)?;
            let line: Vec<String> = res.x.iter().map(|&v| fmt_num(v)).collect();
            println!("{}", line.join(","));
            Ok(0)
        }
        Cmd::Generate { spec, output } => {
            let spec: GeneratorSpec = serde_json::from_reader(File::open(spec)?)?;
            let (p, meta) = dio::generate(&spec)?;
            dio::write_problem_file(output, &p, &meta)?;
            Ok(0)
        }
        Cmd::CheckInfeasible {
            problem,
            gamma,
            max_iters,
            factor,
        } => {
            let p = dio::parse_problem(problem)?;
            let cfg = OptimizerConfig {
                max_iters,
                ..Default::default()
            };
            let relaxed = relaxation_reference(&p, gamma, &cfg).ok();
            let (verdict, iters) = detect_infeasibility(&p, gamma, &cfg, relaxed, factor)?;
            let doc = serde_json::json!({ "verdict": verdict, "iterations": iters });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(if verdict.status == InfeasibilityStatus::ProvenInfeasible { 2 } else { 0 })
        }
        Cmd::Stats { trace, output } => {
            let rows = dio::read_trace(File::open(trace)?)?;
            let points = dio::plot_data(&rows);
            match output {
                Some(path) => dio::write_plot_data(BufWriter::new(File::create(path)?), &points)?,
                None => {
                    let mut out = io::stdout().lock();
                    dio::write_plot_data(&mut out, &points)?;
                    out.flush()?;
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
