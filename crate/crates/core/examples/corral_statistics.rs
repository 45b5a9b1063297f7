//! How many blocks sit on a vertex as γ shrinks, at the dual optimum for
//! each γ, and the plot data the `stats` subcommand would write.

use dualproj::io::{generate_marketplace, plot_data, GeneratorSpec, TraceRow};
use dualproj::optim::{maximize_dual, OptimizerConfig};

fn main() -> dualproj::Result<()> {
    let p = generate_marketplace(&GeneratorSpec::matching(400, 8, 6, 5))?;
    let cfg = OptimizerConfig {
        max_iters: 1000,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut lambda = vec![0.0; p.m()];
    for (k, gamma) in [1.0, 0.1, 0.01, 0.001].into_iter().enumerate() {
        let sol = maximize_dual(&p, gamma, &lambda, &cfg)?;
        let stats = &sol.eval.stats;
        println!(
            "γ = {gamma:<6} mean μ {:.3}  vertex blocks {:>3}/{}  histogram {:?}",
            stats.mean_mu, stats.vertex_count, stats.num_blocks, stats.histogram
        );
        rows.push(TraceRow {
            iter: k + 1,
            stage: k + 1,
            gamma,
            epsilon: None,
            g_gamma: sol.eval.g,
            g0: None,
            grad_norm: 0.0,
            step: 0.0,
            mu: stats.mean_mu,
            vertex_frac: stats.vertex_fraction(),
            q: None,
            wall_ms: 0.0,
        });
        lambda = sol.lambda;
    }
    for pt in plot_data(&rows) {
        println!("{},{},{}", pt.series, pt.x, pt.y);
    }
    Ok(())
}
