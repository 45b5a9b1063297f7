//! Generates a matching marketplace, solves it with a fixed γ, and compares
//! the dual bound with the exact LP value.

use dualproj::io::{generate_marketplace, GeneratorSpec};
use dualproj::optim::{Method, OptimizerConfig};
use dualproj::reference::reference_lp_solve;
use dualproj::{solve, GammaMode, SolveOptions};

fn main() -> dualproj::Result<()> {
    let p = generate_marketplace(&GeneratorSpec::matching(200, 8, 5, 42))?;
    println!("{} blocks, {} variables, {} coupling rows", p.num_blocks(), p.n(), p.m());

    let lp = reference_lp_solve(&p)?;
    for method in [Method::Pga, Method::Lbfgsb, Method::Agd] {
        let opts = SolveOptions {
            gamma: GammaMode::Fixed(0.01),
            optimizer: OptimizerConfig {
                method,
                max_iters: 500,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = solve(&p, &opts)?;
        let s = &out.summary;
        println!(
            "{method:?}: {:?} after {} iterations, g0 = {:.6}, LP = {:.6}, vertex blocks {}/{}",
            s.status,
            s.iterations,
            s.g0,
            lp.objective,
            s.corral.vertex_count,
            s.corral.num_blocks
        );
    }
    Ok(())
}
