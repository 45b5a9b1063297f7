//! Runs the stage-wise γ schedule and prints one line per stage.

use dualproj::io::{generate_marketplace, GeneratorSpec};
use dualproj::reference::reference_lp_solve;
use dualproj::smoothing::{quality_score, stagewise_solve, StageConfig};

fn main() -> dualproj::Result<()> {
    let p = generate_marketplace(&GeneratorSpec::matching(300, 10, 6, 7))?;
    let res = stagewise_solve(&p, &StageConfig::default())?;
    println!("g0(0) = {:.6}", res.g0_zero);
    println!("stage  epsilon     gamma        psi_a      checks  iters  g0");
    for s in &res.stages {
        println!(
            "{:>5}  {:<10.1e}  {:<11.4e}  {:<9.4}  {:>6}  {:>5}  {:.6}",
            s.stage, s.epsilon, s.gamma, s.psi_a, s.repeats, s.iterations, s.g0
        );
    }
    let lp = reference_lp_solve(&p)?;
    println!("Q against the exact LP: {:.6}", quality_score(res.g0, res.g0_zero, lp.objective)?);
    for w in &res.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
