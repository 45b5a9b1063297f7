//! Turns a dual solution into a feasible primal point and reports the gap,
//! next to the greedy baseline.

use dualproj::diagnostics::{greedy_baseline, repair_to_feasible, weak_duality_gap};
use dualproj::io::{generate_marketplace, GeneratorSpec};
use dualproj::optim::{maximize_dual, OptimizerConfig};
use dualproj::DualOracle;

fn main() -> dualproj::Result<()> {
    let spec = GeneratorSpec {
        polytope: Some("simplex_iq".into()),
        ..GeneratorSpec::matching(100, 6, 4, 11)
    };
    let p = generate_marketplace(&spec)?;
    let cfg = OptimizerConfig {
        max_iters: 2000,
        ..Default::default()
    };
    let oracle = DualOracle::new(&p);
    let (_, greedy) = greedy_baseline(&p)?;
    println!("greedy objective {greedy:.6}");
    for gamma in [0.1, 0.01, 0.001] {
        let sol = maximize_dual(&p, gamma, &vec![0.0; p.m()], &cfg)?;
        let x = oracle.eval(&sol.lambda, gamma, true)?.x_star.expect("retained");
        let x = repair_to_feasible(&p, &x)?;
        let gap = weak_duality_gap(&p, &x, &sol.lambda)?;
        println!(
            "γ = {gamma:<6} primal {:.6}  dual {:.6}  gap {:.3e} ({:.3}%)",
            gap.primal,
            gap.dual,
            gap.gap,
            100.0 * gap.relative
        );
    }
    Ok(())
}
