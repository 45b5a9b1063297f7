//! Certifies an over-constrained instance as infeasible through weak duality
//! and shows the relaxed reference run on a feasible one.

use dualproj::diagnostics::{detect_infeasibility, infeasibility_bound, relaxation_reference};
use dualproj::io::{generate_infeasible, generate_marketplace, GeneratorKind, GeneratorSpec};
use dualproj::optim::OptimizerConfig;

fn main() -> dualproj::Result<()> {
    let cfg = OptimizerConfig {
        max_iters: 5000,
        ..Default::default()
    };
    let gamma = 1.0;
    let spec = GeneratorSpec::matching(50, 6, 4, 3);
    for (name, p) in [
        ("feasible", generate_marketplace(&spec)?),
        ("infeasible", generate_infeasible(&spec.clone().with_kind(GeneratorKind::Infeasible))?),
    ] {
        let bound = infeasibility_bound(&p, gamma)?;
        let relaxed = relaxation_reference(&p, gamma, &cfg).ok();
        let (v, iters) = detect_infeasibility(&p, gamma, &cfg, relaxed, 2.0)?;
        println!(
            "{name:<10} bound {bound:.4}, best dual {:.4}, relaxed {:?}: {:?} after {iters} iterations",
            v.max_value, relaxed, v.status
        );
    }
    Ok(())
}
