//! Projection onto the convex hull of an explicit vertex list with the
//! vertex-first minimum-norm-point method.

use dualproj::wolfe::{wolfe_project, ListOracle, WolfeConfig};

fn main() -> dualproj::Result<()> {
    // a pentagon with an interior point that is never part of the answer
    let vertices = vec![
        vec![1.0, 0.0],
        vec![0.31, 0.95],
        vec![-0.81, 0.59],
        vec![-0.81, -0.59],
        vec![0.31, -0.95],
        vec![0.0, 0.1],
    ];
    let oracle = ListOracle::new(&vertices)?;
    for xhat in [[2.0, 2.0], [0.1, 0.2], [-3.0, 0.0], [0.5, -2.0]] {
        let r = wolfe_project(&oracle, &xhat, &WolfeConfig::default())?;
        println!("x̂ = {xhat:?}");
        println!("  x = [{:.6}, {:.6}]", r.x[0], r.x[1]);
        for (id, w) in r.support.iter().zip(&r.weights) {
            println!("  {id:?} weight {w:.6}");
        }
        println!("  major {} minor {}", r.stats.major_iters, r.stats.minor_iters);
    }
    Ok(())
}
