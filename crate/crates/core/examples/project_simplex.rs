//! Projects a few points onto the probability simplex and the inequality
//! simplex, printing the corral each one lands on.

use dualproj::{project, Polytope};

fn main() -> dualproj::Result<()> {
    let points = [vec![0.9, 0.4], vec![2.0, -1.0, 0.5], vec![0.2, 0.2, 0.2], vec![-1.0, -2.0]];
    for xhat in &points {
        for poly in [Polytope::SimplexEq, Polytope::SimplexIq] {
            let r = project(&poly, xhat)?;
            println!(
                "{:<10} {:?} -> {:?}  corral dim {}, support {:?}",
                poly.name(),
                xhat,
                r.x,
                r.corral_dim,
                r.support
            );
        }
    }
    Ok(())
}
