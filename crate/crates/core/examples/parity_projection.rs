//! Projection onto the parity polytope (hull of even-weight 0/1 vectors), as
//! used in LP decoding.

use dualproj::{project, Polytope};

fn main() -> dualproj::Result<()> {
    let received = [
        vec![0.9, 0.8, 0.1, 0.2],
        vec![0.9, 0.1, 0.1, 0.2],
        vec![0.6, 0.6, 0.6, 0.6, 0.6],
        vec![1.5, -0.3, 0.4],
    ];
    for xhat in &received {
        let r = project(&Polytope::Parity, xhat)?;
        let x: Vec<String> = r.x.iter().map(|v| format!("{v:.4}")).collect();
        println!("{xhat:?} -> [{}]  corral dim {}", x.join(", "), r.corral_dim);
    }
    Ok(())
}
