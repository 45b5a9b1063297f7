#![allow(dead_code)]

use dualproj::reference::enumerate_vertices;
use dualproj::{Block, Polytope, PrimalPoint, Problem, SparseBlock};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which polytope kinds a random problem may draw from.
#[derive(Clone, Copy, Debug)]
pub enum Kinds {
    /// Every kind, General included.
    All,
    /// Kinds with an inequality description (no General).
    HRep,
    /// Simplex and box-cut kinds only.
    Structured,
    /// Kinds containing the origin.
    ShrinkClosed,
}

pub fn random_polytope(rng: &mut ChaCha8Rng, k: usize, kinds: Kinds) -> Polytope {
    let mut pool = match kinds {
        Kinds::All | Kinds::HRep => vec![0, 1, 2, 5],
        Kinds::Structured => vec![1, 2],
        Kinds::ShrinkClosed => vec![0, 2, 5],
    };
    if k >= 3 {
        match kinds {
            Kinds::ShrinkClosed => pool.push(4),
            _ => pool.extend([3, 4]),
        }
    }
    if matches!(kinds, Kinds::All) {
        pool.push(6);
    }
    let delta = if k >= 3 { rng.gen_range(2..k) } else { 0 };
    match *pool.choose(rng).unwrap() {
        0 => Polytope::Box,
        1 => Polytope::SimplexEq,
        2 => Polytope::SimplexIq,
        3 => Polytope::BoxCutEq { delta },
        4 => Polytope::BoxCutIq { delta },
        5 => Polytope::Parity,
        _ => {
            let count = rng.gen_range(2..=5);
            Polytope::General {
                vertices: random_vertices(rng, k, count),
            }
        }
    }
}

pub fn random_vertices(rng: &mut ChaCha8Rng, k: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// A random point of the polytope: a convex combination of a few vertices.
pub fn random_member(rng: &mut ChaCha8Rng, poly: &Polytope, k: usize) -> Vec<f64> {
    let verts = enumerate_vertices(poly, k);
    let picks = rng.gen_range(1..=3);
    let mut w: Vec<f64> = (0..picks).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let mut x = vec![0.0; k];
    for wi in w {
        let v = verts.choose(rng).unwrap();
        for (a, b) in x.iter_mut().zip(v) {
            *a += wi * b;
        }
    }
    x
}

pub struct Shape {
    pub blocks: (usize, usize),
    pub dim: (usize, usize),
    pub rows: (usize, usize),
    pub density: f64,
    pub nonneg: bool,
    pub kinds: Kinds,
}

impl Shape {
    pub fn small(kinds: Kinds) -> Self {
        Shape {
            blocks: (2, 6),
            dim: (2, 4),
            rows: (1, 3),
            density: 0.6,
            nonneg: false,
            kinds,
        }
    }
}

/// A random problem that is feasible by construction: `b = A x₀ + s` for a
/// random member `x₀` and slack `s ≥ 0`.
pub fn random_problem(rng: &mut ChaCha8Rng, shape: &Shape) -> (Problem, PrimalPoint) {
    let num = rng.gen_range(shape.blocks.0..=shape.blocks.1);
    let m = rng.gen_range(shape.rows.0..=shape.rows.1);
    let mut blocks = Vec::with_capacity(num);
    let mut x0 = Vec::new();
    let mut usage = vec![0.0; m];
    for i in 0..num {
        let k = rng.gen_range(shape.dim.0..=shape.dim.1);
        let poly = random_polytope(rng, k, shape.kinds);
        let cost: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut triplets = Vec::new();
        for r in 0..m {
            for c in 0..k {
                if rng.gen_bool(shape.density) {
                    let v = if shape.nonneg {
                        rng.gen_range(0.1..1.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    };
                    triplets.push((r, c, v));
                }
            }
        }
        let matrix = SparseBlock::from_triplets(m, k, triplets);
        let xi = random_member(rng, &poly, k);
        matrix.add_mul(&xi, &mut usage);
        x0.extend(xi);
        blocks.push(Block::new(i, cost, matrix, poly));
    }
    let b = usage.iter().map(|u| u + rng.gen_range(0.0..0.5)).collect();
    (Problem::new(blocks, b), PrimalPoint(x0))
}

pub fn random_lambda(rng: &mut ChaCha8Rng, m: usize, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.0..hi)).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}
