mod common;

use common::*;
use dualproj::io::{generate_marketplace, GeneratorSpec};
use dualproj::optim::*;
use dualproj::reference::reference_qp_solve;
use dualproj::{eval_dual, DualOracle};

fn config(method: Method) -> OptimizerConfig {
    OptimizerConfig {
        method,
        max_iters: 5000,
        tol_grad: Some(1e-10),
        ..Default::default()
    }
}

#[test]
fn every_method_matches_the_qp_optimum() {
    for seed in 0..4 {
        let p = generate_marketplace(&GeneratorSpec::matching(20, 4, 3, 100 + seed)).unwrap();
        let gamma = 0.2;
        let qp = reference_qp_solve(&p, gamma).unwrap();
        for method in [Method::Pga, Method::Lbfgsb, Method::Agd] {
            let sol = maximize_dual(&p, gamma, &vec![0.0; p.m()], &config(method)).unwrap();
            let err = (sol.eval.g - qp.objective).abs();
            assert!(err <= 1e-6 * (1.0 + qp.objective.abs()), "seed {seed} {method:?}: {err:e}");
            assert!(sol.lambda.iter().all(|&l| l >= 0.0));
        }
    }
}

#[test]
fn random_mixed_problems_reach_the_qp_optimum() {
    let mut rng = rng(41);
    let mut done = 0;
    while done < 20 {
        let (p, _) = random_problem(&mut rng, &Shape::small(Kinds::HRep));
        let gamma = 0.5;
        let Ok(qp) = reference_qp_solve(&p, gamma) else { continue };
        let sol = maximize_dual(&p, gamma, &vec![0.0; p.m()], &config(Method::Lbfgsb)).unwrap();
        assert!((sol.eval.g - qp.objective).abs() <= 1e-6 * (1.0 + qp.objective.abs()));
        done += 1;
    }
}

#[test]
fn pga_trace_is_monotone() {
    let p = generate_marketplace(&GeneratorSpec::matching(30, 5, 3, 8)).unwrap();
    let sol = maximize_dual(&p, 0.1, &vec![0.0; p.m()], &config(Method::Pga)).unwrap();
    let vals: Vec<f64> = sol.trace.values().collect();
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs()), "{} then {}", w[0], w[1]);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = rng(5);
    for _ in 0..20 {
        let (p, _) = random_problem(&mut rng, &Shape::small(Kinds::All));
        let lambda = random_lambda(&mut rng, p.m(), 1.0);
        let gamma = 0.7;
        let e = eval_dual(&p, &lambda, gamma, false).unwrap();
        for j in 0..p.m() {
            let h = 1e-6;
            let mut up = lambda.clone();
            up[j] += h;
            let mut dn = lambda.clone();
            dn[j] -= h;
            let fd = (eval_dual(&p, &up, gamma, false).unwrap().g - eval_dual(&p, &dn, gamma, false).unwrap().g) / (2.0 * h);
            assert!((fd - e.grad[j]).abs() <= 1e-5 * (1.0 + fd.abs()), "row {j}: fd {fd} vs {}", e.grad[j]);
        }
    }
}

#[test]
fn stepping_reports_iterations_and_evaluations() {
    let p = generate_marketplace(&GeneratorSpec::matching(10, 3, 2, 2)).unwrap();
    let oracle = DualOracle::new(&p);
    let mut run = DualAscent::new(&oracle, 0.3, &vec![0.0; p.m()], config(Method::Pga)).unwrap();
    run.run(5).unwrap();
    assert!(run.iterations() <= 5);
    assert!(run.evaluations() >= run.iterations());
    assert_eq!(run.trace().records.len(), run.iterations());
}

#[test]
fn rejects_bad_configs() {
    let bad = [
        OptimizerConfig { eta_min: 2.0, eta_max: 1.0, ..Default::default() },
        OptimizerConfig { c1: 0.95, c2: 0.9, ..Default::default() },
        OptimizerConfig { history: 0, ..Default::default() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}
