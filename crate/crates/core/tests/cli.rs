use std::path::PathBuf;
use std::process::{Command, Output};

use dualproj::io::{write_problem, write_problem_file, GeneratorSpec, ProblemMeta};
use dualproj::{Block, Polytope, Problem, SparseBlock};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dualproj"));
    cmd.env_remove("DUALPROJ_THREADS");
    cmd
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dualproj-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn project_simplex_point() {
    let out = bin().args(["project", "simplex_eq", "--point", "0.9,0.4"]).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "0.75,0.25");
}

#[test]
fn project_general_hull() {
    let out = bin()
        .args(["project", "general", "--vertices", "0,0;2,0;0,2", "--point", "2,2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1,1");
}

#[test]
fn decoupled_solve_keeps_lambda_zero() {
    let dir = scratch("decoupled");
    let b = |i, c: Vec<f64>| Block::new(i, c, SparseBlock::from_dense_rows(&[vec![1.0, 1.0]]), Polytope::SimplexEq);
    let p = Problem::new(vec![b(0, vec![-1.0, 0.5]), b(1, vec![0.2, -0.3])], vec![5.0]);
    let path = dir.join("p.txt");
    write_problem_file(&path, &p, &ProblemMeta::default()).unwrap();
    let out = bin().arg("solve").arg(&path).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "converged");
    assert_eq!(v["lambda"][0].as_f64().unwrap(), 0.0);
    assert_eq!(v["q"].as_f64().unwrap(), 1.0);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn check_infeasible_exits_with_two() {
    let dir = scratch("infeasible");
    let blk = |i| Block::new(i, vec![-0.3, 0.2, -0.1], SparseBlock::from_dense_rows(&[vec![1.0; 3]]), Polytope::SimplexEq);
    let p = Problem::new((0..4).map(blk).collect(), vec![0.0]);
    let path = dir.join("p.txt");
    write_problem_file(&path, &p, &ProblemMeta::default()).unwrap();
    let out = bin().arg("check-infeasible").arg(&path).output().unwrap();
    assert_eq!(code(&out), 2);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"]["status"], "proven_infeasible");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn delta_equal_to_dimension_is_a_validation_error() {
    let dir = scratch("delta");
    let blk = Block::new(0, vec![-1.0, 0.0, 0.5], SparseBlock::from_dense_rows(&[vec![1.0; 3]]), Polytope::BoxCutEq { delta: 2 });
    let text = write_problem(&Problem::new(vec![blk], vec![2.0]), &ProblemMeta::default()).unwrap();
    let bad = text.replace("boxcut_eq,2,", "boxcut_eq,3,");
    assert_ne!(bad, text);
    let path = dir.join("p.txt");
    std::fs::write(&path, bad).unwrap();
    let out = bin().arg("solve").arg(&path).output().unwrap();
    assert_eq!(code(&out), 3);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn missing_file_is_an_io_error() {
    let out = bin().args(["solve", "/nonexistent/problem.txt"]).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = scratch("generate");
    let spec = dir.join("spec.json");
    std::fs::write(&spec, serde_json::to_string(&GeneratorSpec::matching(25, 4, 3, 9)).unwrap()).unwrap();
    let (a, b) = (dir.join("a.txt"), dir.join("b.txt"));
    for out in [&a, &b] {
        let o = bin().arg("generate").arg(&spec).arg("-o").arg(out).output().unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn solve_trace_feeds_stats_and_threads_do_not_matter() {
    let dir = scratch("stats");
    let spec = dir.join("spec.json");
    std::fs::write(&spec, serde_json::to_string(&GeneratorSpec::matching(150, 5, 3, 4)).unwrap()).unwrap();
    let problem = dir.join("p.txt");
    assert_eq!(code(&bin().arg("generate").arg(&spec).arg("-o").arg(&problem).output().unwrap()), 0);

    let mut summaries = Vec::new();
    for threads in ["1", "4"] {
        let trace = dir.join(format!("trace{threads}.csv"));
        let summary = dir.join(format!("summary{threads}.json"));
        let out = bin()
            .env("DUALPROJ_THREADS", threads)
            .arg("solve")
            .arg(&problem)
            .arg("--trace")
            .arg(&trace)
            .arg("--summary")
            .arg(&summary)
            .output()
            .unwrap();
        assert!(matches!(code(&out), 0 | 4), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
        summaries.push((v["lambda"].clone(), v["g0"].clone()));

        let stats = bin().arg("stats").arg(&trace).output().unwrap();
        assert_eq!(code(&stats), 0);
        let text = stdout(&stats);
        assert!(text.contains("q_vs_iter"));
        assert!(text.contains("mu_vs_gamma"));
    }
    assert_eq!(summaries[0], summaries[1]);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn conflicting_gamma_flags_are_rejected() {
    let out = bin().args(["solve", "x.txt", "--gamma", "0.1", "--adaptive-gamma"]).output().unwrap();
    assert_ne!(code(&out), 0);
}
