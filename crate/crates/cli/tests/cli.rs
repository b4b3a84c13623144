use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ndarray::{Array1, Array2};
use owl_core::io::{format_matrix, format_vector_column, read_matrix, read_vector};
use owl_core::{oscar_weights, solve, Formulation, Loss, ProblemInstance, SolverConfig};

fn owl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_owl"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(path: &Path, text: &str) -> String {
    fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn prox_examples() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(&dir.path().join("u.csv"), "4,1\n");
    let out = owl(&["prox", "--input", &u, "--weights", "oscar:1,1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "2,0\n");

    let zero = write(&dir.path().join("z.csv"), "0,0\n");
    let out = owl(&["prox", "--input", &zero, "--weights", "slope:0.1"]);
    assert_eq!(stdout(&out), "0,0\n");

    let bad = write(&dir.path().join("bad.csv"), "a,b\n");
    let out = owl(&["prox", "--input", &bad, "--weights", "oscar:1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a number"), "{}", stderr(&out));
}

#[test]
fn bad_weight_spec_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(&dir.path().join("u.csv"), "4,1\n");
    let out = owl(&["prox", "--input", &u, "--weights", "oscar:1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = owl(&["prox", "--input", &u, "--weights", "uniform:-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_with_identity_design_matches_prox() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(&dir.path().join("u.csv"), "3\n-1.5\n0.2\n2.9\n");
    let a = write(&dir.path().join("a.csv"), &format_matrix(&Array2::eye(4)));
    let x = dir.path().join("x.csv");
    let out = owl(&[
        "--tol", "1e-14", "solve", "--design", &a, "--observations", &u, "--weights", "oscar:0.5,0.2",
        "--output", x.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("converged=true"));
    let solved = read_vector(&x).unwrap();
    let prox = owl(&["prox", "--input", &u, "--weights", "oscar:0.5,0.2"]);
    let expected: Vec<f64> = stdout(&prox).trim().split(',').map(|s| s.parse().unwrap()).collect();
    for (s, e) in solved.iter().zip(&expected) {
        assert!((s - e).abs() <= 1e-12, "{solved} vs {expected:?}");
    }
}

#[test]
fn solve_reports_cluster_of_duplicated_columns() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        &dir.path().join("a.csv"),
        "1,1,0.3\n-0.5,-0.5,1\n2,2,-0.7\n0.1,0.1,0.4\n",
    );
    let y = write(&dir.path().join("y.csv"), "2.1\n-0.4\n3.5\n0.9\n");
    let out = owl(&["solve", "--design", &a, "--observations", &y, "--weights", "oscar:0.1,0.1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stderr(&out);
    let clusters = summary.lines().find(|l| l.starts_with("clusters:")).unwrap();
    assert!(clusters.contains("{1,2}@"), "{summary}");
    let x: Vec<f64> = stdout(&out).lines().map(|l| l.parse().unwrap()).collect();
    assert!((x[0] - x[1]).abs() <= 1e-6 && x[0] != 0.0);
}

#[test]
fn solve_matches_library_bit_for_bit() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let a = Array2::from_shape_fn((5, 8), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(5, |_| rng.random_range(-2.0..2.0));
    let dir = tempfile::tempdir().unwrap();
    let a_path = write(&dir.path().join("a.csv"), &format_matrix(&a));
    let y_path = write(&dir.path().join("y.csv"), &format_vector_column(&y));
    let w = oscar_weights(8, 0.2, 0.05).unwrap();
    for (loss, loss_arg) in [(Loss::SquaredL2, "squared"), (Loss::AbsoluteL1, "absolute")] {
        let x = dir.path().join(format!("x-{loss_arg}.csv"));
        let out = owl(&[
            "solve", "--design", &a_path, "--observations", &y_path, "--weights", "oscar:0.2,0.05",
            "--loss", loss_arg, "--output", x.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let prob = ProblemInstance::new(
            read_matrix(Path::new(&a_path)).unwrap(),
            read_vector(Path::new(&y_path)).unwrap(),
            w.clone(),
            loss,
            Formulation::Lagrangian,
        )
        .unwrap();
        let lib = solve(&prob, &SolverConfig::default()).unwrap();
        let cli = read_vector(&x).unwrap();
        for (c, l) in cli.iter().zip(lib.x_hat.iter()) {
            assert_eq!(c.to_bits(), l.to_bits());
        }
    }
}

#[test]
fn infeasible_constraint_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir.path().join("a.csv"), "1\n1\n1\n");
    let y = write(&dir.path().join("y.csv"), "0\n1\n5\n");
    let out = owl(&[
        "solve", "--design", &a, "--observations", &y, "--weights", "uniform", "--formulation",
        "constrained", "--eps", "0.01",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("infeasible"));
    let out = owl(&["solve", "--design", &a, "--observations", &y, "--weights", "uniform", "--formulation", "constrained"]);
    assert_eq!(out.status.code(), Some(2));
}

fn generate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--seed", "17", "generate", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    owl(&args)
}

#[test]
fn generate_example_design_and_determinism() {
    let root = tempfile::tempdir().unwrap();
    let (d1, d2) = (root.path().join("one"), root.path().join("two"));
    let flags = ["--groups", "1,2;3;4", "--n", "3", "--s", "1", "--eps", "0.05"];
    assert!(generate(&d1, &flags).status.success());
    assert!(generate(&d2, &flags).status.success());
    for name in ["A.csv", "y.csv", "xstar.csv", "C.csv", "meta.json"] {
        assert_eq!(fs::read(d1.join(name)).unwrap(), fs::read(d2.join(name)).unwrap(), "{name}");
    }
    let a = read_matrix(&d1.join("A.csv")).unwrap();
    assert_eq!(a.column(0), a.column(1));
    assert_eq!(fs::read_to_string(d1.join("C.csv")).unwrap(), "1,1,0,0\n0,0,1,0\n0,0,0,1\n");
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d1.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 17);
    assert_eq!(meta["groups"], serde_json::json!([[1, 2], [3], [4]]));
}

#[test]
fn generate_without_signal_writes_pure_noise() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &["--groups", "balanced:8,16", "--n", "20", "--s", "0", "--eps", "0.3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let x = read_vector(&dir.path().join("xstar.csv")).unwrap();
    assert!(x.iter().all(|&v| v == 0.0));
    let y = read_vector(&dir.path().join("y.csv")).unwrap();
    let level = y.iter().map(|v| v.abs()).sum::<f64>() / 20.0;
    assert!((level - 0.3).abs() <= 1e-12 * 0.3);
}

#[test]
fn sign_flipped_groups() {
    let dir = tempfile::tempdir().unwrap();
    assert!(generate(dir.path(), &["--groups", "1,-2;3", "--n", "4"]).status.success());
    let a = read_matrix(&dir.path().join("A.csv")).unwrap();
    assert_eq!(a.column(0), a.column(1).mapv(|v| -v));
    let out = generate(dir.path(), &["--groups", "1,0;2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_clusters_rows_and_violations() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir.path().join("a.csv"), "1,1,5\n2,2,-1\n");
    let y = write(&dir.path().join("y.csv"), "0.1\n0.1\n");
    let clustered = write(&dir.path().join("x.csv"), "0.5\n0.5\n0.1\n");
    let args = |sol: &str| {
        vec![
            "check-clusters".to_string(), "--design".into(), a.clone(), "--observations".into(), y.clone(),
            "--weights".into(), "oscar:1,0.1".into(), "--solution".into(), sol.to_string(),
        ]
    };
    let run = |sol: &str| {
        let a = args(sol);
        owl(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let out = run(&clustered);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("pair (1,2): condition=true, clustered=true\n"), "{text}");
    assert!(text.contains("pair (1,3): condition=false, clustered=false\n"), "{text}");

    let broken = write(&dir.path().join("bad.csv"), "0.5\n0.2\n0.1\n");
    let out = run(&broken);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("pair (1,2): condition=true, clustered=false, VIOLATION"));
}

#[test]
fn generate_solve_check_round_trip_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(generate(d, &["--groups", "balanced:6,12", "--n", "30", "--s", "2", "--eps", "0.05"]).status.success());
    let (a, y) = (d.join("A.csv"), d.join("y.csv"));
    let x = d.join("x.csv");
    for loss in ["squared", "absolute"] {
        let common = [
            "--design", a.to_str().unwrap(), "--observations", y.to_str().unwrap(), "--weights",
            "oscar:0.05,0.01", "--loss", loss,
        ];
        let mut solve_args = vec!["solve"];
        solve_args.extend_from_slice(&common);
        solve_args.extend_from_slice(&["--output", x.to_str().unwrap()]);
        let out = owl(&solve_args);
        assert!(out.status.success(), "{}", stderr(&out));
        let mut check = vec!["check-clusters"];
        check.extend_from_slice(&common);
        check.extend_from_slice(&["--solution", x.to_str().unwrap()]);
        let out = owl(&check);
        assert!(out.status.success(), "{loss}: {}", stdout(&out));
        assert!(stdout(&out).ends_with("violations=0\n"));
    }
}

#[test]
fn experiment_trivial_cell_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir.path().join("exp.cfg"),
        "# noiseless, no signal\nn = 20\ns = 0\nq = 4\nreplication = 2\neps = 0\nweights = oscar:1,1\ntrials = 1\n",
    );
    let out = owl(&["experiment", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,s,q,p,eps,trials,converged,nonconverged,mean_error"));
    assert_eq!(lines.next().unwrap(), "20,0,4,8,0,1,1,0,0,0,0,0,0,1.7777777777777777,inf");

    let (r1, r2) = (dir.path().join("r1.csv"), dir.path().join("r2.csv"));
    let cfg = write(
        &dir.path().join("exp2.cfg"),
        "n = 40\ns = 1,2\nq = 8\nreplication = 2\neps = 0.05\nweights = oscar:1,0.5\ntrials = 4\nseed = 9\n",
    );
    for r in [&r1, &r2] {
        let out = owl(&["--threads", "2", "experiment", &cfg, "--output", r.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
}

#[test]
fn malformed_experiment_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("bad.cfg"), "n = 20\ns = 0\n");
    assert_eq!(owl(&["experiment", &cfg]).status.code(), Some(2));
    let cfg = write(&dir.path().join("bad2.cfg"), "n = twenty\n");
    assert_eq!(owl(&["experiment", &cfg]).status.code(), Some(2));
}
