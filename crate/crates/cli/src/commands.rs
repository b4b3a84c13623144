use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use ndarray::Array1;
use owl_core::analysis::{detect_clusters, verify_pairs, DEFAULT_CLUSTER_TOL};
use owl_core::datagen::{GenerativeModel, GroupStructure};
use owl_core::experiment::{run_experiment, ExperimentConfig};
use owl_core::io::{format_number, format_row, format_vector_column, parse_vector, read_matrix, read_vector, FormatError, WeightSpec};
use owl_core::par::Execution;
use owl_core::{prox_owl, Formulation, Loss, OwlError, ProblemInstance, SolverConfig, StepRule};
use serde_json::json;

use crate::{FormulationArg, GlobalOpts, LossArg, ProblemArgs, SolveArgs, StepRuleArg};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, or inconsistent dimensions.
    Input(String),
    Infeasible(String),
    Violation(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Violation(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Other(m) => f.write_str(m),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Violation(m) => write!(f, "property violation: {m}"),
        }
    }
}

impl From<OwlError> for CliError {
    fn from(e: OwlError) -> Self {
        match e {
            OwlError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            OwlError::NonFinite(_) => CliError::Other(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Invalid(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

fn solver_config(global: &GlobalOpts) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(tol) = global.tol {
        cfg.tol = tol;
    }
    if let Some(max_iters) = global.max_iters {
        cfg.max_iters = max_iters;
    }
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    cfg
}

pub fn prox(input: &Path, weights: &str) -> Result<(), CliError> {
    let u = if input == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Other(format!("stdin: {e}")))?;
        parse_vector(&text, "stdin")?
    } else {
        read_vector(input)?
    };
    let w = WeightSpec::parse(weights)?.build(u.len())?;
    let x = prox_owl(u.as_slice().expect("contiguous"), &w)?;
    println!("{}", format_row(&x));
    Ok(())
}

fn load_problem(args: &ProblemArgs) -> Result<ProblemInstance, CliError> {
    let a = read_matrix(&args.design)?;
    let y = read_vector(&args.observations)?;
    let w = WeightSpec::parse(&args.weights)?.build(a.ncols())?;
    let loss = match args.loss {
        LossArg::Squared => Loss::SquaredL2,
        LossArg::Absolute => Loss::AbsoluteL1,
    };
    let formulation = match (args.formulation, args.eps) {
        (FormulationArg::Lagrangian, None) => Formulation::Lagrangian,
        (FormulationArg::Lagrangian, Some(_)) => {
            return Err(CliError::Input("--eps only applies to the constrained formulation".into()))
        }
        (FormulationArg::Constrained, Some(eps)) => Formulation::Constrained { eps },
        (FormulationArg::Constrained, None) => {
            return Err(CliError::Input("the constrained formulation needs --eps".into()))
        }
    };
    Ok(ProblemInstance::new(a, y, w, loss, formulation)?)
}

/// Clusters printed as 1-based index sets, largest magnitude first.
fn describe_clusters(x: &Array1<f64>, tol: f64) -> Result<String, CliError> {
    let report = detect_clusters(x.view(), tol)?;
    let mut order: Vec<usize> = (0..report.clusters.len()).collect();
    order.sort_by(|&a, &b| report.magnitudes[b].total_cmp(&report.magnitudes[a]));
    let mut out = String::from("clusters:");
    for k in order {
        let members: Vec<String> = report.clusters[k].iter().map(|i| (i + 1).to_string()).collect();
        write!(out, " {{{}}}@{}", members.join(","), format_number(report.magnitudes[k])).expect("writing to a String");
    }
    Ok(out)
}

pub fn solve(global: &GlobalOpts, args: &SolveArgs) -> Result<(), CliError> {
    let prob = load_problem(&args.problem)?;
    let mut cfg = solver_config(global);
    cfg.step_rule = match args.step_rule {
        StepRuleArg::Fixed => StepRule::FixedFromSpectralNorm,
        StepRuleArg::Backtracking => StepRule::Backtracking,
    };
    let sol = owl_core::solve(&prob, &cfg)?;
    let summary = format!(
        "objective={} residual_l2_sq_over_n={} residual_l1_over_n={} fixed_point_residual={} iterations={} converged={}\n{}",
        format_number(sol.objective),
        format_number(sol.residual_l2_sq_over_n),
        format_number(sol.residual_l1_over_n),
        format_number(sol.fixed_point_residual),
        sol.iterations,
        sol.converged,
        describe_clusters(&sol.x_hat, global.cluster_tol.unwrap_or(DEFAULT_CLUSTER_TOL))?,
    );
    match &args.output {
        Some(path) => {
            fs::write(path, format_vector_column(&sol.x_hat)).map_err(|e| io_error(path, e))?;
            println!("{summary}");
        }
        None => {
            print!("{}", format_vector_column(&sol.x_hat));
            eprintln!("{summary}");
        }
    }
    if !sol.converged {
        log::warn!("solver stopped after {} iterations without converging", sol.iterations);
    }
    Ok(())
}

fn parse_groups(spec: &str, seed: u64) -> Result<GroupStructure, CliError> {
    let bad = |msg: String| CliError::Input(format!("group spec {spec:?}: {msg}"));
    let dims = |args: &str| -> Result<(usize, usize), CliError> {
        match args.split(',').map(|s| s.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>() {
            Ok(v) if v.len() == 2 => Ok((v[0], v[1])),
            _ => Err(bad("expected q,p".into())),
        }
    };
    if let Some(args) = spec.strip_prefix("balanced:") {
        let (q, p) = dims(args)?;
        return Ok(GroupStructure::balanced(q, p)?);
    }
    if let Some(args) = spec.strip_prefix("random:") {
        let (q, p) = dims(args)?;
        return Ok(GroupStructure::random(q, p, seed)?);
    }
    let mut groups = Vec::new();
    let mut signed = Vec::new();
    for part in spec.split(';') {
        let mut group = Vec::new();
        for item in part.split(',') {
            let item = item.trim();
            let (sign, digits) = match item.strip_prefix('-') {
                Some(rest) => (-1.0, rest),
                None => (1.0, item),
            };
            let index: usize = digits.parse().map_err(|_| bad(format!("not an index: {item:?}")))?;
            if index == 0 {
                return Err(bad("indices are 1-based".into()));
            }
            group.push(index - 1);
            signed.push((index - 1, sign));
        }
        groups.push(group);
    }
    let mut signs = vec![1.0; signed.len()];
    for (j, s) in signed {
        if j >= signs.len() {
            return Err(bad(format!("index {} out of range", j + 1)));
        }
        signs[j] = s;
    }
    Ok(GroupStructure::new(groups, Some(signs))?)
}

pub fn generate(global: &GlobalOpts, args: &crate::GenerateArgs) -> Result<(), CliError> {
    let seed = global.seed.unwrap_or(0);
    let mut groups = parse_groups(&args.groups, seed)?;
    if args.random_signs {
        groups = groups.with_random_signs(seed);
    }
    let model = GenerativeModel::replication(groups, args.n, args.s, args.eps, seed)?;
    let data = model.sample()?;
    fs::create_dir_all(&args.out_dir).map_err(|e| io_error(&args.out_dir, e))?;
    let write = |name: &str, text: String| -> Result<(), CliError> {
        let path = args.out_dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))
    };
    write("A.csv", owl_core::io::format_matrix(&data.a))?;
    write("y.csv", format_vector_column(&data.y))?;
    write("xstar.csv", format_vector_column(&data.x_star))?;
    write("C.csv", owl_core::io::format_matrix(&model.c))?;
    let groups_1based: Vec<Vec<usize>> = model
        .groups
        .groups()
        .iter()
        .map(|g| g.iter().map(|j| j + 1).collect())
        .collect();
    let meta = json!({
        "n": args.n,
        "p": model.groups.p(),
        "q": model.groups.q(),
        "s": args.s,
        "eps": args.eps,
        "seed": seed,
        "rng": "ChaCha8, streams: design 1, signal 2, noise 3, groups 4",
        "groups": groups_1based,
        "signs": model.groups.signs(),
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Other(e.to_string()))?;
    write("meta.json", text + "\n")
}

pub fn check_clusters(global: &GlobalOpts, args: &crate::CheckArgs) -> Result<(), CliError> {
    let prob = load_problem(&args.problem)?;
    let x = read_vector(&args.solution)?;
    let tol = global.cluster_tol.unwrap_or(DEFAULT_CLUSTER_TOL);
    let verdicts = verify_pairs(&prob, x.view(), tol)?;
    let mut violations = 0;
    for v in &verdicts {
        let flag = if v.is_violation() {
            violations += 1;
            ", VIOLATION"
        } else {
            ""
        };
        println!(
            "pair ({},{}): condition={}, clustered={}{flag}",
            v.i + 1,
            v.j + 1,
            v.condition,
            v.clustered
        );
    }
    println!("pairs={} violations={violations}", verdicts.len());
    if violations > 0 {
        return Err(CliError::Violation(format!(
            "{violations} pair(s) satisfy the clustering condition but differ in magnitude by more than {tol}"
        )));
    }
    Ok(())
}

fn execution(global: &GlobalOpts) -> Result<Execution, CliError> {
    match global.threads {
        None => Ok(Execution::Parallel),
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(k) => configure_pool(k),
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(threads: usize) -> Result<Execution, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))?;
    Ok(Execution::Parallel)
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_threads: usize) -> Result<Execution, CliError> {
    log::warn!("built without the `parallel` feature; running sequentially");
    Ok(Execution::Sequential)
}

pub fn experiment(global: &GlobalOpts, config: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = global.tol {
        cfg.solver.tol = tol;
    }
    if let Some(max_iters) = global.max_iters {
        cfg.solver.max_iters = max_iters;
    }
    if let Some(tol) = global.cluster_tol {
        cfg.cluster_tol = tol;
    }
    let report = run_experiment(&cfg, execution(global)?)?;
    match output.or(cfg.output.as_deref()) {
        Some(path) => fs::write(path, report.to_csv()).map_err(|e| io_error(path, e))?,
        None => print!("{}", report.to_csv()),
    }
    if !report.all_passed() {
        let failing = report.cells.iter().filter(|c| !c.passed()).count();
        return Err(CliError::Violation(format!(
            "{failing} cell(s) exceed the bound or show clustering violations"
        )));
    }
    Ok(())
}
