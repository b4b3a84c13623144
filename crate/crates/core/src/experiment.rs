//! Monte-Carlo verification of the expected-error bound.
//!
//! Each grid cell draws `trials` independent datasets from the replication
//! model, solves the configured problem and compares the mean `c_metric`
//! error with the bound. Trial seeds depend only on the base seed and the
//! (cell, trial) indices, so results are identical for any thread count.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Lists
//! are comma separated.
//!
//! | key           | value                                              |
//! |---------------|----------------------------------------------------|
//! | `n`           | sample counts, or omit and give `n_scale`          |
//! | `n_scale`     | `n = ceil(n_scale · s · ln p)` per cell            |
//! | `s`           | active group counts                                |
//! | `q`           | latent dimensions (number of groups)               |
//! | `p`           | column counts, or omit and give `replication`      |
//! | `replication` | `p = replication · q`                              |
//! | `eps`         | noise levels `(1/n)‖ν‖₁`                           |
//! | `weights`     | `uniform[:λ]`, `oscar:λ1,λ2`, `slope:q`, `file:P`  |
//! | `trials`      | trials per cell (≥ 1)                              |
//! | `seed`        | base seed                                          |
//! | `loss`        | `squared` or `absolute` (default `absolute`)       |
//! | `formulation` | `constrained` (default) or `lagrangian`            |
//! | `groups`      | `balanced` (default) or `random`                   |
//! | `random_signs`| `true` / `false` (default `false`)                 |
//! | `tol`, `max_iters`, `cluster_tol` | solver and clustering settings |
//! | `output`      | report path                                        |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{bound_rhs, c_metric, matrix_l1_norm, BoundInputs, BoundVariant, DEFAULT_CLUSTER_TOL};
use crate::datagen::{GenerativeModel, GroupStructure};
use crate::error::OwlError;
use crate::io::{format_number, read_text, write_text, FormatError, WeightSpec};
use crate::par::{map_indexed, Execution};
use crate::problem::{Formulation, Loss, ProblemInstance, SolverConfig};
use crate::solvers::solve;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleRule {
    Fixed(Vec<usize>),
    /// `n = ceil(k · s · ln p)`
    Scaled(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRule {
    Fixed(Vec<usize>),
    /// `p = r · q`
    Replication(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupLayout {
    Balanced,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationKind {
    Lagrangian,
    Constrained,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: SampleRule,
    pub s: Vec<usize>,
    pub q: Vec<usize>,
    pub p: ColumnRule,
    pub eps: Vec<f64>,
    pub weights: WeightSpec,
    pub trials: usize,
    pub seed: u64,
    pub loss: Loss,
    pub formulation: FormulationKind,
    pub groups: GroupLayout,
    pub random_signs: bool,
    pub solver: SolverConfig,
    pub cluster_tol: f64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, FormatError> {
        let mut n = None;
        let mut n_scale = None;
        let mut s = None;
        let mut q = None;
        let mut p = None;
        let mut replication = None;
        let mut eps = None;
        let mut weights = None;
        let mut trials = None;
        let mut seed = 0u64;
        let mut loss = Loss::AbsoluteL1;
        let mut formulation = FormulationKind::Constrained;
        let mut groups = GroupLayout::Balanced;
        let mut random_signs = false;
        let mut solver = SolverConfig::default();
        let mut cluster_tol = DEFAULT_CLUSTER_TOL;
        let mut output = None;

        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(FormatError::parse(origin, line_no, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let err = |msg: String| FormatError::parse(origin, line_no, msg);
            match key {
                "n" => n = Some(list::<usize>(value).map_err(err)?),
                "n_scale" => n_scale = Some(scalar::<f64>(value).map_err(err)?),
                "s" => s = Some(list::<usize>(value).map_err(err)?),
                "q" => q = Some(list::<usize>(value).map_err(err)?),
                "p" => p = Some(list::<usize>(value).map_err(err)?),
                "replication" => replication = Some(scalar::<usize>(value).map_err(err)?),
                "eps" => eps = Some(list::<f64>(value).map_err(err)?),
                "weights" => weights = Some(WeightSpec::parse(value)?),
                "trials" => trials = Some(scalar::<usize>(value).map_err(err)?),
                "seed" => seed = scalar::<u64>(value).map_err(err)?,
                "loss" => {
                    loss = match value {
                        "squared" => Loss::SquaredL2,
                        "absolute" => Loss::AbsoluteL1,
                        other => return Err(err(format!("unknown loss {other:?}"))),
                    }
                }
                "formulation" => {
                    formulation = match value {
                        "lagrangian" => FormulationKind::Lagrangian,
                        "constrained" => FormulationKind::Constrained,
                        other => return Err(err(format!("unknown formulation {other:?}"))),
                    }
                }
                "groups" => {
                    groups = match value {
                        "balanced" => GroupLayout::Balanced,
                        "random" => GroupLayout::Random,
                        other => return Err(err(format!("unknown group layout {other:?}"))),
                    }
                }
                "random_signs" => random_signs = scalar::<bool>(value).map_err(err)?,
                "tol" => solver.tol = scalar::<f64>(value).map_err(err)?,
                "max_iters" => solver.max_iters = scalar::<usize>(value).map_err(err)?,
                "cluster_tol" => cluster_tol = scalar::<f64>(value).map_err(err)?,
                "output" => output = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }

        let missing = |what: &str| FormatError::parse(origin, 0, format!("missing key `{what}`"));
        let n = match (n, n_scale) {
            (Some(v), None) => SampleRule::Fixed(v),
            (None, Some(k)) => SampleRule::Scaled(k),
            (Some(_), Some(_)) => {
                return Err(FormatError::parse(origin, 0, "give either `n` or `n_scale`, not both"))
            }
            (None, None) => return Err(missing("n")),
        };
        let p = match (p, replication) {
            (Some(v), None) => ColumnRule::Fixed(v),
            (None, Some(r)) => ColumnRule::Replication(r),
            (Some(_), Some(_)) => {
                return Err(FormatError::parse(origin, 0, "give either `p` or `replication`, not both"))
            }
            (None, None) => return Err(missing("p")),
        };
        let config = Self {
            n,
            s: s.ok_or_else(|| missing("s"))?,
            q: q.ok_or_else(|| missing("q"))?,
            p,
            eps: eps.ok_or_else(|| missing("eps"))?,
            weights: weights.ok_or_else(|| missing("weights"))?,
            trials: trials.ok_or_else(|| missing("trials"))?,
            seed,
            loss,
            formulation,
            groups,
            random_signs,
            solver,
            cluster_tol,
            output,
        };
        config.cells().map_err(FormatError::Invalid)?;
        Ok(config)
    }

    /// Expands the grid in `n, s, q, p, eps` nesting order (with `n` and
    /// `p` resolved per cell when given as rules).
    pub fn cells(&self) -> Result<Vec<Cell>, OwlError> {
        if self.trials == 0 {
            return Err(OwlError::InvalidArgument("trials must be at least 1".into()));
        }
        let ns: Vec<Option<usize>> = match &self.n {
            SampleRule::Fixed(v) => v.iter().copied().map(Some).collect(),
            SampleRule::Scaled(k) => {
                if !(*k > 0.0) {
                    return Err(OwlError::InvalidArgument("n_scale must be positive".into()));
                }
                vec![None]
            }
        };
        let mut cells = Vec::new();
        for &n in &ns {
            for &s in &self.s {
                for &q in &self.q {
                    let ps = match &self.p {
                        ColumnRule::Fixed(v) => v.clone(),
                        ColumnRule::Replication(r) => vec![r * q],
                    };
                    for &p in &ps {
                        for &eps in &self.eps {
                            let n = match (n, &self.n) {
                                (Some(n), _) => n,
                                (None, SampleRule::Scaled(k)) => {
                                    (k * s.max(1) as f64 * (p as f64).ln()).ceil() as usize
                                }
                                _ => unreachable!(),
                            };
                            if n == 0 || q < 2 || q > p || s > q || !(eps >= 0.0) {
                                return Err(OwlError::InvalidArgument(format!(
                                    "invalid grid cell n={n}, s={s}, q={q}, p={p}, eps={eps}: need n ≥ 1, 2 ≤ q ≤ p, s ≤ q, eps ≥ 0"
                                )));
                            }
                            cells.push(Cell { n, s, q, p, eps });
                        }
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(OwlError::InvalidArgument("experiment grid is empty".into()));
        }
        Ok(cells)
    }
}

fn scalar<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse {value:?}"))
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String> {
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(scalar)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub s: usize,
    pub q: usize,
    pub p: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    /// `c_metric` error; `None` when the solve failed or did not converge.
    pub error: Option<f64>,
    pub clustering_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub cell: Cell,
    pub trials: Vec<TrialOutcome>,
    pub mean_error: f64,
    pub std_error: f64,
    pub bound: f64,
    pub ratio: f64,
    pub nonconverged: usize,
    pub clustering_violations: usize,
    pub w1_over_wbar: f64,
}

impl CellReport {
    pub fn passed(&self) -> bool {
        self.ratio <= 1.0 && self.clustering_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
}

pub const REPORT_HEADER: &str = "n,s,q,p,eps,trials,converged,nonconverged,mean_error,std_error,bound_rhs,ratio,clustering_violations,w1_over_wbar,n_over_s_log_p";

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(CellReport::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for c in &self.cells {
            let Cell { n, s, q, p, eps } = c.cell;
            let scale = n as f64 / (s as f64 * (p as f64).ln());
            let f = format_number;
            out.push_str(&format!(
                "{n},{s},{q},{p},{},{},{},{},{},{},{},{},{},{},{}\n",
                f(eps),
                c.trials.len(),
                c.trials.len() - c.nonconverged,
                c.nonconverged,
                f(c.mean_error),
                f(c.std_error),
                f(c.bound),
                f(c.ratio),
                c.clustering_violations,
                f(c.w1_over_wbar),
                f(scale),
            ));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        write_text(path, &self.to_csv())
    }
}

/// SplitMix64 finalizer; decorrelates consecutive counters.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, cell: usize, trial: usize) -> u64 {
    mix(mix(mix(base) ^ cell as u64) ^ trial as u64)
}

pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport, OwlError> {
    let cells = config.cells()?;
    let mut reports = Vec::with_capacity(cells.len());
    for (index, cell) in cells.iter().enumerate() {
        reports.push(run_cell(config, index, *cell, exec)?);
    }
    Ok(ExperimentReport { cells: reports })
}

pub fn run_cell(config: &ExperimentConfig, index: usize, cell: Cell, exec: Execution) -> Result<CellReport, OwlError> {
    let weights = config.weights.build(cell.p)?;
    let trials: Vec<Result<TrialOutcome, OwlError>> = map_indexed(config.trials, exec, |t| {
        run_trial(config, cell, &weights, trial_seed(config.seed, index, t))
    });
    let trials: Vec<TrialOutcome> = trials.into_iter().collect::<Result<_, _>>()?;

    let errors: Vec<f64> = trials.iter().filter_map(|t| t.error).collect();
    let nonconverged = trials.len() - errors.len();
    let (mean_error, std_error) = mean_and_std(&errors);
    let bound = bound_rhs(
        &BoundInputs {
            s: cell.s,
            n: cell.n,
            p: cell.p,
            q: cell.q,
            w1_over_wbar: weights.max_over_mean(),
            c_l1_norm: 1.0,
            eps: cell.eps,
        },
        BoundVariant::GroupedQ,
    )?;
    let ratio = if bound > 0.0 {
        mean_error / bound
    } else if mean_error == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let clustering_violations = trials.iter().map(|t| t.clustering_violations).sum();
    if nonconverged > 0 {
        log::warn!(
            "cell n={} s={} q={} p={} eps={}: {nonconverged} of {} trials did not converge",
            cell.n,
            cell.s,
            cell.q,
            cell.p,
            cell.eps,
            trials.len()
        );
    }
    Ok(CellReport {
        cell,
        trials,
        mean_error,
        std_error,
        bound,
        ratio,
        nonconverged,
        clustering_violations,
        w1_over_wbar: weights.max_over_mean(),
    })
}

fn run_trial(
    config: &ExperimentConfig,
    cell: Cell,
    weights: &crate::weights::WeightVector,
    seed: u64,
) -> Result<TrialOutcome, OwlError> {
    let groups = match config.groups {
        GroupLayout::Balanced => GroupStructure::balanced(cell.q, cell.p)?,
        GroupLayout::Random => GroupStructure::random(cell.q, cell.p, seed)?,
    };
    let groups = if config.random_signs {
        groups.with_random_signs(seed)
    } else {
        groups
    };
    let model = GenerativeModel::quiet(groups, cell.n, cell.s, cell.eps, seed)?;
    let data = model.sample()?;
    let formulation = match config.formulation {
        FormulationKind::Lagrangian => Formulation::Lagrangian,
        FormulationKind::Constrained => Formulation::Constrained { eps: cell.eps },
    };
    let prob = ProblemInstance::new(data.a, data.y, weights.clone(), config.loss, formulation)?;
    let solution = match solve(&prob, &config.solver) {
        Ok(sol) => sol,
        Err(OwlError::Infeasible { .. }) => {
            return Ok(TrialOutcome {
                seed,
                error: None,
                clustering_violations: 0,
            })
        }
        Err(e) => return Err(e),
    };
    if !solution.converged {
        return Ok(TrialOutcome {
            seed,
            error: None,
            clustering_violations: 0,
        });
    }
    debug_assert_eq!(matrix_l1_norm(&model.c), 1.0);
    let error = c_metric(solution.x_hat.view(), data.x_star.view(), &model.c)?;
    let clustering_violations = if weights.delta() > 0.0 {
        model
            .groups
            .duplicate_pairs()
            .iter()
            .filter(|&&(i, j, sign)| {
                (solution.x_hat[i] - sign * solution.x_hat[j]).abs() > config.cluster_tol
            })
            .count()
    } else {
        0
    };
    Ok(TrialOutcome {
        seed,
        error: Some(error),
        clustering_violations,
    })
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}
