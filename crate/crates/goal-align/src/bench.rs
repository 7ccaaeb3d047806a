//! Benchmark harness: variation generation (human models missing
//! random initial-state fluents), method comparison over the design
//! searches, standalone bound timings, and CSV output.

use crate::compile::{
    build_forced_disagreement, build_joint_model, compute_bound, BoundError, CostScheme,
    PhaseOrdering,
};
use crate::design::{build_design_model, DesignAtom, DesignProblem, Polarity};
use crate::design_search::{
    find_minimal_design, DesignSearchConfig, SearchConclusion, SearchVariant,
};
use crate::model::GroundedModel;
use crate::pddl::{
    fluent_by_atom, ground_pair_with_achievable, parse_atom_list, parse_domain, parse_problem,
    GroundAtom, GroundOptions, ProblemAst,
};
use crate::rng::SplitMix64;
use crate::search::{prove_unsolvable, SolveBudget, Unsolvability};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot delete {requested} init atoms, the initial state has only {available}")]
    DeleteCountTooLarge { requested: usize, available: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("reading `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("universe atom `{atom}` does not name a grounded fluent")]
    UnknownUniverseAtom { atom: String },
}

/// One atom of a JSON universe file.
#[derive(Clone, Debug, Deserialize)]
pub struct AtomSpec {
    pub fluent: String,
    pub polarity: Polarity,
    #[serde(default = "one")]
    pub cost: u64,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize)]
pub struct UniverseFile {
    pub atoms: Vec<AtomSpec>,
}

/// The add-polarity atoms of a universe, as ground atoms; these count
/// as achievable during static pruning so designed models keep the
/// actions they gate.
pub fn universe_add_atoms(specs: &[AtomSpec]) -> Vec<GroundAtom> {
    specs
        .iter()
        .filter(|a| a.polarity == Polarity::Add)
        .map(|a| {
            let mut parts = a.fluent.split_whitespace();
            GroundAtom {
                pred: parts.next().unwrap_or("").to_lowercase(),
                args: parts.map(|s| s.to_lowercase()).collect(),
            }
        })
        .collect()
}

/// Resolves a universe file against a grounded model's fluent table.
pub fn resolve_universe(
    spec: &UniverseFile,
    model: &GroundedModel,
) -> Result<(Vec<DesignAtom>, Vec<u64>), BenchError> {
    let mut atoms = Vec::new();
    let mut costs = Vec::new();
    for entry in &spec.atoms {
        let fluent = fluent_by_atom(model, &entry.fluent).ok_or_else(|| {
            BenchError::UnknownUniverseAtom {
                atom: entry.fluent.clone(),
            }
        })?;
        atoms.push(DesignAtom {
            fluent,
            polarity: entry.polarity,
        });
        costs.push(entry.cost);
    }
    Ok((atoms, costs))
}

#[derive(Clone, Debug, Deserialize)]
pub struct BenchConfig {
    pub domain: PathBuf,
    pub problems: Vec<PathBuf>,
    #[serde(default = "default_variations")]
    pub variations: u32,
    /// Init atoms deleted from the human copy of each variation.
    #[serde(default = "default_delete")]
    pub delete: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: u64,
    pub output: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Also record standalone bound-computation timings per variation.
    #[serde(default = "default_true")]
    pub record_bound_times: bool,
    /// Extra design atoms beyond the restore set.
    #[serde(default)]
    pub extra_universe: Vec<AtomSpec>,
    /// Optional complete-state goal files, aligned with `problems`; a
    /// null entry leaves that problem's goal untouched.
    #[serde(default)]
    pub full_state_goals: Vec<Option<PathBuf>>,
}

fn default_variations() -> u32 {
    5
}
fn default_delete() -> usize {
    5
}
fn default_methods() -> Vec<String> {
    vec!["main".into(), "main-fl".into(), "naive".into()]
}
fn default_time_limit() -> u64 {
    300
}
fn default_workers() -> usize {
    1
}
fn default_true() -> bool {
    true
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<BenchConfig, BenchError> {
        let cfg: BenchConfig =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        if cfg.variations < 1 {
            return Err(BenchError::Config("variations must be at least 1".into()));
        }
        if cfg.problems.is_empty() {
            return Err(BenchError::Config("no problem files listed".into()));
        }
        Ok(cfg)
    }
}

/// One CSV row. The `design_size` column carries the design size for
/// method rows and the bound value for bound rows, when known.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub domain: String,
    pub instance: String,
    pub variation: u32,
    pub method: String,
    pub seconds: f64,
    pub outcome: String,
    pub design_size: Option<u32>,
    pub expanded: u64,
    pub generated: u64,
}

pub const CSV_HEADER: &str =
    "domain,instance,variation,method,seconds,outcome,design_size,expanded,generated";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{},{},{},{}",
            self.domain,
            self.instance,
            self.variation,
            self.method,
            self.seconds,
            self.outcome,
            self.design_size.map_or(String::new(), |v| v.to_string()),
            self.expanded,
            self.generated,
        )
    }
}

/// Robot/human problem pair: the robot keeps the original instance, the
/// human copy loses `n_delete` uniformly chosen distinct init atoms.
/// Reproducible from the seed. Returns the pair and the deleted atoms
/// (the implied restore universe).
pub fn generate_variation(
    problem: &ProblemAst,
    n_delete: usize,
    seed: u64,
) -> Result<(ProblemAst, ProblemAst, Vec<GroundAtom>), BenchError> {
    if n_delete > problem.init.len() {
        return Err(BenchError::DeleteCountTooLarge {
            requested: n_delete,
            available: problem.init.len(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let picked = rng.distinct_indices(problem.init.len(), n_delete);
    let mut human = problem.clone();
    human.name = format!("{}-human", problem.name);
    let mut deleted: Vec<GroundAtom> = Vec::new();
    let mut keep = vec![true; problem.init.len()];
    for &i in &picked {
        keep[i] = false;
        deleted.push(problem.init[i].clone());
    }
    human.init = problem
        .init
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(a, _)| a.clone())
        .collect();
    deleted.sort_by_key(|a| a.render());
    Ok((problem.clone(), human, deleted))
}

struct Job {
    domain_name: String,
    instance: String,
    variation: u32,
    robot: GroundedModel,
    human: GroundedModel,
    universe: Vec<DesignAtom>,
    costs: Vec<u64>,
}

fn read_file(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs the whole benchmark matrix and writes the CSV. Rows come back
/// sorted by (domain, instance, variation, method) so reruns with the
/// same config are identical up to the timing columns.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let domain_text = read_file(&cfg.domain)?;
    let domain = parse_domain(&domain_text).map_err(|e| BenchError::Parse {
        path: cfg.domain.display().to_string(),
        message: e.to_string(),
    })?;

    // Build all jobs first so seeds are assigned deterministically.
    let mut jobs: Vec<Job> = Vec::new();
    let mut seed_stream = SplitMix64::new(cfg.seed);
    for (pi, problem_path) in cfg.problems.iter().enumerate() {
        let problem_text = read_file(problem_path)?;
        let mut problem = parse_problem(&problem_text).map_err(|e| BenchError::Parse {
            path: problem_path.display().to_string(),
            message: e.to_string(),
        })?;
        if let Some(Some(goal_path)) = cfg.full_state_goals.get(pi) {
            let goal_text = read_file(goal_path)?;
            problem.goal = parse_atom_list(&goal_text).map_err(|e| BenchError::Parse {
                path: goal_path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        let instance = problem_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| problem.name.clone());
        for v in 0..cfg.variations {
            let var_seed = seed_stream.next_u64();
            let (robot_ast, human_ast, deleted) =
                generate_variation(&problem, cfg.delete, var_seed)?;
            let achievable = universe_add_atoms(&cfg.extra_universe);
            let (robot, human) = ground_pair_with_achievable(
                &domain,
                &robot_ast,
                &human_ast,
                &GroundOptions::default(),
                &achievable,
            )
            .map_err(|e| BenchError::Parse {
                path: problem_path.display().to_string(),
                message: e.to_string(),
            })?;
            let mut universe: Vec<DesignAtom> = Vec::new();
            let mut costs: Vec<u64> = Vec::new();
            for atom in &deleted {
                let fluent = fluent_by_atom(&robot, &atom.render()).ok_or_else(|| {
                    BenchError::UnknownUniverseAtom {
                        atom: atom.render(),
                    }
                })?;
                universe.push(DesignAtom {
                    fluent,
                    polarity: Polarity::Add,
                });
                costs.push(1);
            }
            let extras = resolve_universe(
                &UniverseFile {
                    atoms: cfg.extra_universe.clone(),
                },
                &robot,
            )?;
            for (atom, cost) in extras.0.into_iter().zip(extras.1) {
                if !universe.contains(&atom) {
                    universe.push(atom);
                    costs.push(cost);
                }
            }
            jobs.push(Job {
                domain_name: domain.name.clone(),
                instance: instance.clone(),
                variation: v,
                robot,
                human,
                universe,
                costs,
            });
        }
    }

    let budget = SolveBudget::default().with_wall(Duration::from_secs(cfg.time_limit_secs));
    let methods = cfg.methods.clone();
    let record_bounds = cfg.record_bound_times;

    // Fan jobs out over a worker pool; rows funnel through one channel.
    let (tx, rx) = mpsc::channel::<BenchRow>();
    let jobs = std::sync::Mutex::new(jobs.into_iter());
    let workers = cfg.workers.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let jobs = &jobs;
            let methods = &methods;
            let budget = &budget;
            scope.spawn(move || loop {
                let job = match jobs.lock().unwrap().next() {
                    Some(j) => j,
                    None => break,
                };
                for row in run_job(&job, methods, budget, record_bounds) {
                    let _ = tx.send(row);
                }
            });
        }
        drop(tx);
    });
    let mut rows: Vec<BenchRow> = rx.into_iter().collect();
    rows.sort_by(|a, b| {
        (&a.domain, &a.instance, a.variation, &a.method).cmp(&(
            &b.domain,
            &b.instance,
            b.variation,
            &b.method,
        ))
    });

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    std::fs::write(&cfg.output, csv).map_err(|source| BenchError::Io {
        path: cfg.output.display().to_string(),
        source,
    })?;

    print_summary(&rows);
    Ok(rows)
}

fn run_job(job: &Job, methods: &[String], budget: &SolveBudget, record_bounds: bool) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    let row = |method: &str, seconds: f64, outcome: &str, size: Option<u32>, ex: u64, gen: u64| {
        BenchRow {
            domain: job.domain_name.clone(),
            instance: job.instance.clone(),
            variation: job.variation,
            method: method.to_string(),
            seconds,
            outcome: outcome.to_string(),
            design_size: size,
            expanded: ex,
            generated: gen,
        }
    };

    let dp = DesignProblem {
        robot: job.robot.clone(),
        human: job.human.clone(),
        universe: job.universe.clone(),
        costs: job.costs.clone(),
        lower_limit: 0,
        upper_limit: 0,
    };

    for method in methods {
        let variant = match method.as_str() {
            "main" => SearchVariant::Main,
            "main-fl" => SearchVariant::MainFlattened,
            "naive" => SearchVariant::Naive,
            other => {
                rows.push(row(other, 0.0, "unknown-method", None, 0, 0));
                continue;
            }
        };
        let search_cfg = DesignSearchConfig {
            variant,
            budget: budget.clone(),
            seed: 0,
        };
        let start = Instant::now();
        match find_minimal_design(&dp, &search_cfg) {
            Ok(result) => {
                let secs = start.elapsed().as_secs_f64();
                let (outcome, size) = match result.conclusion {
                    SearchConclusion::Found(d) => ("found", Some(d.size() as u32)),
                    SearchConclusion::NoneExists => ("none", None),
                    SearchConclusion::Unknown => ("timeout", None),
                };
                rows.push(row(
                    method,
                    secs,
                    outcome,
                    size,
                    result.stats.expanded,
                    result.stats.generated,
                ));
            }
            Err(e) => {
                rows.push(row(method, start.elapsed().as_secs_f64(), &format!("error:{e}"), None, 0, 0));
            }
        }
    }

    if record_bounds {
        // Standalone lower bound (optimal search).
        let start = Instant::now();
        match build_joint_model(
            &job.robot,
            &job.human,
            CostScheme::lower(),
            PhaseOrdering::Ordered,
        ) {
            Ok(compiled) => match compute_bound(&compiled, budget) {
                Ok(report) => rows.push(row(
                    "gd_down",
                    start.elapsed().as_secs_f64(),
                    "ok",
                    Some(report.bound),
                    report.stats.expanded,
                    report.stats.generated,
                )),
                Err(BoundError::NoValidPlanPair) => rows.push(row(
                    "gd_down",
                    start.elapsed().as_secs_f64(),
                    "no_plan",
                    None,
                    0,
                    0,
                )),
                Err(_) => rows.push(row(
                    "gd_down",
                    start.elapsed().as_secs_f64(),
                    "timeout",
                    None,
                    0,
                    0,
                )),
            },
            Err(e) => rows.push(row("gd_down", 0.0, &format!("error:{e}"), None, 0, 0)),
        }

        // Lower bound with design: one design-compilation solve at τ=1.
        let start = Instant::now();
        match build_design_model(&dp, 1, &[], 0, PhaseOrdering::Ordered) {
            Ok(compiled) => {
                let result = prove_unsolvable(&compiled, budget);
                let outcome = match result.verdict {
                    Unsolvability::Solvable(_) => "solvable",
                    Unsolvability::Unsolvable => "unsolvable",
                    Unsolvability::Unknown => "timeout",
                };
                rows.push(row(
                    "gd_down_design",
                    start.elapsed().as_secs_f64(),
                    outcome,
                    None,
                    result.stats.expanded,
                    result.stats.generated,
                ));
            }
            Err(e) => rows.push(row("gd_down_design", 0.0, &format!("error:{e}"), None, 0, 0)),
        }

        // Upper bound as an unsolvability check.
        let start = Instant::now();
        match build_joint_model(
            &job.robot,
            &job.human,
            CostScheme::upper(),
            PhaseOrdering::Ordered,
        ) {
            Ok(compiled) => {
                let forced = build_forced_disagreement(&compiled);
                let result = prove_unsolvable(&forced, budget);
                let (outcome, bound) = match result.verdict {
                    Unsolvability::Unsolvable => ("ok", Some(0)),
                    Unsolvability::Solvable(_) => ("positive", None),
                    Unsolvability::Unknown => ("timeout", None),
                };
                rows.push(row(
                    "gd_up",
                    start.elapsed().as_secs_f64(),
                    outcome,
                    bound,
                    result.stats.expanded,
                    result.stats.generated,
                ));
            }
            Err(e) => rows.push(row("gd_up", 0.0, &format!("error:{e}"), None, 0, 0)),
        }
    }
    rows
}

/// Mean ± sample standard deviation of seconds per (domain, instance,
/// method), printed as the run summary.
fn print_summary(rows: &[BenchRow]) {
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.domain.clone(), row.instance.clone(), row.method.clone()))
            .or_default()
            .push(row.seconds);
    }
    println!("{:<16} {:<12} {:<16} {:>18}", "domain", "instance", "method", "seconds");
    for ((domain, instance, method), secs) in groups {
        let n = secs.len() as f64;
        let mean = secs.iter().sum::<f64>() / n;
        let var = if secs.len() > 1 {
            secs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        println!(
            "{:<16} {:<12} {:<16} {:>10.3} ± {:.3}",
            domain,
            instance,
            method,
            mean,
            var.sqrt()
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKSWORLD: &str = include_str!("../../../benchmarks/blocksworld/domain.pddl");
    const BW3: &str = include_str!("../../../benchmarks/blocksworld/p03.pddl");

    #[test]
    fn variation_deletes_exactly_n_atoms() {
        let problem = parse_problem(BW3).unwrap();
        let (robot, human, deleted) = generate_variation(&problem, 5, 11).unwrap();
        assert_eq!(robot.init.len(), 7);
        assert_eq!(human.init.len(), 2);
        assert_eq!(deleted.len(), 5);
    }

    #[test]
    fn zero_deletions_yield_identical_models() {
        let problem = parse_problem(BW3).unwrap();
        let (robot, human, deleted) = generate_variation(&problem, 0, 3).unwrap();
        assert_eq!(robot.init, human.init);
        assert!(deleted.is_empty());
    }

    #[test]
    fn same_seed_same_variation() {
        let problem = parse_problem(BW3).unwrap();
        let a = generate_variation(&problem, 3, 42).unwrap();
        let b = generate_variation(&problem, 3, 42).unwrap();
        assert_eq!(a.1.init, b.1.init);
        let c = generate_variation(&problem, 3, 43).unwrap();
        assert!(a.1.init != c.1.init || a.2 == c.2);
    }

    #[test]
    fn delete_count_is_bounded() {
        let problem = parse_problem(BW3).unwrap();
        assert!(matches!(
            generate_variation(&problem, 8, 0),
            Err(BenchError::DeleteCountTooLarge { .. })
        ));
    }

    #[test]
    fn variation_grounds_into_a_design_problem() {
        let domain = parse_domain(BLOCKSWORLD).unwrap();
        let problem = parse_problem(BW3).unwrap();
        let (robot_ast, human_ast, deleted) = generate_variation(&problem, 2, 5).unwrap();
        let (robot, human) =
            crate::pddl::ground_pair(&domain, &robot_ast, &human_ast, &GroundOptions::default())
                .unwrap();
        for atom in &deleted {
            let f = fluent_by_atom(&robot, &atom.render()).unwrap();
            assert!(robot.init.contains(f));
            assert!(!human.init.contains(f));
        }
    }
}
