//! Command-line front-end: divergence bounds, minimal-design search,
//! compilation export, brute-force oracle runs, and the benchmark
//! harness.
//!
//! Exit codes: 0 success, 2 unsolvable / no design, 3 resource
//! exhausted, 4 input error.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use goal_align::bench::{resolve_universe, universe_add_atoms, BenchConfig, UniverseFile};
use goal_align::compile::{
    build_joint_model, BoundError, BoundMode, BoundsReport, CostRepr, CostScheme, PhaseOrdering,
};
use goal_align::design::{build_design_model, DesignProblem};
use goal_align::design_search::{
    find_minimal_design, DesignSearchConfig, SearchConclusion, SearchVariant,
};
use goal_align::model::{GroundedModel, Plan, PlanRestriction};
use goal_align::pddl::{
    emit_pddl, ground_pair_with_achievable, ground_with_achievable, parse_atom_list, parse_domain,
    parse_problem, GroundAtom, GroundOptions,
};
use goal_align::search::SolveBudget;
use goal_align::State;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_OK: u8 = 0;
const EXIT_UNSOLVABLE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "goal-align",
    about = "Goal-state divergence bounds and environment design for model pairs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RestrictionArg {
    All,
    Optimal,
}

impl From<RestrictionArg> for PlanRestriction {
    fn from(value: RestrictionArg) -> Self {
        match value {
            RestrictionArg::All => PlanRestriction::All,
            RestrictionArg::Optimal => PlanRestriction::Optimal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Main,
    #[value(name = "main-fl")]
    MainFl,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CompileMode {
    #[value(name = "gdup")]
    Upper,
    #[value(name = "gddown")]
    Lower,
    #[value(name = "gdup-opt")]
    UpperOptimal,
    #[value(name = "gddown-opt")]
    LowerOptimal,
    Design,
}

/// The four model files shared by most subcommands.
#[derive(Args)]
struct ModelFiles {
    robot_domain: PathBuf,
    robot_problem: PathBuf,
    human_domain: PathBuf,
    human_problem: PathBuf,
    /// Replace both goals with the complete state listed in this file.
    #[arg(long, value_name = "FILE")]
    full_state_goal: Option<PathBuf>,
    /// Keep actions with statically false preconditions.
    #[arg(long)]
    no_prune: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the lower and upper divergence bounds of a model pair.
    Bounds {
        #[command(flatten)]
        files: ModelFiles,
        #[arg(long, value_enum, default_value = "all")]
        restriction: RestrictionArg,
        /// Allow human and robot actions to interleave.
        #[arg(long)]
        flattened: bool,
        #[arg(long, default_value_t = 300)]
        time_limit: u64,
    },
    /// Find a minimal design meeting the divergence thresholds.
    Design {
        #[command(flatten)]
        files: ModelFiles,
        /// JSON file listing the design universe.
        #[arg(long, value_name = "FILE")]
        universe: PathBuf,
        /// Upper-bound threshold.
        #[arg(short = 'k', long = "upper-limit", default_value_t = 0)]
        upper_limit: u32,
        /// Lower-bound threshold.
        #[arg(short = 'l', long = "lower-limit", default_value_t = 0)]
        lower_limit: u32,
        #[arg(long, value_enum, default_value = "main")]
        method: MethodArg,
        #[arg(long, default_value_t = 300)]
        time_limit: u64,
    },
    /// Emit a compilation as PDDL files.
    Compile {
        #[command(flatten)]
        files: ModelFiles,
        #[arg(long, value_enum)]
        mode: CompileMode,
        /// Output directory for domain.pddl and problem.pddl.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long)]
        flattened: bool,
        /// Design universe (design mode only).
        #[arg(long, value_name = "FILE")]
        universe: Option<PathBuf>,
        /// Design step count (design mode only).
        #[arg(long, default_value_t = 1)]
        tau: u32,
        /// Disagreement budget (design mode only).
        #[arg(short = 'l', long = "lower-limit", default_value_t = 0)]
        lower_limit: u32,
    },
    /// Brute-force ground truth on tiny instances.
    Oracle {
        #[command(flatten)]
        files: ModelFiles,
        #[arg(long, value_enum, default_value = "all")]
        restriction: RestrictionArg,
        /// Also enumerate minimal designs over this universe.
        #[arg(long, value_name = "FILE")]
        universe: Option<PathBuf>,
        #[arg(short = 'k', long = "upper-limit", default_value_t = 0)]
        upper_limit: u32,
        #[arg(short = 'l', long = "lower-limit", default_value_t = 0)]
        lower_limit: u32,
        /// Explored-state cap.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Run the benchmark harness from a JSON config.
    Bench {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS // --help / --version
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

/// Loads and grounds the model pair. `achievable` lists atoms a design
/// universe may add to the initial states, so static pruning cannot
/// remove actions those designs would unlock.
fn load_pair(
    files: &ModelFiles,
    achievable: &[GroundAtom],
) -> Result<(GroundedModel, GroundedModel)> {
    let read = |path: &Path| -> Result<String> {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    };
    let options = GroundOptions {
        prune_statically_false: !files.no_prune,
    };
    let robot_domain = parse_domain(&read(&files.robot_domain)?)
        .map_err(|e| anyhow!("{}: {e}", files.robot_domain.display()))?;
    let mut robot_problem = parse_problem(&read(&files.robot_problem)?)
        .map_err(|e| anyhow!("{}: {e}", files.robot_problem.display()))?;
    let mut human_problem = parse_problem(&read(&files.human_problem)?)
        .map_err(|e| anyhow!("{}: {e}", files.human_problem.display()))?;
    if let Some(goal_path) = &files.full_state_goal {
        let atoms = parse_atom_list(&read(goal_path)?)
            .map_err(|e| anyhow!("{}: {e}", goal_path.display()))?;
        robot_problem.goal = atoms.clone();
        human_problem.goal = atoms;
    }

    if files.robot_domain == files.human_domain {
        let (mr, mh) = ground_pair_with_achievable(
            &robot_domain,
            &robot_problem,
            &human_problem,
            &options,
            achievable,
        )?;
        return Ok((mr, mh));
    }
    let human_domain = parse_domain(&read(&files.human_domain)?)
        .map_err(|e| anyhow!("{}: {e}", files.human_domain.display()))?;
    let mr = ground_with_achievable(&robot_domain, &robot_problem, &options, achievable)?;
    let mh = ground_with_achievable(&human_domain, &human_problem, &options, achievable)?;
    if mr.fluents != mh.fluents {
        return Err(anyhow!(
            "robot and human models ground to different fluent tables; \
             the domains must declare the same predicates and the problems the same objects"
        ));
    }
    Ok((mr, mh))
}

fn read_universe(path: &Path) -> Result<UniverseFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn render_plan(model: &GroundedModel, plan: &Plan) -> String {
    if plan.is_empty() {
        return "<empty>".to_string();
    }
    plan.actions
        .iter()
        .map(|a| model.action(*a).name.clone())
        .collect::<Vec<_>>()
        .join("; ")
}

fn render_fluents(model: &GroundedModel, set: &State) -> String {
    if set.is_empty() {
        return "<none>".to_string();
    }
    set.iter()
        .map(|f| model.fluent_name(f).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_report(tag: &str, mr: &GroundedModel, mh: &GroundedModel, report: &BoundsReport) {
    println!(
        "[{tag}] human plan (cost {}): {}",
        report.human_plan.cost,
        render_plan(mh, &report.human_plan)
    );
    println!(
        "[{tag}] robot plan (cost {}): {}",
        report.robot_plan.cost,
        render_plan(mr, &report.robot_plan)
    );
    println!("[{tag}] disagree: {}", render_fluents(mr, &report.disagree));
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Bounds {
            files,
            restriction,
            flattened,
            time_limit,
        } => {
            let (mr, mh) = load_pair(&files, &[])?;
            let ordering = if flattened {
                PhaseOrdering::Flattened
            } else {
                PhaseOrdering::Ordered
            };
            let budget = SolveBudget::default().with_wall(Duration::from_secs(time_limit));
            let result = goal_align::design_search::compute_bounds_pair(
                &mr,
                &mh,
                restriction.into(),
                ordering,
                &budget,
            );
            match result {
                Ok((lower, upper)) => {
                    println!("GD_down={} GD_up={}", lower.bound, upper.bound);
                    print_report("down", &mr, &mh, &lower);
                    print_report("up", &mr, &mh, &upper);
                    Ok(EXIT_OK)
                }
                Err(BoundError::NoValidPlanPair) => {
                    println!("no valid human/robot plan pair");
                    Ok(EXIT_UNSOLVABLE)
                }
                Err(BoundError::ResourceExhausted) => {
                    println!("planner budget exhausted");
                    Ok(EXIT_EXHAUSTED)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Design {
            files,
            universe,
            upper_limit,
            lower_limit,
            method,
            time_limit,
        } => {
            let spec = read_universe(&universe)?;
            let (mr, mh) = load_pair(&files, &universe_add_atoms(&spec.atoms))?;
            let (atoms, costs) = resolve_universe(&spec, &mr)?;
            let dp = DesignProblem {
                robot: mr.clone(),
                human: mh,
                universe: atoms,
                costs,
                lower_limit,
                upper_limit,
            };
            for warning in dp.validate()? {
                eprintln!("warning: {warning}");
            }
            let variant = match method {
                MethodArg::Main => SearchVariant::Main,
                MethodArg::MainFl => SearchVariant::MainFlattened,
                MethodArg::Naive => SearchVariant::Naive,
            };
            let cfg =
                DesignSearchConfig::new(variant).with_wall(Duration::from_secs(time_limit));
            let result = find_minimal_design(&dp, &cfg)?;
            match result.conclusion {
                SearchConclusion::Found(design) => {
                    if design.atoms.is_empty() {
                        println!("design: empty (size 0)");
                    } else {
                        println!("design: {} (size {})", design.render(&mr), design.size());
                    }
                    Ok(EXIT_OK)
                }
                SearchConclusion::NoneExists => {
                    println!("no design within thresholds (universe exhausted)");
                    Ok(EXIT_UNSOLVABLE)
                }
                SearchConclusion::Unknown => {
                    println!("planner budget exhausted; result unknown");
                    Ok(EXIT_EXHAUSTED)
                }
            }
        }
        Command::Compile {
            files,
            mode,
            out,
            flattened,
            universe,
            tau,
            lower_limit,
        } => {
            let spec = match (&mode, &universe) {
                (CompileMode::Design, Some(path)) => Some(read_universe(path)?),
                (CompileMode::Design, None) => {
                    return Err(anyhow!("--universe is required with --mode design"))
                }
                _ => None,
            };
            let achievable = spec
                .as_ref()
                .map(|s| universe_add_atoms(&s.atoms))
                .unwrap_or_default();
            let (mr, mh) = load_pair(&files, &achievable)?;
            let ordering = if flattened {
                PhaseOrdering::Flattened
            } else {
                PhaseOrdering::Ordered
            };
            let compiled = match mode {
                CompileMode::Design => {
                    let (atoms, costs) = resolve_universe(&spec.expect("checked above"), &mr)?;
                    let dp = DesignProblem {
                        robot: mr,
                        human: mh,
                        universe: atoms,
                        costs,
                        lower_limit,
                        upper_limit: 0,
                    };
                    build_design_model(&dp, tau, &[], lower_limit, ordering)?
                }
                plain => {
                    let bound_mode = match plain {
                        CompileMode::Upper => BoundMode::Upper,
                        CompileMode::Lower => BoundMode::Lower,
                        CompileMode::UpperOptimal => BoundMode::UpperOptimal,
                        CompileMode::LowerOptimal => BoundMode::LowerOptimal,
                        CompileMode::Design => unreachable!(),
                    };
                    // Exported costs are always scalar integers.
                    let scheme = CostScheme::new(bound_mode).with_repr(CostRepr::BigInteger);
                    build_joint_model(&mr, &mh, scheme, ordering)?
                }
            };
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            let (domain_text, problem_text) = emit_pddl(&compiled.model);
            let domain_path = out.join("domain.pddl");
            let problem_path = out.join("problem.pddl");
            std::fs::write(&domain_path, domain_text)?;
            std::fs::write(&problem_path, problem_text)?;
            println!("wrote {}", domain_path.display());
            println!("wrote {}", problem_path.display());
            Ok(EXIT_OK)
        }
        Command::Oracle {
            files,
            restriction,
            universe,
            upper_limit,
            lower_limit,
            cap,
        } => {
            let spec = universe.as_ref().map(|p| read_universe(p)).transpose()?;
            let achievable = spec
                .as_ref()
                .map(|s| universe_add_atoms(&s.atoms))
                .unwrap_or_default();
            let (mr, mh) = load_pair(&files, &achievable)?;
            match goal_align::oracle::oracle_bounds(&mr, &mh, restriction.into(), cap) {
                Ok((lower, upper)) => {
                    println!("GD_down={lower} GD_up={upper}");
                }
                Err(goal_align::oracle::OracleError::NoValidPlan { model }) => {
                    // Designs may still repair the pair, so a universe
                    // run continues past undefined bounds.
                    println!("no valid plan in model `{model}`");
                    if spec.is_none() {
                        return Ok(EXIT_UNSOLVABLE);
                    }
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(spec) = spec {
                let (atoms, costs) = resolve_universe(&spec, &mr)?;
                let dp = DesignProblem {
                    robot: mr.clone(),
                    human: mh,
                    universe: atoms,
                    costs,
                    lower_limit,
                    upper_limit,
                };
                let winners = goal_align::oracle::oracle_design(&dp, cap)?;
                if winners.is_empty() {
                    println!("no design within thresholds");
                    return Ok(EXIT_UNSOLVABLE);
                }
                for design in winners {
                    if design.atoms.is_empty() {
                        println!("design: empty (size 0)");
                    } else {
                        println!("design: {} (size {})", design.render(&mr), design.size());
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Bench { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = BenchConfig::from_json(&text)?;
            let rows = goal_align::bench::run_bench(&cfg)?;
            println!("wrote {} ({} rows)", cfg.output.display(), rows.len());
            Ok(EXIT_OK)
        }
    }
}
