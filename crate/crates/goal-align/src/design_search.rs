//! Minimal-design search: the compilation-driven main algorithm, its
//! flattened variant, and a baseline that walks the design lattice.
//!
//! The main algorithm grows a design budget τ. At each level it
//! repeatedly solves the design compilation (which yields only designs
//! whose lower bound is within ℓ), checks the candidate's upper bound
//! against k, and excludes rejected candidates until the level is
//! exhausted. The first candidate passing both checks is a
//! minimum-cardinality solution because smaller levels were exhausted
//! first. The naive baseline instead enumerates subsets of the universe
//! in nondecreasing cost order and tests each with the plain bound
//! compilations.

use crate::compile::{
    build_forced_disagreement, build_joint_model, compute_bound, limit_disagreements, BoundError,
    CostScheme, PhaseOrdering,
};
use crate::design::{
    apply_design, build_design_model, extract_design, Design, DesignAtom, DesignError,
    DesignProblem,
};
use crate::model::{GroundedModel, PlanRestriction};
use crate::rng::SplitMix64;
use crate::search::{prove_unsolvable, SearchStats, SolveBudget, Unsolvability};
use std::collections::BinaryHeap;
use std::time::Duration;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchVariant {
    /// Design compilation with ordered phases.
    Main,
    /// Design compilation with interleaved (flattened) phases.
    MainFlattened,
    /// Subset enumeration over the design lattice.
    Naive,
}

impl SearchVariant {
    fn ordering(self) -> PhaseOrdering {
        match self {
            SearchVariant::MainFlattened => PhaseOrdering::Flattened,
            _ => PhaseOrdering::Ordered,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DesignSearchConfig {
    pub variant: SearchVariant,
    /// Per-planner-call budget.
    pub budget: SolveBudget,
    /// Only affects the naive variant: shuffles candidate order within
    /// one cost level. Both searches are otherwise deterministic.
    pub seed: u64,
}

impl Default for DesignSearchConfig {
    fn default() -> Self {
        DesignSearchConfig {
            variant: SearchVariant::Main,
            budget: SolveBudget::default(),
            seed: 0,
        }
    }
}

impl DesignSearchConfig {
    pub fn new(variant: SearchVariant) -> Self {
        DesignSearchConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn with_wall(mut self, wall: Duration) -> Self {
        self.budget = self.budget.with_wall(wall);
        self
    }
}

/// One inner-loop event, for the per-iteration log.
#[derive(Clone, Debug)]
pub struct SearchLogEntry {
    pub tau: u32,
    pub candidate: Option<Design>,
    pub note: String,
    pub wall: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchConclusion {
    /// A minimal design meeting both thresholds.
    Found(Design),
    /// No design over the universe meets the thresholds.
    NoneExists,
    /// A planner budget ran out; no claim is made.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct DesignSearchResult {
    pub conclusion: SearchConclusion,
    pub tau_reached: u32,
    pub log: Vec<SearchLogEntry>,
    /// Planner statistics summed over every call the search made.
    pub stats: SearchStats,
}

impl DesignSearchResult {
    pub fn design(&self) -> Option<&Design> {
        match &self.conclusion {
            SearchConclusion::Found(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum DesignSearchError {
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Did the planner prove the fact, refute it, or give up?
enum Checked {
    Yes,
    No,
    Unknown,
}

/// `lower bound ≤ limit`? Checked by solvability of the lower-bound
/// compilation with the disagreement checks removed (limit 0) or
/// budget-limited, which is exactly "some plan pair diverges on at most
/// `limit` fluents".
fn lower_bound_within(
    robot: &GroundedModel,
    human: &GroundedModel,
    limit: u32,
    ordering: PhaseOrdering,
    budget: &SolveBudget,
    stats: &mut SearchStats,
) -> Checked {
    let compiled = match build_joint_model(robot, human, CostScheme::lower(), ordering) {
        Ok(c) => c,
        Err(_) => return Checked::No,
    };
    let limited = limit_disagreements(&compiled, limit);
    let result = prove_unsolvable(&limited, budget);
    stats.absorb(&result.stats);
    match result.verdict {
        Unsolvability::Solvable(_) => Checked::Yes,
        Unsolvability::Unsolvable => Checked::No,
        Unsolvability::Unknown => Checked::Unknown,
    }
}

/// `upper bound ≤ limit`? For limit 0 this is unsolvability of the
/// upper-bound compilation forced to use at least one disagreement;
/// otherwise an optimal bound computation.
fn upper_bound_within(
    robot: &GroundedModel,
    human: &GroundedModel,
    limit: u32,
    ordering: PhaseOrdering,
    budget: &SolveBudget,
    stats: &mut SearchStats,
) -> Checked {
    let compiled = match build_joint_model(robot, human, CostScheme::upper(), ordering) {
        Ok(c) => c,
        Err(_) => return Checked::No,
    };
    if limit == 0 {
        let forced = build_forced_disagreement(&compiled);
        let result = prove_unsolvable(&forced, budget);
        stats.absorb(&result.stats);
        match result.verdict {
            Unsolvability::Unsolvable => Checked::Yes,
            Unsolvability::Solvable(_) => Checked::No,
            Unsolvability::Unknown => Checked::Unknown,
        }
    } else {
        match compute_bound(&compiled, budget) {
            Ok(report) => {
                stats.absorb(&report.stats);
                if report.bound <= limit {
                    Checked::Yes
                } else {
                    Checked::No
                }
            }
            Err(BoundError::NoValidPlanPair) => Checked::No,
            Err(_) => Checked::Unknown,
        }
    }
}

/// Solves one design compilation: a greedy dive first (design models
/// are usually solvable, and any witness plan will do), falling back to
/// the exhaustive engine for the unsolvability proof that closes a
/// level.
fn solve_design_model(
    compiled: &crate::compile::CompiledModel,
    budget: &SolveBudget,
    stats: &mut SearchStats,
) -> Unsolvability {
    let greedy = crate::search::solve_satisficing(compiled, budget);
    stats.absorb(&greedy.stats);
    if let crate::search::SearchOutcome::Plan { plan, .. } = greedy.outcome {
        return Unsolvability::Solvable(plan);
    }
    let proof = prove_unsolvable(compiled, budget);
    stats.absorb(&proof.stats);
    proof.verdict
}

/// Both thresholds, lower first (which also establishes that both
/// models have plans at all).
fn design_meets_thresholds(
    dp: &DesignProblem,
    design: &Design,
    ordering: PhaseOrdering,
    budget: &SolveBudget,
    stats: &mut SearchStats,
) -> Checked {
    let robot = apply_design(&dp.robot, design);
    let human = apply_design(&dp.human, design);
    match lower_bound_within(&robot, &human, dp.lower_limit, ordering, budget, stats) {
        Checked::Yes => {}
        other => return other,
    }
    upper_bound_within(&robot, &human, dp.upper_limit, ordering, budget, stats)
}

/// The main algorithm: iteratively deepened design budget with the
/// design compilation proposing candidates and exclusion pruning
/// rejects. Returns a minimum-cardinality design under unit atom costs;
/// with non-unit costs it falls back to cost-ordered enumeration.
pub fn find_minimal_design(
    dp: &DesignProblem,
    cfg: &DesignSearchConfig,
) -> Result<DesignSearchResult, DesignSearchError> {
    dp.validate()?;
    if cfg.variant == SearchVariant::Naive || !dp.has_unit_costs() {
        return naive_design_search(dp, cfg);
    }
    let ordering = cfg.variant.ordering();
    let mut log: Vec<SearchLogEntry> = Vec::new();
    let mut stats = SearchStats::default();
    let started = std::time::Instant::now();
    let entry = |tau: u32, candidate: Option<Design>, note: &str| SearchLogEntry {
        tau,
        candidate,
        note: note.to_string(),
        wall: started.elapsed(),
    };

    // The empty design first: the iterated levels start at one atom.
    match design_meets_thresholds(dp, &Design::empty(), ordering, &cfg.budget, &mut stats) {
        Checked::Yes => {
            log.push(entry(0, Some(Design::empty()), "accepted"));
            return Ok(DesignSearchResult {
                conclusion: SearchConclusion::Found(Design::empty()),
                tau_reached: 0,
                log,
                stats,
            });
        }
        Checked::No => log.push(entry(0, Some(Design::empty()), "rejected")),
        Checked::Unknown => {
            log.push(entry(0, Some(Design::empty()), "planner gave up"));
            return Ok(DesignSearchResult {
                conclusion: SearchConclusion::Unknown,
                tau_reached: 0,
                log,
                stats,
            });
        }
    }

    let max_tau = dp.universe.len().min(dp.robot.num_fluents()) as u32;
    for tau in 1..=max_tau {
        let mut found: Vec<Design> = Vec::new();
        loop {
            let compiled = build_design_model(dp, tau, &found, dp.lower_limit, ordering)?;
            let solved = solve_design_model(&compiled, &cfg.budget, &mut stats);
            match solved {
                Unsolvability::Unsolvable => {
                    log.push(entry(tau, None, "level exhausted"));
                    break;
                }
                Unsolvability::Unknown => {
                    log.push(entry(tau, None, "planner gave up"));
                    return Ok(DesignSearchResult {
                        conclusion: SearchConclusion::Unknown,
                        tau_reached: tau,
                        log,
                        stats,
                    });
                }
                Unsolvability::Solvable(plan) => {
                    let candidate = extract_design(&compiled, &plan)?;
                    match design_meets_thresholds(dp, &candidate, ordering, &cfg.budget, &mut stats)
                    {
                        Checked::Yes => {
                            log.push(entry(tau, Some(candidate.clone()), "accepted"));
                            return Ok(DesignSearchResult {
                                conclusion: SearchConclusion::Found(candidate),
                                tau_reached: tau,
                                log,
                                stats,
                            });
                        }
                        Checked::No => {
                            log.push(entry(tau, Some(candidate.clone()), "rejected"));
                            found.push(candidate);
                        }
                        Checked::Unknown => {
                            log.push(entry(tau, Some(candidate), "planner gave up"));
                            return Ok(DesignSearchResult {
                                conclusion: SearchConclusion::Unknown,
                                tau_reached: tau,
                                log,
                                stats,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(DesignSearchResult {
        conclusion: SearchConclusion::NoneExists,
        tau_reached: max_tau,
        log,
        stats,
    })
}

/// The baseline: best-first enumeration of design subsets by (cost,
/// cardinality), testing each with the plain bound compilations. With
/// unit costs this is breadth-first over the design lattice.
pub fn naive_design_search(
    dp: &DesignProblem,
    cfg: &DesignSearchConfig,
) -> Result<DesignSearchResult, DesignSearchError> {
    dp.validate()?;
    let ordering = cfg.variant.ordering();
    let n = dp.universe.len();
    let started = std::time::Instant::now();
    let mut log: Vec<SearchLogEntry> = Vec::new();
    let mut stats = SearchStats::default();

    // Tie order within one cost level is the seeded permutation.
    let mut order: Vec<usize> = (0..n).collect();
    if cfg.seed != 0 {
        SplitMix64::new(cfg.seed).shuffle(&mut order);
    }

    // Lazy lattice enumeration: each subset generated once, popped in
    // nondecreasing (cost, size) order.
    type Node = (u64, u32, u64, Vec<usize>); // cost, size, seq, member positions
    let mut heap: BinaryHeap<std::cmp::Reverse<Node>> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(std::cmp::Reverse((0, 0, seq, Vec::new())));
    let mut tau_reached = 0u32;

    while let Some(std::cmp::Reverse((cost, size, _, members))) = heap.pop() {
        // Extend before testing, so enumeration continues past rejects.
        let last = members.last().copied();
        let from = last.map_or(0, |x| x + 1);
        for (pos, &slot) in order.iter().enumerate().skip(from) {
            let atom_cost = dp.costs[slot];
            let mut extended = members.clone();
            extended.push(pos);
            seq += 1;
            heap.push(std::cmp::Reverse((
                cost + atom_cost,
                size + 1,
                seq,
                extended,
            )));
        }

        let atoms: Vec<DesignAtom> = members.iter().map(|&p| dp.universe[order[p]]).collect();
        let design = match Design::new(atoms, cost) {
            Ok(d) => d,
            Err(_) => continue, // conflicting polarities never form a design
        };
        tau_reached = tau_reached.max(size);
        match design_meets_thresholds(dp, &design, ordering, &cfg.budget, &mut stats) {
            Checked::Yes => {
                log.push(SearchLogEntry {
                    tau: size,
                    candidate: Some(design.clone()),
                    note: "accepted".to_string(),
                    wall: started.elapsed(),
                });
                return Ok(DesignSearchResult {
                    conclusion: SearchConclusion::Found(design),
                    tau_reached: size,
                    log,
                    stats,
                });
            }
            Checked::No => {
                log.push(SearchLogEntry {
                    tau: size,
                    candidate: Some(design),
                    note: "rejected".to_string(),
                    wall: started.elapsed(),
                });
            }
            Checked::Unknown => {
                log.push(SearchLogEntry {
                    tau: size,
                    candidate: Some(design),
                    note: "planner gave up".to_string(),
                    wall: started.elapsed(),
                });
                return Ok(DesignSearchResult {
                    conclusion: SearchConclusion::Unknown,
                    tau_reached: size,
                    log,
                    stats,
                });
            }
        }
    }
    Ok(DesignSearchResult {
        conclusion: SearchConclusion::NoneExists,
        tau_reached,
        log,
        stats,
    })
}

/// Both divergence bounds of a model pair under the chosen plan-set
/// restriction, via two bound compilations.
pub fn compute_bounds_pair(
    robot: &GroundedModel,
    human: &GroundedModel,
    restriction: PlanRestriction,
    ordering: PhaseOrdering,
    budget: &SolveBudget,
) -> Result<(crate::compile::BoundsReport, crate::compile::BoundsReport), BoundError> {
    let (lo_scheme, hi_scheme) = match restriction {
        PlanRestriction::All => (CostScheme::lower(), CostScheme::upper()),
        PlanRestriction::Optimal => (CostScheme::lower_optimal(), CostScheme::upper_optimal()),
    };
    let lower = compute_bound(
        &build_joint_model(robot, human, lo_scheme, ordering)
            .map_err(|_| BoundError::NoValidPlanPair)?,
        budget,
    )?;
    let upper = compute_bound(
        &build_joint_model(robot, human, hi_scheme, ordering)
            .map_err(|_| BoundError::NoValidPlanPair)?,
        budget,
    )?;
    Ok((lower, upper))
}

/// An exact nonnegative rational, for componentwise aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Ratio {
        assert!(den != 0);
        let g = gcd(num.max(1), den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn whole(n: u64) -> Ratio {
        Ratio { num: n, den: 1 }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregation {
    Max,
    Min,
    Avg,
}

/// Componentwise aggregate of (lower, upper) bound values across
/// instances; the average is exact.
pub fn aggregate_bounds(values: &[(u32, u32)], mode: Aggregation) -> Option<(Ratio, Ratio)> {
    if values.is_empty() {
        return None;
    }
    let pick = |f: fn(u64, u64) -> u64, side: fn(&(u32, u32)) -> u32| {
        Ratio::whole(
            values
                .iter()
                .map(|v| side(v) as u64)
                .reduce(f)
                .expect("nonempty"),
        )
    };
    Some(match mode {
        Aggregation::Max => (pick(u64::max, |v| v.0), pick(u64::max, |v| v.1)),
        Aggregation::Min => (pick(u64::min, |v| v.0), pick(u64::min, |v| v.1)),
        Aggregation::Avg => {
            let n = values.len() as u64;
            let lo: u64 = values.iter().map(|v| v.0 as u64).sum();
            let hi: u64 = values.iter().map(|v| v.1 as u64).sum();
            (Ratio::new(lo, n), Ratio::new(hi, n))
        }
    })
}
