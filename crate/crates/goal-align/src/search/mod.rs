//! Embedded state-space search: cost-optimal A* over lexicographic
//! costs, greedy best-first satisficing search, and exhaustive
//! breadth-first reachability for unsolvability proofs.
//!
//! All engines share duplicate detection on full states, deterministic
//! tie-breaking (insertion order within equal priorities, successors
//! generated in action-index order) and a successor policy hook that
//! compiled models use to canonicalize the order of forced check
//! actions.

pub mod cost;
pub mod external;
pub mod heuristic;

pub use cost::CostVec;
pub use heuristic::{h_add, h_max, Combine, RelaxedTask};

use crate::model::{ActionId, GroundedModel, Plan};
use crate::state::{FluentId, State};
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

/// Resource limits for a single search run.
#[derive(Clone, Debug)]
pub struct SolveBudget {
    pub max_expanded: u64,
    pub max_states: usize,
    pub max_wall: Duration,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_expanded: 10_000_000,
            max_states: 10_000_000,
            max_wall: Duration::from_secs(300),
        }
    }
}

impl SolveBudget {
    pub fn with_wall(mut self, wall: Duration) -> Self {
        self.max_wall = wall;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub peak_open: u64,
    pub wall: Duration,
}

impl SearchStats {
    /// Folds another run's statistics into this one (for multi-call
    /// procedures reporting totals).
    pub fn absorb(&mut self, other: &SearchStats) {
        self.expanded += other.expanded;
        self.generated += other.generated;
        self.peak_open = self.peak_open.max(other.peak_open);
        self.wall += other.wall;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A plan, with its cost vector under the search's cost function.
    Plan { plan: Plan, cost: CostVec },
    /// The reachable state space was exhausted without a goal state.
    ProvenUnsolvable,
    /// A budget was hit (or the method abandoned the search); never a
    /// claim about solvability.
    ResourceExhausted,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

/// Verdict of [`prove_unsolvable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unsolvability {
    Unsolvable,
    Solvable(Plan),
    /// The state cap or a budget was hit before exhausting the space.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct UnsolvabilityResult {
    pub verdict: Unsolvability,
    pub stats: SearchStats,
}

/// Canonicalization data for the forced check phase of compiled models:
/// once every phase token is false, only the check actions of the
/// lowest-index unchecked fluent are expanded (checks on distinct
/// fluents commute, so this prunes permutations only).
#[derive(Clone, Debug, Default)]
pub struct CheckCanon {
    /// Phase tokens; the check phase is active when all are false.
    pub tokens: Vec<FluentId>,
    /// Compare fluent per base fluent, ascending base-fluent order.
    pub compare: Vec<FluentId>,
    /// Check actions per base fluent, canonical order (agreement first,
    /// then disagreement copies by budget slot).
    pub checks_per_fluent: Vec<Vec<ActionId>>,
    /// Marks check actions so the normal expansion can skip them.
    pub is_check: Vec<bool>,
}

#[derive(Clone, Debug, Default)]
pub enum SuccessorPolicy {
    #[default]
    ExpandAll,
    CanonicalChecks(CheckCanon),
}

/// Anything the engines can search: a plain grounded model or a
/// compiled model carrying its cost scheme and successor policy.
pub trait Searchable {
    fn base(&self) -> &GroundedModel;
    fn search_costs(&self) -> Vec<CostVec>;
    fn policy(&self) -> SuccessorPolicy;
    /// Number of meaningful cost components, for display.
    fn cost_components(&self) -> usize;
}

impl Searchable for GroundedModel {
    fn base(&self) -> &GroundedModel {
        self
    }
    fn search_costs(&self) -> Vec<CostVec> {
        self.actions.iter().map(|a| CostVec::scalar(a.cost)).collect()
    }
    fn policy(&self) -> SuccessorPolicy {
        SuccessorPolicy::ExpandAll
    }
    fn cost_components(&self) -> usize {
        1
    }
}

fn for_each_successor<F: FnMut(ActionId)>(
    model: &GroundedModel,
    state: &State,
    policy: &SuccessorPolicy,
    mut visit: F,
) {
    match policy {
        SuccessorPolicy::ExpandAll => {
            for i in 0..model.num_actions() {
                let a = ActionId(i as u32);
                if model.executable(state, a) {
                    visit(a);
                }
            }
        }
        SuccessorPolicy::CanonicalChecks(canon) => {
            let in_check_phase = canon.tokens.iter().all(|&t| !state.contains(t));
            if in_check_phase {
                // First unchecked fluent, first executable canonical check.
                for (i, &cmp) in canon.compare.iter().enumerate() {
                    if state.contains(cmp) {
                        continue;
                    }
                    for &a in &canon.checks_per_fluent[i] {
                        if model.executable(state, a) {
                            visit(a);
                            return;
                        }
                    }
                    return; // dead end: unchecked fluent with no applicable check
                }
            } else {
                for i in 0..model.num_actions() {
                    let a = ActionId(i as u32);
                    if !canon.is_check[a.index()] && model.executable(state, a) {
                        visit(a);
                    }
                }
            }
        }
    }
}

struct Budgeter<'a> {
    budget: &'a SolveBudget,
    start: Instant,
    ticks: u64,
}

impl<'a> Budgeter<'a> {
    fn new(budget: &'a SolveBudget) -> Self {
        Budgeter {
            budget,
            start: Instant::now(),
            ticks: 0,
        }
    }

    fn exceeded(&mut self, expanded: u64) -> bool {
        if expanded >= self.budget.max_expanded {
            return true;
        }
        self.ticks += 1;
        self.ticks.is_multiple_of(1024) && self.start.elapsed() >= self.budget.max_wall
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

/// Cost-optimal search: A* over lexicographic cost vectors, with an
/// admissible h_max estimate on the dominant component and zero on the
/// rest. Returns a cost-minimal plan, a proof of unsolvability (the
/// reachable space was exhausted), or resource exhaustion; the last
/// two are never confused.
pub fn solve_optimal<P: Searchable + ?Sized>(problem: &P, budget: &SolveBudget) -> SearchResult {
    let model = problem.base();
    let costs = problem.search_costs();
    let policy = problem.policy();
    let dominant: Vec<u64> = costs.iter().map(|c| c.dominant()).collect();
    let mut relaxed = RelaxedTask::new(model, &dominant);
    let mut budgeter = Budgeter::new(budget);
    let mut stats = SearchStats::default();

    const DEAD: u64 = u64::MAX;
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut best_g: Vec<CostVec> = Vec::new();
    let mut h_cache: Vec<u64> = Vec::new();
    let mut parent: Vec<(u32, u32)> = Vec::new();

    // Heap of Reverse((f, seq, state index, g-at-push)).
    let mut open: BinaryHeap<std::cmp::Reverse<(CostVec, u64, u32, CostVec)>> = BinaryHeap::new();
    let mut seq = 0u64;

    let h0 = match relaxed.eval(&model.init, Combine::Max) {
        Some(h) => h,
        None => {
            stats.wall = budgeter.elapsed();
            return SearchResult {
                outcome: SearchOutcome::ProvenUnsolvable,
                stats,
            };
        }
    };
    index.insert(model.init.clone(), 0);
    states.push(model.init.clone());
    best_g.push(CostVec::ZERO);
    h_cache.push(h0);
    parent.push((u32::MAX, u32::MAX));
    open.push(std::cmp::Reverse((
        CostVec::ZERO.with_dominant_estimate(h0),
        seq,
        0,
        CostVec::ZERO,
    )));

    while let Some(std::cmp::Reverse((_f, _s, idx, g))) = open.pop() {
        if g != best_g[idx as usize] {
            continue; // stale entry
        }
        let state = states[idx as usize].clone();
        if state.is_superset(&model.goal) {
            stats.wall = budgeter.elapsed();
            let plan = reconstruct(model, &parent, idx);
            return SearchResult {
                outcome: SearchOutcome::Plan { plan, cost: g },
                stats,
            };
        }
        stats.expanded += 1;
        if budgeter.exceeded(stats.expanded) || states.len() >= budget.max_states {
            stats.wall = budgeter.elapsed();
            return SearchResult {
                outcome: SearchOutcome::ResourceExhausted,
                stats,
            };
        }
        for_each_successor(model, &state, &policy, |a| {
            let next = model.apply(&state, a).expect("executable successor");
            let ng = g.saturating_add(&costs[a.index()]);
            stats.generated += 1;
            match index.get(&next) {
                Some(&ni) => {
                    let ni_us = ni as usize;
                    if h_cache[ni_us] != DEAD && ng < best_g[ni_us] {
                        best_g[ni_us] = ng;
                        parent[ni_us] = (idx, a.0);
                        seq += 1;
                        open.push(std::cmp::Reverse((
                            ng.with_dominant_estimate(h_cache[ni_us]),
                            seq,
                            ni,
                            ng,
                        )));
                    }
                }
                None => {
                    let h = relaxed.eval(&next, Combine::Max);
                    let ni = states.len() as u32;
                    index.insert(next.clone(), ni);
                    states.push(next);
                    best_g.push(ng);
                    parent.push((idx, a.0));
                    match h {
                        Some(h) => {
                            h_cache.push(h);
                            seq += 1;
                            open.push(std::cmp::Reverse((
                                ng.with_dominant_estimate(h),
                                seq,
                                ni,
                                ng,
                            )));
                        }
                        None => h_cache.push(DEAD), // dead end, never opened
                    }
                }
            }
        });
        stats.peak_open = stats.peak_open.max(open.len() as u64);
    }

    stats.wall = budgeter.elapsed();
    SearchResult {
        outcome: SearchOutcome::ProvenUnsolvable,
        stats,
    }
}

/// Satisficing search: greedy best-first on h_add with unit guidance
/// costs. Returns some valid plan or resource exhaustion; by contract it
/// never claims unsolvability.
pub fn solve_satisficing<P: Searchable + ?Sized>(
    problem: &P,
    budget: &SolveBudget,
) -> SearchResult {
    let model = problem.base();
    let policy = problem.policy();
    let unit: Vec<u64> = vec![1; model.num_actions()];
    let mut relaxed = RelaxedTask::new(model, &unit);
    let mut budgeter = Budgeter::new(budget);
    let mut stats = SearchStats::default();

    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut parent: Vec<(u32, u32)> = Vec::new();
    let mut open: BinaryHeap<std::cmp::Reverse<(u64, u64, u32)>> = BinaryHeap::new();
    let mut seq = 0u64;

    let h0 = match relaxed.eval(&model.init, Combine::Add) {
        Some(h) => h,
        None => {
            stats.wall = budgeter.elapsed();
            return SearchResult {
                outcome: SearchOutcome::ResourceExhausted,
                stats,
            };
        }
    };
    index.insert(model.init.clone(), 0);
    states.push(model.init.clone());
    parent.push((u32::MAX, u32::MAX));
    open.push(std::cmp::Reverse((h0, seq, 0)));

    while let Some(std::cmp::Reverse((_h, _s, idx))) = open.pop() {
        let state = states[idx as usize].clone();
        if state.is_superset(&model.goal) {
            stats.wall = budgeter.elapsed();
            let plan = reconstruct(model, &parent, idx);
            return SearchResult {
                outcome: SearchOutcome::Plan {
                    plan: plan.clone(),
                    cost: CostVec::scalar(model.plan_cost(&plan)),
                },
                stats,
            };
        }
        stats.expanded += 1;
        if budgeter.exceeded(stats.expanded) || states.len() >= budget.max_states {
            stats.wall = budgeter.elapsed();
            return SearchResult {
                outcome: SearchOutcome::ResourceExhausted,
                stats,
            };
        }
        for_each_successor(model, &state, &policy, |a| {
            let next = model.apply(&state, a).expect("executable successor");
            stats.generated += 1;
            if index.contains_key(&next) {
                return;
            }
            if let Some(h) = relaxed.eval(&next, Combine::Add) {
                let ni = states.len() as u32;
                index.insert(next.clone(), ni);
                states.push(next);
                parent.push((idx, a.0));
                seq += 1;
                open.push(std::cmp::Reverse((h, seq, ni)));
            }
        });
        stats.peak_open = stats.peak_open.max(open.len() as u64);
    }

    stats.wall = budgeter.elapsed();
    SearchResult {
        outcome: SearchOutcome::ResourceExhausted,
        stats,
    }
}

/// Exhaustive breadth-first reachability with duplicate detection.
/// `Unsolvable` iff no reachable state satisfies the goal within the
/// state cap; `Unknown` when a cap or budget was hit first.
pub fn prove_unsolvable<P: Searchable + ?Sized>(
    problem: &P,
    budget: &SolveBudget,
) -> UnsolvabilityResult {
    let model = problem.base();
    let policy = problem.policy();
    let mut budgeter = Budgeter::new(budget);
    let mut stats = SearchStats::default();

    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut parent: Vec<(u32, u32)> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();

    if model.init.is_superset(&model.goal) {
        stats.wall = budgeter.elapsed();
        return UnsolvabilityResult {
            verdict: Unsolvability::Solvable(Plan::empty()),
            stats,
        };
    }
    index.insert(model.init.clone(), 0);
    states.push(model.init.clone());
    parent.push((u32::MAX, u32::MAX));
    queue.push_back(0);

    while let Some(idx) = queue.pop_front() {
        let state = states[idx as usize].clone();
        stats.expanded += 1;
        if budgeter.exceeded(stats.expanded) {
            stats.wall = budgeter.elapsed();
            return UnsolvabilityResult {
                verdict: Unsolvability::Unknown,
                stats,
            };
        }
        let mut found: Option<u32> = None;
        for_each_successor(model, &state, &policy, |a| {
            if found.is_some() {
                return;
            }
            let next = model.apply(&state, a).expect("executable successor");
            stats.generated += 1;
            if index.contains_key(&next) {
                return;
            }
            let ni = states.len() as u32;
            index.insert(next.clone(), ni);
            let is_goal = next.is_superset(&model.goal);
            states.push(next);
            parent.push((idx, a.0));
            if is_goal {
                found = Some(ni);
            } else {
                queue.push_back(ni);
            }
        });
        if let Some(goal_idx) = found {
            stats.wall = budgeter.elapsed();
            return UnsolvabilityResult {
                verdict: Unsolvability::Solvable(reconstruct(model, &parent, goal_idx)),
                stats,
            };
        }
        if states.len() >= budget.max_states {
            stats.wall = budgeter.elapsed();
            return UnsolvabilityResult {
                verdict: Unsolvability::Unknown,
                stats,
            };
        }
        stats.peak_open = stats.peak_open.max(queue.len() as u64);
    }

    stats.wall = budgeter.elapsed();
    UnsolvabilityResult {
        verdict: Unsolvability::Unsolvable,
        stats,
    }
}

fn reconstruct(model: &GroundedModel, parent: &[(u32, u32)], mut idx: u32) -> Plan {
    let mut actions = Vec::new();
    while parent[idx as usize].0 != u32::MAX {
        let (p, a) = parent[idx as usize];
        actions.push(ActionId(a));
        idx = p;
    }
    actions.reverse();
    Plan::new(model, actions)
}
