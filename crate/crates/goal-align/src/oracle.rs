//! Brute-force ground truth for tiny instances.
//!
//! Everything here enumerates the reachable state space exhaustively and
//! is deliberately independent of the compilation and search modules:
//! the divergence bounds come straight from their definitions (extremes
//! of the symmetric difference over pairs of reachable goal states), and
//! design verification enumerates the subset lattice. The rest of the
//! crate is tested against these results.
//!
//! The final state of any valid plan is a reachable goal state, and
//! conversely every reachable goal state is the final state of some
//! (acyclic) plan, so quantifying over "all plans" reduces to
//! quantifying over reachable goal states. For the optimal restriction,
//! a state is the final state of some cost-optimal plan exactly when it
//! contains the goal and its cheapest reach cost equals the cheapest
//! goal cost.

use crate::design::{apply_design, Design, DesignAtom, DesignProblem, Polarity};
use crate::model::{ActionId, GroundedModel, ModelBuilder, Plan, PlanRestriction};
use crate::rng::SplitMix64;
use crate::state::{FluentId, State};
use std::collections::{BinaryHeap, HashMap};
use thiserror::Error;

/// Default cap on explored states; the oracle refuses larger instances.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state cap of {cap} states exceeded; the oracle only certifies small instances")]
    CapExceeded { cap: usize },
    #[error("model `{model}` has no valid plan")]
    NoValidPlan { model: String },
    #[error("models do not share a fluent table")]
    FluentSetMismatch,
}

/// Exhaustive reachability of one model: cheapest reach cost per state,
/// goal states, and the cheapest goal cost.
#[derive(Clone, Debug)]
pub struct ReachabilityIndex {
    pub dist: HashMap<State, u64>,
    /// Reachable states containing the goal, sorted for determinism.
    pub goal_states: Vec<State>,
    pub min_goal_cost: Option<u64>,
}

impl ReachabilityIndex {
    /// Uniform-cost exploration with duplicate detection, complete up to
    /// `cap` states.
    pub fn build(model: &GroundedModel, cap: usize) -> Result<ReachabilityIndex, OracleError> {
        let mut dist: HashMap<State, u64> = HashMap::new();
        let mut heap: BinaryHeap<std::cmp::Reverse<(u64, u64)>> = BinaryHeap::new();
        let mut states: Vec<State> = Vec::new();

        dist.insert(model.init.clone(), 0);
        states.push(model.init.clone());
        heap.push(std::cmp::Reverse((0, 0)));

        while let Some(std::cmp::Reverse((g, idx))) = heap.pop() {
            let state = states[idx as usize].clone();
            if dist.get(&state) != Some(&g) {
                continue; // stale entry
            }
            for (ai, act) in model.actions.iter().enumerate() {
                if !act.executable(&state) {
                    continue;
                }
                let next = model
                    .apply(&state, ActionId(ai as u32))
                    .expect("executable action applies");
                let ng = g + act.cost;
                let better = match dist.get(&next) {
                    None => true,
                    Some(&old) => ng < old,
                };
                if better {
                    if !dist.contains_key(&next) {
                        if dist.len() >= cap {
                            return Err(OracleError::CapExceeded { cap });
                        }
                        states.push(next.clone());
                        dist.insert(next.clone(), ng);
                        heap.push(std::cmp::Reverse((ng, states.len() as u64 - 1)));
                    } else {
                        dist.insert(next.clone(), ng);
                        let pos = states.iter().position(|s| *s == next).unwrap();
                        heap.push(std::cmp::Reverse((ng, pos as u64)));
                    }
                }
            }
        }

        let mut goal_states: Vec<State> = dist
            .keys()
            .filter(|s| s.is_superset(&model.goal))
            .cloned()
            .collect();
        goal_states.sort();
        let min_goal_cost = goal_states.iter().map(|s| dist[s]).min();
        Ok(ReachabilityIndex {
            dist,
            goal_states,
            min_goal_cost,
        })
    }
}

/// All final states of valid plans under the given restriction, sorted.
pub fn goal_end_states(
    model: &GroundedModel,
    restriction: PlanRestriction,
    cap: usize,
) -> Result<Vec<State>, OracleError> {
    let index = ReachabilityIndex::build(model, cap)?;
    Ok(match restriction {
        PlanRestriction::All => index.goal_states,
        PlanRestriction::Optimal => {
            let best = match index.min_goal_cost {
                Some(c) => c,
                None => return Ok(Vec::new()),
            };
            index
                .goal_states
                .into_iter()
                .filter(|s| index.dist[s] == best)
                .collect()
        }
    })
}

/// Exact divergence bounds `(lower, upper)`: the extremes of
/// `|s_h Δ s_r|` over pairs of final states of the two models' plans.
pub fn oracle_bounds(
    robot: &GroundedModel,
    human: &GroundedModel,
    restriction: PlanRestriction,
    cap: usize,
) -> Result<(u32, u32), OracleError> {
    if robot.num_fluents() != human.num_fluents() {
        return Err(OracleError::FluentSetMismatch);
    }
    let ends_r = goal_end_states(robot, restriction, cap)?;
    let ends_h = goal_end_states(human, restriction, cap)?;
    if ends_r.is_empty() {
        return Err(OracleError::NoValidPlan {
            model: robot.name.clone(),
        });
    }
    if ends_h.is_empty() {
        return Err(OracleError::NoValidPlan {
            model: human.name.clone(),
        });
    }
    let mut lo = u32::MAX;
    let mut hi = 0u32;
    for sh in &ends_h {
        for sr in &ends_r {
            let d = sh.symmetric_difference_len(sr) as u32;
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    Ok((lo, hi))
}

/// All minimum-cost design subsets whose designed models satisfy the
/// problem's thresholds, by exhaustive lattice enumeration. Empty when
/// no subset qualifies. Subsets where either designed model has no plan
/// do not qualify.
pub fn oracle_design(dp: &DesignProblem, cap: usize) -> Result<Vec<Design>, OracleError> {
    let n = dp.universe.len();
    assert!(n <= 20, "oracle design enumeration is exponential in |U|");
    let mut by_cost: Vec<(u64, u32, u64)> = (0u64..1 << n)
        .map(|mask| {
            let cost: u64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| dp.costs[i])
                .sum();
            (cost, mask.count_ones(), mask)
        })
        .collect();
    by_cost.sort();

    let mut winners: Vec<Design> = Vec::new();
    let mut winning_cost: Option<u64> = None;
    for (cost, _, mask) in by_cost {
        if let Some(w) = winning_cost {
            if cost > w {
                break;
            }
        }
        let atoms: Vec<DesignAtom> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| dp.universe[i])
            .collect();
        let design = match Design::new(atoms, cost) {
            Ok(d) => d,
            Err(_) => continue, // add+remove of one fluent is no design
        };
        let mr = apply_design(&dp.robot, &design);
        let mh = apply_design(&dp.human, &design);
        match oracle_bounds(&mr, &mh, PlanRestriction::All, cap) {
            Ok((lo, hi)) if lo <= dp.lower_limit && hi <= dp.upper_limit => {
                winning_cost = Some(cost);
                winners.push(design);
            }
            Ok(_) | Err(OracleError::NoValidPlan { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(winners)
}

/// A uniformly seeded valid plan: a random executable walk followed by a
/// shortest completion to the goal. Returns `None` when the goal is
/// unreachable.
pub fn sample_valid_plan(
    model: &GroundedModel,
    rng: &mut SplitMix64,
    max_prefix: usize,
) -> Option<Plan> {
    let mut prefix: Vec<ActionId> = Vec::new();
    let mut cur = model.init.clone();
    let steps = rng.below(max_prefix as u64 + 1) as usize;
    for _ in 0..steps {
        let applicable: Vec<ActionId> = (0..model.num_actions())
            .map(|i| ActionId(i as u32))
            .filter(|&a| model.executable(&cur, a))
            .collect();
        if applicable.is_empty() {
            break;
        }
        let a = *rng.choose(&applicable);
        cur = model.apply(&cur, a).unwrap();
        prefix.push(a);
    }
    // Shrink the prefix until the goal is reachable from its end.
    loop {
        if let Some(suffix) = shortest_plan_from(model, &cur) {
            let mut actions = prefix.clone();
            actions.extend(suffix);
            return Some(Plan::new(model, actions));
        }
        prefix.pop()?;
        cur = model.init.clone();
        for &a in &prefix {
            cur = model.apply(&cur, a).unwrap();
        }
    }
}

/// Breadth-first shortest action sequence from `start` to any goal state.
fn shortest_plan_from(model: &GroundedModel, start: &State) -> Option<Vec<ActionId>> {
    let mut parent: HashMap<State, (State, ActionId)> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    if start.is_superset(&model.goal) {
        return Some(Vec::new());
    }
    parent.insert(start.clone(), (start.clone(), ActionId(0)));
    queue.push_back(start.clone());
    while let Some(state) = queue.pop_front() {
        for (ai, act) in model.actions.iter().enumerate() {
            if !act.executable(&state) {
                continue;
            }
            let next = model.apply(&state, ActionId(ai as u32)).unwrap();
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), (state.clone(), ActionId(ai as u32)));
            if next.is_superset(&model.goal) {
                let mut actions = Vec::new();
                let mut cur = next;
                while &cur != start {
                    let (prev, a) = parent[&cur].clone();
                    actions.push(a);
                    cur = prev;
                }
                actions.reverse();
                return Some(actions);
            }
            queue.push_back(next);
        }
    }
    None
}

/// A seeded random robot/human model pair for oracle-vs-implementation
/// equivalence runs. The robot model is either drawn from a pool of
/// hand-written micro pairs or generated as a random STRIPS instance
/// (|F| ≤ 6, |A| ≤ 8, costs 1..=2, goal picked from a reachable state);
/// the human model deletes up to 3 init fluents and up to 1 action.
/// Both models are guaranteed solvable.
pub fn random_model_pair(seed: u64) -> (GroundedModel, GroundedModel) {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    loop {
        let pair = if rng.chance(1, 4) {
            pool_pair(&mut rng)
        } else {
            let robot = random_robot(&mut rng);
            perturb(&robot, &mut rng)
        };
        let (ref robot, ref human) = pair;
        let solvable = |m: &GroundedModel| {
            ReachabilityIndex::build(m, DEFAULT_STATE_CAP)
                .map(|ix| ix.min_goal_cost.is_some())
                .unwrap_or(false)
        };
        if solvable(robot) && solvable(human) {
            return pair;
        }
    }
}

fn pool_pair(rng: &mut SplitMix64) -> (GroundedModel, GroundedModel) {
    use crate::fixtures;
    match rng.below(4) {
        0 => fixtures::extra_effect_pair(),
        1 => fixtures::gated_action_pair(),
        2 => fixtures::identical_chain_pair(),
        _ => fixtures::unavoidable_mismatch_pair(),
    }
}

fn random_robot(rng: &mut SplitMix64) -> GroundedModel {
    let n = rng.range(2, 6) as usize;
    let m = rng.range(2, 8) as usize;
    let mut b = ModelBuilder::new("random-robot");
    let fluents: Vec<FluentId> = (0..n)
        .map(|i| b.fluent(&format!("v{i}")))
        .collect();
    let subset = |rng: &mut SplitMix64, max: usize, exclude: &State| {
        let mut s = State::empty();
        let count = rng.below(max as u64 + 1) as usize;
        for _ in 0..count {
            let f = fluents[rng.below(n as u64) as usize];
            if !exclude.contains(f) {
                s.insert(f);
            }
        }
        s
    };
    for i in 0..m {
        let pre_pos = subset(rng, 2, &State::empty());
        let pre_neg = subset(rng, 1, &pre_pos);
        let add = subset(rng, 2, &State::empty());
        let mut del = subset(rng, 1, &add);
        del.subtract(&add);
        let cost = rng.range(1, 2);
        let mut draft = b.action(&format!("act{i}")).cost(cost);
        draft = draft.pre(pre_pos.iter()).pre_not(pre_neg.iter());
        draft = draft.add(add.iter()).del(del.iter());
        draft.done();
    }
    let init = subset(rng, 3, &State::empty());
    b.init(init.iter());
    b.goal([]);
    let mut model = b.build().expect("random model is structurally valid");
    // Pick the goal from a reachable state so the robot model is solvable.
    let index = ReachabilityIndex::build(&model, 100_000).expect("tiny model");
    let mut reachable: Vec<&State> = index.dist.keys().collect();
    reachable.sort();
    let target = reachable[rng.below(reachable.len() as u64) as usize];
    let keep = rng.below(3) + 1;
    let goal: State = target.iter().take(keep as usize).collect();
    model.goal = goal;
    model
}

/// Deletes up to 3 init fluents and up to 1 action, keeping the fluent
/// table and the goal.
fn perturb(robot: &GroundedModel, rng: &mut SplitMix64) -> (GroundedModel, GroundedModel) {
    let mut human = robot.clone();
    human.name = format!("{}-human", robot.name);
    let init: Vec<FluentId> = human.init.iter().collect();
    if !init.is_empty() {
        let drop = rng.below(4).min(init.len() as u64) as usize;
        for &f in rng.distinct_indices(init.len(), drop).iter().map(|&i| &init[i]) {
            human.init.remove(f);
        }
    }
    if human.actions.len() > 1 && rng.chance(1, 2) {
        let victim = rng.below(human.actions.len() as u64) as usize;
        human.actions.remove(victim);
    }
    (robot.clone(), human)
}

/// Makes a [`DesignProblem`] whose universe restores fluents deleted
/// from the human init plus a few decoy atoms. Used by seeded design
/// equivalence runs.
pub fn random_design_problem(seed: u64) -> DesignProblem {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x51_7c_c1_b7).wrapping_add(3));
    loop {
        let (robot, human) = random_model_pair(rng.next_u64());
        let mut universe: Vec<DesignAtom> = Vec::new();
        // Restoring atoms: robot-init fluents the human is missing.
        for f in robot.init.iter() {
            if !human.init.contains(f) {
                universe.push(DesignAtom {
                    fluent: f,
                    polarity: Polarity::Add,
                });
            }
        }
        // Decoys: removals of shared init fluents and additions of
        // absent fluents.
        let n = robot.num_fluents();
        for i in 0..n {
            if universe.len() >= 6 {
                break;
            }
            let f = FluentId(i as u32);
            let atom = if robot.init.contains(f) && human.init.contains(f) {
                DesignAtom {
                    fluent: f,
                    polarity: Polarity::Remove,
                }
            } else if !robot.init.contains(f) && !human.init.contains(f) {
                DesignAtom {
                    fluent: f,
                    polarity: Polarity::Add,
                }
            } else {
                continue;
            };
            if !universe.contains(&atom) && rng.chance(1, 2) {
                universe.push(atom);
            }
        }
        if universe.is_empty() || universe.len() > 6 {
            continue;
        }
        universe.sort();
        let costs = vec![1u64; universe.len()];
        return DesignProblem {
            robot,
            human,
            universe,
            costs,
            lower_limit: 0,
            upper_limit: 0,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{extra_effect_pair, identical_chain_pair, missing_init_pair};

    #[test]
    fn end_states_of_extra_effect_robot() {
        let (mr, _) = extra_effect_pair();
        let goal = mr.fluent_id("goal").unwrap();
        let extra = mr.fluent_id("extra").unwrap();
        let all = goal_end_states(&mr, PlanRestriction::All, 1000).unwrap();
        assert_eq!(
            all,
            vec![
                State::from_fluents([goal]),
                State::from_fluents([goal, extra])
            ]
        );
        let opt = goal_end_states(&mr, PlanRestriction::Optimal, 1000).unwrap();
        assert_eq!(opt, vec![State::from_fluents([goal])]);
    }

    #[test]
    fn unreachable_goal_has_no_end_states() {
        let mut b = ModelBuilder::new("stuck");
        let g = b.fluent("g");
        b.init([]);
        b.goal([g]);
        let m = b.build().unwrap();
        assert!(goal_end_states(&m, PlanRestriction::All, 1000)
            .unwrap()
            .is_empty());
        let err = oracle_bounds(&m, &m, PlanRestriction::All, 1000);
        assert!(matches!(err, Err(OracleError::NoValidPlan { .. })));
    }

    #[test]
    fn bounds_of_extra_effect_pair() {
        let (mr, mh) = extra_effect_pair();
        assert_eq!(
            oracle_bounds(&mr, &mh, PlanRestriction::All, 1000).unwrap(),
            (0, 1)
        );
        assert_eq!(
            oracle_bounds(&mr, &mh, PlanRestriction::Optimal, 1000).unwrap(),
            (0, 0)
        );
    }

    #[test]
    fn identical_single_goal_state_pair_has_zero_bounds() {
        let (mr, mh) = identical_chain_pair();
        assert_eq!(
            oracle_bounds(&mr, &mh, PlanRestriction::All, 1000).unwrap(),
            (0, 0)
        );
    }

    #[test]
    fn minimal_design_for_missing_init() {
        let (robot, human) = missing_init_pair();
        let resource = robot.fluent_id("resource").unwrap();
        let spare = robot.fluent_id("spare").unwrap();
        let dp = DesignProblem {
            robot,
            human,
            universe: vec![
                DesignAtom {
                    fluent: resource,
                    polarity: Polarity::Add,
                },
                DesignAtom {
                    fluent: spare,
                    polarity: Polarity::Add,
                },
            ],
            costs: vec![1, 1],
            lower_limit: 0,
            upper_limit: 0,
        };
        let winners = oracle_design(&dp, 1000).unwrap();
        assert_eq!(winners.len(), 1);
        assert_eq!(winners[0].atoms.len(), 1);
        assert_eq!(
            winners[0].atoms.iter().next().unwrap().fluent,
            resource
        );
    }

    #[test]
    fn cap_is_enforced() {
        let (mr, _) = extra_effect_pair();
        assert!(matches!(
            ReachabilityIndex::build(&mr, 1),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn sampled_plans_are_valid() {
        let (mr, _) = extra_effect_pair();
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            let plan = sample_valid_plan(&mr, &mut rng, 4).unwrap();
            assert!(mr.validate_plan(&plan).is_valid());
        }
    }

    #[test]
    fn generated_pairs_are_well_formed_and_solvable() {
        for seed in 0..10 {
            let (r, h) = random_model_pair(seed);
            assert_eq!(r.fluents, h.fluents);
            assert_eq!(r.goal, h.goal);
            r.check_invariants().unwrap();
            h.check_invariants().unwrap();
            assert!(ReachabilityIndex::build(&h, 100_000)
                .unwrap()
                .min_goal_cost
                .is_some());
        }
    }
}
