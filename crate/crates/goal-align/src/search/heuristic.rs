//! Delete-relaxation heuristics h_max and h_add.
//!
//! Negative preconditions and delete effects are dropped; every
//! conditional effect becomes an additional relaxed action whose
//! precondition is the action's positive precondition plus the effect
//! condition. Dropping constraints keeps any real plan a relaxed plan,
//! so h_max is a lower bound on the true remaining cost (and remains so
//! for the dominant component of a lexicographic cost function when the
//! relaxation is fed that component).

use crate::model::GroundedModel;
use crate::state::State;
use std::collections::BinaryHeap;

const INFINITY: u64 = u64::MAX;

struct RelaxedAction {
    pre: Vec<u32>,
    add: Vec<u32>,
    cost: u64,
}

/// Precomputed relaxed task with reusable scratch buffers. Build once
/// per (model, cost function), evaluate many times.
pub struct RelaxedTask {
    num_fluents: usize,
    actions: Vec<RelaxedAction>,
    goal: Vec<u32>,
    // per-action consumers: fluent -> action indices requiring it
    consumers: Vec<Vec<u32>>,
    // scratch
    fact_cost: Vec<u64>,
    missing: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Max,
    Add,
}

impl RelaxedTask {
    /// `costs[i]` is the relaxed cost of model action `i` (also used for
    /// every conditional effect of that action).
    pub fn new(model: &GroundedModel, costs: &[u64]) -> RelaxedTask {
        let n = model.num_fluents();
        let mut actions = Vec::new();
        for (i, a) in model.actions.iter().enumerate() {
            let base_pre: Vec<u32> = a.pre_pos.iter().map(|f| f.0).collect();
            actions.push(RelaxedAction {
                pre: base_pre.clone(),
                add: a.add.iter().map(|f| f.0).collect(),
                cost: costs[i],
            });
            for ce in &a.when_effects {
                let mut pre = base_pre.clone();
                pre.extend(ce.when_pos.iter().map(|f| f.0));
                pre.sort_unstable();
                pre.dedup();
                actions.push(RelaxedAction {
                    pre,
                    add: ce.add.iter().map(|f| f.0).collect(),
                    cost: costs[i],
                });
            }
        }
        let mut consumers = vec![Vec::new(); n];
        for (ai, act) in actions.iter().enumerate() {
            for &f in &act.pre {
                consumers[f as usize].push(ai as u32);
            }
        }
        RelaxedTask {
            num_fluents: n,
            goal: model.goal.iter().map(|f| f.0).collect(),
            actions,
            consumers,
            fact_cost: vec![INFINITY; n],
            missing: Vec::new(),
        }
    }

    /// Generalized Dijkstra over facts. Returns `None` when the goal is
    /// relaxed-unreachable (the ∞ marker).
    pub fn eval(&mut self, state: &State, combine: Combine) -> Option<u64> {
        self.fact_cost.clear();
        self.fact_cost.resize(self.num_fluents, INFINITY);
        self.missing.clear();
        self.missing
            .extend(self.actions.iter().map(|a| a.pre.len() as u32));

        let mut heap: BinaryHeap<std::cmp::Reverse<(u64, u32)>> = BinaryHeap::new();
        for f in state.iter() {
            if f.index() < self.num_fluents && self.fact_cost[f.index()] != 0 {
                self.fact_cost[f.index()] = 0;
                heap.push(std::cmp::Reverse((0, f.0)));
            }
        }
        // Actions with no preconditions fire immediately.
        for act in &self.actions {
            if act.pre.is_empty() {
                for &f in &act.add {
                    if act.cost < self.fact_cost[f as usize] {
                        self.fact_cost[f as usize] = act.cost;
                        heap.push(std::cmp::Reverse((act.cost, f)));
                    }
                }
            }
        }

        // Per-action accumulated precondition value under `combine`.
        let mut acc: Vec<u64> = vec![0; self.actions.len()];
        while let Some(std::cmp::Reverse((c, f))) = heap.pop() {
            if c > self.fact_cost[f as usize] {
                continue;
            }
            for &ai in &self.consumers[f as usize] {
                let ai = ai as usize;
                match combine {
                    Combine::Max => acc[ai] = acc[ai].max(c),
                    Combine::Add => acc[ai] = acc[ai].saturating_add(c),
                }
                self.missing[ai] -= 1;
                if self.missing[ai] == 0 {
                    let fire = acc[ai].saturating_add(self.actions[ai].cost);
                    for &g in &self.actions[ai].add {
                        if fire < self.fact_cost[g as usize] {
                            self.fact_cost[g as usize] = fire;
                            heap.push(std::cmp::Reverse((fire, g)));
                        }
                    }
                }
            }
        }

        let mut total = 0u64;
        for &g in &self.goal {
            let c = self.fact_cost[g as usize];
            if c == INFINITY {
                return None;
            }
            match combine {
                Combine::Max => total = total.max(c),
                Combine::Add => total = total.saturating_add(c),
            }
        }
        Some(total)
    }
}

/// h_max of `state`: admissible estimate of the remaining cost to the
/// goal under the model's own action costs. `None` is the ∞ marker
/// (goal relaxed-unreachable, hence truly unreachable).
pub fn h_max(state: &State, model: &GroundedModel) -> Option<u64> {
    let costs: Vec<u64> = model.actions.iter().map(|a| a.cost).collect();
    RelaxedTask::new(model, &costs).eval(state, Combine::Max)
}

/// h_add of `state`: inadmissible but informative additive estimate.
pub fn h_add(state: &State, model: &GroundedModel) -> Option<u64> {
    let costs: Vec<u64> = model.actions.iter().map(|a| a.cost).collect();
    RelaxedTask::new(model, &costs).eval(state, Combine::Add)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::extra_effect_pair;
    use crate::model::ModelBuilder;

    #[test]
    fn zero_at_goal_states() {
        let (mr, _) = extra_effect_pair();
        let goal = mr.goal.clone();
        assert_eq!(h_max(&goal, &mr), Some(0));
        assert_eq!(h_add(&goal, &mr), Some(0));
    }

    #[test]
    fn infinity_marker_when_relaxed_unreachable() {
        let mut b = ModelBuilder::new("stuck");
        let g = b.fluent("g");
        b.init([]);
        b.goal([g]);
        let m = b.build().unwrap();
        assert_eq!(h_max(&m.init, &m), None);
        assert_eq!(h_add(&m.init, &m), None);
    }

    #[test]
    fn one_step_relaxed_plan() {
        let (mr, _) = extra_effect_pair();
        assert_eq!(h_max(&State::empty(), &mr), Some(1));
        assert_eq!(h_add(&State::empty(), &mr), Some(1));
    }

    #[test]
    fn conditional_effects_count_as_relaxed_actions() {
        use crate::model::ConditionalEffect;
        let mut b = ModelBuilder::new("cond");
        let t = b.fluent("trigger");
        let g = b.fluent("g");
        b.action("fire")
            .when(ConditionalEffect {
                when_pos: crate::state::State::from_fluents([t]),
                when_neg: crate::state::State::empty(),
                add: crate::state::State::from_fluents([g]),
                del: crate::state::State::empty(),
            })
            .done();
        b.init([t]);
        b.goal([g]);
        let m = b.build().unwrap();
        assert_eq!(h_max(&m.init, &m), Some(1));
    }
}
