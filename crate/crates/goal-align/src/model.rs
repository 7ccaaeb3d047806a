//! Grounded STRIPS models: fluents, actions, the transition function,
//! plans, and the divergence metrics between final states.
//!
//! A model is the tuple of a fluent table, a ground action table with
//! nonnegative integer costs, an initial state and a goal specification
//! (a partial state: any state containing it is a goal state). Actions
//! carry positive and negative preconditions, add and delete effects,
//! and optionally conditional effects, all as bitsets over the fluent
//! table.

use crate::state::{FluentId, State};
use std::fmt;
use thiserror::Error;

/// Index of a ground action in a model's action table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// An effect applied only when its condition holds in the state the
/// action is executed in (the pre-action state).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalEffect {
    pub when_pos: State,
    pub when_neg: State,
    pub add: State,
    pub del: State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub pre_pos: State,
    pub pre_neg: State,
    pub add: State,
    pub del: State,
    pub when_effects: Vec<ConditionalEffect>,
    pub cost: u64,
}

impl GroundAction {
    /// `exec(s, a)`: true iff `s ⊇ pre_pos(a)` and `s ∩ pre_neg(a) = ∅`.
    #[inline]
    pub fn executable(&self, s: &State) -> bool {
        s.is_superset(&self.pre_pos) && s.is_disjoint(&self.pre_neg)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("action `{action}`: add and delete effects overlap")]
    OverlappingEffect { action: String },
    #[error("action `{action}`: positive and negative preconditions overlap")]
    OverlappingPrecondition { action: String },
    #[error("action `{action}` references fluent index {index} outside the fluent table")]
    UndeclaredFluent { action: String, index: u32 },
    #[error("{place} references fluent index {index} outside the fluent table")]
    UndeclaredStateFluent { place: &'static str, index: u32 },
    #[error("duplicate fluent name `{0}`")]
    DuplicateFluent(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("step {step} ({action}) is not executable")]
    NotExecutable { step: usize, action: String },
    #[error("plan references action index {index} outside the action table")]
    UnknownAction { index: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DivergenceError {
    #[error("models do not share a fluent table ({left} vs {right} fluents)")]
    FluentSetMismatch { left: usize, right: usize },
    #[error("{side} plan is invalid: {source}")]
    InvalidPlan {
        side: &'static str,
        source: PlanError,
    },
    #[error("{side} plan does not reach the goal")]
    GoalUnmet { side: &'static str },
}

/// Which plan set a bound or an oracle enumeration quantifies over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanRestriction {
    /// Every valid plan.
    All,
    /// Only cost-optimal plans.
    Optimal,
}

/// A sequence of ground actions with its cached total cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<ActionId>,
    pub cost: u64,
}

impl Plan {
    /// Builds a plan over `model`, caching `cost = Σ c(a_i)`.
    pub fn new(model: &GroundedModel, actions: Vec<ActionId>) -> Plan {
        let cost = actions
            .iter()
            .map(|a| model.actions[a.index()].cost)
            .sum();
        Plan { actions, cost }
    }

    pub fn empty() -> Plan {
        Plan {
            actions: Vec::new(),
            cost: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Outcome of checking a plan against a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanCheck {
    /// All steps executable from the initial state and the final state
    /// contains the goal.
    Valid { end: State },
    /// All steps executable but the goal is unmet in the final state.
    GoalUnmet { end: State },
    /// Some step was not executable.
    Inapplicable { step: usize },
}

impl PlanCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, PlanCheck::Valid { .. })
    }

    /// Final state when all steps executed, regardless of the goal.
    pub fn end_state(&self) -> Option<&State> {
        match self {
            PlanCheck::Valid { end } | PlanCheck::GoalUnmet { end } => Some(end),
            PlanCheck::Inapplicable { .. } => None,
        }
    }
}

/// A grounded planning model `⟨F, A, c, I, G⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundedModel {
    pub name: String,
    pub fluents: Vec<String>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: State,
}

impl GroundedModel {
    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn fluent_name(&self, f: FluentId) -> &str {
        &self.fluents[f.index()]
    }

    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        self.fluents
            .iter()
            .position(|n| n == name)
            .map(|i| FluentId(i as u32))
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .position(|a| a.name == name)
            .map(|i| ActionId(i as u32))
    }

    pub fn action(&self, a: ActionId) -> &GroundAction {
        &self.actions[a.index()]
    }

    /// `exec(s, a)` for an action of this model.
    pub fn executable(&self, s: &State, a: ActionId) -> bool {
        self.actions[a.index()].executable(s)
    }

    /// The transition function: `(s ∪ add) \ del`, then every
    /// conditional effect whose condition holds in the pre-action state
    /// `s` is applied the same way. Undefined (an error) when the action
    /// is not executable.
    pub fn apply(&self, s: &State, a: ActionId) -> Result<State, PlanError> {
        let act = self
            .actions
            .get(a.index())
            .ok_or(PlanError::UnknownAction { index: a.0 })?;
        if !act.executable(s) {
            return Err(PlanError::NotExecutable {
                step: 0,
                action: act.name.clone(),
            });
        }
        let mut out = s.clone();
        out.union_with(&act.add);
        out.subtract(&act.del);
        for ce in &act.when_effects {
            if s.is_superset(&ce.when_pos) && s.is_disjoint(&ce.when_neg) {
                out.union_with(&ce.add);
                out.subtract(&ce.del);
            }
        }
        Ok(out)
    }

    /// Left fold of [`GroundedModel::apply`]; the error identifies the
    /// first failing step index.
    pub fn apply_plan(&self, s: &State, plan: &Plan) -> Result<State, PlanError> {
        let mut cur = s.clone();
        for (i, &a) in plan.actions.iter().enumerate() {
            cur = self.apply(&cur, a).map_err(|e| match e {
                PlanError::NotExecutable { action, .. } => {
                    PlanError::NotExecutable { step: i, action }
                }
                other => other,
            })?;
        }
        Ok(cur)
    }

    /// A plan is valid iff all steps are executable from the initial
    /// state and the final state contains the goal.
    pub fn validate_plan(&self, plan: &Plan) -> PlanCheck {
        let mut cur = self.init.clone();
        for (i, &a) in plan.actions.iter().enumerate() {
            match self.apply(&cur, a) {
                Ok(next) => cur = next,
                Err(_) => return PlanCheck::Inapplicable { step: i },
            }
        }
        if cur.is_superset(&self.goal) {
            PlanCheck::Valid { end: cur }
        } else {
            PlanCheck::GoalUnmet { end: cur }
        }
    }

    /// `c(π) = Σ c(a_i)`, recomputed from the action table.
    pub fn plan_cost(&self, plan: &Plan) -> u64 {
        plan.actions
            .iter()
            .map(|a| self.actions[a.index()].cost)
            .sum()
    }

    /// Checks the structural invariants: every referenced fluent is in
    /// the table, preconditions are disjoint, effects are disjoint per
    /// (conditional) effect, and names are unique.
    pub fn check_invariants(&self) -> Result<(), ModelError> {
        let n = self.fluents.len() as u32;
        let max_of = |s: &State| s.iter().map(|f| f.0).max();
        {
            let mut seen = std::collections::HashSet::new();
            for f in &self.fluents {
                if !seen.insert(f) {
                    return Err(ModelError::DuplicateFluent(f.clone()));
                }
            }
            let mut seen = std::collections::HashSet::new();
            for a in &self.actions {
                if !seen.insert(&a.name) {
                    return Err(ModelError::DuplicateAction(a.name.clone()));
                }
            }
        }
        for (place, s) in [("init", &self.init), ("goal", &self.goal)] {
            if let Some(i) = max_of(s).filter(|&i| i >= n) {
                return Err(ModelError::UndeclaredStateFluent { place, index: i });
            }
        }
        for a in &self.actions {
            let mut parts: Vec<&State> = vec![&a.pre_pos, &a.pre_neg, &a.add, &a.del];
            for ce in &a.when_effects {
                parts.extend([&ce.when_pos, &ce.when_neg, &ce.add, &ce.del]);
            }
            for s in parts {
                if let Some(i) = max_of(s).filter(|&i| i >= n) {
                    return Err(ModelError::UndeclaredFluent {
                        action: a.name.clone(),
                        index: i,
                    });
                }
            }
            if !a.pre_pos.is_disjoint(&a.pre_neg) {
                return Err(ModelError::OverlappingPrecondition {
                    action: a.name.clone(),
                });
            }
            if !a.add.is_disjoint(&a.del) {
                return Err(ModelError::OverlappingEffect {
                    action: a.name.clone(),
                });
            }
            for ce in &a.when_effects {
                if !ce.add.is_disjoint(&ce.del) {
                    return Err(ModelError::OverlappingEffect {
                        action: a.name.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// State divergence: the symmetric difference `s1 Δ s2`.
pub fn state_divergence(s1: &State, s2: &State) -> State {
    s1.symmetric_difference(s2)
}

/// Goal state divergence of two plan/model pairs: the state divergence
/// between the final states of the two plans. Both plans must be valid
/// and the models must share one fluent table.
pub fn goal_state_divergence(
    m1: &GroundedModel,
    plan1: &Plan,
    m2: &GroundedModel,
    plan2: &Plan,
) -> Result<State, DivergenceError> {
    if m1.num_fluents() != m2.num_fluents() {
        return Err(DivergenceError::FluentSetMismatch {
            left: m1.num_fluents(),
            right: m2.num_fluents(),
        });
    }
    let end = |m: &GroundedModel, p: &Plan, side: &'static str| match m.validate_plan(p) {
        PlanCheck::Valid { end } => Ok(end),
        PlanCheck::GoalUnmet { .. } => Err(DivergenceError::GoalUnmet { side }),
        PlanCheck::Inapplicable { step } => Err(DivergenceError::InvalidPlan {
            side,
            source: PlanError::NotExecutable {
                step,
                action: String::new(),
            },
        }),
    };
    let e1 = end(m1, plan1, "first")?;
    let e2 = end(m2, plan2, "second")?;
    Ok(state_divergence(&e1, &e2))
}

/// Incremental construction of a [`GroundedModel`], validating the
/// invariants at `build` time.
pub struct ModelBuilder {
    model: GroundedModel,
}

pub struct ActionDraft<'a> {
    builder: &'a mut ModelBuilder,
    action: GroundAction,
}

impl ModelBuilder {
    pub fn new(name: &str) -> ModelBuilder {
        ModelBuilder {
            model: GroundedModel {
                name: name.to_string(),
                fluents: Vec::new(),
                actions: Vec::new(),
                init: State::empty(),
                goal: State::empty(),
            },
        }
    }

    /// Declares a fluent (or returns the id of an already-declared one).
    pub fn fluent(&mut self, name: &str) -> FluentId {
        if let Some(f) = self.model.fluent_id(name) {
            return f;
        }
        self.model.fluents.push(name.to_string());
        FluentId(self.model.fluents.len() as u32 - 1)
    }

    pub fn action(&mut self, name: &str) -> ActionDraft<'_> {
        ActionDraft {
            builder: self,
            action: GroundAction {
                name: name.to_string(),
                pre_pos: State::empty(),
                pre_neg: State::empty(),
                add: State::empty(),
                del: State::empty(),
                when_effects: Vec::new(),
                cost: 1,
            },
        }
    }

    pub fn init<I: IntoIterator<Item = FluentId>>(&mut self, fluents: I) -> &mut Self {
        self.model.init = State::from_fluents(fluents);
        self
    }

    pub fn goal<I: IntoIterator<Item = FluentId>>(&mut self, fluents: I) -> &mut Self {
        self.model.goal = State::from_fluents(fluents);
        self
    }

    pub fn build(self) -> Result<GroundedModel, ModelError> {
        self.model.check_invariants()?;
        Ok(self.model)
    }
}

impl<'a> ActionDraft<'a> {
    pub fn pre<I: IntoIterator<Item = FluentId>>(mut self, fluents: I) -> Self {
        for f in fluents {
            self.action.pre_pos.insert(f);
        }
        self
    }

    pub fn pre_not<I: IntoIterator<Item = FluentId>>(mut self, fluents: I) -> Self {
        for f in fluents {
            self.action.pre_neg.insert(f);
        }
        self
    }

    #[allow(clippy::should_implement_trait)] // builder verb, not arithmetic
    pub fn add<I: IntoIterator<Item = FluentId>>(mut self, fluents: I) -> Self {
        for f in fluents {
            self.action.add.insert(f);
        }
        self
    }

    pub fn del<I: IntoIterator<Item = FluentId>>(mut self, fluents: I) -> Self {
        for f in fluents {
            self.action.del.insert(f);
        }
        self
    }

    pub fn when(mut self, ce: ConditionalEffect) -> Self {
        self.action.when_effects.push(ce);
        self
    }

    pub fn cost(mut self, cost: u64) -> Self {
        self.action.cost = cost;
        self
    }

    /// Registers the action and returns its id.
    pub fn done(self) -> ActionId {
        self.builder.model.actions.push(self.action);
        ActionId(self.builder.model.actions.len() as u32 - 1)
    }
}
