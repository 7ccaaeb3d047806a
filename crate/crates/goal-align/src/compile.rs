//! The joint-model compilation: a single planning problem whose plans
//! embed a human plan, a robot plan, and one check action per fluent
//! comparing the two final states.
//!
//! Fluent layout over a base table of `n` fluents:
//!
//! ```text
//! 0..n        robot fluents (original names)
//! n..2n       human copies            hcopy_<f>
//! 2n, 2n+1    robot_can_act, human_can_act
//! 2n+2..3n+2  compare fluents         cmp_<f>
//! ```
//!
//! The plan starts in the human phase (only `human_can_act` is true in
//! the ordered variant; the flattened variant also sets
//! `robot_can_act`, allowing interleaving). A zero-cost flip action
//! closes each phase once that side's goal holds. Check actions require
//! both act tokens false, fire exactly once per fluent (the goal wants
//! every compare fluent), and the four per-fluent checks partition the
//! truth combinations of (robot value, human copy value). Which checks
//! the cost scheme penalizes decides whether the optimal plan's
//! disagreement count is the upper or the lower divergence bound.

use crate::model::{
    ActionId, ConditionalEffect, GroundAction, GroundedModel, Plan, PlanCheck,
};
use crate::search::{
    solve_optimal, CheckCanon, CostVec, SearchOutcome, SearchStats, Searchable, SolveBudget,
    SuccessorPolicy,
};
use crate::state::{FluentId, State};
use thiserror::Error;

pub const ROBOT_TOKEN_NAME: &str = "robot_can_act";
pub const HUMAN_TOKEN_NAME: &str = "human_can_act";
pub const FORCED_MARKER_NAME: &str = "disagreement_used";

/// Which divergence bound a compiled model computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundMode {
    /// Minimal divergence over all plan pairs (disagreements penalized).
    Lower,
    /// Maximal divergence over all plan pairs (agreements penalized).
    Upper,
    /// Minimal divergence over cost-optimal plan pairs.
    LowerOptimal,
    /// Maximal divergence over cost-optimal plan pairs.
    UpperOptimal,
}

impl BoundMode {
    pub fn penalizes_agreement(self) -> bool {
        matches!(self, BoundMode::Upper | BoundMode::UpperOptimal)
    }

    pub fn optimal_restriction(self) -> bool {
        matches!(self, BoundMode::LowerOptimal | BoundMode::UpperOptimal)
    }
}

/// How dominance between cost layers is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostRepr {
    /// Lexicographic cost vectors, solved in-process. Default.
    Lexicographic,
    /// Single scalar costs with penalty integers large enough to
    /// dominate; what an exported PDDL model carries.
    BigInteger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostScheme {
    pub mode: BoundMode,
    pub repr: CostRepr,
    /// Cap on the plan-length bound used when sizing penalty integers.
    pub horizon: u64,
}

impl CostScheme {
    pub const DEFAULT_HORIZON: u64 = 1_000_000;

    pub fn new(mode: BoundMode) -> CostScheme {
        CostScheme {
            mode,
            repr: CostRepr::Lexicographic,
            horizon: Self::DEFAULT_HORIZON,
        }
    }

    pub fn lower() -> CostScheme {
        Self::new(BoundMode::Lower)
    }

    pub fn upper() -> CostScheme {
        Self::new(BoundMode::Upper)
    }

    pub fn lower_optimal() -> CostScheme {
        Self::new(BoundMode::LowerOptimal)
    }

    pub fn upper_optimal() -> CostScheme {
        Self::new(BoundMode::UpperOptimal)
    }

    pub fn with_repr(mut self, repr: CostRepr) -> CostScheme {
        self.repr = repr;
        self
    }
}

/// Whether human actions must all precede robot actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseOrdering {
    Ordered,
    Flattened,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluentRole {
    Robot(FluentId),
    HumanCopy(FluentId),
    Housekeeping,
    Compare(FluentId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionRole {
    RobotCopy(ActionId),
    HumanCopy(ActionId),
    FlipHuman,
    FlipRobot,
    CheckAgree(FluentId),
    CheckDisagree {
        fluent: FluentId,
        budget_slot: Option<u32>,
    },
    DesignApply {
        atom: u32,
        step: u32,
    },
    DesignCompleted,
}

/// Positions of the housekeeping fluents in the compiled table.
#[derive(Clone, Debug)]
pub struct Layout {
    pub base: usize,
    pub robot_token: FluentId,
    pub human_token: FluentId,
    compare_start: u32,
    pub forced_marker: Option<FluentId>,
}

impl Layout {
    pub fn human_copy(&self, f: FluentId) -> FluentId {
        FluentId(f.0 + self.base as u32)
    }

    pub fn compare(&self, f: FluentId) -> FluentId {
        FluentId(self.compare_start + f.0)
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("robot and human models do not share a fluent table")]
    FluentSetMismatch,
    #[error("robot and human models do not share a goal specification")]
    GoalMismatch,
}

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("plan step {step} is not executable in the compiled model")]
    InvalidStep { step: usize },
    #[error("plan does not reach the compiled goal")]
    GoalUnmet,
    #[error("fluent {fluent:?} checked more than once")]
    DoubleCheck { fluent: FluentId },
    #[error("expected {expected} check actions, found {found}")]
    WrongCheckCount { expected: usize, found: usize },
    #[error("check partition violated at step {step}: fluent {fluent:?} has {applicable} applicable checks")]
    PartitionViolation {
        step: usize,
        fluent: FluentId,
        applicable: usize,
    },
    #[error("phase order violated at step {step} ({action})")]
    PhaseOrder { step: usize, action: String },
    #[error("check actions disagree with the projected end states on fluent {fluent:?}")]
    CheckMismatch { fluent: FluentId },
    #[error("projected {side} plan is invalid in its source model")]
    BadProjection { side: &'static str },
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("no valid human/robot plan pair (compiled model unsolvable)")]
    NoValidPlanPair,
    #[error("planner budget exhausted before an optimal plan was found")]
    ResourceExhausted,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// The joint model plus the metadata needed to interpret its plans.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub model: GroundedModel,
    pub robot: GroundedModel,
    pub human: GroundedModel,
    pub scheme: CostScheme,
    pub ordering: PhaseOrdering,
    pub fluent_roles: Vec<FluentRole>,
    pub action_roles: Vec<ActionRole>,
    pub layout: Layout,
    /// False once disagreement checks were removed or budget-limited;
    /// the four-way partition property is only asserted when true.
    pub full_checks: bool,
    pub design: Option<crate::design::DesignLayout>,
}

/// A plan of a compiled model split by role.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// The human action sequence, as a plan of the human source model.
    pub human_plan: Plan,
    /// The robot action sequence, as a plan of the robot source model.
    pub robot_plan: Plan,
    pub human_end: State,
    pub robot_end: State,
    /// Base fluents checked as agreeing (κ+).
    pub agree: State,
    /// Base fluents checked as disagreeing (κ−).
    pub disagree: State,
    /// Atom indices of design actions, in plan order.
    pub design_atoms: Vec<u32>,
}

/// Result of one bound computation.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub mode: BoundMode,
    /// The divergence bound: |κ−| of the optimal compiled plan.
    pub bound: u32,
    pub human_plan: Plan,
    pub robot_plan: Plan,
    pub agree: State,
    pub disagree: State,
    pub stats: SearchStats,
}

pub(crate) use crate::pddl::mangle;

fn shift(s: &State, by: u32) -> State {
    s.iter().map(|f| FluentId(f.0 + by)).collect()
}

/// Appends a fluent name, uniquified against the table so far (the base
/// model may itself be a compiled model whose table already holds the
/// housekeeping names).
pub(crate) fn push_unique(fluents: &mut Vec<String>, candidate: String) {
    let mut name = candidate.clone();
    let mut suffix = 2;
    while fluents.contains(&name) {
        name = format!("{candidate}-{suffix}");
        suffix += 1;
    }
    fluents.push(name);
}

/// Builds the joint model `⟨F^λ, A^λ, I^λ, G^λ⟩` for a robot/human pair
/// sharing one fluent table and one goal.
pub fn build_joint_model(
    robot: &GroundedModel,
    human: &GroundedModel,
    scheme: CostScheme,
    ordering: PhaseOrdering,
) -> Result<CompiledModel, CompileError> {
    if robot.fluents != human.fluents {
        return Err(CompileError::FluentSetMismatch);
    }
    if robot.goal != human.goal {
        return Err(CompileError::GoalMismatch);
    }
    let n = robot.num_fluents() as u32;

    let mut fluents: Vec<String> = robot.fluents.clone();
    let mut fluent_roles: Vec<FluentRole> =
        (0..n).map(|i| FluentRole::Robot(FluentId(i))).collect();
    for (i, f) in robot.fluents.iter().enumerate() {
        push_unique(&mut fluents, format!("hcopy_{}", mangle(f)));
        fluent_roles.push(FluentRole::HumanCopy(FluentId(i as u32)));
    }
    let robot_token = FluentId(2 * n);
    let human_token = FluentId(2 * n + 1);
    push_unique(&mut fluents, ROBOT_TOKEN_NAME.to_string());
    push_unique(&mut fluents, HUMAN_TOKEN_NAME.to_string());
    fluent_roles.push(FluentRole::Housekeeping);
    fluent_roles.push(FluentRole::Housekeeping);
    let compare_start = 2 * n + 2;
    for (i, f) in robot.fluents.iter().enumerate() {
        push_unique(&mut fluents, format!("cmp_{}", mangle(f)));
        fluent_roles.push(FluentRole::Compare(FluentId(i as u32)));
    }
    let layout = Layout {
        base: n as usize,
        robot_token,
        human_token,
        compare_start,
        forced_marker: None,
    };

    let mut init = robot.init.clone();
    init.union_with(&shift(&human.init, n));
    init.insert(human_token);
    if ordering == PhaseOrdering::Flattened {
        init.insert(robot_token);
    }

    let mut goal = robot.goal.clone();
    goal.union_with(&shift(&human.goal, n));
    for i in 0..n {
        goal.insert(layout.compare(FluentId(i)));
    }

    let mut actions: Vec<GroundAction> = Vec::new();
    let mut action_roles: Vec<ActionRole> = Vec::new();

    for (i, a) in robot.actions.iter().enumerate() {
        let mut copy = a.clone();
        copy.name = format!("r_{}", mangle(&a.name));
        copy.pre_pos.insert(robot_token);
        actions.push(copy);
        action_roles.push(ActionRole::RobotCopy(ActionId(i as u32)));
    }
    for (i, a) in human.actions.iter().enumerate() {
        let mut copy = GroundAction {
            name: format!("h_{}", mangle(&a.name)),
            pre_pos: shift(&a.pre_pos, n),
            pre_neg: shift(&a.pre_neg, n),
            add: shift(&a.add, n),
            del: shift(&a.del, n),
            when_effects: a
                .when_effects
                .iter()
                .map(|ce| ConditionalEffect {
                    when_pos: shift(&ce.when_pos, n),
                    when_neg: shift(&ce.when_neg, n),
                    add: shift(&ce.add, n),
                    del: shift(&ce.del, n),
                })
                .collect(),
            cost: a.cost,
        };
        copy.pre_pos.insert(human_token);
        actions.push(copy);
        action_roles.push(ActionRole::HumanCopy(ActionId(i as u32)));
    }

    // Flip actions: close the human phase once the human goal holds,
    // then the robot phase once the robot goal holds. Zero cost.
    let mut flip_h_pre = shift(&human.goal, n);
    flip_h_pre.insert(human_token);
    actions.push(GroundAction {
        name: "flip_h".to_string(),
        pre_pos: flip_h_pre,
        pre_neg: State::empty(),
        add: State::from_fluents([robot_token]),
        del: State::from_fluents([human_token]),
        when_effects: Vec::new(),
        cost: 0,
    });
    action_roles.push(ActionRole::FlipHuman);
    let mut flip_r_pre = robot.goal.clone();
    flip_r_pre.insert(robot_token);
    actions.push(GroundAction {
        name: "flip_r".to_string(),
        pre_pos: flip_r_pre,
        pre_neg: State::empty(),
        add: State::empty(),
        del: State::from_fluents([robot_token]),
        when_effects: Vec::new(),
        cost: 0,
    });
    action_roles.push(ActionRole::FlipRobot);

    // Four checks per fluent; preconditions partition the truth table of
    // (robot value, human copy value).
    for i in 0..n {
        let f = FluentId(i);
        let hf = layout.human_copy(f);
        let cf = layout.compare(f);
        let blocked = State::from_fluents([robot_token, human_token, cf]);
        let mangled = mangle(&robot.fluents[i as usize]);

        let mut mk = |name: String, pre_pos: State, mut pre_neg: State, role: ActionRole| {
            pre_neg.union_with(&blocked);
            actions.push(GroundAction {
                name,
                pre_pos,
                pre_neg,
                add: State::from_fluents([cf]),
                del: State::empty(),
                when_effects: Vec::new(),
                cost: 0,
            });
            action_roles.push(role);
        };
        mk(
            format!("chk_agree_pos_{mangled}"),
            State::from_fluents([f, hf]),
            State::empty(),
            ActionRole::CheckAgree(f),
        );
        mk(
            format!("chk_agree_neg_{mangled}"),
            State::empty(),
            State::from_fluents([f, hf]),
            ActionRole::CheckAgree(f),
        );
        mk(
            format!("chk_dis_robot_{mangled}"),
            State::from_fluents([f]),
            State::from_fluents([hf]),
            ActionRole::CheckDisagree {
                fluent: f,
                budget_slot: None,
            },
        );
        mk(
            format!("chk_dis_human_{mangled}"),
            State::from_fluents([hf]),
            State::from_fluents([f]),
            ActionRole::CheckDisagree {
                fluent: f,
                budget_slot: None,
            },
        );
    }

    let mut compiled = CompiledModel {
        model: GroundedModel {
            name: format!("joint-{}", mangle(&robot.name)),
            fluents,
            actions,
            init,
            goal,
        },
        robot: robot.clone(),
        human: human.clone(),
        scheme,
        ordering,
        fluent_roles,
        action_roles,
        layout,
        full_checks: true,
        design: None,
    };
    compiled.assign_scalar_costs();
    debug_assert!(compiled.model.check_invariants().is_ok());
    Ok(compiled)
}

impl CompiledModel {
    pub fn base_fluents(&self) -> usize {
        self.layout.base
    }

    /// Scalar action costs: the big-integer realization of the scheme,
    /// sized so penalized checks dominate every possible plan cost below
    /// them. These are the costs an exported PDDL model carries; the
    /// in-process searches use [`CompiledModel::search_costs`].
    fn assign_scalar_costs(&mut self) {
        let n = self.layout.base as u64;
        let bits = self.model.fluents.len() as u32;
        let state_bound = if bits >= 63 {
            self.scheme.horizon
        } else {
            (1u64 << bits).min(self.scheme.horizon)
        };
        let copies = self
            .action_roles
            .iter()
            .filter(|r| matches!(r, ActionRole::RobotCopy(_) | ActionRole::HumanCopy(_)))
            .count() as u64;
        let penalize_agree = self.scheme.mode.penalizes_agreement();

        match self.scheme.mode {
            BoundMode::Lower | BoundMode::Upper => {
                // Unit-cost copies; penalty above any base plan cost.
                let penalty = copies.saturating_mul(state_bound).saturating_add(1);
                for (i, role) in self.action_roles.iter().enumerate() {
                    self.model.actions[i].cost = match role {
                        ActionRole::RobotCopy(_) | ActionRole::HumanCopy(_) => 1,
                        ActionRole::CheckAgree(_) => {
                            if penalize_agree {
                                penalty
                            } else {
                                0
                            }
                        }
                        ActionRole::CheckDisagree { .. } => {
                            if penalize_agree {
                                0
                            } else {
                                penalty
                            }
                        }
                        _ => 0,
                    };
                }
            }
            BoundMode::LowerOptimal | BoundMode::UpperOptimal => {
                // Layered dominance: human plan cost over robot plan
                // cost over penalized checks, preserving the source cost
                // orderings by uniform scaling.
                let robot_scale = n.saturating_add(1);
                let max_robot = self
                    .robot
                    .actions
                    .iter()
                    .map(|a| a.cost)
                    .max()
                    .unwrap_or(0);
                let human_scale = robot_scale
                    .saturating_mul(max_robot.saturating_mul(state_bound).saturating_add(1));
                for (i, role) in self.action_roles.iter().enumerate() {
                    self.model.actions[i].cost = match role {
                        ActionRole::RobotCopy(src) => {
                            self.robot.actions[src.index()].cost.saturating_mul(robot_scale)
                        }
                        ActionRole::HumanCopy(src) => {
                            self.human.actions[src.index()].cost.saturating_mul(human_scale)
                        }
                        ActionRole::CheckAgree(_) => u64::from(penalize_agree),
                        ActionRole::CheckDisagree { .. } => u64::from(!penalize_agree),
                        _ => 0,
                    };
                }
            }
        }
    }

    /// Per-action cost vectors realizing the scheme for in-process
    /// search.
    pub fn search_costs(&self) -> Vec<CostVec> {
        let penalize_agree = self.scheme.mode.penalizes_agreement();
        match self.scheme.repr {
            CostRepr::BigInteger => self
                .model
                .actions
                .iter()
                .map(|a| CostVec::scalar(a.cost))
                .collect(),
            CostRepr::Lexicographic => self
                .action_roles
                .iter()
                .map(|role| {
                    let penalized = match role {
                        ActionRole::CheckAgree(_) => penalize_agree,
                        ActionRole::CheckDisagree { .. } => !penalize_agree,
                        _ => false,
                    };
                    if self.scheme.mode.optimal_restriction() {
                        match role {
                            ActionRole::HumanCopy(src) => {
                                CostVec::triple(self.human.actions[src.index()].cost, 0, 0)
                            }
                            ActionRole::RobotCopy(src) => {
                                CostVec::triple(0, self.robot.actions[src.index()].cost, 0)
                            }
                            _ if penalized => CostVec::triple(0, 0, 1),
                            _ => CostVec::ZERO,
                        }
                    } else {
                        match role {
                            ActionRole::RobotCopy(_) | ActionRole::HumanCopy(_) => {
                                CostVec::pair(0, 1)
                            }
                            _ if penalized => CostVec::pair(1, 0),
                            _ => CostVec::ZERO,
                        }
                    }
                })
                .collect(),
        }
    }

    fn check_canon(&self) -> CheckCanon {
        let n = self.layout.base;
        let mut tokens = vec![self.layout.robot_token, self.layout.human_token];
        if let Some(design) = &self.design {
            tokens.push(design.design_allowed);
        }
        let compare: Vec<FluentId> = (0..n)
            .map(|i| self.layout.compare(FluentId(i as u32)))
            .collect();
        let mut checks_per_fluent: Vec<Vec<ActionId>> = vec![Vec::new(); n];
        let mut is_check = vec![false; self.model.num_actions()];
        // Agreement checks first, then disagreement copies by budget slot.
        for (i, role) in self.action_roles.iter().enumerate() {
            if let ActionRole::CheckAgree(f) = role {
                checks_per_fluent[f.index()].push(ActionId(i as u32));
                is_check[i] = true;
            }
        }
        let mut disagrees: Vec<(FluentId, u32, usize)> = Vec::new();
        for (i, role) in self.action_roles.iter().enumerate() {
            if let ActionRole::CheckDisagree { fluent, budget_slot } = role {
                disagrees.push((*fluent, budget_slot.unwrap_or(0), i));
                is_check[i] = true;
            }
        }
        disagrees.sort();
        for (f, _, i) in disagrees {
            checks_per_fluent[f.index()].push(ActionId(i as u32));
        }
        CheckCanon {
            tokens,
            compare,
            checks_per_fluent,
            is_check,
        }
    }
}

impl Searchable for CompiledModel {
    fn base(&self) -> &GroundedModel {
        &self.model
    }

    fn search_costs(&self) -> Vec<CostVec> {
        CompiledModel::search_costs(self)
    }

    fn policy(&self) -> SuccessorPolicy {
        SuccessorPolicy::CanonicalChecks(self.check_canon())
    }

    fn cost_components(&self) -> usize {
        match self.scheme.repr {
            CostRepr::BigInteger => 1,
            CostRepr::Lexicographic if self.scheme.mode.optimal_restriction() => 3,
            CostRepr::Lexicographic => 2,
        }
    }
}

/// Adds a goal fluent that only disagreement checks provide, so the
/// result is solvable iff some plan pair disagrees somewhere (the
/// upper bound is positive).
pub fn build_forced_disagreement(compiled: &CompiledModel) -> CompiledModel {
    let mut out = compiled.clone();
    let marker = FluentId(out.model.fluents.len() as u32);
    push_unique(&mut out.model.fluents, FORCED_MARKER_NAME.to_string());
    out.fluent_roles.push(FluentRole::Housekeeping);
    out.model.goal.insert(marker);
    out.layout.forced_marker = Some(marker);
    for (i, role) in out.action_roles.iter().enumerate() {
        if matches!(role, ActionRole::CheckDisagree { .. }) {
            out.model.actions[i].add.insert(marker);
        }
    }
    out
}

/// Removes disagreement checks (`budget == 0`) or replaces each with
/// `budget` indexed copies consuming one budget token apiece, so at most
/// `budget` fluents may disagree in any valid plan.
pub fn limit_disagreements(compiled: &CompiledModel, budget: u32) -> CompiledModel {
    let mut out = compiled.clone();
    out.full_checks = false;

    let mut tokens: Vec<FluentId> = Vec::new();
    for slot in 0..budget {
        let id = FluentId(out.model.fluents.len() as u32);
        push_unique(&mut out.model.fluents, format!("budget_{slot}"));
        out.fluent_roles.push(FluentRole::Housekeeping);
        out.model.init.insert(id);
        tokens.push(id);
    }

    let mut actions = Vec::new();
    let mut roles = Vec::new();
    for (act, role) in out.model.actions.iter().zip(&out.action_roles) {
        if let ActionRole::CheckDisagree { fluent, .. } = role {
            for (slot, &token) in tokens.iter().enumerate() {
                let mut copy = act.clone();
                copy.name = format!("{}_b{slot}", act.name);
                copy.pre_pos.insert(token);
                copy.del.insert(token);
                actions.push(copy);
                roles.push(ActionRole::CheckDisagree {
                    fluent: *fluent,
                    budget_slot: Some(slot as u32),
                });
            }
        } else {
            actions.push(act.clone());
            roles.push(*role);
        }
    }
    out.model.actions = actions;
    out.action_roles = roles;
    debug_assert!(out.model.check_invariants().is_ok());
    out
}

/// Splits a compiled-model plan by role, validating its structure along
/// the way: compiled validity, exactly one check per fluent, the
/// four-way partition property (full compilations), phase ordering
/// (ordered variant), faithful projections into the source models, and
/// agreement between the checks and the projected end states.
pub fn decompose_plan(
    compiled: &CompiledModel,
    plan: &Plan,
) -> Result<Decomposition, StructureError> {
    let model = &compiled.model;
    let canon = compiled.check_canon();
    let n = compiled.layout.base;

    let mut human_actions = Vec::new();
    let mut robot_actions = Vec::new();
    let mut agree = State::empty();
    let mut disagree = State::empty();
    let mut design_atoms = Vec::new();

    // Phase automaton for the ordered variant:
    // design(0) → human(1) → robot(2) → checks(3).
    let mut phase: u8 = if compiled.design.is_some() { 0 } else { 1 };
    let ordered = compiled.ordering == PhaseOrdering::Ordered;
    let mut checks_started = false;

    let mut state = model.init.clone();
    for (step, &aid) in plan.actions.iter().enumerate() {
        let act = &model.actions[aid.index()];
        if !act.executable(&state) {
            return Err(StructureError::InvalidStep { step });
        }

        // Partition property: whenever the check phase is active, each
        // unchecked fluent must have exactly one applicable check.
        if compiled.full_checks && canon.tokens.iter().all(|&t| !state.contains(t)) {
            for (i, &cmp) in canon.compare.iter().enumerate() {
                if state.contains(cmp) {
                    continue;
                }
                let applicable = canon.checks_per_fluent[i]
                    .iter()
                    .filter(|&&a| model.executable(&state, a))
                    .count();
                if applicable != 1 {
                    return Err(StructureError::PartitionViolation {
                        step,
                        fluent: FluentId(i as u32),
                        applicable,
                    });
                }
            }
        }

        let role = compiled.action_roles[aid.index()];
        let bad_phase = || StructureError::PhaseOrder {
            step,
            action: act.name.clone(),
        };
        match role {
            ActionRole::DesignApply { atom, .. } => {
                if phase != 0 {
                    return Err(bad_phase());
                }
                design_atoms.push(atom);
            }
            ActionRole::DesignCompleted => {
                if phase != 0 {
                    return Err(bad_phase());
                }
                phase = 1;
            }
            ActionRole::HumanCopy(src) => {
                if ordered && phase != 1 {
                    return Err(bad_phase());
                }
                if checks_started {
                    return Err(bad_phase());
                }
                human_actions.push(src);
            }
            ActionRole::FlipHuman => {
                if ordered {
                    if phase != 1 {
                        return Err(bad_phase());
                    }
                    phase = 2;
                }
            }
            ActionRole::RobotCopy(src) => {
                if ordered && phase != 2 {
                    return Err(bad_phase());
                }
                if checks_started {
                    return Err(bad_phase());
                }
                robot_actions.push(src);
            }
            ActionRole::FlipRobot => {
                if ordered {
                    if phase != 2 {
                        return Err(bad_phase());
                    }
                    phase = 3;
                }
            }
            ActionRole::CheckAgree(f) => {
                if agree.contains(f) || disagree.contains(f) {
                    return Err(StructureError::DoubleCheck { fluent: f });
                }
                agree.insert(f);
                checks_started = true;
            }
            ActionRole::CheckDisagree { fluent, .. } => {
                if agree.contains(fluent) || disagree.contains(fluent) {
                    return Err(StructureError::DoubleCheck { fluent });
                }
                disagree.insert(fluent);
                checks_started = true;
            }
        }
        state = model.apply(&state, aid).expect("checked executable");
    }
    if !state.is_superset(&model.goal) {
        return Err(StructureError::GoalUnmet);
    }
    if agree.len() + disagree.len() != n {
        return Err(StructureError::WrongCheckCount {
            expected: n,
            found: agree.len() + disagree.len(),
        });
    }

    // Project into the source models. A design phase edits the inits.
    let mut robot_src = compiled.robot.clone();
    let mut human_src = compiled.human.clone();
    if let Some(design) = &compiled.design {
        for &atom in &design_atoms {
            design.atoms[atom as usize].apply_to_init(&mut robot_src.init);
            design.atoms[atom as usize].apply_to_init(&mut human_src.init);
        }
    }
    let human_plan = Plan::new(&human_src, human_actions);
    let robot_plan = Plan::new(&robot_src, robot_actions);
    let human_end = match human_src.validate_plan(&human_plan) {
        PlanCheck::Valid { end } => end,
        _ => return Err(StructureError::BadProjection { side: "human" }),
    };
    let robot_end = match robot_src.validate_plan(&robot_plan) {
        PlanCheck::Valid { end } => end,
        _ => return Err(StructureError::BadProjection { side: "robot" }),
    };

    // The checks must agree with the actual end-state comparison.
    let diff = human_end.symmetric_difference(&robot_end);
    if diff != disagree {
        let witness = diff
            .symmetric_difference(&disagree)
            .iter()
            .next()
            .unwrap_or(FluentId(0));
        return Err(StructureError::CheckMismatch { fluent: witness });
    }

    Ok(Decomposition {
        human_plan,
        robot_plan,
        human_end,
        robot_end,
        agree,
        disagree,
        design_atoms,
    })
}

/// Solves the compiled model optimally and reads the bound off the
/// optimal plan's disagreement checks.
pub fn compute_bound(
    compiled: &CompiledModel,
    budget: &SolveBudget,
) -> Result<BoundsReport, BoundError> {
    let result = solve_optimal(compiled, budget);
    match result.outcome {
        SearchOutcome::Plan { plan, cost } => {
            let decomp = decompose_plan(compiled, &plan)?;
            let bound = decomp.disagree.len() as u32;
            // Cross-check the cost vector against the decomposition.
            if compiled.scheme.repr == CostRepr::Lexicographic {
                let penalized = if compiled.scheme.mode.penalizes_agreement() {
                    decomp.agree.len() as u64
                } else {
                    decomp.disagree.len() as u64
                };
                let slot = if compiled.scheme.mode.optimal_restriction() {
                    2
                } else {
                    0
                };
                debug_assert_eq!(cost.component(slot), penalized);
            }
            Ok(BoundsReport {
                mode: compiled.scheme.mode,
                bound,
                human_plan: decomp.human_plan,
                robot_plan: decomp.robot_plan,
                agree: decomp.agree,
                disagree: decomp.disagree,
                stats: result.stats,
            })
        }
        SearchOutcome::ProvenUnsolvable => Err(BoundError::NoValidPlanPair),
        SearchOutcome::ResourceExhausted => Err(BoundError::ResourceExhausted),
    }
}
