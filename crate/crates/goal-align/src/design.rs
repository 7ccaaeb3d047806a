//! Initial-state designs and the design-phase compilation: a plan first
//! applies exactly τ environment modifications, then must certify that
//! the designed models align (the disagreement checks are gone, or
//! limited to a budget), while previously found designs are excluded via
//! conditional effects on the phase-closing action.

use crate::compile::{
    build_joint_model, limit_disagreements, ActionRole, CompiledModel, CostScheme, FluentRole,
    PhaseOrdering,
};
use crate::model::{ActionId, ConditionalEffect, GroundAction, GroundedModel, Plan};
use crate::state::{FluentId, State};
use std::collections::BTreeSet;
use thiserror::Error;

pub const DESIGN_ALLOWED_NAME: &str = "design_allowed";
pub const UNSEEN_DESIGN_NAME: &str = "unseen_design";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Add,
    Remove,
}

/// One environment modification: make an initial-state fluent true or
/// false in both models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DesignAtom {
    pub fluent: FluentId,
    pub polarity: Polarity,
}

impl DesignAtom {
    pub fn add(fluent: FluentId) -> DesignAtom {
        DesignAtom {
            fluent,
            polarity: Polarity::Add,
        }
    }

    pub fn remove(fluent: FluentId) -> DesignAtom {
        DesignAtom {
            fluent,
            polarity: Polarity::Remove,
        }
    }

    pub fn apply_to_init(&self, init: &mut State) {
        match self.polarity {
            Polarity::Add => init.insert(self.fluent),
            Polarity::Remove => init.remove(self.fluent),
        }
    }

    pub fn render(&self, model: &GroundedModel) -> String {
        let sign = match self.polarity {
            Polarity::Add => '+',
            Polarity::Remove => '-',
        };
        format!("{sign}{}", model.fluent_name(self.fluent))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DesignError {
    #[error("design adds and removes the same fluent (index {fluent})")]
    ConflictingAtoms { fluent: u32 },
    #[error("design step count must be at least 1")]
    TauZero,
    #[error("design step count {tau} exceeds the universe size {universe}")]
    TauExceedsUniverse { tau: u32, universe: usize },
    #[error("found design contains an atom outside the universe")]
    UnknownAtom,
    #[error("found design is empty")]
    EmptyFoundDesign,
    #[error("design universe is empty")]
    EmptyUniverse,
    #[error("universe lists the same atom twice")]
    DuplicateAtom,
    #[error("thresholds out of range: lower {lower} must be ≤ upper {upper} ≤ |F| = {fluents}")]
    InvalidThresholds { lower: u32, upper: u32, fluents: usize },
}

/// A set of design atoms with its total cost.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Design {
    pub atoms: BTreeSet<DesignAtom>,
    pub cost: u64,
}

impl Design {
    /// Builds a design, rejecting add+remove of the same fluent.
    pub fn new(
        atoms: impl IntoIterator<Item = DesignAtom>,
        cost: u64,
    ) -> Result<Design, DesignError> {
        let atoms: BTreeSet<DesignAtom> = atoms.into_iter().collect();
        let mut fluents = BTreeSet::new();
        for atom in &atoms {
            if !fluents.insert(atom.fluent) {
                return Err(DesignError::ConflictingAtoms {
                    fluent: atom.fluent.0,
                });
            }
        }
        Ok(Design { atoms, cost })
    }

    /// Unit-cost design: cost = number of atoms.
    pub fn unit(atoms: impl IntoIterator<Item = DesignAtom>) -> Result<Design, DesignError> {
        let atoms: Vec<DesignAtom> = atoms.into_iter().collect();
        let cost = atoms.len() as u64;
        Design::new(atoms, cost)
    }

    pub fn empty() -> Design {
        Design {
            atoms: BTreeSet::new(),
            cost: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.atoms.len()
    }

    pub fn render(&self, model: &GroundedModel) -> String {
        let parts: Vec<String> = self.atoms.iter().map(|a| a.render(model)).collect();
        parts.join(" ")
    }
}

/// The design problem: a model pair, the universe of available
/// modifications with their costs, and the divergence thresholds
/// (`lower_limit` = ℓ for the lower bound, `upper_limit` = k for the
/// upper bound).
#[derive(Clone, Debug)]
pub struct DesignProblem {
    pub robot: GroundedModel,
    pub human: GroundedModel,
    pub universe: Vec<DesignAtom>,
    pub costs: Vec<u64>,
    pub lower_limit: u32,
    pub upper_limit: u32,
}

impl DesignProblem {
    /// Unit costs for every atom.
    pub fn unit(
        robot: GroundedModel,
        human: GroundedModel,
        universe: Vec<DesignAtom>,
        lower_limit: u32,
        upper_limit: u32,
    ) -> DesignProblem {
        let costs = vec![1; universe.len()];
        DesignProblem {
            robot,
            human,
            universe,
            costs,
            lower_limit,
            upper_limit,
        }
    }

    pub fn design_cost(&self, design: &Design) -> u64 {
        design
            .atoms
            .iter()
            .map(|atom| {
                self.universe
                    .iter()
                    .position(|u| u == atom)
                    .map(|i| self.costs[i])
                    .unwrap_or(0)
            })
            .sum()
    }

    pub fn has_unit_costs(&self) -> bool {
        self.costs.iter().all(|&c| c == 1)
    }

    /// Structural validation. Returns warnings (vacuous atoms: removal
    /// of a fluent absent from both inits, or addition of one present in
    /// both) and rejects malformed universes or thresholds.
    pub fn validate(&self) -> Result<Vec<String>, DesignError> {
        if self.universe.is_empty() {
            return Err(DesignError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        for atom in &self.universe {
            if !seen.insert(*atom) {
                return Err(DesignError::DuplicateAtom);
            }
        }
        if self.lower_limit > self.upper_limit
            || self.upper_limit as usize > self.robot.num_fluents()
        {
            return Err(DesignError::InvalidThresholds {
                lower: self.lower_limit,
                upper: self.upper_limit,
                fluents: self.robot.num_fluents(),
            });
        }
        let mut warnings = Vec::new();
        for atom in &self.universe {
            let in_r = self.robot.init.contains(atom.fluent);
            let in_h = self.human.init.contains(atom.fluent);
            let vacuous = match atom.polarity {
                Polarity::Remove => !in_r && !in_h,
                Polarity::Add => in_r && in_h,
            };
            if vacuous {
                warnings.push(format!(
                    "design atom {} is a no-op on both initial states",
                    atom.render(&self.robot)
                ));
            }
        }
        Ok(warnings)
    }
}

/// Positions of the design-phase machinery inside a compiled model.
#[derive(Clone, Debug)]
pub struct DesignLayout {
    pub design_allowed: FluentId,
    pub unseen_design: FluentId,
    pub step_tokens: Vec<FluentId>,
    pub consumed_tokens: Vec<FluentId>,
    pub atom_markers: Vec<FluentId>,
    pub atoms: Vec<DesignAtom>,
    pub tau: u32,
    pub completed_action: ActionId,
}

/// Performs the modifications on a model: each atom edits the initial
/// state; order-independent and idempotent.
pub fn apply_design(model: &GroundedModel, design: &Design) -> GroundedModel {
    let mut out = model.clone();
    for atom in &design.atoms {
        atom.apply_to_init(&mut out.init);
    }
    out
}

/// Builds the design-phase compilation: the lower-bound compilation with
/// disagreement checks removed (or limited to `disagreement_budget`
/// indexed copies), prefixed by a design phase that applies exactly
/// `tau` distinct atoms to both model copies, with every design in
/// `found` excluded via a conditional effect that deletes the
/// `unseen_design` goal fluent.
pub fn build_design_model(
    dp: &DesignProblem,
    tau: u32,
    found: &[Design],
    disagreement_budget: u32,
    ordering: PhaseOrdering,
) -> Result<CompiledModel, DesignError> {
    if tau == 0 {
        return Err(DesignError::TauZero);
    }
    if tau as usize > dp.universe.len() {
        return Err(DesignError::TauExceedsUniverse {
            tau,
            universe: dp.universe.len(),
        });
    }

    let base = build_joint_model(&dp.robot, &dp.human, CostScheme::lower(), ordering)
        .expect("design problem models share fluents and goal");
    let mut compiled = limit_disagreements(&base, disagreement_budget);

    let mut next = compiled.model.fluents.len() as u32;
    let mut fresh = |name: String, compiled: &mut CompiledModel| {
        crate::compile::push_unique(&mut compiled.model.fluents, name);
        compiled.fluent_roles.push(FluentRole::Housekeeping);
        let id = FluentId(next);
        next += 1;
        id
    };

    let design_allowed = fresh(DESIGN_ALLOWED_NAME.to_string(), &mut compiled);
    let unseen_design = fresh(UNSEEN_DESIGN_NAME.to_string(), &mut compiled);
    let step_tokens: Vec<FluentId> = (0..tau)
        .map(|i| fresh(format!("step_{}", i + 1), &mut compiled))
        .collect();
    let consumed_tokens: Vec<FluentId> = (0..tau)
        .map(|i| fresh(format!("step_done_{}", i + 1), &mut compiled))
        .collect();
    let atom_markers: Vec<FluentId> = dp
        .universe
        .iter()
        .map(|atom| {
            let name = format!(
                "chose_{}_{}",
                match atom.polarity {
                    Polarity::Add => "add",
                    Polarity::Remove => "del",
                },
                crate::compile::mangle(dp.robot.fluent_name(atom.fluent)),
            );
            fresh(name, &mut compiled)
        })
        .collect();

    // The plan can only start with design steps.
    compiled.model.init.remove(compiled.layout.human_token);
    if ordering == PhaseOrdering::Flattened {
        compiled.model.init.remove(compiled.layout.robot_token);
    }
    compiled.model.init.insert(design_allowed);
    compiled.model.init.insert(unseen_design);
    for &t in &step_tokens {
        compiled.model.init.insert(t);
    }
    for &t in &consumed_tokens {
        compiled.model.goal.insert(t);
    }
    compiled.model.goal.insert(unseen_design);

    // Checks must wait for the design phase to close; without this the
    // initial fluent values could be "checked" before the plans run.
    for (i, role) in compiled.action_roles.iter().enumerate() {
        if matches!(
            role,
            ActionRole::CheckAgree(_) | ActionRole::CheckDisagree { .. }
        ) {
            compiled.model.actions[i].pre_neg.insert(design_allowed);
        }
    }

    // One design action per (step, atom): applies the atom to both the
    // robot fluent and its human copy, consumes the step token, and
    // marks the atom as chosen. The opposite-polarity marker (when the
    // universe offers both) is excluded so no plan both adds and removes
    // one fluent.
    for step in 0..tau as usize {
        for (ai, atom) in dp.universe.iter().enumerate() {
            let pre_pos = State::from_fluents([design_allowed, step_tokens[step]]);
            let mut pre_neg = State::from_fluents([atom_markers[ai]]);
            let opposite = DesignAtom {
                fluent: atom.fluent,
                polarity: match atom.polarity {
                    Polarity::Add => Polarity::Remove,
                    Polarity::Remove => Polarity::Add,
                },
            };
            if let Some(oi) = dp.universe.iter().position(|u| *u == opposite) {
                pre_neg.insert(atom_markers[oi]);
            }
            let mut add = State::from_fluents([consumed_tokens[step], atom_markers[ai]]);
            let mut del = State::from_fluents([step_tokens[step]]);
            let hcopy = compiled.layout.human_copy(atom.fluent);
            match atom.polarity {
                Polarity::Add => {
                    add.insert(atom.fluent);
                    add.insert(hcopy);
                }
                Polarity::Remove => {
                    del.insert(atom.fluent);
                    del.insert(hcopy);
                }
            }
            compiled.model.actions.push(GroundAction {
                name: format!(
                    "design_s{}_{}_{}",
                    step + 1,
                    match atom.polarity {
                        Polarity::Add => "add",
                        Polarity::Remove => "del",
                    },
                    crate::compile::mangle(dp.robot.fluent_name(atom.fluent)),
                ),
                pre_pos,
                pre_neg,
                add,
                del,
                when_effects: Vec::new(),
                cost: 0,
            });
            compiled.action_roles.push(ActionRole::DesignApply {
                atom: ai as u32,
                step: step as u32,
            });
        }
    }

    // Phase-closing action: requires every step consumed, hands control
    // to the human phase, and deletes unseen_design when the chosen
    // markers match a previously found design exactly.
    let mut pre_pos = State::from_fluents([design_allowed]);
    for &t in &consumed_tokens {
        pre_pos.insert(t);
    }
    let mut add = State::from_fluents([compiled.layout.human_token]);
    if ordering == PhaseOrdering::Flattened {
        add.insert(compiled.layout.robot_token);
    }
    let completed_action = ActionId(compiled.model.actions.len() as u32);
    compiled.model.actions.push(GroundAction {
        name: "design_completed".to_string(),
        pre_pos,
        pre_neg: State::empty(),
        add,
        del: State::from_fluents([design_allowed]),
        when_effects: exclusion_effects(&dp.universe, &atom_markers, unseen_design, found)?,
        cost: 0,
    });
    compiled.action_roles.push(ActionRole::DesignCompleted);

    compiled.design = Some(DesignLayout {
        design_allowed,
        unseen_design,
        step_tokens,
        consumed_tokens,
        atom_markers,
        atoms: dp.universe.clone(),
        tau,
        completed_action,
    });
    debug_assert!(compiled.model.check_invariants().is_ok());
    Ok(compiled)
}

fn exclusion_effects(
    universe: &[DesignAtom],
    atom_markers: &[FluentId],
    unseen_design: FluentId,
    found: &[Design],
) -> Result<Vec<ConditionalEffect>, DesignError> {
    let mut effects = Vec::new();
    for design in found {
        if design.atoms.is_empty() {
            return Err(DesignError::EmptyFoundDesign);
        }
        let mut when_pos = State::empty();
        for atom in &design.atoms {
            let idx = universe
                .iter()
                .position(|u| u == atom)
                .ok_or(DesignError::UnknownAtom)?;
            when_pos.insert(atom_markers[idx]);
        }
        effects.push(ConditionalEffect {
            when_pos,
            when_neg: State::empty(),
            add: State::empty(),
            del: State::from_fluents([unseen_design]),
        });
    }
    Ok(effects)
}

/// Regenerates the exclusion effects of `design_completed` from a new
/// found set, leaving the rest of the model untouched.
pub fn exclude_designs(
    compiled: &CompiledModel,
    found: &[Design],
) -> Result<CompiledModel, DesignError> {
    let layout = compiled
        .design
        .as_ref()
        .expect("exclude_designs requires a design compilation");
    let mut out = compiled.clone();
    let effects = exclusion_effects(
        &layout.atoms,
        &layout.atom_markers,
        layout.unseen_design,
        found,
    )?;
    out.model.actions[layout.completed_action.index()].when_effects = effects;
    Ok(out)
}

/// Reads the applied design off a valid plan of a design compilation.
pub fn extract_design(compiled: &CompiledModel, plan: &Plan) -> Result<Design, DesignError> {
    let layout = compiled
        .design
        .as_ref()
        .expect("extract_design requires a design compilation");
    let decomp = crate::compile::decompose_plan(compiled, plan)
        .map_err(|_| DesignError::UnknownAtom)?;
    let atoms: Vec<DesignAtom> = decomp
        .design_atoms
        .iter()
        .map(|&i| layout.atoms[i as usize])
        .collect();
    debug_assert_eq!(atoms.len(), layout.tau as usize);
    Design::unit(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gated_action_pair, missing_init_pair, unavoidable_mismatch_pair};
    use crate::search::{prove_unsolvable, SolveBudget, Unsolvability};

    fn budget() -> SolveBudget {
        SolveBudget::default()
    }

    #[test]
    fn apply_design_examples() {
        let (robot, _) = gated_action_pair();
        let enabler = robot.fluent_id("enabler").unwrap();
        let removed = apply_design(
            &robot,
            &Design::unit([DesignAtom::remove(enabler)]).unwrap(),
        );
        assert!(!removed.init.contains(enabler));
        // Empty design: identity.
        assert_eq!(apply_design(&robot, &Design::empty()).init, robot.init);
        // Adding a present fluent: unchanged.
        let added = apply_design(&robot, &Design::unit([DesignAtom::add(enabler)]).unwrap());
        assert_eq!(added.init, robot.init);
    }

    #[test]
    fn conflicting_atoms_rejected() {
        let f = crate::state::FluentId(0);
        let err = Design::unit([DesignAtom::add(f), DesignAtom::remove(f)]);
        assert_eq!(err, Err(DesignError::ConflictingAtoms { fluent: 0 }));
    }

    fn missing_init_problem() -> DesignProblem {
        let (robot, human) = missing_init_pair();
        let resource = robot.fluent_id("resource").unwrap();
        DesignProblem::unit(robot, human, vec![DesignAtom::add(resource)], 0, 0)
    }

    #[test]
    fn design_model_finds_the_restoring_atom() {
        let dp = missing_init_problem();
        let compiled = build_design_model(&dp, 1, &[], 0, PhaseOrdering::Ordered).unwrap();
        match prove_unsolvable(&compiled, &budget()).verdict {
            Unsolvability::Solvable(plan) => {
                let design = extract_design(&compiled, &plan).unwrap();
                assert_eq!(design.size(), 1);
                let atom = *design.atoms.iter().next().unwrap();
                assert_eq!(atom, dp.universe[0]);
            }
            other => panic!("expected solvable, got {other:?}"),
        }
    }

    #[test]
    fn excluding_the_only_design_makes_it_unsolvable() {
        let dp = missing_init_problem();
        let found = vec![Design::unit([dp.universe[0]]).unwrap()];
        let compiled = build_design_model(&dp, 1, &found, 0, PhaseOrdering::Ordered).unwrap();
        assert_eq!(
            prove_unsolvable(&compiled, &budget()).verdict,
            Unsolvability::Unsolvable
        );
    }

    #[test]
    fn exclude_designs_regenerates_effects() {
        let dp = missing_init_problem();
        let compiled = build_design_model(&dp, 1, &[], 0, PhaseOrdering::Ordered).unwrap();
        let found = vec![Design::unit([dp.universe[0]]).unwrap()];
        let excluded = exclude_designs(&compiled, &found).unwrap();
        assert_eq!(
            prove_unsolvable(&excluded, &budget()).verdict,
            Unsolvability::Unsolvable
        );
    }

    #[test]
    fn budgeted_disagreement_allows_the_unavoidable_mismatch() {
        let (robot, human) = unavoidable_mismatch_pair();
        let enabler = robot.fluent_id("enabler").unwrap();
        let dp = DesignProblem::unit(
            robot,
            human,
            vec![DesignAtom::remove(enabler)],
            1,
            1,
        );
        // With no disagreement budget there is no design at all.
        let strict = build_design_model(&dp, 1, &[], 0, PhaseOrdering::Ordered).unwrap();
        assert_eq!(
            prove_unsolvable(&strict, &budget()).verdict,
            Unsolvability::Unsolvable
        );
        // One budget token admits exactly the marker mismatch.
        let relaxed = build_design_model(&dp, 1, &[], 1, PhaseOrdering::Ordered).unwrap();
        match prove_unsolvable(&relaxed, &budget()).verdict {
            Unsolvability::Solvable(plan) => {
                let design = extract_design(&relaxed, &plan).unwrap();
                assert_eq!(design.size(), 1);
            }
            other => panic!("expected solvable, got {other:?}"),
        }
    }

    #[test]
    fn tau_bounds_are_enforced() {
        let dp = missing_init_problem();
        assert_eq!(
            build_design_model(&dp, 0, &[], 0, PhaseOrdering::Ordered).unwrap_err(),
            DesignError::TauZero
        );
        assert_eq!(
            build_design_model(&dp, 2, &[], 0, PhaseOrdering::Ordered).unwrap_err(),
            DesignError::TauExceedsUniverse { tau: 2, universe: 1 }
        );
    }

    #[test]
    fn validate_flags_vacuous_atoms() {
        let (robot, human) = missing_init_pair();
        let spare = robot.fluent_id("spare").unwrap();
        let dp = DesignProblem::unit(
            robot,
            human,
            vec![DesignAtom::remove(spare)],
            0,
            0,
        );
        let warnings = dp.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("no-op"));
    }

    #[test]
    fn exclusion_leaves_other_designs_reachable() {
        // Two interchangeable atoms over identical models: excluding
        // one design must surface the other, excluding both must
        // exhaust the level.
        let build = |name: &str| {
            let mut b = crate::model::ModelBuilder::new(name);
            let s = b.fluent("start");
            let g = b.fluent("goal");
            b.fluent("pad1");
            b.fluent("pad2");
            b.action("go").pre([s]).add([g]).done();
            b.init([s]);
            b.goal([g]);
            b.build().unwrap()
        };
        let robot = build("r");
        let human = build("h");
        let pad1 = DesignAtom::add(robot.fluent_id("pad1").unwrap());
        let pad2 = DesignAtom::add(robot.fluent_id("pad2").unwrap());
        let dp = DesignProblem::unit(robot, human, vec![pad1, pad2], 0, 0);

        let first = build_design_model(&dp, 1, &[], 0, PhaseOrdering::Ordered).unwrap();
        let plan = match prove_unsolvable(&first, &budget()).verdict {
            Unsolvability::Solvable(plan) => plan,
            other => panic!("{other:?}"),
        };
        let found1 = extract_design(&first, &plan).unwrap();

        let second =
            build_design_model(&dp, 1, std::slice::from_ref(&found1), 0, PhaseOrdering::Ordered)
                .unwrap();
        let plan = match prove_unsolvable(&second, &budget()).verdict {
            Unsolvability::Solvable(plan) => plan,
            other => panic!("{other:?}"),
        };
        let found2 = extract_design(&second, &plan).unwrap();
        assert_ne!(found1.atoms, found2.atoms);

        let exhausted =
            build_design_model(&dp, 1, &[found1, found2], 0, PhaseOrdering::Ordered).unwrap();
        assert_eq!(
            prove_unsolvable(&exhausted, &budget()).verdict,
            Unsolvability::Unsolvable
        );
    }

    #[test]
    fn disabling_design_drives_the_upper_bound_to_zero() {
        use crate::compile::{build_forced_disagreement, CostScheme};
        let (robot, human) = gated_action_pair();
        let enabler = robot.fluent_id("enabler").unwrap();
        let design = Design::unit([DesignAtom::remove(enabler)]).unwrap();
        let dr = apply_design(&robot, &design);
        let dh = apply_design(&human, &design);
        let compiled =
            build_joint_model(&dr, &dh, CostScheme::upper(), PhaseOrdering::Ordered).unwrap();
        let forced = build_forced_disagreement(&compiled);
        assert_eq!(
            prove_unsolvable(&forced, &budget()).verdict,
            Unsolvability::Unsolvable
        );
    }

    #[test]
    fn step_permutations_extract_the_same_design() {
        // Two atoms over two steps: whichever step order the planner
        // picks, the extracted design is the same set.
        let (robot, human) = missing_init_pair();
        let resource = robot.fluent_id("resource").unwrap();
        let spare = robot.fluent_id("spare").unwrap();
        let dp = DesignProblem::unit(
            robot.clone(),
            human,
            vec![DesignAtom::add(resource), DesignAtom::add(spare)],
            0,
            0,
        );
        let compiled = build_design_model(&dp, 2, &[], 0, PhaseOrdering::Ordered).unwrap();
        let plan = match prove_unsolvable(&compiled, &budget()).verdict {
            Unsolvability::Solvable(plan) => plan,
            other => panic!("expected solvable, got {other:?}"),
        };
        let design = extract_design(&compiled, &plan).unwrap();
        // Swap the two design steps in the plan prefix.
        let mut swapped_actions = plan.actions.clone();
        swapped_actions.swap(0, 1);
        // Map each action to the same atom at the other step.
        let remapped: Vec<_> = swapped_actions
            .iter()
            .enumerate()
            .map(|(pos, &aid)| {
                match compiled.action_roles[aid.index()] {
                    ActionRole::DesignApply { atom, .. } if pos < 2 => {
                        // find the action for (atom, step=pos)
                        compiled
                            .action_roles
                            .iter()
                            .position(|r| {
                                matches!(r, ActionRole::DesignApply { atom: a, step: s }
                                    if *a == atom && *s == pos as u32)
                            })
                            .map(|i| ActionId(i as u32))
                            .unwrap()
                    }
                    _ => aid,
                }
            })
            .collect();
        let swapped = Plan::new(&compiled.model, remapped);
        let design2 = extract_design(&compiled, &swapped).unwrap();
        assert_eq!(design.atoms, design2.atoms);
    }
}
