//! Grounding: instantiate action schemas over type-compatible object
//! tuples, producing a [`GroundedModel`] with lexicographically sorted,
//! deterministic fluent and action identifiers.

use super::{DomainAst, GroundAtom, LiteralTemplate, ProblemAst, Term, TypedName};
use crate::model::{ConditionalEffect, GroundAction, GroundedModel};
use crate::state::{FluentId, State};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("problem is for domain `{expected}`, got `{found}`")]
    DomainMismatch { expected: String, found: String },
    #[error("object `{object}` has undeclared type `{ty}`")]
    UnknownObjectType { object: String, ty: String },
    #[error("{place} uses undeclared predicate `{pred}`")]
    UnknownPredicate { place: String, pred: String },
    #[error("{place}: predicate `{pred}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        place: String,
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("{place} references undeclared object `{object}`")]
    UnknownObject { place: String, object: String },
    #[error("{place}: object `{object}` does not fit the type of predicate `{pred}`")]
    BadAtomType {
        place: String,
        pred: String,
        object: String,
    },
    #[error("the two problems declare different object lists")]
    ObjectMismatch,
}

#[derive(Clone, Copy, Debug)]
pub struct GroundOptions {
    /// Drop actions whose positive preconditions contain an atom that is
    /// neither initially true nor added by any action.
    pub prune_statically_false: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            prune_statically_false: true,
        }
    }
}

struct TypeTable {
    parent: HashMap<String, String>,
}

impl TypeTable {
    fn new(types: &[TypedName]) -> TypeTable {
        let mut parent = HashMap::new();
        for t in types {
            parent.insert(t.name.clone(), t.ty.clone());
        }
        // Names used only as parents are implicit root-level types.
        for t in types {
            if t.ty != "object" && !parent.contains_key(&t.ty) {
                parent.insert(t.ty.clone(), "object".to_string());
            }
        }
        TypeTable { parent }
    }

    fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == "object" || ty == ancestor {
            return true;
        }
        let mut cur = ty;
        while let Some(p) = self.parent.get(cur) {
            if p == ancestor {
                return true;
            }
            if p == "object" {
                return false;
            }
            cur = p;
        }
        false
    }

    fn exists(&self, ty: &str) -> bool {
        ty == "object" || self.parent.contains_key(ty)
    }
}

/// Grounds one problem against its domain.
pub fn ground(
    domain: &DomainAst,
    problem: &ProblemAst,
    options: &GroundOptions,
) -> Result<GroundedModel, GroundError> {
    ground_with_static_init(domain, problem, options, None)
}

/// Like [`ground`], but the static-falsity analysis additionally treats
/// `achievable` atoms as initially true. Required when the initial
/// state may later be edited by designs: an atom a design can add must
/// not count as statically false, or actions gated on it would be
/// pruned out of the designed models too.
pub fn ground_with_achievable(
    domain: &DomainAst,
    problem: &ProblemAst,
    options: &GroundOptions,
    achievable: &[GroundAtom],
) -> Result<GroundedModel, GroundError> {
    let augmented: Vec<GroundAtom> = problem
        .init
        .iter()
        .chain(achievable)
        .cloned()
        .collect();
    ground_with_static_init(domain, problem, options, Some(&augmented))
}

/// Grounds a robot/human problem pair over the same objects into models
/// sharing one fluent table and one action table; static-falsity
/// analysis runs against the union of the two initial states so pruning
/// is sound for both.
pub fn ground_pair(
    domain: &DomainAst,
    robot: &ProblemAst,
    human: &ProblemAst,
    options: &GroundOptions,
) -> Result<(GroundedModel, GroundedModel), GroundError> {
    ground_pair_with_achievable(domain, robot, human, options, &[])
}

/// [`ground_pair`] with extra assumed-achievable atoms, for pairs whose
/// initial states a design universe may extend.
pub fn ground_pair_with_achievable(
    domain: &DomainAst,
    robot: &ProblemAst,
    human: &ProblemAst,
    options: &GroundOptions,
    achievable: &[GroundAtom],
) -> Result<(GroundedModel, GroundedModel), GroundError> {
    if robot.objects != human.objects {
        return Err(GroundError::ObjectMismatch);
    }
    let union_init: Vec<GroundAtom> = robot
        .init
        .iter()
        .chain(&human.init)
        .chain(achievable)
        .cloned()
        .collect();
    let mr = ground_with_static_init(domain, robot, options, Some(&union_init))?;
    let mh = ground_with_static_init(domain, human, options, Some(&union_init))?;
    debug_assert_eq!(mr.fluents, mh.fluents);
    Ok((mr, mh))
}

fn ground_with_static_init(
    domain: &DomainAst,
    problem: &ProblemAst,
    options: &GroundOptions,
    static_init: Option<&[GroundAtom]>,
) -> Result<GroundedModel, GroundError> {
    if domain.name != problem.domain {
        return Err(GroundError::DomainMismatch {
            expected: problem.domain.clone(),
            found: domain.name.clone(),
        });
    }
    let types = TypeTable::new(&domain.types);
    for obj in &problem.objects {
        if !types.exists(&obj.ty) {
            return Err(GroundError::UnknownObjectType {
                object: obj.name.clone(),
                ty: obj.ty.clone(),
            });
        }
    }
    let object_type: HashMap<&str, &str> = problem
        .objects
        .iter()
        .map(|o| (o.name.as_str(), o.ty.as_str()))
        .collect();

    // The fluent table: every type-compatible atom, sorted by name.
    let mut atom_names: Vec<String> = Vec::new();
    for pred in &domain.predicates {
        let candidates: Vec<Vec<&str>> = pred
            .params
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|o| types.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut tuple: Vec<&str> = Vec::new();
        enumerate_tuples(&candidates, &mut tuple, &mut |tuple| {
            let atom = GroundAtom {
                pred: pred.name.clone(),
                args: tuple.iter().map(|s| s.to_string()).collect(),
            };
            atom_names.push(atom.render());
        });
    }
    atom_names.sort();
    atom_names.dedup();
    let atom_ids: HashMap<&str, FluentId> = atom_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), FluentId(i as u32)))
        .collect();

    let lookup_ground = |place: &str, atom: &GroundAtom| -> Result<FluentId, GroundError> {
        let pred = domain
            .predicates
            .iter()
            .find(|p| p.name == atom.pred)
            .ok_or_else(|| GroundError::UnknownPredicate {
                place: place.to_string(),
                pred: atom.pred.clone(),
            })?;
        if pred.params.len() != atom.args.len() {
            return Err(GroundError::ArityMismatch {
                place: place.to_string(),
                pred: atom.pred.clone(),
                expected: pred.params.len(),
                found: atom.args.len(),
            });
        }
        for (arg, param) in atom.args.iter().zip(&pred.params) {
            let ty = object_type
                .get(arg.as_str())
                .ok_or_else(|| GroundError::UnknownObject {
                    place: place.to_string(),
                    object: arg.clone(),
                })?;
            if !types.is_subtype(ty, &param.ty) {
                return Err(GroundError::BadAtomType {
                    place: place.to_string(),
                    pred: atom.pred.clone(),
                    object: arg.clone(),
                });
            }
        }
        Ok(atom_ids[atom.render().as_str()])
    };

    let mut init = State::empty();
    for atom in &problem.init {
        init.insert(lookup_ground("init", atom)?);
    }
    let mut goal = State::empty();
    for atom in &problem.goal {
        goal.insert(lookup_ground("goal", atom)?);
    }

    // Instantiate schemas over type-compatible tuples.
    let default_cost = domain.default_action_cost();
    let mut actions: Vec<GroundAction> = Vec::new();
    for schema in &domain.schemas {
        let candidates: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|o| types.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut tuple: Vec<&str> = Vec::new();
        enumerate_tuples(&candidates, &mut tuple, &mut |tuple| {
            let binding: HashMap<&str, &str> = schema
                .params
                .iter()
                .map(|p| p.name.as_str())
                .zip(tuple.iter().copied())
                .collect();
            if let Some(action) =
                instantiate(schema, &binding, &atom_ids, default_cost)
            {
                actions.push(action);
            }
        });
    }
    actions.sort_by(|a, b| a.name.cmp(&b.name));

    if options.prune_statically_false {
        let mut achievable = State::empty();
        match static_init {
            Some(atoms) => {
                for atom in atoms {
                    achievable.insert(lookup_ground("init", atom)?);
                }
            }
            None => achievable.union_with(&init),
        }
        for action in &actions {
            achievable.union_with(&action.add);
            for ce in &action.when_effects {
                achievable.union_with(&ce.add);
            }
        }
        actions.retain(|a| a.pre_pos.iter().all(|f| achievable.contains(f)));
    }

    let model = GroundedModel {
        name: problem.name.clone(),
        fluents: atom_names,
        actions,
        init,
        goal,
    };
    debug_assert!(model.check_invariants().is_ok());
    Ok(model)
}

fn enumerate_tuples<'a>(
    candidates: &[Vec<&'a str>],
    tuple: &mut Vec<&'a str>,
    visit: &mut impl FnMut(&[&'a str]),
) {
    if tuple.len() == candidates.len() {
        visit(tuple);
        return;
    }
    let depth = tuple.len();
    for &obj in &candidates[depth] {
        tuple.push(obj);
        enumerate_tuples(candidates, tuple, visit);
        tuple.pop();
    }
}

/// Instantiates one schema binding. Returns `None` when the binding is
/// statically impossible: violated equality constraints, overlapping
/// positive/negative preconditions, or a precondition atom outside the
/// typed atom universe.
fn instantiate(
    schema: &super::ActionSchema,
    binding: &HashMap<&str, &str>,
    atom_ids: &HashMap<&str, FluentId>,
    default_cost: u64,
) -> Option<GroundAction> {
    let resolve_term = |t: &Term| -> String {
        match t {
            Term::Var(v) => binding[v.as_str()].to_string(),
            Term::Const(c) => c.clone(),
        }
    };
    for (left, right, must_equal) in &schema.equalities {
        if (resolve_term(left) == resolve_term(right)) != *must_equal {
            return None;
        }
    }
    let resolve_lit = |lit: &LiteralTemplate| -> Option<FluentId> {
        let rendered = if lit.args.is_empty() {
            lit.pred.clone()
        } else {
            let args: Vec<String> = lit.args.iter().map(resolve_term).collect();
            format!("{} {}", lit.pred, args.join(" "))
        };
        atom_ids.get(rendered.as_str()).copied()
    };

    let mut pre_pos = State::empty();
    for lit in &schema.pre_pos {
        pre_pos.insert(resolve_lit(lit)?); // untyped atom: never executable
    }
    let mut pre_neg = State::empty();
    for lit in &schema.pre_neg {
        if let Some(f) = resolve_lit(lit) {
            pre_neg.insert(f); // untyped atoms are never true: drop
        }
    }
    if !pre_pos.is_disjoint(&pre_neg) {
        return None; // contradictory precondition
    }
    let mut add = State::empty();
    for lit in &schema.add {
        add.insert(resolve_lit(lit)?);
    }
    let mut del = State::empty();
    for lit in &schema.del {
        del.insert(resolve_lit(lit)?);
    }
    // Delete-wins normalization, matching the transition function
    // (s ∪ add) \ del; classic domains produce such overlaps at
    // repeated-parameter instantiations.
    add.subtract(&del);

    let mut when_effects = Vec::new();
    'effects: for when in &schema.when_effects {
        let mut when_pos = State::empty();
        for lit in &when.when_pos {
            match resolve_lit(lit) {
                Some(f) => when_pos.insert(f),
                None => continue 'effects, // condition never true
            }
        }
        let mut when_neg = State::empty();
        for lit in &when.when_neg {
            if let Some(f) = resolve_lit(lit) {
                when_neg.insert(f);
            }
        }
        let mut cadd = State::empty();
        for lit in &when.add {
            match resolve_lit(lit) {
                Some(f) => cadd.insert(f),
                None => continue 'effects,
            }
        }
        let mut cdel = State::empty();
        for lit in &when.del {
            match resolve_lit(lit) {
                Some(f) => cdel.insert(f),
                None => continue 'effects,
            }
        }
        cadd.subtract(&cdel);
        when_effects.push(ConditionalEffect {
            when_pos,
            when_neg,
            add: cadd,
            del: cdel,
        });
    }

    let name = if schema.params.is_empty() {
        schema.name.clone()
    } else {
        let args: Vec<&str> = schema
            .params
            .iter()
            .map(|p| binding[p.name.as_str()])
            .collect();
        format!("{} {}", schema.name, args.join(" "))
    };
    Some(GroundAction {
        name,
        pre_pos,
        pre_neg,
        add,
        del,
        when_effects,
        cost: schema.cost.unwrap_or(default_cost),
    })
}
