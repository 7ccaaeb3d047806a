//! PDDL front-end: a STRIPS-fragment parser (typing, negative
//! preconditions, action costs, conditional effects, equality), a
//! grounder producing [`GroundedModel`]s with deterministic identifier
//! assignment, and a printer that round-trips grounded and compiled
//! models for external planners.

mod emit;
mod ground;
mod lexer;
mod parser;

pub use emit::{emit_pddl, emitted_action_names, emitted_fluent_names, mangle};
pub use ground::{
    ground, ground_pair, ground_pair_with_achievable, ground_with_achievable, GroundError,
    GroundOptions,
};
pub use parser::{parse_atom_list, parse_domain, parse_problem};

use crate::model::GroundedModel;
use std::collections::BTreeSet;
use std::fmt;

/// The requirement flags this front-end supports; anything else is
/// rejected at parse time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    ActionCosts,
    ConditionalEffects,
    Equality,
}

impl Requirement {
    pub fn from_flag(flag: &str) -> Option<Requirement> {
        match flag {
            ":strips" => Some(Requirement::Strips),
            ":typing" => Some(Requirement::Typing),
            ":negative-preconditions" => Some(Requirement::NegativePreconditions),
            ":action-costs" => Some(Requirement::ActionCosts),
            ":conditional-effects" => Some(Requirement::ConditionalEffects),
            ":equality" => Some(Requirement::Equality),
            _ => None,
        }
    }

    pub fn flag(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::ActionCosts => ":action-costs",
            Requirement::ConditionalEffects => ":conditional-effects",
            Requirement::Equality => ":equality",
        }
    }
}

/// A name with its declared type (`object` when untyped).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

/// A schema argument: a parameter variable or a constant object name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiteralTemplate {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhenTemplate {
    pub when_pos: Vec<LiteralTemplate>,
    pub when_neg: Vec<LiteralTemplate>,
    pub add: Vec<LiteralTemplate>,
    pub del: Vec<LiteralTemplate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre_pos: Vec<LiteralTemplate>,
    pub pre_neg: Vec<LiteralTemplate>,
    /// Equality constraints `(= a b)` / `(not (= a b))` as
    /// `(left, right, must_equal)`; resolved statically at grounding.
    pub equalities: Vec<(Term, Term, bool)>,
    pub add: Vec<LiteralTemplate>,
    pub del: Vec<LiteralTemplate>,
    pub when_effects: Vec<WhenTemplate>,
    /// Declared `(increase (total-cost) n)`, when present.
    pub cost: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: BTreeSet<Requirement>,
    /// Declared types with their parents; `object` is the implicit root.
    pub types: Vec<TypedName>,
    pub predicates: Vec<PredicateDef>,
    /// True when `(:functions (total-cost))` was declared.
    pub uses_total_cost: bool,
    pub schemas: Vec<ActionSchema>,
}

impl DomainAst {
    /// Unit cost per action when no cost metric is declared, else the
    /// declared `(increase (total-cost) n)` with 0 for silent actions.
    pub fn default_action_cost(&self) -> u64 {
        let costed =
            self.uses_total_cost || self.requirements.contains(&Requirement::ActionCosts);
        u64::from(!costed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    /// Canonical fluent-name rendering: `pred arg1 arg2`.
    pub fn render(&self) -> String {
        if self.args.is_empty() {
            self.pred.clone()
        } else {
            format!("{} {}", self.pred, self.args.join(" "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

/// Parse failure with source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Looks up a fluent by its atom text, with or without parentheses.
pub fn fluent_by_atom(model: &GroundedModel, text: &str) -> Option<crate::state::FluentId> {
    let trimmed = text.trim().trim_start_matches('(').trim_end_matches(')');
    let normalized = trimmed.split_whitespace().collect::<Vec<_>>().join(" ");
    model.fluent_id(&normalized.to_lowercase())
}
