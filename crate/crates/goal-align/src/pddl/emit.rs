//! Printing grounded (and compiled) models back to PDDL: one 0-ary
//! predicate per fluent, one parameterless action per ground action,
//! costs under the action-costs metric. Round-trips through the parser
//! and grounder up to identifier renaming.

use crate::model::GroundedModel;
use crate::state::State;
use std::collections::HashSet;
use std::fmt::Write;

/// PDDL-safe rendering of a fluent or action name: alphanumerics,
/// hyphens and underscores survive, everything else becomes `_`.
pub fn mangle(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'x');
    }
    out
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for name in names {
        let base = mangle(name);
        let mut candidate = base.clone();
        let mut suffix = 2;
        while !seen.insert(candidate.clone()) {
            candidate = format!("{base}-{suffix}");
            suffix += 1;
        }
        out.push(candidate);
    }
    out
}

/// The emitted predicate name of each fluent, in fluent order.
/// Deterministic, collision-free; used to decode external plans.
pub fn emitted_fluent_names(model: &GroundedModel) -> Vec<String> {
    unique_names(model.fluents.iter().map(|s| s.as_str()))
}

/// The emitted action name of each ground action, in action order.
pub fn emitted_action_names(model: &GroundedModel) -> Vec<String> {
    unique_names(model.actions.iter().map(|a| a.name.as_str()))
}

/// Prints a grounded model as `(domain text, problem text)`.
pub fn emit_pddl(model: &GroundedModel) -> (String, String) {
    let fluent_names = emitted_fluent_names(model);
    let action_names = emitted_action_names(model);
    let name = mangle(&model.name);

    let atoms = |s: &State| -> String {
        s.iter()
            .map(|f| format!("({})", fluent_names[f.index()]))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let uses_negative = model.actions.iter().any(|a| {
        !a.pre_neg.is_empty() || a.when_effects.iter().any(|ce| !ce.when_neg.is_empty())
    });
    let uses_conditional = model.actions.iter().any(|a| !a.when_effects.is_empty());

    let mut domain = String::new();
    let _ = writeln!(domain, "(define (domain {name})");
    let mut reqs = vec![":strips"];
    if uses_negative {
        reqs.push(":negative-preconditions");
    }
    reqs.push(":action-costs");
    if uses_conditional {
        reqs.push(":conditional-effects");
    }
    let _ = writeln!(domain, "  (:requirements {})", reqs.join(" "));
    let _ = writeln!(domain, "  (:predicates");
    for pname in &fluent_names {
        let _ = writeln!(domain, "    ({pname})");
    }
    let _ = writeln!(domain, "  )");
    let _ = writeln!(domain, "  (:functions (total-cost))");
    for (i, action) in model.actions.iter().enumerate() {
        let _ = writeln!(domain, "  (:action {}", action_names[i]);
        let _ = writeln!(domain, "    :parameters ()");
        let mut pre_parts: Vec<String> = Vec::new();
        for f in action.pre_pos.iter() {
            pre_parts.push(format!("({})", fluent_names[f.index()]));
        }
        for f in action.pre_neg.iter() {
            pre_parts.push(format!("(not ({}))", fluent_names[f.index()]));
        }
        if !pre_parts.is_empty() {
            let _ = writeln!(domain, "    :precondition (and {})", pre_parts.join(" "));
        }
        let mut eff_parts: Vec<String> = Vec::new();
        for f in action.add.iter() {
            eff_parts.push(format!("({})", fluent_names[f.index()]));
        }
        for f in action.del.iter() {
            eff_parts.push(format!("(not ({}))", fluent_names[f.index()]));
        }
        for ce in &action.when_effects {
            let mut cond: Vec<String> = Vec::new();
            for f in ce.when_pos.iter() {
                cond.push(format!("({})", fluent_names[f.index()]));
            }
            for f in ce.when_neg.iter() {
                cond.push(format!("(not ({}))", fluent_names[f.index()]));
            }
            let mut sub: Vec<String> = Vec::new();
            for f in ce.add.iter() {
                sub.push(format!("({})", fluent_names[f.index()]));
            }
            for f in ce.del.iter() {
                sub.push(format!("(not ({}))", fluent_names[f.index()]));
            }
            eff_parts.push(format!(
                "(when (and {}) (and {}))",
                cond.join(" "),
                sub.join(" ")
            ));
        }
        eff_parts.push(format!("(increase (total-cost) {})", action.cost));
        let _ = writeln!(domain, "    :effect (and {})", eff_parts.join(" "));
        let _ = writeln!(domain, "  )");
    }
    let _ = writeln!(domain, ")");

    let mut problem = String::new();
    let _ = writeln!(problem, "(define (problem {name})");
    let _ = writeln!(problem, "  (:domain {name})");
    let _ = writeln!(problem, "  (:objects)");
    let init_atoms = atoms(&model.init);
    if init_atoms.is_empty() {
        let _ = writeln!(problem, "  (:init (= (total-cost) 0))");
    } else {
        let _ = writeln!(problem, "  (:init {init_atoms} (= (total-cost) 0))");
    }
    let _ = writeln!(problem, "  (:goal (and {}))", atoms(&model.goal));
    let _ = writeln!(problem, "  (:metric minimize (total-cost))");
    let _ = writeln!(problem, ")");

    (domain, problem)
}
