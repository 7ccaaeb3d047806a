//! Escape hatch to an external PDDL planner.
//!
//! Contract: the planner executable is invoked as
//! `<command> <domain.pddl> <problem.pddl> <plan-output>` and, on
//! success, writes a plan file with one action name per line
//! (parentheses and `;` comments tolerated). Action names follow the
//! emitted-name conventions, so plans decode back to action ids and,
//! for compiled models, through the role prefixes to a decomposition.
//! A nonzero exit status means "no plan found here" and callers fall
//! back to the in-process engines.

use crate::model::{ActionId, GroundedModel, Plan};
use crate::pddl::{emit_pddl, emitted_action_names};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use thiserror::Error;

/// Environment variable naming the external planner executable.
pub const PLANNER_ENV_VAR: &str = "GOAL_ALIGN_PLANNER";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("failed to run external planner `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("could not write planner workspace: {0}")]
    Io(#[from] std::io::Error),
    #[error("plan line {line} names unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
}

#[derive(Clone, Debug)]
pub struct ExternalPlanner {
    pub command: PathBuf,
}

impl ExternalPlanner {
    pub fn new(command: impl Into<PathBuf>) -> ExternalPlanner {
        ExternalPlanner {
            command: command.into(),
        }
    }

    /// Reads [`PLANNER_ENV_VAR`]; `None` when unset or empty.
    pub fn from_env() -> Option<ExternalPlanner> {
        match std::env::var(PLANNER_ENV_VAR) {
            Ok(cmd) if !cmd.trim().is_empty() => Some(ExternalPlanner::new(cmd)),
            _ => None,
        }
    }

    /// Emits the model into `workdir`, runs the planner, and decodes
    /// the plan file. `Ok(None)` when the planner exits nonzero or
    /// writes no plan.
    pub fn solve(
        &self,
        model: &GroundedModel,
        workdir: &Path,
    ) -> Result<Option<Plan>, ExternalError> {
        std::fs::create_dir_all(workdir)?;
        let (domain_text, problem_text) = emit_pddl(model);
        let domain_path = workdir.join("domain.pddl");
        let problem_path = workdir.join("problem.pddl");
        let plan_path = workdir.join("plan.txt");
        std::fs::write(&domain_path, domain_text)?;
        std::fs::write(&problem_path, problem_text)?;
        let _ = std::fs::remove_file(&plan_path);

        let status = Command::new(&self.command)
            .arg(&domain_path)
            .arg(&problem_path)
            .arg(&plan_path)
            .status()
            .map_err(|source| ExternalError::Spawn {
                command: self.command.display().to_string(),
                source,
            })?;
        if !status.success() || !plan_path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&plan_path)?;
        parse_plan_file(&text, model).map(Some)
    }
}

/// Decodes a "one action name per line" plan file against a model's
/// emitted action names.
pub fn parse_plan_file(text: &str, model: &GroundedModel) -> Result<Plan, ExternalError> {
    let names = emitted_action_names(model);
    let by_name: HashMap<&str, ActionId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), ActionId(i as u32)))
        .collect();
    let mut actions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let name = line
            .trim_start_matches('(')
            .trim_end_matches(')')
            .trim()
            .to_lowercase();
        // Some planners append per-step costs after the name.
        let name = name.split_whitespace().next().unwrap_or("").to_string();
        match by_name.get(name.as_str()) {
            Some(&a) => actions.push(a),
            None => {
                return Err(ExternalError::UnknownAction {
                    line: lineno + 1,
                    name,
                })
            }
        }
    }
    Ok(Plan::new(model, actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::identical_chain_pair;

    #[test]
    fn plan_file_round_trip() {
        let (m, _) = identical_chain_pair();
        let names = emitted_action_names(&m);
        let text = format!("; found by someone else\n({})\n{}  ; step 2\n", names[0], names[1]);
        let plan = parse_plan_file(&text, &m).unwrap();
        assert!(m.validate_plan(&plan).is_valid());
    }

    #[test]
    fn unknown_action_is_reported_with_line() {
        let (m, _) = identical_chain_pair();
        let err = parse_plan_file("nonsense\n", &m).unwrap_err();
        match err {
            ExternalError::UnknownAction { line, name } => {
                assert_eq!(line, 1);
                assert_eq!(name, "nonsense");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
