//! Bounds on human-robot goal-state divergence and minimal environment
//! designs, computed through classical planning compilations.
//!
//! A robot and a human hold (possibly different) STRIPS models of the
//! same task. Any valid plan pair ends in a pair of goal states; the
//! size of their symmetric difference is the goal-state divergence. This
//! crate computes the extremes of that divergence over all plan pairs
//! (or only cost-optimal ones) by compiling both models into a single
//! planning problem, and searches for a cheapest set of initial-state
//! edits that drives the extremes below given thresholds.
//!
//! The pieces:
//!
//! - [`model`]: grounded models, states, plans, the divergence metrics.
//! - [`pddl`]: parser, grounder and printer for a STRIPS fragment.
//! - [`compile`]: the joint compilation and bound computation.
//! - [`design`]: initial-state designs and the design-phase compilation.
//! - [`design_search`]: minimal-design search and the naive baseline.
//! - [`search`]: embedded optimal/satisficing/exhaustive search.
//! - [`oracle`]: brute-force ground truth for tiny instances.
//! - [`bench`](mod@bench): the benchmark harness behind the CLI.
//!
//! ```
//! use goal_align::compile::{build_joint_model, compute_bound, CostScheme, PhaseOrdering};
//! use goal_align::fixtures::extra_effect_pair;
//! use goal_align::search::SolveBudget;
//!
//! let (robot, human) = extra_effect_pair();
//! let compiled = build_joint_model(&robot, &human, CostScheme::upper(),
//!                                  PhaseOrdering::Ordered).unwrap();
//! let report = compute_bound(&compiled, &SolveBudget::default()).unwrap();
//! assert_eq!(report.bound, 1);
//! ```

pub mod bench;
pub mod compile;
pub mod design;
pub mod design_search;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod pddl;
pub mod rng;
pub mod search;
mod state;

pub use state::{FluentId, State};

// The book's code snippets compile and run as doctests, keeping the
// guide in sync with the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(models, "../../../book/src/models.md");
    chapter!(bounds, "../../../book/src/bounds.md");
    chapter!(design, "../../../book/src/design.md");
    chapter!(planner, "../../../book/src/planner.md");
    chapter!(pddl_chapter, "../../../book/src/pddl.md");
    chapter!(cli, "../../../book/src/cli.md");
}
