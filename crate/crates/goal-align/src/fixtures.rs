//! Hand-written micro model pairs used across tests, docs, and the
//! oracle's pool of generator seeds.
//!
//! Each pair is `(robot, human)` over a shared fluent table and a shared
//! goal, differing in actions or initial state. They are small enough to
//! enumerate every reachable state by hand.

use crate::model::{GroundedModel, ModelBuilder};

/// Robot has an extra zero-risk action with a visible side effect the
/// human does not know about.
///
/// Fluents `{goal, extra}`, goal `{goal}`, both inits empty.
/// Both models have `set-goal` (adds `goal`); only the robot also has
/// `side-effect` (adds `extra`). Divergence bounds over all plans are
/// (0, 1); restricted to optimal plans they are (0, 0).
pub fn extra_effect_pair() -> (GroundedModel, GroundedModel) {
    let mut r = ModelBuilder::new("extra-effect-robot");
    let p = r.fluent("goal");
    let q = r.fluent("extra");
    r.action("set-goal").add([p]).done();
    r.action("side-effect").add([q]).done();
    r.init([]);
    r.goal([p]);

    let mut h = ModelBuilder::new("extra-effect-human");
    let hp = h.fluent("goal");
    h.fluent("extra");
    h.action("set-goal").add([hp]).done();
    h.init([]);
    h.goal([hp]);

    (r.build().unwrap(), h.build().unwrap())
}

/// Robot-only action gated on an initial-state fluent; removing that
/// fluent by design disables the divergent behaviour.
///
/// Fluents `{enabler, goal, extra}`, inits `{enabler}`, goal `{goal}`.
/// Both models have `set-goal`; the robot's `use-tool` (pre `{enabler}`,
/// adds `extra`) is unknown to the human. The design `{remove enabler}`
/// drives the upper bound to zero.
pub fn gated_action_pair() -> (GroundedModel, GroundedModel) {
    let mut r = ModelBuilder::new("gated-robot");
    let e = r.fluent("enabler");
    let p = r.fluent("goal");
    let q = r.fluent("extra");
    r.action("set-goal").add([p]).done();
    r.action("use-tool").pre([e]).add([q]).done();
    r.init([e]);
    r.goal([p]);

    let mut h = ModelBuilder::new("gated-human");
    let he = h.fluent("enabler");
    let hp = h.fluent("goal");
    h.fluent("extra");
    h.action("set-goal").add([hp]).done();
    h.init([he]);
    h.goal([hp]);

    (r.build().unwrap(), h.build().unwrap())
}

/// Human is missing an initial-state fluent the shared action needs, so
/// the human model has no plan until a design restores it.
///
/// Fluents `{resource, goal, spare}`, goal `{goal}`. Robot init
/// `{resource}`, human init empty. Both models have `achieve` (pre
/// `{resource}`, adds `goal`). The design `{add resource}` makes the
/// pair align exactly; `{add spare}` is a decoy.
pub fn missing_init_pair() -> (GroundedModel, GroundedModel) {
    let mut r = ModelBuilder::new("missing-init-robot");
    let res = r.fluent("resource");
    let g = r.fluent("goal");
    r.fluent("spare");
    r.action("achieve").pre([res]).add([g]).done();
    r.init([res]);
    r.goal([g]);

    let mut h = ModelBuilder::new("missing-init-human");
    let hres = h.fluent("resource");
    let hg = h.fluent("goal");
    h.fluent("spare");
    h.action("achieve").pre([hres]).add([hg]).done();
    h.init([]);
    h.goal([hg]);

    (r.build().unwrap(), h.build().unwrap())
}

/// A mismatch the design universe cannot repair plus a removable source
/// of extra divergence. Used for bounded-disagreement searches.
///
/// Fluents `{marker, goal, enabler, extra}`. Robot init `{marker,
/// enabler}`, human init `{enabler}`; no action touches `marker`, so
/// every plan pair diverges on it. The robot-only `grow` (pre
/// `{enabler}`, adds `extra`) is disabled by the design
/// `{remove enabler}`, leaving divergence exactly `{marker}`.
pub fn unavoidable_mismatch_pair() -> (GroundedModel, GroundedModel) {
    let mut r = ModelBuilder::new("mismatch-robot");
    let m = r.fluent("marker");
    let g = r.fluent("goal");
    let e = r.fluent("enabler");
    let x = r.fluent("extra");
    r.action("achieve").add([g]).done();
    r.action("grow").pre([e]).add([x]).done();
    r.init([m, e]);
    r.goal([g]);

    let mut h = ModelBuilder::new("mismatch-human");
    h.fluent("marker");
    let hg = h.fluent("goal");
    let he = h.fluent("enabler");
    h.fluent("extra");
    h.action("achieve").add([hg]).done();
    h.init([he]);
    h.goal([hg]);

    (r.build().unwrap(), h.build().unwrap())
}

/// A pair of identical two-step chain models: `start → mid → goal`.
/// Useful wherever a solvable, perfectly aligned pair is needed.
pub fn identical_chain_pair() -> (GroundedModel, GroundedModel) {
    let build = |name: &str| {
        let mut b = ModelBuilder::new(name);
        let s = b.fluent("start");
        let m = b.fluent("mid");
        let g = b.fluent("goal");
        b.action("first").pre([s]).add([m]).done();
        b.action("second").pre([m]).add([g]).done();
        b.init([s]);
        b.goal([g]);
        b.build().unwrap()
    };
    (build("chain-robot"), build("chain-human"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_share_fluent_tables_and_goals() {
        for (r, h) in [
            extra_effect_pair(),
            gated_action_pair(),
            missing_init_pair(),
            unavoidable_mismatch_pair(),
            identical_chain_pair(),
        ] {
            assert_eq!(r.fluents, h.fluents);
            assert_eq!(r.goal, h.goal);
            r.check_invariants().unwrap();
            h.check_invariants().unwrap();
        }
    }
}
