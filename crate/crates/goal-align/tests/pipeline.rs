//! End-to-end flows: PDDL in, bounds and designs out, plus the
//! external-planner escape hatch protocol.

use goal_align::bench::generate_variation;
use goal_align::compile::{build_joint_model, compute_bound, CostScheme, PhaseOrdering};
use goal_align::design::{apply_design, DesignAtom, DesignProblem, Polarity};
use goal_align::design_search::{
    compute_bounds_pair, find_minimal_design, DesignSearchConfig, SearchVariant,
};
use goal_align::model::PlanRestriction;
use goal_align::oracle::oracle_bounds;
use goal_align::pddl::{
    emitted_action_names, fluent_by_atom, ground, ground_pair, parse_domain, parse_problem,
    GroundOptions,
};
use goal_align::search::external::{parse_plan_file, ExternalPlanner};
use goal_align::search::{solve_satisficing, SearchOutcome, SolveBudget};

const BLOCKSWORLD: &str = include_str!("../../../benchmarks/blocksworld/domain.pddl");
const BW3: &str = include_str!("../../../benchmarks/blocksworld/p03.pddl");

#[test]
fn blocksworld_pair_bounds_match_oracle() {
    let domain = parse_domain(BLOCKSWORLD).unwrap();
    let problem = parse_problem(BW3).unwrap();
    let (robot_ast, human_ast, _) = generate_variation(&problem, 2, 4242).unwrap();
    let (mr, mh) = ground_pair(&domain, &robot_ast, &human_ast, &GroundOptions::default()).unwrap();

    match compute_bounds_pair(
        &mr,
        &mh,
        PlanRestriction::All,
        PhaseOrdering::Ordered,
        &SolveBudget::default(),
    ) {
        Ok((lower, upper)) => {
            let (olo, ohi) = oracle_bounds(&mr, &mh, PlanRestriction::All, 1_000_000).unwrap();
            assert_eq!(lower.bound, olo);
            assert_eq!(upper.bound, ohi);
        }
        // A variation can break the human model entirely; the oracle
        // must agree that no plan exists.
        Err(goal_align::compile::BoundError::NoValidPlanPair) => {
            assert!(matches!(
                oracle_bounds(&mr, &mh, PlanRestriction::All, 1_000_000),
                Err(goal_align::oracle::OracleError::NoValidPlan { .. })
            ));
        }
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn blocksworld_restore_design_flow() {
    let domain = parse_domain(BLOCKSWORLD).unwrap();
    let problem = parse_problem(BW3).unwrap();
    let (robot_ast, human_ast, deleted) = generate_variation(&problem, 3, 7).unwrap();
    let (mr, mh) = ground_pair(&domain, &robot_ast, &human_ast, &GroundOptions::default()).unwrap();
    let universe: Vec<DesignAtom> = deleted
        .iter()
        .map(|a| DesignAtom {
            fluent: fluent_by_atom(&mr, &a.render()).unwrap(),
            polarity: Polarity::Add,
        })
        .collect();
    let dp = DesignProblem::unit(mr, mh, universe, 0, 0);
    let result = find_minimal_design(&dp, &DesignSearchConfig::new(SearchVariant::Main)).unwrap();
    let design = result.design().expect("restore set always works");
    assert!(design.size() <= 3);

    let designed_r = apply_design(&dp.robot, design);
    let designed_h = apply_design(&dp.human, design);
    let (lo, hi) =
        oracle_bounds(&designed_r, &designed_h, PlanRestriction::All, 1_000_000).unwrap();
    assert_eq!((lo, hi), (0, 0));
}

#[test]
fn external_planner_contract_round_trip() {
    use std::os::unix::fs::PermissionsExt;

    let domain = parse_domain(BLOCKSWORLD).unwrap();
    let problem = parse_problem(BW3).unwrap();
    let model = ground(&domain, &problem, &GroundOptions::default()).unwrap();

    // Precompute a plan with the in-process engine and expose it
    // through a planner that just copies the file into place, which is
    // exactly the subprocess contract.
    let plan = match solve_satisficing(&model, &SolveBudget::default()).outcome {
        SearchOutcome::Plan { plan, .. } => plan,
        other => panic!("{other:?}"),
    };
    let names = emitted_action_names(&model);
    let plan_text: String = plan
        .actions
        .iter()
        .map(|a| format!("({})\n", names[a.index()]))
        .collect();

    let workdir = std::env::temp_dir().join(format!("goal-align-ext-{}", std::process::id()));
    std::fs::create_dir_all(&workdir).unwrap();
    let canned = workdir.join("canned-plan.txt");
    std::fs::write(&canned, &plan_text).unwrap();
    let script_path = workdir.join("mock-planner.sh");
    std::fs::write(
        &script_path,
        format!("#!/bin/sh\ncp '{}' \"$3\"\n", canned.display()),
    )
    .unwrap();
    let mut perms = std::fs::metadata(&script_path).unwrap().permissions();
    perms.set_mode(0o755);
    std::fs::set_permissions(&script_path, perms).unwrap();

    let planner = ExternalPlanner::new(&script_path);
    let decoded = planner
        .solve(&model, &workdir.join("run"))
        .unwrap()
        .expect("mock planner produced a plan");
    assert!(model.validate_plan(&decoded).is_valid());
    assert_eq!(decoded.actions, plan.actions);

    // Same decode path standalone.
    let reparsed = parse_plan_file(&plan_text, &model).unwrap();
    assert_eq!(reparsed.actions, plan.actions);
    let _ = std::fs::remove_dir_all(&workdir);
}

#[test]
fn external_plans_on_compiled_models_decompose() {
    // A plan file for an emitted compilation decodes by name and then
    // splits through the role prefixes into source-model plans.
    use goal_align::compile::decompose_plan;
    use goal_align::fixtures::extra_effect_pair;
    use goal_align::search::solve_optimal;

    let (mr, mh) = extra_effect_pair();
    let compiled = build_joint_model(&mr, &mh, CostScheme::upper(), PhaseOrdering::Ordered).unwrap();
    let plan = match solve_optimal(&compiled, &SolveBudget::default()).outcome {
        SearchOutcome::Plan { plan, .. } => plan,
        other => panic!("{other:?}"),
    };
    let names = emitted_action_names(&compiled.model);
    let text: String = plan
        .actions
        .iter()
        .map(|a| format!("{}\n", names[a.index()]))
        .collect();

    let decoded = parse_plan_file(&text, &compiled.model).unwrap();
    let decomp = decompose_plan(&compiled, &decoded).unwrap();
    assert!(mh.validate_plan(&decomp.human_plan).is_valid());
    assert!(mr.validate_plan(&decomp.robot_plan).is_valid());
    assert_eq!(decomp.disagree.len(), 1);
}

#[test]
fn failing_external_planner_reports_no_plan() {
    use std::os::unix::fs::PermissionsExt;
    let (model, _) = goal_align::fixtures::identical_chain_pair();
    let workdir = std::env::temp_dir().join(format!("goal-align-extfail-{}", std::process::id()));
    std::fs::create_dir_all(&workdir).unwrap();
    let script_path = workdir.join("fail-planner.sh");
    std::fs::write(&script_path, "#!/bin/sh\nexit 1\n").unwrap();
    let mut perms = std::fs::metadata(&script_path).unwrap().permissions();
    perms.set_mode(0o755);
    std::fs::set_permissions(&script_path, perms).unwrap();

    let planner = ExternalPlanner::new(&script_path);
    assert!(planner.solve(&model, &workdir.join("run")).unwrap().is_none());
    let _ = std::fs::remove_dir_all(&workdir);
}

#[test]
fn optimal_restriction_tightens_blocksworld_bounds() {
    // With a partial goal (just the tower, no handempty/clear pins),
    // all-plans bounds admit scattered extra divergence that the
    // optimal restriction removes.
    let domain = parse_domain(BLOCKSWORLD).unwrap();
    let problem_text = "(define (problem loose) (:domain blocksworld)
        (:objects a b c)
        (:init (ontable a) (ontable b) (ontable c)
               (clear a) (clear b) (clear c) (handempty))
        (:goal (and (on a b))))";
    let problem = parse_problem(problem_text).unwrap();
    let model = ground(&domain, &problem, &GroundOptions::default()).unwrap();
    let (all_lo, all_hi) =
        oracle_bounds(&model, &model, PlanRestriction::All, 1_000_000).unwrap();
    let (opt_lo, opt_hi) =
        oracle_bounds(&model, &model, PlanRestriction::Optimal, 1_000_000).unwrap();
    assert_eq!(all_lo, 0);
    assert_eq!(opt_lo, 0);
    assert!(opt_hi <= all_hi);
    assert!(all_hi > 0, "identical models still diverge over all plans");

    let compiled = build_joint_model(
        &model,
        &model,
        CostScheme::upper_optimal(),
        PhaseOrdering::Ordered,
    )
    .unwrap();
    let report = compute_bound(&compiled, &SolveBudget::default()).unwrap();
    assert_eq!(report.bound, opt_hi);
}
