use phatic_core::engine::{replay, run, trace_from_json, trace_to_json, validate, Termination};
use phatic_core::model::{build_ruleset, classify, default_scenario, exemplars};
use phatic_core::{Atom, Term};

#[test]
fn sampled_traces_survive_json_and_validate() {
    let s = default_scenario();
    let p = build_ruleset();
    for seed in 0..100 {
        let t = run("default", &s.initial_state(), &p, seed, 200);
        assert_eq!(t.termination, Termination::Quiescence);
        let back = trace_from_json(&trace_to_json(&t)).unwrap();
        assert_eq!(back, t);
        validate(&back, &p).unwrap();
    }
}

#[test]
fn tampered_consumption_is_caught_at_its_step() {
    let s = default_scenario();
    let p = build_ruleset();
    let mut t = replay("default", &s.initial_state(), &p, &exemplars::fig3_steps()).unwrap();
    t.steps[4].consumed[0] = Atom::new(t.steps[4].consumed[0].predicate, vec![Term::sym("nobody")]);
    assert_eq!(validate(&t, &p).unwrap_err().index, 4);
}

#[test]
fn exemplars_classify_as_described() {
    let s = default_scenario();
    let p = build_ruleset();
    let normative = replay("default", &s.initial_state(), &p, &exemplars::normative_steps()).unwrap();
    assert!(classify(&normative).unwrap().adherent);
    let domineering = replay("default", &s.initial_state(), &p, &exemplars::domineering_steps()).unwrap();
    assert!(!classify(&domineering).unwrap().adherent);
    for t in [&normative, &domineering] {
        assert_eq!(t.termination, Termination::Quiescence);
    }
}

#[test]
fn step_cap_is_reported() {
    let s = default_scenario();
    let t = run("default", &s.initial_state(), &build_ruleset(), 1, 3);
    assert_eq!(t.steps.len(), 3);
    assert_eq!(t.termination, Termination::StepCap);
}
