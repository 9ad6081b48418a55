use phatic_core::engine::run;
use phatic_core::model::{batch_stats, check_flow, default_scenario, ruleset_source, Scenario};
use phatic_core::dsl::parse_program;
use phatic_core::surface::{coverage_check, realize_trace, render_transcript, Bank};

const SMALL: &str = r#"{
  "name": "club",
  "agents": ["dana", "eli"],
  "topics": {"weather": "small_talk", "running": "sport", "country": "music"},
  "opinions": [
    {"agent": "dana", "topic": "weather", "polarity": "positive"},
    {"agent": "dana", "topic": "running", "polarity": "positive"},
    {"agent": "eli", "topic": "running", "polarity": "negative"},
    {"agent": "eli", "topic": "country", "polarity": "positive"}
  ],
  "related": [["weather", "running"], ["weather", "country"]],
  "turn_budget": 9
}"#;

#[test]
fn scenario_json_round_trips() {
    let s = default_scenario();
    assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
}

#[test]
fn custom_scenario_generates_a_working_ruleset() {
    let s = Scenario::from_json(SMALL).unwrap();
    let p = parse_program(&ruleset_source(&s)).unwrap();
    assert!(coverage_check(&Bank::shipped(), &p).is_empty());
    let traces: Vec<_> = (0..200).map(|seed| run("club", &s.initial_state(), &p, seed, 200)).collect();
    for t in &traces {
        check_flow(t, &s).unwrap();
        let text = render_transcript(&realize_trace(t, &Bank::shipped(), 0).unwrap());
        assert!(text.starts_with("Dana: ") || text.starts_with("Eli: "), "{text}");
    }
    let stats = batch_stats(&traces).unwrap();
    assert!(stats.adherent_fraction > 0.0 && stats.adherent_fraction < 1.0);
}

#[test]
fn bad_scenarios_are_rejected() {
    let three_agents = SMALL.replace(r#"["dana", "eli"]"#, r#"["dana", "eli", "fay"]"#);
    assert!(Scenario::from_json(&three_agents).is_err());
    let unrelated = SMALL.replace(r#", ["weather", "country"]"#, "");
    assert!(Scenario::from_json(&unrelated).is_err());
    let tiny_budget = SMALL.replace(r#""turn_budget": 9"#, r#""turn_budget": 1"#);
    assert!(Scenario::from_json(&tiny_budget).is_err());
}
