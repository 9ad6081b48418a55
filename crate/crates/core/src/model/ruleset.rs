//! The conversation ruleset.
//!
//! Moves that name an agent or a topic in the rule name (`greet_bob_alice`,
//! `change_topic_weather_baseball`) are generated from a scenario; the rest
//! are written once with variables. By convention `C` is the agent whose
//! move it is, `D` the other one, `T` the topic and `O` the mover's opinion.

use std::fmt::Write;
use std::sync::OnceLock;

use crate::dsl::{parse_program, Program};

use super::scenario::{default_scenario, Scenario, TopicKind};

/// The shipped ruleset, generated from [`default_scenario`].
pub const DEFAULT_RULES: &str = include_str!("../../assets/conversation.phatic");

/// The parsed shipped ruleset.
pub fn build_ruleset() -> Program {
    static PROGRAM: OnceLock<Program> = OnceLock::new();
    PROGRAM
        .get_or_init(|| parse_program(DEFAULT_RULES).expect("shipped ruleset parses"))
        .clone()
}

/// Charges one turn to `C`. Used by every move that says something.
const SPEAK_PRE: &str = "spoken(C, N) * elapsed(E) * $budget(B) * (E < B) * $convo(active)";
const SPEAK_POST: &str = "spoken(C, N + 1) * elapsed(E + 1)";

/// Writes the `.phatic` source for `scenario`. Agent and topic names are
/// baked into the specialized rule names, so a scenario with different
/// agents or topics needs its own ruleset.
pub fn ruleset_source(scenario: &Scenario) -> String {
    let mut out = String::new();
    let w = &mut out;
    let agents = &scenario.agents;
    let topics: Vec<_> = scenario.topics.keys().copied().collect();

    w.push_str("% Small talk between two acquaintances.\n");
    w.push_str("% Generated for agents ");
    let _ = writeln!(w, "{}; topics {}.", join(agents), join(&topics));
    w.push_str("% Moves that speak are charged one turn against budget(B).\n\n");

    w.push_str("% Greetings. Either agent may go first.\n");
    for &x in agents {
        for &y in agents.iter().filter(|&&y| y != x) {
            let _ = writeln!(w, "rule greet_{x}_{y}: to_greet({x}, {y}) * elapsed(E) -o greeted({x}, {y}) * elapsed(E + 1).");
        }
    }

    w.push_str("\n% Small talk opens the conversation once both have greeted.\n");
    for t in scenario.small_talk_topics() {
        let _ = writeln!(
            w,
            "rule small_talk_{t}: flow(opening) * $greeted(C, D) * $greeted(D, C) * floor(_F) * {SPEAK_PRE} \
             -o flow(open) * topic({t}) * opened * floor(C) * {SPEAK_POST}."
        );
    }

    w.push_str("\n% Topic talk: state an opinion on the current topic, once per agent and topic.\n");
    for &t in &topics {
        for tone in ["typical", "enthusiastic"] {
            for pol in ["positive", "negative"] {
                let _ = writeln!(
                    w,
                    "rule topic_talk_{t}_{tone}_{pol}: $flow(open) * $topic({t}) * $opinion(C, {t}, {pol}) * \
                     !absent discussed(C, {t}) * $floor(C) * last_said(_X, _Y, _Z) * last_tone(_K) * {SPEAK_PRE} \
                     -o discussed(C, {t}) * last_said(C, {t}, {pol}) * last_tone({tone}) * {SPEAK_POST}."
                );
            }
        }
    }

    w.push_str("\n% Keep talking about a topic you have already given your view on.\n");
    for &t in &topics {
        let _ = writeln!(
            w,
            "rule continue_talking_{t}: $flow(open) * $topic({t}) * $floor(C) * $discussed(C, {t}) * \
             {SPEAK_PRE} -o {SPEAK_POST}."
        );
    }

    w.push_str("\n% Ask the other agent about the current topic, once per agent and topic.\n");
    for &t in &topics {
        let _ = writeln!(
            w,
            "rule ask_about_{t}: flow(open) * $topic({t}) * $partner(C, D) * !absent asked(C, {t}) * floor(C) * \
             {SPEAK_PRE} -o flow(asked) * pending(C, D, {t}) * asked(C, {t}) * floor(D) * {SPEAK_POST}."
        );
    }

    w.push_str("\n% Whoever has the floor may steer toward a related topic they like. Small-talk topics only open.\n");
    for &from in &topics {
        for &to in topics.iter().filter(|&&to| to != from && scenario.topics[&to] != TopicKind::SmallTalk) {
            let _ = writeln!(
                w,
                "rule change_topic_{from}_{to}: $flow(open) * topic({from}) * $related({from}, {to}) * $floor(C) * \
                 $opinion(C, {to}, positive) * {SPEAK_PRE} -o topic({to}) * {SPEAK_POST}."
            );
        }
    }

    w.push_str(
        "
% Answers to a pending question.
rule answer_typical: flow(asked) * pending(_D, C, T) * $opinion(C, T, O) * floor(_F) * last_said(_X, _Y, _Z) * last_tone(_K) * SPEAK_PRE -o flow(open) * discussed(C, T) * floor(C) * last_said(C, T, O) * last_tone(typical) * SPEAK_POST.
rule answer_enthusiastic: flow(asked) * pending(_D, C, T) * $opinion(C, T, O) * floor(_F) * last_said(_X, _Y, _Z) * last_tone(_K) * SPEAK_PRE -o flow(open) * discussed(C, T) * floor(C) * last_said(C, T, O) * last_tone(enthusiastic) * SPEAK_POST.
rule answer_unsure: flow(asked) * pending(_D, C, T) * !absent opinion(C, T, _O) * floor(_F) * last_said(_X, _Y, _Z) * last_tone(_K) * SPEAK_PRE -o flow(open) * floor(C) * last_said(C, T, unsure) * last_tone(typical) * SPEAK_POST.

% Answer and ask the same thing back. The asker likes the answerer more.
rule reciprocate_question: flow(asked) * pending(D, C, T) * $opinion(C, T, O) * affinity(D, C, A) * floor(_F) * last_said(_X, _Y, _Z) * last_tone(_K) * SPEAK_PRE -o flow(open) * affinity(D, C, A + 1) * asked(C, T) * discussed(C, T) * floor(C) * last_said(C, T, O) * last_tone(typical) * SPEAK_POST.

% Reactions to the last stated opinion. These say nothing and cost no turn.
rule like_from_agreement: last_said(C, T, O) * $opinion(D, T, O) * $partner(C, D) * affinity(D, C, A) * $convo(active) -o last_said(C, T, noted) * affinity(D, C, A + 1).
rule happy_from_shared_enthusiasm: $last_said(D, T, O) * $last_tone(enthusiastic) * $opinion(C, T, O) * $partner(C, D) * feels(C, content) * $convo(active) -o feels(C, happy).

% Vocal disagreement is spoken: C objects to what D just said.
rule dislike_from_disagreement: $flow(open) * last_said(D, T, P) * $opinion(C, T, O) * $opposite(P, O) * $partner(C, D) * affinity(D, C, A) * floor(_F) * SPEAK_PRE -o last_said(D, T, noted) * affinity(D, C, A - 2) * disagreed(C, D) * floor(C) * SPEAK_POST.
rule sad_from_disagreement: disagreed(_D, C) * feels(C, content) * $convo(active) -o feels(C, sad).

% C is annoyed when D has done more than 2/3 of the talking so far.
rule annoyed_by_unfair_participation: feels(C, content) * $partner(C, D) * $spoken(D, S) * $elapsed(E) * (S > 2/3 * E) * $convo(active) -o feels(C, annoyed).

% An annoyed agent may walk out; that counts as their goodbye.
rule terminate_conversation: $feels(C, annoyed) * convo(active) * farewell_due(C, _D) * $elapsed(E) * $budget(B) * (E <= B) -o convo(closing).
"
        .replace("SPEAK_PRE", SPEAK_PRE)
        .replace("SPEAK_POST", SPEAK_POST)
        .as_str(),
    );

    w.push_str("\n% Leaving is allowed once two thirds of the turn budget have been used. Goodbyes cost no turn.\n");
    for &x in agents {
        for &y in agents.iter().filter(|&&y| y != x) {
            let _ = writeln!(
                w,
                "rule take_leave_{x}_{y}: farewell_due({x}, {y}) * convo(active) * $opened * $elapsed(E) * $budget(B) * \
                 (3 * E >= 2 * B) -o convo(closing)."
            );
        }
    }
    for &x in agents {
        for &y in agents.iter().filter(|&&y| y != x) {
            let _ = writeln!(w, "rule say_goodbye_{x}_{y}: farewell_due({x}, {y}) * $convo(closing) -o ().");
        }
    }
    out
}

fn join(items: &[crate::kernel::Symbol]) -> String {
    items.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
}

/// Source generated for the default scenario; the shipped asset must match.
pub fn default_ruleset_source() -> String {
    ruleset_source(&default_scenario())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_program_verbose, serialize_program};
    use crate::kernel::Symbol;

    #[test]
    fn shipped_asset_is_generated_from_the_default_scenario() {
        if std::env::var_os("PHATIC_BLESS").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/conversation.phatic");
            std::fs::write(path, default_ruleset_source()).unwrap();
            return;
        }
        assert_eq!(DEFAULT_RULES, default_ruleset_source());
    }

    #[test]
    fn shipped_ruleset_has_no_diagnostics() {
        let (p, diags) = parse_program_verbose(DEFAULT_RULES);
        assert!(diags.is_empty(), "{diags:?}");
        assert!(p.is_some());
    }

    #[test]
    fn shipped_ruleset_round_trips() {
        let p = build_ruleset();
        assert_eq!(parse_program(&serialize_program(&p)).unwrap(), p);
    }

    #[test]
    fn inventory_has_both_topic_talk_tones() {
        let p = build_ruleset();
        assert!(p.rule(Symbol::new("topic_talk_baseball_typical_positive")).is_some());
        assert!(p.rule(Symbol::new("topic_talk_baseball_enthusiastic_positive")).is_some());
        assert!(p.rule(Symbol::new("change_topic_weather_baseball")).is_some());
        assert!(p.rules().iter().all(|r| r.weight == crate::dsl::Rational::from_integer(1)));
    }
}
