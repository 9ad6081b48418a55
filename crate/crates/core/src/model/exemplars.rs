//! Hand-written step lists for the default scenario, for use with
//! [`crate::engine::replay`]. Bindings are partial: they pin only what the
//! rule name leaves open.

use crate::dsl::Var;
use crate::engine::Binding;
use crate::kernel::{Symbol, Term};

pub type ReplayStep = (Symbol, Binding);

fn steps(list: &[(&str, &[(&str, &str)])]) -> Vec<ReplayStep> {
    list.iter()
        .map(|(rule, binding)| {
            let b = binding.iter().map(|(v, t)| (Var::new(v), Term::sym(t))).collect();
            (Symbol::new(rule), b)
        })
        .collect()
}

/// Bob greets, talks about the weather, moves to baseball and keeps going
/// until Alice is annoyed enough to leave.
pub fn fig3_steps() -> Vec<ReplayStep> {
    steps(&[
        ("greet_bob_alice", &[]),
        ("greet_alice_bob", &[]),
        ("small_talk_weather", &[("C", "bob")]),
        ("change_topic_weather_baseball", &[]),
        ("topic_talk_baseball_typical_positive", &[]),
        ("continue_talking_baseball", &[]),
        ("continue_talking_baseball", &[]),
        ("continue_talking_baseball", &[]),
        ("annoyed_by_unfair_participation", &[("C", "alice")]),
        ("terminate_conversation", &[]),
        ("say_goodbye_bob_alice", &[]),
    ])
}

/// Greet, small talk, topic talk, question, reciprocate, change topic,
/// topic talk, question, goodbye.
pub fn normative_steps() -> Vec<ReplayStep> {
    steps(&[
        ("greet_bob_alice", &[]),
        ("greet_alice_bob", &[]),
        ("small_talk_weather", &[("C", "bob")]),
        ("topic_talk_weather_typical_positive", &[]),
        ("ask_about_weather", &[]),
        ("reciprocate_question", &[]),
        ("change_topic_weather_soccer", &[]),
        ("topic_talk_soccer_enthusiastic_positive", &[]),
        ("ask_about_soccer", &[]),
        ("take_leave_bob_alice", &[]),
        ("say_goodbye_alice_bob", &[]),
    ])
}

/// Greet, small talk, topic talk, four continues, goodbye. Alice gets
/// annoyed along the way and walks out.
pub fn domineering_steps() -> Vec<ReplayStep> {
    steps(&[
        ("greet_bob_alice", &[]),
        ("greet_alice_bob", &[]),
        ("small_talk_weather", &[("C", "bob")]),
        ("topic_talk_weather_typical_positive", &[]),
        ("continue_talking_weather", &[]),
        ("continue_talking_weather", &[]),
        ("continue_talking_weather", &[]),
        ("continue_talking_weather", &[]),
        ("annoyed_by_unfair_participation", &[("C", "alice")]),
        ("terminate_conversation", &[]),
        ("say_goodbye_bob_alice", &[]),
    ])
}
