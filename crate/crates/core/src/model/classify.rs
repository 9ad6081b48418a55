use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::Var;
use crate::engine::{Trace, TraceStep};
use crate::kernel::{Symbol, Term};

use super::moves::{parse_move, Family};
use super::scenario::Feeling;

/// Whether an agent who has spoken `spoken_by_other` times out of
/// `total_turns` has done more than two thirds of the talking.
pub fn annoyance_condition(spoken_by_other: u32, total_turns: u32) -> bool {
    3 * u64::from(spoken_by_other) > 2 * u64::from(total_turns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Domination,
    VocalizedDisagreement,
    EarlyTermination,
}

impl Violation {
    pub const ALL: [Violation; 3] = [Violation::Domination, Violation::VocalizedDisagreement, Violation::EarlyTermination];

    pub fn as_str(self) -> &'static str {
        match self {
            Violation::Domination => "domination",
            Violation::VocalizedDisagreement => "vocalized_disagreement",
            Violation::EarlyTermination => "early_termination",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormReport {
    pub adherent: bool,
    /// Sorted, without duplicates.
    pub violations: Vec<Violation>,
    pub final_feelings: BTreeMap<Symbol, Feeling>,
    /// `(from, to)` to how much `from` likes `to` at the end.
    pub final_affinity: BTreeMap<(Symbol, Symbol), i32>,
}

impl NormReport {
    pub fn has(&self, v: Violation) -> bool {
        self.violations.contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedTrace {
    #[error("step {index}: `{rule}` is not a conversation move")]
    UnknownRule { index: usize, rule: Symbol },
    #[error("step {index}: `{rule}` is missing the integer binding for {var}")]
    MissingBinding { index: usize, rule: Symbol, var: &'static str },
    #[error("final state has an unreadable {0} atom")]
    BadState(&'static str),
}

fn int_binding(step: &TraceStep, var: &'static str) -> Result<i32, MalformedTrace> {
    step.binding
        .get(&Var::new(var))
        .and_then(Term::as_int)
        .ok_or(MalformedTrace::MissingBinding { index: step.index, rule: step.rule, var })
}

/// Reads the norm violations off a conversation trace.
///
/// Domination is flagged when someone got annoyed at unbalanced
/// participation, vocalized disagreement when a disagreement was spoken, and
/// early termination when an annoyed agent walked out before the turn budget
/// ran out.
pub fn classify(trace: &Trace) -> Result<NormReport, MalformedTrace> {
    let mut violations = Vec::new();
    for step in &trace.steps {
        let name = parse_move(step.rule).ok_or(MalformedTrace::UnknownRule { index: step.index, rule: step.rule })?;
        match name.family {
            Family::Annoyed => violations.push(Violation::Domination),
            Family::Disagree => violations.push(Violation::VocalizedDisagreement),
            Family::Terminate => {
                let (elapsed, budget) = (int_binding(step, "E")?, int_binding(step, "B")?);
                if elapsed < budget {
                    violations.push(Violation::EarlyTermination);
                }
            }
            _ => {}
        }
    }
    violations.sort();
    violations.dedup();

    let mut final_feelings = BTreeMap::new();
    for (args, _) in trace.final_state.with_predicate(Symbol::new("feels")) {
        let (Some(agent), Some(feeling)) = (args.first().and_then(Term::as_sym), args.get(1).and_then(Term::as_sym)) else {
            return Err(MalformedTrace::BadState("feels"));
        };
        final_feelings.insert(agent, Feeling::from_symbol(feeling).ok_or(MalformedTrace::BadState("feels"))?);
    }
    let mut final_affinity = BTreeMap::new();
    for (args, _) in trace.final_state.with_predicate(Symbol::new("affinity")) {
        match args {
            [Term::Sym(from), Term::Sym(to), Term::Int(n)] => {
                final_affinity.insert((*from, *to), *n);
            }
            _ => return Err(MalformedTrace::BadState("affinity")),
        }
    }
    Ok(NormReport { adherent: violations.is_empty(), violations, final_feelings, final_affinity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{replay, run, Termination};
    use crate::model::{build_ruleset, default_scenario};

    #[test]
    fn annoyance_threshold_examples() {
        assert!(annoyance_condition(6, 8));
        assert!(!annoyance_condition(2, 6));
        assert!(!annoyance_condition(0, 0));
        // Exactly two thirds is not more than two thirds.
        assert!(!annoyance_condition(4, 6));
        assert!(annoyance_condition(5, 7));
    }

    #[test]
    fn empty_trace_is_adherent() {
        let s = default_scenario();
        let t = replay("default", &s.initial_state(), &build_ruleset(), &[]).unwrap();
        let r = classify(&t).unwrap();
        assert!(r.adherent);
        assert!(r.violations.is_empty());
        assert_eq!(r.final_feelings.len(), 2);
        assert!(r.final_affinity.values().all(|&a| a == 0));
    }

    #[test]
    fn unknown_rules_are_malformed() {
        let mut t = run("default", &default_scenario().initial_state(), &build_ruleset(), 3, 200);
        t.steps[0].rule = Symbol::new("dance");
        assert_eq!(classify(&t), Err(MalformedTrace::UnknownRule { index: 0, rule: Symbol::new("dance") }));
    }

    #[test]
    fn adherent_iff_no_violations() {
        let s = default_scenario();
        let p = build_ruleset();
        for seed in 0..50 {
            let t = run("default", &s.initial_state(), &p, seed, 200);
            assert_eq!(t.termination, Termination::Quiescence);
            let r = classify(&t).unwrap();
            assert_eq!(r.adherent, r.violations.is_empty());
        }
    }
}
