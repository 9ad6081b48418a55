use thiserror::Error;

use crate::engine::{Termination, Trace};
use crate::kernel::Symbol;

use super::moves::{parse_move, Family};
use super::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index}: {reason}")]
pub struct FlowViolation {
    pub index: usize,
    pub reason: String,
}

/// Checks a trace against the conversation's global structure, using only
/// rule names and the scenario:
///
/// * nothing happens before both greetings;
/// * once someone says goodbye only goodbyes follow, and a finished trace
///   ends with one;
/// * small talk comes before any other spoken move;
/// * a question is answered or reciprocated before anything else is said;
/// * topic changes start from the current topic and go to a related one.
pub fn check_flow(trace: &Trace, scenario: &Scenario) -> Result<(), FlowViolation> {
    let fail = |index: usize, reason: String| Err(FlowViolation { index, reason });
    let mut greets = 0;
    let mut closing = false;
    let mut small_talk = false;
    let mut pending_question: Option<usize> = None;
    let mut topic: Option<Symbol> = None;

    for step in &trace.steps {
        let i = step.index;
        let Some(name) = parse_move(step.rule) else {
            return fail(i, format!("`{}` is not a conversation move", step.rule));
        };
        let family = name.family;
        if greets < 2 && family != Family::Greet {
            return fail(i, format!("`{}` before both agents greeted", step.rule));
        }
        if closing && family != Family::Goodbye {
            return fail(i, format!("`{}` after the conversation started closing", step.rule));
        }
        if family.is_silent() {
            continue;
        }
        let speaks_on_topic = !matches!(family, Family::Greet | Family::Goodbye | Family::Terminate);
        if speaks_on_topic && family != Family::SmallTalk && !small_talk {
            return fail(i, format!("`{}` before any small talk", step.rule));
        }
        if let Some(q) = pending_question {
            match family {
                Family::Answer | Family::Reciprocate => pending_question = None,
                Family::Goodbye | Family::Terminate => {}
                _ => return fail(i, format!("`{}` while the question at step {q} is unanswered", step.rule)),
            }
        }
        match family {
            Family::Greet => {
                greets += 1;
                if greets > 2 {
                    return fail(i, "a third greeting".into());
                }
            }
            Family::SmallTalk => {
                if small_talk {
                    return fail(i, "a second round of small talk".into());
                }
                small_talk = true;
                topic = Symbol::try_new(name.parts[0]);
            }
            Family::TopicTalk | Family::ContinueTalking | Family::Question => {
                if topic.map(|t| t.as_str()) != Some(name.parts[0]) {
                    return fail(i, format!("`{}` is not about the current topic", step.rule));
                }
                if family == Family::Question {
                    pending_question = Some(i);
                }
            }
            Family::ChangeTopic => {
                let (from, to) = (Symbol::new(name.parts[0]), Symbol::new(name.parts[1]));
                if topic != Some(from) {
                    return fail(i, format!("`{}` does not start from the current topic", step.rule));
                }
                if !scenario.is_related(from, to) {
                    return fail(i, format!("{from} and {to} are not related"));
                }
                topic = Some(to);
            }
            Family::Goodbye | Family::Terminate => closing = true,
            _ => {}
        }
    }
    if trace.termination == Termination::Quiescence && !trace.steps.is_empty() {
        let last = trace.steps.last().expect("nonempty");
        if parse_move(last.rule).map(|n| n.family) != Some(Family::Goodbye) {
            return fail(last.index, format!("trace ends with `{}` instead of a goodbye", last.rule));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{replay, run};
    use crate::model::{build_ruleset, default_scenario, exemplars};

    #[test]
    fn sampled_traces_conform() {
        let s = default_scenario();
        let p = build_ruleset();
        for seed in 0..200 {
            let t = run("default", &s.initial_state(), &p, seed, 200);
            check_flow(&t, &s).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
    }

    #[test]
    fn exemplars_conform() {
        let s = default_scenario();
        let p = build_ruleset();
        for steps in [exemplars::fig3_steps(), exemplars::normative_steps(), exemplars::domineering_steps()] {
            let t = replay("default", &s.initial_state(), &p, &steps).unwrap();
            check_flow(&t, &s).unwrap();
        }
    }

    #[test]
    fn detects_unanswered_question() {
        let s = default_scenario();
        let p = build_ruleset();
        let mut t = replay("default", &s.initial_state(), &p, &exemplars::normative_steps()).unwrap();
        // Pretend the reciprocation was a continue instead.
        t.steps[5].rule = Symbol::new("continue_talking_weather");
        let err = check_flow(&t, &s).unwrap_err();
        assert_eq!(err.index, 5);
    }

    #[test]
    fn detects_unrelated_change() {
        let s = default_scenario();
        let p = build_ruleset();
        let mut t = replay("default", &s.initial_state(), &p, &exemplars::fig3_steps()).unwrap();
        t.steps[3].rule = Symbol::new("change_topic_weather_weekend");
        assert!(check_flow(&t, &s).unwrap_err().reason.contains("not related"));
    }
}
