use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::engine::Trace;

use super::classify::{classify, MalformedTrace, Violation};
use super::moves::project;
use super::scenario::Feeling;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchStats {
    pub conversations: usize,
    pub adherent_fraction: f64,
    /// Fraction of conversations showing each violation.
    pub violation_rates: BTreeMap<Violation, f64>,
    /// Mean number of steps, silent ones included.
    pub mean_length: f64,
    /// Mean number of firings per conversation, by rule name.
    pub rule_frequency: BTreeMap<String, f64>,
    /// Fraction of agents ending in each feeling.
    pub final_feelings: BTreeMap<Feeling, f64>,
    pub distinct_move_sequences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no traces to summarize")]
    EmptyBatch,
    #[error("trace {trace}: {source}")]
    Malformed { trace: usize, source: MalformedTrace },
}

/// Summarizes a batch of conversation traces. Every figure is an average, so
/// repeating the whole batch leaves the result unchanged.
pub fn batch_stats(traces: &[Trace]) -> Result<BatchStats, StatsError> {
    if traces.is_empty() {
        return Err(StatsError::EmptyBatch);
    }
    let n = traces.len() as f64;
    let mut adherent = 0usize;
    let mut violations: BTreeMap<Violation, usize> = Violation::ALL.iter().map(|v| (*v, 0)).collect();
    let mut feelings: BTreeMap<Feeling, usize> = Feeling::ALL.iter().map(|f| (*f, 0)).collect();
    let mut agents = 0usize;
    let mut firings: BTreeMap<String, usize> = BTreeMap::new();
    let mut steps = 0usize;
    let mut paths = BTreeSet::new();
    for (i, t) in traces.iter().enumerate() {
        let report = classify(t).map_err(|source| StatsError::Malformed { trace: i, source })?;
        adherent += usize::from(report.adherent);
        for v in &report.violations {
            *violations.get_mut(v).expect("all violations seeded") += 1;
        }
        for f in report.final_feelings.values() {
            *feelings.get_mut(f).expect("all feelings seeded") += 1;
            agents += 1;
        }
        for s in &t.steps {
            *firings.entry(s.rule.to_string()).or_insert(0) += 1;
        }
        steps += t.steps.len();
        paths.insert(project(t));
    }
    let frac = |k: usize, of: f64| if of == 0.0 { 0.0 } else { k as f64 / of };
    Ok(BatchStats {
        conversations: traces.len(),
        adherent_fraction: frac(adherent, n),
        violation_rates: violations.into_iter().map(|(v, k)| (v, frac(k, n))).collect(),
        mean_length: frac(steps, n),
        rule_frequency: firings.into_iter().map(|(r, k)| (r, frac(k, n))).collect(),
        final_feelings: feelings.into_iter().map(|(f, k)| (f, frac(k, agents as f64))).collect(),
        distinct_move_sequences: paths.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{replay, run};
    use crate::model::{build_ruleset, default_scenario, exemplars};

    #[test]
    fn empty_batch_is_an_error() {
        assert_eq!(batch_stats(&[]), Err(StatsError::EmptyBatch));
    }

    #[test]
    fn single_adherent_trace() {
        let s = default_scenario();
        let t = replay("default", &s.initial_state(), &build_ruleset(), &exemplars::normative_steps()).unwrap();
        let st = batch_stats(&[t]).unwrap();
        assert_eq!(st.adherent_fraction, 1.0);
        assert!(st.violation_rates.values().all(|&r| r == 0.0));
    }

    #[test]
    fn duplicating_the_batch_changes_nothing_but_the_count() {
        let s = default_scenario();
        let p = build_ruleset();
        let one: Vec<Trace> = (0..20).map(|seed| run("default", &s.initial_state(), &p, seed, 200)).collect();
        let two: Vec<Trace> = one.iter().chain(&one).cloned().collect();
        let (a, mut b) = (batch_stats(&one).unwrap(), batch_stats(&two).unwrap());
        assert_eq!(b.conversations, 40);
        b.conversations = 20;
        assert_eq!(a, b);
    }
}
