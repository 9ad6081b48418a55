//! `trace-v1` JSON records, one trace per line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{is_var_text, parse_atom, Var};
use crate::kernel::{Atom, State, Symbol, Term};

use super::run::{Termination, Trace, TraceStep};

pub const TRACE_SCHEMA: &str = "trace-v1";

#[derive(Debug, Serialize, Deserialize)]
struct StepRecord {
    index: usize,
    rule: String,
    binding: BTreeMap<String, Term>,
    consumed: Vec<String>,
    produced: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRecord {
    schema: String,
    scenario: String,
    seed: Option<u64>,
    initial: Vec<String>,
    steps: Vec<StepRecord>,
    #[serde(rename = "final")]
    final_state: Vec<String>,
    termination: String,
}

#[derive(Debug, Error)]
pub enum TraceJsonError {
    #[error("malformed trace JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported trace schema `{0}` (expected {TRACE_SCHEMA})")]
    Schema(String),
    #[error("invalid trace: {0}")]
    Invalid(String),
}

fn atom_strings(state: &State) -> Vec<String> {
    state
        .iter()
        .flat_map(|(a, n)| std::iter::repeat_n(a.to_string(), n as usize))
        .collect()
}

fn strings(atoms: &[Atom]) -> Vec<String> {
    atoms.iter().map(Atom::to_string).collect()
}

/// Serializes a trace as a single JSON line (no trailing newline).
pub fn trace_to_json(trace: &Trace) -> String {
    let record = TraceRecord {
        schema: TRACE_SCHEMA.to_owned(),
        scenario: trace.scenario.clone(),
        seed: trace.seed,
        initial: atom_strings(&trace.initial),
        steps: trace
            .steps
            .iter()
            .map(|s| StepRecord {
                index: s.index,
                rule: s.rule.to_string(),
                binding: s.binding.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                consumed: strings(&s.consumed),
                produced: strings(&s.produced),
            })
            .collect(),
        final_state: atom_strings(&trace.final_state),
        termination: trace.termination.as_str().to_owned(),
    };
    serde_json::to_string(&record).expect("trace records always serialize")
}

fn parse_atoms(list: &[String]) -> Result<Vec<Atom>, TraceJsonError> {
    list.iter().map(|s| parse_atom(s).map_err(TraceJsonError::Invalid)).collect()
}

/// Parses one `trace-v1` record. Only the shape is checked here; use
/// [`crate::engine::validate`] to check it against a program.
pub fn trace_from_json(text: &str) -> Result<Trace, TraceJsonError> {
    let record: TraceRecord = serde_json::from_str(text)?;
    if record.schema != TRACE_SCHEMA {
        return Err(TraceJsonError::Schema(record.schema));
    }
    let termination = match record.termination.as_str() {
        "quiescence" => Termination::Quiescence,
        "step-cap" => Termination::StepCap,
        "incomplete" => Termination::Incomplete,
        other => return Err(TraceJsonError::Invalid(format!("unknown termination `{other}`"))),
    };
    let mut steps = Vec::with_capacity(record.steps.len());
    for s in record.steps {
        let rule = Symbol::try_new(&s.rule)
            .ok_or_else(|| TraceJsonError::Invalid(format!("invalid rule name `{}`", s.rule)))?;
        let mut binding = BTreeMap::new();
        for (k, v) in s.binding {
            if !is_var_text(&k) {
                return Err(TraceJsonError::Invalid(format!("invalid variable name `{k}`")));
            }
            binding.insert(Var::new(&k), v);
        }
        steps.push(TraceStep {
            index: s.index,
            rule,
            binding,
            consumed: parse_atoms(&s.consumed)?,
            produced: parse_atoms(&s.produced)?,
        });
    }
    Ok(Trace {
        scenario: record.scenario,
        seed: record.seed,
        initial: parse_atoms(&record.initial)?.into_iter().collect(),
        steps,
        final_state: parse_atoms(&record.final_state)?.into_iter().collect(),
        termination,
    })
}
