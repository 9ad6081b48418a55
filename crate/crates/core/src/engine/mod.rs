//! Forward-chaining multiset rewriting: match, choose, rewrite, record.

mod json;
mod matcher;
mod rng;
mod run;

pub use json::{trace_from_json, trace_to_json, TraceJsonError, TRACE_SCHEMA};
pub use matcher::{applicable_instances, apply, ground, rule_bindings, Binding, Instance};
pub use rng::SplitMix64;
pub use run::{
    causal_links, choose, replay, rule_counts, run, step, validate, CausalEdge, CausalGraph, Divergence,
    ReplayError, Termination, Trace, TraceStep, DEFAULT_STEP_CAP,
};
