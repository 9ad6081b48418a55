//! A forward-chaining, nondeterministic multiset-rewriting engine and a
//! rule-authored model of small talk between two acquaintances.
//!
//! The pieces, bottom up:
//!
//! * [`kernel`]: symbols, ground atoms and the multiset [`State`].
//! * [`dsl`]: the `.phatic` rule language (parser, checker, serializer,
//!   bounded reachability).
//! * [`engine`]: matching, seeded choice, runs, replays and causal links.
//! * [`model`]: the shipped conversation ruleset, scenarios, the norm
//!   classifier and batch statistics.
//! * [`surface`]: transcript and guideline realization.
//! * [`batch`]: many independent runs, in parallel when the `parallel`
//!   feature is on.

pub mod batch;
pub mod dsl;
pub mod engine;
pub mod kernel;
pub mod model;
pub mod surface;

pub use kernel::{Atom, State, Symbol, Term};
