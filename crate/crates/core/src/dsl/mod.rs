//! The `.phatic` rule language.
//!
//! ```text
//! % comment
//! rule NAME: P1 * P2 * ... -o Q1 * Q2 * ... .
//! rule NAME: weight 2: P -o ().
//! ```
//!
//! Premises are patterns (consumed), `$pattern` (consumed and produced again),
//! `!absent pattern` (no matching atom may exist), or guards such as
//! `(S > 2/3 * E)`. Effects may use integer arithmetic over one variable,
//! e.g. `spoken(C, N + 1)`. The grammar is modelled on Ceptre's linear
//! implication syntax.

mod ast;
mod lexer;
mod parser;
mod reach;
mod serialize;

pub use ast::{is_var_text, Affine, Arg, Cmp, Guard, Pattern, Premise, Program, Rational, Rule, Var};
pub use lexer::Span;
pub use parser::{parse_atom, parse_program, parse_program_verbose, Diagnostic, Severity};
pub use reach::{check_reachability, ReachError, DEFAULT_STATE_CAP, MAX_REACH_DEPTH};
pub use serialize::serialize_program;
