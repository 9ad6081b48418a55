//! Transcripts and guidelines. Each rule name maps to utterance templates and
//! guideline variants kept in a JSON bank, so text can be edited without
//! touching the rules.

mod bank;
mod realize;

pub use bank::{coverage_check, placeholders, Bank, BankError, Entry, Lookup, DEFAULT_BANK};
pub use realize::{
    realize_step, realize_trace, realize_with, render_table, render_transcript, Cast, Picker, Realized, SurfaceError,
    TranscriptLine,
};
