//! The conversation model: scenarios, the shipped ruleset, move families,
//! the norm classifier, flow checks and batch statistics.

mod classify;
pub mod exemplars;
mod flow;
mod moves;
mod ruleset;
pub mod scenario;
mod stats;

pub use classify::{annoyance_condition, classify, MalformedTrace, NormReport, Violation};
pub use flow::{check_flow, FlowViolation};
pub use moves::{parse_move, path_string, project, Family, Move, MoveName, DOMINEERING_PATH, NORMATIVE_PATH};
pub use ruleset::{build_ruleset, default_ruleset_source, ruleset_source, DEFAULT_RULES};
pub use scenario::{default_scenario, Feeling, Opinion, Polarity, Scenario, ScenarioError, TopicKind};
pub use stats::{batch_stats, BatchStats, StatsError};
