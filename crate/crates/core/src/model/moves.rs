use std::fmt;

use crate::engine::Trace;
use crate::kernel::Symbol;

/// Every rule in a conversation ruleset belongs to exactly one family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Greet,
    SmallTalk,
    TopicTalk,
    ContinueTalking,
    Question,
    Answer,
    Reciprocate,
    ChangeTopic,
    Disagree,
    Like,
    Happy,
    Sad,
    Annoyed,
    Terminate,
    Goodbye,
}

/// A rule name split into its family and the agent or topic names baked
/// into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveName {
    pub family: Family,
    pub parts: Vec<&'static str>,
}

const FIXED: [(&str, Family); 10] = [
    ("answer_typical", Family::Answer),
    ("answer_enthusiastic", Family::Answer),
    ("answer_unsure", Family::Answer),
    ("reciprocate_question", Family::Reciprocate),
    ("like_from_agreement", Family::Like),
    ("happy_from_shared_enthusiasm", Family::Happy),
    ("dislike_from_disagreement", Family::Disagree),
    ("sad_from_disagreement", Family::Sad),
    ("annoyed_by_unfair_participation", Family::Annoyed),
    ("terminate_conversation", Family::Terminate),
];

const PREFIXED: [(&str, usize, Family); 8] = [
    ("greet_", 2, Family::Greet),
    ("small_talk_", 1, Family::SmallTalk),
    ("topic_talk_", 3, Family::TopicTalk),
    ("continue_talking_", 1, Family::ContinueTalking),
    ("ask_about_", 1, Family::Question),
    ("change_topic_", 2, Family::ChangeTopic),
    ("take_leave_", 2, Family::Goodbye),
    ("say_goodbye_", 2, Family::Goodbye),
];

/// Classifies a rule name. `None` for names outside the inventory.
pub fn parse_move(name: Symbol) -> Option<MoveName> {
    let text = name.as_str();
    if let Some(&(_, family)) = FIXED.iter().find(|(n, _)| *n == text) {
        return Some(MoveName { family, parts: Vec::new() });
    }
    for (prefix, n, family) in PREFIXED {
        let Some(rest) = text.strip_prefix(prefix) else { continue };
        let parts: Vec<&'static str> = rest.split('_').collect();
        if parts.len() != n || parts.iter().any(|p| p.is_empty()) {
            continue;
        }
        if family == Family::TopicTalk
            && !(matches!(parts[1], "typical" | "enthusiastic") && matches!(parts[2], "positive" | "negative"))
        {
            continue;
        }
        return Some(MoveName { family, parts });
    }
    None
}

impl Family {
    /// Families that change feelings or affinity without anyone speaking.
    pub fn is_silent(self) -> bool {
        matches!(self, Family::Like | Family::Happy | Family::Sad | Family::Annoyed)
    }

    /// The conversational move this family shows up as, if any.
    pub fn projected(self) -> Option<Move> {
        Some(match self {
            Family::Greet => Move::Greet,
            Family::SmallTalk => Move::SmallTalk,
            Family::TopicTalk => Move::TopicTalk,
            Family::ContinueTalking => Move::ContinueTalking,
            Family::Question => Move::Question,
            Family::Answer => Move::Answer,
            Family::Reciprocate => Move::Reciprocate,
            Family::ChangeTopic => Move::ChangeTopic,
            Family::Disagree => Move::Disagree,
            Family::Terminate | Family::Goodbye => Move::Goodbye,
            Family::Like | Family::Happy | Family::Sad | Family::Annoyed => return None,
        })
    }
}

/// The visible conversational moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Greet,
    SmallTalk,
    TopicTalk,
    ContinueTalking,
    Question,
    Answer,
    Reciprocate,
    ChangeTopic,
    Disagree,
    Goodbye,
}

impl Move {
    pub fn as_str(self) -> &'static str {
        match self {
            Move::Greet => "greet",
            Move::SmallTalk => "small_talk",
            Move::TopicTalk => "topic_talk",
            Move::ContinueTalking => "continue_talking",
            Move::Question => "question",
            Move::Answer => "answer",
            Move::Reciprocate => "reciprocate",
            Move::ChangeTopic => "change_topic",
            Move::Disagree => "disagree",
            Move::Goodbye => "goodbye",
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Greet, small talk, topic talk, question, reciprocate, change topic,
/// topic talk, question, goodbye.
pub const NORMATIVE_PATH: [Move; 9] = [
    Move::Greet,
    Move::SmallTalk,
    Move::TopicTalk,
    Move::Question,
    Move::Reciprocate,
    Move::ChangeTopic,
    Move::TopicTalk,
    Move::Question,
    Move::Goodbye,
];

/// One agent keeps talking: topic talk followed by four continues.
pub const DOMINEERING_PATH: [Move; 8] = [
    Move::Greet,
    Move::SmallTalk,
    Move::TopicTalk,
    Move::ContinueTalking,
    Move::ContinueTalking,
    Move::ContinueTalking,
    Move::ContinueTalking,
    Move::Goodbye,
];

/// The sequence of visible moves in a trace. Silent steps are dropped, the
/// two greetings count as one greet and the closing steps as one goodbye.
/// Rule names outside the inventory are skipped.
pub fn project(trace: &Trace) -> Vec<Move> {
    let mut out: Vec<Move> = Vec::new();
    for step in &trace.steps {
        let Some(m) = parse_move(step.rule).and_then(|n| n.family.projected()) else { continue };
        if matches!(m, Move::Greet | Move::Goodbye) && out.last() == Some(&m) {
            continue;
        }
        out.push(m);
    }
    out
}

/// Renders a projected path as `greet > small_talk > ...`.
pub fn path_string(path: &[Move]) -> String {
    path.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(" > ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_ruleset;

    #[test]
    fn every_shipped_rule_is_in_the_inventory() {
        for r in build_ruleset().rules() {
            assert!(parse_move(r.name).is_some(), "{}", r.name);
        }
    }

    #[test]
    fn names_split_into_parts() {
        let m = parse_move(Symbol::new("change_topic_weather_baseball")).unwrap();
        assert_eq!(m.family, Family::ChangeTopic);
        assert_eq!(m.parts, ["weather", "baseball"]);
        let m = parse_move(Symbol::new("topic_talk_rock_enthusiastic_negative")).unwrap();
        assert_eq!(m.parts, ["rock", "enthusiastic", "negative"]);
        assert!(parse_move(Symbol::new("topic_talk_rock_loud_negative")).is_none());
        assert!(parse_move(Symbol::new("greet_bob")).is_none());
        assert!(parse_move(Symbol::new("dance")).is_none());
    }
}
