use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::dsl::{Program, Var};
use crate::kernel::Symbol;

/// The shipped utterance and guideline bank.
pub const DEFAULT_BANK: &str = include_str!("../../assets/bank.json");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    #[serde(default)]
    pub utterances: Vec<String>,
    pub guidelines: Vec<String>,
    /// Silent rules say nothing; their guideline annotates the next line.
    #[serde(default)]
    pub silent: bool,
    /// Used instead of `guidelines` when the entry realizes the first line.
    #[serde(default)]
    pub context_guidelines: Vec<String>,
}

/// Slots filled from the binding rather than from the rule name.
const DERIVED_SLOTS: [&str; 5] = ["speaker", "addressee", "topic", "opinion", "opinion_strong"];

#[derive(Debug, Clone)]
struct Key {
    text: String,
    /// `None` for keys without captures, which must match the name exactly.
    pattern: Option<Regex>,
    captures: Vec<String>,
    literal_len: usize,
}

impl Key {
    fn parse(text: &str) -> Result<Self, BankError> {
        let bad = |why: &str| BankError::Invalid(format!("key `{text}`: {why}"));
        let mut re = String::from("^");
        let mut captures = Vec::new();
        let mut literal_len = 0;
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            let (lit, tail) = rest.split_at(open);
            re.push_str(&regex::escape(lit));
            literal_len += lit.len();
            let close = tail.find('}').ok_or_else(|| bad("unclosed `{`"))?;
            let name = &tail[1..close];
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
                return Err(bad("capture names are lowercase words"));
            }
            if captures.iter().any(|c| c == name) {
                return Err(bad("repeated capture"));
            }
            re.push_str(&format!("(?P<{name}>[a-z0-9]+)"));
            captures.push(name.to_owned());
            rest = &tail[close + 1..];
        }
        if rest.contains('}') {
            return Err(bad("stray `}`"));
        }
        re.push_str(&regex::escape(rest));
        literal_len += rest.len();
        re.push('$');
        let pattern = if captures.is_empty() { None } else { Some(Regex::new(&re).map_err(|e| bad(&e.to_string()))?) };
        Ok(Key { text: text.to_owned(), pattern, captures, literal_len })
    }

    fn matches(&self, name: &str) -> Option<BTreeMap<String, String>> {
        match &self.pattern {
            None => (self.text == name).then(BTreeMap::new),
            Some(re) => {
                let caps = re.captures(name)?;
                Some(self.captures.iter().map(|c| (c.clone(), caps[c.as_str()].to_owned())).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BankError {
    #[error("malformed bank JSON: {0}")]
    Json(String),
    #[error("invalid bank: {0}")]
    Invalid(String),
}

/// Templates keyed by rule name. Keys may contain `{captures}` that match one
/// name segment, e.g. `greet_{speaker}_{addressee}`. An exact key beats any
/// pattern, and among patterns the one with the most literal text wins.
#[derive(Debug, Clone)]
pub struct Bank {
    keys: Vec<Key>,
    entries: Vec<Entry>,
}

/// The entry a rule resolved to, plus the name segments its key captured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lookup<'b> {
    pub key: &'b str,
    pub entry: &'b Entry,
    pub captures: BTreeMap<String, String>,
}

/// `{name}` placeholders in a template, in order of appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

impl Bank {
    pub fn from_json(text: &str) -> Result<Self, BankError> {
        let raw: BTreeMap<String, Entry> = serde_json::from_str(text).map_err(|e| BankError::Json(e.to_string()))?;
        let mut keys = Vec::with_capacity(raw.len());
        let mut entries = Vec::with_capacity(raw.len());
        for (text, entry) in raw {
            let key = Key::parse(&text)?;
            let invalid = |why: String| BankError::Invalid(format!("`{text}`: {why}"));
            if entry.guidelines.is_empty() {
                return Err(invalid("needs at least one guideline".into()));
            }
            if !entry.silent && entry.utterances.is_empty() {
                return Err(invalid("needs at least one utterance unless silent".into()));
            }
            if entry.silent && !entry.utterances.is_empty() {
                return Err(invalid("silent entries have no utterances".into()));
            }
            for t in entry.utterances.iter().chain(&entry.guidelines).chain(&entry.context_guidelines) {
                for slot in placeholders(t) {
                    if !DERIVED_SLOTS.contains(&slot) && !key.captures.iter().any(|c| c == slot) {
                        return Err(invalid(format!("unknown placeholder `{{{slot}}}`")));
                    }
                }
            }
            keys.push(key);
            entries.push(entry);
        }
        Ok(Bank { keys, entries })
    }

    pub fn shipped() -> Self {
        Self::from_json(DEFAULT_BANK).expect("shipped bank is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// A copy without the entry stored under exactly `key`.
    pub fn without(&self, key: &str) -> Bank {
        let (keys, entries) = self
            .keys
            .iter()
            .zip(&self.entries)
            .filter(|(k, _)| k.text != key)
            .map(|(k, e)| (k.clone(), e.clone()))
            .unzip();
        Bank { keys, entries }
    }

    pub fn lookup(&self, rule: Symbol) -> Option<Lookup<'_>> {
        let name = rule.as_str();
        self.keys
            .iter()
            .zip(&self.entries)
            .filter_map(|(k, e)| k.matches(name).map(|caps| (k, e, caps)))
            .max_by_key(|(k, _, _)| (k.pattern.is_none(), k.literal_len))
            .map(|(k, entry, captures)| Lookup { key: &k.text, entry, captures })
    }
}

fn slot_var(slot: &str) -> Option<Var> {
    match slot {
        "speaker" => Some(Var::new("C")),
        "addressee" => Some(Var::new("D")),
        "topic" => Some(Var::new("T")),
        "opinion" | "opinion_strong" => Some(Var::new("O")),
        _ => None,
    }
}

/// Whether `slot` can be filled for instances of a rule binding `vars`, with
/// `captures` taken from its name.
pub(crate) fn slot_available(slot: &str, captures: &BTreeMap<String, String>, vars: &BTreeSet<Var>) -> bool {
    let captured = |c: &str| captures.contains_key(c);
    match slot {
        "opinion" | "opinion_strong" => captured("polarity") || vars.contains(&Var::new("O")),
        // The addressee falls back to the speaker's partner.
        "addressee" => captured("addressee") || vars.contains(&Var::new("D")) || slot_available("speaker", captures, vars),
        _ => captured(slot) || slot_var(slot).is_some_and(|v| vars.contains(&v)),
    }
}

/// Rules of `program` the bank cannot realize: no entry, or a template with
/// a placeholder the rule cannot fill. Sorted by name.
pub fn coverage_check(bank: &Bank, program: &Program) -> Vec<Symbol> {
    program
        .rules_by_name()
        .filter(|rule| {
            let Some(found) = bank.lookup(rule.name) else { return true };
            let vars = rule.bound_vars();
            let templates = found.entry.utterances.iter().chain(&found.entry.guidelines).chain(&found.entry.context_guidelines);
            !templates.flat_map(|t| placeholders(t)).all(|slot| slot_available(slot, &found.captures, &vars))
        })
        .map(|r| r.name)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::model::build_ruleset;

    #[test]
    fn shipped_bank_covers_shipped_ruleset() {
        assert_eq!(coverage_check(&Bank::shipped(), &build_ruleset()), Vec::<Symbol>::new());
    }

    #[test]
    fn removing_greetings_is_detected() {
        let bank = Bank::shipped().without("greet_{speaker}_{addressee}");
        let missing = coverage_check(&bank, &build_ruleset());
        assert_eq!(missing, vec![Symbol::new("greet_alice_bob"), Symbol::new("greet_bob_alice")]);
    }

    #[test]
    fn empty_program_is_covered() {
        assert!(coverage_check(&Bank::shipped(), &parse_program("").unwrap()).is_empty());
    }

    #[test]
    fn exact_keys_beat_patterns() {
        let bank = Bank::shipped();
        assert_eq!(bank.lookup(Symbol::new("change_topic_weather_baseball")).unwrap().key, "change_topic_weather_baseball");
        let l = bank.lookup(Symbol::new("change_topic_weather_soccer")).unwrap();
        assert_eq!(l.captures["topic"], "soccer");
        assert_eq!(l.captures["from"], "weather");
    }

    #[test]
    fn unfillable_placeholder_is_uncovered() {
        let bank = Bank::from_json(r#"{"tick": {"utterances": ["about {topic}"], "guidelines": ["g"]}}"#).unwrap();
        let p = parse_program("rule tick: a(X) -o b(X).").unwrap();
        assert_eq!(coverage_check(&bank, &p), vec![Symbol::new("tick")]);
    }

    #[test]
    fn invalid_banks() {
        assert!(Bank::from_json(r#"{"x": {"utterances": ["hi"], "guidelines": []}}"#).is_err());
        assert!(Bank::from_json(r#"{"x": {"guidelines": ["g"]}}"#).is_err());
        assert!(Bank::from_json(r#"{"x": {"utterances": ["{mood}"], "guidelines": ["g"]}}"#).is_err());
        assert!(Bank::from_json(r#"{"x_{a": {"utterances": ["u"], "guidelines": ["g"]}}"#).is_err());
        assert!(matches!(Bank::from_json("["), Err(BankError::Json(_))));
    }

    #[test]
    fn placeholder_scan() {
        assert_eq!(placeholders("Good morning, {addressee}! {topic}"), vec!["addressee", "topic"]);
        assert!(placeholders("no slots").is_empty());
    }
}
