use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{Atom, State, Symbol, Term, INT_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feeling {
    Happy,
    Sad,
    Annoyed,
    Content,
}

impl Feeling {
    pub const ALL: [Feeling; 4] = [Feeling::Happy, Feeling::Sad, Feeling::Annoyed, Feeling::Content];

    pub fn as_str(self) -> &'static str {
        match self {
            Feeling::Happy => "happy",
            Feeling::Sad => "sad",
            Feeling::Annoyed => "annoyed",
            Feeling::Content => "content",
        }
    }

    pub fn from_symbol(s: Symbol) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s.as_str())
    }
}

impl fmt::Display for Feeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicKind {
    SmallTalk,
    Sport,
    Music,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opinion {
    pub agent: Symbol,
    pub topic: Symbol,
    pub polarity: Polarity,
}

/// Initial conditions for one conversation.
///
/// `related` lists unordered pairs; the relation is made symmetric when the
/// initial state is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub agents: Vec<Symbol>,
    pub topics: BTreeMap<Symbol, TopicKind>,
    pub opinions: Vec<Opinion>,
    pub related: Vec<(Symbol, Symbol)>,
    #[serde(default)]
    pub feelings: BTreeMap<Symbol, Feeling>,
    /// Keyed `"from>to"`; missing pairs start at 0.
    #[serde(default)]
    pub affinity: BTreeMap<String, i32>,
    pub turn_budget: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario JSON: {0}")]
    Json(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

pub const MIN_TURN_BUDGET: u32 = 3;
pub const MAX_TURN_BUDGET: u32 = 200;

/// Bob and Alice, the eight topics, and a 12-turn budget.
pub fn default_scenario() -> Scenario {
    let s = Symbol::new;
    let topics = [
        ("weekend", TopicKind::SmallTalk),
        ("weather", TopicKind::SmallTalk),
        ("baseball", TopicKind::Sport),
        ("soccer", TopicKind::Sport),
        ("running", TopicKind::Sport),
        ("pop", TopicKind::Music),
        ("country", TopicKind::Music),
        ("rock", TopicKind::Music),
    ];
    let op = |agent: &str, topic: &str, polarity| Opinion { agent: s(agent), topic: s(topic), polarity };
    use Polarity::*;
    let opinions = vec![
        op("bob", "weather", Positive),
        op("bob", "weekend", Positive),
        op("bob", "baseball", Positive),
        op("bob", "rock", Positive),
        op("bob", "pop", Negative),
        op("alice", "weather", Positive),
        op("alice", "weekend", Positive),
        op("alice", "soccer", Positive),
        op("alice", "pop", Positive),
        op("alice", "baseball", Negative),
    ];
    let (small, sports, music) = (["weekend", "weather"], ["baseball", "soccer", "running"], ["pop", "country", "rock"]);
    let mut related = Vec::new();
    for hub in small {
        for t in sports.iter().chain(&music) {
            related.push((s(hub), s(t)));
        }
    }
    for group in [&sports, &music] {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                related.push((s(a), s(b)));
            }
        }
    }
    Scenario {
        name: "default".into(),
        agents: vec![s("bob"), s("alice")],
        topics: topics.into_iter().map(|(t, k)| (s(t), k)).collect(),
        opinions,
        related,
        feelings: BTreeMap::new(),
        affinity: BTreeMap::new(),
        turn_budget: 12,
    }
}

/// Agent and topic names end up inside rule names such as
/// `greet_bob_alice`, so they may not contain underscores.
fn check_name(what: &str, s: Symbol) -> Result<(), ScenarioError> {
    if s.as_str().contains('_') {
        return Err(invalid(format!("{what} `{s}` may not contain `_`")));
    }
    if ["none", "nobody", "nothing", "noted", "unsure", "positive", "negative"].contains(&s.as_str()) {
        return Err(invalid(format!("{what} `{s}` is a reserved word")));
    }
    Ok(())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios always serialize")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let [a, b] = self.agents[..] else {
            return Err(invalid(format!("expected exactly 2 agents, found {}", self.agents.len())));
        };
        if a == b {
            return Err(invalid("the two agents must differ"));
        }
        check_name("agent", a)?;
        check_name("agent", b)?;
        for &t in self.topics.keys() {
            check_name("topic", t)?;
            if self.agents.contains(&t) {
                return Err(invalid(format!("`{t}` is both an agent and a topic")));
            }
        }
        let known_topic = |t: Symbol| {
            if self.topics.contains_key(&t) {
                Ok(())
            } else {
                Err(invalid(format!("unknown topic `{t}`")))
            }
        };
        let known_agent = |x: Symbol| {
            if self.agents.contains(&x) {
                Ok(())
            } else {
                Err(invalid(format!("unknown agent `{x}`")))
            }
        };
        let mut seen = BTreeSet::new();
        for o in &self.opinions {
            known_agent(o.agent)?;
            known_topic(o.topic)?;
            if !seen.insert((o.agent, o.topic)) {
                return Err(invalid(format!("{} has two opinions about {}", o.agent, o.topic)));
            }
        }
        for &(x, y) in &self.related {
            known_topic(x)?;
            known_topic(y)?;
            if x == y {
                return Err(invalid(format!("topic `{x}` cannot be related to itself")));
            }
        }
        let related = self.related_pairs();
        for (&t, &kind) in &self.topics {
            let hubbed = related
                .iter()
                .any(|&(x, y)| x == t && self.topics.get(&y) == Some(&TopicKind::SmallTalk));
            if kind != TopicKind::SmallTalk && !hubbed {
                return Err(invalid(format!("topic `{t}` is not related to any small-talk topic")));
            }
        }
        if !self.topics.values().any(|k| *k == TopicKind::SmallTalk) {
            return Err(invalid("at least one small-talk topic is required"));
        }
        for &x in self.feelings.keys() {
            known_agent(x)?;
        }
        for (key, &v) in &self.affinity {
            let (x, y) = self.affinity_key(key)?;
            known_agent(x)?;
            known_agent(y)?;
            if x == y {
                return Err(invalid(format!("affinity `{key}` must name two different agents")));
            }
            if v.abs() > INT_MAX / 2 {
                return Err(invalid(format!("affinity `{key}` = {v} is out of range")));
            }
        }
        if !(MIN_TURN_BUDGET..=MAX_TURN_BUDGET).contains(&self.turn_budget) {
            return Err(invalid(format!(
                "turn budget must be between {MIN_TURN_BUDGET} and {MAX_TURN_BUDGET}, got {}",
                self.turn_budget
            )));
        }
        Ok(())
    }

    fn affinity_key(&self, key: &str) -> Result<(Symbol, Symbol), ScenarioError> {
        let bad = || invalid(format!("affinity key `{key}` should look like `bob>alice`"));
        let (x, y) = key.split_once('>').ok_or_else(bad)?;
        Ok((Symbol::try_new(x).ok_or_else(bad)?, Symbol::try_new(y).ok_or_else(bad)?))
    }

    /// Both directions of every listed pair, sorted.
    pub fn related_pairs(&self) -> BTreeSet<(Symbol, Symbol)> {
        self.related.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect()
    }

    pub fn is_related(&self, x: Symbol, y: Symbol) -> bool {
        self.related.iter().any(|&p| p == (x, y) || p == (y, x))
    }

    pub fn opinion(&self, agent: Symbol, topic: Symbol) -> Option<Polarity> {
        self.opinions.iter().find(|o| o.agent == agent && o.topic == topic).map(|o| o.polarity)
    }

    pub fn small_talk_topics(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.topics.iter().filter(|(_, k)| **k == TopicKind::SmallTalk).map(|(t, _)| *t)
    }

    pub fn partner(&self, agent: Symbol) -> Option<Symbol> {
        self.agents.iter().copied().find(|&x| x != agent && self.agents.contains(&agent))
    }

    pub fn initial_feeling(&self, agent: Symbol) -> Feeling {
        self.feelings.get(&agent).copied().unwrap_or(Feeling::Content)
    }

    pub fn initial_affinity(&self, from: Symbol, to: Symbol) -> i32 {
        self.affinity.get(&format!("{from}>{to}")).copied().unwrap_or(0)
    }

    /// The multiset the conversation ruleset starts from.
    pub fn initial_state(&self) -> State {
        let sym = |s: Symbol| Term::Sym(s);
        let c = |name: &str| Term::sym(name);
        let atom = |p: &str, args: Vec<Term>| Atom::new(Symbol::new(p), args);
        let mut st = State::new();
        for &x in &self.agents {
            for &y in &self.agents {
                if x == y {
                    continue;
                }
                st.insert(atom("partner", vec![sym(x), sym(y)]));
                st.insert(atom("to_greet", vec![sym(x), sym(y)]));
                st.insert(atom("farewell_due", vec![sym(x), sym(y)]));
                st.insert(atom("affinity", vec![sym(x), sym(y), Term::Int(self.initial_affinity(x, y))]));
            }
            st.insert(atom("feels", vec![sym(x), c(self.initial_feeling(x).as_str())]));
            st.insert(atom("spoken", vec![sym(x), Term::Int(0)]));
        }
        for o in &self.opinions {
            st.insert(atom("opinion", vec![sym(o.agent), sym(o.topic), c(o.polarity.as_str())]));
        }
        for (x, y) in self.related_pairs() {
            st.insert(atom("related", vec![sym(x), sym(y)]));
        }
        st.insert(atom("opposite", vec![c("positive"), c("negative")]));
        st.insert(atom("opposite", vec![c("negative"), c("positive")]));
        st.insert(atom("elapsed", vec![Term::Int(0)]));
        st.insert(atom("budget", vec![Term::Int(self.turn_budget as i32)]));
        st.insert(atom("convo", vec![c("active")]));
        st.insert(atom("flow", vec![c("opening")]));
        st.insert(atom("floor", vec![c("nobody")]));
        st.insert(atom("last_said", vec![c("nobody"), c("nothing"), c("none")]));
        st.insert(atom("last_tone", vec![c("none")]));
        st
    }
}
