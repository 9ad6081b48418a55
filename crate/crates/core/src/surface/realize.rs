use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::Var;
use crate::engine::{SplitMix64, Trace, TraceStep};
use crate::kernel::{State, Symbol, Term};

use super::bank::{Bank, Lookup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("step {index}: no bank entry for rule `{rule}`")]
    UnknownRule { index: usize, rule: Symbol },
    #[error("step {index}: cannot fill `{{{slot}}}` for rule `{rule}`")]
    UnfilledSlot { index: usize, rule: Symbol, slot: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptLine {
    /// Index of the step that produced the line.
    pub step: usize,
    /// `None` for narration.
    pub speaker: Option<Symbol>,
    pub utterance: String,
    pub guideline: String,
    /// Guidelines of silent steps next to this line.
    pub annotations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realized {
    Line(TranscriptLine),
    /// A bookkeeping step: nothing is said, but it still has a guideline.
    Silent { step: usize, guideline: String },
}

/// How variants are chosen.
#[derive(Debug, Clone)]
pub enum Picker {
    Seeded(SplitMix64),
    /// Always variant 0, for golden output.
    First,
}

impl Picker {
    pub fn seeded(seed: u64) -> Self {
        Picker::Seeded(SplitMix64::new(seed))
    }

    fn pick<'a>(&mut self, options: &'a [String]) -> &'a str {
        let i = match self {
            Picker::Seeded(rng) => rng.below(options.len() as u64) as usize,
            Picker::First => 0,
        };
        &options[i]
    }
}

/// Who is talking to whom, read off `partner(X, Y)` atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cast {
    partners: BTreeMap<Symbol, Symbol>,
}

impl Cast {
    pub fn from_state(state: &State) -> Self {
        let partners = state
            .with_predicate(Symbol::new("partner"))
            .filter_map(|(args, _)| match args {
                [Term::Sym(a), Term::Sym(b)] => Some((*a, *b)),
                _ => None,
            })
            .collect();
        Cast { partners }
    }

    pub fn partner(&self, agent: Symbol) -> Option<Symbol> {
        self.partners.get(&agent).copied()
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Slots<'a> {
    step: &'a TraceStep,
    found: &'a Lookup<'a>,
    cast: &'a Cast,
}

impl Slots<'_> {
    fn bound_sym(&self, var: &str) -> Option<Symbol> {
        self.step.binding.get(&Var::new(var)).and_then(Term::as_sym)
    }

    fn named(&self, capture: &str, var: &str) -> Option<Symbol> {
        match self.found.captures.get(capture) {
            Some(c) => Symbol::try_new(c),
            None => self.bound_sym(var),
        }
    }

    fn speaker(&self) -> Option<Symbol> {
        self.named("speaker", "C")
    }

    fn addressee(&self) -> Option<Symbol> {
        self.named("addressee", "D").or_else(|| self.speaker().and_then(|s| self.cast.partner(s)))
    }

    fn polarity(&self) -> Option<Symbol> {
        self.named("polarity", "O")
    }

    fn value(&self, slot: &str) -> Option<String> {
        let strong = slot == "opinion_strong";
        match slot {
            "speaker" => self.speaker().map(|s| capitalize(s.as_str())),
            "addressee" => self.addressee().map(|s| capitalize(s.as_str())),
            "topic" => self.named("topic", "T").map(|s| s.as_str().to_owned()),
            "opinion" | "opinion_strong" => {
                let word = match (self.polarity()?.as_str(), strong) {
                    ("positive", false) => "like",
                    ("negative", false) => "don't like",
                    ("positive", true) => "love",
                    ("negative", true) => "can't stand",
                    _ => return None,
                };
                Some(word.to_owned())
            }
            other => self.found.captures.get(other).cloned(),
        }
    }

    fn fill(&self, template: &str) -> Result<String, SurfaceError> {
        let mut out = String::with_capacity(template.len());
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}').map(|c| open + c) else { break };
            out.push_str(&rest[..open]);
            let slot = &rest[open + 1..close];
            let value = self.value(slot).ok_or_else(|| SurfaceError::UnfilledSlot {
                index: self.step.index,
                rule: self.step.rule,
                slot: slot.to_owned(),
            })?;
            out.push_str(&value);
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Turns one step into a line of dialogue, or into a guideline alone for
/// silent steps. The utterance variant is drawn first, then the guideline.
/// `opening` selects the entry's context guidelines, if it has any.
pub fn realize_step(
    step: &TraceStep,
    bank: &Bank,
    cast: &Cast,
    picker: &mut Picker,
    opening: bool,
) -> Result<Realized, SurfaceError> {
    let found = bank.lookup(step.rule).ok_or(SurfaceError::UnknownRule { index: step.index, rule: step.rule })?;
    let slots = Slots { step, found: &found, cast };
    let entry = found.entry;
    if entry.silent {
        let guideline = slots.fill(picker.pick(&entry.guidelines))?;
        return Ok(Realized::Silent { step: step.index, guideline });
    }
    let utterance = slots.fill(picker.pick(&entry.utterances))?;
    let pool = if opening && !entry.context_guidelines.is_empty() { &entry.context_guidelines } else { &entry.guidelines };
    let guideline = slots.fill(picker.pick(pool))?;
    Ok(Realized::Line(TranscriptLine {
        step: step.index,
        speaker: slots.speaker(),
        utterance,
        guideline,
        annotations: Vec::new(),
    }))
}

/// Realizes a trace with seeded variant choice.
pub fn realize_trace(trace: &Trace, bank: &Bank, seed: u64) -> Result<Vec<TranscriptLine>, SurfaceError> {
    realize_with(trace, bank, &mut Picker::seeded(seed))
}

/// One line per spoken step, in order. Guidelines of silent steps annotate
/// the next line, or the last one if nothing follows.
pub fn realize_with(trace: &Trace, bank: &Bank, picker: &mut Picker) -> Result<Vec<TranscriptLine>, SurfaceError> {
    let cast = Cast::from_state(&trace.initial);
    let mut lines: Vec<TranscriptLine> = Vec::new();
    let mut held = Vec::new();
    for step in &trace.steps {
        match realize_step(step, bank, &cast, picker, lines.is_empty())? {
            Realized::Line(mut line) => {
                line.annotations = std::mem::take(&mut held);
                lines.push(line);
            }
            Realized::Silent { guideline, .. } => held.push(guideline),
        }
    }
    if let Some(last) = lines.last_mut() {
        last.annotations.append(&mut held);
    }
    Ok(lines)
}

fn dialogue(line: &TranscriptLine) -> String {
    match line.speaker {
        Some(s) => format!("{}: {}", capitalize(s.as_str()), line.utterance),
        None => line.utterance.clone(),
    }
}

/// Speaker-tagged lines, each followed by its indented guideline and notes.
pub fn render_transcript(lines: &[TranscriptLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&dialogue(line));
        out.push('\n');
        out.push_str(&format!("    Guideline: {}\n", line.guideline));
        for note in &line.annotations {
            out.push_str(&format!("    Note: {note}\n"));
        }
    }
    out
}

/// A two-column pipe table headed `Dialogue | Guideline`.
pub fn render_table(lines: &[TranscriptLine]) -> String {
    let cell = |s: &str| s.replace('|', "\\|");
    let mut out = String::from("Dialogue | Guideline\n--- | ---\n");
    for line in lines {
        let mut guide = cell(&line.guideline);
        for note in &line.annotations {
            guide.push(' ');
            guide.push_str(&cell(note));
        }
        out.push_str(&format!("{} | {}\n", cell(&dialogue(line)), guide));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{replay, run, Binding};
    use crate::model::{build_ruleset, default_scenario, exemplars};

    fn fig3() -> Trace {
        replay("default", &default_scenario().initial_state(), &build_ruleset(), &exemplars::fig3_steps()).unwrap()
    }

    fn step(rule: &str, binding: &[(&str, &str)]) -> TraceStep {
        TraceStep {
            index: 0,
            rule: Symbol::new(rule),
            binding: binding.iter().map(|(v, t)| (Var::new(v), Term::sym(t))).collect::<Binding>(),
            consumed: Vec::new(),
            produced: Vec::new(),
        }
    }

    fn line(r: Realized) -> TranscriptLine {
        match r {
            Realized::Line(l) => l,
            Realized::Silent { .. } => panic!("expected a spoken line"),
        }
    }

    #[test]
    fn greeting_first_variant() {
        let l = line(realize_step(&step("greet_bob_alice", &[]), &Bank::shipped(), &Cast::default(), &mut Picker::First, false).unwrap());
        assert_eq!(l.speaker, Some(Symbol::new("bob")));
        assert_eq!(l.utterance, "Good morning, Alice!");
        assert_eq!(l.guideline, "Greeting someone acknowledges them and lets them know you are open to conversation.");
    }

    #[test]
    fn goodbye_first_variant() {
        let l = line(realize_step(&step("say_goodbye_bob_alice", &[]), &Bank::shipped(), &Cast::default(), &mut Picker::First, false).unwrap());
        assert_eq!(l.utterance, "Take care.");
    }

    #[test]
    fn opinions_are_worded() {
        let s = step("answer_enthusiastic", &[("C", "alice"), ("T", "pop"), ("O", "negative")]);
        let l = line(realize_step(&s, &Bank::shipped(), &Cast::default(), &mut Picker::First, false).unwrap());
        assert_eq!(l.utterance, "Oh, I can't stand pop!");
    }

    #[test]
    fn addressee_falls_back_to_partner() {
        let cast = Cast::from_state(&default_scenario().initial_state());
        let s = step("ask_about_weekend", &[("C", "bob")]);
        let l = line(realize_step(&s, &Bank::shipped(), &cast, &mut Picker::First, false).unwrap());
        assert_eq!(l.utterance, "How was your weekend, Alice?");
        let err = realize_step(&s, &Bank::shipped(), &Cast::default(), &mut Picker::First, false).unwrap_err();
        assert!(matches!(err, SurfaceError::UnfilledSlot { slot, .. } if slot == "addressee"));
    }

    #[test]
    fn unknown_rule() {
        let err = realize_step(&step("dance", &[]), &Bank::shipped(), &Cast::default(), &mut Picker::First, false).unwrap_err();
        assert_eq!(err, SurfaceError::UnknownRule { index: 0, rule: Symbol::new("dance") });
    }

    #[test]
    fn fig3_transcript() {
        let lines = realize_with(&fig3(), &Bank::shipped(), &mut Picker::First).unwrap();
        let text: Vec<String> = lines.iter().map(dialogue).collect();
        assert_eq!(
            text,
            [
                "Bob: Good morning, Alice!",
                "Alice: Good morning, Bob!",
                "Bob: This weather today is really nice--good for playing sports",
                "Bob: I did a lot of playing baseball on Saturday It was nice out, just like today.",
                "Bob: I think baseball is a lot more interesting than people give it credit for.",
                "Bob: Some of the people I know like baseball.",
                "Bob: Some of the people I know like baseball.",
                "Bob: Some of the people I know like baseball.",
                "Alice: Uh-huh, well...I have to go now. Goodbye.",
                "Bob: Take care.",
            ]
        );
        assert_eq!(lines[0].guideline, "Good places to start a conversation: waiting in line, a club meeting, on the bus.");
        assert_eq!(lines[1].guideline, "Greeting someone acknowledges them and lets them know you are open to conversation.");
        // The silent annoyance step annotates Alice's exit line.
        assert_eq!(lines[8].annotations, ["People get annoyed when one person does most of the talking."]);
    }

    #[test]
    fn empty_trace_is_empty_transcript() {
        let t = replay("default", &default_scenario().initial_state(), &build_ruleset(), &[]).unwrap();
        assert!(realize_trace(&t, &Bank::shipped(), 1).unwrap().is_empty());
        assert_eq!(render_transcript(&[]), "");
        assert_eq!(render_table(&[]), "Dialogue | Guideline\n--- | ---\n");
    }

    #[test]
    fn seeded_realization_is_deterministic_and_varied() {
        let t = run("default", &default_scenario().initial_state(), &build_ruleset(), 11, 200);
        let bank = Bank::shipped();
        let a = realize_trace(&t, &bank, 5).unwrap();
        assert_eq!(a, realize_trace(&t, &bank, 5).unwrap());
        let distinct: std::collections::BTreeSet<_> =
            (0..20).map(|s| render_transcript(&realize_trace(&t, &bank, s).unwrap())).collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn no_unfilled_slots_in_sampled_output() {
        let s = default_scenario();
        let p = build_ruleset();
        let bank = Bank::shipped();
        for seed in 0..200 {
            let t = run("default", &s.initial_state(), &p, seed, 200);
            let text = render_transcript(&realize_trace(&t, &bank, seed).unwrap());
            assert!(!text.contains('{') && !text.contains('}'), "seed {seed}: {text}");
        }
    }

    #[test]
    fn table_escapes_pipes() {
        let l = TranscriptLine {
            step: 0,
            speaker: None,
            utterance: "a | b".into(),
            guideline: "g".into(),
            annotations: vec!["n".into()],
        };
        assert_eq!(render_table(&[l]), "Dialogue | Guideline\n--- | ---\na \\| b | g n\n");
    }
}
