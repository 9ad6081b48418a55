use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::dsl::{Program, Rational};
use crate::kernel::{Atom, State, Symbol};

use super::matcher::{applicable_instances, apply, rule_bindings, Binding, Instance};
use super::rng::SplitMix64;

pub const DEFAULT_STEP_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: usize,
    pub rule: Symbol,
    pub binding: Binding,
    pub consumed: Vec<Atom>,
    pub produced: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// No rule instance applies to the final state.
    Quiescence,
    /// The run stopped at its step cap with instances still applicable.
    StepCap,
    /// A replayed step list ended while instances were still applicable.
    Incomplete,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Quiescence => "quiescence",
            Termination::StepCap => "step-cap",
            Termination::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub scenario: String,
    /// `None` for traces built by replay rather than by random choice.
    pub seed: Option<u64>,
    pub initial: State,
    pub steps: Vec<TraceStep>,
    pub final_state: State,
    pub termination: Termination,
}

impl Trace {
    /// States before each step, followed by the final state.
    pub fn states(&self) -> Vec<State> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut s = self.initial.clone();
        for step in &self.steps {
            out.push(s.clone());
            for a in &step.consumed {
                s.remove(a).expect("trace consumed an absent atom");
            }
            for a in &step.produced {
                s.insert(a.clone());
            }
        }
        out.push(s);
        out
    }
}

fn fire(state: &State, instance: &Instance<'_>, index: usize) -> (State, TraceStep) {
    let (next, consumed, produced) = apply(state, instance);
    let step = TraceStep {
        index,
        rule: instance.rule.name,
        binding: instance.binding.clone(),
        consumed,
        produced,
    };
    (next, step)
}

/// Picks one instance with probability proportional to its rule's weight.
///
/// Weights are scaled to integers by the least common denominator and a
/// single `below(total)` draw selects the instance, so with equal weights
/// the draw is exactly `below(instances.len())`.
pub fn choose<'a, 'p>(instances: &'a [Instance<'p>], rng: &mut SplitMix64) -> &'a Instance<'p> {
    assert!(!instances.is_empty());
    let scale = instances.iter().fold(1i64, |acc, i| lcm(acc, *i.rule.weight.denom()));
    let weights: Vec<u64> = instances
        .iter()
        .map(|i| (i.rule.weight * Rational::from_integer(scale)).to_integer() as u64)
        .collect();
    let total: u64 = weights.iter().sum();
    let mut r = rng.below(total);
    for (inst, w) in instances.iter().zip(&weights) {
        if r < *w {
            return inst;
        }
        r -= w;
    }
    unreachable!("draw exceeded total weight")
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }
    a / gcd(a, b) * b
}

/// One nondeterministic rewrite. `None` means the state is quiescent.
pub fn step(state: &State, program: &Program, rng: &mut SplitMix64, index: usize) -> Option<(State, TraceStep)> {
    let instances = applicable_instances(state, program);
    if instances.is_empty() {
        return None;
    }
    let chosen = choose(&instances, rng);
    Some(fire(state, chosen, index))
}

/// Runs from `initial` until quiescence or `step_cap` steps.
pub fn run(scenario: &str, initial: &State, program: &Program, seed: u64, step_cap: usize) -> Trace {
    assert!(step_cap >= 1, "step cap must be at least 1");
    let mut rng = SplitMix64::new(seed);
    let mut state = initial.clone();
    let mut steps = Vec::new();
    let termination = loop {
        if steps.len() == step_cap {
            break if applicable_instances(&state, program).is_empty() {
                Termination::Quiescence
            } else {
                Termination::StepCap
            };
        }
        match step(&state, program, &mut rng, steps.len()) {
            Some((next, s)) => {
                state = next;
                steps.push(s);
            }
            None => break Termination::Quiescence,
        }
    };
    Trace { scenario: scenario.to_owned(), seed: Some(seed), initial: initial.clone(), steps, final_state: state, termination }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: no rule named `{rule}`")]
    UnknownRule { index: usize, rule: String },
    #[error("step {index}: `{rule}` is not applicable with the given binding")]
    InapplicableStep { index: usize, rule: Symbol },
    #[error("step {index}: `{rule}` has {count} applicable instances extending the given binding")]
    AmbiguousStep { index: usize, rule: Symbol, count: usize },
}

impl ReplayError {
    pub fn index(&self) -> usize {
        match self {
            ReplayError::UnknownRule { index, .. }
            | ReplayError::InapplicableStep { index, .. }
            | ReplayError::AmbiguousStep { index, .. } => *index,
        }
    }
}

/// Applies the given instances in order, bypassing random choice.
///
/// A binding may be partial: the step fires the unique applicable instance
/// that extends it, and is ambiguous when several do.
pub fn replay(
    scenario: &str,
    initial: &State,
    program: &Program,
    steps: &[(Symbol, Binding)],
) -> Result<Trace, ReplayError> {
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(steps.len());
    for (index, (name, partial)) in steps.iter().enumerate() {
        let rule = program
            .rule(*name)
            .ok_or_else(|| ReplayError::UnknownRule { index, rule: name.to_string() })?;
        let found = rule_bindings(&state, rule, partial);
        let binding = match found.len() {
            0 => return Err(ReplayError::InapplicableStep { index, rule: *name }),
            1 => found.into_iter().next().expect("one binding"),
            count => return Err(ReplayError::AmbiguousStep { index, rule: *name, count }),
        };
        let (next, s) = fire(&state, &Instance { rule, binding }, index);
        state = next;
        out.push(s);
    }
    let termination = if applicable_instances(&state, program).is_empty() {
        Termination::Quiescence
    } else {
        Termination::Incomplete
    };
    Ok(Trace {
        scenario: scenario.to_owned(),
        seed: None,
        initial: initial.clone(),
        steps: out,
        final_state: state,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace diverges at step {index}: {reason}")]
pub struct Divergence {
    /// Index of the first bad step; `steps.len()` when only the final state
    /// disagrees.
    pub index: usize,
    pub reason: String,
}

fn sorted(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort();
    atoms
}

/// Recomputes every step of a recorded trace and compares it with what was
/// recorded.
pub fn validate(trace: &Trace, program: &Program) -> Result<(), Divergence> {
    let mut state = trace.initial.clone();
    for (index, step) in trace.steps.iter().enumerate() {
        let fail = |reason: String| Divergence { index, reason };
        if step.index != index {
            return Err(fail(format!("recorded index {} out of sequence", step.index)));
        }
        let rule = program.rule(step.rule).ok_or_else(|| fail(format!("no rule named `{}`", step.rule)))?;
        if rule.bound_vars() != step.binding.keys().copied().collect() {
            return Err(fail(format!("binding does not cover exactly the variables of `{}`", step.rule)));
        }
        if !rule_bindings(&state, rule, &step.binding).contains(&step.binding) {
            return Err(fail(format!("`{}` is not applicable with the recorded binding", step.rule)));
        }
        let (next, s) = fire(&state, &Instance { rule, binding: step.binding.clone() }, index);
        if sorted(s.consumed.clone()) != sorted(step.consumed.clone()) {
            return Err(fail("recorded consumed atoms differ from the recomputed ones".into()));
        }
        if sorted(s.produced.clone()) != sorted(step.produced.clone()) {
            return Err(fail("recorded produced atoms differ from the recomputed ones".into()));
        }
        state = next;
    }
    if state != trace.final_state {
        return Err(Divergence { index: trace.steps.len(), reason: "final state differs from replayed state".into() });
    }
    Ok(())
}

/// `(producer step, atom, consumer step)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CausalEdge {
    pub producer: usize,
    pub atom: Atom,
    pub consumer: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CausalGraph {
    pub edges: Vec<CausalEdge>,
}

impl CausalGraph {
    pub fn into_step(&self, consumer: usize) -> impl Iterator<Item = &CausalEdge> {
        self.edges.iter().filter(move |e| e.consumer == consumer)
    }
}

/// Links each consumed occurrence to the step that produced it.
///
/// Identical atoms are tracked as separate occurrences and consumed oldest
/// first. Occurrences from the initial state have no producer and give no
/// edge.
pub fn causal_links(trace: &Trace) -> CausalGraph {
    let mut available: HashMap<Atom, VecDeque<Option<usize>>> = HashMap::new();
    for (atom, n) in trace.initial.iter() {
        available.entry(atom).or_default().extend(std::iter::repeat_n(None, n as usize));
    }
    let mut edges = Vec::new();
    for step in &trace.steps {
        for atom in &step.consumed {
            let producer = available.get_mut(atom).and_then(VecDeque::pop_front).flatten();
            if let Some(p) = producer {
                edges.push(CausalEdge { producer: p, atom: atom.clone(), consumer: step.index });
            }
        }
        for atom in &step.produced {
            available.entry(atom.clone()).or_default().push_back(Some(step.index));
        }
    }
    CausalGraph { edges }
}

/// Number of times each rule fired.
pub fn rule_counts(trace: &Trace) -> BTreeMap<Symbol, usize> {
    let mut counts = BTreeMap::new();
    for s in &trace.steps {
        *counts.entry(s.rule).or_insert(0) += 1;
    }
    counts
}
