use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::{Arg, Pattern, Premise, Program, Rational, Rule, Var};
use crate::kernel::{Atom, State, Term, INT_MAX, INT_MIN};

/// Values of a rule's variables for one instance.
pub type Binding = BTreeMap<Var, Term>;

/// A rule together with a binding that makes it applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance<'p> {
    pub rule: &'p Rule,
    pub binding: Binding,
}

impl Instance<'_> {
    /// Atoms removed by firing, in premise order (`$` premises included).
    pub fn consumed(&self) -> Vec<Atom> {
        self.rule
            .consumed_patterns()
            .map(|p| ground(p, &self.binding).expect("matched premise is ground"))
            .collect()
    }

    /// Atoms added by firing: effects in order, then `$` premises.
    pub fn produced(&self) -> Vec<Atom> {
        self.rule
            .effects
            .iter()
            .chain(self.rule.preserved_patterns())
            .map(|p| ground(p, &self.binding).expect("effects were checked during matching"))
            .collect()
    }
}

/// Instantiates a pattern. `None` when a variable is unbound or arithmetic
/// leaves the integer range.
pub fn ground(pattern: &Pattern, binding: &Binding) -> Option<Atom> {
    let args = pattern
        .args
        .iter()
        .map(|a| match a {
            Arg::Const(t) => Some(*t),
            Arg::Var(v) => binding.get(v).copied(),
            Arg::Expr(e) => {
                let r = e.eval(|v| binding.get(&v).copied())?;
                let n = r.is_integer().then(|| r.to_integer())?;
                (INT_MIN as i64..=INT_MAX as i64).contains(&n).then_some(Term::Int(n as i32))
            }
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Atom::new(pattern.predicate, args))
}

/// Every applicable instance, ordered by rule name and then binding.
///
/// An instance is listed iff its matched premises pick distinct atom
/// occurrences from `state`, every guard holds, every `!absent` pattern has
/// no match in `state`, and every effect stays in the integer range.
/// Instances with identical bindings rewrite identically and are listed once.
pub fn applicable_instances<'p>(state: &State, program: &'p Program) -> Vec<Instance<'p>> {
    program
        .rules_by_name()
        .flat_map(|rule| {
            rule_bindings(state, rule, &Binding::new())
                .into_iter()
                .map(move |binding| Instance { rule, binding })
        })
        .collect()
}

/// Bindings under which `rule` applies and that extend `seed`.
pub fn rule_bindings(state: &State, rule: &Rule, seed: &Binding) -> BTreeSet<Binding> {
    let mut found = BTreeSet::new();
    let mut binding = seed.clone();
    let mut used = Vec::new();
    search(state, rule, 0, &mut binding, &mut used, &mut found);
    found
}

fn search(
    state: &State,
    rule: &Rule,
    index: usize,
    binding: &mut Binding,
    used: &mut Vec<Atom>,
    found: &mut BTreeSet<Binding>,
) {
    let Some(premise) = rule.premises.get(index) else {
        if rule.effects.iter().all(|e| ground(e, binding).is_some()) {
            found.insert(binding.clone());
        }
        return;
    };
    match premise {
        Premise::Consume(p) | Premise::Preserve(p) => {
            for (args, count) in state.with_predicate(p.predicate) {
                if args.len() != p.args.len() {
                    continue;
                }
                let taken = used.iter().filter(|a| a.predicate == p.predicate && a.args == args).count();
                if taken as u32 >= count {
                    continue;
                }
                let mut fresh = Vec::new();
                if unify(p, args, binding, &mut fresh) {
                    used.push(Atom::new(p.predicate, args.to_vec()));
                    search(state, rule, index + 1, binding, used, found);
                    used.pop();
                }
                for v in fresh {
                    binding.remove(&v);
                }
            }
        }
        Premise::Absent(p) => {
            let matched = state.with_predicate(p.predicate).any(|(args, _)| {
                if args.len() != p.args.len() {
                    return false;
                }
                let mut scratch = binding.clone();
                unify(p, args, &mut scratch, &mut Vec::new())
            });
            if !matched {
                search(state, rule, index + 1, binding, used, found);
            }
        }
        Premise::Guard(g) => {
            let lookup = |v: Var| binding.get(&v).copied();
            let holds = match (g.lhs.eval(lookup), g.rhs.eval(lookup)) {
                (Some(l), Some(r)) => g.op.holds(l, r),
                _ => false,
            };
            if holds {
                search(state, rule, index + 1, binding, used, found);
            }
        }
    }
}

/// Extends `binding` so that `pattern` matches `args`. Newly bound variables
/// are pushed to `fresh` so the caller can undo them; on failure the caller
/// still has to undo whatever was pushed.
fn unify(pattern: &Pattern, args: &[Term], binding: &mut Binding, fresh: &mut Vec<Var>) -> bool {
    for (a, t) in pattern.args.iter().zip(args) {
        match a {
            Arg::Const(c) => {
                if c != t {
                    return false;
                }
            }
            Arg::Var(v) => match binding.get(v) {
                Some(bound) if bound != t => return false,
                Some(_) => {}
                None => {
                    binding.insert(*v, *t);
                    fresh.push(*v);
                }
            },
            Arg::Expr(e) => {
                // Only effects carry expressions; evaluate against the binding.
                let Some(r) = e.eval(|v| binding.get(&v).copied()) else { return false };
                if Some(r) != t.as_int().map(|n| Rational::from_integer(n as i64)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Applies an instance: removes consumed occurrences, adds produced ones.
pub fn apply(state: &State, instance: &Instance<'_>) -> (State, Vec<Atom>, Vec<Atom>) {
    let consumed = instance.consumed();
    let produced = instance.produced();
    let mut next = state.clone();
    for a in &consumed {
        next.remove(a).expect("instance consumed an atom that is not in the state");
    }
    for a in &produced {
        next.insert(a.clone());
    }
    (next, consumed, produced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn state(atoms: &[&str]) -> State {
        atoms.iter().map(|a| crate::dsl::parse_atom(a).unwrap()).collect()
    }

    fn names(instances: &[Instance<'_>]) -> Vec<String> {
        instances
            .iter()
            .map(|i| {
                let b: Vec<String> = i.binding.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{}[{}]", i.rule.name, b.join(","))
            })
            .collect()
    }

    #[test]
    fn empty_state_has_no_instances() {
        let p = parse_program("rule a: p(X) -o q(X).\nrule b: t -o ().").unwrap();
        assert!(applicable_instances(&State::new(), &p).is_empty());
    }

    #[test]
    fn occurrences_must_be_distinct() {
        let p = parse_program("rule pair: p(X) * p(Y) -o q(X, Y).").unwrap();
        assert!(applicable_instances(&state(&["p(a)"]), &p).is_empty());
        let two = applicable_instances(&state(&["p(a)", "p(a)"]), &p);
        assert_eq!(names(&two), vec!["pair[X=a,Y=a]"]);
        let mixed = applicable_instances(&state(&["p(a)", "p(b)"]), &p);
        assert_eq!(names(&mixed), vec!["pair[X=a,Y=b]", "pair[X=b,Y=a]"]);
    }

    #[test]
    fn guards_absent_and_ordering() {
        let p = parse_program(
            "rule z: c(N) * (N > 1) -o c(N - 1).\n\
             rule a: c(N) * !absent stop(N) -o c(N + 1).",
        )
        .unwrap();
        let s = state(&["c(1)", "c(2)", "stop(2)"]);
        assert_eq!(names(&applicable_instances(&s, &p)), vec!["a[N=1]", "z[N=2]"]);
    }

    #[test]
    fn effects_out_of_range_disable_instance() {
        let p = parse_program("rule up: c(N) -o c(N + 1).").unwrap();
        assert!(applicable_instances(&state(&["c(255)"]), &p).is_empty());
        assert_eq!(applicable_instances(&state(&["c(254)"]), &p).len(), 1);
    }

    #[test]
    fn preserve_consumes_and_reproduces() {
        let p = parse_program("rule r: $keep(X) * tok -o got(X).").unwrap();
        let s = state(&["keep(a)", "tok"]);
        let inst = &applicable_instances(&s, &p)[0];
        let (next, consumed, produced) = apply(&s, inst);
        assert_eq!(consumed.len(), 2);
        assert_eq!(produced.len(), 2);
        assert_eq!(next, state(&["keep(a)", "got(a)"]));
    }

    #[test]
    fn absent_with_fresh_variables() {
        let p = parse_program("rule r: who(X) * !absent likes(X, _Y) -o lonely(X).").unwrap();
        let s = state(&["who(a)", "who(b)", "likes(a, c)"]);
        assert_eq!(names(&applicable_instances(&s, &p)), vec!["r[X=b]"]);
    }

    #[test]
    fn seeded_binding_restricts() {
        let p = parse_program("rule r: who(X) -o ().").unwrap();
        let s = state(&["who(a)", "who(b)"]);
        let mut seed = Binding::new();
        seed.insert(Var::new("X"), Term::sym("b"));
        let found = rule_bindings(&s, &p.rules()[0], &seed);
        assert_eq!(found.len(), 1);
    }
}
