use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

use crate::kernel::{Symbol, Term};

pub type Rational = Ratio<i64>;

/// A rule variable (`C`, `Topic`, `_Prev`). Scoped to one rule.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Symbol);

impl Var {
    /// Panics unless `name` starts with an uppercase letter or an underscore
    /// followed by at least one more character.
    pub fn new(name: &str) -> Self {
        assert!(is_var_text(name), "invalid variable name {name:?}");
        Var(Symbol::intern(name))
    }

    pub fn as_str(&self) -> &'static str {
        self.0.as_str()
    }

    /// `_`-prefixed variables are exempt from the singleton warning.
    pub fn is_quiet(&self) -> bool {
        self.as_str().starts_with('_')
    }
}

pub fn is_var_text(s: &str) -> bool {
    let mut chars = s.chars();
    let rest_ok = |c: char| c.is_ascii_alphanumeric() || c == '_';
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => chars.all(rest_ok),
        Some('_') => s.len() > 1 && chars.all(rest_ok),
        _ => false,
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `coeff * var + constant`, with at most one variable.
///
/// Normal form: `var.is_none()` iff `coeff == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub coeff: Rational,
    pub var: Option<Var>,
    pub constant: Rational,
}

impl Affine {
    pub fn constant(c: Rational) -> Self {
        Self { coeff: Rational::from_integer(0), var: None, constant: c }
    }

    pub fn var(v: Var) -> Self {
        Self { coeff: Rational::from_integer(1), var: Some(v), constant: Rational::from_integer(0) }
    }

    pub(crate) fn normalized(mut self) -> Self {
        if self.coeff == Rational::from_integer(0) {
            self.var = None;
        }
        if self.var.is_none() {
            self.coeff = Rational::from_integer(0);
        }
        self
    }

    /// `None` when the variable is unbound or bound to a symbol.
    pub fn eval(&self, lookup: impl Fn(Var) -> Option<Term>) -> Option<Rational> {
        let mut value = self.constant;
        if let Some(v) = self.var {
            let n = lookup(v)?.as_int()?;
            value += self.coeff * Rational::from_integer(n as i64);
        }
        Some(value)
    }

    pub fn is_integral(&self) -> bool {
        self.coeff.is_integer() && self.constant.is_integer()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, lhs: Rational, rhs: Rational) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

/// Arithmetic side condition on numeric arguments, e.g. `(S > 2/3 * E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub lhs: Affine,
    pub op: Cmp,
    pub rhs: Affine,
}

impl Guard {
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lhs.var.into_iter().chain(self.rhs.var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Const(Term),
    Var(Var),
    /// Only valid in effects; always has integer coefficients there.
    Expr(Affine),
}

impl Arg {
    pub fn vars(&self) -> Option<Var> {
        match self {
            Arg::Const(_) => None,
            Arg::Var(v) => Some(*v),
            Arg::Expr(e) => e.var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub predicate: Symbol,
    pub args: Vec<Arg>,
}

impl Pattern {
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(Arg::vars)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Premise {
    /// Matched and consumed.
    Consume(Pattern),
    /// `$p`: matched, consumed and produced again unchanged.
    Preserve(Pattern),
    /// `!absent p`: no atom matching `p` may exist. Checked, not consumed.
    Absent(Pattern),
    Guard(Guard),
}

impl Premise {
    /// Patterns that take part in matching against state occurrences.
    pub fn matched_pattern(&self) -> Option<&Pattern> {
        match self {
            Premise::Consume(p) | Premise::Preserve(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: Symbol,
    pub weight: Rational,
    pub premises: Vec<Premise>,
    pub effects: Vec<Pattern>,
}

impl Rule {
    /// Variables bound by consumed or preserved premises.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        self.premises
            .iter()
            .filter_map(Premise::matched_pattern)
            .flat_map(Pattern::vars)
            .collect()
    }

    pub fn consumed_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.premises.iter().filter_map(Premise::matched_pattern)
    }

    pub fn preserved_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.premises.iter().filter_map(|p| match p {
            Premise::Preserve(p) => Some(p),
            _ => None,
        })
    }
}

/// An unordered collection of rules with a consistent predicate signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    signature: BTreeMap<Symbol, usize>,
    by_name: BTreeMap<Symbol, usize>,
}

impl Program {
    /// Builds a program from rules that have already passed checking.
    pub(crate) fn from_checked(rules: Vec<Rule>, signature: BTreeMap<Symbol, usize>) -> Self {
        let by_name = rules.iter().enumerate().map(|(i, r)| (r.name, i)).collect();
        Self { rules, signature, by_name }
    }

    /// Rules in source order.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Rules ordered by name.
    pub fn rules_by_name(&self) -> impl Iterator<Item = &Rule> {
        self.by_name.values().map(|&i| &self.rules[i])
    }

    pub fn rule(&self, name: Symbol) -> Option<&Rule> {
        self.by_name.get(&name).map(|&i| &self.rules[i])
    }

    pub fn signature(&self) -> &BTreeMap<Symbol, usize> {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Returns a copy without the named rules. The signature is recomputed.
    pub fn without_rules(&self, names: &[Symbol]) -> Program {
        let rules: Vec<Rule> = self.rules.iter().filter(|r| !names.contains(&r.name)).cloned().collect();
        let mut signature = BTreeMap::new();
        for r in &rules {
            for p in r.premises.iter().filter_map(|p| match p {
                Premise::Consume(p) | Premise::Preserve(p) | Premise::Absent(p) => Some(p),
                Premise::Guard(_) => None,
            }) {
                signature.insert(p.predicate, p.args.len());
            }
            for p in &r.effects {
                signature.insert(p.predicate, p.args.len());
            }
        }
        Program::from_checked(rules, signature)
    }
}
