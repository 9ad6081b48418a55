//! Ground terms, atoms and the multiset state that rules rewrite.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest and largest integer a numeric argument may hold.
pub const INT_MIN: i32 = -255;
pub const INT_MAX: i32 = 255;

fn interner() -> &'static Mutex<HashMap<&'static str, &'static str>> {
    static INTERNER: OnceLock<Mutex<HashMap<&'static str, &'static str>>> = OnceLock::new();
    INTERNER.get_or_init(|| Mutex::new(HashMap::new()))
}

/// An interned identifier. Equality and hashing are by pointer; ordering is
/// lexicographic on the text so iteration order never depends on interning
/// order.
#[derive(Clone, Copy)]
pub struct Symbol(&'static str);

impl Symbol {
    /// Interns `name`. Panics if it is not a valid symbol; use
    /// [`Symbol::try_new`] for untrusted input.
    pub fn new(name: &str) -> Self {
        Self::try_new(name).unwrap_or_else(|| panic!("invalid symbol {name:?}"))
    }

    pub fn try_new(name: &str) -> Option<Self> {
        if !is_symbol_text(name) {
            return None;
        }
        Some(Self::intern(name))
    }

    /// Interns without validation. Used for variable names, which share the
    /// interner but follow a different lexical rule.
    pub(crate) fn intern(name: &str) -> Self {
        let mut table = interner().lock().expect("symbol interner poisoned");
        if let Some(&s) = table.get(name) {
            return Symbol(s);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        table.insert(leaked, leaked);
        Symbol(leaked)
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

/// Lowercase letter first, then lowercase alphanumerics and underscores.
pub fn is_symbol_text(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::ptr::hash(self.0, state)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            std::cmp::Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Symbol::try_new(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid symbol {s:?}")))
    }
}

/// A ground argument: a constant symbol or a small integer (counters).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i32),
    Sym(Symbol),
}

impl Term {
    pub fn sym(name: &str) -> Self {
        Term::Sym(Symbol::new(name))
    }

    pub fn as_int(&self) -> Option<i32> {
        match self {
            Term::Int(n) => Some(*n),
            Term::Sym(_) => None,
        }
    }

    pub fn as_sym(&self) -> Option<Symbol> {
        match self {
            Term::Sym(s) => Some(*s),
            Term::Int(_) => None,
        }
    }
}

impl From<Symbol> for Term {
    fn from(s: Symbol) -> Self {
        Term::Sym(s)
    }
}

impl From<i32> for Term {
    fn from(n: i32) -> Self {
        Term::Int(n)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Sym(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Term::Int(n) => serializer.serialize_i32(*n),
            Term::Sym(s) => s.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Sym(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) if (INT_MIN as i64..=INT_MAX as i64).contains(&n) => Ok(Term::Int(n as i32)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("integer {n} out of range"))),
            Raw::Sym(s) => Symbol::try_new(&s)
                .map(Term::Sym)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid symbol {s:?}"))),
        }
    }
}

/// A ground fact such as `feels(alice, annoyed)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: Symbol, args: Vec<Term>) -> Self {
        Self { predicate, args }
    }

    /// Convenience constructor: each argument that parses as an integer
    /// becomes [`Term::Int`], everything else a symbol.
    pub fn parse_parts(predicate: &str, args: &[&str]) -> Self {
        let args = args
            .iter()
            .map(|a| a.parse::<i32>().map(Term::Int).unwrap_or_else(|_| Term::sym(a)))
            .collect();
        Self::new(Symbol::new(predicate), args)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("atom {0} is not present in the state")]
    AtomAbsent(Atom),
}

/// A multiset of atoms. Stored counts are always positive.
///
/// Atoms are grouped by predicate so pattern matching only scans candidates
/// with the right head symbol. Iteration is in sorted order, which makes every
/// walk over a state independent of insertion history.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct State {
    by_predicate: BTreeMap<Symbol, BTreeMap<Vec<Term>, u32>>,
    len: usize,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: Atom) {
        *self
            .by_predicate
            .entry(atom.predicate)
            .or_default()
            .entry(atom.args)
            .or_insert(0) += 1;
        self.len += 1;
    }

    pub fn remove(&mut self, atom: &Atom) -> Result<(), StateError> {
        let absent = || StateError::AtomAbsent(atom.clone());
        let group = self.by_predicate.get_mut(&atom.predicate).ok_or_else(absent)?;
        let count = group.get_mut(&atom.args).ok_or_else(absent)?;
        *count -= 1;
        if *count == 0 {
            group.remove(&atom.args);
            if group.is_empty() {
                self.by_predicate.remove(&atom.predicate);
            }
        }
        self.len -= 1;
        Ok(())
    }

    pub fn count(&self, atom: &Atom) -> u32 {
        self.by_predicate
            .get(&atom.predicate)
            .and_then(|g| g.get(&atom.args))
            .copied()
            .unwrap_or(0)
    }

    /// Total number of atom occurrences.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Distinct argument lists stored under `predicate`, with multiplicities.
    pub fn with_predicate(&self, predicate: Symbol) -> impl Iterator<Item = (&[Term], u32)> {
        self.by_predicate
            .get(&predicate)
            .into_iter()
            .flat_map(|g| g.iter().map(|(args, n)| (args.as_slice(), *n)))
    }

    /// Distinct atoms with their counts, in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (Atom, u32)> + '_ {
        self.by_predicate.iter().flat_map(|(p, g)| {
            g.iter().map(move |(args, n)| (Atom::new(*p, args.clone()), *n))
        })
    }

    /// `a` is contained in `self` as a multiset.
    pub fn contains_all<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> bool {
        let mut need: BTreeMap<&Atom, u32> = BTreeMap::new();
        for a in atoms {
            *need.entry(a).or_insert(0) += 1;
        }
        need.into_iter().all(|(a, n)| self.count(a) >= n)
    }

    /// One line per distinct atom, `xN` suffix for multiplicities above one,
    /// lines sorted lexicographically.
    pub fn serialize(&self) -> String {
        let mut lines: Vec<String> = self
            .iter()
            .map(|(a, n)| if n > 1 { format!("{a} x{n}") } else { a.to_string() })
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut s = State::new();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter().map(|(a, n)| (a.to_string(), n))).finish()
    }
}
