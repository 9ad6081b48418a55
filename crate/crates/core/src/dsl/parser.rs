use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::kernel::{Atom, Symbol, Term, INT_MAX, INT_MIN};

use super::ast::{Affine, Arg, Cmp, Guard, Pattern, Premise, Program, Rational, Rule, Var};
use super::lexer::{tokenize, Span, Tok, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Name of the rule the diagnostic belongs to, when it got that far.
    pub rule: Option<Symbol>,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    fn error(rule: Option<Symbol>, span: Span, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, rule, span, message: message.into() }
    }

    fn warning(rule: Option<Symbol>, span: Span, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, rule, span, message: message.into() }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}: {}", self.span.line, self.span.col, self.severity, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)
    }
}

/// Parses and checks a rule file. Warnings are dropped; use
/// [`parse_program_verbose`] to see them.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    match parse_program_verbose(src) {
        (Some(p), _) => Ok(p),
        (None, diags) => Err(diags.into_iter().filter(|d| d.severity == Severity::Error).collect()),
    }
}

/// Returns the program when there are no errors, plus every diagnostic in
/// source order.
pub fn parse_program_verbose(src: &str) -> (Option<Program>, Vec<Diagnostic>) {
    let (tokens, lex_errors) = tokenize(src);
    let mut diags: Vec<Diagnostic> =
        lex_errors.into_iter().map(|e| Diagnostic::error(None, e.span, e.message)).collect();
    let mut parser = Parser { tokens, pos: 0, diags: Vec::new() };
    let parsed = parser.rules();
    diags.append(&mut parser.diags);
    let program = check(parsed, &mut diags);
    diags.sort_by_key(|d| (d.span, d.severity));
    let ok = diags.iter().all(|d| d.severity != Severity::Error);
    (ok.then_some(program), diags)
}

/// Parses a single ground atom such as `spoken(bob,3)`.
pub fn parse_atom(text: &str) -> Result<Atom, String> {
    let (tokens, errors) = tokenize(text);
    if let Some(e) = errors.first() {
        return Err(e.message.clone());
    }
    let mut parser = Parser { tokens, pos: 0, diags: Vec::new() };
    let parsed = parser.pattern(Ctx::Premise).map_err(|d| d.message)?;
    if parser.peek() != &Tok::Eof {
        return Err(format!("trailing input after atom in {text:?}"));
    }
    let args = parsed
        .pattern
        .args
        .into_iter()
        .map(|a| match a {
            Arg::Const(t) => Ok(t),
            _ => Err(format!("atom {text:?} is not ground")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(parsed.pattern.predicate, args))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Premise,
    Effect,
}

#[derive(Debug)]
struct SpannedPattern {
    pattern: Pattern,
    span: Span,
    var_spans: Vec<(Var, Span)>,
}

#[derive(Debug)]
enum SpannedPremise {
    Consume(SpannedPattern),
    Preserve(SpannedPattern),
    Absent(SpannedPattern),
    Guard(Guard, Span),
}

#[derive(Debug)]
struct ParsedRule {
    name: Symbol,
    name_span: Span,
    weight: Rational,
    weight_span: Span,
    premises: Vec<SpannedPremise>,
    effects: Vec<SpannedPattern>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == want {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(None, self.span(), format!("expected {what}, found {}", self.peek()))
    }

    fn rules(&mut self) -> Vec<ParsedRule> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            match self.rule() {
                Ok(r) => out.push(r),
                Err(d) => {
                    self.diags.push(d);
                    self.recover();
                }
            }
        }
        out
    }

    /// Skips past the next `.` so one broken rule does not hide the rest.
    fn recover(&mut self) {
        loop {
            match self.bump().tok {
                Tok::Dot | Tok::Eof => break,
                _ => {}
            }
        }
    }

    fn rule(&mut self) -> PResult<ParsedRule> {
        match self.peek() {
            Tok::Ident(k) if k == "rule" => {
                self.bump();
            }
            _ => return Err(self.unexpected("`rule`")),
        }
        let name_span = self.span();
        let name = match self.bump().tok {
            Tok::Ident(s) => Symbol::try_new(&s)
                .ok_or_else(|| Diagnostic::error(None, name_span, format!("invalid rule name `{s}`")))?,
            other => {
                return Err(Diagnostic::error(None, name_span, format!("expected rule name, found {other}")))
            }
        };
        let in_rule = |mut d: Diagnostic| {
            d.rule = Some(name);
            d
        };
        self.expect(Tok::Colon, "`:` after rule name").map_err(in_rule)?;

        let mut weight = Rational::from_integer(1);
        let mut weight_span = name_span;
        if matches!(self.peek(), Tok::Ident(k) if k == "weight") && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            weight_span = self.span();
            weight = self.rational().map_err(in_rule)?;
            self.expect(Tok::Colon, "`:` after weight").map_err(in_rule)?;
        }

        let mut premises = vec![self.premise().map_err(in_rule)?];
        while *self.peek() == Tok::Star {
            self.bump();
            premises.push(self.premise().map_err(in_rule)?);
        }
        self.expect(Tok::Lolli, "`*` or `-o`").map_err(in_rule)?;

        let mut effects = Vec::new();
        if *self.peek() == Tok::LParen && *self.peek_at(1) == Tok::RParen {
            self.bump();
            self.bump();
        } else {
            effects.push(self.pattern(Ctx::Effect).map_err(in_rule)?);
            while *self.peek() == Tok::Star {
                self.bump();
                effects.push(self.pattern(Ctx::Effect).map_err(in_rule)?);
            }
        }
        self.expect(Tok::Dot, "`*` or `.` to end the rule").map_err(in_rule)?;
        Ok(ParsedRule { name, name_span, weight, weight_span, premises, effects })
    }

    fn premise(&mut self) -> PResult<SpannedPremise> {
        match self.peek() {
            Tok::Dollar => {
                self.bump();
                Ok(SpannedPremise::Preserve(self.pattern(Ctx::Premise)?))
            }
            Tok::Bang => {
                self.bump();
                match self.peek() {
                    Tok::Ident(k) if k == "absent" => {
                        self.bump();
                        Ok(SpannedPremise::Absent(self.pattern(Ctx::Premise)?))
                    }
                    _ => Err(self.unexpected("`absent` after `!`")),
                }
            }
            Tok::LParen => {
                let span = self.bump().span;
                let lhs = self.expr()?;
                let op = match self.bump().tok {
                    Tok::Cmp(s) => match s {
                        "<" => Cmp::Lt,
                        "<=" => Cmp::Le,
                        "=" => Cmp::Eq,
                        ">=" => Cmp::Ge,
                        _ => Cmp::Gt,
                    },
                    other => {
                        return Err(Diagnostic::error(
                            None,
                            self.tokens[self.pos.saturating_sub(1)].span,
                            format!("expected comparison operator, found {other}"),
                        ))
                    }
                };
                let rhs = self.expr()?;
                self.expect(Tok::RParen, "`)` to close the guard")?;
                Ok(SpannedPremise::Guard(Guard { lhs, op, rhs }, span))
            }
            Tok::Ident(_) => Ok(SpannedPremise::Consume(self.pattern(Ctx::Premise)?)),
            _ => Err(self.unexpected("a premise")),
        }
    }

    fn pattern(&mut self, ctx: Ctx) -> PResult<SpannedPattern> {
        let span = self.span();
        let predicate = match self.bump().tok {
            Tok::Ident(s) => Symbol::try_new(&s)
                .ok_or_else(|| Diagnostic::error(None, span, format!("invalid predicate name `{s}`")))?,
            other => return Err(Diagnostic::error(None, span, format!("expected predicate, found {other}"))),
        };
        let mut args = Vec::new();
        let mut var_spans = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                loop {
                    let arg_span = self.span();
                    let arg = self.arg(ctx)?;
                    if let Some(v) = arg.vars() {
                        var_spans.push((v, arg_span));
                    }
                    args.push(arg);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
        }
        if args.len() > 3 {
            return Err(Diagnostic::error(None, span, format!("`{predicate}` has {} arguments; at most 3 are allowed", args.len())));
        }
        Ok(SpannedPattern { pattern: Pattern { predicate, args }, span, var_spans })
    }

    fn arg(&mut self, ctx: Ctx) -> PResult<Arg> {
        let span = self.span();
        if let Tok::Ident(s) = self.peek().clone() {
            self.bump();
            return Symbol::try_new(&s)
                .map(|s| Arg::Const(Term::Sym(s)))
                .ok_or_else(|| Diagnostic::error(None, span, format!("invalid symbol `{s}`")));
        }
        let e = self.expr()?;
        let int_of = |r: Rational| -> PResult<Term> {
            if !r.is_integer() {
                return Err(Diagnostic::error(None, span, format!("argument `{r}` is not an integer")));
            }
            let n = r.to_integer();
            if !(INT_MIN as i64..=INT_MAX as i64).contains(&n) {
                return Err(Diagnostic::error(None, span, format!("integer {n} is outside {INT_MIN}..={INT_MAX}")));
            }
            Ok(Term::Int(n as i32))
        };
        match (e.var, ctx) {
            (None, _) => Ok(Arg::Const(int_of(e.constant)?)),
            (Some(v), _) if e.coeff == Rational::from_integer(1) && e.constant == Rational::from_integer(0) => {
                Ok(Arg::Var(v))
            }
            (Some(_), Ctx::Premise) => Err(Diagnostic::error(
                None,
                span,
                "arithmetic is only allowed in effects and guards; bind a variable and add a guard",
            )),
            (Some(_), Ctx::Effect) => {
                if !e.is_integral() {
                    return Err(Diagnostic::error(None, span, "effect arithmetic must use integer coefficients"));
                }
                Ok(Arg::Expr(e))
            }
        }
    }

    fn rational(&mut self) -> PResult<Rational> {
        let span = self.span();
        let num = match self.bump().tok {
            Tok::Int(n) => n,
            other => return Err(Diagnostic::error(None, span, format!("expected number, found {other}"))),
        };
        if *self.peek() == Tok::Slash {
            self.bump();
            let dspan = self.span();
            match self.bump().tok {
                Tok::Int(0) => Err(Diagnostic::error(None, dspan, "division by zero")),
                Tok::Int(d) => Ok(Rational::new(num, d)),
                other => Err(Diagnostic::error(None, dspan, format!("expected denominator, found {other}"))),
            }
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    fn expr(&mut self) -> PResult<Affine> {
        let start = self.span();
        let mut acc = if *self.peek() == Tok::Minus {
            self.bump();
            negate(self.term()?)
        } else {
            self.term()?
        };
        loop {
            let negative = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let t = self.term()?;
            acc = add(acc, if negative { negate(t) } else { t }).ok_or_else(|| {
                Diagnostic::error(None, start, "an arithmetic expression may mention at most one variable")
            })?;
        }
        Ok(acc.normalized())
    }

    fn term(&mut self) -> PResult<Affine> {
        match self.peek().clone() {
            Tok::Var(name) => {
                let span = self.bump().span;
                Ok(Affine::var(var_named(&name, span)?))
            }
            Tok::Int(_) => {
                let q = self.rational()?;
                if *self.peek() == Tok::Star {
                    self.bump();
                    let span = self.span();
                    match self.bump().tok {
                        Tok::Var(name) => {
                            let v = var_named(&name, span)?;
                            Ok(Affine { coeff: q, var: Some(v), constant: Rational::from_integer(0) })
                        }
                        other => Err(Diagnostic::error(None, span, format!("expected variable after `*`, found {other}"))),
                    }
                } else {
                    Ok(Affine::constant(q))
                }
            }
            _ => Err(self.unexpected("a number or variable")),
        }
    }
}

fn var_named(name: &str, span: Span) -> PResult<Var> {
    if name == "_" {
        return Err(Diagnostic::error(None, span, "anonymous variable `_` is not supported; give it a name such as `_X`"));
    }
    Ok(Var::new(name))
}

fn negate(a: Affine) -> Affine {
    Affine { coeff: -a.coeff, var: a.var, constant: -a.constant }
}

fn add(a: Affine, b: Affine) -> Option<Affine> {
    let var = match (a.var, b.var) {
        (Some(x), Some(y)) if x != y => return None,
        (x, y) => x.or(y),
    };
    Some(Affine { coeff: a.coeff + b.coeff, var, constant: a.constant + b.constant })
}

/// Static checks that need the whole rule or the whole program.
fn check(parsed: Vec<ParsedRule>, diags: &mut Vec<Diagnostic>) -> Program {
    let mut rules = Vec::new();
    let mut names: HashMap<Symbol, Span> = HashMap::new();
    let mut signature: BTreeMap<Symbol, (usize, Span)> = BTreeMap::new();

    for pr in parsed {
        let rule_name = Some(pr.name);
        let before = diags.iter().filter(|d| d.severity == Severity::Error).count();

        if let Some(first) = names.get(&pr.name) {
            diags.push(Diagnostic::error(
                rule_name,
                pr.name_span,
                format!("duplicate rule name `{}` (first defined at {first})", pr.name),
            ));
        } else {
            names.insert(pr.name, pr.name_span);
        }
        if pr.weight <= Rational::from_integer(0) {
            diags.push(Diagnostic::error(rule_name, pr.weight_span, "rule weight must be positive"));
        }

        let mut all_patterns: Vec<&SpannedPattern> = Vec::new();
        let mut bound: BTreeSet<Var> = BTreeSet::new();
        let mut occurrences: BTreeMap<Var, (usize, Span)> = BTreeMap::new();
        let note = |v: Var, span: Span, occ: &mut BTreeMap<Var, (usize, Span)>| {
            occ.entry(v).or_insert((0, span)).0 += 1;
        };
        let mut has_match = false;
        for premise in &pr.premises {
            match premise {
                SpannedPremise::Consume(p) | SpannedPremise::Preserve(p) => {
                    has_match = true;
                    for &(v, s) in &p.var_spans {
                        bound.insert(v);
                        note(v, s, &mut occurrences);
                    }
                    all_patterns.push(p);
                }
                SpannedPremise::Absent(p) => {
                    for &(v, s) in &p.var_spans {
                        if bound.contains(&v) {
                            note(v, s, &mut occurrences);
                        }
                    }
                    all_patterns.push(p);
                }
                SpannedPremise::Guard(g, span) => {
                    for v in g.vars() {
                        if !bound.contains(&v) {
                            diags.push(Diagnostic::error(
                                rule_name,
                                *span,
                                format!("guard uses variable {v}, which no earlier premise binds"),
                            ));
                        }
                        note(v, *span, &mut occurrences);
                    }
                }
            }
        }
        if !has_match {
            diags.push(Diagnostic::error(
                rule_name,
                pr.name_span,
                format!("rule `{}` consumes nothing; at least one matched premise is required", pr.name),
            ));
        }
        for e in &pr.effects {
            for &(v, s) in &e.var_spans {
                if bound.contains(&v) {
                    note(v, s, &mut occurrences);
                } else {
                    diags.push(Diagnostic::error(rule_name, s, format!("unbound variable {v} in effect")));
                }
            }
            all_patterns.push(e);
        }
        for p in all_patterns {
            let arity = p.pattern.args.len();
            match signature.get(&p.pattern.predicate) {
                Some(&(a, first)) if a != arity => diags.push(Diagnostic::error(
                    rule_name,
                    p.span,
                    format!(
                        "predicate `{}` used with arity {arity} but with arity {a} at {first}",
                        p.pattern.predicate
                    ),
                )),
                Some(_) => {}
                None => {
                    signature.insert(p.pattern.predicate, (arity, p.span));
                }
            }
        }
        for (v, (n, span)) in &occurrences {
            if *n == 1 && !v.is_quiet() {
                diags.push(Diagnostic::warning(
                    rule_name,
                    *span,
                    format!("variable {v} appears only once; rename it to _{v} if that is intended"),
                ));
            }
        }

        let after = diags.iter().filter(|d| d.severity == Severity::Error).count();
        if after == before {
            rules.push(Rule {
                name: pr.name,
                weight: pr.weight,
                premises: pr
                    .premises
                    .into_iter()
                    .map(|p| match p {
                        SpannedPremise::Consume(p) => Premise::Consume(p.pattern),
                        SpannedPremise::Preserve(p) => Premise::Preserve(p.pattern),
                        SpannedPremise::Absent(p) => Premise::Absent(p.pattern),
                        SpannedPremise::Guard(g, _) => Premise::Guard(g),
                    })
                    .collect(),
                effects: pr.effects.into_iter().map(|p| p.pattern).collect(),
            });
        }
    }
    Program::from_checked(rules, signature.into_iter().map(|(k, (a, _))| (k, a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greet_rule_parses() {
        let p = parse_program("rule greet_bob_alice: met(bob,alice) * ready(bob) -o greeted(bob,alice) * ready(bob).")
            .unwrap();
        assert_eq!(p.len(), 1);
        let r = &p.rules()[0];
        assert_eq!(r.name.as_str(), "greet_bob_alice");
        assert_eq!(r.premises.len(), 2);
        assert_eq!(r.effects.len(), 2);
    }

    #[test]
    fn unbound_effect_variable() {
        let errs = parse_program("rule bad: a(X) -o b(Y).").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "unbound variable Y in effect");
        assert_eq!(errs[0].span, Span { line: 1, col: 21 });
        assert_eq!(errs[0].rule, Some(Symbol::new("bad")));
    }

    #[test]
    fn empty_source() {
        let (p, diags) = parse_program_verbose("");
        assert_eq!(p.unwrap().len(), 0);
        assert!(diags.is_empty());
        assert_eq!(parse_program("% only a comment\n").unwrap().len(), 0);
    }

    #[test]
    fn weights_guards_and_arithmetic() {
        let src = "rule annoyed: weight 3/2: spoken(D, S) * elapsed(E) * (S > 2/3 * E) -o spoken(D, S + 1) * elapsed(E).";
        let p = parse_program(src).unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.weight, Rational::new(3, 2));
        match &r.premises[2] {
            Premise::Guard(g) => {
                assert_eq!(g.op, Cmp::Gt);
                assert_eq!(g.rhs.coeff, Rational::new(2, 3));
            }
            other => panic!("expected guard, got {other:?}"),
        }
        assert!(matches!(&r.effects[0].args[1], Arg::Expr(e) if e.constant == Rational::from_integer(1)));
    }

    #[test]
    fn preserve_absent_and_empty_effects() {
        let p = parse_program("rule r: $p(X) * !absent q(X, Y) * t -o ().").unwrap();
        let r = &p.rules()[0];
        assert!(matches!(r.premises[0], Premise::Preserve(_)));
        assert!(matches!(r.premises[1], Premise::Absent(_)));
        assert!(r.effects.is_empty());
        assert_eq!(p.signature()[&Symbol::new("t")], 0);
    }

    #[test]
    fn arity_conflict_is_reported() {
        let errs = parse_program("rule a: p(x) -o q.\nrule b: p(x, y) -o q.").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].span, Span { line: 2, col: 9 });
        assert!(errs[0].message.contains("arity 2"));
    }

    #[test]
    fn duplicate_names_and_spontaneous_rules() {
        let errs = parse_program("rule a: p -o q.\nrule a: q -o p.").unwrap_err();
        assert!(errs[0].message.contains("duplicate rule name"));
        let errs = parse_program("rule a: (1 < 2) -o q.").unwrap_err();
        assert!(errs[0].message.contains("consumes nothing"));
    }

    #[test]
    fn guard_must_follow_binding() {
        let errs = parse_program("rule a: (N > 1) * c(N) -o c(N).").unwrap_err();
        assert!(errs[0].message.contains("no earlier premise binds"));
    }

    #[test]
    fn arithmetic_is_rejected_in_premises() {
        let errs = parse_program("rule a: c(N + 1) -o c(N).").unwrap_err();
        assert!(errs[0].message.contains("only allowed in effects"));
        let errs = parse_program("rule a: c(N) -o c(1/2 * N).").unwrap_err();
        assert!(errs[0].message.contains("integer coefficients"));
        let errs = parse_program("rule a: c(N) * d(M) -o c(N + M).").unwrap_err();
        assert!(errs[0].message.contains("at most one variable"));
    }

    #[test]
    fn recovery_reports_several_errors() {
        let (p, diags) = parse_program_verbose("rule a p -o q.\nrule b: p -o .\nrule c: p -o q.");
        assert!(p.is_none());
        let errors: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
        assert_eq!(errors.len(), 2);
        assert_eq!(errors[0].span.line, 1);
        assert_eq!(errors[1].span.line, 2);
    }

    #[test]
    fn singleton_variables_warn() {
        let (p, diags) = parse_program_verbose("rule a: c(N) * d(_M) -o c(1).");
        assert!(p.is_some());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("N appears only once"));
    }

    #[test]
    fn diagnostic_rendering() {
        let errs = parse_program("rule bad: a(X) -o b(Y).").unwrap_err();
        assert_eq!(errs[0].render("x.phatic"), "x.phatic:1:21: error: unbound variable Y in effect");
    }

    #[test]
    fn ground_atoms() {
        assert_eq!(parse_atom("spoken(bob,3)").unwrap(), Atom::parse_parts("spoken", &["bob", "3"]));
        assert_eq!(parse_atom("affinity(bob, alice, -2)").unwrap(), Atom::parse_parts("affinity", &["bob", "alice", "-2"]));
        assert_eq!(parse_atom("turn").unwrap(), Atom::parse_parts("turn", &[]));
        assert!(parse_atom("p(X)").is_err());
        assert!(parse_atom("p(a) q").is_err());
    }
}
