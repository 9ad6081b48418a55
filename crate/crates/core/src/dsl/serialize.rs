//! Canonical text form of programs. `parse_program(serialize_program(p))`
//! yields a program structurally equal to `p`.

use std::fmt;

use super::ast::{Affine, Arg, Guard, Pattern, Premise, Program, Rational, Rule};

fn write_rational(f: &mut fmt::Formatter<'_>, r: Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.to_integer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        match self.var {
            None => write_rational(f, self.constant),
            Some(v) => {
                if self.coeff == one {
                    write!(f, "{v}")?;
                } else if self.coeff == -one {
                    write!(f, "-{v}")?;
                } else {
                    write_rational(f, self.coeff)?;
                    write!(f, " * {v}")?;
                }
                if self.constant > zero {
                    f.write_str(" + ")?;
                    write_rational(f, self.constant)
                } else if self.constant < zero {
                    f.write_str(" - ")?;
                    write_rational(f, -self.constant)
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.lhs, self.op.as_str(), self.rhs)
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Const(t) => write!(f, "{t}"),
            Arg::Var(v) => write!(f, "{v}"),
            Arg::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Consume(p) => write!(f, "{p}"),
            Premise::Preserve(p) => write!(f, "${p}"),
            Premise::Absent(p) => write!(f, "!absent {p}"),
            Premise::Guard(g) => write!(f, "{g}"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}:", self.name)?;
        if self.weight != Rational::from_integer(1) {
            f.write_str(" weight ")?;
            write_rational(f, self.weight)?;
            f.write_str(":")?;
        }
        for (i, p) in self.premises.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { " * " })?;
            write!(f, "{p}")?;
        }
        f.write_str(" -o ")?;
        if self.effects.is_empty() {
            f.write_str("()")?;
        }
        for (i, e) in self.effects.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(".")
    }
}

pub fn serialize_program(p: &Program) -> String {
    let mut out = String::new();
    for r in p.rules() {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}
