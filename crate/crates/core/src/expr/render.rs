//! Text rendering in the parser's own grammar, so output can be read back.

use std::fmt;

use num_traits::{One, Signed};

use super::{Atom, Expr, Func, Monomial, Q};

fn write_atom(f: &mut fmt::Formatter<'_>, a: &Atom, e: i32) -> fmt::Result {
    match a {
        Atom::Sym(s) => write!(f, "{s}")?,
        Atom::Fun(k) if k.func == Func::Recip => {
            write!(f, "({})", k.arg)?;
            return write!(f, "^{}", -e);
        }
        Atom::Fun(k) => write!(f, "{}({})", k.func.name(), k.arg)?,
    }
    if e != 1 {
        write!(f, "^{e}")?;
    }
    Ok(())
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (i, (a, e)) in self.factors().iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write_atom(f, a, *e)?;
        }
        Ok(())
    }
}

/// Writes `c*m` with the sign of `c` already stripped by the caller.
fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &Q) -> fmt::Result {
    if m.is_one() {
        return write!(f, "{c}");
    }
    if !c.is_one() {
        write!(f, "{c}*")?;
    }
    write!(f, "{m}")
}

impl Expr {
    /// Terms in display order: the constant term last.
    fn display_terms(&self) -> impl Iterator<Item = &(Monomial, Q)> {
        let t = self.terms();
        let split = usize::from(t.first().is_some_and(|(m, _)| m.is_one()));
        t[split..].iter().chain(t[..split].iter())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.display_terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write_term(f, m, &c.abs())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, parse_with, Assumptions, Symbol};

    #[test]
    fn renders_parseable_text() {
        let cases = [
            "h_t - nu*(h_xx + h_yy)",
            "3/2*x^2*h_x - 1",
            "sin(s)*cos(s)^2 + exp(-x)",
            "lambda/(2*lambda - 2)",
            "x*(x^2 + y^2)^-1 - 1/(2*lambda)*y",
            "arctan(x - y)",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let back = parse(&e.to_string()).unwrap();
            assert_eq!(back, e, "{src} -> {e}");
        }
    }

    #[test]
    fn negative_powers_need_assumption_to_read_back() {
        let a = Assumptions::with(&[Symbol::T, Symbol::LAMBDA]);
        let e = parse_with("h + x^2/(4*lambda*t)", &a).unwrap();
        let text = e.to_string();
        assert!(text.contains("t^-1"), "{text}");
        assert_eq!(parse_with(&text, &a).unwrap(), e);
    }

    #[test]
    fn simple_forms() {
        assert_eq!(parse("0").unwrap().to_string(), "0");
        assert_eq!(parse("-x").unwrap().to_string(), "-x");
        assert_eq!(parse("2 - x").unwrap().to_string(), "-x + 2");
        assert_eq!(parse("h_yx").unwrap().to_string(), "h_xy");
    }
}
