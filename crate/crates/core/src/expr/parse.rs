//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('+'|'-') factor | base ('^' integer)?
//! base   := rational | symbol | '(' expr ')' | func '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'arctan'
//! ```
//!
//! Exponents are integers and may be negative (`x^-1`, `x^(-2)`).

use num_bigint::BigInt;

use super::{apply_func, Assumptions, Expr, Func, Symbol, Q};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = src[start..i].parse().expect("digits");
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(Error::Syntax {
                pos: i,
                msg: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    assume: &'a Assumptions,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.offset(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.factor()?;
            } else if self.eat('/') {
                let at = self.offset();
                let literal = matches!(self.peek(), Some(Tok::Num(_)));
                let d = self.factor()?;
                if d.is_empty() {
                    return Err(if literal {
                        Error::ZeroDenominator { pos: at }
                    } else {
                        Error::DivisionByZero
                    });
                }
                acc = acc.div(&d, self.assume)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        if self.eat('+') {
            return self.factor();
        }
        let base = self.base()?;
        if self.eat('^') {
            let n = self.exponent()?;
            return base.powi(n, self.assume);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let at = self.offset();
        let n = match self.peek() {
            Some(Tok::Num(n)) => {
                let v: i32 = n.try_into().map_err(|_| Error::Syntax {
                    pos: at,
                    msg: "exponent too large".into(),
                })?;
                self.pos += 1;
                v
            }
            _ => {
                return Err(Error::Syntax {
                    pos: at,
                    msg: "expected integer exponent".into(),
                })
            }
        };
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -n } else { n })
    }

    fn base(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::constant(Q::from_integer(n)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "arctan" => Some(Func::Arctan),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return apply_func(func, &arg, self.assume);
                }
                if self.peek() == Some(&Tok::Op('(')) {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("unknown function `{name}`"),
                    });
                }
                Symbol::from_name(&name)
                    .map(Expr::sym)
                    .ok_or(Error::UnknownSymbol { name, pos: at })
            }
            Some(Tok::Op(c)) => Err(Error::Syntax {
                pos: at,
                msg: format!("unexpected `{c}`"),
            }),
            None => Err(Error::Syntax {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses with the default assumptions (`lambda != 0`).
pub fn parse(src: &str) -> Result<Expr> {
    parse_with(src, &Assumptions::default())
}

pub fn parse_with(src: &str, assume: &Assumptions) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        assume,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax {
            pos: p.offset(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::{Monomial, SymbolKind};
    use super::*;

    #[test]
    fn grammar_examples() {
        let e = parse("h_t - nu*(h_xx + h_yy)").unwrap();
        assert_eq!(e.len(), 3);
        assert!(parse("0").unwrap().is_empty());
        let e = parse("lambda*(h_x^2 + h_y^2)").unwrap();
        assert_eq!(e.len(), 2);
        for (m, _) in e.terms() {
            let jets: Vec<_> = m
                .factors()
                .iter()
                .filter(|(a, _)| a.as_symbol().is_some_and(|s| s.kind() == SymbolKind::JetVar))
                .collect();
            assert_eq!(jets.len(), 1);
            assert_eq!(jets[0].1, 2);
            assert_eq!(m.exponent_of(&Symbol::LAMBDA), 1);
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("h_z + 1"),
            Err(Error::UnknownSymbol {
                name: "h_z".into(),
                pos: 0
            })
        );
        assert_eq!(parse("x/0"), Err(Error::ZeroDenominator { pos: 2 }));
        assert!(matches!(parse("x + "), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse("x $ y"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("foo(x)"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
        assert_eq!(parse("x/(y - y)"), Err(Error::DivisionByZero));
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(parse("-x^2").unwrap(), -Expr::x().pow(2));
        assert_eq!(parse("2^3*x").unwrap(), Expr::x().scale(&Q::from_integer(8.into())));
        assert_eq!(parse("lambda^(-2)").unwrap(), parse("1/lambda^2").unwrap());
        assert_eq!(parse("3/2*x").unwrap(), Expr::monomial(Monomial::sym(Symbol::X), super::super::qr(3, 2)));
    }
}
