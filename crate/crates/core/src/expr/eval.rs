use num_traits::{One, ToPrimitive, Zero};

use super::{Atom, Expr, Func, Q};
use crate::error::{Error, Result};

/// Scalar field that expressions can be evaluated into.
pub trait Field: Clone {
    fn from_q(c: &Q) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn vanishes(&self) -> bool;
    /// `None` for zero.
    fn invert(&self) -> Option<Self>;

    fn powi(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::from_q(&Q::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.times(&base);
        }
        Some(acc)
    }
}

impl Field for Q {
    fn from_q(c: &Q) -> Self {
        c.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn invert(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Field for f64 {
    fn from_q(c: &Q) -> Self {
        c.to_f64().unwrap_or(f64::NAN)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn vanishes(&self) -> bool {
        *self == 0.0
    }
    fn invert(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

impl Expr {
    /// Evaluates with `atom_value` supplying each atom. `Recip` kernels are
    /// handled here by evaluating and inverting their argument.
    pub fn eval<F: Field>(&self, atom_value: &mut dyn FnMut(&Atom) -> Result<F>) -> Result<F> {
        let mut total = F::from_q(&Q::zero());
        for (m, c) in self.terms() {
            let mut term = F::from_q(c);
            for (a, e) in m.factors() {
                let v = match a.as_kernel() {
                    Some(k) if k.func == Func::Recip => {
                        let p = k.arg.eval(atom_value)?;
                        p.invert().ok_or(Error::DivisionByZero)?
                    }
                    _ => atom_value(a)?,
                };
                term = term.times(&v.powi(*e).ok_or(Error::DivisionByZero)?);
            }
            total = total.plus(&term);
        }
        Ok(total)
    }

    /// Exact evaluation at a rational point; transcendental kernels are an error.
    pub fn eval_q(&self, value: &dyn Fn(&super::Symbol) -> Option<Q>) -> Result<Q> {
        self.eval(&mut |a: &Atom| match a {
            Atom::Sym(s) => value(s).ok_or_else(|| Error::Eval(format!("no value for {s}"))),
            Atom::Fun(k) => Err(Error::Eval(format!("transcendental kernel {}", k.func.name()))),
        })
    }

    /// Floating-point evaluation, used only by numeric cross-checks.
    pub fn eval_f64(&self, value: &dyn Fn(&super::Symbol) -> Option<f64>) -> Result<f64> {
        fn go(e: &Expr, value: &dyn Fn(&super::Symbol) -> Option<f64>) -> Result<f64> {
            e.eval(&mut |a: &Atom| match a {
                Atom::Sym(s) => value(s).ok_or_else(|| Error::Eval(format!("no value for {s}"))),
                Atom::Fun(k) => {
                    let u = go(&k.arg, value)?;
                    Ok(match k.func {
                        Func::Sin => u.sin(),
                        Func::Cos => u.cos(),
                        Func::Exp => u.exp(),
                        Func::Arctan => u.atan(),
                        Func::Recip => 1.0 / u,
                    })
                }
            })
        }
        go(self, value)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, qr, Symbol};
    use super::*;

    #[test]
    fn rational_and_float_agree() {
        let e = parse("3/2*x^2 - lambda^-1*x + 1/(x + 2)").unwrap();
        let env = |s: &Symbol| match s {
            s if *s == Symbol::X => Some(qr(1, 3)),
            s if *s == Symbol::LAMBDA => Some(qr(5, 1)),
            _ => None,
        };
        let exact = e.eval_q(&env).unwrap();
        let approx = e.eval_f64(&|s| env(s).and_then(|v| v.to_f64())).unwrap();
        assert!((exact.to_f64().unwrap() - approx).abs() < 1e-12);
    }

    #[test]
    fn recip_at_pole_fails() {
        let e = parse("1/(x - 1)").unwrap();
        let r = e.eval_q(&|_| Some(Q::one()));
        assert_eq!(r, Err(Error::DivisionByZero));
    }
}
