//! Exact arithmetic in `ℚ(√d)` for a squarefree integer `d`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::expr::Field;
use crate::expr::Q;

/// `p + q√d`. Rationals carry `d = 1` and `q = 0`; values with different
/// nonrational radicands are never mixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    pub p: Q,
    pub q: Q,
    pub d: BigInt,
}

impl Surd {
    pub fn rational(p: Q) -> Self {
        Surd { p, q: Q::zero(), d: BigInt::one() }
    }

    pub fn zero() -> Self {
        Surd::rational(Q::zero())
    }

    pub fn one() -> Self {
        Surd::rational(Q::one())
    }

    /// `√r` for a nonnegative rational `r`.
    pub fn sqrt(r: &Q) -> Self {
        assert!(!r.is_negative(), "square root of a negative rational");
        if r.is_zero() {
            return Surd::zero();
        }
        // √(n/m) = √(n·m)/m, then pull squares out of n·m.
        let nm: BigInt = r.numer() * r.denom();
        let (outer, inner) = square_split(&nm);
        let coeff = Q::new(outer, r.denom().clone());
        if inner.is_one() {
            Surd::rational(coeff)
        } else {
            Surd { p: Q::zero(), q: coeff, d: inner }
        }
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.q.is_zero().then_some(&self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn radicand(&self, o: &Surd) -> BigInt {
        match (self.q.is_zero(), o.q.is_zero()) {
            (true, _) => o.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert_eq!(self.d, o.d, "mixed radicands");
                self.d.clone()
            }
        }
    }

    fn norm(&self) -> Q {
        &self.p * &self.p - &self.q * &self.q * Q::from(self.d.clone())
    }

    pub fn neg(&self) -> Surd {
        Surd { p: -&self.p, q: -&self.q, d: self.d.clone() }
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        self.plus(&o.neg())
    }

    pub fn div(&self, o: &Surd) -> Option<Surd> {
        Some(self.times(&o.invert()?))
    }

    pub fn signum(&self) -> Ordering {
        let sp = self.p.cmp(&Q::zero());
        let sq = self.q.cmp(&Q::zero());
        if sq == Ordering::Equal || sp == sq {
            return if sp == Ordering::Equal { sq } else { sp };
        }
        // opposite signs: compare p² with q²d
        let p2 = &self.p * &self.p;
        let q2d = &self.q * &self.q * Q::from(self.d.clone());
        match p2.cmp(&q2d) {
            Ordering::Greater => sp,
            Ordering::Less => sq,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let f = |x: &Q| x.to_f64().unwrap_or(f64::NAN);
        f(&self.p) + f(&self.q) * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

/// `n = outer² · inner` with `inner` squarefree (trial division).
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.abs();
    let mut outer = BigInt::one();
    let mut inner = BigInt::one();
    let mut k = BigInt::from(2);
    while &k * &k <= rest {
        let mut e = 0u32;
        while rest.is_multiple_of(&k) {
            rest /= &k;
            e += 1;
        }
        outer *= num_traits::pow(k.clone(), (e / 2) as usize);
        if e % 2 == 1 {
            inner *= &k;
        }
        k += 1;
    }
    (outer, inner * rest)
}

impl Field for Surd {
    fn from_q(c: &Q) -> Self {
        Surd::rational(c.clone())
    }

    fn plus(&self, o: &Self) -> Self {
        let d = self.radicand(o);
        Surd { p: &self.p + &o.p, q: &self.q + &o.q, d }.canonical()
    }

    fn times(&self, o: &Self) -> Self {
        let d = self.radicand(o);
        let dq = Q::from(d.clone());
        Surd {
            p: &self.p * &o.p + &self.q * &o.q * dq,
            q: &self.p * &o.q + &self.q * &o.p,
            d,
        }
        .canonical()
    }

    fn vanishes(&self) -> bool {
        self.is_zero()
    }

    fn invert(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Surd { p: &self.p / &n, q: -&self.q / &n, d: self.d.clone() }.canonical())
    }
}

impl Surd {
    fn canonical(mut self) -> Self {
        if self.q.is_zero() {
            self.d = BigInt::one();
        }
        self
    }
}

impl From<Q> for Surd {
    fn from(p: Q) -> Self {
        Surd::rational(p)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return write!(f, "{}", self.p);
        }
        let rad = if self.q.is_one() {
            format!("sqrt({})", self.d)
        } else if (-&self.q).is_one() {
            format!("-sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", self.q, self.d)
        };
        if self.p.is_zero() {
            f.write_str(&rad)
        } else if let Some(abs) = rad.strip_prefix('-') {
            write!(f, "{} - {}", self.p, abs)
        } else {
            write!(f, "{} + {}", self.p, rad)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{q, qr};

    #[test]
    fn sqrt_normalizes() {
        assert_eq!(Surd::sqrt(&q(9)), Surd::rational(q(3)));
        let s = Surd::sqrt(&q(12));
        assert_eq!((s.q.clone(), s.d.clone()), (q(2), BigInt::from(3)));
        let h = Surd::sqrt(&qr(1, 2));
        assert_eq!((h.q.clone(), h.d.clone()), (qr(1, 2), BigInt::from(2)));
        assert_eq!(h.times(&h), Surd::rational(qr(1, 2)));
    }

    #[test]
    fn inverse_and_sign() {
        let a = Surd::rational(q(1)).plus(&Surd::sqrt(&q(2)));
        let b = a.invert().unwrap();
        assert_eq!(a.times(&b), Surd::one());
        assert_eq!(a.signum(), Ordering::Greater);
        let c = Surd::rational(q(1)).sub(&Surd::sqrt(&q(2)));
        assert_eq!(c.signum(), Ordering::Less);
        assert_eq!(c.to_string(), "1 - sqrt(2)");
    }
}
