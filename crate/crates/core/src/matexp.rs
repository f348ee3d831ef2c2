//! `exp(sM)` in closed form for matrices whose minimal polynomial over ℚ
//! factors as `u^e · Π (u² + c_j²)` with distinct rational `c_j > 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expr, Q};
use crate::linalg::{ExprSpan, Mat};

/// Dense univariate polynomial over ℚ, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn one() -> Self {
        Poly(vec![Q::one()])
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::one();
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 here.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        Poly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dd = d.degree();
        let lead = d.0[dd].clone();
        if r.len() <= dd {
            return (Poly(Vec::new()), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / &lead;
            if f.is_zero() {
                continue;
            }
            for (i, c) in d.0.iter().enumerate() {
                r[k + i] -= &f * c;
            }
            q[k] = f;
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Inverse of `self` modulo `m`, when the two are coprime.
    pub fn inverse_mod(&self, m: &Poly) -> Option<Poly> {
        let (mut r0, mut r1) = (m.clone(), self.div_rem(m).1);
        let (mut t0, mut t1) = (Poly(Vec::new()), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let t = t0.sub(&q.mul(&t1));
            (r0, r1) = (r1, r);
            (t0, t1) = (t1, t);
        }
        if r0.degree() != 0 || r0.is_zero() {
            return None;
        }
        Some(t0.scale(&r0.0[0].recip()).div_rem(m).1)
    }

    /// `p(M)` by Horner's rule.
    pub fn eval_mat(&self, m: &Mat) -> Mat {
        let n = m.nrows();
        let mut acc = Mat::zeros(n, n);
        for c in self.0.iter().rev() {
            acc = acc.mul(m).add(&Mat::identity(n).scale(&Expr::constant(c.clone())));
        }
        acc
    }
}

/// Monic minimal polynomial of `m`, found from the first linear dependency
/// among `I, M, M², …`. Coefficients must be rational.
pub fn minimal_polynomial(m: &Mat) -> Result<Poly> {
    let n = m.nrows();
    let mut span = ExprSpan::new(n * n);
    let mut power = Mat::identity(n);
    for k in 0..=n {
        let flat = power.flatten();
        if let Some(c) = span.express(&flat)? {
            let mut coeffs = Vec::with_capacity(k + 1);
            for e in &c {
                let q = e.as_rational().or_else(|| e.is_zero().then(Q::zero)).ok_or_else(|| {
                    Error::UnsupportedSpectrum(format!("minimal polynomial coefficient `{e}` is not rational"))
                })?;
                coeffs.push(-q);
            }
            coeffs.push(Q::one());
            return Ok(Poly::new(coeffs));
        }
        span.insert(&flat)?;
        power = power.mul(m);
    }
    unreachable!("Cayley-Hamilton bounds the degree")
}

/// One primary factor of the minimal polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectralFactor {
    /// `u^e`.
    Nilpotent(usize),
    /// `u² + c²`.
    Rotation(Q),
}

impl SpectralFactor {
    pub fn poly(&self) -> Poly {
        match self {
            SpectralFactor::Nilpotent(e) => Poly::monomial(*e),
            SpectralFactor::Rotation(c) => Poly::new(vec![c * c, Q::zero(), Q::one()]),
        }
    }
}

fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Q::new(rn, rd))
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while &k * &k <= n {
        if n.is_multiple_of(&k) {
            out.push(k.clone());
            out.push(&n / &k);
        }
        k += 1;
    }
    out
}

/// Splits the minimal polynomial into `u^e` and distinct `u² + c²` factors.
pub fn spectral_factors(m: &Poly) -> Result<Vec<SpectralFactor>> {
    let unsupported = || Error::UnsupportedSpectrum(format!("minimal polynomial {:?}", m.0));
    let e = m.0.iter().take_while(|c| c.is_zero()).count();
    let g = Poly::new(m.0[e..].to_vec());
    let mut out = Vec::new();
    if e > 0 {
        out.push(SpectralFactor::Nilpotent(e));
    }
    if g.degree() == 0 {
        return Ok(out);
    }
    if g.0.iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
        return Err(unsupported());
    }
    // h(v) = g(√v); its roots must be distinct negative rationals −c².
    let mut h = Poly::new(g.0.iter().step_by(2).cloned().collect());
    let lcm = h.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = h.0.iter().map(|c| (c * Q::from(lcm.clone())).to_integer()).collect();
    let (a0, an) = (ints[0].clone(), ints[ints.len() - 1].clone());
    if a0.is_zero() {
        return Err(unsupported());
    }
    let mut roots = Vec::new();
    for p in divisors(&a0) {
        for q in divisors(&an) {
            let r = -Q::new(p.clone(), q);
            if roots.contains(&r) {
                continue;
            }
            let lin = Poly::new(vec![-r.clone(), Q::one()]);
            let (quot, rem) = h.div_rem(&lin);
            if rem.is_zero() {
                roots.push(r);
                h = quot;
            }
        }
    }
    if h.degree() != 0 {
        return Err(unsupported());
    }
    for r in roots {
        let c = rational_sqrt(&-r).ok_or_else(unsupported)?;
        out.push(SpectralFactor::Rotation(c));
    }
    Ok(out)
}

/// `exp(sM)` with `s` an arbitrary scalar expression.
pub fn exp_mat(m: &Mat, s: &Expr) -> Result<Mat> {
    let n = m.nrows();
    let minpoly = minimal_polynomial(m)?;
    let factors = spectral_factors(&minpoly)?;
    let mut total = Mat::zeros(n, n);
    for f in &factors {
        let fp = f.poly();
        let cofactor = minpoly.div_rem(&fp).0;
        let proj = if factors.len() == 1 {
            Mat::identity(n)
        } else {
            let a = cofactor.inverse_mod(&fp).expect("primary factors are coprime");
            a.mul(&cofactor).div_rem(&minpoly).1.eval_mat(m)
        };
        let block = match f {
            SpectralFactor::Nilpotent(e) => {
                let mut acc = Mat::zeros(n, n);
                let mut term = Mat::identity(n);
                for k in 0..*e {
                    acc = acc.add(&term);
                    term = term.mul(m).scale(&(s * &Expr::rat(1, k as i64 + 1)));
                }
                acc
            }
            SpectralFactor::Rotation(c) => {
                let arg = s.scale(c);
                let cos = Mat::identity(n).scale(&Expr::cos(&arg));
                let sin = m.scale(&Expr::sin(&arg).scale(&c.recip()));
                cos.add(&sin)
            }
        };
        total = total.add(&block.mul(&proj));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, q};

    fn mat(rows: &[&[&str]]) -> Mat {
        Mat::new(rows.iter().map(|r| r.iter().map(|e| parse(e).unwrap()).collect()).collect())
    }

    #[test]
    fn polynomial_inverse_mod() {
        let m = Poly::new(vec![q(1), q(0), q(1)]);
        let a = Poly::new(vec![q(0), q(1)]);
        let inv = a.inverse_mod(&m).unwrap();
        assert_eq!(a.mul(&inv).div_rem(&m).1, Poly::one());
    }

    #[test]
    fn factors_of_rotation_and_nilpotent() {
        let m = Poly::new(vec![q(0), q(4), q(0), q(1)]);
        assert_eq!(
            spectral_factors(&m).unwrap(),
            vec![SpectralFactor::Nilpotent(1), SpectralFactor::Rotation(q(2))]
        );
        let bad = Poly::new(vec![q(-1), q(0), q(1)]);
        assert!(matches!(spectral_factors(&bad), Err(Error::UnsupportedSpectrum(_))));
        let irrational = Poly::new(vec![q(2), q(0), q(1)]);
        assert!(spectral_factors(&irrational).is_err());
    }

    #[test]
    fn rotation_generator() {
        let m = mat(&[&["0", "1"], &["-1", "0"]]);
        let e = exp_mat(&m, &parse("s").unwrap()).unwrap();
        assert!(e.equals(&mat(&[&["cos(s)", "sin(s)"], &["-sin(s)", "cos(s)"]])));
    }

    #[test]
    fn nilpotent_with_symbolic_entries() {
        let m = mat(&[&["0", "1", "0"], &["0", "0", "1/lambda"], &["0", "0", "0"]]);
        let e = exp_mat(&m, &parse("s").unwrap()).unwrap();
        assert!(e.equals(&mat(&[&["1", "s", "s^2/(2*lambda)"], &["0", "1", "s/lambda"], &["0", "0", "1"]])));
    }

    #[test]
    fn mixed_spectrum_matches_direct_blocks() {
        // rotation block plus an independent translation
        let m = mat(&[
            &["0", "2", "0", "0"],
            &["-2", "0", "0", "0"],
            &["0", "0", "0", "1"],
            &["0", "0", "0", "0"],
        ]);
        let e = exp_mat(&m, &parse("s").unwrap()).unwrap();
        let want = mat(&[
            &["cos(2*s)", "sin(2*s)", "0", "0"],
            &["-sin(2*s)", "cos(2*s)", "0", "0"],
            &["0", "0", "1", "s"],
            &["0", "0", "0", "1"],
        ]);
        assert!(e.equals(&want), "{:?}", e.render());
    }

    #[test]
    fn rejects_real_eigenvalues() {
        let m = mat(&[&["1", "0"], &["0", "0"]]);
        assert!(matches!(exp_mat(&m, &Expr::one()), Err(Error::UnsupportedSpectrum(_))));
    }
}
