//! Exact symbolic expressions in canonical expanded form.
//!
//! An [`Expr`] is a sorted list of `(monomial, rational coefficient)` pairs.
//! Monomials are products of [`Atom`]s (symbols or function kernels) with
//! nonzero integer exponents. Negative exponents are only created for atoms
//! that are known to be nonzero; division by anything else goes through the
//! `Recip` kernel, which keeps the divisor visible in the expression.

mod assume;
mod eval;
mod parse;
mod render;
mod symbol;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

pub use assume::Assumptions;
pub use eval::Field;
pub use parse::{parse, parse_with};
pub use symbol::{BaseVar, JetIndex, Param, RJetIndex, ReducedVar, Symbol, SymbolKind, MAX_JET_ORDER};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Arctan,
    /// `1/p` for a polynomial `p` that is not a monomial.
    Recip,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Arctan => "arctan",
            Func::Recip => "recip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kernel {
    pub func: Func,
    pub arg: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Symbol),
    Fun(Arc<Kernel>),
}

impl Atom {
    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Atom::Sym(s) => Some(s),
            Atom::Fun(_) => None,
        }
    }

    pub fn as_kernel(&self) -> Option<&Kernel> {
        match self {
            Atom::Fun(k) => Some(k),
            Atom::Sym(_) => None,
        }
    }

    fn func(&self) -> Option<Func> {
        self.as_kernel().map(|k| k.func)
    }
}

/// Product of atoms with nonzero integer exponents, sorted by atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(SmallVec<[(Atom, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn atom(a: Atom, e: i32) -> Self {
        let mut m = Monomial::one();
        if e != 0 {
            m.0.push((a, e));
        }
        m
    }

    pub fn sym(s: Symbol) -> Self {
        Monomial::atom(Atom::Sym(s), 1)
    }

    /// Builds a monomial from unsorted factors, merging repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Atom, i32)>) -> Self {
        let mut v: Vec<(Atom, i32)> = factors.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: SmallVec<[(Atom, i32); 4]> = SmallVec::new();
        for (a, e) in v {
            match out.last_mut() {
                Some((b, f)) if *b == a => *f += e,
                _ => out.push((a, e)),
            }
        }
        out.retain(|(_, e)| *e != 0);
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> i32 {
        self.0
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn exponent_of(&self, s: &Symbol) -> i32 {
        self.exponent(&Atom::Sym(s.clone()))
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Monomial(out)
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * n)).collect())
    }

    pub fn inverse(&self) -> Monomial {
        self.pow(-1)
    }

    /// Removes the factor `a` entirely.
    pub fn without(&self, a: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(b, _)| b != a).cloned().collect())
    }

    /// Splits into the factors accepted by `keep` and the rest.
    pub fn split(&self, keep: impl Fn(&Atom) -> bool) -> (Monomial, Monomial) {
        let mut yes = SmallVec::new();
        let mut no = SmallVec::new();
        for f in &self.0 {
            if keep(&f.0) {
                yes.push(f.clone());
            } else {
                no.push(f.clone());
            }
        }
        (Monomial(yes), Monomial(no))
    }

    pub fn has_negative(&self) -> bool {
        self.0.iter().any(|(_, e)| *e < 0)
    }

    /// Whether `self` divides `other` with nonnegative remainder exponents.
    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|(a, e)| other.exponent(a) >= *e)
    }

    /// Lexicographic comparison of exponent vectors; a term order on
    /// monomials with nonnegative exponents.
    fn lex_cmp(&self, other: &Monomial) -> std::cmp::Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return std::cmp::Ordering::Equal,
                (Some((_, e)), None) => return e.cmp(&0),
                (None, Some((_, f))) => return 0.cmp(f),
                (Some((x, e)), Some((y, f))) => match x.cmp(y) {
                    std::cmp::Ordering::Equal => {
                        if e != f {
                            return e.cmp(f);
                        }
                        i += 1;
                        j += 1;
                    }
                    std::cmp::Ordering::Less => return e.cmp(&0),
                    std::cmp::Ordering::Greater => return 0.cmp(f),
                },
            }
        }
    }

    fn needs_rewrite(&self) -> bool {
        let mut exps = 0;
        for (a, e) in &self.0 {
            match a.func() {
                Some(Func::Sin) if *e >= 2 => return true,
                Some(Func::Recip) if *e < 0 => return true,
                Some(Func::Exp) => {
                    if *e != 1 {
                        return true;
                    }
                    exps += 1;
                }
                _ => {}
            }
        }
        exps > 1
    }
}

/// Immutable expression in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Vec<(Monomial, Q)>>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

type Acc = HashMap<Monomial, Q>;

fn acc_add(acc: &mut Acc, m: Monomial, c: Q) {
    if c.is_zero() {
        return;
    }
    match acc.entry(m) {
        std::collections::hash_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
        std::collections::hash_map::Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr(Arc::new(Vec::new()))
    }

    pub fn one() -> Self {
        Expr::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr(Arc::new(vec![(Monomial::one(), c)]))
        }
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(q(n))
    }

    pub fn rat(n: i64, d: i64) -> Self {
        Expr::constant(qr(n, d))
    }

    pub fn sym(s: Symbol) -> Self {
        Expr::monomial(Monomial::sym(s), Q::one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        if c.is_zero() {
            return Expr::zero();
        }
        if m.needs_rewrite() {
            return Expr::from_terms([(m, c)]);
        }
        Expr(Arc::new(vec![(m, c)]))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::monomial(Monomial::atom(a, 1), Q::one())
    }

    pub fn x() -> Self {
        Expr::sym(Symbol::X)
    }
    pub fn y() -> Self {
        Expr::sym(Symbol::Y)
    }
    pub fn t() -> Self {
        Expr::sym(Symbol::T)
    }
    pub fn h() -> Self {
        Expr::sym(Symbol::H)
    }
    pub fn lambda() -> Self {
        Expr::sym(Symbol::LAMBDA)
    }
    pub fn jet(j: JetIndex) -> Self {
        Expr::sym(Symbol::Jet(j))
    }

    /// Collects terms, applying the canonical rewrites.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut acc = Acc::new();
        for (m, c) in terms {
            acc_add(&mut acc, m, c);
        }
        Expr::finish(acc)
    }

    fn finish(mut acc: Acc) -> Self {
        loop {
            let pending: Vec<Monomial> = acc.keys().filter(|m| m.needs_rewrite()).cloned().collect();
            if pending.is_empty() {
                break;
            }
            for m in pending {
                let Some(c) = acc.remove(&m) else { continue };
                for (m2, c2) in rewrite_monomial(&m) {
                    acc_add(&mut acc, m2, c2 * &c);
                }
            }
        }
        let mut v: Vec<(Monomial, Q)> = acc.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Expr(Arc::new(v))
    }

    pub fn sum(items: impl IntoIterator<Item = Expr>) -> Self {
        let mut acc = Acc::new();
        for e in items {
            for (m, c) in e.terms() {
                acc_add(&mut acc, m.clone(), c.clone());
            }
        }
        Expr::finish(acc)
    }

    pub fn product(items: impl IntoIterator<Item = Expr>) -> Self {
        items.into_iter().fold(Expr::one(), |a, b| &a * &b)
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Structural zero test; exact whenever no `Recip` kernel is present.
    /// Use [`Expr::is_zero`] for the complete test.
    pub fn is_structurally_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_rational(&self) -> Option<Q> {
        match self.0.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|c| c.is_one())
    }

    pub fn as_single_term(&self) -> Option<(&Monomial, &Q)> {
        match self.0.as_slice() {
            [(m, c)] => Some((m, c)),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.0.as_slice() {
            [(m, c)] if c.is_one() => match m.factors() {
                [(Atom::Sym(s), 1)] => Some(s),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr(Arc::new(self.0.iter().map(|(m, d)| (m.clone(), d * c)).collect()))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Expr {
        Expr::from_terms(self.0.iter().map(|(n, c)| (n.mul(m), c.clone())))
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Integer power; negative exponents divide under `assume`.
    pub fn powi(&self, n: i32, assume: &Assumptions) -> Result<Expr> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.inverse(assume)?.pow(n.unsigned_abs()))
        }
    }

    /// Multiplicative inverse. Monomials are inverted directly when all their
    /// atoms are known nonzero; other divisors become `Recip` kernels.
    pub fn inverse(&self, assume: &Assumptions) -> Result<Expr> {
        if self.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if let Some((m, c)) = self.as_single_term() {
            check_invertible(m, assume)?;
            return Ok(Expr::monomial(m.inverse(), c.recip()));
        }
        // Clear top-level denominators: self = num / den.
        let (num, den) = self.split_denominators();
        if num.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if let Some((m, c)) = num.as_single_term() {
            check_invertible(m, assume)?;
            return Ok(den.mul_monomial(&m.inverse()).scale(&c.recip()));
        }
        // Pull out the monomial content that may be inverted.
        let content = num.monomial_content(assume);
        let prim = num.mul_monomial(&content.inverse());
        if let Some((m, _)) = prim.as_single_term() {
            check_invertible(m, assume)?;
        }
        let lead = prim.0[0].1.clone();
        let monic = prim.scale(&lead.recip());
        let r = Expr::atom(Atom::Fun(Arc::new(Kernel {
            func: Func::Recip,
            arg: monic,
        })));
        Ok((&r * &den).mul_monomial(&content.inverse()).scale(&lead.recip()))
    }

    /// `self / other`, preferring exact polynomial quotients.
    pub fn div(&self, other: &Expr, assume: &Assumptions) -> Result<Expr> {
        if other.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if self.is_empty() {
            return Ok(Expr::zero());
        }
        if other.len() > 1 {
            if let Some(qt) = self.exact_div(other) {
                return Ok(qt);
            }
        }
        Ok(self * &other.inverse(assume)?)
    }

    /// Exact multivariate division for kernel-free polynomials; `None` when
    /// `other` does not divide `self`.
    pub fn exact_div(&self, other: &Expr) -> Option<Expr> {
        let plain = |e: &Expr| e.0.iter().all(|(m, _)| !m.has_negative() && m.factors().iter().all(|(a, _)| a.as_symbol().is_some()));
        if !plain(self) || !plain(other) || other.is_empty() {
            return None;
        }
        let lead = |e: &Expr| -> Option<(Monomial, Q)> { e.0.iter().max_by(|a, b| a.0.lex_cmp(&b.0)).cloned() };
        let (lm, lc) = lead(other)?;
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Q)> = Vec::new();
        let mut steps = 0usize;
        while let Some((rm, rc)) = lead(&rem) {
            if !lm.divides(&rm) {
                return None;
            }
            let qm = rm.mul(&lm.inverse());
            let qc = rc / &lc;
            rem = &rem - &other.mul_monomial(&qm).scale(&qc);
            quot.push((qm, qc));
            steps += 1;
            if steps > 100_000 {
                return None;
            }
        }
        Some(Expr::from_terms(quot))
    }

    /// Largest monomial dividing every term, restricted to atoms allowed by
    /// `assume` for positive exponents; negative exponents always factor.
    fn monomial_content(&self, assume: &Assumptions) -> Monomial {
        let mut atoms: BTreeSet<Atom> = BTreeSet::new();
        for (m, _) in self.terms() {
            for (a, _) in m.factors() {
                atoms.insert(a.clone());
            }
        }
        let mut factors = Vec::new();
        for a in atoms {
            let min = self.terms().iter().map(|(m, _)| m.exponent(&a)).min().unwrap_or(0);
            if min < 0 || (min > 0 && atom_nonzero(&a, assume)) {
                factors.push((a, min));
            }
        }
        Monomial::from_factors(factors)
    }

    /// Writes `self = num * den` where `num` has no top-level `Recip` atoms and
    /// `den` is a product of `Recip` powers.
    fn split_denominators(&self) -> (Expr, Expr) {
        let mut maxes: BTreeMap<Atom, i32> = BTreeMap::new();
        for (m, _) in self.terms() {
            for (a, e) in m.factors() {
                if a.func() == Some(Func::Recip) {
                    let slot = maxes.entry(a.clone()).or_insert(0);
                    *slot = (*slot).max(*e);
                }
            }
        }
        if maxes.is_empty() {
            return (self.clone(), Expr::one());
        }
        let mut num = Expr::zero();
        for (m, c) in self.terms() {
            let mut term = Expr::monomial(m.clone(), c.clone());
            for (a, k) in &maxes {
                let e = m.exponent(a);
                let stripped = Monomial::atom(a.clone(), -e);
                let p = &a.as_kernel().expect("recip kernel").arg;
                term = &term.mul_monomial(&stripped) * &p.pow((k - e) as u32);
            }
            num = &num + &term;
        }
        let den = Expr::monomial(Monomial::from_factors(maxes), Q::one());
        (num, den)
    }

    /// Exact zero test, including expressions with `Recip` denominators.
    pub fn is_zero(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.split_denominators().0.is_empty()
    }

    /// Expression equality as elements of the function field.
    pub fn equals(&self, other: &Expr) -> bool {
        self == other || (self - other).is_zero()
    }

    /// Applies `f` to every kernel argument and rebuilds the expression.
    fn map_atoms<F>(&self, f: &mut F) -> Result<Expr>
    where
        F: FnMut(&Atom) -> Result<Expr>,
    {
        let mut cache: HashMap<Atom, Expr> = HashMap::new();
        let mut powers: HashMap<(Atom, i32), Expr> = HashMap::new();
        let mut out = Acc::new();
        for (m, c) in self.terms() {
            let mut term = Expr::constant(c.clone());
            for (a, e) in m.factors() {
                let key = (a.clone(), *e);
                let p = if let Some(p) = powers.get(&key) {
                    p.clone()
                } else {
                    let base = match cache.get(a) {
                        Some(b) => b.clone(),
                        None => {
                            let b = f(a)?;
                            cache.insert(a.clone(), b.clone());
                            b
                        }
                    };
                    let p = if *e >= 0 {
                        base.pow(*e as u32)
                    } else {
                        base_inverse(a, &base)?.pow(e.unsigned_abs())
                    };
                    powers.insert(key, p.clone());
                    p
                };
                term = &term * &p;
                if term.is_empty() {
                    break;
                }
            }
            for (m2, c2) in term.terms() {
                acc_add(&mut out, m2.clone(), c2.clone());
            }
        }
        Ok(Expr::finish(out))
    }

    /// Simultaneous substitution of symbols, with normalization.
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>, assume: &Assumptions) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        self.subst_with(&|s: &Symbol| bindings.get(s).cloned(), assume)
    }

    /// Substitution driven by a lookup closure.
    pub fn subst_with(&self, lookup: &dyn Fn(&Symbol) -> Option<Expr>, assume: &Assumptions) -> Result<Expr> {
        let f = |a: &Atom| -> Result<Expr> {
            match a {
                Atom::Sym(s) => Ok(lookup(s).unwrap_or_else(|| Expr::sym(s.clone()))),
                Atom::Fun(k) => {
                    let arg = k.arg.subst_with(lookup, assume)?;
                    apply_func(k.func, &arg, assume)
                }
            }
        };
        // Negative powers of substituted atoms need the assumption context.
        let mut cache: HashMap<Atom, Expr> = HashMap::new();
        let mut out = Acc::new();
        for (m, c) in self.terms() {
            let mut term = Expr::constant(c.clone());
            for (a, e) in m.factors() {
                let base = match cache.get(a) {
                    Some(b) => b.clone(),
                    None => {
                        let b = f(a)?;
                        cache.insert(a.clone(), b.clone());
                        b
                    }
                };
                let p = if *e >= 0 {
                    base.pow(*e as u32)
                } else if base.as_single_term().is_some_and(|(m, _)| m == &Monomial::atom(a.clone(), 1)) {
                    Expr::monomial(Monomial::atom(a.clone(), *e), base.0[0].1.clone().recip().pow(e.abs()))
                } else {
                    base.powi(*e, assume)?
                };
                term = &term * &p;
                if term.is_empty() {
                    break;
                }
            }
            for (m2, c2) in term.terms() {
                acc_add(&mut out, m2.clone(), c2.clone());
            }
        }
        Ok(Expr::finish(out))
    }

    pub fn subst1(&self, s: &Symbol, v: &Expr, assume: &Assumptions) -> Result<Expr> {
        self.subst_with(&|t: &Symbol| (t == s).then(|| v.clone()), assume)
    }

    /// Generic derivation: `d` gives the derivative of each symbol (`None` = 0);
    /// kernels use the chain rule.
    pub fn derive(&self, d: &dyn Fn(&Symbol) -> Result<Option<Expr>>) -> Result<Expr> {
        let mut atom_d: HashMap<Atom, Expr> = HashMap::new();
        let mut parts: Vec<Expr> = Vec::new();
        for (m, c) in self.terms() {
            for (i, (a, e)) in m.factors().iter().enumerate() {
                let da = match atom_d.get(a) {
                    Some(x) => x.clone(),
                    None => {
                        let x = derive_atom(a, d)?;
                        atom_d.insert(a.clone(), x.clone());
                        x
                    }
                };
                if da.is_empty() {
                    continue;
                }
                let mut rest: SmallVec<[(Atom, i32); 4]> = m.0.clone();
                if *e == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 = e - 1;
                }
                let coeff = c * Q::from_integer(BigInt::from(*e));
                parts.push(da.mul_monomial(&Monomial(rest)).scale(&coeff));
            }
        }
        Ok(Expr::sum(parts))
    }

    /// Partial derivative treating every other symbol as independent.
    pub fn pdiff(&self, v: &Symbol) -> Expr {
        self.derive(&|s: &Symbol| Ok((s == v).then(Expr::one)))
            .expect("partial differentiation cannot fail")
    }

    /// All symbols, including those inside kernel arguments.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for (m, _) in self.terms() {
            for (a, _) in m.factors() {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Fun(k) => k.arg.collect_symbols(out),
                }
            }
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.terms().iter().any(|(m, _)| {
            m.factors().iter().any(|(a, _)| match a {
                Atom::Sym(t) => t == s,
                Atom::Fun(k) => k.arg.contains(s),
            })
        })
    }

    pub fn any_symbol(&self, pred: &dyn Fn(&Symbol) -> bool) -> bool {
        self.symbols().iter().any(pred)
    }

    pub fn has_kernel(&self, func: Func) -> bool {
        self.terms()
            .iter()
            .any(|(m, _)| m.factors().iter().any(|(a, _)| a.as_kernel().is_some_and(|k| k.func == func || k.arg.has_kernel(func))))
    }

    /// Groups terms by the sub-monomial of atoms accepted by `key`; the values
    /// are the remaining cofactors.
    pub fn collect_by(&self, key: impl Fn(&Atom) -> bool) -> BTreeMap<Monomial, Expr> {
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, Q)>> = BTreeMap::new();
        for (m, c) in self.terms() {
            let (k, rest) = m.split(&key);
            groups.entry(k).or_default().push((rest, c.clone()));
        }
        groups.into_iter().map(|(k, v)| (k, Expr::from_terms(v))).collect()
    }

    /// Coefficient of `s^k` when viewed as a polynomial in `s`.
    pub fn coeff_of(&self, s: &Symbol, k: i32) -> Expr {
        let atom = Atom::Sym(s.clone());
        Expr::from_terms(
            self.terms()
                .iter()
                .filter(|(m, _)| m.exponent(&atom) == k)
                .map(|(m, c)| (m.without(&atom), c.clone())),
        )
    }

    /// Highest exponent of `s` (0 if absent).
    pub fn degree_in(&self, s: &Symbol) -> i32 {
        let atom = Atom::Sym(s.clone());
        self.terms().iter().map(|(m, _)| m.exponent(&atom)).max().unwrap_or(0)
    }

    /// Expands `sin`/`cos` of sums into products of `sin`/`cos` of the summands.
    /// Used only for group-law checks.
    pub fn expand_trig(&self) -> Expr {
        let mut f = |a: &Atom| -> Result<Expr> {
            Ok(match a {
                Atom::Fun(k) if matches!(k.func, Func::Sin | Func::Cos) && k.arg.len() > 1 => {
                    let (head, tail) = k.arg.0.split_at(1);
                    let u = Expr(Arc::new(head.to_vec()));
                    let v = Expr(Arc::new(tail.to_vec()));
                    let (su, cu) = (Expr::sin(&u), Expr::cos(&u));
                    let (sv, cv) = (Expr::sin(&v).expand_trig(), Expr::cos(&v).expand_trig());
                    if k.func == Func::Sin {
                        &(&su * &cv) + &(&cu * &sv)
                    } else {
                        &(&cu * &cv) - &(&su * &sv)
                    }
                }
                _ => Expr::atom(a.clone()),
            })
        };
        self.map_atoms(&mut f).expect("trig expansion cannot fail")
    }

    pub fn sin(u: &Expr) -> Expr {
        apply_func(Func::Sin, u, &Assumptions::default()).expect("sin is total")
    }
    pub fn cos(u: &Expr) -> Expr {
        apply_func(Func::Cos, u, &Assumptions::default()).expect("cos is total")
    }
    pub fn exp(u: &Expr) -> Expr {
        apply_func(Func::Exp, u, &Assumptions::default()).expect("exp is total")
    }
    pub fn arctan(u: &Expr) -> Expr {
        apply_func(Func::Arctan, u, &Assumptions::default()).expect("arctan is total")
    }

    pub fn leading_coefficient(&self) -> Option<&Q> {
        self.0.first().map(|(_, c)| c)
    }

    /// Common denominator of all coefficients, as a positive integer.
    pub fn coefficient_denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.terms().iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()))
    }

    pub fn to_f64_const(&self) -> Option<f64> {
        self.as_rational().and_then(|c| c.to_f64())
    }
}

fn atom_nonzero(a: &Atom, assume: &Assumptions) -> bool {
    match a {
        Atom::Sym(s) => assume.is_nonzero(s),
        Atom::Fun(k) => matches!(k.func, Func::Exp | Func::Recip),
    }
}

fn check_invertible(m: &Monomial, assume: &Assumptions) -> Result<()> {
    for (a, e) in m.factors() {
        if *e > 0 && !atom_nonzero(a, assume) {
            return Err(Error::MissingAssumption(Expr::atom(a.clone()).to_string()));
        }
    }
    Ok(())
}

/// Inverse of an atom image; the atom itself already carried a negative power,
/// so nonzero-ness was established when it was created.
fn base_inverse(a: &Atom, base: &Expr) -> Result<Expr> {
    let mut assume = Assumptions::empty();
    if let Atom::Sym(s) = a {
        assume.insert(s.clone());
    }
    base.inverse(&assume.permissive())
}

fn derive_atom(a: &Atom, d: &dyn Fn(&Symbol) -> Result<Option<Expr>>) -> Result<Expr> {
    match a {
        Atom::Sym(s) => Ok(d(s)?.unwrap_or_else(Expr::zero)),
        Atom::Fun(k) => {
            let du = k.arg.derive(d)?;
            if du.is_empty() {
                return Ok(Expr::zero());
            }
            let u = &k.arg;
            let outer = match k.func {
                Func::Sin => Expr::cos(u),
                Func::Cos => -Expr::sin(u),
                Func::Exp => Expr::exp(u),
                Func::Arctan => {
                    let denom = &Expr::one() + &(u * u);
                    denom.inverse(&Assumptions::default().permissive())?
                }
                Func::Recip => {
                    let r = Expr::atom(a.clone());
                    -(&r * &r)
                }
            };
            Ok(&outer * &du)
        }
    }
}

/// Smart constructor for kernels: evaluates at zero, applies parity and
/// inverts monomial divisors.
pub fn apply_func(func: Func, u: &Expr, assume: &Assumptions) -> Result<Expr> {
    if func == Func::Recip {
        return u.inverse(assume);
    }
    if u.is_empty() {
        return Ok(match func {
            Func::Sin | Func::Arctan => Expr::zero(),
            Func::Cos | Func::Exp => Expr::one(),
            Func::Recip => unreachable!(),
        });
    }
    let negative = u.leading_coefficient().is_some_and(|c| c.is_negative());
    let mk = |arg: Expr| Expr::atom(Atom::Fun(Arc::new(Kernel { func, arg })));
    Ok(match func {
        Func::Sin | Func::Arctan if negative => -mk(-u),
        Func::Cos if negative => mk(-u),
        _ => mk(u.clone()),
    })
}

fn rewrite_monomial(m: &Monomial) -> Vec<(Monomial, Q)> {
    // Merge exponentials into one atom.
    let exps: Vec<&(Atom, i32)> = m.factors().iter().filter(|(a, _)| a.func() == Some(Func::Exp)).collect();
    if exps.len() > 1 || exps.iter().any(|(_, e)| *e != 1) {
        let arg = Expr::sum(exps.iter().map(|(a, e)| a.as_kernel().unwrap().arg.scale(&q(*e as i64))));
        let (_, rest) = m.split(|a| a.func() == Some(Func::Exp));
        let ex = Expr::exp(&arg);
        return ex.terms().iter().map(|(n, c)| (rest.mul(n), c.clone())).collect();
    }
    for (a, e) in m.factors() {
        match a.func() {
            Some(Func::Sin) if *e >= 2 => {
                let k = a.as_kernel().unwrap();
                let base = m.without(a).mul(&Monomial::atom(a.clone(), e - 2));
                let cos = Expr::cos(&k.arg);
                let cos_atom = cos.terms()[0].0.clone();
                return vec![(base.clone(), Q::one()), (base.mul(&cos_atom.pow(2)), -Q::one())];
            }
            Some(Func::Recip) if *e < 0 => {
                let p = &a.as_kernel().unwrap().arg;
                let rest = m.without(a);
                return p.pow(e.unsigned_abs()).terms().iter().map(|(n, c)| (rest.mul(n), c.clone())).collect();
            }
            _ => {}
        }
    }
    vec![(m.clone(), Q::one())]
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_empty() {
            return rhs.clone();
        }
        if rhs.is_empty() {
            return self.clone();
        }
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Expr(Arc::new(out))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect()))
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_empty() || rhs.is_empty() {
            return Expr::zero();
        }
        if let Some(c) = self.as_rational() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_rational() {
            return self.scale(&c);
        }
        let mut acc = Acc::with_capacity(self.len() * rhs.len());
        for (m1, c1) in self.terms() {
            for (m2, c2) in rhs.terms() {
                acc_add(&mut acc, m1.mul(m2), c1 * c2);
            }
        }
        Expr::finish(acc)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $f(self, rhs: &Expr) -> Expr {
                (&self).$f(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                self.$f(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Q> for Expr {
    fn from(c: Q) -> Self {
        Expr::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn pythagorean() {
        assert!(p("sin(s)^2 + cos(s)^2 - 1").is_empty());
        assert_eq!(p("sin(s)^2 + cos(s)^2"), Expr::one());
        assert_eq!(p("sin(s)^3"), p("sin(s) - sin(s)*cos(s)^2"));
    }

    #[test]
    fn ring_identity() {
        assert!(p("(x + y)^2 - x^2 - 2*x*y - y^2").is_empty());
    }

    #[test]
    fn field_cancellation() {
        assert_eq!(p("lambda * (1/(2*lambda))"), Expr::rat(1, 2));
        assert!(p("2*lambda*(1/(2*lambda)) - 1").is_zero());
    }

    #[test]
    fn division_requires_assumption() {
        assert!(matches!(parse("1/x"), Err(Error::MissingAssumption(_))));
        let a = Assumptions::with(&[Symbol::X]);
        assert!(parse_with("1/x", &a).is_ok());
    }

    #[test]
    fn recip_kernel_and_substitution() {
        let a = Assumptions::default();
        let e = p("lambda/(2*lambda - 2)");
        assert!(e.has_kernel(Func::Recip));
        let r = e.subst1(&Symbol::LAMBDA, &Expr::one(), &a);
        assert_eq!(r, Err(Error::DivisionByZero));
        let r = e.subst1(&Symbol::LAMBDA, &Expr::int(3), &a).unwrap();
        assert_eq!(r, Expr::rat(3, 4));
    }

    #[test]
    fn recip_zero_test_clears_denominators() {
        let e = p("lambda/(lambda - 1) - 1 - 1/(lambda - 1)");
        assert!(!e.is_empty());
        assert!(e.is_zero());
    }

    #[test]
    fn exact_quotient_preferred() {
        assert_eq!(p("(lambda^2 - 1)/(lambda - 1)"), p("lambda + 1"));
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("x^2").pdiff(&Symbol::X), p("2*x"));
        assert_eq!(p("sin(s)").pdiff(&Symbol::group("s")), p("cos(s)"));
        assert_eq!(p("h_x^2").pdiff(&Symbol::jet("x")), p("2*h_x"));
        assert!(p("h_x").pdiff(&Symbol::X).is_empty());
        let a = Assumptions::with(&[Symbol::Y]);
        let d = parse_with("arctan(x/y)", &a).unwrap().pdiff(&Symbol::X);
        let want = parse_with("y/(x^2 + y^2)", &a).unwrap();
        assert!(d.equals(&want), "{d}");
    }

    #[test]
    fn kernel_parity() {
        assert_eq!(p("sin(-s)"), p("-sin(s)"));
        assert_eq!(p("cos(-s)"), p("cos(s)"));
        assert_eq!(p("sin(0)"), Expr::zero());
        assert_eq!(p("cos(0) + exp(0)"), Expr::int(2));
    }

    #[test]
    fn exp_merges() {
        assert_eq!(p("exp(x)*exp(y)"), p("exp(x + y)"));
        assert_eq!(p("exp(x)*exp(-x)"), Expr::one());
    }

    #[test]
    fn substitution() {
        let a = Assumptions::default();
        let mut b = HashMap::new();
        b.insert(Symbol::X, Expr::zero());
        assert_eq!(p("x + y").substitute(&b, &a).unwrap(), p("y"));
        b.insert(Symbol::Y, p("x"));
        assert_eq!(p("x*y + y").substitute(&b, &a).unwrap(), p("x"));
    }

    #[test]
    fn trig_expansion() {
        let e = p("cos(s1 + s2) - cos(s1)*cos(s2) + sin(s1)*sin(s2)");
        assert!(e.expand_trig().is_empty());
    }

    #[test]
    fn collect_groups() {
        let e = p("c1*h_x + c2*h_xx - c3*h_xx + 3*h_xx");
        let g = e.collect_by(|a| a.as_symbol().is_some_and(|s| s.kind() == SymbolKind::JetVar));
        assert_eq!(g.len(), 2);
        assert_eq!(g[&Monomial::sym(Symbol::jet("xx"))], p("c2 - c3 + 3"));
    }
}
