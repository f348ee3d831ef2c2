//! Vector fields on `(x, y, t, h)`, their characteristic and prolongation, and
//! the invariance residual.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{Assumptions, BaseVar, Expr, JetIndex, Symbol};
use crate::jet::{total_derivative, OnShell, PdeDefinition};

/// `ξ¹∂x + ξ²∂y + ξ³∂t + φ∂h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorField {
    pub xi: [Expr; 3],
    pub phi: Expr,
}

impl VectorField {
    pub fn new(xi1: Expr, xi2: Expr, xi3: Expr, phi: Expr) -> Self {
        VectorField { xi: [xi1, xi2, xi3], phi }
    }

    pub fn zero() -> Self {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// Parses four coefficient expressions.
    pub fn parse(xi1: &str, xi2: &str, xi3: &str, phi: &str) -> Result<Self> {
        let p = crate::expr::parse;
        let v = VectorField::new(p(xi1)?, p(xi2)?, p(xi3)?, p(phi)?);
        v.check_point_field()?;
        Ok(v)
    }

    pub fn components(&self) -> [&Expr; 4] {
        [&self.xi[0], &self.xi[1], &self.xi[2], &self.phi]
    }

    pub fn from_components(c: [Expr; 4]) -> Self {
        let [a, b, d, e] = c;
        VectorField::new(a, b, d, e)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        VectorField::new(f(&self.xi[0]), f(&self.xi[1]), f(&self.xi[2]), f(&self.phi))
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Self> {
        Ok(VectorField::new(f(&self.xi[0])?, f(&self.xi[1])?, f(&self.xi[2])?, f(&self.phi)?))
    }

    pub fn add(&self, o: &VectorField) -> Self {
        VectorField::new(&self.xi[0] + &o.xi[0], &self.xi[1] + &o.xi[1], &self.xi[2] + &o.xi[2], &self.phi + &o.phi)
    }

    pub fn sub(&self, o: &VectorField) -> Self {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, c: &Expr) -> Self {
        self.map(|e| c * e)
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|e| e.is_zero())
    }

    pub fn equals(&self, o: &VectorField) -> bool {
        self.sub(o).is_zero()
    }

    /// Coefficients may only involve `x, y, t, h` and non-coordinate symbols.
    pub fn check_point_field(&self) -> Result<()> {
        for c in self.components() {
            if c.any_symbol(&|s| matches!(s, Symbol::Jet(j) if j.order() > 0)) {
                return Err(Error::Invalid(format!("coefficient `{c}` depends on derivatives of h")));
            }
        }
        Ok(())
    }

    /// Action as a derivation: `V(f) = ξ¹f_x + ξ²f_y + ξ³f_t + φf_h`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum([
            &self.xi[0] * &f.pdiff(&Symbol::X),
            &self.xi[1] * &f.pdiff(&Symbol::Y),
            &self.xi[2] * &f.pdiff(&Symbol::T),
            &self.phi * &f.pdiff(&Symbol::H),
        ])
    }

    /// Lie bracket `[V, W]`, componentwise `V(W) − W(V)`.
    pub fn bracket(&self, w: &VectorField) -> VectorField {
        let c = |a: &Expr, b: &Expr| &self.apply(b) - &w.apply(a);
        VectorField::new(
            c(&self.xi[0], &w.xi[0]),
            c(&self.xi[1], &w.xi[1]),
            c(&self.xi[2], &w.xi[2]),
            c(&self.phi, &w.phi),
        )
    }

    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>, assume: &Assumptions) -> Result<Self> {
        self.try_map(|e| e.substitute(bindings, assume))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "t", "h"];
        let mut out = String::new();
        for (c, n) in self.components().into_iter().zip(names) {
            if c.is_empty() {
                continue;
            }
            let (neg, body) = match c.as_single_term() {
                Some((_, k)) => {
                    let neg = k.is_negative();
                    let a = if neg { -c } else { c.clone() };
                    let body = if a.is_one() { format!("d{n}") } else { format!("{a}*d{n}") };
                    (neg, body)
                }
                None => (false, format!("({c})*d{n}")),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// `Q = φ − ξ¹h_x − ξ²h_y − ξ³h_t`.
pub fn characteristic(v: &VectorField) -> Expr {
    let j = |s: &str| Expr::sym(Symbol::jet(s));
    Expr::sum([
        v.phi.clone(),
        -(&v.xi[0] * &j("x")),
        -(&v.xi[1] * &j("y")),
        -(&v.xi[2] * &j("t")),
    ])
}

/// Prolongation of one vector field, memoizing `D_J Q`.
pub struct Prolongation {
    v: VectorField,
    dq: Mutex<HashMap<JetIndex, Expr>>,
}

impl Prolongation {
    pub fn new(v: &VectorField) -> Self {
        let mut memo = HashMap::new();
        memo.insert(JetIndex::ZERO, characteristic(v));
        Prolongation {
            v: v.clone(),
            dq: Mutex::new(memo),
        }
    }

    pub fn field(&self) -> &VectorField {
        &self.v
    }

    fn total_derivative_of_q(&self, j: JetIndex) -> Result<Expr> {
        if let Some(e) = self.dq.lock().expect("memo lock").get(&j) {
            return Ok(e.clone());
        }
        let (lower, var) = BaseVar::ALL
            .iter()
            .find_map(|&v| j.lower(v).map(|l| (l, v)))
            .expect("nonzero index");
        let e = total_derivative(&self.total_derivative_of_q(lower)?, var)?;
        self.dq.lock().expect("memo lock").insert(j, e.clone());
        Ok(e)
    }

    /// `φ^J = D_J Q + ξ¹h_{J+x} + ξ²h_{J+y} + ξ³h_{J+t}`.
    pub fn coefficient(&self, j: JetIndex) -> Result<Expr> {
        if j == JetIndex::ZERO {
            return Ok(self.v.phi.clone());
        }
        let mut parts = vec![self.total_derivative_of_q(j)?];
        for (i, var) in BaseVar::ALL.into_iter().enumerate() {
            parts.push(&self.v.xi[i] * &Expr::jet(j.raise(var)?));
        }
        Ok(Expr::sum(parts))
    }

    /// `pr V(f)` for `f` on jet space.
    pub fn apply(&self, f: &Expr, exec: Exec) -> Result<Expr> {
        let syms: Vec<Symbol> = f.symbols().into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let parts = exec.try_map(&syms, |s| -> Result<Expr> {
            let d = f.pdiff(s);
            let coeff = match s {
                Symbol::Base(b) => self.v.xi[b.index()].clone(),
                Symbol::Jet(j) => self.coefficient(*j)?,
                _ => return Ok(Expr::zero()),
            };
            Ok(&coeff * &d)
        })?;
        Ok(Expr::sum(parts))
    }
}

pub fn prolong_coefficient(v: &VectorField, j: JetIndex) -> Result<Expr> {
    Prolongation::new(v).coefficient(j)
}

/// `pr⁽⁴⁾V(Δ)` restricted to solutions of the equation.
pub fn invariance_residual(v: &VectorField, pde: &PdeDefinition) -> Result<Expr> {
    invariance_residual_with(v, pde, Exec::default())
}

pub fn invariance_residual_with(v: &VectorField, pde: &PdeDefinition, exec: Exec) -> Result<Expr> {
    let raw = Prolongation::new(v).apply(&pde.residual, exec)?;
    OnShell::for_pde(pde).eliminate(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::{DeltaVariant, Params};

    fn vf(a: &str, b: &str, c: &str, d: &str) -> VectorField {
        VectorField::parse(a, b, c, d).unwrap()
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(characteristic(&vf("0", "0", "0", "1")), Expr::one());
        assert_eq!(characteristic(&vf("1", "0", "0", "0")), parse("-h_x").unwrap());
        let v6 = vf("t", "0", "0", "x/(2*lambda)");
        assert_eq!(characteristic(&v6), parse("x/(2*lambda) - t*h_x").unwrap());
    }

    #[test]
    fn prolongation_examples() {
        let x = JetIndex::new(1, 0, 0).unwrap();
        let xx = JetIndex::new(2, 0, 0).unwrap();
        assert!(prolong_coefficient(&vf("0", "0", "0", "1"), x).unwrap().is_empty());
        let v6 = vf("t", "0", "0", "x/(2*lambda)");
        assert_eq!(prolong_coefficient(&v6, x).unwrap(), parse("1/(2*lambda)").unwrap());
        assert!(prolong_coefficient(&vf("1", "0", "0", "0"), xx).unwrap().is_empty());
    }

    #[test]
    fn translations_and_rotation_are_symmetries() {
        let pde = PdeDefinition::symbolic(DeltaVariant::Eq11);
        for v in [vf("1", "0", "0", "0"), vf("0", "0", "1", "0"), vf("y", "-x", "0", "0")] {
            assert!(invariance_residual(&v, &pde).unwrap().is_zero(), "{v}");
        }
    }

    #[test]
    fn scaling_is_not_a_symmetry() {
        let pde = PdeDefinition::new(DeltaVariant::Eq11, Params::ints(1, 1, 1));
        let r = invariance_residual(&vf("x", "0", "0", "0"), &pde).unwrap();
        let g = r.collect_by(|a| matches!(a.as_symbol(), Some(Symbol::Jet(_))));
        assert!(!g[&crate::expr::Monomial::sym(Symbol::jet("xx"))].is_zero());
    }

    #[test]
    fn bracket_of_translation_and_boost() {
        let v1 = vf("1", "0", "0", "0");
        let v6 = vf("t", "0", "0", "x/(2*lambda)");
        let b = v1.bracket(&v6);
        assert!(b.equals(&vf("0", "0", "0", "1/(2*lambda)")));
    }

    #[test]
    fn display() {
        assert_eq!(vf("t", "0", "0", "-x/(2*lambda)").to_string(), "t*dx - 1/2*x*lambda^-1*dh");
        assert_eq!(vf("1", "0", "0", "0").to_string(), "dx");
    }
}
