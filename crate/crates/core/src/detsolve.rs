//! Determining equations under a polynomial ansatz, exact nullspace solving,
//! and symbolic verification of candidate generators.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{Atom, Expr, Monomial, Symbol, SymbolKind, Q};
use crate::jet::{Params, PdeDefinition};
use crate::linalg::rref;
use crate::prolong::{invariance_residual, invariance_residual_with, VectorField};

/// Polynomial ansatz for `ξ¹, ξ², ξ³, φ`: monomials `x^a y^b t^c h^e` with
/// total degree at most `degree` and `e <= 1`.
#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    pub degree: u32,
    pub params: Params,
}

impl AnsatzSpec {
    pub fn new(degree: u32, params: Params) -> Self {
        AnsatzSpec { degree, params }
    }

    pub fn is_symbolic(&self) -> bool {
        !self.params.is_concrete()
    }

    /// Basis monomials of one coefficient function, in a fixed order:
    /// by total degree, then `x` before `y` before `t` before `h`.
    pub fn monomials(&self) -> Vec<Monomial> {
        let d = self.degree;
        let mut out: Vec<(u32, [u32; 4])> = Vec::new();
        for e in 0..=1u32.min(d) {
            for a in 0..=d - e {
                for b in 0..=d - e - a {
                    for c in 0..=d - e - a - b {
                        out.push((a + b + c + e, [a, b, c, e]));
                    }
                }
            }
        }
        out.sort_by(|(da, ea), (db, eb)| da.cmp(db).then_with(|| eb.cmp(ea)));
        out.into_iter()
            .map(|(_, [a, b, c, e])| {
                Monomial::from_factors([
                    (Atom::Sym(Symbol::X), a as i32),
                    (Atom::Sym(Symbol::Y), b as i32),
                    (Atom::Sym(Symbol::T), c as i32),
                    (Atom::Sym(Symbol::H), e as i32),
                ])
            })
            .collect()
    }

    /// Unknown coefficients `c1, c2, …`, in blocks for `ξ¹, ξ², ξ³, φ`.
    pub fn unknowns(&self) -> Vec<Symbol> {
        (1..=4 * self.monomials().len() as u32).map(Symbol::Coeff).collect()
    }

    /// Vector field with one ansatz coefficient set to `value` and the rest zero.
    pub fn basis_field(&self, k: usize, value: &Expr) -> VectorField {
        let mons = self.monomials();
        let (block, idx) = (k / mons.len(), k % mons.len());
        let mut comps = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
        comps[block] = Expr::monomial(mons[idx].clone(), Q::one()) * value;
        VectorField::from_components(comps)
    }

    /// General field with symbolic unknowns.
    pub fn general_field(&self) -> VectorField {
        let n = self.unknowns().len();
        (0..n).fold(VectorField::zero(), |acc, k| acc.add(&self.basis_field(k, &Expr::sym(Symbol::Coeff(k as u32 + 1)))))
    }

    /// Field with the given rational values for the unknowns.
    pub fn field_from(&self, values: &[Q]) -> VectorField {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .fold(VectorField::zero(), |acc, (k, v)| acc.add(&self.basis_field(k, &Expr::constant(v.clone()))))
    }
}

/// One linear constraint, labelled by the jet monomial it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DetRow {
    pub monomial: Monomial,
    /// Sparse coefficients as `(unknown index, value)`, sorted by index.
    pub coeffs: Vec<(usize, Q)>,
}

/// Homogeneous linear system in the ansatz unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DetSystem {
    pub unknowns: Vec<Symbol>,
    pub rows: Vec<DetRow>,
}

fn is_unknown_atom(a: &Atom) -> bool {
    matches!(a.as_symbol().map(Symbol::kind), Some(SymbolKind::AnsatzCoeff))
}

/// Collects the coefficient of every distinct non-unknown monomial of a
/// residual that is linear and homogeneous in the ansatz unknowns.
pub fn collect_determining(residual: &Expr) -> Result<DetSystem> {
    let mut unknowns: Vec<Symbol> = residual.symbols().into_iter().filter(|s| s.kind() == SymbolKind::AnsatzCoeff).collect();
    unknowns.sort();
    if let Some(p) = residual.symbols().into_iter().find(|s| s.kind() == SymbolKind::Param) {
        return Err(Error::SymbolicDiscovery(format!("residual depends on parameter {p}")));
    }
    let index: BTreeMap<&Symbol, usize> = unknowns.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rows = Vec::new();
    for (m, coeff) in residual.collect_by(|a| !is_unknown_atom(a)) {
        let mut entries = BTreeMap::new();
        for (cm, c) in coeff.terms() {
            match cm.factors() {
                [(Atom::Sym(s), 1)] => {
                    entries.insert(index[s], c.clone());
                }
                [] => return Err(Error::NotLinear(format!("inhomogeneous term at {m}"))),
                _ => return Err(Error::NotLinear(format!("nonlinear term {cm} at {m}"))),
            }
        }
        rows.push(DetRow {
            monomial: m,
            coeffs: entries.into_iter().collect(),
        });
    }
    Ok(DetSystem { unknowns, rows })
}

/// Assembles the determining system column by column: the residual is linear
/// in the field, so each unknown's column is the residual of its basis field.
pub fn assemble(spec: &AnsatzSpec, pde: &PdeDefinition, exec: Exec) -> Result<DetSystem> {
    if spec.is_symbolic() || !pde.params.is_concrete() {
        return Err(Error::SymbolicDiscovery("nullspace solving needs concrete nu, kappa, lambda".into()));
    }
    let unknowns = spec.unknowns();
    let idx: Vec<usize> = (0..unknowns.len()).collect();
    let columns = exec.try_map(&idx, |&k| -> Result<BTreeMap<Monomial, Q>> {
        let v = spec.basis_field(k, &Expr::one());
        let r = invariance_residual_with(&v, pde, Exec::Sequential)?;
        r.terms()
            .iter()
            .map(|(m, c)| Ok((m.clone(), c.clone())))
            .collect()
    })?;
    let mut rows: BTreeMap<Monomial, Vec<(usize, Q)>> = BTreeMap::new();
    for (k, col) in columns.into_iter().enumerate() {
        for (m, c) in col {
            rows.entry(m).or_default().push((k, c));
        }
    }
    Ok(DetSystem {
        unknowns,
        rows: rows.into_iter().map(|(monomial, coeffs)| DetRow { monomial, coeffs }).collect(),
    })
}

impl DetSystem {
    pub fn dense(&self) -> Vec<Vec<Q>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![Q::zero(); self.unknowns.len()];
                for (i, c) in &r.coeffs {
                    v[*i] = c.clone();
                }
                v
            })
            .collect()
    }

    /// `Σ_rows monomial · Σ coeff·unknown`.
    pub fn reconstruct(&self) -> Expr {
        Expr::sum(self.rows.iter().map(|r| {
            let lin = Expr::sum(r.coeffs.iter().map(|(i, c)| Expr::sym(self.unknowns[*i].clone()).scale(c)));
            lin.mul_monomial(&r.monomial)
        }))
    }

    pub fn rank(&self) -> usize {
        rref(&self.dense(), self.unknowns.len()).rank()
    }

    /// Nullspace basis, pivoting in unknown order.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        rref(&self.dense(), self.unknowns.len()).nullspace()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "unknowns": self.unknowns.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "rows": self.rows.iter().map(|r| json!({
                "monomial": r.monomial.to_string(),
                "coeffs": r.coeffs.iter().map(|(i, c)| (self.unknowns[*i].to_string(), Value::String(c.to_string()))).collect::<serde_json::Map<_, _>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Basis of the symmetry generators found under the ansatz.
pub fn solve_nullspace(spec: &AnsatzSpec, sys: &DetSystem) -> Vec<VectorField> {
    sys.nullspace().iter().map(|v| spec.field_from(v)).collect()
}

/// Full discovery pipeline: assemble, solve, return the basis.
pub fn discover(spec: &AnsatzSpec, pde: &PdeDefinition, exec: Exec) -> Result<(DetSystem, Vec<VectorField>)> {
    let sys = assemble(spec, pde, exec)?;
    let basis = solve_nullspace(spec, &sys);
    Ok((sys, basis))
}

/// Whether the invariance residual vanishes identically, parameters symbolic
/// or concrete.
pub fn verify_generator(v: &VectorField, pde: &PdeDefinition) -> Result<bool> {
    Ok(invariance_residual(v, pde)?.is_zero())
}
