//! Similarity reductions: invariants of a generator, the change of variables
//! `h = f(z, w) + g(x, y, t)` and the reduced equation in `(z, w)`.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{apply_func, parse_with, Assumptions, Atom, BaseVar, Expr, Func, JetIndex, Monomial, ReducedVar, Symbol};
use crate::jet::PdeDefinition;
use crate::liealg::{symbolic_basis, BasisPreset};
use crate::prolong::VectorField;

fn assume() -> Assumptions {
    Assumptions::default().permissive()
}

fn p(src: &str) -> Expr {
    parse_with(src, &assume()).expect("catalog expression parses")
}

/// Auxiliary symbol `ρ` with `ρ² = z`, used on rotation slices.
pub fn rho() -> Symbol {
    Symbol::other("rho")
}

/// `V(q) = ξ¹q_x + ξ²q_y + ξ³q_t + φq_h = 0`.
pub fn verify_invariant(v: &VectorField, q: &Expr) -> bool {
    v.apply(q).is_zero()
}

/// A slice `(x, y, t) = σ(z, w)` transversal to the orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub x: Expr,
    pub y: Expr,
    pub t: Expr,
}

impl Section {
    pub fn parse(x: &str, y: &str, t: &str) -> Self {
        Section { x: p(x), y: p(y), t: p(t) }
    }

    fn map(&self) -> HashMap<Symbol, Expr> {
        [(Symbol::X, self.x.clone()), (Symbol::Y, self.y.clone()), (Symbol::T, self.t.clone())].into_iter().collect()
    }

    /// Substitutes the slice into `e` and removes even powers of `ρ`.
    pub fn pull_back(&self, e: &Expr) -> Result<Expr> {
        reduce_rho(&e.substitute(&self.map(), &assume())?)
    }
}

/// Rewrites `ρ^(2k+r)` as `z^k ρ^r`, including inside kernels.
pub fn reduce_rho(e: &Expr) -> Result<Expr> {
    let r = rho();
    if !e.contains(&r) {
        return Ok(e.clone());
    }
    let z = Expr::sym(Symbol::Z);
    let mut parts = Vec::with_capacity(e.len());
    for (m, c) in e.terms() {
        let mut term = Expr::constant(c.clone());
        for (a, k) in m.factors() {
            let f = match a {
                Atom::Sym(s) if *s == r => {
                    let (q, rem) = (k.div_euclid(2), k.rem_euclid(2));
                    &z.powi(q, &assume())? * &Expr::sym(r.clone()).pow(rem as u32)
                }
                Atom::Fun(kern) if kern.arg.contains(&r) => {
                    let arg = reduce_rho(&kern.arg)?;
                    let base = if kern.func == Func::Recip { arg.inverse(&assume())? } else { apply_func(kern.func, &arg, &assume())? };
                    base.powi(*k, &assume())?
                }
                _ => Expr::monomial(Monomial::atom(a.clone(), *k), crate::expr::q(1)),
            };
            term = &term * &f;
        }
        parts.push(term);
    }
    Ok(Expr::sum(parts))
}

/// One similarity reduction.
#[derive(Debug, Clone)]
pub struct ReductionSpec {
    pub label: String,
    pub generator: VectorField,
    pub z: Expr,
    pub w: Expr,
    pub r: Expr,
    /// `h = f(z, w) + g`.
    pub g: Expr,
    pub section: Section,
}

impl ReductionSpec {
    /// Builds a spec from invariant texts; `g` follows from `r = h − g`.
    pub fn new(label: &str, generator: VectorField, z: Expr, w: Expr, r: Expr, section: Section) -> Result<Self> {
        if !r.pdiff(&Symbol::H).equals(&Expr::one()) || !r.pdiff(&Symbol::H).pdiff(&Symbol::H).is_empty() {
            return Err(Error::Invalid(format!("r = {r} is not h plus a function of (x, y, t)")));
        }
        let g = &Expr::h() - &r;
        if g.contains(&Symbol::H) {
            return Err(Error::Invalid(format!("r = {r} is not h plus a function of (x, y, t)")));
        }
        Ok(ReductionSpec { label: label.to_string(), generator, z, w, r, g, section })
    }

    /// `V(z) = V(w) = V(r) = 0`.
    pub fn invariants_hold(&self) -> [bool; 3] {
        [&self.z, &self.w, &self.r].map(|q| verify_invariant(&self.generator, q))
    }

    /// `z(σ) = z` and `w(σ) = w`.
    pub fn section_is_consistent(&self) -> Result<bool> {
        let zs = self.section.pull_back(&self.z)?;
        let ws = self.section.pull_back(&self.w)?;
        Ok(zs.equals(&Expr::sym(Symbol::Z)) && ws.equals(&Expr::sym(Symbol::W)))
    }

    pub fn with_section(&self, section: Section) -> Self {
        ReductionSpec { section, ..self.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "generator": self.generator.to_string(),
            "z": self.z.to_string(),
            "w": self.w.to_string(),
            "r": self.r.to_string(),
            "g": self.g.to_string(),
            "section": {"x": self.section.x.to_string(), "y": self.section.y.to_string(), "t": self.section.t.to_string()},
        })
    }
}

/// Derivatives of `h = f(z, w) + g` with respect to `x, y, t`.
struct ChainRule<'a> {
    spec: &'a ReductionSpec,
    memo: HashMap<JetIndex, Expr>,
}

impl ChainRule<'_> {
    fn d(&self, e: &Expr, var: BaseVar) -> Result<Expr> {
        let v = Symbol::Base(var);
        let (zd, wd) = (self.spec.z.pdiff(&v), self.spec.w.pdiff(&v));
        e.derive(&|s: &Symbol| match s {
            Symbol::Base(b) if *b == var => Ok(Some(Expr::one())),
            Symbol::RJet(j) => {
                let fz = Expr::sym(Symbol::RJet(j.raise(ReducedVar::Z)?));
                let fw = Expr::sym(Symbol::RJet(j.raise(ReducedVar::W)?));
                Ok(Some(&(&fz * &zd) + &(&fw * &wd)))
            }
            _ => Ok(None),
        })
    }

    fn value(&mut self, j: JetIndex) -> Result<Expr> {
        if let Some(e) = self.memo.get(&j) {
            return Ok(e.clone());
        }
        let e = if j == JetIndex::ZERO {
            &Expr::sym(Symbol::F) + &self.spec.g
        } else {
            let var = BaseVar::ALL.into_iter().find(|&v| j.lower(v).is_some()).expect("nonzero index");
            let prev = self.value(j.lower(var).expect("checked"))?;
            self.d(&prev, var)?
        };
        self.memo.insert(j, e.clone());
        Ok(e)
    }
}

/// Substitutes the similarity form into the residual and pulls back along the
/// section. Fails if `x, y, t` (or an odd power of `ρ`) survive.
pub fn reduce_equation(spec: &ReductionSpec, pde: &PdeDefinition) -> Result<Expr> {
    let mut chain = ChainRule { spec, memo: HashMap::new() };
    let mut values: HashMap<Symbol, Expr> = HashMap::new();
    for s in pde.residual.symbols() {
        if let Symbol::Jet(j) = s {
            values.insert(s.clone(), chain.value(j)?);
        }
    }
    let lifted = pde.residual.substitute(&values, &assume())?;
    let reduced = spec.section.pull_back(&lifted)?;
    let leftover: Vec<String> = reduced
        .symbols()
        .into_iter()
        .filter(|s| s.is_point_coordinate() || *s == rho())
        .map(|s| s.to_string())
        .collect();
    if !leftover.is_empty() {
        return Err(Error::ResidualDependence(format!("{}: reduced equation still depends on {}", spec.label, leftover.join(", "))));
    }
    Ok(reduced)
}

/// A catalog row: generator as a combination of basis elements, invariants,
/// and a default section.
struct Row {
    combo: &'static [usize],
    z: &'static str,
    w: &'static str,
    r: &'static str,
    section: [&'static str; 3],
    alt_section: Option<[&'static str; 3]>,
}

const ROWS: [Row; 12] = [
    Row { combo: &[1], z: "y", w: "t", r: "h", section: ["0", "z", "w"], alt_section: Some(["1", "z", "w"]) },
    Row { combo: &[2], z: "x", w: "t", r: "h", section: ["z", "0", "w"], alt_section: Some(["z", "1", "w"]) },
    Row { combo: &[3], z: "x", w: "y", r: "h", section: ["z", "w", "0"], alt_section: Some(["z", "w", "1"]) },
    Row { combo: &[5], z: "x^2 + y^2", w: "t", r: "h", section: ["0", "rho", "w"], alt_section: Some(["rho", "0", "w"]) },
    Row { combo: &[6], z: "y", w: "t", r: "h + x^2/(4*lambda*t)", section: ["0", "z", "w"], alt_section: Some(["1", "z", "w"]) },
    Row { combo: &[7], z: "x", w: "t", r: "h + y^2/(4*lambda*t)", section: ["z", "0", "w"], alt_section: Some(["z", "1", "w"]) },
    Row { combo: &[2, 6], z: "t", w: "y - x/t", r: "h + x^2/(4*lambda*t)", section: ["0", "w", "z"], alt_section: None },
    Row { combo: &[3, 5], z: "x^2 + y^2", w: "t - arctan(x/y)", r: "h", section: ["0", "rho", "w"], alt_section: None },
    Row { combo: &[3, 6], z: "y", w: "-2*x + t^2", r: "h + (3*t*x - t^3)/(6*lambda)", section: ["-w/2", "z", "0"], alt_section: None },
    Row { combo: &[3, 7], z: "x", w: "-2*y + t^2", r: "h + (3*t*y - t^3)/(6*lambda)", section: ["z", "-w/2", "0"], alt_section: None },
    Row { combo: &[1, 3, 7], z: "t - x", w: "y + x^2/2 - t*x", r: "h + (x^3 - 3*x^2*t + 6*x*y)/(12*lambda)", section: ["0", "w", "z"], alt_section: None },
    Row { combo: &[3, 4, 5], z: "x^2 + y^2", w: "t - arctan(x/y)", r: "h - arctan(x/y)", section: ["0", "rho", "w"], alt_section: None },
];

fn combination(preset: BasisPreset, combo: &[usize]) -> VectorField {
    let basis = symbolic_basis(preset);
    combo.iter().fold(VectorField::zero(), |acc, &k| acc.add(&basis[k - 1]))
}

/// Which boost sign conventions a catalog row is consistent with.
pub fn consistent_presets(row: usize) -> Vec<BasisPreset> {
    let r = &ROWS[row];
    [BasisPreset::Recomputed, BasisPreset::Printed]
        .into_iter()
        .filter(|&b| {
            let v = combination(b, r.combo);
            [r.z, r.w, r.r].iter().all(|q| verify_invariant(&v, &p(q)))
        })
        .collect()
}

fn label(combo: &[usize]) -> String {
    combo.iter().map(|k| format!("V{k}")).collect::<Vec<_>>().join(" + ")
}

/// Catalog row `row` (0-based), using the first consistent sign convention.
pub fn catalog_row(row: usize) -> Result<ReductionSpec> {
    let r = ROWS.get(row).ok_or_else(|| Error::Invalid(format!("no catalog row {}", row + 1)))?;
    let preset = *consistent_presets(row)
        .first()
        .ok_or_else(|| Error::Invalid(format!("row {}: invariants fail for both boost signs", row + 1)))?;
    let spec = ReductionSpec::new(&label(r.combo), combination(preset, r.combo), p(r.z), p(r.w), p(r.r), Section::parse(r.section[0], r.section[1], r.section[2]))?;
    if !spec.section_is_consistent()? {
        return Err(Error::Invalid(format!("row {}: section does not satisfy z(σ) = z, w(σ) = w", row + 1)));
    }
    Ok(spec)
}

/// Alternative section for rows that have one.
pub fn alternative_section(row: usize) -> Option<Section> {
    ROWS.get(row)?.alt_section.map(|s| Section::parse(s[0], s[1], s[2]))
}

/// The reduced equation is the same on the default section and on `other`.
/// Fails to hold when the ansatz is not built from invariants.
pub fn same_on_sections(spec: &ReductionSpec, other: &Section, pde: &PdeDefinition) -> Result<bool> {
    let a = reduce_equation(spec, pde)?;
    let b = reduce_equation(&spec.with_section(other.clone()), pde)?;
    Ok(a.equals(&b))
}

pub fn catalog_reductions() -> Result<Vec<ReductionSpec>> {
    (0..ROWS.len()).map(catalog_row).collect()
}

/// Reduced equations for every catalog row.
pub fn reduce_catalog(pde: &PdeDefinition, exec: Exec) -> Result<Vec<Expr>> {
    let specs = catalog_reductions()?;
    exec.try_map(&specs, |s| reduce_equation(s, pde))
}

/// Reduced equations as printed (`k` read as `κ`, `t` in row 6 read as `w`).
pub const PRINTED_REDUCED: [&str; 12] = [
    "f_w + nu*f_zz + kappa*f_zzzz - lambda*f_z^2",
    "f_w + nu*f_zz + kappa*f_zzzz - lambda*f_z^2",
    "nu*(f_zz + f_ww) + kappa*(f_zzzz + 2*f_zzww + f_wwww) - lambda*(f_z^2 + f_w^2)",
    "f_w + 4*z*nu*f_zz + 4*nu*f_z + 16*kappa*z^2*f_zzzz + 64*z*f_zzz + 32*kappa*f_zz - 4*lambda*z*f_z^2",
    "f_w + nu*f_zz + kappa*f_zzzz - lambda*f_z^2 - nu/(2*lambda*w)",
    "f_w + nu*f_zz + kappa*f_zzzz - lambda*f_z^2 - nu/(2*lambda*w)",
    "2*lambda*z^4*f_z + 2*nu*lambda*(z^2 + z^4)*f_ww + 2*kappa*lambda*(z + 1)^2*f_wwww - 2*lambda^2*(z^2 + z^4)*f_w^2",
    "(4*kappa + nu*z)*f_ww - lambda*z*f_w^2 - 4*lambda*z^3*f_z^2 + 64*kappa*z^3*f_zzz + 16*kappa*z^4*f_zzzz \
     + (4*nu*z^3 + 32*kappa*z^2)*f_zz + 4*nu*z^2*f_z + kappa*f_wwww + z^2*f_w + 8*kappa*z^2*f_zzww",
    "16*nu*lambda*f_ww - 4*nu*lambda*f_zz - 64*kappa*lambda*f_wwww - 32*kappa*lambda*f_zzww - 4*kappa*lambda*f_zzzz \
     + 16*lambda^2*f_w^2 + 4*lambda^2*f_z^2 - w",
    "-4*nu*lambda*f_zz - 16*nu*lambda*f_ww - 4*kappa*lambda*f_zzzz - 32*kappa*lambda*f_zzww - 64*kappa*lambda*f_wwww \
     + 4*lambda^2*f_z^2 + 16*lambda^2*f_w^2 - w",
    "32*kappa*lambda*(z^2 + z^4)*f_wwww + (96*kappa*lambda*z^2 + 32*kappa*lambda)*f_www \
     + (16*z^2 + 48*kappa*lambda + 16*nu*lambda)*f_ww + (96*kappa*lambda*z^2 + 32*kappa*lambda)*f_zzww \
     + 64*kappa*lambda*(z + z^3)*f_zwww + 16*nu*lambda*f_zz + (16*lambda - 8*lambda*w)*f_z - 16*lambda^2*(z^2 + 1)*f_w^2 \
     + (16*nu*lambda - 16*lambda*z*w)*f_w - 32*lambda^2*z*f_w*f_z + 192*kappa*lambda*z*f_zww + 64*kappa*lambda*z*f_zzzw \
     + 32*nu*lambda*z*f_zw + 8*nu*z + 4*w^2",
    "(4*nu*z^3 + 32*kappa*z^2)*f_zz + (z^2 + 2*lambda*z)*f_w + 16*kappa*z^4*f_zzzz + (nu*z + 4*kappa)*f_ww + kappa*f_wwww \
     - 4*lambda*z^3*f_z^2 + 64*kappa*z^3*f_zzz + 4*nu*z^2*f_z + 8*kappa*z^2*f_zzww - lambda*z*f_w^2 - lambda*z",
];

pub fn printed_reduced(row: usize) -> Expr {
    p(PRINTED_REDUCED[row])
}

/// `Some(c)` with `b = c·a` for a rational `c ≠ 0`.
pub fn proportional(a: &Expr, b: &Expr) -> Option<crate::expr::Q> {
    let (m, ca) = a.terms().first()?;
    let cb = b.terms().iter().find(|(n, _)| n == m).map(|(_, c)| c.clone())?;
    let c = cb / ca;
    (b - &a.scale(&c)).is_zero().then_some(c)
}

fn is_rjet(a: &Atom) -> bool {
    matches!(a.as_symbol(), Some(Symbol::RJet(_)))
}

/// Term-level comparison of a printed reduced equation with a recomputed one.
#[derive(Debug, Clone)]
pub struct ReducedDiff {
    /// Factor applied to the recomputed equation before comparing.
    pub factor: Expr,
    pub matched: Vec<String>,
    /// `(f-jet monomial, printed coefficient, scaled recomputed coefficient)`.
    pub mismatched: Vec<(String, String, String)>,
}

impl ReducedDiff {
    pub fn is_match(&self) -> bool {
        self.mismatched.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factor": self.factor.to_string(),
            "matched": self.matched,
            "mismatched": self.mismatched.iter().map(|(k, p, c)| json!({"term": k, "printed": p, "recomputed": c})).collect::<Vec<_>>(),
        })
    }
}

/// Compares coefficient by coefficient of each `f`-jet monomial, after scaling
/// the recomputed equation by the factor that matches the most terms.
pub fn diff_reduced(printed: &Expr, computed: &Expr) -> ReducedDiff {
    let pc: BTreeMap<Monomial, Expr> = printed.collect_by(is_rjet);
    let cc: BTreeMap<Monomial, Expr> = computed.collect_by(is_rjet);
    let mut candidates: Vec<Expr> = vec![Expr::one()];
    for (k, pv) in &pc {
        if let Some(cv) = cc.get(k) {
            if let Ok(r) = pv.div(cv, &assume()) {
                match candidates.iter_mut().find(|c| c.equals(&r)) {
                    Some(c) if r.len() < c.len() => *c = r,
                    Some(_) => {}
                    None => candidates.push(r),
                }
            }
        }
    }
    let score = |f: &Expr| pc.iter().filter(|(k, pv)| cc.get(*k).is_some_and(|cv| (&(f * cv) - *pv).is_zero())).count();
    let factor = candidates.iter().max_by_key(|f| (score(f), std::cmp::Reverse(f.len()))).cloned().unwrap_or_else(Expr::one);
    let mut keys: Vec<&Monomial> = pc.keys().chain(cc.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut matched = Vec::new();
    let mut mismatched = Vec::new();
    for k in keys {
        let pv = pc.get(k).cloned().unwrap_or_else(Expr::zero);
        let cv = &factor * &cc.get(k).cloned().unwrap_or_else(Expr::zero);
        let name = if k.is_one() { "1".to_string() } else { Expr::monomial(k.clone(), crate::expr::q(1)).to_string() };
        if (&pv - &cv).is_zero() {
            matched.push(name);
        } else {
            mismatched.push((name, pv.to_string(), cv.to_string()));
        }
    }
    ReducedDiff { factor, matched, mismatched }
}
