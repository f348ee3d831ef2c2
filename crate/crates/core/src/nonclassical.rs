//! Nonclassical (conditional) symmetries with `ξ³ = 1`: the determining
//! system on the invariant surface `h_t = φ − ξ¹h_x − ξ²h_y`, a staged
//! polynomial solver, and comparison with the classical algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{Assumptions, Atom, Expr, Monomial, Symbol, SymbolKind, Q};
use crate::jet::{DeltaVariant, OnShell, Params, PdeDefinition};
use crate::liealg::{generator_basis, BasisPreset};
use crate::linalg::ExprSpan;
use crate::prolong::{Prolongation, VectorField};
use crate::detsolve::AnsatzSpec;

/// Branch depth cap of the case-splitting stage.
pub const MAX_DEPTH: usize = 8;

/// Polynomial ansatz for `ξ¹, ξ², φ` with `ξ³ = 1`.
#[derive(Debug, Clone)]
pub struct NonclassicalAnsatz {
    pub degree: u32,
    pub pde: PdeDefinition,
}

impl NonclassicalAnsatz {
    pub fn new(degree: u32, pde: PdeDefinition) -> Self {
        NonclassicalAnsatz { degree, pde }
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        AnsatzSpec::new(self.degree, self.pde.params.clone()).monomials()
    }

    /// `c1…cn` for `ξ¹`, then `ξ²`, then `φ`.
    pub fn unknowns(&self) -> Vec<Symbol> {
        (1..=3 * self.monomials().len() as u32).map(Symbol::Coeff).collect()
    }

    pub fn general_field(&self) -> VectorField {
        let mons = self.monomials();
        let n = mons.len();
        let block = |b: usize| {
            Expr::sum(mons.iter().enumerate().map(|(k, m)| Expr::monomial(m.clone(), Q::one()).mul_monomial(&Monomial::sym(Symbol::Coeff((b * n + k + 1) as u32)))))
        };
        VectorField::new(block(0), block(1), Expr::one(), block(2))
    }
}

/// `P = φ − ξ¹h_x − ξ²h_y`, the value of `h_t` on the invariant surface.
pub fn surface_value(v: &VectorField) -> Expr {
    let j = |s: &str| Expr::sym(Symbol::jet(s));
    Expr::sum([v.phi.clone(), -(&v.xi[0] * &j("x")), -(&v.xi[1] * &j("y"))])
}

/// `pr⁽⁴⁾V(Δ)` on `{Δ = 0, Δ₂ = 0, D_J Δ₂ = 0}` for a field with `ξ³ = 1`.
/// Every `t`-jet is replaced through the surface condition, then `h_xxxx`
/// through the equation itself.
pub fn surface_residual(v: &VectorField, pde: &PdeDefinition, exec: Exec) -> Result<Expr> {
    if !v.xi[2].equals(&Expr::one()) {
        return Err(Error::Invalid("nonclassical fields are normalized to xi3 = 1".into()));
    }
    let raw = Prolongation::new(v).apply(&pde.residual, exec)?;
    let surface = OnShell::new(surface_value(v));
    let r = surface.eliminate(&raw)?;
    let top = Symbol::jet("xxxx");
    let value = spatial_top_jet(&surface.eliminate(&pde.residual)?, &top)?;
    r.subst1(&top, &value, &Assumptions::default().permissive())
}

/// Solves the restricted equation `Δ̃ = 0` for `top`.
fn spatial_top_jet(restricted: &Expr, top: &Symbol) -> Result<Expr> {
    let c = restricted.coeff_of(top, 1);
    let c = c.as_rational().filter(|c| !c.is_zero()).ok_or_else(|| Error::Invalid(format!("coefficient of {top} must be a nonzero constant, got {c}")))?;
    let rest = restricted - &Expr::sym(top.clone()).scale(&c);
    if rest.contains(top) {
        return Err(Error::Invalid(format!("equation is not linear in {top}")));
    }
    Ok(rest.scale(&(-c.recip())))
}

/// The same quantity through `pr V(Δ) = ξ¹D_xΔ + ξ²D_yΔ + D_tΔ` on the surface.
pub fn surface_residual_direct(v: &VectorField, pde: &PdeDefinition) -> Result<Expr> {
    use crate::expr::BaseVar;
    use crate::jet::total_derivative;
    let parts = BaseVar::ALL
        .into_iter()
        .map(|b| Ok(&v.xi[b.index()] * &total_derivative(&pde.residual, b)?))
        .collect::<Result<Vec<_>>>()?;
    let surface = OnShell::new(surface_value(v));
    let r = surface.eliminate(&Expr::sum(parts))?;
    let top = Symbol::jet("xxxx");
    let value = spatial_top_jet(&surface.eliminate(&pde.residual)?, &top)?;
    r.subst1(&top, &value, &Assumptions::default().permissive())
}

fn is_unknown(s: &Symbol) -> bool {
    s.kind() == SymbolKind::AnsatzCoeff
}

/// Polynomial constraints in the ansatz coefficients.
#[derive(Debug, Clone)]
pub struct NonclassicalSystem {
    pub ansatz: NonclassicalAnsatz,
    pub unknowns: Vec<Symbol>,
    /// `(monomial in x, y, t, h and jets, polynomial constraint)`.
    pub constraints: Vec<(Monomial, Expr)>,
}

impl NonclassicalSystem {
    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Whether a concrete field satisfies every constraint.
    pub fn satisfied_by(&self, values: &BTreeMap<Symbol, Expr>) -> Result<bool> {
        let assume = Assumptions::default().permissive();
        for (_, c) in &self.constraints {
            let e = c.subst_with(&|s| if is_unknown(s) { Some(values.get(s).cloned().unwrap_or_else(Expr::zero)) } else { None }, &assume)?;
            if !e.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Adds constraints `target − ξ` component-wise for a prescribed field
    /// part, e.g. `ξ¹ = x`.
    pub fn with_component(&self, component: usize, target: &Expr) -> Result<Self> {
        let field = self.ansatz.general_field();
        let comp = match component {
            0 | 1 => field.xi[component].clone(),
            3 => field.phi.clone(),
            _ => return Err(Error::Invalid(format!("component {component} is not free"))),
        };
        let diff = &comp - target;
        let mut out = self.clone();
        for (m, c) in diff.collect_by(|a| !a.as_symbol().is_some_and(is_unknown)) {
            out.constraints.push((m, c));
        }
        Ok(out)
    }
}

/// Builds the nonclassical determining system. Parameters must be concrete.
pub fn nonclassical_determining(ansatz: &NonclassicalAnsatz, exec: Exec) -> Result<NonclassicalSystem> {
    if !ansatz.pde.params.is_concrete() {
        return Err(Error::SymbolicDiscovery("nonclassical solving needs concrete nu, kappa, lambda".into()));
    }
    let r = surface_residual(&ansatz.general_field(), &ansatz.pde, exec)?;
    let constraints = r.collect_by(|a| !a.as_symbol().is_some_and(is_unknown)).into_iter().collect();
    Ok(NonclassicalSystem { unknowns: ansatz.unknowns(), ansatz: ansatz.clone(), constraints })
}

/// Classification of a solution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    ClassicalEquivalent,
    Supplementary,
    Unresolved,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::ClassicalEquivalent => "classical-equivalent",
            FamilyKind::Supplementary => "supplementary",
            FamilyKind::Unresolved => "unresolved",
        }
    }
}

/// One branch outcome of the solver.
#[derive(Debug, Clone)]
pub struct Family {
    pub kind: FamilyKind,
    pub field: VectorField,
    /// Free ansatz coefficients acting as family parameters.
    pub parameters: Vec<Symbol>,
    /// Expressions assumed nonzero on this branch.
    pub nonzero: Vec<Expr>,
    /// Constraints left open (only for unresolved branches).
    pub open: Vec<Expr>,
    /// Case splits taken, e.g. `c3 = 0`, `c5 != 0`.
    pub path: Vec<String>,
    /// `ξ³`-normalized classical combination `V3 + Σ aᵢVᵢ`, when one exists.
    pub classical: Option<Vec<Expr>>,
}

impl Family {
    pub fn to_json(&self) -> Value {
        json!({
            "xi1": self.field.xi[0].to_string(),
            "xi2": self.field.xi[1].to_string(),
            "phi": self.field.phi.to_string(),
            "classification": self.kind.name(),
            "parameters": self.parameters.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "nonzero": self.nonzero.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "open": self.open.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "path": self.path,
            "classical": self.classical.as_ref().map(|c| crate::liealg::format_combination(c)),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] xi1 = {}, xi2 = {}, xi3 = 1, phi = {}", self.kind.name(), self.field.xi[0], self.field.xi[1], self.field.phi)?;
        if let Some(c) = &self.classical {
            write!(f, "  ~  {}", crate::liealg::format_combination(c))?;
        }
        if !self.nonzero.is_empty() {
            let nz: Vec<String> = self.nonzero.iter().map(|e| format!("{e} != 0")).collect();
            write!(f, "  ({})", nz.join(", "))?;
        }
        Ok(())
    }
}

/// Result of [`solve_nonclassical`].
#[derive(Debug, Clone)]
pub struct NonclassicalReport {
    pub unknowns: usize,
    pub constraints: usize,
    pub families: Vec<Family>,
    /// Branches closed by a contradiction.
    pub contradictions: usize,
}

impl NonclassicalReport {
    pub fn count(&self, kind: FamilyKind) -> usize {
        self.families.iter().filter(|f| f.kind == kind).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "unknowns": self.unknowns,
            "constraints": self.constraints,
            "contradictions": self.contradictions,
            "families": self.families.iter().map(Family::to_json).collect::<Vec<_>>(),
            "summary": {
                "classical-equivalent": self.count(FamilyKind::ClassicalEquivalent),
                "supplementary": self.count(FamilyKind::Supplementary),
                "unresolved": self.count(FamilyKind::Unresolved),
            },
            "scope": "xi3 = 1; the xi3 = 0 branch is not analysed",
        })
    }
}

#[derive(Debug, Clone)]
struct Branch {
    subs: BTreeMap<Symbol, Expr>,
    constraints: Vec<Expr>,
    nonzero: BTreeSet<Symbol>,
    /// Values of nonzero symbols that were later eliminated.
    nonzero_exprs: Vec<Expr>,
    path: Vec<String>,
}

enum Outcome {
    Solved(Branch),
    Open(Branch),
    Closed,
}

impl Branch {
    fn assume(&self) -> Assumptions {
        let syms: Vec<Symbol> = self.nonzero.iter().cloned().collect();
        Assumptions::with(&syms)
    }

    /// Clears negative and common powers of nonzero unknowns and fixes the
    /// leading coefficient to one.
    fn normalize(&self, e: &Expr) -> Expr {
        if e.is_empty() {
            return Expr::zero();
        }
        let mut shift = Vec::new();
        for s in &self.nonzero {
            let lo = e.terms().iter().map(|(m, _)| m.exponent_of(s)).min().unwrap_or(0);
            if lo != 0 {
                shift.push((Atom::Sym(s.clone()), -lo));
            }
        }
        let e = if shift.is_empty() { e.clone() } else { e.mul_monomial(&Monomial::from_factors(shift)) };
        let lead = e.leading_coefficient().cloned().unwrap_or_else(Q::one);
        e.scale(&lead.recip())
    }

    fn set(&mut self, u: &Symbol, value: &Expr) -> Result<()> {
        let assume = self.assume();
        let sub = |e: &Expr| e.subst1(u, value, &assume);
        for v in self.subs.values_mut() {
            *v = sub(v)?;
        }
        let mut next = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            next.push(sub(c)?);
        }
        self.constraints = next;
        if self.nonzero.remove(u) {
            self.nonzero_exprs.push(value.clone());
        }
        for e in self.nonzero_exprs.iter_mut() {
            *e = sub(e)?;
        }
        self.subs.insert(u.clone(), value.clone());
        Ok(())
    }

    /// Normalizes, deduplicates and checks for contradictions.
    fn tidy(&mut self) -> bool {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in &self.constraints {
            let n = self.normalize(c);
            if n.is_zero() {
                continue;
            }
            if !n.any_symbol(&is_unknown) || n.symbols().iter().filter(|s| is_unknown(s)).all(|s| self.nonzero.contains(s)) && n.len() == 1 {
                return false;
            }
            if seen.insert(n.clone()) {
                out.push(n);
            }
        }
        out.sort_by_key(|e| (e.len(), e.clone()));
        self.constraints = out;
        !self.nonzero_exprs.iter().any(|e| e.is_zero())
    }

    fn is_invertible(&self, a: &Expr) -> bool {
        a.as_single_term().is_some_and(|(m, _)| m.factors().iter().all(|(at, _)| at.as_symbol().is_some_and(|s| self.nonzero.contains(s))))
    }

    /// A constraint `a·u + b` with invertible `a` and `u` absent from `a, b`.
    fn find_pivot(&self) -> Option<(Symbol, Expr)> {
        let mut best: Option<(usize, Symbol, Expr)> = None;
        for c in &self.constraints {
            for u in c.symbols().into_iter().filter(|s| is_unknown(s) && !self.nonzero.contains(s)) {
                if c.terms().iter().any(|(m, _)| !(0..=1).contains(&m.exponent_of(&u))) {
                    continue;
                }
                let a = c.coeff_of(&u, 1);
                if !self.is_invertible(&a) {
                    continue;
                }
                let b = c - &(&a * &Expr::sym(u.clone()));
                let cost = b.len() + if a.as_rational().is_some() { 0 } else { 1000 };
                if best.as_ref().is_none_or(|(k, _, _)| cost < *k) {
                    let value = match a.inverse(&self.assume()) {
                        Ok(inv) => -(&b * &inv),
                        Err(_) => continue,
                    };
                    best = Some((cost, u, value));
                }
            }
            if best.as_ref().is_some_and(|(k, _, _)| *k == 0) {
                break;
            }
        }
        best.map(|(_, u, v)| (u, v))
    }

    /// Unknown to split on: a non-invertible factor of a linear coefficient,
    /// otherwise the most frequent unknown of the shortest constraint.
    fn split_variable(&self) -> Option<Symbol> {
        for c in &self.constraints {
            for u in c.symbols().into_iter().filter(is_unknown) {
                let a = c.coeff_of(&u, 1);
                if let Some((m, _)) = a.as_single_term() {
                    if let Some(s) = m.factors().iter().filter_map(|(at, _)| at.as_symbol()).find(|s| is_unknown(s) && !self.nonzero.contains(*s)) {
                        return Some(s.clone());
                    }
                }
            }
        }
        let shortest = self.constraints.first()?;
        shortest
            .symbols()
            .into_iter()
            .filter(|s| is_unknown(s) && !self.nonzero.contains(s))
            .max_by_key(|s| (self.constraints.iter().filter(|c| c.contains(s)).count(), std::cmp::Reverse(s.clone())))
    }
}

fn run_branch(mut b: Branch, depth: usize, exec: Exec) -> Result<Vec<Outcome>> {
    loop {
        if !b.tidy() {
            return Ok(vec![Outcome::Closed]);
        }
        if b.constraints.is_empty() {
            return Ok(vec![Outcome::Solved(b)]);
        }
        match b.find_pivot() {
            Some((u, value)) => b.set(&u, &value)?,
            None => break,
        }
    }
    if depth >= MAX_DEPTH {
        return Ok(vec![Outcome::Open(b)]);
    }
    let Some(v) = b.split_variable() else {
        return Ok(vec![Outcome::Open(b)]);
    };
    let mut zero = b.clone();
    zero.path.push(format!("{v} = 0"));
    zero.set(&v, &Expr::zero())?;
    let mut nonzero = b;
    nonzero.path.push(format!("{v} != 0"));
    nonzero.nonzero.insert(v);
    let children = exec.try_map(&[zero, nonzero], |c| run_branch(c.clone(), depth + 1, exec))?;
    Ok(children.into_iter().flatten().collect())
}

/// Coordinates of a field over monomials in `x, y, t, h`, per component.
fn field_coords(v: &VectorField, keys: &[(usize, Monomial)]) -> Vec<Expr> {
    let comps = v.components();
    let collected: Vec<BTreeMap<Monomial, Expr>> = comps.iter().map(|c| c.collect_by(|a| a.as_symbol().is_some_and(|s| s.is_point_coordinate()))).collect();
    keys.iter().map(|(i, m)| collected[*i].get(m).cloned().unwrap_or_else(Expr::zero)).collect()
}

/// Expresses a `ξ³ = 1` field as `V3 + Σ aᵢVᵢ` over the classical basis.
pub fn classical_combination(field: &VectorField, lambda: &Expr) -> Result<Option<Vec<Expr>>> {
    let basis = generator_basis(BasisPreset::Recomputed, lambda);
    let mut keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for v in basis.iter().chain(std::iter::once(field)) {
        for (i, c) in v.components().iter().enumerate() {
            for m in c.collect_by(|a| a.as_symbol().is_some_and(|s| s.is_point_coordinate())).into_keys() {
                keys.insert((i, m));
            }
        }
    }
    let keys: Vec<(usize, Monomial)> = keys.into_iter().collect();
    let mut span = ExprSpan::new(keys.len());
    for v in &basis {
        span.insert(&field_coords(v, &keys))?;
    }
    span.express(&field_coords(field, &keys))
}

/// Runs the staged solver and classifies every branch.
pub fn solve_nonclassical(sys: &NonclassicalSystem, exec: Exec) -> Result<NonclassicalReport> {
    let root = Branch {
        subs: BTreeMap::new(),
        constraints: sys.constraints.iter().map(|(_, c)| c.clone()).collect(),
        nonzero: BTreeSet::new(),
        nonzero_exprs: Vec::new(),
        path: Vec::new(),
    };
    let outcomes = run_branch(root, 0, exec)?;
    let lambda = Expr::constant(sys.ansatz.pde.params.lambda_value().ok_or_else(|| Error::SymbolicDiscovery("lambda must be concrete".into()))?);
    let general = sys.ansatz.general_field();
    let mut families = Vec::new();
    let mut contradictions = 0;
    for o in outcomes {
        let (b, open) = match o {
            Outcome::Closed => {
                contradictions += 1;
                continue;
            }
            Outcome::Solved(b) => (b, false),
            Outcome::Open(b) => (b, true),
        };
        let assume = b.assume();
        let field = general.try_map(|c| c.subst_with(&|s| b.subs.get(s).cloned(), &assume))?;
        let parameters: Vec<Symbol> = sys.unknowns.iter().filter(|s| !b.subs.contains_key(*s)).cloned().collect();
        let mut nonzero: Vec<Expr> = b.nonzero.iter().map(|s| Expr::sym(s.clone())).collect();
        nonzero.extend(b.nonzero_exprs.iter().cloned());
        let classical = if open { None } else { classical_combination(&field, &lambda)? };
        let kind = match (open, classical.is_some()) {
            (true, _) => FamilyKind::Unresolved,
            (false, true) => FamilyKind::ClassicalEquivalent,
            (false, false) => FamilyKind::Supplementary,
        };
        families.push(Family { kind, field, parameters, nonzero, open: if open { b.constraints.clone() } else { Vec::new() }, path: b.path, classical });
    }
    Ok(NonclassicalReport { unknowns: sys.unknown_count(), constraints: sys.constraints.len(), families, contradictions })
}

/// Assembles and solves in one step.
pub fn nonclassical(degree: u32, variant: DeltaVariant, params: Params, exec: Exec) -> Result<NonclassicalReport> {
    let ansatz = NonclassicalAnsatz::new(degree, PdeDefinition::new(variant, params));
    solve_nonclassical(&nonclassical_determining(&ansatz, exec)?, exec)
}
