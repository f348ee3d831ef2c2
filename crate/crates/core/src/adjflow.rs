//! One-parameter groups of the generators, transformation of solutions and
//! the adjoint representation.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{parse, Assumptions, Expr, Symbol, Q};
use crate::liealg::{format_combination, LieAlgebra};
use crate::linalg::{ExprSpan, Mat};
use crate::matexp::exp_mat;
use crate::prolong::VectorField;

/// The default group parameter `s`.
pub fn group_param() -> Symbol {
    Symbol::group("s")
}

/// Group parameter `s_k` of the `k`-th factor (1-based) in a composition.
pub fn indexed_param(k: usize) -> Symbol {
    Symbol::group(&format!("s{k}"))
}

const POINT: [Symbol; 4] = [Symbol::X, Symbol::Y, Symbol::T, Symbol::H];

fn point_map(values: &[Expr; 4]) -> HashMap<Symbol, Expr> {
    POINT.iter().cloned().zip(values.iter().cloned()).collect()
}

fn permissive() -> Assumptions {
    Assumptions::default().permissive()
}

/// Truncated Lie series `Σ_{k≤order} (−s)^k/k! ad_V^k W` on vector fields.
pub fn lie_series(v: &VectorField, w: &VectorField, order: usize, s: &Expr) -> VectorField {
    let mut total = w.clone();
    let mut term = w.clone();
    for k in 1..=order {
        term = v.bracket(&term).scale(&(-s).scale(&Q::new(1.into(), (k as i64).into())));
        if term.is_zero() {
            break;
        }
        total = total.add(&term);
    }
    total
}

/// The same series on coordinate vectors of `alg`.
pub fn lie_series_coords(alg: &LieAlgebra, i: usize, w: &[Expr], order: usize, s: &Expr) -> Vec<Expr> {
    let ad = alg.ad(i);
    let mut total = w.to_vec();
    let mut term = w.to_vec();
    for k in 1..=order {
        let f = (-s).scale(&Q::new(1.into(), (k as i64).into()));
        term = ad.apply(&term).iter().map(|x| &f * x).collect();
        for (a, b) in total.iter_mut().zip(&term) {
            *a = &*a + b;
        }
    }
    total
}

/// `A(s) = exp(−s·ad_{V_i})`; column `j` holds the coordinates of
/// `Ad(exp(sV_i))V_j`.
#[derive(Debug, Clone)]
pub struct AdjointMatrix {
    /// 0-based generator index.
    pub generator: usize,
    pub param: Symbol,
    pub matrix: Mat,
}

impl AdjointMatrix {
    pub fn new(alg: &LieAlgebra, i: usize) -> Result<Self> {
        let param = group_param();
        let matrix = adjoint_matrix_at(alg, i, &Expr::sym(param.clone()))?;
        Ok(AdjointMatrix { generator: i, param, matrix })
    }

    /// `A(value)`.
    pub fn at(&self, value: &Expr) -> Result<Mat> {
        self.matrix.try_map(|e| e.subst1(&self.param, value, &permissive()))
    }

    /// Coordinates of `Ad(exp(sV_i))V_j`.
    pub fn column(&self, j: usize) -> Vec<Expr> {
        (0..self.matrix.nrows()).map(|k| self.matrix.get(k, j).clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({ "generator": self.generator + 1, "matrix": self.matrix.render() })
    }
}

pub fn adjoint_matrix_at(alg: &LieAlgebra, i: usize, s: &Expr) -> Result<Mat> {
    exp_mat(&alg.ad(i).scale(&Expr::int(-1)), s)
}

/// All adjoint matrices, computed concurrently under `exec`.
pub fn adjoint_matrices(alg: &LieAlgebra, exec: Exec) -> Result<Vec<AdjointMatrix>> {
    let idx: Vec<usize> = (0..alg.dim()).collect();
    exec.try_map(&idx, |&i| AdjointMatrix::new(alg, i))
}

/// `A(0) = I` and `dA/ds = −ad_{V_i}·A`, checked symbolically.
pub fn verify_adjoint_ode(alg: &LieAlgebra, a: &Mat, i: usize, param: &Symbol) -> Result<bool> {
    let n = alg.dim();
    let at0 = a.try_map(|e| e.subst1(param, &Expr::zero(), &permissive()))?;
    if !at0.equals(&Mat::identity(n)) {
        return Ok(false);
    }
    let da = a.map(|e| e.pdiff(param));
    Ok(da.add(&alg.ad(i).mul(a)).is_zero())
}

/// `A(s₁)A(s₂) = A(s₁+s₂)`, with trigonometric addition formulas expanded.
pub fn verify_group_law(alg: &LieAlgebra, i: usize) -> Result<bool> {
    let (s1, s2) = (Expr::sym(indexed_param(1)), Expr::sym(indexed_param(2)));
    let lhs = adjoint_matrix_at(alg, i, &s1)?.mul(&adjoint_matrix_at(alg, i, &s2)?);
    let rhs = adjoint_matrix_at(alg, i, &(&s1 + &s2))?.map(Expr::expand_trig);
    Ok(lhs.equals(&rhs))
}

/// Text table with entry `(i, j) = Ad(exp(sV_i))V_j`.
pub struct AdjointTable<'a>(pub &'a [AdjointMatrix]);

impl fmt::Display for AdjointTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let cells: Vec<Vec<String>> =
            self.0.iter().map(|a| (0..n).map(|j| format_combination(&a.column(j))).collect()).collect();
        let widths: Vec<usize> = (0..n)
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(2).max(2))
            .collect();
        write!(f, "{:>4} |", "Ad")?;
        for (j, w) in widths.iter().enumerate() {
            write!(f, " {:<w$}", format!("V{}", j + 1))?;
        }
        writeln!(f)?;
        writeln!(f, "{}", "-".repeat(6 + widths.iter().map(|w| w + 1).sum::<usize>()))?;
        for (i, row) in cells.iter().enumerate() {
            write!(f, "{:>4} |", format!("V{}", i + 1))?;
            for (c, w) in row.iter().zip(&widths) {
                write!(f, " {c:<w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Image of `(x, y, t, h)` under a one-parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub image: [Expr; 4],
    pub param: Symbol,
}

impl FlowMap {
    /// The map at another parameter value.
    pub fn at(&self, value: &Expr) -> Result<FlowMap> {
        let image = self.image.clone().map(|e| e.subst1(&self.param, value, &permissive()));
        let [a, b, c, d] = image;
        Ok(FlowMap { image: [a?, b?, c?, d?], param: self.param.clone() })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FlowMap) -> Result<[Expr; 4]> {
        let map = point_map(&other.image);
        let [a, b, c, d] = self.image.clone().map(|e| e.substitute(&map, &permissive()));
        Ok([a?, b?, c?, d?])
    }

    /// Identity at `s = 0` and `d/ds image = V(image)`.
    pub fn satisfies_flow_ode(&self, v: &VectorField) -> Result<bool> {
        let at0 = self.at(&Expr::zero())?;
        if !at0.image.iter().zip(POINT.iter()).all(|(e, p)| e.equals(&Expr::sym(p.clone()))) {
            return Ok(false);
        }
        let map = point_map(&self.image);
        for (k, c) in v.components().into_iter().enumerate() {
            let rhs = c.substitute(&map, &permissive())?;
            if !self.image[k].pdiff(&self.param).equals(&rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn render(&self) -> [String; 4] {
        self.image.clone().map(|e| e.to_string())
    }

    pub fn to_json(&self) -> Value {
        let [x, y, t, h] = self.render();
        json!({ "x": x, "y": y, "t": t, "h": h })
    }
}

impl fmt::Display for FlowMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, t, h] = self.render();
        write!(f, "(x, y, t, h) -> ({x}, {y}, {t}, {h})")
    }
}

/// The 5×5 matrix `B` with `V = B·(x, y, t, h, 1)` when `V` is affine.
pub fn affine_matrix(v: &VectorField) -> Result<Mat> {
    let zero_point: HashMap<Symbol, Expr> = POINT.iter().map(|p| (p.clone(), Expr::zero())).collect();
    let mut rows = Vec::with_capacity(5);
    for c in v.components() {
        let mut row = Vec::with_capacity(5);
        for p in &POINT {
            let d = c.pdiff(p);
            if d.any_symbol(&|s| s.is_point_coordinate()) {
                return Err(Error::NonAffine(format!("{v}")));
            }
            row.push(d);
        }
        row.push(c.substitute(&zero_point, &permissive())?);
        rows.push(row);
    }
    rows.push(vec![Expr::zero(); 5]);
    Ok(Mat::new(rows))
}

/// Closed-form flow of an affine vector field.
pub fn flow(v: &VectorField) -> Result<FlowMap> {
    flow_with(v, group_param())
}

pub fn flow_with(v: &VectorField, param: Symbol) -> Result<FlowMap> {
    let e = exp_mat(&affine_matrix(v)?, &Expr::sym(param.clone()))?;
    let point: Vec<Expr> = POINT.iter().map(|p| Expr::sym(p.clone())).chain([Expr::one()]).collect();
    let img = e.apply(&point);
    Ok(FlowMap { image: [img[0].clone(), img[1].clone(), img[2].clone(), img[3].clone()], param })
}

/// `f ↦ scale·f(args) + shift` for solutions `h = f(x, y, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTransform {
    pub args: [Expr; 3],
    pub scale: Expr,
    pub shift: Expr,
}

impl SolutionTransform {
    /// Applies the rule to an expression in `x, y, t`.
    pub fn apply(&self, f: &Expr) -> Result<Expr> {
        let map: HashMap<Symbol, Expr> = POINT[..3].iter().cloned().zip(self.args.iter().cloned()).collect();
        let moved = f.substitute(&map, &permissive())?;
        Ok(&(&self.scale * &moved) + &self.shift)
    }

    /// Textual rule with `f` as the unknown function.
    pub fn render(&self) -> String {
        let [x, y, t] = &self.args;
        let call = format!("f({x}, {y}, {t})");
        let lead = if self.scale.is_one() { call } else { format!("({})*{call}", self.scale) };
        if self.shift.is_empty() {
            lead
        } else {
            let s = self.shift.to_string();
            match s.strip_prefix('-') {
                Some(rest) => format!("{lead} - {rest}"),
                None => format!("{lead} + {s}"),
            }
        }
    }

    pub fn equals(&self, o: &SolutionTransform) -> bool {
        self.args.iter().zip(&o.args).all(|(a, b)| a.equals(b)) && self.scale.equals(&o.scale) && self.shift.equals(&o.shift)
    }
}

/// Graph transport by the forward flow: the graph of `f` is pushed by
/// `exp(sV)` and `h̄` is written over the new base point.
pub fn transform_solution(v: &VectorField) -> Result<SolutionTransform> {
    if v.xi.iter().any(|c| c.contains(&Symbol::H)) {
        return Err(Error::Invalid(format!("base projection of {v} depends on h")));
    }
    let fwd = flow(v)?;
    let back = fwd.at(&-Expr::sym(fwd.param.clone()))?;
    let hbar = &fwd.image[3];
    let scale = hbar.pdiff(&Symbol::H);
    if scale.any_symbol(&|s| s.is_point_coordinate()) || scale.is_zero() {
        return Err(Error::NonAffine(format!("{v}")));
    }
    let shift0 = hbar.subst1(&Symbol::H, &Expr::zero(), &permissive())?;
    let base: HashMap<Symbol, Expr> = POINT[..3].iter().cloned().zip(back.image[..3].iter().cloned()).collect();
    Ok(SolutionTransform {
        args: [back.image[0].clone(), back.image[1].clone(), back.image[2].clone()],
        scale,
        shift: shift0.substitute(&base, &permissive())?,
    })
}

/// Pushforward of `w` by the flow of `v` at parameter `s`, as a vector field.
pub fn pushforward(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    let fwd = flow(v)?;
    let back = fwd.at(&-Expr::sym(fwd.param.clone()))?;
    let back_map = point_map(&back.image);
    let comps = fwd.image.clone().map(|c| w.apply(&c).substitute(&back_map, &permissive()));
    let [a, b, c, d] = comps;
    Ok(VectorField::new(a?, b?, c?, d?))
}

/// `exp(sV_i)_* V_j = Σ_k A(s)_{kj} V_k` for every pair.
pub fn conjugation_identity(alg: &LieAlgebra, exec: Exec) -> Result<Vec<(usize, usize, bool)>> {
    let n = alg.dim();
    let mats = adjoint_matrices(alg, exec)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    exec.try_map(&pairs, |&(i, j)| {
        let push = pushforward(&alg.basis[i], &alg.basis[j])?;
        let col = mats[i].column(j);
        let combo = (0..n).fold(VectorField::zero(), |acc, k| acc.add(&alg.basis[k].scale(&col[k])));
        Ok((i, j, push.equals(&combo)))
    })
}

/// `A_7(s₇)⋯A_1(s₁)` with symbolic parameters `s1 … s7`.
pub fn composed_adjoint_matrix(alg: &LieAlgebra) -> Result<Mat> {
    let n = alg.dim();
    let mut acc = Mat::identity(n);
    for i in 0..n {
        let a = adjoint_matrix_at(alg, i, &Expr::sym(indexed_param(i + 1)))?;
        acc = a.mul(&acc);
    }
    Ok(acc)
}

/// `F^{s₇}_7 ∘ ⋯ ∘ F^{s₁}_1` applied to `a`.
pub fn composed_adjoint_action(alg: &LieAlgebra, a: &[Expr], s: &[Expr]) -> Result<Vec<Expr>> {
    let n = alg.dim();
    assert_eq!(s.len(), n, "one parameter per generator");
    let mut v = a.to_vec();
    for (i, si) in s.iter().enumerate() {
        v = adjoint_matrix_at(alg, i, si)?.apply(&v);
    }
    Ok(v)
}

/// Closure and commutativity of a two-dimensional span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub closed: bool,
    pub abelian: bool,
}

/// Whether `⟨y1, y2⟩` (coordinate vectors in `alg`) is a subalgebra.
pub fn check_subalgebra_pair(alg: &LieAlgebra, y1: &[Expr], y2: &[Expr]) -> Result<PairReport> {
    let mut span = ExprSpan::new(alg.dim());
    if !span.insert(y1)? || !span.insert(y2)? {
        return Err(Error::DependentInput);
    }
    let b = alg.bracket_coords(y1, y2);
    let abelian = b.iter().all(Expr::is_zero);
    Ok(PairReport { closed: abelian || span.contains(&b)?, abelian })
}

fn combination(entries: &[(usize, &str)]) -> Vec<Expr> {
    let mut v = vec![Expr::zero(); 7];
    for (k, c) in entries {
        v[k - 1] = parse(c).expect("printed coefficient parses");
    }
    v
}

/// The printed adjoint table: entry `(i, j)` lists `Ad(exp(sV_i))V_j`.
const PRINTED_ADJOINT: [[&[(usize, &str)]; 7]; 7] = [
    [&[(1, "1")], &[(2, "1")], &[(3, "1")], &[(4, "1")], &[(5, "1"), (2, "s")], &[(6, "1"), (4, "-s/(2*lambda)")], &[(7, "1")]],
    [&[(1, "1")], &[(2, "1")], &[(3, "1")], &[(4, "1")], &[(5, "1"), (1, "-s")], &[(6, "1")], &[(7, "1"), (4, "-s/(2*lambda)")]],
    [&[(1, "1")], &[(2, "1")], &[(3, "1")], &[(4, "1")], &[(5, "1")], &[(6, "1"), (1, "-s")], &[(7, "1"), (2, "-s")]],
    [&[(1, "1")], &[(2, "1")], &[(3, "1")], &[(4, "1")], &[(5, "1")], &[(6, "1")], &[(7, "1")]],
    [
        &[(1, "cos(s)"), (2, "-sin(s)")],
        &[(2, "cos(s)"), (1, "sin(s)")],
        &[(3, "1")],
        &[(4, "1")],
        &[(5, "1")],
        &[(6, "cos(s)"), (7, "-sin(s)")],
        &[(7, "cos(s)"), (6, "sin(s)")],
    ],
    [
        &[(1, "1"), (4, "s/(2*lambda)")],
        &[(2, "1")],
        &[(3, "1"), (1, "s"), (4, "s^2/(4*lambda - 4)")],
        &[(4, "1")],
        &[(5, "1"), (7, "s")],
        &[(6, "1")],
        &[(7, "1")],
    ],
    [
        &[(1, "1")],
        &[(2, "1"), (4, "s/(2*lambda)")],
        &[(3, "1"), (2, "s"), (4, "s^2/(4*lambda - 4)")],
        &[(4, "1")],
        &[(5, "1"), (6, "-s")],
        &[(6, "1")],
        &[(7, "1")],
    ],
];

/// The printed adjoint table as matrices in the layout of [`AdjointMatrix`].
pub fn printed_adjoint_table() -> Vec<Mat> {
    PRINTED_ADJOINT
        .iter()
        .map(|row| {
            let cols: Vec<Vec<Expr>> = row.iter().map(|e| combination(e)).collect();
            Mat::new(cols).transpose()
        })
        .collect()
}

/// The printed matrices `M_i^s`, whose row `j` is the image of `V_j`, with
/// `ζ = 1/(2λ)`, `C = cos s`, `S = sin s`.
const PRINTED_M: [[[&str; 7]; 7]; 7] = {
    const I: [[&str; 7]; 7] = [
        ["1", "0", "0", "0", "0", "0", "0"],
        ["0", "1", "0", "0", "0", "0", "0"],
        ["0", "0", "1", "0", "0", "0", "0"],
        ["0", "0", "0", "1", "0", "0", "0"],
        ["0", "0", "0", "0", "1", "0", "0"],
        ["0", "0", "0", "0", "0", "1", "0"],
        ["0", "0", "0", "0", "0", "0", "1"],
    ];
    let mut m = [I; 7];
    m[0][4][1] = "s";
    m[0][5][3] = "-s*zeta";
    m[1][4][0] = "-s";
    m[1][6][3] = "-s*zeta";
    m[2][5][0] = "-s";
    m[2][6][1] = "-s";
    m[4][0] = ["C", "-S", "0", "0", "0", "0", "0"];
    m[4][1] = ["S", "C", "0", "0", "0", "0", "0"];
    m[4][5] = ["0", "0", "0", "0", "0", "C", "-S"];
    m[4][6] = ["0", "0", "0", "0", "0", "S", "C"];
    m[5][0][3] = "s*zeta";
    m[5][2] = ["s", "0", "1", "s^2*zeta/2", "0", "0", "0"];
    m[5][4][6] = "s";
    m[6][1][3] = "s*zeta";
    m[6][2] = ["0", "s", "1", "s^2*zeta/2", "0", "0", "0"];
    m[6][4][5] = "-s";
    m
};

/// The printed matrices `M_i^s`, transposed into the layout of [`AdjointMatrix`].
pub fn printed_m_matrices() -> Vec<Mat> {
    let subst = |e: &str| e.replace("zeta", "(1/(2*lambda))").replace('C', "cos(s)").replace('S', "sin(s)");
    PRINTED_M
        .iter()
        .map(|m| {
            Mat::new(m.iter().map(|r| r.iter().map(|e| parse(&subst(e)).expect("printed entry parses")).collect()).collect())
                .transpose()
        })
        .collect()
}

/// One-parameter groups as printed, `(x̄, ȳ, t̄, h̄)` for each generator.
pub const PRINTED_FLOWS: [[&str; 4]; 7] = [
    ["x + s", "y", "t", "h"],
    ["x", "y + s", "t", "h"],
    ["x", "y", "t + s", "h"],
    ["x", "y", "t", "h + s"],
    ["x*cos(s) + y*sin(s)", "y*cos(s) - x*sin(s)", "t", "h"],
    ["x + s*t", "y", "t", "(t*s^2 + 2*x*s + 4*h*lambda - 4*h)/(4*lambda - 4)"],
    ["x", "y + s*t", "t", "(t*s^2 + 2*x*s + 4*h*lambda - 4*h)/(4*lambda - 4)"],
];

pub fn printed_flow(i: usize) -> Result<FlowMap> {
    let assume = Assumptions::default();
    let p = |e: &str| crate::expr::parse_with(e, &assume);
    let r = &PRINTED_FLOWS[i];
    Ok(FlowMap { image: [p(r[0])?, p(r[1])?, p(r[2])?, p(r[3])?], param: group_param() })
}

/// Solution transformations as printed: `(arguments of f, additive term)`.
pub const PRINTED_TRANSFORMS: [([&str; 3], &str); 7] = [
    (["x + s", "y", "t"], "0"),
    (["x", "y + s", "t"], "0"),
    (["x", "y", "t + s"], "0"),
    (["x", "y", "t"], "-s"),
    (["x*cos(s) + y*sin(s)", "y*cos(s) - x*sin(s)", "t"], "0"),
    (["x + s*t", "y", "t"], "-(2*x*s + t*s^2)/(4*lambda - 4)"),
    (["x", "y + s*t", "t"], "-(2*y*s + t*s^2)/(4*lambda - 4)"),
];

pub fn printed_transform(i: usize) -> Result<SolutionTransform> {
    let (args, shift) = &PRINTED_TRANSFORMS[i];
    Ok(SolutionTransform {
        args: [parse(args[0])?, parse(args[1])?, parse(args[2])?],
        scale: Expr::one(),
        shift: parse(shift)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::BasisPreset;

    fn alg() -> LieAlgebra {
        LieAlgebra::preset(BasisPreset::Printed)
    }

    fn s() -> Expr {
        Expr::sym(group_param())
    }

    fn unit(k: usize) -> Vec<Expr> {
        let mut v = vec![Expr::zero(); 7];
        v[k] = Expr::one();
        v
    }

    #[test]
    fn lie_series_terminates_for_translation_on_boost() {
        let g = alg();
        let r = lie_series(&g.basis[0], &g.basis[5], 5, &s());
        let want = g.basis[5].add(&g.basis[3].scale(&parse("-s/(2*lambda)").unwrap()));
        assert!(r.equals(&want));
        let c = lie_series_coords(&g, 0, &unit(5), 5, &s());
        assert_eq!(format_combination(&c), "-1/2*lambda^-1*s*V4 + V6");
    }

    #[test]
    fn lie_series_truncates_rotation() {
        let g = alg();
        let c = lie_series_coords(&g, 4, &unit(5), 4, &s());
        assert!(c[5].equals(&parse("1 - s^2/2 + s^4/24").unwrap()), "{}", c[5]);
        assert!(c[6].equals(&parse("-s + s^3/6").unwrap()), "{}", c[6]);
    }

    #[test]
    fn adjoint_matrices_have_expected_shape() {
        let g = alg();
        let mats = adjoint_matrices(&g, Exec::Sequential).unwrap();
        assert!(mats[3].matrix.equals(&Mat::identity(7)));
        let a5 = &mats[4].matrix;
        assert!(a5.get(0, 0).equals(&parse("cos(s)").unwrap()));
        assert!(a5.get(1, 0).equals(&parse("-sin(s)").unwrap()));
        assert!(a5.get(5, 5).equals(&parse("cos(s)").unwrap()));
        let a3 = &mats[2].matrix;
        assert!(a3.get(0, 5).equals(&parse("-s").unwrap()));
        assert!(a3.get(1, 6).equals(&parse("-s").unwrap()));
        for (i, a) in mats.iter().enumerate() {
            assert!(verify_adjoint_ode(&g, &a.matrix, i, &group_param()).unwrap());
            assert!(verify_group_law(&g, i).unwrap());
        }
    }

    #[test]
    fn printed_quadratic_entry_fails_the_ode() {
        let g = alg();
        let printed = printed_adjoint_table();
        assert!(!verify_adjoint_ode(&g, &printed[5], 5, &group_param()).unwrap());
        let mut fixed = printed[5].clone();
        fixed.rows[3][2] = parse("s^2/(4*lambda)").unwrap();
        assert!(verify_adjoint_ode(&g, &fixed, 5, &group_param()).unwrap());
    }

    #[test]
    fn printed_m_matrices_agree_with_recomputation() {
        let g = alg();
        let mats = adjoint_matrices(&g, Exec::Sequential).unwrap();
        for (a, m) in mats.iter().zip(printed_m_matrices()) {
            assert!(a.matrix.equals(&m), "M{}", a.generator + 1);
        }
    }

    #[test]
    fn flows_of_rotation_and_boost() {
        let g = alg();
        let f5 = flow(&g.basis[4]).unwrap();
        assert!(f5.image[0].equals(&parse("x*cos(s) + y*sin(s)").unwrap()));
        assert!(f5.image[1].equals(&parse("y*cos(s) - x*sin(s)").unwrap()));
        let f6 = flow(&g.basis[5]).unwrap();
        assert!(f6.image[0].equals(&parse("x + s*t").unwrap()));
        assert!(f6.image[3].equals(&parse("h + (2*x*s + t*s^2)/(4*lambda)").unwrap()));
        for v in &g.basis {
            assert!(flow(v).unwrap().satisfies_flow_ode(v).unwrap(), "{v}");
        }
        assert!(!printed_flow(5).unwrap().satisfies_flow_ode(&g.basis[5]).unwrap());
    }

    #[test]
    fn non_affine_fields_are_rejected() {
        let v = VectorField::parse("x^2", "0", "0", "0").unwrap();
        assert!(matches!(flow(&v), Err(Error::NonAffine(_))));
    }

    #[test]
    fn graph_transport_examples() {
        let g = alg();
        let f = parse("x^2*y + t").unwrap();
        let r1 = transform_solution(&g.basis[0]).unwrap();
        assert!(r1.apply(&f).unwrap().equals(&parse("(x - s)^2*y + t").unwrap()));
        let r4 = transform_solution(&g.basis[3]).unwrap();
        assert!(r4.apply(&f).unwrap().equals(&(&f + &s())));
        assert_eq!(r4.render(), "f(x, y, t) + s");
    }

    #[test]
    fn conjugation_identity_holds() {
        let g = alg();
        for (i, j, ok) in conjugation_identity(&g, Exec::default()).unwrap() {
            assert!(ok, "V{} V{}", i + 1, j + 1);
        }
    }

    #[test]
    fn composed_action_basics() {
        let g = alg();
        let zeros = vec![Expr::zero(); 7];
        let a: Vec<Expr> = (1..=7).map(Expr::int).collect();
        assert_eq!(composed_adjoint_action(&g, &a, &zeros).unwrap(), a);
        let mut s6 = zeros.clone();
        s6[5] = s();
        let r = composed_adjoint_action(&g, &unit(2), &s6).unwrap();
        assert_eq!(format_combination(&r), "s*V1 + V3 + 1/4*lambda^-1*s^2*V4");
    }

    #[test]
    fn subalgebra_pairs() {
        let g = alg();
        let r = check_subalgebra_pair(&g, &unit(0), &combination(&[(3, "1"), (4, "1")])).unwrap();
        assert_eq!(r, PairReport { closed: true, abelian: true });
        let bad = check_subalgebra_pair(&g, &combination(&[(1, "1"), (3, "1")]), &unit(6)).unwrap();
        assert!(!bad.closed);
        let r67 = check_subalgebra_pair(&g, &unit(5), &unit(6)).unwrap();
        assert_eq!(r67, PairReport { closed: true, abelian: true });
        assert!(check_subalgebra_pair(&g, &unit(0), &unit(0)).is_err());
    }
}
