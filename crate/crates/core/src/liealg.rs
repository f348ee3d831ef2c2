//! Structure of the symmetry algebra: brackets, structure constants, Killing
//! form, derived series, classification and subalgebra checks.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::linalg::{expr_nullspace, ExprSpan, FieldSpan, Mat};
use crate::prolong::VectorField;

/// Which sign convention of the Galilean boosts `V6`, `V7` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BasisPreset {
    /// `V6 = t∂x + x/(2λ)∂h`, `V7 = t∂y + y/(2λ)∂h` as printed.
    #[default]
    Printed,
    /// `V6 = t∂x − x/(2λ)∂h`, `V7 = t∂y − y/(2λ)∂h`, as recomputed.
    Recomputed,
}

impl BasisPreset {
    pub fn name(self) -> &'static str {
        match self {
            BasisPreset::Printed => "printed",
            BasisPreset::Recomputed => "recomputed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(BasisPreset::Printed),
            "recomputed" => Ok(BasisPreset::Recomputed),
            _ => Err(Error::Invalid(format!("unknown basis `{s}`"))),
        }
    }
}

/// The seven generators `V1 … V7` with `λ` given by `lambda`.
pub fn generator_basis(preset: BasisPreset, lambda: &Expr) -> Vec<VectorField> {
    let sign = match preset {
        BasisPreset::Printed => 1,
        BasisPreset::Recomputed => -1,
    };
    let zeta = Expr::one()
        .div(&lambda.scale(&crate::expr::q(2)), &Default::default())
        .expect("lambda is nonzero")
        .scale(&crate::expr::q(sign));
    let (z, o) = (Expr::zero, Expr::one);
    vec![
        VectorField::new(o(), z(), z(), z()),
        VectorField::new(z(), o(), z(), z()),
        VectorField::new(z(), z(), o(), z()),
        VectorField::new(z(), z(), z(), o()),
        VectorField::new(Expr::y(), -Expr::x(), z(), z()),
        VectorField::new(Expr::t(), z(), z(), &zeta * &Expr::x()),
        VectorField::new(z(), Expr::t(), z(), &zeta * &Expr::y()),
    ]
}

pub fn symbolic_basis(preset: BasisPreset) -> Vec<VectorField> {
    generator_basis(preset, &Expr::lambda())
}

/// Finite-dimensional Lie algebra with structure constants
/// `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    pub basis: Vec<VectorField>,
    pub c: Vec<Vec<Vec<Expr>>>,
}

impl LieAlgebra {
    /// Computes structure constants of a list of vector fields; fails if the
    /// list is dependent or not closed under brackets.
    pub fn new(basis: Vec<VectorField>) -> Result<Self> {
        let c = structure_constants(&basis)?;
        Ok(LieAlgebra { basis, c })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// The seven-dimensional algebra of a preset, with symbolic `λ`.
    pub fn preset(preset: BasisPreset) -> Self {
        LieAlgebra::new(symbolic_basis(preset)).expect("generator basis is closed")
    }

    /// Bracket of coordinate vectors.
    pub fn bracket_coords(&self, a: &[Expr], b: &[Expr]) -> Vec<Expr> {
        let n = self.dim();
        let mut out = vec![Expr::zero(); n];
        for (i, ai) in a.iter().enumerate().take(n) {
            if ai.is_empty() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(n) {
                if bj.is_empty() {
                    continue;
                }
                let f = ai * bj;
                for (k, o) in out.iter_mut().enumerate() {
                    if !self.c[i][j][k].is_empty() {
                        *o = &*o + &(&f * &self.c[i][j][k]);
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad_{e_i}` acting on coordinate columns: `(ad_i)[k][j] = c[i][j][k]`.
    pub fn ad(&self, i: usize) -> Mat {
        let n = self.dim();
        Mat::new((0..n).map(|k| (0..n).map(|j| self.c[i][j][k].clone()).collect()).collect())
    }

    pub fn ad_of(&self, a: &[Expr]) -> Mat {
        let n = self.dim();
        (0..n).fold(Mat::zeros(n, n), |acc, i| if a[i].is_empty() { acc } else { acc.add(&self.ad(i).scale(&a[i])) })
    }

    /// `B_ij = tr(ad_i ∘ ad_j)`.
    pub fn killing_form(&self) -> Mat {
        let n = self.dim();
        let ads: Vec<Mat> = (0..n).map(|i| self.ad(i)).collect();
        Mat::new((0..n).map(|i| (0..n).map(|j| ads[i].mul(&ads[j]).trace()).collect()).collect())
    }

    /// `B_ij = Σ_{k,l} c^l_{ik} c^k_{jl}`, computed from the tensor directly.
    pub fn killing_form_tensor(&self) -> Mat {
        let n = self.dim();
        let entry = |i: usize, j: usize| {
            Expr::sum((0..n).flat_map(|k| (0..n).map(move |l| (k, l))).filter_map(|(k, l)| {
                let (a, b) = (&self.c[i][k][l], &self.c[j][l][k]);
                (!a.is_empty() && !b.is_empty()).then(|| a * b)
            }))
        };
        Mat::new((0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect())
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| (&self.c[i][j][k] + &self.c[j][i][k]).is_zero())))
    }

    /// Jacobi identity on all index triples.
    pub fn satisfies_jacobi(&self) -> bool {
        let n = self.dim();
        let e = |i: usize| -> Vec<Expr> { (0..n).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect() };
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (a, b, c) = (e(i), e(j), e(l));
                    let t1 = self.bracket_coords(&a, &self.bracket_coords(&b, &c));
                    let t2 = self.bracket_coords(&b, &self.bracket_coords(&c, &a));
                    let t3 = self.bracket_coords(&c, &self.bracket_coords(&a, &b));
                    if !(0..n).all(|k| Expr::sum([t1[k].clone(), t2[k].clone(), t3[k].clone()]).is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Span of all brackets of vectors in `sub`.
    pub fn bracket_span(&self, a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Result<Vec<Vec<Expr>>> {
        let mut span = ExprSpan::new(self.dim());
        for x in a {
            for y in b {
                span.insert(&self.bracket_coords(x, y))?;
            }
        }
        Ok(span.vectors())
    }

    pub fn unit_vectors(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect()).collect()
    }

    /// Derived series `g ⊇ [g,g] ⊇ …` down to a stable term.
    pub fn derived_series(&self) -> Result<Vec<Vec<Vec<Expr>>>> {
        let mut series = vec![self.unit_vectors()];
        loop {
            let last = series.last().expect("nonempty");
            if last.is_empty() {
                break;
            }
            let next = self.bracket_span(last, last)?;
            if next.len() == last.len() {
                break;
            }
            series.push(next);
        }
        Ok(series)
    }

    pub fn derived_dims(&self) -> Result<Vec<usize>> {
        Ok(self.derived_series()?.iter().map(Vec::len).collect())
    }

    pub fn classify(&self) -> Result<Classification> {
        let series = self.derived_series()?;
        let solvable = series.last().is_some_and(Vec::is_empty);
        let b = self.killing_form();
        let mut span = ExprSpan::new(self.dim());
        for r in &b.rows {
            span.insert(r)?;
        }
        let killing_rank = span.rank();
        let semisimple = self.dim() > 0 && killing_rank == self.dim();
        let radical_dim = if solvable {
            self.dim()
        } else {
            // rad g = [g,g]^⊥ with respect to the Killing form.
            let derived = series.get(1).unwrap_or(&series[0]);
            let rows: Vec<Vec<Expr>> = derived.iter().map(|y| b.apply(y)).collect();
            expr_nullspace(&rows, self.dim())?.len()
        };
        Ok(Classification {
            dim: self.dim(),
            solvable,
            semisimple,
            radical_dim,
            killing_rank,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub dim: usize,
    pub solvable: bool,
    pub semisimple: bool,
    pub radical_dim: usize,
    pub killing_rank: usize,
}

/// Structure constants of a basis of vector fields.
pub fn structure_constants(basis: &[VectorField]) -> Result<Vec<Vec<Vec<Expr>>>> {
    let n = basis.len();
    let brackets: Vec<Vec<VectorField>> = (0..n).map(|i| (0..n).map(|j| basis[i].bracket(&basis[j])).collect()).collect();
    let extra: Vec<VectorField> = brackets.iter().flatten().cloned().collect();
    let span = FieldSpan::new(basis, &extra)?;
    if span.rank() != n {
        return Err(Error::DependentInput);
    }
    let mut c = vec![vec![vec![Expr::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = span
                .express(&brackets[i][j])?
                .ok_or_else(|| Error::NotInSpan(format!("[{}, {}] = {}", basis[i], basis[j], brackets[i][j])))?;
        }
    }
    Ok(c)
}

/// Closure report for a list of fields inside the full algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubalgebraReport {
    pub subalgebra: bool,
    pub ideal: bool,
    pub abelian: bool,
}

/// Whether `vs` spans a subalgebra, an ideal of `ambient`, and is abelian.
pub fn subalgebra_check(vs: &[VectorField], ambient: &[VectorField]) -> Result<SubalgebraReport> {
    let inner: Vec<VectorField> = vs.iter().flat_map(|a| vs.iter().map(move |b| a.bracket(b))).collect();
    let outer: Vec<VectorField> = ambient.iter().flat_map(|a| vs.iter().map(move |b| a.bracket(b))).collect();
    let extra: Vec<VectorField> = inner.iter().chain(&outer).cloned().collect();
    let span = FieldSpan::new(vs, &extra)?;
    if span.rank() != vs.len() {
        return Err(Error::DependentInput);
    }
    let mut subalgebra = true;
    for w in &inner {
        subalgebra &= span.contains(w)?;
    }
    let mut ideal = subalgebra;
    for w in &outer {
        if !ideal {
            break;
        }
        ideal &= span.contains(w)?;
    }
    let abelian = inner.iter().all(VectorField::is_zero);
    Ok(SubalgebraReport { subalgebra, ideal, abelian })
}

pub fn is_subalgebra(vs: &[VectorField]) -> Result<bool> {
    Ok(subalgebra_check(vs, &[])?.subalgebra)
}

pub fn is_ideal(vs: &[VectorField], ambient: &[VectorField]) -> Result<bool> {
    Ok(subalgebra_check(vs, ambient)?.ideal)
}

/// Linear combination `Σ a_k V_k` in text form, e.g. `-1/2*lambda^-1*V4`.
pub fn format_combination(a: &[Expr]) -> String {
    let mut out = String::new();
    for (k, c) in a.iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        let name = format!("V{}", k + 1);
        let term = if c.is_one() {
            name
        } else if (-c).is_one() {
            format!("-{name}")
        } else if c.len() == 1 {
            format!("{c}*{name}")
        } else {
            format!("({c})*{name}")
        };
        if out.is_empty() {
            out = term;
        } else if let Some(rest) = term.strip_prefix('-') {
            out = format!("{out} - {rest}");
        } else {
            out = format!("{out} + {term}");
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// The commutator table as printed, row `i`, column `j` = `[V_i, V_j]`.
/// Each entry lists `(coefficient, generator number)`.
const PRINTED_TABLE: [[&[(&str, usize)]; 7]; 7] = [
    [&[], &[], &[], &[], &[("1", 2)], &[("1/(2*lambda)", 4)], &[]],
    [&[], &[], &[], &[], &[("1", 1)], &[], &[("1/(2*lambda)", 4)]],
    [&[], &[], &[], &[], &[], &[("1", 1)], &[("1", 2)]],
    [&[], &[], &[], &[], &[], &[], &[]],
    [&[("1", 2)], &[("-1", 1)], &[], &[], &[], &[("1", 7)], &[("-1", 6)]],
    [&[("1/(2*lambda)", 4)], &[], &[("-1", 1)], &[], &[("-1", 7)], &[], &[]],
    [&[], &[("-1/(2*lambda)", 4)], &[("-1", 2)], &[], &[("1", 6)], &[], &[]],
];

/// Printed commutator table as coordinate vectors.
pub fn printed_table() -> Vec<Vec<Vec<Expr>>> {
    PRINTED_TABLE
        .iter()
        .map(|row| {
            row.iter()
                .map(|entry| {
                    let mut v = vec![Expr::zero(); 7];
                    for (c, k) in entry.iter() {
                        v[k - 1] = parse(c).expect("printed coefficient parses");
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Comparison of a computed table against the printed one.
#[derive(Debug, Clone)]
pub struct TableComparison {
    /// `(i, j, printed, computed)` for every differing entry (0-based).
    pub mismatches: Vec<(usize, usize, String, String)>,
    /// Pairs `i < j` where the printed entries are not negatives of each other.
    pub antisymmetry_violations: Vec<(usize, usize, String, String)>,
}

pub fn compare_with_printed(alg: &LieAlgebra) -> TableComparison {
    let printed = printed_table();
    let mut mismatches = Vec::new();
    let mut antisymmetry_violations = Vec::new();
    for (i, row) in printed.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let c = &alg.c[i][j];
            if !(0..7).all(|k| (&p[k] - &c[k]).is_zero()) {
                mismatches.push((i, j, format_combination(p), format_combination(c)));
            }
            if i < j && !(0..7).all(|k| (&p[k] + &printed[j][i][k]).is_zero()) {
                antisymmetry_violations.push((i, j, format_combination(p), format_combination(&printed[j][i])));
            }
        }
    }
    TableComparison {
        mismatches,
        antisymmetry_violations,
    }
}

/// Aligned text table of `[V_i, V_j]`.
pub struct CommutatorTable<'a>(pub &'a LieAlgebra);

impl fmt::Display for CommutatorTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.dim();
        let cells: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| format_combination(&self.0.c[i][j])).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1).max(3);
        write!(f, "{:>5} |", "")?;
        for j in 0..n {
            write!(f, " {:>width$}", format!("V{}", j + 1))?;
        }
        writeln!(f)?;
        writeln!(f, "{}", "-".repeat(7 + n * (width + 1)))?;
        for (i, row) in cells.iter().enumerate() {
            write!(f, "{:>5} |", format!("V{}", i + 1))?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn table_json(alg: &LieAlgebra) -> Value {
    let n = alg.dim();
    Value::Array(
        (0..n)
            .map(|i| Value::Array((0..n).map(|j| Value::String(format_combination(&alg.c[i][j]))).collect()))
            .collect(),
    )
}

pub fn matrix_json(m: &Mat) -> Value {
    json!(m.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg() -> LieAlgebra {
        LieAlgebra::preset(BasisPreset::Printed)
    }

    fn e(k: usize) -> Vec<Expr> {
        (0..7).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()
    }

    #[test]
    fn bracket_examples() {
        let b = symbolic_basis(BasisPreset::Printed);
        assert!(b[4].bracket(&b[0]).equals(&b[1]));
        assert!(b[2].bracket(&b[5]).equals(&b[0]));
        for v in &b {
            assert!(v.bracket(v).is_zero());
        }
    }

    #[test]
    fn structure_constant_examples() {
        let a = alg();
        assert_eq!(a.c[0][5][3], parse("1/(2*lambda)").unwrap());
        assert_eq!(a.c[4][5][6], Expr::one());
        for i in 0..7 {
            assert!(a.c[i][i].iter().all(Expr::is_empty));
        }
        assert!(a.is_antisymmetric());
        assert!(a.satisfies_jacobi());
    }

    #[test]
    fn killing_form_two_ways() {
        let a = alg();
        let b = a.killing_form();
        assert!(b.equals(&a.killing_form_tensor()));
        assert!(b.equals(&b.transpose()));
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == 4 && j == 4 { Expr::int(-4) } else { Expr::zero() };
                assert!(b.get(i, j).equals(&want), "B[{i}][{j}] = {}", b.get(i, j));
            }
        }
    }

    #[test]
    fn derived_series_and_classification() {
        let a = alg();
        assert_eq!(a.derived_dims().unwrap(), vec![7, 5, 1, 0]);
        let c = a.classify().unwrap();
        assert!(c.solvable && !c.semisimple);
        assert_eq!(c.radical_dim, 7);
        let b = symbolic_basis(BasisPreset::Printed);
        let sub = LieAlgebra::new(b[..4].to_vec()).unwrap();
        assert_eq!(sub.derived_dims().unwrap(), vec![4, 0]);
        let boosts = LieAlgebra::new(b[5..].to_vec()).unwrap();
        assert_eq!(boosts.classify().unwrap().radical_dim, 2);
        let one = LieAlgebra::new(vec![b[3].clone()]).unwrap();
        let c = one.classify().unwrap();
        assert!(c.solvable && !c.semisimple);
        let zero = LieAlgebra::new(vec![]).unwrap();
        assert_eq!(zero.derived_dims().unwrap(), vec![0]);
    }

    #[test]
    fn derived_series_members_are_ideals_of_predecessor() {
        let a = alg();
        let series = a.derived_series().unwrap();
        for w in series.windows(2) {
            let mut span = ExprSpan::new(7);
            for v in &w[1] {
                span.insert(v).unwrap();
            }
            for x in &w[0] {
                for y in &w[1] {
                    assert!(span.contains(&a.bracket_coords(x, y)).unwrap());
                }
            }
        }
    }

    #[test]
    fn simple_algebra_is_semisimple() {
        // so(3) realised by rotations of (x, y, t).
        let so3 = vec![
            VectorField::parse("y", "-x", "0", "0").unwrap(),
            VectorField::parse("0", "t", "-y", "0").unwrap(),
            VectorField::parse("-t", "0", "x", "0").unwrap(),
        ];
        let c = LieAlgebra::new(so3).unwrap().classify().unwrap();
        assert!(!c.solvable && c.semisimple);
        assert_eq!(c.radical_dim, 0);
    }

    #[test]
    fn subalgebra_examples() {
        let b = symbolic_basis(BasisPreset::Printed);
        let r = subalgebra_check(&b[..4], &b).unwrap();
        assert!(r.subalgebra && r.ideal && r.abelian);
        let r = subalgebra_check(&b[5..], &b).unwrap();
        assert!(r.subalgebra && !r.ideal && r.abelian);
        assert!(is_subalgebra(&b[..3]).unwrap());
        assert!(matches!(subalgebra_check(&[b[0].clone(), b[0].clone()], &b), Err(Error::DependentInput)));
        assert!(!is_subalgebra(&[b[0].clone(), b[4].clone()]).unwrap());
    }

    #[test]
    fn printed_table_has_two_antisymmetry_violations() {
        let cmp = compare_with_printed(&alg());
        let pairs: Vec<(usize, usize)> = cmp.antisymmetry_violations.iter().map(|(i, j, _, _)| (*i, *j)).collect();
        assert_eq!(pairs, vec![(0, 4), (0, 5)]);
        let wrong: Vec<(usize, usize)> = cmp.mismatches.iter().map(|(i, j, _, _)| (*i, *j)).collect();
        assert_eq!(wrong, vec![(0, 4), (5, 0)]);
    }

    #[test]
    fn recomputed_basis_flips_boost_brackets() {
        let a = LieAlgebra::preset(BasisPreset::Recomputed);
        assert_eq!(a.c[0][5][3], parse("-1/(2*lambda)").unwrap());
        assert_eq!(a.derived_dims().unwrap(), vec![7, 5, 1, 0]);
    }

    #[test]
    fn combination_format() {
        let mut v = e(1);
        v[3] = parse("-1/(2*lambda)").unwrap();
        assert_eq!(format_combination(&v), "V2 - 1/2*lambda^-1*V4");
        assert_eq!(format_combination(&vec![Expr::zero(); 7]), "0");
    }
}
