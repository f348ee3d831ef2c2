//! Exact linear algebra: fraction-free elimination over ℚ and incremental
//! spans over the field generated by expression coefficients.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{Assumptions, Atom, Expr, Monomial, Q};
use crate::prolong::VectorField;

/// Reduced row echelon form of a rational matrix with `ncols` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Rref {
    pub rows: Vec<Vec<Q>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

fn content(row: &[BigInt]) -> BigInt {
    row.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Fraction-free Gaussian elimination. Rows are scaled to integers, each
/// elimination step is `r ← p·r − a·pivot_row` followed by removal of the
/// row content, and pivots are taken in column order.
pub fn rref(matrix: &[Vec<Q>], ncols: usize) -> Rref {
    let mut rows: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let ints: Vec<BigInt> = r.iter().map(|q| (q * Q::from_integer(l.clone())).to_integer()).collect();
            let g = content(&ints);
            if g.is_zero() {
                ints
            } else {
                ints.into_iter().map(|x| x / &g).collect()
            }
        })
        .filter(|r: &Vec<BigInt>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let Some(sel) = (top..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(top, sel);
        let piv = rows[top].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i == top || r[col].is_zero() {
                continue;
            }
            let a = r[col].clone();
            let p = &piv[col];
            for (x, y) in r.iter_mut().zip(&piv) {
                *x = &*x * p - &a * y;
            }
            let g = content(r);
            if !g.is_zero() && !g.is_one() {
                for x in r.iter_mut() {
                    *x = &*x / &g;
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    let rows = rows
        .into_iter()
        .zip(&pivots)
        .map(|(r, &p)| {
            let d = Q::from_integer(r[p].clone());
            r.into_iter().map(|x| Q::from_integer(x) / &d).collect()
        })
        .collect();
    Rref { rows, pivots, ncols }
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Nullspace basis: one vector per free column, with a 1 in that column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let pivset: BTreeSet<usize> = self.pivots.iter().copied().collect();
        (0..self.ncols)
            .filter(|c| !pivset.contains(c))
            .map(|free| {
                let mut v = vec![Q::zero(); self.ncols];
                v[free] = Q::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -row[free].clone();
                }
                v
            })
            .collect()
    }
}

/// Incremental span over the field of expression coefficients, with every
/// symbol treated as a generic nonzero value.
#[derive(Debug, Clone)]
pub struct ExprSpan {
    dim: usize,
    /// Stored vectors, fully reduced against each other's pivots.
    basis: Vec<(usize, Vec<Expr>)>,
    /// For each stored vector, its expansion in the inserted generators.
    combos: Vec<Vec<Expr>>,
    inserted: usize,
}

fn field_assumptions() -> Assumptions {
    Assumptions::default().permissive()
}

fn simplify(e: Expr) -> Expr {
    if e.is_zero() {
        Expr::zero()
    } else {
        e
    }
}

impl ExprSpan {
    pub fn new(dim: usize) -> Self {
        ExprSpan {
            dim,
            basis: Vec::new(),
            combos: Vec::new(),
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduces `v` by the stored vectors; returns the remainder and the
    /// combination of generators that was subtracted.
    fn reduce(&self, v: &[Expr]) -> Result<(Vec<Expr>, Vec<Expr>)> {
        let mut r: Vec<Expr> = v.to_vec();
        let mut used = vec![Expr::zero(); self.inserted];
        for ((p, b), combo) in self.basis.iter().zip(&self.combos) {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_empty() {
                    *x = simplify(&*x - &(&f * y));
                }
            }
            for (u, c) in used.iter_mut().zip(combo) {
                if !c.is_empty() {
                    *u = simplify(&*u + &(&f * c));
                }
            }
        }
        Ok((r, used))
    }

    /// Inserts a generator; returns whether it increased the rank.
    pub fn insert(&mut self, v: &[Expr]) -> Result<bool> {
        assert_eq!(v.len(), self.dim, "vector length");
        let (r, used) = self.reduce(v)?;
        self.inserted += 1;
        for c in &mut self.combos {
            c.push(Expr::zero());
        }
        // r = v − Σ used·g, i.e. r = g_new − Σ used·g.
        let mut combo: Vec<Expr> = used.iter().map(|u| -u).collect();
        combo.push(Expr::one());
        let nonzero: Vec<usize> = (0..self.dim).filter(|&i| !r[i].is_zero()).collect();
        if nonzero.is_empty() {
            return Ok(false);
        }
        let p = nonzero
            .iter()
            .copied()
            .find(|&i| r[i].len() == 1)
            .unwrap_or(nonzero[0]);
        let inv = r[p].inverse(&field_assumptions())?;
        let b: Vec<Expr> = r.iter().map(|x| simplify(x * &inv)).collect();
        let combo: Vec<Expr> = combo.iter().map(|x| simplify(x * &inv)).collect();
        // Keep stored vectors reduced against the new pivot.
        for (other, oc) in self.basis.iter_mut().zip(self.combos.iter_mut()) {
            let f = other.1[p].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in other.1.iter_mut().zip(&b) {
                *x = simplify(&*x - &(&f * y));
            }
            for (x, y) in oc.iter_mut().zip(&combo) {
                *x = simplify(&*x - &(&f * y));
            }
        }
        self.basis.push((p, b));
        self.combos.push(combo);
        Ok(true)
    }

    pub fn contains(&self, v: &[Expr]) -> Result<bool> {
        Ok(self.reduce(v)?.0.iter().all(|x| x.is_zero()))
    }

    /// Coefficients expressing `v` in the inserted generators, or `None`.
    pub fn express(&self, v: &[Expr]) -> Result<Option<Vec<Expr>>> {
        let (r, used) = self.reduce(v)?;
        if r.iter().all(|x| x.is_zero()) {
            Ok(Some(used))
        } else {
            Ok(None)
        }
    }
}

impl ExprSpan {
    /// Stored basis vectors (reduced against each other's pivots).
    pub fn vectors(&self) -> Vec<Vec<Expr>> {
        self.basis.iter().map(|(_, v)| v.clone()).collect()
    }
}

/// Nullspace of a matrix over the expression field (symbols generic).
pub fn expr_nullspace(rows: &[Vec<Expr>], ncols: usize) -> Result<Vec<Vec<Expr>>> {
    let mut span = ExprSpan::new(ncols);
    for r in rows {
        span.insert(r)?;
    }
    let pivots: BTreeSet<usize> = span.basis.iter().map(|(p, _)| *p).collect();
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Expr::zero(); ncols];
        v[free] = Expr::one();
        for (p, b) in &span.basis {
            v[*p] = -&b[free];
        }
        out.push(v);
    }
    Ok(out)
}

/// Square or rectangular matrix with expression entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: Vec<Vec<Expr>>,
}

impl Mat {
    pub fn new(rows: Vec<Vec<Expr>>) -> Self {
        Mat { rows }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Mat::new(vec![vec![Expr::zero(); m]; n])
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            a.rows[i][i] = Expr::one();
        }
        a
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.rows[i][j]
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let (n, k, m) = (self.nrows(), self.ncols(), o.ncols());
        let mut out = Mat::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                out.rows[i][j] = Expr::sum((0..k).filter(|&l| !self.rows[i][l].is_empty() && !o.rows[l][j].is_empty()).map(|l| &self.rows[i][l] * &o.rows[l][j]));
            }
        }
        out
    }

    pub fn add(&self, o: &Mat) -> Mat {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &Mat, f: impl Fn(&Expr, &Expr) -> Expr) -> Mat {
        Mat::new(self.rows.iter().zip(&o.rows).map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect()).collect())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Mat {
        Mat::new(self.rows.iter().map(|r| r.iter().map(&f).collect()).collect())
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Mat> {
        Ok(Mat::new(
            self.rows.iter().map(|r| r.iter().map(&f).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn scale(&self, c: &Expr) -> Mat {
        self.map(|e| c * e)
    }

    pub fn transpose(&self) -> Mat {
        let (n, m) = (self.nrows(), self.ncols());
        Mat::new((0..m).map(|j| (0..n).map(|i| self.rows[i][j].clone()).collect()).collect())
    }

    pub fn trace(&self) -> Expr {
        Expr::sum((0..self.nrows()).map(|i| self.rows[i][i].clone()))
    }

    pub fn apply(&self, v: &[Expr]) -> Vec<Expr> {
        self.rows.iter().map(|r| Expr::sum(r.iter().zip(v).map(|(a, b)| a * b))).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(Expr::is_zero))
    }

    pub fn equals(&self, o: &Mat) -> bool {
        self.nrows() == o.nrows() && self.ncols() == o.ncols() && self.sub(o).is_zero()
    }

    pub fn flatten(&self) -> Vec<Expr> {
        self.rows.iter().flatten().cloned().collect()
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
    }
}

/// Coordinates for vector fields: monomials in `x, y, t, h` (and kernels of
/// them) per component, with coefficients in the remaining symbols.
pub fn is_coordinate_atom(a: &Atom) -> bool {
    match a {
        Atom::Sym(s) => s.is_point_coordinate(),
        Atom::Fun(k) => k.arg.any_symbol(&|s| s.is_point_coordinate()),
    }
}

/// Splits an expression into `coordinate monomial → coefficient`.
pub fn coordinate_parts(e: &Expr) -> BTreeMap<Monomial, Expr> {
    e.collect_by(is_coordinate_atom)
}

/// Common coordinate system for a list of vector fields.
#[derive(Debug, Clone)]
pub struct FieldCoordinates {
    keys: Vec<(usize, Monomial)>,
}

impl FieldCoordinates {
    pub fn new<'a>(fields: impl IntoIterator<Item = &'a VectorField>) -> Self {
        let mut keys = BTreeSet::new();
        for v in fields {
            for (i, c) in v.components().into_iter().enumerate() {
                for m in coordinate_parts(c).into_keys() {
                    keys.insert((i, m));
                }
            }
        }
        FieldCoordinates {
            keys: keys.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    /// Coefficient vector of `v`; fails if `v` has a monomial outside the system.
    pub fn vector(&self, v: &VectorField) -> Result<Vec<Expr>> {
        let mut out = vec![Expr::zero(); self.keys.len()];
        for (i, c) in v.components().into_iter().enumerate() {
            for (m, coeff) in coordinate_parts(c) {
                match self.keys.binary_search(&(i, m)) {
                    Ok(k) => out[k] = coeff,
                    Err(_) => return Err(Error::NotInSpan(v.to_string())),
                }
            }
        }
        Ok(out)
    }
}

/// Span of vector fields over the coefficient field.
#[derive(Debug, Clone)]
pub struct FieldSpan {
    coords: FieldCoordinates,
    span: ExprSpan,
    generators: Vec<VectorField>,
}

impl FieldSpan {
    /// Builds the span; `extra` fields only widen the coordinate system so
    /// that later membership queries about them are well defined.
    pub fn new(generators: &[VectorField], extra: &[VectorField]) -> Result<Self> {
        let coords = FieldCoordinates::new(generators.iter().chain(extra));
        let mut span = ExprSpan::new(coords.dim());
        for g in generators {
            span.insert(&coords.vector(g)?)?;
        }
        Ok(FieldSpan {
            coords,
            span,
            generators: generators.to_vec(),
        })
    }

    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn contains(&self, v: &VectorField) -> Result<bool> {
        match self.coords.vector(v) {
            Ok(x) => self.span.contains(&x),
            Err(Error::NotInSpan(_)) => Ok(v.is_zero()),
            Err(e) => Err(e),
        }
    }

    /// Coefficients of `v` in the generators, or `None` if outside the span.
    pub fn express(&self, v: &VectorField) -> Result<Option<Vec<Expr>>> {
        match self.coords.vector(v) {
            Ok(x) => self.span.express(&x),
            Err(Error::NotInSpan(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Whether every generator of `a` lies in span `b` and vice versa.
pub fn same_span(a: &[VectorField], b: &[VectorField]) -> Result<bool> {
    let sa = FieldSpan::new(a, b)?;
    let sb = FieldSpan::new(b, a)?;
    for v in b {
        if !sa.contains(v)? {
            return Ok(false);
        }
    }
    for v in a {
        if !sb.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}
