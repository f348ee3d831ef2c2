//! Normal forms of one-dimensional subalgebras under the adjoint action.
//!
//! The coefficients of `V3` and `V5` are invariant under the adjoint group
//! (they span the quotient by the derived algebra), so the decision tree
//! branches on them first. Each branch solves for the group parameters one at
//! a time; every such equation is affine in its unknown once the earlier
//! parameters are fixed. Rotations use exact cosines and sines in `ℚ(√d)`.

use std::cmp::Ordering;
use std::fmt;

use serde_json::{json, Value};

use crate::adjflow::{adjoint_matrix_at, group_param};
use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, Field, Func, Symbol, Q};
use crate::liealg::LieAlgebra;
use crate::linalg::Mat;
use crate::surd::Surd;

/// Value of one group parameter in a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessParam {
    Value(Surd),
    /// An angle given by its exact cosine and sine.
    Angle { cos: Surd, sin: Surd },
}

impl WitnessParam {
    pub fn zero() -> Self {
        WitnessParam::Value(Surd::zero())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            WitnessParam::Value(v) => v.is_zero(),
            WitnessParam::Angle { cos, sin } => sin.is_zero() && cos == &Surd::one(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            WitnessParam::Value(v) => v.to_f64(),
            WitnessParam::Angle { cos, sin } => sin.to_f64().atan2(cos.to_f64()),
        }
    }
}

impl fmt::Display for WitnessParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessParam::Value(v) => write!(f, "{v}"),
            _ if self.is_zero() => f.write_str("0"),
            WitnessParam::Angle { cos, sin } => write!(f, "atan2({sin}, {cos})"),
        }
    }
}

/// Result of [`normalize_optimal`].
#[derive(Debug, Clone)]
pub struct OptimalForm {
    /// Printed class number 1…6.
    pub class_id: u8,
    pub representative: Vec<Surd>,
    /// `composed action(a, witness) = scale · representative`.
    pub scale: Surd,
    pub witness: Vec<WitnessParam>,
    /// Named parameters of the class, e.g. `a` and `b`.
    pub params: Vec<(&'static str, Surd)>,
}

impl OptimalForm {
    pub fn class_label(&self) -> &'static str {
        CLASS_LABELS[self.class_id as usize - 1]
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[Surd]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({
            "class": self.class_id,
            "form": self.class_label(),
            "representative": strs(&self.representative),
            "scale": self.scale.to_string(),
            "witness": self.witness.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "params": self.params.iter().map(|(n, v)| (n.to_string(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

pub const CLASS_LABELS: [&str; 6] = [
    "V2 + a*V6",
    "a*V3 + b*V5",
    "a*V3 + V6",
    "a*V3 + V7",
    "V1 + a*V3 + b*V7",
    "a*V3 + V4 + b*V5",
];

/// Adjoint matrices of one algebra at concrete `λ`, evaluated exactly.
pub struct AdjointEvaluator {
    mats: Vec<Mat>,
    param: Symbol,
}

impl AdjointEvaluator {
    pub fn new(alg: &LieAlgebra) -> Result<Self> {
        let param = group_param();
        let s = Expr::sym(param.clone());
        let mats = (0..alg.dim()).map(|i| adjoint_matrix_at(alg, i, &s)).collect::<Result<Vec<_>>>()?;
        for m in &mats {
            for e in m.flatten() {
                if e.any_symbol(&|x| x != &param) {
                    return Err(Error::Invalid("normal forms need a concrete lambda".into()));
                }
            }
        }
        Ok(AdjointEvaluator { mats, param })
    }

    fn entry(&self, e: &Expr, p: &WitnessParam) -> Result<Surd> {
        let param = &self.param;
        e.eval(&mut |a: &Atom| match (a, p) {
            (Atom::Sym(s), WitnessParam::Value(v)) if s == param => Ok(v.clone()),
            (Atom::Fun(k), _) if matches!(k.func, Func::Sin | Func::Cos) => {
                let (c, s) = match p {
                    WitnessParam::Angle { cos, sin } => (cos.clone(), sin.clone()),
                    WitnessParam::Value(v) if v.is_zero() => (Surd::one(), Surd::zero()),
                    WitnessParam::Value(_) => return Err(Error::Eval("trigonometric entry at a non-angle parameter".into())),
                };
                if k.arg.as_symbol() != Some(param) {
                    return Err(Error::Eval(format!("unsupported kernel argument {}", k.arg)));
                }
                Ok(if k.func == Func::Cos { c } else { s })
            }
            _ => Err(Error::Eval(format!("unexpected atom in adjoint matrix: {}", Expr::atom(a.clone())))),
        })
    }

    /// `A_i(p)·v`.
    pub fn apply_one(&self, i: usize, p: &WitnessParam, v: &[Surd]) -> Result<Vec<Surd>> {
        let m = &self.mats[i];
        let n = v.len();
        let mut out = vec![Surd::zero(); n];
        for (r, o) in out.iter_mut().enumerate() {
            for (c, x) in v.iter().enumerate() {
                let e = m.get(r, c);
                if e.is_empty() || x.is_zero() {
                    continue;
                }
                *o = o.plus(&self.entry(e, p)?.times(x));
            }
        }
        Ok(out)
    }

    /// `A_7(p_7)⋯A_1(p_1)·a`.
    pub fn composed(&self, a: &[Surd], witness: &[WitnessParam]) -> Result<Vec<Surd>> {
        let mut v = a.to_vec();
        for (i, p) in witness.iter().enumerate() {
            if !p.is_zero() {
                v = self.apply_one(i, p, &v)?;
            }
        }
        Ok(v)
    }
}

/// Picks the class and the pivot component from the normalized vector.
type Pick = fn(&[Surd]) -> (u8, Option<usize>);

/// One step of a branch plan (indices 0-based).
enum Step {
    /// Make `target` vanish with the first usable parameter of `params`.
    Linear { target: usize, params: &'static [usize] },
    /// Make `kill` vanish with a rotation by `param`, keeping `keep` positive.
    Rotate { param: usize, kill: usize, keep: usize },
}

fn solve_linear(ev: &AdjointEvaluator, a: &[Surd], w: &mut [WitnessParam], target: usize, params: &[usize]) -> Result<()> {
    for &k in params {
        let mut at = |v: Q| -> Result<Surd> {
            w[k] = WitnessParam::Value(Surd::rational(v));
            Ok(ev.composed(a, w)?[target].clone())
        };
        let (f0, f1, f2) = (at(Q::from_integer(0.into()))?, at(Q::from_integer(1.into()))?, at(Q::from_integer(2.into()))?);
        let slope = f1.sub(&f0);
        if f2.sub(&f1) != slope {
            return Err(Error::Invalid(format!("component {} is not affine in s{}", target + 1, k + 1)));
        }
        if slope.is_zero() {
            w[k] = WitnessParam::zero();
            continue;
        }
        w[k] = WitnessParam::Value(f0.neg().div(&slope).expect("nonzero slope"));
        return Ok(());
    }
    Err(Error::Invalid(format!("no parameter removes component {}", target + 1)))
}

fn solve_rotation(ev: &AdjointEvaluator, a: &[Surd], w: &mut [WitnessParam], param: usize, kill: usize, keep: usize) -> Result<()> {
    let mut at = |c: i64, s: i64| -> Result<Vec<Surd>> {
        w[param] = WitnessParam::Angle { cos: Surd::rational(Q::from_integer(c.into())), sin: Surd::rational(Q::from_integer(s.into())) };
        ev.composed(a, w)
    };
    // The killed component is linear in (cos, sin): α cos + β sin.
    let base = at(0, 0)?;
    let (alpha, beta) = (at(1, 0)?[kill].sub(&base[kill]), at(0, 1)?[kill].sub(&base[kill]));
    let (alpha, beta) = match (alpha.as_rational(), beta.as_rational()) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ => return Err(Error::Invalid("rotation coefficients are not rational".into())),
    };
    let r2 = &alpha * &alpha + &beta * &beta;
    if r2 == Q::from_integer(0.into()) {
        w[param] = WitnessParam::zero();
        return Ok(());
    }
    let r = Surd::sqrt(&r2);
    let inv = r.invert().expect("nonzero radius");
    let mut cos = Surd::rational(beta).times(&inv);
    let mut sin = Surd::rational(-alpha).times(&inv);
    w[param] = WitnessParam::Angle { cos: cos.clone(), sin: sin.clone() };
    if ev.composed(a, w)?[keep].signum() == Ordering::Less {
        cos = cos.neg();
        sin = sin.neg();
        w[param] = WitnessParam::Angle { cos, sin };
    }
    Ok(())
}

fn run_plan(ev: &AdjointEvaluator, a: &[Surd], plan: &[Step]) -> Result<(Vec<WitnessParam>, Vec<Surd>)> {
    let mut w = vec![WitnessParam::zero(); a.len()];
    let mut targets = Vec::new();
    for step in plan {
        match step {
            Step::Linear { target, params } => {
                solve_linear(ev, a, &mut w, *target, params)?;
                targets.push(*target);
            }
            Step::Rotate { param, kill, keep } => {
                solve_rotation(ev, a, &mut w, *param, *kill, *keep)?;
                targets.push(*kill);
            }
        }
    }
    let out = ev.composed(a, &w)?;
    if let Some(t) = targets.iter().find(|&&t| !out[t].is_zero()) {
        return Err(Error::Invalid(format!("component {} survived its normalizing step", t + 1)));
    }
    Ok((w, out))
}

/// Brings `a = Σ a_i V_i` to one of the six printed normal forms.
pub fn normalize_optimal(alg: &LieAlgebra, a: &[Q]) -> Result<OptimalForm> {
    normalize_with(&AdjointEvaluator::new(alg)?, a)
}

pub fn normalize_with(ev: &AdjointEvaluator, a: &[Q]) -> Result<OptimalForm> {
    if a.len() != 7 {
        return Err(Error::Invalid(format!("expected 7 coefficients, got {}", a.len())));
    }
    if a.iter().all(|x| x == &Q::from_integer(0.into())) {
        return Err(Error::Invalid("zero vector".into()));
    }
    let nz = |k: usize| a[k] != Q::from_integer(0.into());
    let v: Vec<Surd> = a.iter().cloned().map(Surd::rational).collect();
    use Step::*;
    // (plan, rule picking the class and pivot from the normalized vector)
    let (plan, pick): (Vec<Step>, Pick) = if nz(4) {
        (
            vec![
                Linear { target: 6, params: &[5] },
                Linear { target: 5, params: &[6] },
                Linear { target: 0, params: &[1] },
                Linear { target: 1, params: &[0] },
            ],
            |r| if r[3].is_zero() { (2, None) } else { (6, Some(3)) },
        )
    } else if nz(5) || nz(6) {
        if nz(2) {
            (
                vec![
                    Rotate { param: 4, kill: 6, keep: 5 },
                    Linear { target: 0, params: &[5] },
                    Linear { target: 1, params: &[6] },
                    Linear { target: 3, params: &[0, 1] },
                ],
                |_| (3, Some(5)),
            )
        } else {
            (
                vec![
                    Rotate { param: 4, kill: 6, keep: 5 },
                    Linear { target: 0, params: &[2] },
                    Linear { target: 3, params: &[0, 1] },
                ],
                |r| if r[1].is_zero() { (3, Some(5)) } else { (1, Some(1)) },
            )
        }
    } else if nz(2) {
        (
            vec![Linear { target: 0, params: &[5] }, Linear { target: 1, params: &[6] }],
            |r| if r[3].is_zero() { (2, None) } else { (6, Some(3)) },
        )
    } else if nz(0) || nz(1) {
        (
            vec![Rotate { param: 4, kill: 1, keep: 0 }, Linear { target: 3, params: &[5, 6] }],
            |_| (5, Some(0)),
        )
    } else {
        (Vec::new(), |_| (6, Some(3)))
    };
    let (witness, out) = run_plan(ev, &v, &plan)?;
    let (class_id, pivot) = pick(&out);
    let scale = pivot.map_or_else(Surd::one, |p| out[p].clone());
    let inv = scale.invert().ok_or_else(|| Error::Invalid("zero pivot".into()))?;
    let representative: Vec<Surd> = out.iter().map(|x| x.times(&inv)).collect();
    let r = &representative;
    let params = match class_id {
        1 => vec![("a", r[5].clone())],
        2 => vec![("a", r[2].clone()), ("b", r[4].clone())],
        3 => vec![("a", r[2].clone())],
        5 => vec![("a", r[2].clone()), ("b", r[6].clone())],
        6 => vec![("a", r[2].clone()), ("b", r[4].clone())],
        _ => Vec::new(),
    };
    Ok(OptimalForm { class_id, representative, scale, witness, params })
}

/// Re-derives `scale · representative` from the witness.
pub fn check_witness(ev: &AdjointEvaluator, a: &[Q], form: &OptimalForm) -> Result<bool> {
    let v: Vec<Surd> = a.iter().cloned().map(Surd::rational).collect();
    let out = ev.composed(&v, &form.witness)?;
    Ok(out.iter().zip(&form.representative).all(|(x, r)| x == &r.times(&form.scale)))
}

/// Whether a representative has exactly the shape of its printed class.
pub fn matches_class_shape(form: &OptimalForm) -> bool {
    let r = &form.representative;
    let zero = |ks: &[usize]| ks.iter().all(|&k| r[k].is_zero());
    let one = |k: usize| r[k] == Surd::one();
    match form.class_id {
        1 => one(1) && zero(&[0, 2, 3, 4, 6]),
        2 => zero(&[0, 1, 3, 5, 6]),
        3 => one(5) && zero(&[0, 1, 3, 4, 6]),
        4 => one(6) && zero(&[0, 1, 3, 4, 5]),
        5 => one(0) && zero(&[1, 3, 4, 5]),
        6 => one(3) && zero(&[0, 1, 5, 6]),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::q;
    use crate::liealg::{generator_basis, BasisPreset};

    fn ev() -> AdjointEvaluator {
        let alg = LieAlgebra::new(generator_basis(BasisPreset::Printed, &Expr::one())).unwrap();
        AdjointEvaluator::new(&alg).unwrap()
    }

    fn vec7(v: [i64; 7]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn boost_plus_translation_is_already_normal() {
        let e = ev();
        let a = vec7([0, 1, 0, 0, 0, 3, 0]);
        let f = normalize_with(&e, &a).unwrap();
        assert_eq!(f.class_id, 1);
        assert_eq!(f.params, vec![("a", Surd::rational(q(3)))]);
        assert!(f.witness.iter().all(WitnessParam::is_zero));
        assert!(check_witness(&e, &a, &f).unwrap());
    }

    #[test]
    fn central_element_is_class_six() {
        let e = ev();
        let f = normalize_with(&e, &vec7([0, 0, 0, 1, 0, 0, 0])).unwrap();
        assert_eq!(f.class_id, 6);
        assert!(f.params.iter().all(|(_, v)| v.is_zero()));
    }

    #[test]
    fn each_branch_produces_its_shape() {
        let e = ev();
        for a in [
            [1, 2, 3, 4, 5, 6, 7],
            [1, 2, 0, 4, 5, 0, 0],
            [1, 2, 3, 4, 0, 6, 7],
            [1, 2, 0, 4, 0, 1, 1],
            [1, 0, 0, 4, 0, 1, 0],
            [0, 0, 0, 0, 0, 2, 0],
            [1, 2, 3, 4, 0, 0, 0],
            [1, 2, 3, 0, 0, 0, 0],
            [3, 4, 0, 9, 0, 0, 0],
        ] {
            let a = vec7(a);
            let f = normalize_with(&e, &a).unwrap();
            assert!(matches_class_shape(&f), "{a:?} -> {:?}", f.representative);
            assert!(check_witness(&e, &a, &f).unwrap(), "{a:?}");
        }
    }

    #[test]
    fn irrational_rotation() {
        let e = ev();
        let a = vec7([0, 0, 1, 0, 0, 1, 1]);
        let f = normalize_with(&e, &a).unwrap();
        assert_eq!(f.class_id, 3);
        assert_eq!(f.params[0].1.to_string(), "1/2*sqrt(2)");
        assert!(check_witness(&e, &a, &f).unwrap());
    }

    #[test]
    fn representatives_are_fixed_points() {
        let e = ev();
        for a in [[1, 2, 3, 4, 5, 6, 7], [0, 1, 0, 5, 0, 2, 3], [1, 1, 0, 0, 0, 0, 0]] {
            let f = normalize_with(&e, &vec7(a)).unwrap();
            let r: Vec<Q> = f.representative.iter().map(|x| x.as_rational().cloned()).collect::<Option<_>>().unwrap_or_default();
            if r.is_empty() {
                continue;
            }
            let g = normalize_with(&e, &r).unwrap();
            assert_eq!(g.class_id, f.class_id);
            assert!(g.witness.iter().all(WitnessParam::is_zero));
            assert_eq!(g.representative, f.representative);
        }
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(normalize_with(&ev(), &vec7([0; 7])).is_err());
    }
}
