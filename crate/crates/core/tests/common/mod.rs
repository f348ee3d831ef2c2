#![allow(dead_code)]

use liesym_core::adjflow::FlowMap;
use liesym_core::expr::{Expr, Symbol, Q};
use liesym_core::prolong::VectorField;
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const RK4_STEP: f64 = 1.0 / 1024.0;
pub const FLOW_TOL: f64 = 1e-9;

fn point_value(p: &[f64; 4], lambda: f64) -> impl Fn(&Symbol) -> Option<f64> + '_ {
    move |s: &Symbol| match s {
        s if *s == Symbol::X => Some(p[0]),
        s if *s == Symbol::Y => Some(p[1]),
        s if *s == Symbol::T => Some(p[2]),
        s if *s == Symbol::H => Some(p[3]),
        s if *s == Symbol::LAMBDA => Some(lambda),
        _ => None,
    }
}

fn rhs(v: &VectorField, p: &[f64; 4], lambda: f64) -> [f64; 4] {
    v.components().map(|c| c.eval_f64(&point_value(p, lambda)).expect("field evaluates"))
}

/// Fixed-step classical Runge-Kutta for `dp/ds = V(p)` from `s = 0` to `s_end`.
pub fn rk4(v: &VectorField, lambda: f64, start: [f64; 4], s_end: f64) -> [f64; 4] {
    let steps = (s_end / RK4_STEP).round() as usize;
    let h = s_end / steps.max(1) as f64;
    let mut p = start;
    let add = |p: &[f64; 4], k: &[f64; 4], f: f64| -> [f64; 4] { std::array::from_fn(|i| p[i] + f * k[i]) };
    for _ in 0..steps {
        let k1 = rhs(v, &p, lambda);
        let k2 = rhs(v, &add(&p, &k1, h / 2.0), lambda);
        let k3 = rhs(v, &add(&p, &k2, h / 2.0), lambda);
        let k4 = rhs(v, &add(&p, &k3, h), lambda);
        p = std::array::from_fn(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    p
}

/// Closed-form flow evaluated at a point.
pub fn eval_flow(g: &FlowMap, lambda: f64, start: [f64; 4], s: f64) -> [f64; 4] {
    let base = point_value(&start, lambda);
    let param = g.param.clone();
    let value = move |sym: &Symbol| if *sym == param { Some(s) } else { base(sym) };
    g.image.clone().map(|e| e.eval_f64(&value).expect("flow evaluates"))
}

pub fn random_q(rng: &mut ChaCha8Rng, range: i64, max_den: i64) -> Q {
    Q::new(BigInt::from(rng.gen_range(-range..=range)), BigInt::from(rng.gen_range(1..=max_den)))
}

/// Nonzero coefficient vector of length 7; about a third of the entries are zero
/// so that every branch of the normal-form tree is reached.
pub fn random_coefficients(rng: &mut ChaCha8Rng) -> Vec<Q> {
    loop {
        let v: Vec<Q> = (0..7).map(|_| if rng.gen_bool(0.35) { Q::from_integer(0.into()) } else { random_q(rng, 6, 4) }).collect();
        if v.iter().any(|x| *x != Q::from_integer(0.into())) {
            return v;
        }
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    Expr::constant(q.clone()).to_f64_const().expect("rational")
}
