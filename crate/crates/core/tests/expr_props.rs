use liesym_core::expr::{parse_with, Assumptions, BaseVar, Expr, JetIndex, Symbol};
use liesym_core::jet::total_derivative;
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::x()),
        Just(Expr::y()),
        Just(Expr::t()),
        Just(Expr::h()),
        Just(Expr::lambda()),
        Just(Expr::sym(Symbol::jet("x"))),
        Just(Expr::sym(Symbol::jet("xy"))),
        Just(Expr::sym(Symbol::jet("yy"))),
        (-3i64..=3, 1i64..=4).prop_map(|(n, d)| Expr::rat(n, d)),
    ]
}

/// Random polynomial-ish expressions, with occasional sin/exp kernels.
fn expr() -> impl Strategy<Value = Expr> {
    atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            inner.clone().prop_map(|a| Expr::sin(&a)),
            inner.prop_map(|a| Expr::exp(&a)),
        ]
    })
}

/// Jet polynomials of low order, so `D_x D_y` stays within the order bound.
fn jet_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::x()),
        Just(Expr::y()),
        Just(Expr::h()),
        (0u8..=2, 0u8..=2).prop_map(|(a, b)| Expr::jet(JetIndex::new(a, b, 0).unwrap())),
        (-2i64..=2).prop_map(Expr::int),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            inner.prop_map(|a| Expr::sin(&a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn addition_is_associative_and_commutative(a in expr(), b in expr(), c in expr()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn multiplication_distributes(a in expr(), b in expr(), c in expr()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn subtraction_cancels(a in expr()) {
        prop_assert!((&a - &a).is_structurally_zero());
    }

    #[test]
    fn partial_derivatives_commute(e in expr()) {
        let (x, h) = (Symbol::X, Symbol::H);
        prop_assert!(e.pdiff(&x).pdiff(&h).equals(&e.pdiff(&h).pdiff(&x)));
        let l = Symbol::LAMBDA;
        prop_assert!(e.pdiff(&l).pdiff(&x).equals(&e.pdiff(&x).pdiff(&l)));
    }

    #[test]
    fn product_rule(a in expr(), b in expr()) {
        let x = Symbol::X;
        let lhs = (&a * &b).pdiff(&x);
        let rhs = &(&a.pdiff(&x) * &b) + &(&a * &b.pdiff(&x));
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn display_parses_back(e in expr()) {
        let text = e.to_string();
        let back = parse_with(&text, &Assumptions::default().permissive()).unwrap();
        prop_assert!(back.equals(&e), "{} -> {}", text, back);
    }

    #[test]
    fn total_derivatives_commute(e in jet_expr()) {
        let xy = total_derivative(&total_derivative(&e, BaseVar::X).unwrap(), BaseVar::Y).unwrap();
        let yx = total_derivative(&total_derivative(&e, BaseVar::Y).unwrap(), BaseVar::X).unwrap();
        prop_assert!(xy.equals(&yx));
    }
}

#[test]
fn rational_evaluation_is_a_ring_homomorphism() {
    let a = parse_with("x^2*y - 3/2*lambda*h + 1", &Assumptions::default()).unwrap();
    let b = parse_with("x - y^3 + 2*h*lambda", &Assumptions::default()).unwrap();
    let at = |s: &Symbol| match s {
        Symbol::Base(BaseVar::X) => Some(liesym_core::expr::qr(3, 2)),
        Symbol::Base(BaseVar::Y) => Some(liesym_core::expr::q(-2)),
        s if *s == Symbol::H => Some(liesym_core::expr::qr(1, 5)),
        s if *s == Symbol::LAMBDA => Some(liesym_core::expr::q(7)),
        _ => None,
    };
    let (va, vb) = (a.eval_q(&at).unwrap(), b.eval_q(&at).unwrap());
    assert_eq!((&a * &b).eval_q(&at).unwrap(), &va * &vb);
    assert_eq!((&a + &b).eval_q(&at).unwrap(), &va + &vb);
}
