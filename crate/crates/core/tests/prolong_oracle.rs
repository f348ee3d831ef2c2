//! The characteristic-form prolongation against the classical recursion
//! `φ^{J+i} = D_i φ^J − Σ_k D_i(ξ^k) h_{J+k}`.

use liesym_core::expr::{BaseVar, Expr, JetIndex};
use liesym_core::jet::{total_derivative, DeltaVariant, Params, PdeDefinition};
use liesym_core::liealg::{generator_basis, BasisPreset};
use liesym_core::prolong::{prolong_coefficient, invariance_residual, VectorField};
use proptest::prelude::*;

fn recursive(v: &VectorField, j: JetIndex) -> Expr {
    let Some((lower, var)) = BaseVar::ALL.iter().find_map(|&b| j.lower(b).map(|l| (l, b))) else {
        return v.phi.clone();
    };
    let prev = recursive(v, lower);
    let mut out = total_derivative(&prev, var).unwrap();
    for (k, b) in BaseVar::ALL.into_iter().enumerate() {
        let dxi = total_derivative(&v.xi[k], var).unwrap();
        out = &out - &(&dxi * &Expr::jet(lower.raise(b).unwrap()));
    }
    out
}

fn affine(c: &[i64]) -> Expr {
    let vars = [Expr::x(), Expr::y(), Expr::t(), Expr::h()];
    vars.iter().zip(c).fold(Expr::int(c[4]), |acc, (v, &k)| &acc + &v.scale(&liesym_core::expr::q(k)))
}

fn field() -> impl Strategy<Value = VectorField> {
    proptest::collection::vec(-3i64..=3, 20).prop_map(|c| VectorField::new(affine(&c[0..5]), affine(&c[5..10]), affine(&c[10..15]), affine(&c[15..20])))
}

fn index() -> impl Strategy<Value = JetIndex> {
    (0u8..=2, 0u8..=2, 0u8..=1).prop_map(|(a, b, c)| JetIndex::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characteristic_form_matches_recursion(v in field(), j in index()) {
        let a = prolong_coefficient(&v, j).unwrap();
        let b = recursive(&v, j);
        prop_assert!(a.equals(&b), "J = {}: {} vs {}", j.suffix(), a, b);
    }
}

#[test]
fn nonlinear_field_matches_recursion_to_fourth_order() {
    let v = VectorField::parse("x*h", "y^2", "t*x", "h^2 + x*y").unwrap();
    for j in [JetIndex::new(4, 0, 0).unwrap(), JetIndex::new(2, 2, 0).unwrap(), JetIndex::new(1, 1, 1).unwrap()] {
        assert!(prolong_coefficient(&v, j).unwrap().equals(&recursive(&v, j)), "{}", j.suffix());
    }
}

#[test]
fn generators_annihilate_both_variants() {
    let lambda = Expr::lambda();
    for variant in DeltaVariant::ALL {
        let pde = PdeDefinition::new(variant, Params::symbolic());
        for v in generator_basis(BasisPreset::Recomputed, &lambda) {
            assert!(invariance_residual(&v, &pde).unwrap().is_zero(), "{v} on {}", variant.name());
        }
    }
}
