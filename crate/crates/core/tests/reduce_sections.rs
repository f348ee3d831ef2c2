use liesym_core::expr::{Expr, Symbol};
use liesym_core::jet::{DeltaVariant, PdeDefinition};
use liesym_core::liealg::{generator_basis, BasisPreset};
use liesym_core::reduce::{alternative_section, catalog_row, consistent_presets, reduce_equation, same_on_sections, verify_invariant};
use liesym_core::Exec;

#[test]
fn reduced_equations_do_not_depend_on_the_section() {
    for variant in DeltaVariant::ALL {
        let pde = PdeDefinition::symbolic(variant);
        for row in 0..12 {
            let Some(other) = alternative_section(row) else { continue };
            let spec = catalog_row(row).unwrap();
            assert!(same_on_sections(&spec, &other, &pde).unwrap(), "row {} on {}", row + 1, variant.name());
        }
    }
}

#[test]
fn every_row_is_free_of_the_original_variables() {
    let pde = PdeDefinition::symbolic(DeltaVariant::Eq29);
    let base = [Symbol::X, Symbol::Y, Symbol::T, Symbol::H];
    for row in 0..12 {
        let red = reduce_equation(&catalog_row(row).unwrap(), &pde).unwrap();
        assert!(!red.any_symbol(&|s| base.contains(s) || s.is_point_coordinate()), "row {}: {red}", row + 1);
        assert!(!red.is_zero(), "row {} reduced to 0", row + 1);
    }
}

#[test]
fn invariants_follow_the_consistent_sign() {
    for row in 0..12 {
        let spec = catalog_row(row).unwrap();
        assert_eq!(spec.invariants_hold(), [true; 3], "row {}", row + 1);
        for preset in [BasisPreset::Printed, BasisPreset::Recomputed] {
            let basis = generator_basis(preset, &Expr::lambda());
            // rebuild the row generator from the preset and test the r invariant
            let combo = liesym_core::linalg::FieldSpan::new(&generator_basis(BasisPreset::Recomputed, &Expr::lambda()), &[]).unwrap();
            let coords = combo.express(&spec.generator).unwrap().expect("row generator lies in the algebra");
            let v = basis.iter().zip(&coords).fold(liesym_core::prolong::VectorField::zero(), |acc, (b, c)| acc.add(&b.scale(c)));
            let ok = verify_invariant(&v, &spec.r) && verify_invariant(&v, &spec.z) && verify_invariant(&v, &spec.w);
            assert_eq!(ok, consistent_presets(row).contains(&preset), "row {} under {}", row + 1, preset.name());
        }
    }
}

#[test]
fn catalog_is_the_same_sequentially_and_in_parallel() {
    let pde = PdeDefinition::symbolic(DeltaVariant::Eq29);
    let a = liesym_core::reduce::reduce_catalog(&pde, Exec::Sequential).unwrap();
    let b = liesym_core::reduce::reduce_catalog(&pde, Exec::default()).unwrap();
    assert_eq!(a, b);
}
