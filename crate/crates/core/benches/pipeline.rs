use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use liesym_core::adjflow::conjugation_identity;
use liesym_core::detsolve::{assemble, AnsatzSpec};
use liesym_core::jet::{DeltaVariant, Params, PdeDefinition};
use liesym_core::liealg::{BasisPreset, LieAlgebra};
use liesym_core::nonclassical::nonclassical;
use liesym_core::reduce::reduce_catalog;
use liesym_core::Exec;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn determining_system(c: &mut Criterion) {
    let params = Params::ints(1, 1, 1);
    let pde = PdeDefinition::new(DeltaVariant::Eq29, params.clone());
    let spec = AnsatzSpec::new(2, params);
    let mut g = c.benchmark_group("determining_system");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| black_box(assemble(&spec, &pde, e).unwrap())));
    }
    g.finish();
}

fn conjugation(c: &mut Criterion) {
    let alg = LieAlgebra::preset(BasisPreset::Recomputed);
    let mut g = c.benchmark_group("conjugation_identity");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| black_box(conjugation_identity(&alg, e).unwrap())));
    }
    g.finish();
}

fn reductions(c: &mut Criterion) {
    let pde = PdeDefinition::symbolic(DeltaVariant::Eq29);
    let mut g = c.benchmark_group("reduce_catalog");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| black_box(reduce_catalog(&pde, e).unwrap())));
    }
    g.finish();
}

fn nonclassical_degree2(c: &mut Criterion) {
    let mut g = c.benchmark_group("nonclassical_degree2");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(nonclassical(2, DeltaVariant::Eq29, Params::ints(2, 3, 5), e).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, determining_system, conjugation, reductions, nonclassical_degree2);
criterion_main!(benches);
