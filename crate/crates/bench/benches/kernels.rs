use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mgrit_core::stepper::{matched_lf_coarse, step_ssprk3};
use mgrit_core::{
    ConservationModel, FluxConfig, FluxKind, RhsOperator, SemiDiscreteOperator, SpatialGrid, StateField, WenoConfig,
};

fn operator(model: ConservationModel, n: usize, kind: FluxKind, k: usize) -> Arc<SemiDiscreteOperator> {
    let grid = SpatialGrid::new(1.0, n).unwrap();
    let weno = WenoConfig { k, ..WenoConfig::default() };
    Arc::new(SemiDiscreteOperator::new(model, grid, FluxConfig { kind, weno }).unwrap())
}

fn field(model: ConservationModel, n: usize) -> StateField {
    let values = (0..n)
        .flat_map(|i| {
            let s = (2.0 * PI * (i as f64 + 0.5) / n as f64).sin();
            match model {
                ConservationModel::Burgers => vec![s],
                ConservationModel::ShallowWater { .. } => vec![1.0 + 0.5 * s, 0.0],
                ConservationModel::Euler { .. } => vec![1.0, 0.0, 1.0 + 0.5 * s],
            }
        })
        .collect();
    StateField::from_values(model.n_components(), values).unwrap()
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for (name, model) in [
        ("burgers", ConservationModel::Burgers),
        ("shallow-water", ConservationModel::shallow_water()),
        ("euler", ConservationModel::euler()),
    ] {
        for k in [0, 2] {
            let op = operator(model, 128, FluxKind::Roe, k);
            let u = field(model, 128);
            group.bench_with_input(BenchmarkId::new(name, format!("roe-s{}", 2 * k + 1)), &u, |b, u| {
                b.iter(|| op.rhs(black_box(u)).unwrap())
            });
        }
    }
    group.finish();
}

fn steppers(c: &mut Criterion) {
    let op = operator(ConservationModel::Burgers, 128, FluxKind::Roe, 2);
    let u = field(ConservationModel::Burgers, 128);
    c.bench_function("ssprk3/burgers-weno5", |b| b.iter(|| step_ssprk3(op.as_ref(), black_box(&u), 1e-3).unwrap()));
    let mut group = c.benchmark_group("matched-lf1");
    for m in [2, 4, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| matched_lf_coarse(black_box(&u), 1e-3, 1.0 / 128.0, m, 1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rhs, steppers);
criterion_main!(benches);
