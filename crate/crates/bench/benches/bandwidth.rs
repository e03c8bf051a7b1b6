use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use topdc::bandwidth::{mc_oracle, tau_sp_numeric, McIntegrand, QuadratureSettings};
use topdc::dispersion::DispersionModel;
use topdc::rates::evaluate;
use topdc::sample;
use topdc_bench::{fundamental, increment, ring_cases};

fn numeric(c: &mut Criterion) {
    let (model, center) = fundamental();
    let inc = increment(&model, center);
    let bounds = model.valid_range();
    c.bench_function("tau_sp numeric", |b| {
        b.iter(|| tau_sp_numeric(&inc, 3.0 * center, 0.0, sample::LENGTH, bounds, QuadratureSettings::default()).unwrap())
    });
    c.bench_function("monte carlo 1e5", |b| {
        b.iter(|| {
            let integrand = McIntegrand::Spontaneous {
                increment: &inc,
                omega_pump: 3.0 * center,
                mismatch: 0.0,
                length: sample::LENGTH,
                bounds,
            };
            mc_oracle(integrand, 100_000, 1).unwrap()
        })
    });
}

fn spline(c: &mut Criterion) {
    let table = sample::fundamental_table(161);
    c.bench_function("dispersion build", |b| b.iter(|| DispersionModel::build(black_box(&table)).unwrap()));
}

fn rates(c: &mut Criterion) {
    let cases = ring_cases();
    c.bench_function("ring rates", |b| {
        b.iter(|| cases.iter().map(|(d, s)| evaluate(d, s).unwrap().rate).sum::<f64>())
    });
}

criterion_group!(benches, numeric, spline, rates);
criterion_main!(benches);
