use criterion::{criterion_group, criterion_main, Criterion};

use carpetdim::content::{exact_content_oracle, DigitSequence, Region};
use carpetdim::dim_formulas::{random_cover_dimension, random_cover_dimension_sup, Rates};
use carpetdim::multifractal::packing_count;
use carpetdim::simulator::{estimate_critical_exponent, SampleMode, SampleSource};
use carpetdim::{DigitPattern, SpectrumCurve};

fn corner() -> DigitPattern {
    DigitPattern::new(2, vec![(0, 0), (1, 0), (0, 1)]).unwrap()
}

fn bench_spectrum(c: &mut Criterion) {
    let w = corner().row_weights();
    c.bench_function("spectrum_curve_81_points", |b| {
        b.iter(|| SpectrumCurve::new(w.clone()))
    });
    let curve = SpectrumCurve::new(w.clone());
    c.bench_function("spectrum_at_alpha", |b| {
        let a = 0.5 * (curve.alpha_min() + curve.alpha_max());
        b.iter(|| curve.spectrum_at_alpha(a).unwrap())
    });
    c.bench_function("packing_count_n60", |b| {
        b.iter(|| packing_count(&w, 60, 0.9, 0.05))
    });
}

fn bench_dimensions(c: &mut Criterion) {
    let p = corner();
    let rates = Rates::new(1.0, 2.0).unwrap();
    c.bench_function("random_cover_dimension", |b| {
        b.iter(|| random_cover_dimension(&p, &rates).unwrap())
    });
    c.bench_function("random_cover_dimension_sup_4097", |b| {
        b.iter(|| random_cover_dimension_sup(&p, &rates, 4097).unwrap())
    });
}

fn bench_content(c: &mut Criterion) {
    let p = corner();
    let y = DigitSequence::new(2, vec![1, 0, 1, 1, 0, 0, 1, 1]).unwrap();
    c.bench_function("content_oracle_gen8", |b| {
        b.iter(|| exact_content_oracle(&p, 1.0, &Region::Stripe(&y), 8).unwrap())
    });
}

fn bench_estimator(c: &mut Criterion) {
    let p = DigitPattern::full_square(2);
    let rates = Rates::new(1.0, 1.0).unwrap();
    c.bench_function("critical_exponent_n_2e14", |b| {
        b.iter(|| {
            let mut src = SampleSource::new(&p, SampleMode::Iid, 7);
            estimate_critical_exponent(&p, &rates, &mut src, 1 << 14, (0.5, 1.8)).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_spectrum,
    bench_dimensions,
    bench_content,
    bench_estimator
);
criterion_main!(benches);
