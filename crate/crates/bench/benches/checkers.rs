use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use hlawka_core::campaign::{run_property, CampaignParams, Suite};
use hlawka_core::generators::{control_satisfying_instance, gaussian_vec, random_symmetric_form};
use hlawka_core::numerics::rational;
use hlawka_core::quadratic::{four_point_residual, hlawka_margin, signature_of, Direction, QuadraticForm};
use hlawka_core::sampling::{nonneg_rational_in, rational_vec, trial_rng};
use hlawka_core::semigroup::{hlawka_power_margin, MeasurableSet, MeasureSpace, SetOp};
use hlawka_core::{Scalar, TolerancePolicy};

fn arithmetic(c: &mut Criterion) {
    let small = (Scalar::ratio(355, 113), Scalar::ratio(-22, 7));
    let big = (
        Scalar::Rat(rational(i64::MAX, 3) * rational(i64::MAX, 5)),
        Scalar::Rat(rational(7, i64::MAX - 2) * rational(11, i64::MAX - 4)),
    );
    c.bench_function("rational add, small operands", |b| b.iter(|| black_box(&small.0) + black_box(&small.1)));
    c.bench_function("rational add, big operands", |b| b.iter(|| black_box(&big.0) + black_box(&big.1)));
    c.bench_function("rational mul, small operands", |b| b.iter(|| black_box(&small.0) * black_box(&small.1)));
}

fn quadratic(c: &mut Criterion) {
    let mut rng = trial_rng(1, "bench/quadratic", 0);
    let form = random_symmetric_form(&mut rng, 8).unwrap();
    let [x, y, z] = [0; 3].map(|_| rational_vec(&mut rng, 8, 5, 6));
    c.bench_function("signature_of 8x8", |b| b.iter(|| signature_of(black_box(form.matrix())).unwrap()));
    c.bench_function("four-point residual n=8", |b| b.iter(|| four_point_residual(&form, &x, &y, &z).unwrap()));

    let e = QuadraticForm::euclidean(8).unwrap();
    let [x, y, z] = [0; 3].map(|_| gaussian_vec(&mut rng, 8));
    c.bench_function("forward margin n=8 float", |b| {
        b.iter(|| hlawka_margin(&e, black_box(&x), &y, &z, Direction::Forward).unwrap())
    });
}

fn relation(c: &mut Criterion) {
    let policy = TolerancePolicy::default();
    let mut i = 0;
    c.bench_function("generate and adjudicate controlled instance", |b| {
        b.iter_batched(
            || {
                i += 1;
                trial_rng(2, "bench/relation", i)
            },
            |mut rng| {
                let ci = control_satisfying_instance(&mut rng).unwrap();
                ci.instance.adjudicate(ci.restrict, &policy).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
}

fn measures(c: &mut Criterion) {
    let mut rng = trial_rng(3, "bench/measure", 0);
    let w: Vec<Scalar> = (0..5).map(|_| nonneg_rational_in(&mut rng, 9, 7)).collect();
    let space = MeasureSpace::new(w, SetOp::SymmDiff).unwrap();
    let (a, b_, c_) = (MeasurableSet(0b10110), MeasurableSet(0b01101), MeasurableSet(0b11011));
    for k in [0, 2] {
        c.bench_function(&format!("measure margin k={k}"), |b| {
            b.iter(|| hlawka_power_margin(&space, black_box(&a), &b_, &c_, k).unwrap())
        });
    }
}

fn campaign(c: &mut Criterion) {
    let policy = TolerancePolicy::default();
    let params = CampaignParams::default();
    let mut g = c.benchmark_group("campaign");
    g.sample_size(10);
    for (suite, name) in [(Suite::Identities, "four_point_identity"), (Suite::Integral, "groupmain_implication")] {
        g.bench_function(format!("{name} x100"), |b| {
            b.iter(|| run_property(suite, name, 100, 42, &policy, &params).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, arithmetic, quadratic, relation, measures, campaign);
criterion_main!(benches);
