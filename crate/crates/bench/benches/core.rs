use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fqc_core::measures::{build_mu, build_mu_hat, psf_check};
use fqc_core::paley_wiener::{gram_matrix, interpolate_schwartz, Envelope, RKernel};
use fqc_core::regions::{generate_set, SetRequest};
use fqc_core::{
    run_construction, ConstructionConfig, Enumeration, IntervalUnion, Lattice2D, LatticeBox, SetKind, StaircaseSequences,
    TestFunction, TimeFunction,
};

fn lattice(c: &mut Criterion) {
    let l = Lattice2D::default_lattice();
    let bx = LatticeBox::centered(40.0, 40.0);
    c.bench_function("enumerate_box 80x80", |b| b.iter(|| l.enumerate_box(black_box(&bx)).len()));
    let seqs = StaircaseSequences::default_primal();
    c.bench_function("lambda window 256", |b| {
        b.iter(|| {
            generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &seqs, window: 256.0, transverse_cap: None })
                .unwrap()
                .len()
        })
    });
}

fn paley_wiener(c: &mut Criterion) {
    let env = Envelope::new(0.6);
    c.bench_function("envelope derivs k<=6", |b| {
        let mut out = [0.0; 7];
        b.iter(|| {
            env.derivs(black_box(3.7), 6, &mut out);
            out[6]
        })
    });
    let kernel = RKernel::new(IntervalUnion::new([(-1.1, -0.4), (0.4, 1.1)])).unwrap();
    let nodes: Vec<f64> = (-60..=60).map(|i| 0.8 * i as f64).collect();
    c.bench_function("gram 121 nodes", |b| b.iter(|| gram_matrix(&kernel, black_box(&nodes))));
    let data: Vec<f64> = nodes.iter().map(|x| (-0.1 * x * x).exp()).collect();
    let f = interpolate_schwartz(&IntervalUnion::symmetric(0.6), 0.3, nodes.clone(), data, 1e10, None).unwrap();
    c.bench_function("interpolant value", |b| b.iter(|| f.value(black_box(12.3))));
    c.bench_function("interpolant fourier", |b| b.iter(|| f.fourier(black_box(0.41)).unwrap()));
}

fn measures(c: &mut Criterion) {
    let l = Lattice2D::default_lattice();
    let dual = l.dual().unwrap();
    let g = |x: f64| (-PI * x * x).exp();
    let e = Enumeration::Coefficients { k: 40 };
    let mu = build_mu(&l, |y| Ok(g(y)), e, 0.0).unwrap();
    let mu_hat = build_mu_hat(&dual, g, l.covolume(), e, 0.0).unwrap();
    let tests = TestFunction::family(10);
    c.bench_function("psf gaussian k=40", |b| b.iter(|| psf_check(&mu, &mu_hat, black_box(&tests), 1e-6).unwrap().pass));
}

fn construction(c: &mut Criterion) {
    let cfg = ConstructionConfig::default();
    let mut g = c.benchmark_group("construction");
    g.sample_size(10);
    g.bench_function("stage 1", |b| b.iter(|| run_construction(black_box(&cfg), 1).unwrap().stage()));
    g.finish();
}

criterion_group!(benches, lattice, paley_wiener, measures, construction);
criterion_main!(benches);
