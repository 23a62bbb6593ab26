use criterion::{criterion_group, criterion_main, Criterion};
use magberezin::berezin::{CoherentFamily, FiducialVector};
use magberezin::fields::{circulation, flux_triangle, sinusoidal_field, sinusoidal_potential};
use magberezin::presets::{self, random_gaussian_kernel};
use magberezin::strictq::phase_lemma_check;
use magberezin::weyl::{rep_operator, twisted_conv, weyl_op};
use magberezin::{BoxGrid, MagneticField, PhaseGrid, VectorPotential};
use std::hint::black_box;

fn geometry(c: &mut Criterion) {
    let b = sinusoidal_field(1.0, 0.3);
    let a = sinusoidal_potential(1.0, 0.3, false);
    c.bench_function("flux_triangle/sinusoidal", |bn| {
        bn.iter(|| flux_triangle(&b, black_box(&[0.1, -0.3]), &[1.2, 0.4], &[-0.5, 0.9]).unwrap())
    });
    c.bench_function("circulation/sinusoidal", |bn| {
        bn.iter(|| circulation(&a, black_box(&[-0.7, 0.25]), &[1.3, -0.6]).unwrap())
    });
    let hb: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
    c.bench_function("phase_lemma/sinusoidal", |bn| {
        bn.iter(|| phase_lemma_check(&b, &[0.2, -0.1], &[0.5, 0.3], &[-0.4, 0.6], &[0.1, 0.1], &[-0.2, 0.3], &hb).unwrap())
    });
}

fn operators(c: &mut Criterion) {
    let mut g = c.benchmark_group("operators");
    g.sample_size(10);
    let g1 = PhaseGrid::new(BoxGrid::new(1, 5.0, 64).unwrap(), 0.25).unwrap();
    let a0 = VectorPotential::zero(1).unwrap();
    let f1 = presets::harmonic(1);
    g.bench_function("weyl/N1_M64", |bn| bn.iter(|| weyl_op(&a0, &f1, &g1).unwrap()));
    let fam1 = CoherentFamily::new(&a0, &FiducialVector::gaussian(1), &g1).unwrap();
    g.bench_function("berezin/N1_M64", |bn| bn.iter(|| fam1.berezin(&f1).unwrap()));

    let b = MagneticField::constant_planar(1.0);
    let a = VectorPotential::symmetric(&b).unwrap();
    let g2 = PhaseGrid::new(BoxGrid::new(2, 4.0, 16).unwrap(), 0.25).unwrap();
    let f2 = presets::gaussian(2, &[0.5, 0.0, 0.0, 0.5], 1.0);
    g.bench_function("weyl/N2_M16", |bn| bn.iter(|| weyl_op(&a, &f2, &g2).unwrap()));
    let fam2 = CoherentFamily::new(&a, &FiducialVector::gaussian(2), &g2).unwrap();
    g.bench_function("berezin/N2_M16", |bn| bn.iter(|| fam2.berezin(&f2).unwrap()));

    let pos = BoxGrid::new(2, 3.5, 12).unwrap();
    let (kf, kg) = (random_gaussian_kernel(2, 1), random_gaussian_kernel(2, 2));
    g.bench_function("twisted_conv_rep/N2_M12", |bn| {
        bn.iter(|| {
            let p = twisted_conv(&b, 0.25, &kf, &kg, &pos).unwrap();
            rep_operator(&a, 0.25, &p, &pos).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, geometry, operators);
criterion_main!(benches);
