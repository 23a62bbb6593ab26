use magberezin::berezin::{CoherentFamily, FiducialVector};
use magberezin::fields::{circulation, flux_triangle, sinusoidal_field, sinusoidal_potential};
use magberezin::io::{read_magw, sci, write_magw};
use magberezin::presets::{self, random_nonnegative};
use magberezin::strictq::extrapolate_to_zero;
use magberezin::weyl::{operator_norm, weyl_op};
use magberezin::*;
use ndarray::Array2;
use proptest::prelude::*;

fn pt() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stokes_for_sinusoidal_field(x in pt(), y in pt(), z in pt()) {
        let b = sinusoidal_field(1.0, 0.3);
        for a in [sinusoidal_potential(1.0, 0.3, false), sinusoidal_potential(1.0, 0.3, true)] {
            let lhs = circulation(&a, &x, &z).unwrap() + circulation(&a, &z, &y).unwrap() + circulation(&a, &y, &x).unwrap();
            let rhs = flux_triangle(&b, &x, &z, &y).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn flux_is_additive_and_oriented(x in pt(), y in pt(), z in pt(), w in pt()) {
        let b = sinusoidal_field(0.5, 0.8);
        let f = |p: &[f64], q: &[f64], r: &[f64]| flux_triangle(&b, p, q, r).unwrap();
        prop_assert!((f(&x, &y, &z) + f(&x, &z, &y)).abs() < 1e-12);
        prop_assert!((f(&x, &y, &z) - f(&y, &z, &x)).abs() < 1e-12);
        // <x,y,z> = <w,x,y> + <w,y,z> + <w,z,x>
        let split = f(&w, &x, &y) + f(&w, &y, &z) + f(&w, &z, &x);
        prop_assert!((f(&x, &y, &z) - split).abs() < 1e-10);
    }

    #[test]
    fn gauge_shift_of_circulation(x in pt(), y in pt(), c in -1.0f64..1.0) {
        let a = sinusoidal_potential(1.0, 0.3, false);
        let rho = GaugeFunction::quadratic(2, &[c, 0.5, 0.5, -c]).unwrap();
        let a2 = a.gauge_transform(&rho).unwrap();
        let d = circulation(&a2, &x, &y).unwrap() - circulation(&a, &x, &y).unwrap();
        prop_assert!((d - (rho.value(&y) - rho.value(&x))).abs() < 1e-11);
    }

    #[test]
    fn neville_is_exact_on_cubics(c in prop::array::uniform4(-3.0f64..3.0)) {
        let ts = [0.5, 0.25, 0.125, 0.0625];
        let qs: Vec<C64> = ts.iter().map(|t| C64::new(c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t, -c[0])).collect();
        let l = extrapolate_to_zero(&ts, &qs);
        prop_assert!((l - C64::new(c[0], -c[0])).norm() < 1e-11);
    }

    #[test]
    fn sci_round_trips(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(sci(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn magw_round_trips(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>(), hbar in 0.01f64..1.0) {
        let m = Array2::from_shape_fn((rows, cols), |(i, j)| {
            let s = seed.wrapping_mul(31).wrapping_add((i * 7 + j) as u64) as f64;
            C64::new(s.sin(), s.cos())
        });
        let mut buf = Vec::new();
        write_magw(&mut buf, &m, hbar).unwrap();
        let (back, h) = read_magw(&buf[..]).unwrap();
        prop_assert_eq!(h, hbar);
        prop_assert_eq!(back, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn berezin_is_positive_and_selfadjoint(seed in any::<u64>(), b in -1.5f64..1.5) {
        let g = PhaseGrid::new(BoxGrid::new(2, 3.5, 12).unwrap(), 0.25).unwrap();
        let field = MagneticField::constant_planar(b);
        let a = VectorPotential::symmetric(&field).unwrap();
        let op = CoherentFamily::new(&a, &FiducialVector::gaussian(2), &g).unwrap().berezin(&random_nonnegative(2, seed)).unwrap().value;
        prop_assert!(op.hermitian_defect() < 1e-12);
        let ev = op.eigenvalues().unwrap();
        let top = ev.last().unwrap().abs();
        prop_assert!(ev[0] >= -1e-10 * top, "{} vs {}", ev[0], top);
    }

    #[test]
    fn quantizations_respect_conjugation(seed in any::<u64>()) {
        let g = PhaseGrid::new(BoxGrid::new(1, 4.0, 32).unwrap(), 0.25).unwrap();
        let a = VectorPotential::zero(1).unwrap();
        let f = presets::random_bandlimited(1, seed);
        let ff = f.conj();
        let fam = CoherentFamily::new(&a, &FiducialVector::gaussian(1), &g).unwrap();
        let d = operator_norm(&fam.berezin(&ff).unwrap().value.sub(&fam.berezin(&f).unwrap().value.adjoint())).unwrap();
        prop_assert!(d < 1e-12);
        let w = operator_norm(&weyl_op(&a, &ff, &g).unwrap().sub(&weyl_op(&a, &f, &g).unwrap().adjoint())).unwrap();
        prop_assert!(w < 1e-12);
    }

    #[test]
    fn weyl_is_linear(seed in any::<u64>(), c in -2.0f64..2.0) {
        let g = PhaseGrid::new(BoxGrid::new(2, 3.0, 8).unwrap(), 0.5).unwrap();
        let field = MagneticField::constant_planar(0.7);
        let a = VectorPotential::symmetric(&field).unwrap();
        let f = presets::random_bandlimited(2, seed);
        let h = presets::gaussian(2, &[0.1, 0.2, -0.3, 0.0], 0.8);
        let lhs = weyl_op(&a, &f.scale(c).add(&h), &g).unwrap();
        let rhs = weyl_op(&a, &f, &g).unwrap().scale(C64::new(c, 0.0)).add(&weyl_op(&a, &h, &g).unwrap());
        prop_assert!(operator_norm(&lhs.sub(&rhs)).unwrap() < 1e-11);
    }
}
