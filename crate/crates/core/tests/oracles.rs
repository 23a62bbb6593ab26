//! Values frozen from independent computations (30-digit adaptive
//! quadrature) and closed forms.

use magberezin::berezin::{coherent_vector, CoherentFamily, FiducialVector};
use magberezin::fields::{circulation, flux_pentagon, flux_triangle, poincare_potential, sinusoidal_field, sinusoidal_potential};
use magberezin::io::{write_magw, MAGW_HEADER_LEN};
use magberezin::presets;
use magberezin::strictq::phase_lemma_check;
use magberezin::weyl::{operator_norm, weyl_op};
use magberezin::*;
use ndarray::Array2;

fn grid(dim: usize, l: f64, m: usize, hbar: f64) -> PhaseGrid {
    PhaseGrid::new(BoxGrid::new(dim, l, m).unwrap(), hbar).unwrap()
}

#[test]
fn sinusoidal_triangle_flux() {
    let b = sinusoidal_field(1.0, 0.3);
    let f = flux_triangle(&b, &[0.1, -0.3], &[1.2, 0.4], &[-0.5, 0.9]).unwrap();
    assert!((f - 0.934_138_749_085_555_6).abs() < 1e-13, "{f}");
}

#[test]
fn sinusoidal_pentagon_flux() {
    let b = sinusoidal_field(1.0, 0.3);
    let v: [&[f64]; 5] = [&[0.0, 0.0], &[1.0, 0.1], &[1.3, 0.9], &[0.4, 1.4], &[-0.4, 0.7]];
    let f = flux_pentagon(&b, v).unwrap();
    assert!((f - 1.725_285_395_540_985_2).abs() < 1e-13, "{f}");
}

#[test]
fn sinusoidal_symmetric_circulation() {
    let a = sinusoidal_potential(1.0, 0.3, false);
    let c = circulation(&a, &[-0.7, 0.25], &[1.3, -0.6]).unwrap();
    assert!((c - 0.252_491_423_763_497_7).abs() < 1e-13, "{c}");
}

#[test]
fn poincare_potential_of_sinusoidal_field() {
    let a = poincare_potential(&sinusoidal_field(1.0, 0.3));
    let x = [0.8, -1.1];
    assert!((a.component(0, &x) - 0.632_495_216_764_360_7).abs() < 1e-13);
    assert!((a.component(1, &x) - 0.459_996_521_283_171_4).abs() < 1e-13);
}

#[test]
fn constant_field_phase_lemma_target() {
    let b = MagneticField::constant_planar(1.7);
    let (x, y, z) = ([0.2, -0.1], [0.5, 0.3], [-0.4, 0.6]);
    let hb: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
    let r = phase_lemma_check(&b, &x, &y, &z, &[0.1, 0.1], &[-0.2, 0.3], &hb).unwrap();
    // -sum_jk z_j (y_k - z_k) B_jk with B_12 = -B_21 = 1.7
    let want = -(z[0] * (y[1] - z[1]) * 1.7 - z[1] * (y[0] - z[0]) * 1.7);
    assert!((r.target - want).abs() < 1e-14);
    assert!(r.pass, "{r:?}");
}

#[test]
fn oscillator_weyl_levels() {
    let h = 0.25;
    let g = grid(1, 5.0, 64, h);
    let ev = weyl_op(&VectorPotential::zero(1).unwrap(), &presets::harmonic(1), &g)
        .unwrap()
        .eigenvalues()
        .unwrap();
    for n in 0..8 {
        let want = h * (2 * n + 1) as f64;
        assert!((ev[n] - want).abs() < 1e-3 * want, "{n}: {}", ev[n]);
    }
}

/// Anti-Wick smoothing of a unit-width Gaussian: the Berezin operator equals
/// the Weyl operator of the Gaussian convolved with variance hbar/2, i.e.
/// amplitude 1/(1 + hbar/2) and squared width 1 + hbar/2.
#[test]
fn berezin_of_gaussian_is_weyl_of_smoothed_gaussian() {
    let h = 0.25;
    let g = grid(1, 8.0, 192, h);
    let a = VectorPotential::zero(1).unwrap();
    let f = presets::gaussian(1, &[0.4, -0.3], 1.0);
    let s2 = 1.0 + h / 2.0;
    let smooth = presets::gaussian(1, &[0.4, -0.3], s2.sqrt()).scale(1.0 / s2);
    let b = CoherentFamily::new(&a, &FiducialVector::gaussian(1), &g).unwrap().berezin(&f).unwrap().value;
    let w = weyl_op(&a, &smooth, &g).unwrap();
    let d = operator_norm(&b.sub(&w)).unwrap();
    assert!(d < 1e-8, "{d}");
}

/// tr B(f) = (2 pi hbar)^{-N} integral of f; for a unit Gaussian in N = 1
/// that is 1/hbar.
#[test]
fn berezin_trace_of_gaussian() {
    let h = 0.25;
    let g = grid(1, 8.0, 192, h);
    let f = presets::gaussian(1, &[0.0, 0.0], 1.0);
    let b = CoherentFamily::new(&VectorPotential::zero(1).unwrap(), &FiducialVector::gaussian(1), &g)
        .unwrap()
        .berezin(&f)
        .unwrap()
        .value;
    let t = b.trace();
    assert!((t.re - 1.0 / h).abs() < 1e-8 && t.im.abs() < 1e-12, "{t}");
}

/// |<v(Y), v(Z0)>|^2 = exp(-|Y - Z0|^2 / (2 hbar)) for the Gaussian fiducial.
#[test]
fn husimi_of_coherent_state() {
    let h = 0.25;
    let g = grid(1, 5.0, 96, h);
    let a = VectorPotential::zero(1).unwrap();
    let v = FiducialVector::gaussian(1);
    let z0 = [0.5, -0.75];
    let u = coherent_vector(&a, &v, h, &z0[..1], &z0[1..], g.position()).unwrap().value;
    let hus = CoherentFamily::new(&a, &v, &g).unwrap().husimi(&u).unwrap().value;
    let c = 1.0 / (2.0 * std::f64::consts::PI * h);
    let (mut x, mut xi) = ([0.0], [0.0]);
    let mut worst: f64 = 0.0;
    for (i, hv) in hus.iter().enumerate() {
        g.point(i, &mut x, &mut xi);
        let r2 = (x[0] - z0[0]).powi(2) + (xi[0] - z0[1]).powi(2);
        worst = worst.max((hv - c * (-r2 / (2.0 * h)).exp()).abs());
    }
    assert!(worst < 1e-9 * c, "{worst}");
}

#[test]
fn magw_header_bytes() {
    let m = Array2::from_shape_fn((2, 3), |(i, j)| C64::new(i as f64, j as f64));
    let mut buf = Vec::new();
    write_magw(&mut buf, &m, 0.125).unwrap();
    let mut head = Vec::new();
    head.extend_from_slice(b"MAGW");
    head.extend_from_slice(&1u32.to_le_bytes());
    head.extend_from_slice(&2u64.to_le_bytes());
    head.extend_from_slice(&3u64.to_le_bytes());
    head.extend_from_slice(&0.125f64.to_le_bytes());
    assert_eq!(&buf[..MAGW_HEADER_LEN], &head[..]);
    assert_eq!(buf.len(), MAGW_HEADER_LEN + 6 * 16);
    // entry (1, 2) = 1 + 2i, row-major
    let off = MAGW_HEADER_LEN + (3 + 2) * 16;
    assert_eq!(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()), 1.0);
    assert_eq!(f64::from_le_bytes(buf[off + 8..off + 16].try_into().unwrap()), 2.0);
}

/// Landau levels hbar |B| (2n + 1) from the magnetic Weyl operator of |xi|^2.
#[test]
fn landau_levels_in_interior() {
    let (hb, l) = (1.0, 8.0);
    let g = grid(2, l, 32, hb);
    let b = MagneticField::constant_planar(1.0);
    let a = VectorPotential::symmetric(&b).unwrap();
    let op = weyl_op(&a, &presets::kinetic(2), &g).unwrap();
    let (vals, vecs) = magberezin::linalg::hermitian_eigh(&op.action()).unwrap();
    let pos = g.position();
    let inner: Vec<bool> = (0..pos.len()).map(|i| pos.node_vec(i).iter().all(|c| c.abs() <= 0.6 * l)).collect();
    let interior: Vec<f64> = vals
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            vecs.column(*k).iter().zip(&inner).filter(|(_, &m)| m).map(|(c, _)| c.norm_sqr()).sum::<f64>() >= 0.99
        })
        .map(|(_, &e)| e)
        .take_while(|&e| e < 6.0)
        .collect();
    for level in [1.0, 3.0, 5.0] {
        assert!(interior.iter().any(|e| (e - level).abs() < 1e-3 * level), "{level}: {interior:?}");
    }
    for e in &interior {
        assert!([1.0, 3.0, 5.0].iter().any(|l| (e - l).abs() < 1e-2), "stray {e}");
    }
}
