//! Dense linear algebra on complex matrices.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, EigValsh, Norm, SVD, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

pub const DENSE_SVD_LIMIT: usize = 4096;

/// Largest singular value: dense SVD up to `DENSE_SVD_LIMIT`, power iteration
/// on `A^* A` above it (falling back to dense if it does not converge).
pub fn spectral_norm(a: &Array2<C64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    if a.nrows().max(a.ncols()) <= DENSE_SVD_LIMIT {
        return dense_norm(a);
    }
    match power_norm(a, 1e-9, 10_000) {
        Some(v) => Ok(v),
        None => dense_norm(a),
    }
}

pub fn dense_norm(a: &Array2<C64>) -> Result<f64> {
    let (_, s, _) = a.svd(false, false).map_err(|e| Error::Linalg(e.to_string()))?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Power iteration on `A^* A`; `None` if not converged within `max_iter`.
pub fn power_norm(a: &Array2<C64>, tol: f64, max_iter: usize) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Array1<C64> = (0..a.ncols())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nv = v.norm_l2();
    v.mapv_inplace(|x| x / nv);
    let ah = a.t().mapv(|x| x.conj());
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let w = ah.dot(&a.dot(&v));
        let lam = w.norm_l2();
        if lam == 0.0 {
            return Some(0.0);
        }
        v = w.mapv(|x| x / lam);
        if (lam - prev).abs() <= tol * lam {
            return Some(lam.sqrt());
        }
        prev = lam;
    }
    None
}

fn hermitian_part(a: &Array2<C64>) -> Array2<C64> {
    let at = a.t().mapv(|x| x.conj());
    (a + &at).mapv(|x| x * 0.5)
}

/// Eigenvalues (ascending) of the Hermitian part of `a`.
pub fn hermitian_eigvals(a: &Array2<C64>) -> Result<Vec<f64>> {
    let h = hermitian_part(a);
    let v = h.eigvalsh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))?;
    Ok(v.to_vec())
}

/// Eigenpairs (ascending) of the Hermitian part of `a`; eigenvectors are columns.
pub fn hermitian_eigh(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let h = hermitian_part(a);
    let (v, u) = h.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))?;
    Ok((v.to_vec(), u))
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|x| x.conj())
}
