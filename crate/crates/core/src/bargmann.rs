//! Bargmann transform onto a reproducing-kernel subspace of phase-grid
//! functions, Toeplitz operators and covariant symbols.
//!
//! Phase functions are represented in the weighted inner product
//! `sum_Y w_Y conj(a) b` with `w_Y = M^{-N}` the cell weight. Dense matrices
//! on the phase grid act on unitary coordinates `sqrt(w_Y) Phi(Y)`.

use ndarray::{Array1, Array2, Axis};

use crate::berezin::{CoherentFamily, CoherentFrame, FiducialVector};
use crate::error::{check_dim, Error, Result};
use crate::fields::VectorPotential;
use crate::linalg::adjoint;
use crate::phasespace::{PhaseGrid, Symbol};
use crate::weyl::OperatorMatrix;
use crate::C64;

pub const DEFAULT_PHASE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct BargmannSpace {
    grid: PhaseGrid,
    family: CoherentFamily,
    /// Coherent vectors as columns, `M^N x |phase grid|`.
    frame: Array2<C64>,
    /// Unitary-coordinate isometry `diag(sqrt w) V^* sqrt(h^N)`.
    u: Array2<C64>,
}

impl BargmannSpace {
    pub fn new(a: &VectorPotential, v: &FiducialVector, grid: &PhaseGrid) -> Result<Self> {
        Self::with_limit(a, v, grid, DEFAULT_PHASE_LIMIT)
    }

    pub fn with_limit(a: &VectorPotential, v: &FiducialVector, grid: &PhaseGrid, limit: usize) -> Result<Self> {
        if grid.len() > limit {
            return Err(Error::GridTooLarge {
                what: "dense Bargmann space",
                size: grid.len(),
                limit,
            });
        }
        let family = CoherentFamily::new(a, v, grid)?;
        let frame = CoherentFrame::new(&family)?.matrix().clone();
        let s = (grid.cell_weight() * grid.position().weight()).sqrt();
        let u = adjoint(&frame).mapv(|z| z * s);
        Ok(Self {
            grid: grid.clone(),
            family,
            frame,
            u,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn family(&self) -> &CoherentFamily {
        &self.family
    }

    /// Isometry matrix in unitary coordinates.
    pub fn isometry(&self) -> &Array2<C64> {
        &self.u
    }

    /// `P = U U^*`.
    pub fn projection(&self) -> Array2<C64> {
        self.u.dot(&adjoint(&self.u))
    }

    /// `K(Y, Z) = <v(Y), v(Z)>`.
    pub fn kernel(&self) -> Array2<C64> {
        let w = self.grid.position().weight();
        adjoint(&self.frame).dot(&self.frame).mapv(|z| z * w)
    }

    /// `Phi(Y) = <v(Y), u>`.
    pub fn transform(&self, u: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.grid.position().len(), u.len())?;
        let w = self.grid.position().weight();
        let uv = Array1::from(u.to_vec());
        Ok(adjoint(&self.frame).dot(&uv).iter().map(|z| z * w).collect())
    }

    /// `sum_Y w_Y Phi(Y) v(Y)`.
    pub fn adjoint(&self, phi: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.grid.len(), phi.len())?;
        let w = self.grid.cell_weight();
        let pv = Array1::from(phi.iter().map(|z| z * w).collect::<Vec<_>>());
        Ok(self.frame.dot(&pv).to_vec())
    }

    /// `sqrt(sum_Y w_Y |Phi(Y)|^2)`.
    pub fn phase_norm(&self, phi: &[C64]) -> f64 {
        (phi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_weight()).sqrt()
    }

    pub fn phase_inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * self.grid.cell_weight()
    }

    /// `P diag(f) P` in unitary coordinates.
    pub fn toeplitz(&self, f: &Symbol) -> Result<Array2<C64>> {
        check_dim(self.grid.dim(), f.dim())?;
        let p = self.projection();
        let s = f.sample(&self.grid);
        let mut pf = p.clone();
        for (mut col, fv) in pf.axis_iter_mut(Axis(1)).zip(&s) {
            col.mapv_inplace(|z| z * fv);
        }
        Ok(pf.dot(&p))
    }

    /// `U T U^*` for an operator on the position grid.
    pub fn conjugate(&self, t: &OperatorMatrix) -> Array2<C64> {
        self.u.dot(&t.action()).dot(&adjoint(&self.u))
    }

    /// `Y -> <v(Y), T v(Y)>`.
    pub fn covariant_symbol(&self, t: &OperatorMatrix) -> Result<Vec<f64>> {
        Ok(self.covariant_symbol_complex(t)?.iter().map(|z| z.re).collect())
    }

    pub fn covariant_symbol_complex(&self, t: &OperatorMatrix) -> Result<Vec<C64>> {
        check_dim(self.grid.position().len(), t.grid().len())?;
        let w = self.grid.position().weight();
        let tv = t.action().dot(&self.frame);
        Ok(self
            .frame
            .axis_iter(Axis(1))
            .zip(tv.axis_iter(Axis(1)))
            .map(|(v, tv)| v.iter().zip(tv.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * w)
            .collect())
    }

    /// `Y -> <k_Y, S k_Y>` for `S` acting on unitary phase coordinates,
    /// `k_Y` the normalized image of `v(Y)`.
    pub fn covariant_symbol_phase(&self, s: &Array2<C64>) -> Result<Vec<C64>> {
        let n = self.grid.len();
        if s.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.nrows(),
            });
        }
        let sq = self.grid.position().weight().sqrt();
        let k = self.u.dot(&self.frame.mapv(|z| z * sq));
        let sk = s.dot(&k);
        Ok(k.axis_iter(Axis(1))
            .zip(sk.axis_iter(Axis(1)))
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
            .collect())
    }

    /// `(Bf)(X) = sum_Y w_Y f(Y) |K(X, Y)|^2`.
    pub fn berezin_transform(&self, f: &Symbol) -> Result<Vec<f64>> {
        check_dim(self.grid.dim(), f.dim())?;
        let k = self.kernel();
        let s = f.sample(&self.grid);
        let w = self.grid.cell_weight();
        Ok(k.axis_iter(Axis(0))
            .map(|row| row.iter().zip(&s).map(|(kv, fv)| fv.re * kv.norm_sqr()).sum::<f64>() * w)
            .collect())
    }
}

pub fn bargmann_transform(space: &BargmannSpace, u: &[C64]) -> Result<Vec<C64>> {
    space.transform(u)
}

pub fn bargmann_adjoint(space: &BargmannSpace, phi: &[C64]) -> Result<Vec<C64>> {
    space.adjoint(phi)
}

pub fn toeplitz_op(space: &BargmannSpace, f: &Symbol) -> Result<Array2<C64>> {
    space.toeplitz(f)
}

pub fn covariant_symbol(space: &BargmannSpace, t: &OperatorMatrix) -> Result<Vec<f64>> {
    space.covariant_symbol(t)
}

pub fn berezin_transform(space: &BargmannSpace, f: &Symbol) -> Result<Vec<f64>> {
    space.berezin_transform(f)
}

/// Defects of the structural identities, all in unitary coordinates.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct BargmannReport {
    pub isometry: f64,
    pub idempotent: f64,
    pub selfadjoint: f64,
    pub reproducing: f64,
    pub toeplitz: f64,
}

impl BargmannReport {
    pub fn max(&self) -> f64 {
        [self.isometry, self.idempotent, self.selfadjoint, self.reproducing, self.toeplitz]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks `U^*U = Id`, `P^2 = P = P^*`, reproducing property on `P phi` for a
/// probe phase function, and `T(f) = U B(f) U^*`.
pub fn bargmann_check(space: &BargmannSpace, f: &Symbol, probe: &[C64]) -> Result<BargmannReport> {
    let u = space.isometry();
    let n = u.ncols();
    let uu = adjoint(u).dot(u) - Array2::<C64>::eye(n);
    let p = space.projection();
    let pp = p.dot(&p) - &p;
    let ps = &p - &adjoint(&p);
    // reproducing property on Phi = U U^* probe
    let phi = space.transform(&space.adjoint(probe)?)?;
    let k = space.kernel();
    let w = space.grid().cell_weight();
    let re = k.dot(&Array1::from(phi.clone())).mapv(|z| z * w);
    let reproducing = re.iter().zip(&phi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        / phi.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let t = space.toeplitz(f)?;
    let b = space.family().berezin(f)?.value;
    let tb = space.conjugate(&b);
    let scale = crate::linalg::spectral_norm(&b.action())?.max(1e-300);
    Ok(BargmannReport {
        isometry: max_abs(&uu),
        idempotent: max_abs(&pp),
        selfadjoint: max_abs(&ps),
        reproducing,
        toeplitz: max_abs(&(t - tb)) / scale,
    })
}
