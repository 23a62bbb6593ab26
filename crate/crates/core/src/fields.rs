//! Magnetic fields, vector potentials, fluxes and circulations.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::quadrature::{default_segment, default_simplex, SegmentRule, SimplexRule};
use crate::MAX_DIM;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
enum FieldShape {
    Zero,
    /// Row-major N x N antisymmetric matrix.
    Constant(Vec<f64>),
    General,
}

/// Antisymmetric 2-form B_jk(x) on R^N.
#[derive(Clone)]
pub struct MagneticField {
    dim: usize,
    comps: Vec<Option<ScalarFn>>,
    shape: FieldShape,
    label: String,
}

impl std::fmt::Debug for MagneticField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MagneticField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

pub(crate) fn check_supported_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

/// Deterministic probe points in [-3, 3]^N used for structural checks.
pub fn probe_points(dim: usize) -> Vec<Vec<f64>> {
    let per_axis: &[f64] = &[-2.7, -1.3, -0.4, 0.0, 0.55, 1.9, 2.85];
    let mut out = Vec::new();
    let count = per_axis.len().pow(dim as u32);
    for idx in 0..count {
        let mut p = Vec::with_capacity(dim);
        let mut r = idx;
        for axis in 0..dim {
            p.push(per_axis[r % per_axis.len()] + 0.013 * axis as f64);
            r /= per_axis.len();
        }
        out.push(p);
    }
    out
}

impl MagneticField {
    pub fn zero(dim: usize) -> Result<Self> {
        check_supported_dim(dim)?;
        Ok(Self {
            dim,
            comps: vec![None; dim * dim],
            shape: FieldShape::Zero,
            label: "zero".into(),
        })
    }

    /// Constant field from a row-major N x N matrix.
    pub fn constant(dim: usize, matrix: &[f64]) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim * dim, matrix.len())?;
        let mut defect: f64 = 0.0;
        for j in 0..dim {
            for k in 0..dim {
                defect = defect.max((matrix[j * dim + k] + matrix[k * dim + j]).abs());
            }
        }
        if defect > 1e-12 {
            return Err(Error::NotAntisymmetric { defect });
        }
        if matrix.iter().all(|&b| b == 0.0) {
            return Self::zero(dim);
        }
        let comps = matrix
            .iter()
            .map(|&b| {
                if b == 0.0 {
                    None
                } else {
                    Some(Arc::new(move |_: &[f64]| b) as ScalarFn)
                }
            })
            .collect();
        Ok(Self {
            dim,
            comps,
            shape: FieldShape::Constant(matrix.to_vec()),
            label: "constant".into(),
        })
    }

    /// Planar field with B_12 = b, B_21 = -b.
    pub fn constant_planar(b: f64) -> Self {
        Self::constant(2, &[0.0, b, -b, 0.0]).expect("antisymmetric by construction")
    }

    /// Planar field given by its single component B_12(x).
    pub fn planar(b12: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let b12: ScalarFn = Arc::new(b12);
        let b21 = b12.clone();
        let b21: ScalarFn = Arc::new(move |x: &[f64]| -b21(x));
        Self {
            dim: 2,
            comps: vec![None, Some(b12), Some(b21), None],
            shape: FieldShape::General,
            label: "planar".into(),
        }
    }

    /// General field from N*N row-major component functions; antisymmetry is
    /// checked at probe points.
    pub fn from_components(dim: usize, comps: Vec<ScalarFn>) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim * dim, comps.len())?;
        let mut defect: f64 = 0.0;
        for p in probe_points(dim) {
            for j in 0..dim {
                for k in j..dim {
                    defect = defect.max((comps[j * dim + k](&p) + comps[k * dim + j](&p)).abs());
                }
            }
        }
        if defect > 1e-12 {
            return Err(Error::NotAntisymmetric { defect });
        }
        Ok(Self {
            dim,
            comps: comps.into_iter().map(Some).collect(),
            shape: FieldShape::General,
            label: "general".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.shape == FieldShape::Zero
    }

    /// The constant matrix, if the field is known to be constant.
    pub fn constant_matrix(&self) -> Option<Vec<f64>> {
        match &self.shape {
            FieldShape::Zero => Some(vec![0.0; self.dim * self.dim]),
            FieldShape::Constant(m) => Some(m.clone()),
            FieldShape::General => None,
        }
    }

    #[inline]
    pub fn component(&self, j: usize, k: usize, x: &[f64]) -> f64 {
        match &self.comps[j * self.dim + k] {
            Some(f) => f(x),
            None => 0.0,
        }
    }

    /// Sum_jk B_jk(x) u_j v_k.
    #[inline]
    pub fn pair(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for j in 0..n {
            for k in (j + 1)..n {
                if let Some(f) = &self.comps[j * n + k] {
                    s += f(x) * (u[j] * v[k] - u[k] * v[j]);
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
enum PotentialShape {
    Zero,
    /// A_j(x) = sum_k M_jk x_k, row-major.
    Linear(Vec<f64>),
    General,
}

/// Vector potential A with dA = B.
#[derive(Clone)]
pub struct VectorPotential {
    dim: usize,
    comps: Vec<ScalarFn>,
    shape: PotentialShape,
    label: String,
}

impl std::fmt::Debug for VectorPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorPotential")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl VectorPotential {
    pub fn zero(dim: usize) -> Result<Self> {
        check_supported_dim(dim)?;
        Ok(Self {
            dim,
            comps: (0..dim).map(|_| Arc::new(|_: &[f64]| 0.0) as ScalarFn).collect(),
            shape: PotentialShape::Zero,
            label: "zero".into(),
        })
    }

    /// Linear potential A_j(x) = sum_k M_jk x_k.
    pub fn linear(dim: usize, matrix: &[f64]) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim * dim, matrix.len())?;
        let comps = (0..dim)
            .map(|j| {
                let row: Vec<f64> = matrix[j * dim..(j + 1) * dim].to_vec();
                Arc::new(move |x: &[f64]| row.iter().zip(x).map(|(m, x)| m * x).sum::<f64>())
                    as ScalarFn
            })
            .collect();
        Ok(Self {
            dim,
            comps,
            shape: PotentialShape::Linear(matrix.to_vec()),
            label: "linear".into(),
        })
    }

    pub fn from_components(dim: usize, comps: Vec<ScalarFn>) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim, comps.len())?;
        Ok(Self {
            dim,
            comps,
            shape: PotentialShape::General,
            label: "general".into(),
        })
    }

    /// Symmetric gauge A_j = -(1/2) sum_k B_jk x_k for a constant field.
    pub fn symmetric(b: &MagneticField) -> Result<Self> {
        let m = b
            .constant_matrix()
            .ok_or_else(|| Error::InvalidGrid("symmetric gauge needs a constant field".into()))?;
        let m: Vec<f64> = m.iter().map(|v| -0.5 * v).collect();
        Ok(Self::linear(b.dim(), &m)?.with_label("symmetric"))
    }

    /// Landau gauge A = (0, b x_1) for a constant planar field B_12 = b.
    pub fn landau(b: f64) -> Self {
        Self::linear(2, &[0.0, 0.0, b, 0.0])
            .expect("dimension 2 supported")
            .with_label("landau")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.shape == PotentialShape::Zero
    }

    #[inline]
    pub fn component(&self, j: usize, x: &[f64]) -> f64 {
        self.comps[j](x)
    }

    /// A + grad(rho).
    pub fn gauge_transform(&self, rho: &GaugeFunction) -> Result<Self> {
        check_dim(self.dim, rho.dim)?;
        let comps = (0..self.dim)
            .map(|j| {
                let a = self.comps[j].clone();
                let g = rho.grad[j].clone();
                Arc::new(move |x: &[f64]| a(x) + g(x)) as ScalarFn
            })
            .collect();
        let shape = match (&self.shape, &rho.hessian) {
            (PotentialShape::Zero, Some(h)) => PotentialShape::Linear(h.clone()),
            (PotentialShape::Linear(m), Some(h)) => {
                PotentialShape::Linear(m.iter().zip(h).map(|(a, b)| a + b).collect())
            }
            _ => PotentialShape::General,
        };
        Ok(Self {
            dim: self.dim,
            comps,
            shape,
            label: format!("{}+gauge", self.label),
        })
    }

    /// Circulation of A along the straight segment from x to y (no checks).
    #[inline]
    pub fn circulation_unchecked(&self, x: &[f64], y: &[f64], rule: &SegmentRule) -> f64 {
        let n = self.dim;
        match &self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::Linear(m) => {
                let mut s = 0.0;
                for j in 0..n {
                    let d = y[j] - x[j];
                    for k in 0..n {
                        s += m[j * n + k] * 0.5 * (x[k] + y[k]) * d;
                    }
                }
                s
            }
            PotentialShape::General => {
                let mut p = [0.0; MAX_DIM];
                let mut s = 0.0;
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    for j in 0..n {
                        p[j] = x[j] + t * (y[j] - x[j]);
                    }
                    let mut dot = 0.0;
                    for j in 0..n {
                        dot += self.comps[j](&p[..n]) * (y[j] - x[j]);
                    }
                    s += w * dot;
                }
                s
            }
        }
    }
}

/// Scalar gauge function rho together with its gradient.
#[derive(Clone)]
pub struct GaugeFunction {
    dim: usize,
    pub rho: ScalarFn,
    pub grad: Vec<ScalarFn>,
    /// Constant Hessian, when rho is quadratic.
    hessian: Option<Vec<f64>>,
}

impl GaugeFunction {
    /// Builds a gauge function; the supplied gradient is checked against
    /// central differences of rho at probe points.
    pub fn new(dim: usize, rho: ScalarFn, grad: Vec<ScalarFn>) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim, grad.len())?;
        let h = 1e-5;
        let mut defect: f64 = 0.0;
        for p in probe_points(dim) {
            for j in 0..dim {
                let mut a = p.clone();
                let mut b = p.clone();
                a[j] += h;
                b[j] -= h;
                let fd = (rho(&a) - rho(&b)) / (2.0 * h);
                let g = grad[j](&p);
                defect = defect.max((fd - g).abs() / (1.0 + g.abs()));
            }
        }
        if defect > 1e-6 {
            return Err(Error::GaugeMismatch(defect));
        }
        Ok(Self {
            dim,
            rho,
            grad,
            hessian: None,
        })
    }

    /// rho(x) = (1/2) x^T H x for a symmetric matrix H.
    pub fn quadratic(dim: usize, hessian: &[f64]) -> Result<Self> {
        check_supported_dim(dim)?;
        check_dim(dim * dim, hessian.len())?;
        let h = hessian.to_vec();
        let hr = h.clone();
        let rho: ScalarFn = Arc::new(move |x: &[f64]| {
            let n = x.len();
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += 0.5 * x[j] * hr[j * n + k] * x[k];
                }
            }
            s
        });
        let grad = (0..dim)
            .map(|j| {
                let row: Vec<f64> = (0..dim).map(|k| 0.5 * (h[j * dim + k] + h[k * dim + j])).collect();
                Arc::new(move |x: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                    as ScalarFn
            })
            .collect();
        let sym: Vec<f64> = (0..dim * dim)
            .map(|i| 0.5 * (h[i] + h[(i % dim) * dim + i / dim]))
            .collect();
        let mut g = Self::new(dim, rho, grad)?;
        g.hessian = Some(sym);
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.rho)(x)
    }
}

/// Circulation of A along the segment [x, y].
pub fn circulation(a: &VectorPotential, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(a.dim(), x.len())?;
    check_dim(a.dim(), y.len())?;
    Ok(a.circulation_unchecked(x, y, default_segment()))
}

/// Flux of B through the oriented triangle <a, b, c> (no checks).
#[inline]
pub fn flux_triangle_unchecked(
    b: &MagneticField,
    p0: &[f64],
    p1: &[f64],
    p2: &[f64],
    rule: &SimplexRule,
) -> f64 {
    let n = b.dim;
    let mut u = [0.0; MAX_DIM];
    let mut v = [0.0; MAX_DIM];
    for j in 0..n {
        u[j] = p1[j] - p0[j];
        v[j] = p2[j] - p1[j];
    }
    match &b.shape {
        FieldShape::Zero => 0.0,
        FieldShape::Constant(m) => {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += m[j * n + k] * u[j] * v[k];
                }
            }
            0.5 * s
        }
        FieldShape::General => {
            let mut p = [0.0; MAX_DIM];
            let mut s = 0.0;
            for (&(mu, nu), &w) in rule.nodes.iter().zip(&rule.weights) {
                for j in 0..n {
                    p[j] = p0[j] + mu * u[j] + mu * nu * v[j];
                }
                s += w * b.pair(&p[..n], &u[..n], &v[..n]);
            }
            s
        }
    }
}

/// Flux through a triangle with the default 16-point tensor rule.
pub fn flux_triangle(b: &MagneticField, a: &[f64], p1: &[f64], p2: &[f64]) -> Result<f64> {
    for p in [a, p1, p2] {
        check_dim(b.dim(), p.len())?;
    }
    Ok(flux_triangle_unchecked(b, a, p1, p2, default_simplex()))
}

/// Flux with order doubling from 16 until successive orders agree to `tol`.
/// Returns the value and whether the tolerance was met before order 256.
pub fn flux_triangle_adaptive(
    b: &MagneticField,
    a: &[f64],
    p1: &[f64],
    p2: &[f64],
    tol: f64,
) -> Result<(f64, bool)> {
    for p in [a, p1, p2] {
        check_dim(b.dim(), p.len())?;
    }
    let mut order = 16;
    let mut prev = flux_triangle_unchecked(b, a, p1, p2, &SimplexRule::gauss(order));
    while order < 256 {
        order *= 2;
        let next = flux_triangle_unchecked(b, a, p1, p2, &SimplexRule::gauss(order));
        if (next - prev).abs() <= tol {
            return Ok((next, true));
        }
        prev = next;
    }
    Ok((prev, false))
}

/// Flux through a closed polygon, fan-triangulated from the first vertex.
pub fn flux_polygon(b: &MagneticField, vertices: &[&[f64]]) -> Result<f64> {
    for p in vertices {
        check_dim(b.dim(), p.len())?;
    }
    Ok(flux_polygon_unchecked(b, vertices, default_simplex()))
}

pub(crate) fn flux_polygon_unchecked(b: &MagneticField, vertices: &[&[f64]], rule: &SimplexRule) -> f64 {
    let mut s = 0.0;
    for i in 1..vertices.len().saturating_sub(1) {
        s += flux_triangle_unchecked(b, vertices[0], vertices[i], vertices[i + 1], rule);
    }
    s
}

/// Pentagon flux, as used by the phase lemma.
pub fn flux_pentagon(b: &MagneticField, v: [&[f64]; 5]) -> Result<f64> {
    flux_polygon(b, &v)
}

/// Radial-homotopy potential A_j(x) = -sum_k x_k int_0^1 s B_jk(s x) ds.
pub fn poincare_potential(b: &MagneticField) -> VectorPotential {
    let dim = b.dim();
    match &b.shape {
        FieldShape::Zero => VectorPotential::zero(dim).expect("dimension already validated"),
        FieldShape::Constant(m) => {
            let lin: Vec<f64> = m.iter().map(|v| -0.5 * v).collect();
            VectorPotential::linear(dim, &lin)
                .expect("dimension already validated")
                .with_label("poincare")
        }
        FieldShape::General => {
            let rule = Arc::new(default_segment().clone());
            let comps = (0..dim)
                .map(|j| {
                    let b = b.clone();
                    let rule = rule.clone();
                    Arc::new(move |x: &[f64]| {
                        let n = x.len();
                        let mut p = [0.0; MAX_DIM];
                        let mut s = 0.0;
                        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                            for i in 0..n {
                                p[i] = t * x[i];
                            }
                            let mut inner = 0.0;
                            for k in 0..n {
                                inner += x[k] * b.component(j, k, &p[..n]);
                            }
                            s += w * t * inner;
                        }
                        -s
                    }) as ScalarFn
                })
                .collect();
            VectorPotential {
                dim,
                comps,
                shape: PotentialShape::General,
                label: "poincare".into(),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PotentialReport {
    pub max_defect: f64,
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

/// Checks dA = B at the probe points by central differences with step 1e-5.
pub fn verify_potential(
    a: &VectorPotential,
    b: &MagneticField,
    probes: &[Vec<f64>],
    tol: f64,
) -> Result<PotentialReport> {
    check_dim(b.dim(), a.dim())?;
    let n = a.dim();
    let h = 1e-5;
    let mut worst = (0.0f64, Vec::new());
    for p in probes {
        check_dim(n, p.len())?;
        for j in 0..n {
            for k in (j + 1)..n {
                let d = |comp: usize, axis: usize| {
                    let mut xp = p.clone();
                    let mut xm = p.clone();
                    xp[axis] += h;
                    xm[axis] -= h;
                    (a.component(comp, &xp) - a.component(comp, &xm)) / (2.0 * h)
                };
                let defect = (d(k, j) - d(j, k) - b.component(j, k, p)).abs();
                if defect > worst.0 || worst.1.is_empty() {
                    worst = (defect.max(worst.0), p.clone());
                }
            }
        }
    }
    if worst.1.is_empty() {
        worst.1 = probes.first().cloned().unwrap_or_default();
    }
    Ok(PotentialReport {
        max_defect: worst.0,
        worst_point: worst.1,
        pass: worst.0 <= tol,
    })
}

/// Sinusoidal planar field B_12 = b0 + eps sin(x_1).
pub fn sinusoidal_field(b0: f64, eps: f64) -> MagneticField {
    MagneticField::planar(move |x| b0 + eps * x[0].sin()).with_label("sinusoidal")
}

/// Closed-form potentials for the sinusoidal field.
pub fn sinusoidal_potential(b0: f64, eps: f64, landau: bool) -> VectorPotential {
    let comps: Vec<ScalarFn> = if landau {
        vec![
            Arc::new(|_: &[f64]| 0.0),
            Arc::new(move |x: &[f64]| b0 * x[0] - eps * x[0].cos()),
        ]
    } else {
        vec![
            Arc::new(move |x: &[f64]| -0.5 * b0 * x[1]),
            Arc::new(move |x: &[f64]| 0.5 * b0 * x[0] - eps * x[0].cos()),
        ]
    };
    VectorPotential::from_components(2, comps)
        .expect("dimension 2 supported")
        .with_label(if landau { "landau" } else { "symmetric" })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_b() -> MagneticField {
        MagneticField::constant_planar(1.0)
    }

    #[test]
    fn unit_triangle_flux() {
        let b = unit_b();
        let f = flux_triangle(&b, &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((f - 0.5).abs() < 1e-14);
        let g = MagneticField::planar(|_| 1.0);
        let f = flux_triangle(&g, &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((f - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_field_and_degenerate_triangle() {
        let z = MagneticField::zero(2).unwrap();
        assert_eq!(flux_triangle(&z, &[0.3, 1.0], &[2.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let s = sinusoidal_field(1.0, 0.5);
        let f = flux_triangle(&s, &[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(f.abs() < 1e-14);
    }

    #[test]
    fn symmetric_gauge_circulation() {
        let a = VectorPotential::symmetric(&unit_b()).unwrap();
        let c = circulation(&a, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(c, 0.0);
        let (x, y) = ([0.3, -1.2], [1.7, 0.4]);
        let c = circulation(&a, &x, &y).unwrap();
        assert!((c - 0.5 * (x[0] * y[1] - x[1] * y[0])).abs() < 1e-14);
    }

    #[test]
    fn dimension_errors() {
        let b = unit_b();
        assert!(matches!(
            flux_triangle(&b, &[0.0], &[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(MagneticField::constant(2, &[0.0, 1.0, 1.0, 0.0]).is_err());
        let bad: Vec<ScalarFn> = vec![
            Arc::new(|_: &[f64]| 0.0),
            Arc::new(|_: &[f64]| 1.0),
            Arc::new(|_: &[f64]| 1.0),
            Arc::new(|_: &[f64]| 0.0),
        ];
        assert!(MagneticField::from_components(2, bad).is_err());
    }

    #[test]
    fn poincare_of_constant_is_symmetric_gauge() {
        let b = MagneticField::constant_planar(1.3);
        let a = poincare_potential(&b);
        let s = VectorPotential::symmetric(&b).unwrap();
        for p in probe_points(2) {
            for j in 0..2 {
                assert!((a.component(j, &p) - s.component(j, &p)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn poincare_of_sinusoidal_passes() {
        let b = sinusoidal_field(1.0, 0.5);
        let a = poincare_potential(&b);
        let r = verify_potential(&a, &b, &probe_points(2), 1e-6).unwrap();
        assert!(r.pass, "{}", r.max_defect);
        for landau in [false, true] {
            let a = sinusoidal_potential(1.0, 0.5, landau);
            let r = verify_potential(&a, &b, &probe_points(2), 1e-8).unwrap();
            assert!(r.pass, "{}", r.max_defect);
        }
    }

    #[test]
    fn gauge_to_landau() {
        let b = unit_b();
        let a = VectorPotential::symmetric(&b).unwrap();
        let rho = GaugeFunction::quadratic(2, &[0.0, 0.5, 0.5, 0.0]).unwrap();
        let al = a.gauge_transform(&rho).unwrap();
        let landau = VectorPotential::landau(1.0);
        for p in probe_points(2) {
            for j in 0..2 {
                assert!((al.component(j, &p) - landau.component(j, &p)).abs() < 1e-14);
            }
        }
        assert!((rho.value(&[2.0, 3.0]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_flux_converges() {
        let b = sinusoidal_field(1.0, 0.5);
        let (f, ok) = flux_triangle_adaptive(&b, &[0.0, 0.0], &[3.0, 0.5], &[-1.0, 2.0], 1e-10).unwrap();
        assert!(ok);
        let f16 = flux_triangle(&b, &[0.0, 0.0], &[3.0, 0.5], &[-1.0, 2.0]).unwrap();
        assert!((f - f16).abs() < 1e-10);
    }
}
