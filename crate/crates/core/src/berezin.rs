//! Magnetic coherent states, Husimi functions, Berezin quantization and the
//! maps connecting it to the Weyl calculus.
//!
//! Coherent vectors are built on the periodic box: the envelope is evaluated
//! at the minimum-image displacement `d = wrap(x - z)` and the magnetic phase
//! along the segment from `z` to `z + d`.

use std::f64::consts::PI;
use std::sync::Arc;

use dashmap::DashMap;
use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{check_dim, parse_err, Error, Result};
use crate::fft::{flatten, unflatten, Dft};
use crate::fields::{flux_triangle_unchecked, GaugeFunction, MagneticField, VectorPotential};
use crate::phasespace::{check_hbar, inverse_partial_fourier, BoxGrid, KernelFunction, PhaseGrid, Symbol};
use crate::quadrature::{default_segment, default_simplex};
use crate::weyl::{operator_norm, OperatorMatrix};
use crate::{Flagged, C64, MAX_DIM};

pub type StateFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Unit vector `v` generating the coherent family.
#[derive(Clone)]
pub struct FiducialVector {
    dim: usize,
    eval: StateFn,
    grad: Option<Arc<dyn Fn(&[f64], usize) -> C64 + Send + Sync>>,
    parity: Parity,
    normalize: bool,
    label: String,
}

impl std::fmt::Debug for FiducialVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiducialVector")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("parity", &self.parity)
            .field("normalize", &self.normalize)
            .finish()
    }
}

fn gauss_env(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    PI.powf(-n / 4.0) * (-0.5 * y.iter().map(|v| v * v).sum::<f64>()).exp()
}

impl FiducialVector {
    /// Closure-defined fiducial; its continuum norm is checked by dense
    /// quadrature on `[-10, 10]^N`.
    pub fn new(dim: usize, v: StateFn, parity: Parity, label: impl Into<String>) -> Result<Self> {
        crate::fields::check_supported_dim(dim)?;
        let m = 400usize;
        let h = 20.0 / m as f64;
        let count = m.pow(dim as u32);
        let mut y = [0.0; MAX_DIM];
        let mut multi = [0usize; MAX_DIM];
        let mut norm = 0.0;
        for i in 0..count {
            unflatten(i, m, dim, &mut multi);
            for a in 0..dim {
                y[a] = -10.0 + multi[a] as f64 * h;
            }
            norm += v(&y[..dim]).norm_sqr();
        }
        norm *= h.powi(dim as i32);
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidFiducial(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self {
            dim,
            eval: v,
            grad: None,
            parity,
            normalize: true,
            label: label.into(),
        })
    }

    /// `pi^{-N/4} exp(-|x|^2 / 2)`.
    pub fn gaussian(dim: usize) -> Self {
        Self {
            dim,
            eval: Arc::new(|y| C64::new(gauss_env(y), 0.0)),
            grad: Some(Arc::new(|y, j| C64::new(-y[j] * gauss_env(y), 0.0))),
            parity: Parity::Even,
            normalize: true,
            label: "gaussian".into(),
        }
    }

    /// Normalized `(1 + eps y_1)` times the Gaussian; not even for eps != 0.
    pub fn odd_perturbed(dim: usize, eps: f64) -> Self {
        let c = 1.0 / (1.0 + 0.5 * eps * eps).sqrt();
        Self {
            dim,
            eval: Arc::new(move |y| C64::new(c * (1.0 + eps * y[0]) * gauss_env(y), 0.0)),
            grad: Some(Arc::new(move |y, j| {
                let g = gauss_env(y);
                let mut d = -(1.0 + eps * y[0]) * y[j] * g;
                if j == 0 {
                    d += eps * g;
                }
                C64::new(c * d, 0.0)
            })),
            parity: if eps == 0.0 { Parity::Even } else { Parity::None },
            normalize: true,
            label: format!("odd_perturbed:{eps}"),
        }
    }

    /// Gaussian times `exp(i k y_1)`; complex, with nonzero mean momentum.
    pub fn boosted(dim: usize, k: f64) -> Self {
        Self {
            dim,
            eval: Arc::new(move |y| C64::from_polar(gauss_env(y), k * y[0])),
            grad: Some(Arc::new(move |y, j| {
                let v = C64::from_polar(gauss_env(y), k * y[0]);
                let mut d = v * (-y[j]);
                if j == 0 {
                    d += v * C64::new(0.0, k);
                }
                d
            })),
            parity: if k == 0.0 { Parity::Even } else { Parity::None },
            normalize: true,
            label: format!("boosted:{k}"),
        }
    }

    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let num = |a: &str| -> Result<f64> {
            a.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err("fiducial", format!("bad number {a:?}")))
        };
        crate::fields::check_supported_dim(dim)?;
        match name.trim() {
            "gaussian" if args.is_empty() => Ok(Self::gaussian(dim)),
            "odd_perturbed" => Ok(Self::odd_perturbed(dim, num(args)?)),
            "boosted" => Ok(Self::boosted(dim, num(args)?)),
            _ => Err(parse_err("fiducial", format!("unknown fiducial {s:?}"))),
        }
    }

    /// Disables the rescaling to unit norm on the working grid, so discrete
    /// identities are tested against the continuum normalization.
    pub fn without_grid_normalization(mut self) -> Self {
        self.normalize = false;
        self
    }

    pub fn normalizes_on_grid(&self) -> bool {
        self.normalize
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, y: &[f64]) -> C64 {
        (self.eval)(y)
    }

    /// `d v / d y_j`: analytic for presets, central differences otherwise.
    pub fn derivative(&self, y: &[f64], j: usize) -> C64 {
        if let Some(g) = &self.grad {
            return g(y, j);
        }
        let h = 1e-4;
        let mut p = y.to_vec();
        p[j] = y[j] + h;
        let a = self.value(&p);
        p[j] = y[j] - h;
        let b = self.value(&p);
        p[j] = y[j] + 2.0 * h;
        let a2 = self.value(&p);
        p[j] = y[j] - 2.0 * h;
        let b2 = self.value(&p);
        (a - b) * (8.0 / (12.0 * h)) - (a2 - b2) * (1.0 / (12.0 * h))
    }

    /// Dilation `v_hbar(d) = hbar^{-N/4} v(d / sqrt(hbar)) / nu` where `nu`
    /// is the discrete norm on `grid` (or 1 without grid normalization).
    pub fn scaled(&self, hbar: f64, grid: &BoxGrid) -> ScaledFiducial {
        let n = self.dim;
        let sq = hbar.sqrt();
        let pre = hbar.powf(-(n as f64) / 4.0);
        let mut nu = 1.0;
        if self.normalize {
            let mut s = 0.0;
            let mut d = [0.0; MAX_DIM];
            for idx in 0..grid.len() {
                displacement(grid, idx, &mut d);
                for a in 0..n {
                    d[a] /= sq;
                }
                s += (self.value(&d[..n]) * pre).norm_sqr();
            }
            nu = (s * grid.weight()).sqrt();
        }
        ScaledFiducial {
            v: self.clone(),
            hbar,
            pre,
            nu,
        }
    }
}

/// Fiducial dilated to scale `hbar`, with its grid normalization.
#[derive(Clone, Debug)]
pub struct ScaledFiducial {
    v: FiducialVector,
    hbar: f64,
    pre: f64,
    nu: f64,
}

impl ScaledFiducial {
    #[inline]
    pub fn value(&self, d: &[f64]) -> C64 {
        let n = d.len();
        let sq = self.hbar.sqrt();
        let mut y = [0.0; MAX_DIM];
        for a in 0..n {
            y[a] = d[a] / sq;
        }
        self.v.value(&y[..n]) * (self.pre / self.nu)
    }

    pub fn derivative(&self, d: &[f64], j: usize) -> C64 {
        let n = d.len();
        let sq = self.hbar.sqrt();
        let mut y = [0.0; MAX_DIM];
        for a in 0..n {
            y[a] = d[a] / sq;
        }
        self.v.derivative(&y[..n], j) * (self.pre / (self.nu * sq))
    }

    pub fn grid_norm_factor(&self) -> f64 {
        self.nu
    }
}

/// Signed minimum-image displacement for displacement index `idx`.
#[inline]
fn displacement(grid: &BoxGrid, idx: usize, out: &mut [f64]) {
    let m = grid.points();
    let h = grid.spacing();
    let mut multi = [0usize; MAX_DIM];
    unflatten(idx, m, grid.dim(), &mut multi);
    for a in 0..grid.dim() {
        let s = if multi[a] < m / 2 {
            multi[a] as f64
        } else {
            multi[a] as f64 - m as f64
        };
        out[a] = s * h;
    }
}

/// Index of the displacement `x_i - x_j` modulo the box.
#[inline]
fn diff_index(m: usize, dim: usize, i: usize, j: usize) -> usize {
    let mut mi = [0usize; MAX_DIM];
    let mut mj = [0usize; MAX_DIM];
    unflatten(i, m, dim, &mut mi);
    unflatten(j, m, dim, &mut mj);
    let mut md = [0usize; MAX_DIM];
    for a in 0..dim {
        md[a] = (mi[a] + m - mj[a]) % m;
    }
    flatten(&md[..dim], m)
}

/// Coherent vector samples at an arbitrary phase point `(z, zeta)`.
pub fn coherent_vector(
    a: &VectorPotential,
    v: &FiducialVector,
    hbar: f64,
    z: &[f64],
    zeta: &[f64],
    grid: &BoxGrid,
) -> Result<Flagged<Vec<C64>>> {
    let n = grid.dim();
    check_dim(n, a.dim())?;
    check_dim(n, v.dim())?;
    check_dim(n, z.len())?;
    check_dim(n, zeta.len())?;
    check_hbar(hbar)?;
    let sv = v.scaled(hbar, grid);
    let mut warnings = Vec::new();
    let margin = 5.0 * hbar.sqrt();
    if grid.boundary_distance(z) < margin {
        warnings.push(format!("coherent vector center within {margin:.3} of the box boundary"));
    }
    Ok(Flagged {
        value: coherent_samples(a, &sv, hbar, z, zeta, grid),
        warnings,
    })
}

fn coherent_samples(a: &VectorPotential, sv: &ScaledFiducial, hbar: f64, z: &[f64], zeta: &[f64], grid: &BoxGrid) -> Vec<C64> {
    let n = grid.dim();
    let seg = default_segment();
    let mut x = [0.0; MAX_DIM];
    let mut d = [0.0; MAX_DIM];
    let mut xp = [0.0; MAX_DIM];
    (0..grid.len())
        .map(|i| {
            grid.node(i, &mut x);
            let mut ph = 0.0;
            for c in 0..n {
                d[c] = grid.wrap(x[c] - z[c]);
                xp[c] = z[c] + d[c];
                ph += (xp[c] - 0.5 * z[c]) * zeta[c];
            }
            ph += a.circulation_unchecked(z, &xp[..n], seg);
            sv.value(&d[..n]) * C64::from_polar(1.0, ph / hbar)
        })
        .collect()
}

/// `<v(Y), v(Z)>` with the discrete inner product.
pub fn overlap_kernel(
    a: &VectorPotential,
    v: &FiducialVector,
    hbar: f64,
    y: (&[f64], &[f64]),
    z: (&[f64], &[f64]),
    grid: &BoxGrid,
) -> Result<Flagged<C64>> {
    let vy = coherent_vector(a, v, hbar, y.0, y.1, grid)?;
    let vz = coherent_vector(a, v, hbar, z.0, z.1, grid)?;
    let w = grid.weight();
    let s: C64 = vy.value.iter().zip(&vz.value).map(|(p, q)| p.conj() * q).sum::<C64>() * w;
    let mut warnings = vy.warnings;
    warnings.extend(vz.warnings);
    Ok(Flagged { value: s, warnings })
}

/// Precomputed coherent family over all position nodes `z` of a phase grid:
/// `g[z, x] = exp(i Gamma^A[z, x'] / hbar) v_hbar(x' - z)` with `x'` the image
/// of `x` nearest to `z`. The momentum dependence is a plane wave.
#[derive(Clone)]
pub struct CoherentFamily {
    grid: PhaseGrid,
    a: VectorPotential,
    v: FiducialVector,
    scaled: ScaledFiducial,
    g: Array2<C64>,
    leakage: Vec<f64>,
}

impl std::fmt::Debug for CoherentFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoherentFamily").field("grid", &self.grid).finish()
    }
}

impl CoherentFamily {
    pub fn new(a: &VectorPotential, v: &FiducialVector, grid: &PhaseGrid) -> Result<Self> {
        let n = grid.dim();
        check_dim(n, a.dim())?;
        check_dim(n, v.dim())?;
        let pos = grid.position();
        let hbar = grid.hbar();
        let sv = v.scaled(hbar, pos);
        let nm = pos.len();
        let seg = default_segment();
        let l_in = 0.9 * pos.half_width();
        let w = pos.weight();
        let mut g = Array2::zeros((nm, nm));
        let leakage: Vec<f64> = g
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .map(|(zi, mut row)| {
                let mut z = [0.0; MAX_DIM];
                let mut x = [0.0; MAX_DIM];
                let mut d = [0.0; MAX_DIM];
                let mut xp = [0.0; MAX_DIM];
                pos.node(zi, &mut z);
                let mut leak = 0.0;
                for xi in 0..nm {
                    pos.node(xi, &mut x);
                    let mut outside = false;
                    for c in 0..n {
                        d[c] = pos.wrap(x[c] - z[c]);
                        xp[c] = z[c] + d[c];
                        outside |= xp[c].abs() > l_in;
                    }
                    let env = sv.value(&d[..n]);
                    if outside {
                        leak += env.norm_sqr() * w;
                    }
                    let ph = a.circulation_unchecked(&z[..n], &xp[..n], seg) / hbar;
                    row[xi] = env * C64::from_polar(1.0, ph);
                }
                leak
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            a: a.clone(),
            v: v.clone(),
            scaled: sv,
            g,
            leakage,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.a
    }

    pub fn fiducial(&self) -> &FiducialVector {
        &self.v
    }

    pub fn scaled_fiducial(&self) -> &ScaledFiducial {
        &self.scaled
    }

    /// Envelope mass outside 90% of the box, per position node.
    pub fn leakage(&self) -> &[f64] {
        &self.leakage
    }

    /// Samples of the coherent vector at phase-grid node `idx`.
    pub fn vector(&self, idx: usize) -> Vec<C64> {
        let pos = self.grid.position();
        let nm = pos.len();
        let n = pos.dim();
        let (zi, ki) = (idx / nm, idx % nm);
        let mut z = [0.0; MAX_DIM];
        let mut zeta = [0.0; MAX_DIM];
        let mut x = [0.0; MAX_DIM];
        pos.node(zi, &mut z);
        self.grid.momentum_node(ki, &mut zeta);
        let hbar = self.grid.hbar();
        (0..nm)
            .map(|xi| {
                pos.node(xi, &mut x);
                let mut ph = 0.0;
                for c in 0..n {
                    let xp = z[c] + pos.wrap(x[c] - z[c]);
                    ph += (xp - 0.5 * z[c]) * zeta[c];
                }
                self.g[[zi, xi]] * C64::from_polar(1.0, ph / hbar)
            })
            .collect()
    }

    /// All overlaps `<v(Y), u>` on the phase grid, indexed `pos * M^N + mom`.
    pub fn overlaps(&self, u: &[C64]) -> Vec<C64> {
        let pos = self.grid.position();
        let nm = pos.len();
        let n = pos.dim();
        let hbar = self.grid.hbar();
        let w = pos.weight();
        // plane[x, k] = exp(-i x.zeta_k / hbar)
        let mut plane = Array2::zeros((nm, nm));
        let mut x = [0.0; MAX_DIM];
        let mut zeta = [0.0; MAX_DIM];
        for xi in 0..nm {
            pos.node(xi, &mut x);
            for k in 0..nm {
                self.grid.momentum_node(k, &mut zeta);
                let ph: f64 = (0..n).map(|c| x[c] * zeta[c]).sum();
                plane[[xi, k]] = C64::from_polar(1.0, -ph / hbar);
            }
        }
        let amp = Array2::from_shape_fn((nm, nm), |(zi, xi)| self.g[[zi, xi]].conj() * u[xi] * w);
        let prod = amp.dot(&plane);
        let mut out = vec![C64::new(0.0, 0.0); nm * nm];
        let mut z = [0.0; MAX_DIM];
        for zi in 0..nm {
            pos.node(zi, &mut z);
            for k in 0..nm {
                self.grid.momentum_node(k, &mut zeta);
                let ph: f64 = (0..n).map(|c| 0.5 * z[c] * zeta[c]).sum();
                out[zi * nm + k] = prod[[zi, k]] * C64::from_polar(1.0, ph / hbar);
            }
        }
        out
    }

    /// Berezin operator `sum_Z w_Z f(Z) |v(Z)><v(Z)|`, summed fiberwise over
    /// the momentum variable.
    pub fn berezin(&self, f: &Symbol) -> Result<Flagged<OperatorMatrix>> {
        check_dim(self.grid.dim(), f.dim())?;
        let samples = f.sample(&self.grid);
        self.berezin_from_samples(&samples)
    }

    pub fn berezin_from_samples(&self, samples: &[C64]) -> Result<Flagged<OperatorMatrix>> {
        check_dim(self.grid.len(), samples.len())?;
        let pos = self.grid.position();
        let m = pos.points();
        let n = pos.dim();
        let nm = pos.len();
        let w = self.grid.cell_weight();
        let dft = Dft::new(m);
        // fh[z][n] = w sum_k f(z, zeta_k) exp(i n h zeta_k / hbar), n modulo M
        let fh: Vec<Vec<C64>> = (0..nm)
            .into_par_iter()
            .map(|zi| {
                let mut r = samples[zi * nm..(zi + 1) * nm].to_vec();
                dft.apply(&mut r, n, 1, true, false);
                r.iter_mut().for_each(|v| *v *= w);
                r
            })
            .collect();
        let diff: Vec<u32> = (0..nm * nm).map(|p| diff_index(m, n, p / nm, p % nm) as u32).collect();
        let tiny = 1e-300;
        let active: Vec<bool> = fh.iter().map(|r| r.iter().any(|v| v.norm() > tiny)).collect();
        let mut e = Array2::zeros((nm, nm));
        let g = &self.g;
        e.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(xi, mut row)| {
            let drow = &diff[xi * nm..(xi + 1) * nm];
            for zi in 0..nm {
                if !active[zi] {
                    continue;
                }
                let a = g[[zi, xi]];
                if a.norm() < tiny {
                    continue;
                }
                let gz = g.row(zi);
                let fz = &fh[zi];
                for yi in 0..nm {
                    row[yi] += a * gz[yi].conj() * fz[drow[yi] as usize];
                }
            }
        });
        let mut warnings = Vec::new();
        let edge = self.edge_weight(samples);
        if edge > 1e-8 {
            warnings.push(format!("symbol has relative weight {edge:.2e} near the box boundary"));
        }
        Ok(Flagged {
            value: OperatorMatrix::new(pos.clone(), e)?,
            warnings,
        })
    }

    /// Largest |f| over positions outside 90% of the box, relative to max |f|.
    fn edge_weight(&self, samples: &[C64]) -> f64 {
        let pos = self.grid.position();
        let nm = pos.len();
        let l_in = 0.9 * pos.half_width();
        let mut x = [0.0; MAX_DIM];
        let mut edge: f64 = 0.0;
        let mut all: f64 = 0.0;
        for zi in 0..nm {
            pos.node(zi, &mut x);
            let outside = x[..pos.dim()].iter().any(|c| c.abs() > l_in);
            for v in &samples[zi * nm..(zi + 1) * nm] {
                all = all.max(v.norm());
                if outside {
                    edge = edge.max(v.norm());
                }
            }
        }
        if all > 0.0 {
            edge / all
        } else {
            0.0
        }
    }

    /// Husimi function `(2 pi hbar)^{-N} |<v(Y), u>|^2` on the phase grid.
    pub fn husimi(&self, u: &[C64]) -> Result<Flagged<Vec<f64>>> {
        let pos = self.grid.position();
        check_dim(pos.len(), u.len())?;
        let c = (2.0 * PI * self.grid.hbar()).powi(-(pos.dim() as i32));
        let h: Vec<f64> = self.overlaps(u).iter().map(|o| o.norm_sqr() * c).collect();
        let mut warnings = Vec::new();
        let l_in = 0.9 * pos.half_width();
        let mut x = [0.0; MAX_DIM];
        let mut edge = 0.0;
        let mut total = 0.0;
        for (i, v) in u.iter().enumerate() {
            pos.node(i, &mut x);
            total += v.norm_sqr();
            if x[..pos.dim()].iter().any(|c| c.abs() > l_in) {
                edge += v.norm_sqr();
            }
        }
        if total > 0.0 && edge / total > 1e-8 {
            warnings.push(format!("state has relative mass {:.2e} near the box boundary", edge / total));
        }
        Ok(Flagged { value: h, warnings })
    }

    /// Rank-one `(2 pi hbar)^{-N} |v(Z)><v(Z)|` at an arbitrary phase point.
    pub fn delta(&self, z: &[f64], zeta: &[f64]) -> Result<Flagged<OperatorMatrix>> {
        let pos = self.grid.position();
        let hbar = self.grid.hbar();
        let vz = coherent_vector(&self.a, &self.v, hbar, z, zeta, pos)?;
        let c = (2.0 * PI * hbar).powi(-(pos.dim() as i32));
        let nm = pos.len();
        let e = Array2::from_shape_fn((nm, nm), |(i, j)| vz.value[i] * vz.value[j].conj() * c);
        Ok(Flagged {
            value: OperatorMatrix::new(pos.clone(), e)?,
            warnings: vz.warnings,
        })
    }
}

/// Berezin quantization of `f`.
pub fn berezin_op(a: &VectorPotential, v: &FiducialVector, f: &Symbol, grid: &PhaseGrid) -> Result<Flagged<OperatorMatrix>> {
    CoherentFamily::new(a, v, grid)?.berezin(f)
}

/// `(2 pi hbar)^{-N} |v(Z)><v(Z)|`.
pub fn berezin_delta(
    a: &VectorPotential,
    v: &FiducialVector,
    hbar: f64,
    z: &[f64],
    zeta: &[f64],
    grid: &BoxGrid,
) -> Result<Flagged<OperatorMatrix>> {
    let vz = coherent_vector(a, v, hbar, z, zeta, grid)?;
    let c = (2.0 * PI * hbar).powi(-(grid.dim() as i32));
    let nm = grid.len();
    let e = Array2::from_shape_fn((nm, nm), |(i, j)| vz.value[i] * vz.value[j].conj() * c);
    Ok(Flagged {
        value: OperatorMatrix::new(grid.clone(), e)?,
        warnings: vz.warnings,
    })
}

/// Husimi function of `u` on the phase grid.
pub fn husimi(a: &VectorPotential, v: &FiducialVector, u: &[C64], grid: &PhaseGrid) -> Result<Flagged<Vec<f64>>> {
    CoherentFamily::new(a, v, grid)?.husimi(u)
}

/// Explicit frame matrix `V` (columns are coherent vectors) for small grids.
#[derive(Clone, Debug)]
pub struct CoherentFrame {
    grid: PhaseGrid,
    matrix: Array2<C64>,
}

pub const FRAME_ENTRY_LIMIT: usize = 1 << 23;

impl CoherentFrame {
    pub fn new(family: &CoherentFamily) -> Result<Self> {
        let grid = family.grid().clone();
        let nm = grid.position().len();
        let size = nm * grid.len();
        if size > FRAME_ENTRY_LIMIT {
            return Err(Error::GridTooLarge {
                what: "explicit coherent frame",
                size,
                limit: FRAME_ENTRY_LIMIT,
            });
        }
        let cols: Vec<Vec<C64>> = (0..grid.len()).into_par_iter().map(|idx| family.vector(idx)).collect();
        let matrix = Array2::from_shape_fn((nm, grid.len()), |(x, z)| cols[z][x]);
        Ok(Self { grid, matrix })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// `V diag(w f) V^*` as an operator.
    pub fn berezin(&self, f: &Symbol) -> Result<OperatorMatrix> {
        let w = self.grid.cell_weight();
        let s = f.sample(&self.grid);
        let mut scaled = self.matrix.clone();
        for (mut col, fv) in scaled.axis_iter_mut(Axis(1)).zip(&s) {
            col.mapv_inplace(|v| v * fv * w);
        }
        let e = scaled.dot(&crate::linalg::adjoint(&self.matrix));
        OperatorMatrix::new(self.grid.position().clone(), e)
    }

    /// Operator norm of `V diag(w) V^* - Id`.
    pub fn resolution_defect(&self) -> Result<f64> {
        let b = self.berezin(&Symbol::constant(self.grid.dim(), 1.0))?;
        operator_norm(&b.sub(&OperatorMatrix::identity(self.grid.position())))
    }

    /// Largest deviation of a column norm from 1.
    pub fn column_norm_defect(&self) -> f64 {
        let w = self.grid.position().weight();
        self.matrix
            .axis_iter(Axis(1))
            .map(|c| ((c.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `Sigma^B_hbar F` with the z-integral sampled at `x - sqrt(hbar) z` on grid nodes.
pub fn sigma_map(b: &MagneticField, v: &FiducialVector, hbar: f64, f: &KernelFunction, grid: &BoxGrid) -> Result<KernelFunction> {
    let n = grid.dim();
    check_dim(n, b.dim())?;
    check_dim(n, v.dim())?;
    check_dim(n, f.dim())?;
    check_hbar(hbar)?;
    let sv = v.scaled(hbar, grid);
    let nodes: Arc<Vec<[f64; MAX_DIM]>> = Arc::new(
        (0..grid.len())
            .map(|i| {
                let mut p = [0.0; MAX_DIM];
                grid.node(i, &mut p);
                p
            })
            .collect(),
    );
    let w = grid.weight();
    let label = format!("Sigma[{}]", f.label());
    let (b, f) = (b.clone(), f.clone());
    let rule = default_simplex().clone();
    // terms below this cannot reach double precision relative to the peak
    let cut = 1e-17 * sv.value(&[0.0; MAX_DIM][..n]).norm();
    let eval = move |xc: &[f64], yv: &[f64]| -> C64 {
        let mut x = [0.0; MAX_DIM];
        let mut y = [0.0; MAX_DIM];
        for c in 0..n {
            x[c] = xc[c] - 0.5 * hbar * yv[c];
            y[c] = xc[c] + 0.5 * hbar * yv[c];
        }
        let mut s = C64::new(0.0, 0.0);
        let (mut dx, mut dy) = ([0.0; MAX_DIM], [0.0; MAX_DIM]);
        for cpt in nodes.iter() {
            for c in 0..n {
                dx[c] = x[c] - cpt[c];
                dy[c] = y[c] - cpt[c];
            }
            let vx = sv.value(&dx[..n]);
            if vx.norm() < cut {
                continue;
            }
            let vy = sv.value(&dy[..n]);
            if vy.norm() < cut {
                continue;
            }
            let fv = f.value(&cpt[..n], yv);
            let flux = flux_triangle_unchecked(&b, &cpt[..n], &y[..n], &x[..n], &rule);
            s += fv * vy.conj() * vx * C64::from_polar(1.0, -flux / hbar);
        }
        s * w
    };
    Ok(KernelFunction::new(n, eval).with_label(label))
}

/// `S^B_hbar f = F(Sigma(F^{-1} f))`, evaluated with a per-position memo over
/// the lag lattice.
pub fn ss_symbol(b: &MagneticField, v: &FiducialVector, f: &Symbol, grid: &PhaseGrid) -> Result<Symbol> {
    let n = grid.dim();
    let fk = inverse_partial_fourier(f, grid)?;
    let sk = sigma_map(b, v, grid.hbar(), &fk, grid.position())?;
    let nm = grid.position().len();
    let dw = grid.lag_spacing().powi(n as i32);
    let gr = grid.clone();
    let memo: Arc<DashMap<[u64; MAX_DIM], Arc<Vec<C64>>>> = Arc::new(DashMap::new());
    let eval = move |x: &[f64], eta: &[f64]| -> C64 {
        let mut key = [0u64; MAX_DIM];
        for c in 0..n {
            key[c] = x[c].to_bits();
        }
        let row = match memo.get(&key) {
            Some(r) => r.clone(),
            None => {
                let mut w = [0.0; MAX_DIM];
                let r: Vec<C64> = (0..nm)
                    .map(|k| {
                        gr.lag_node(k, &mut w);
                        sk.value(x, &w[..n])
                    })
                    .collect();
                let r = Arc::new(r);
                memo.insert(key, r.clone());
                r
            }
        };
        let mut w = [0.0; MAX_DIM];
        let mut s = C64::new(0.0, 0.0);
        for (k, val) in row.iter().enumerate() {
            gr.lag_node(k, &mut w);
            let ph: f64 = (0..n).map(|c| w[c] * eta[c]).sum();
            s += val * C64::from_polar(1.0, ph);
        }
        s * dw
    };
    Ok(Symbol::new(n, eval).with_label(format!("S[{}]", f.label())))
}

/// `|B^{A + d rho}(f) - U_rho B^A(f) U_rho^*|` with `U_rho = exp(i rho / hbar)`.
pub fn gauge_covariance_check(
    a: &VectorPotential,
    rho: &GaugeFunction,
    v: &FiducialVector,
    f: &Symbol,
    grid: &PhaseGrid,
) -> Result<f64> {
    let a2 = a.gauge_transform(rho)?;
    let b1 = berezin_op(a, v, f, grid)?.value;
    let b2 = berezin_op(&a2, v, f, grid)?.value;
    let pos = grid.position();
    let hbar = grid.hbar();
    let ph: Vec<C64> = (0..pos.len())
        .map(|i| C64::from_polar(1.0, rho.value(&pos.node_vec(i)) / hbar))
        .collect();
    let mut conj = b1.into_entries();
    for ((i, j), v) in conj.indexed_iter_mut() {
        *v *= ph[i] * ph[j].conj();
    }
    let conj = OperatorMatrix::new(pos.clone(), conj)?;
    operator_norm(&b2.sub(&conj))
}

#[derive(Clone, Copy, Debug)]
pub struct PExpectation {
    /// Circulation-derivative, fiducial and state-derivative terms.
    pub terms: [C64; 3],
    pub total: C64,
}

/// Three-term expression for `<u, B(xi_j) u>`.
pub fn berezin_p_expectation(
    a: &VectorPotential,
    v: &FiducialVector,
    hbar: f64,
    u: &[C64],
    j: usize,
    grid: &BoxGrid,
) -> Result<PExpectation> {
    let n = grid.dim();
    check_dim(n, a.dim())?;
    check_dim(grid.len(), u.len())?;
    check_hbar(hbar)?;
    if j >= n {
        return Err(Error::OutOfRange { index: j, range: n });
    }
    let sv = v.scaled(hbar, grid);
    let w = grid.weight();
    let nm = grid.len();
    let seg = default_segment();
    // first term: derivative of Gamma^A[x, z] in its first slot, z = x - sqrt(hbar) y
    let t1: f64 = (0..nm)
        .into_par_iter()
        .map(|xi| {
            let ux = u[xi].norm_sqr();
            if ux == 0.0 {
                return 0.0;
            }
            let mut x = [0.0; MAX_DIM];
            let mut z = [0.0; MAX_DIM];
            let mut d = [0.0; MAX_DIM];
            let mut xp = [0.0; MAX_DIM];
            grid.node(xi, &mut x);
            let mut acc = 0.0;
            for zi in 0..nm {
                grid.node(zi, &mut z);
                for c in 0..n {
                    d[c] = grid.wrap(x[c] - z[c]);
                    xp[c] = z[c] + d[c];
                }
                let env = sv.value(&d[..n]).norm_sqr();
                if env < 1e-300 {
                    continue;
                }
                let step = 1e-4;
                let mut deriv = 0.0;
                for (k, c) in [(1.0, 8.0), (2.0, -1.0)] {
                    let mut p = xp;
                    p[j] = xp[j] + k * step;
                    let fp = a.circulation_unchecked(&p[..n], &z[..n], seg);
                    p[j] = xp[j] - k * step;
                    let fm = a.circulation_unchecked(&p[..n], &z[..n], seg);
                    deriv += c * (fp - fm);
                }
                deriv /= 12.0 * step;
                acc += deriv * env;
            }
            acc * ux * w * w
        })
        .sum();
    let unorm: f64 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
    let mut dv = C64::new(0.0, 0.0);
    let mut d = [0.0; MAX_DIM];
    for idx in 0..nm {
        displacement(grid, idx, &mut d);
        dv += sv.derivative(&d[..n], j) * sv.value(&d[..n]).conj();
    }
    dv *= w;
    // dv is the integral for v_hbar; the fiducial integral is sqrt(hbar) times it
    let t2 = C64::new(0.0, hbar.sqrt()) * unorm * (dv * hbar.sqrt());
    let du = crate::weyl::spectral_derivative(u, grid, j);
    let t3: C64 = du.iter().zip(u).map(|(d, v)| d.conj() * v).sum::<C64>() * w * C64::new(0.0, hbar);
    let t1 = C64::new(t1, 0.0);
    Ok(PExpectation {
        terms: [t1, t2, t3],
        total: t1 + t2 + t3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup1(m: usize, l: f64, hbar: f64) -> (PhaseGrid, VectorPotential, FiducialVector) {
        (
            PhaseGrid::new(BoxGrid::new(1, l, m).unwrap(), hbar).unwrap(),
            VectorPotential::zero(1).unwrap(),
            FiducialVector::gaussian(1),
        )
    }

    #[test]
    fn fiducial_presets_are_unit() {
        for v in [
            FiducialVector::gaussian(2),
            FiducialVector::odd_perturbed(2, 0.4),
            FiducialVector::boosted(2, 1.1),
        ] {
            let f = v.eval.clone();
            assert!(FiducialVector::new(2, f, Parity::None, "t").is_ok(), "{}", v.label());
        }
        let bad: StateFn = Arc::new(|y: &[f64]| C64::new(2.0 * gauss_env(y), 0.0));
        assert!(FiducialVector::new(1, bad, Parity::Even, "bad").is_err());
    }

    #[test]
    fn frame_and_fiber_agree() {
        let (g, _, v) = setup1(16, 3.0, 0.5);
        let a = VectorPotential::zero(1).unwrap();
        let fam = CoherentFamily::new(&a, &v, &g).unwrap();
        let frame = CoherentFrame::new(&fam).unwrap();
        let f = crate::presets::gaussian(1, &[0.3, -0.2], 0.9);
        let b1 = fam.berezin(&f).unwrap().value;
        let b2 = frame.berezin(&f).unwrap();
        assert!(b1.sub(&b2).max_abs_action() < 1e-13);
    }

    #[test]
    fn centered_coherent_vector_is_dilated_fiducial() {
        let (g, a, v) = setup1(32, 5.0, 0.25);
        let c = coherent_vector(&a, &v.clone().without_grid_normalization(), 0.25, &[0.0], &[0.0], g.position())
            .unwrap();
        for (i, val) in c.value.iter().enumerate() {
            let x = g.position().axis_value(i);
            let want = 0.25f64.powf(-0.25) * gauss_env(&[x / 0.5]);
            assert!((val - want).norm() < 1e-14);
        }
    }
}
