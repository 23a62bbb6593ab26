//! Discretized configuration and phase spaces, symbols, kernels, partial
//! Fourier transforms and the magnetic Poisson bracket.

use std::f64::consts::PI;
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::fft::{unflatten, Dft};
use crate::fields::{check_supported_dim, MagneticField};
use crate::{Flagged, C64, MAX_DIM};

/// Uniform grid on `[-L, L)^N` with `M` nodes per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxGrid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl BoxGrid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        check_supported_dim(dim)?;
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("box half width {half_width} must be positive")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 4, got {points}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Number of nodes, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^N`.
    pub fn weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn axis_value(&self, m: usize) -> f64 {
        -self.half_width + m as f64 * self.spacing()
    }

    /// Coordinates of node `idx`, written into `out[..N]`.
    #[inline]
    pub fn node(&self, idx: usize, out: &mut [f64]) {
        let mut multi = [0usize; MAX_DIM];
        unflatten(idx, self.points, self.dim, &mut multi);
        for a in 0..self.dim {
            out[a] = self.axis_value(multi[a]);
        }
    }

    pub fn node_vec(&self, idx: usize) -> Vec<f64> {
        let mut p = [0.0; MAX_DIM];
        self.node(idx, &mut p);
        p[..self.dim].to_vec()
    }

    /// Minimum-image representative of a displacement in `[-L, L)`.
    #[inline]
    pub fn wrap(&self, d: f64) -> f64 {
        let p = 2.0 * self.half_width;
        d - p * ((d + self.half_width) / p).floor()
    }

    /// Index of the node nearest to `x` along each axis, if `x` lies on the grid.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        let h = self.spacing();
        let mut idx = 0;
        for &c in &x[..self.dim] {
            let t = (c + self.half_width) / h;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r >= self.points as f64 {
                return None;
            }
            idx = idx * self.points + r as usize;
        }
        Some(idx)
    }

    /// Distance from `x` to the box boundary (negative outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        x[..self.dim]
            .iter()
            .map(|c| self.half_width - c.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Phase-space grid: position grid plus the hbar-scaled dual momentum axes.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    position: BoxGrid,
    hbar: f64,
}

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar <= 1.0 {
        Ok(())
    } else {
        Err(Error::HbarOutOfRange(hbar))
    }
}

impl PhaseGrid {
    pub fn new(position: BoxGrid, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self { position, hbar })
    }

    pub fn position(&self) -> &BoxGrid {
        &self.position
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.position.dim
    }

    pub fn points(&self) -> usize {
        self.position.points
    }

    /// `Delta eta = pi hbar / L`.
    pub fn momentum_spacing(&self) -> f64 {
        PI * self.hbar / self.position.half_width
    }

    /// Momentum value for centered index `k` in `0..M` (standing for `k - M/2`).
    pub fn momentum_value(&self, k: usize) -> f64 {
        (k as f64 - (self.points() / 2) as f64) * self.momentum_spacing()
    }

    /// Lattice spacing of the kernel variable, `h / hbar`.
    pub fn lag_spacing(&self) -> f64 {
        self.position.spacing() / self.hbar
    }

    pub fn lag_value(&self, n: usize) -> f64 {
        (n as f64 - (self.points() / 2) as f64) * self.lag_spacing()
    }

    /// Number of phase-space nodes, `M^{2N}`.
    pub fn len(&self) -> usize {
        self.position.len() * self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Weight of a phase-space cell in the measure `dX / (2 pi hbar)^N`.
    pub fn cell_weight(&self) -> f64 {
        let c = self.position.spacing() * self.momentum_spacing() / (2.0 * PI * self.hbar);
        c.powi(self.dim() as i32)
    }

    /// Momentum node `k` (flat index over `[M; N]`), written into `out[..N]`.
    #[inline]
    pub fn momentum_node(&self, k: usize, out: &mut [f64]) {
        let mut multi = [0usize; MAX_DIM];
        unflatten(k, self.points(), self.dim(), &mut multi);
        for a in 0..self.dim() {
            out[a] = self.momentum_value(multi[a]);
        }
    }

    #[inline]
    pub fn lag_node(&self, n: usize, out: &mut [f64]) {
        let mut multi = [0usize; MAX_DIM];
        unflatten(n, self.points(), self.dim(), &mut multi);
        for a in 0..self.dim() {
            out[a] = self.lag_value(multi[a]);
        }
    }

    /// Phase point `idx = pos * M^N + mom`.
    #[inline]
    pub fn point(&self, idx: usize, x: &mut [f64], xi: &mut [f64]) {
        let nm = self.position.len();
        self.position.node(idx / nm, x);
        self.momentum_node(idx % nm, xi);
    }
}

pub type PhaseFn = Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync>;
/// Writes `(d/dx f, d/dxi f)` at a phase point.
pub type PhaseGradFn = Arc<dyn Fn(&[f64], &[f64], &mut [C64], &mut [C64]) + Send + Sync>;
/// Writes `d/dx F` at a kernel point.
pub type KernelGradFn = Arc<dyn Fn(&[f64], &[f64], &mut [C64]) + Send + Sync>;

/// Function on phase space with an evaluable closure and optional samples.
#[derive(Clone)]
pub struct Symbol {
    dim: usize,
    eval: PhaseFn,
    grad: Option<PhaseGradFn>,
    cache: Option<Arc<(PhaseGrid, Vec<C64>)>>,
    label: String,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl Symbol {
    pub fn new(dim: usize, f: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
            grad: None,
            cache: None,
            label: String::new(),
        }
    }

    pub fn real(dim: usize, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(dim, move |x, xi| C64::new(f(x, xi), 0.0))
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::real(dim, move |_, _| c)
            .with_gradient(|_, _, dx, dxi| {
                dx.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                dxi.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            })
            .with_label(format!("constant:{c}"))
    }

    /// Symbol known only through samples on `grid`; off-grid values use
    /// trigonometric interpolation.
    pub fn from_samples(grid: &PhaseGrid, samples: Vec<C64>) -> Result<Self> {
        check_dim(grid.len(), samples.len())?;
        let interp = TrigInterpolant::new(grid, &samples);
        let interp = Arc::new(interp);
        Ok(Self {
            dim: grid.dim(),
            eval: Arc::new(move |x, xi| interp.eval(x, xi)),
            grad: None,
            cache: Some(Arc::new((grid.clone(), samples))),
            label: "sampled".into(),
        })
    }

    pub fn with_gradient(
        mut self,
        g: impl Fn(&[f64], &[f64], &mut [C64], &mut [C64]) + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(g));
        self
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

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    #[inline]
    pub fn value(&self, x: &[f64], xi: &[f64]) -> C64 {
        (self.eval)(x, xi)
    }

    pub fn gradient(&self, x: &[f64], xi: &[f64], dx: &mut [C64], dxi: &mut [C64]) -> bool {
        match &self.grad {
            Some(g) => {
                g(x, xi, dx, dxi);
                true
            }
            None => false,
        }
    }

    /// Samples on all phase-grid nodes (cached values when available).
    pub fn sample(&self, grid: &PhaseGrid) -> Vec<C64> {
        if let Some(c) = &self.cache {
            if &c.0 == grid {
                return c.1.clone();
            }
        }
        let n = self.dim;
        (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut x = [0.0; MAX_DIM];
                let mut xi = [0.0; MAX_DIM];
                grid.point(idx, &mut x, &mut xi);
                self.value(&x[..n], &xi[..n])
            })
            .collect()
    }

    /// Attaches cached samples on `grid`.
    pub fn with_samples(mut self, grid: &PhaseGrid) -> Self {
        let s = self.sample(grid);
        self.cache = Some(Arc::new((grid.clone(), s)));
        self
    }

    pub fn cached_grid(&self) -> Option<&PhaseGrid> {
        self.cache.as_ref().map(|c| &c.0)
    }

    pub fn conj(&self) -> Self {
        let f = self.eval.clone();
        let mut out = Self::new(self.dim, move |x, xi| f(x, xi).conj());
        if let Some(g) = &self.grad {
            let g = g.clone();
            out = out.with_gradient(move |x, xi, dx, dxi| {
                g(x, xi, dx, dxi);
                dx.iter_mut().for_each(|v| *v = v.conj());
                dxi.iter_mut().for_each(|v| *v = v.conj());
            });
        }
        out.label = format!("conj({})", self.label);
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.eval.clone();
        let mut out = Self::new(self.dim, move |x, xi| f(x, xi) * c);
        if let Some(g) = &self.grad {
            let g = g.clone();
            out = out.with_gradient(move |x, xi, dx, dxi| {
                g(x, xi, dx, dxi);
                dx.iter_mut().for_each(|v| *v *= c);
                dxi.iter_mut().for_each(|v| *v *= c);
            });
        }
        out.label = format!("{c}*{}", self.label);
        out
    }

    /// Pointwise product; gradients follow the Leibniz rule when both exist.
    pub fn mul(&self, other: &Symbol) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let mut out = Self::new(self.dim, move |x, xi| f(x, xi) * g(x, xi));
        if let (Some(df), Some(dg)) = (&self.grad, &other.grad) {
            let (f, g) = (self.eval.clone(), other.eval.clone());
            let (df, dg) = (df.clone(), dg.clone());
            let n = self.dim;
            out = out.with_gradient(move |x, xi, dx, dxi| {
                let mut ax = [C64::new(0.0, 0.0); MAX_DIM];
                let mut axi = [C64::new(0.0, 0.0); MAX_DIM];
                let mut bx = [C64::new(0.0, 0.0); MAX_DIM];
                let mut bxi = [C64::new(0.0, 0.0); MAX_DIM];
                df(x, xi, &mut ax[..n], &mut axi[..n]);
                dg(x, xi, &mut bx[..n], &mut bxi[..n]);
                let (fv, gv) = (f(x, xi), g(x, xi));
                for j in 0..n {
                    dx[j] = ax[j] * gv + fv * bx[j];
                    dxi[j] = axi[j] * gv + fv * bxi[j];
                }
            });
        }
        out.label = format!("({})*({})", self.label, other.label);
        out
    }

    pub fn add(&self, other: &Symbol) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let mut out = Self::new(self.dim, move |x, xi| f(x, xi) + g(x, xi));
        if let (Some(df), Some(dg)) = (&self.grad, &other.grad) {
            let (df, dg) = (df.clone(), dg.clone());
            let n = self.dim;
            out = out.with_gradient(move |x, xi, dx, dxi| {
                let mut bx = [C64::new(0.0, 0.0); MAX_DIM];
                let mut bxi = [C64::new(0.0, 0.0); MAX_DIM];
                df(x, xi, dx, dxi);
                dg(x, xi, &mut bx[..n], &mut bxi[..n]);
                for j in 0..n {
                    dx[j] += bx[j];
                    dxi[j] += bxi[j];
                }
            });
        }
        out.label = format!("({})+({})", self.label, other.label);
        out
    }

    /// Maximum of |f| over the phase-grid nodes.
    pub fn sup_on(&self, grid: &PhaseGrid) -> f64 {
        self.sample(grid).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Function on X x X: first slot position, second slot the kernel variable.
#[derive(Clone)]
pub struct KernelFunction {
    dim: usize,
    eval: PhaseFn,
    x_grad: Option<KernelGradFn>,
    label: String,
}

impl std::fmt::Debug for KernelFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl KernelFunction {
    pub fn new(dim: usize, f: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
            x_grad: None,
            label: String::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_, _| C64::new(0.0, 0.0)).with_label("zero")
    }

    pub fn with_x_gradient(mut self, g: impl Fn(&[f64], &[f64], &mut [C64]) + Send + Sync + 'static) -> Self {
        self.x_grad = Some(Arc::new(g));
        self
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

    #[inline]
    pub fn value(&self, x: &[f64], w: &[f64]) -> C64 {
        (self.eval)(x, w)
    }

    /// x-gradient: analytic when supplied, otherwise sixth-order central
    /// differences with step 1e-3.
    pub fn x_gradient(&self, x: &[f64], w: &[f64], out: &mut [C64]) {
        if let Some(g) = &self.x_grad {
            g(x, w, out);
            return;
        }
        let n = self.dim;
        let h = 1e-3;
        let coef = [(1.0, 3.0 / 4.0), (2.0, -3.0 / 20.0), (3.0, 1.0 / 60.0)];
        let mut p = [0.0; MAX_DIM];
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for &(k, c) in &coef {
                p[..n].copy_from_slice(&x[..n]);
                p[j] = x[j] + k * h;
                let fp = self.value(&p[..n], w);
                p[j] = x[j] - k * h;
                let fm = self.value(&p[..n], w);
                s += (fp - fm) * c;
            }
            out[j] = s / h;
        }
    }

    pub fn has_x_gradient(&self) -> bool {
        self.x_grad.is_some()
    }

    pub(crate) fn eval_arc(&self) -> PhaseFn {
        self.eval.clone()
    }

    pub fn conj_flip(&self) -> Self {
        let f = self.eval.clone();
        let n = self.dim;
        Self::new(n, move |x, w| {
            let mut m = [0.0; MAX_DIM];
            for j in 0..n {
                m[j] = -w[j];
            }
            f(x, &m[..n]).conj()
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let f = self.eval.clone();
        let mut out = Self::new(self.dim, move |x, w| f(x, w) * c);
        if let Some(g) = &self.x_grad {
            let g = g.clone();
            out = out.with_x_gradient(move |x, w, o| {
                g(x, w, o);
                o.iter_mut().for_each(|v| *v *= c);
            });
        }
        out
    }

    pub fn add(&self, other: &KernelFunction) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(self.dim, move |x, w| f(x, w) + g(x, w))
    }

    pub fn sub(&self, other: &KernelFunction) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(self.dim, move |x, w| f(x, w) - g(x, w))
    }

    /// Samples on (position node, lag node) pairs, row-major in position.
    pub fn sample(&self, grid: &PhaseGrid) -> Vec<C64> {
        let n = self.dim;
        let nm = grid.position().len();
        (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut x = [0.0; MAX_DIM];
                let mut w = [0.0; MAX_DIM];
                grid.position().node(idx / nm, &mut x);
                grid.lag_node(idx % nm, &mut w);
                self.value(&x[..n], &w[..n])
            })
            .collect()
    }
}

/// Exact trigonometric interpolation of phase-grid samples.
struct TrigInterpolant {
    grid: PhaseGrid,
    coeffs: Vec<C64>,
}

impl TrigInterpolant {
    fn new(grid: &PhaseGrid, samples: &[C64]) -> Self {
        let m = grid.points();
        let n = grid.dim();
        let dft = Dft::new(m);
        let mut c = samples.to_vec();
        dft.apply(&mut c, 2 * n, -1, false, true);
        let scale = 1.0 / grid.len() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        Self {
            grid: grid.clone(),
            coeffs: c,
        }
    }

    fn eval(&self, x: &[f64], xi: &[f64]) -> C64 {
        let m = self.grid.points();
        let n = self.grid.dim();
        let l = self.grid.position().half_width();
        let pmax = self.grid.momentum_spacing() * m as f64;
        // axis-wise phase bases: position axes have period 2L, momentum axes period M * d_eta
        let mut bases: Vec<Vec<C64>> = Vec::with_capacity(2 * n);
        for a in 0..2 * n {
            let (t, period, origin) = if a < n {
                (x[a], 2.0 * l, -l)
            } else {
                (xi[a - n], pmax, -0.5 * pmax)
            };
            let th = 2.0 * PI * (t - origin) / period;
            bases.push(
                (0..m)
                    .map(|k| {
                        let kk = k as f64 - (m / 2) as f64;
                        if k == 0 {
                            // Nyquist mode split symmetrically to stay real for real data
                            C64::new((kk * th).cos(), 0.0)
                        } else {
                            C64::from_polar(1.0, kk * th)
                        }
                    })
                    .collect(),
            );
        }
        let total = self.coeffs.len();
        let mut multi = vec![0usize; 2 * n];
        let mut s = C64::new(0.0, 0.0);
        for idx in 0..total {
            let mut r = idx;
            for a in (0..2 * n).rev() {
                multi[a] = r % m;
                r /= m;
            }
            let mut b = self.coeffs[idx];
            for a in 0..2 * n {
                b *= bases[a][multi[a]];
            }
            s += b;
        }
        s
    }
}

type MemoKey = [u64; MAX_DIM];

fn memo_key(x: &[f64]) -> MemoKey {
    let mut k = [0u64; MAX_DIM];
    for (a, v) in x.iter().enumerate() {
        k[a] = v.to_bits();
    }
    k
}

/// (F f)(x, eta) = sum_w dw^N e^{i w.eta} F(x, w) over the lag lattice.
pub fn partial_fourier(f: &KernelFunction, grid: &PhaseGrid) -> Result<Symbol> {
    check_dim(grid.dim(), f.dim())?;
    let n = grid.dim();
    let m = grid.points();
    let nm = grid.position().len();
    let dw = grid.lag_spacing().powi(n as i32);
    let dft = Dft::new(m);
    // grid samples through the FFT
    let lag_samples = f.sample(grid);
    let mut samples = Vec::with_capacity(grid.len());
    for p in 0..nm {
        let mut row = lag_samples[p * nm..(p + 1) * nm].to_vec();
        dft.apply(&mut row, n, 1, true, true);
        samples.extend(row.into_iter().map(|v| v * dw));
    }
    let g = grid.clone();
    let ff = f.eval_arc();
    let memo: Arc<DashMap<MemoKey, Arc<Vec<C64>>>> = Arc::new(DashMap::new());
    let eval = move |x: &[f64], eta: &[f64]| -> C64 {
        let key = memo_key(x);
        let row = match memo.get(&key) {
            Some(r) => r.clone(),
            None => {
                let mut w = [0.0; MAX_DIM];
                let r: Vec<C64> = (0..nm)
                    .map(|k| {
                        g.lag_node(k, &mut w);
                        ff(x, &w[..n])
                    })
                    .collect();
                let r = Arc::new(r);
                memo.insert(key, r.clone());
                r
            }
        };
        let mut w = [0.0; MAX_DIM];
        let mut s = C64::new(0.0, 0.0);
        for (k, v) in row.iter().enumerate() {
            g.lag_node(k, &mut w);
            let ph: f64 = (0..n).map(|a| w[a] * eta[a]).sum();
            s += v * C64::from_polar(1.0, ph);
        }
        s * dw
    };
    Ok(Symbol {
        dim: n,
        eval: Arc::new(eval),
        grad: None,
        cache: Some(Arc::new((grid.clone(), samples))),
        label: format!("F[{}]", f.label()),
    })
}

/// (F^{-1} f)(x, w) = (2 pi)^{-N} sum_eta d_eta^N e^{-i w.eta} f(x, eta).
///
/// Values at lattice points `w` reuse a per-`x` FFT of the momentum samples.
pub fn inverse_partial_fourier(f: &Symbol, grid: &PhaseGrid) -> Result<KernelFunction> {
    check_dim(grid.dim(), f.dim())?;
    let n = grid.dim();
    let m = grid.points();
    let nm = grid.position().len();
    let c = (grid.momentum_spacing() / (2.0 * PI)).powi(n as i32);
    let g = grid.clone();
    let dft = Dft::new(m);
    let ff = f.clone();
    let memo: Arc<DashMap<MemoKey, Arc<(Vec<C64>, Vec<C64>)>>> = Arc::new(DashMap::new());
    let cached = f.cache.clone().filter(|cg| &cg.0 == grid);
    let lag = grid.lag_spacing();
    let eval = move |x: &[f64], w: &[f64]| -> C64 {
        let key = memo_key(x);
        let entry = match memo.get(&key) {
            Some(e) => e.clone(),
            None => {
                let samples: Vec<C64> = match (&cached, g.position().index_of(x)) {
                    (Some(cg), Some(p)) => cg.1[p * nm..(p + 1) * nm].to_vec(),
                    _ => {
                        let mut eta = [0.0; MAX_DIM];
                        (0..nm)
                            .map(|k| {
                                g.momentum_node(k, &mut eta);
                                ff.value(x, &eta[..n])
                            })
                            .collect()
                    }
                };
                let mut t = samples.clone();
                dft.apply(&mut t, n, -1, true, false);
                let e = Arc::new((samples, t));
                memo.insert(key, e.clone());
                e
            }
        };
        // lattice lookup: index mod M of w / lag
        let mut flat = 0usize;
        let mut on_lattice = true;
        for &wa in &w[..n] {
            let t = wa / lag;
            let r = t.round();
            if (t - r).abs() > 1e-9 * (1.0 + r.abs()) {
                on_lattice = false;
                break;
            }
            flat = flat * m + (r as i64).rem_euclid(m as i64) as usize;
        }
        if on_lattice {
            return entry.1[flat] * c;
        }
        let mut eta = [0.0; MAX_DIM];
        let mut s = C64::new(0.0, 0.0);
        for (k, v) in entry.0.iter().enumerate() {
            g.momentum_node(k, &mut eta);
            let ph: f64 = (0..n).map(|a| w[a] * eta[a]).sum();
            s += v * C64::from_polar(1.0, -ph);
        }
        s * c
    };
    Ok(KernelFunction {
        dim: n,
        eval: Arc::new(eval),
        x_grad: None,
        label: format!("Finv[{}]", f.label()),
    })
}

/// sum_w (max_x |F(x, w)|) dw^N over the lag lattice and position grid.
pub fn norm_1_inf(f: &KernelFunction, grid: &PhaseGrid) -> f64 {
    let n = grid.dim();
    let nm = grid.position().len();
    let dw = grid.lag_spacing().powi(n as i32);
    (0..nm)
        .into_par_iter()
        .map(|k| {
            let mut w = [0.0; MAX_DIM];
            let mut x = [0.0; MAX_DIM];
            grid.lag_node(k, &mut w);
            (0..nm)
                .map(|p| {
                    grid.position().node(p, &mut x);
                    f.value(&x[..n], &w[..n]).norm()
                })
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        * dw
}

/// (sigma^B)_X(Y, Z) = sum_j (z_j eta_j - y_j zeta_j) + sum_jk B_jk(x) y_j z_k.
pub fn symplectic_form(
    b: &MagneticField,
    x: &[f64],
    y: (&[f64], &[f64]),
    z: (&[f64], &[f64]),
) -> Result<f64> {
    let n = b.dim();
    for p in [x, y.0, y.1, z.0, z.1] {
        check_dim(n, p.len())?;
    }
    let mut s = 0.0;
    for j in 0..n {
        s += z.0[j] * y.1[j] - y.0[j] * z.1[j];
    }
    Ok(s + b.pair(x, y.0, z.0))
}

/// Spectral partial derivatives of phase-grid samples along all 2N axes.
/// Returns (d/dx_j, d/dxi_j) arrays and the relative spectral tail energy.
pub fn spectral_gradient(grid: &PhaseGrid, samples: &[C64]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, f64) {
    let n = grid.dim();
    let m = grid.points();
    let dft = Dft::new(m);
    let mut spec = samples.to_vec();
    dft.apply(&mut spec, 2 * n, -1, false, false);
    let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
    let mut tail = 0.0;
    let mut multi = vec![0usize; 2 * n];
    let signed = |k: usize| -> i64 {
        if k < m / 2 {
            k as i64
        } else {
            k as i64 - m as i64
        }
    };
    for (idx, v) in spec.iter().enumerate() {
        unflatten(idx, m, 2 * n, &mut multi);
        if multi.iter().any(|&k| signed(k).unsigned_abs() as usize > 3 * m / 8) {
            tail += v.norm_sqr();
        }
    }
    let tail_ratio = if total > 0.0 { tail / total } else { 0.0 };
    let l = grid.position().half_width();
    let pbox = grid.momentum_spacing() * m as f64;
    let mut derivs = Vec::with_capacity(2 * n);
    for axis in 0..2 * n {
        let period = if axis < n { 2.0 * l } else { pbox };
        let mut d = spec.clone();
        for (idx, v) in d.iter_mut().enumerate() {
            unflatten(idx, m, 2 * n, &mut multi);
            let k = multi[axis];
            let kk = if k == m / 2 { 0 } else { signed(k) };
            *v *= C64::new(0.0, 2.0 * PI * kk as f64 / period);
        }
        dft.apply(&mut d, 2 * n, 1, false, false);
        let s = 1.0 / grid.len() as f64;
        d.iter_mut().for_each(|v| *v *= s);
        derivs.push(d);
    }
    let dxi = derivs.split_off(n);
    (derivs, dxi, tail_ratio)
}

/// Magnetic Poisson bracket
/// {f,g}^B = sum_j (d_x_j f d_xi_j g - d_xi_j f d_x_j g) + sum_jk B_jk d_xi_j f d_xi_k g,
/// normalized so that `(1/(i hbar)) [Op(f), Op(g)] -> Op({f,g}^B)`.
///
/// Uses analytic gradients when both symbols carry them; otherwise spectral
/// differentiation of grid samples, with an aliasing warning when the
/// spectral tail exceeds 1e-8 of the total energy.
pub fn poisson_bracket(b: &MagneticField, f: &Symbol, g: &Symbol, grid: &PhaseGrid) -> Result<Flagged<Symbol>> {
    let n = grid.dim();
    check_dim(n, b.dim())?;
    check_dim(n, f.dim())?;
    check_dim(n, g.dim())?;
    if f.has_gradient() && g.has_gradient() {
        let (f2, g2, b2) = (f.clone(), g.clone(), b.clone());
        let s = Symbol::new(n, move |x, xi| {
            let z = C64::new(0.0, 0.0);
            let (mut fx, mut fxi, mut gx, mut gxi) = ([z; MAX_DIM], [z; MAX_DIM], [z; MAX_DIM], [z; MAX_DIM]);
            f2.gradient(x, xi, &mut fx[..n], &mut fxi[..n]);
            g2.gradient(x, xi, &mut gx[..n], &mut gxi[..n]);
            bracket_from_parts(&b2, x, &fx[..n], &fxi[..n], &gx[..n], &gxi[..n])
        })
        .with_label(format!("{{{},{}}}", f.label(), g.label()));
        return Ok(Flagged::clean(s.with_samples(grid)));
    }
    let fs = f.sample(grid);
    let gs = g.sample(grid);
    let (fx, fxi, tf) = spectral_gradient(grid, &fs);
    let (gx, gxi, tg) = spectral_gradient(grid, &gs);
    let mut warnings = Vec::new();
    if tf.max(tg) > 1e-8 {
        warnings.push(format!("aliasing: spectral tail fraction {:.3e}", tf.max(tg)));
    }
    let out: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut x = [0.0; MAX_DIM];
            let mut xi = [0.0; MAX_DIM];
            grid.point(idx, &mut x, &mut xi);
            let pick = |v: &Vec<Vec<C64>>| {
                let mut a = [C64::new(0.0, 0.0); MAX_DIM];
                for j in 0..n {
                    a[j] = v[j][idx];
                }
                a
            };
            bracket_from_parts(b, &x[..n], &pick(&fx)[..n], &pick(&fxi)[..n], &pick(&gx)[..n], &pick(&gxi)[..n])
        })
        .collect();
    let s = Symbol::from_samples(grid, out)?.with_label(format!("{{{},{}}}", f.label(), g.label()));
    Ok(Flagged { value: s, warnings })
}

#[inline]
fn bracket_from_parts(b: &MagneticField, x: &[f64], fx: &[C64], fxi: &[C64], gx: &[C64], gxi: &[C64]) -> C64 {
    let n = x.len();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        s += fx[j] * gxi[j] - fxi[j] * gx[j];
    }
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let bjk = b.component(j, k, x);
                if bjk != 0.0 {
                    s += fxi[j] * gxi[k] * bjk;
                }
            }
        }
    }
    s
}
