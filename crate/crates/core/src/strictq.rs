//! Strict-quantization checks: hbar sweeps of the Rieffel, von Neumann and
//! Dirac conditions, the classical product and kernel bracket, and the
//! pentagon phase limit.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::berezin::{sigma_map, CoherentFamily, FiducialVector};
use crate::error::{check_dim, Error, Result};
use crate::fields::{flux_pentagon, MagneticField, VectorPotential};
use crate::phasespace::{check_hbar, norm_1_inf, poisson_bracket, BoxGrid, KernelFunction, PhaseGrid, Symbol};
use crate::weyl::{operator_norm, weyl_op, OperatorMatrix};
use crate::{Flagged, C64, MAX_DIM};

/// `(F o_0 G)(x, y) = sum_z dw^N F(x, z) G(x, y - z)` over the lag lattice.
pub fn classical_product(f: &KernelFunction, g: &KernelFunction, grid: &PhaseGrid) -> Result<KernelFunction> {
    let n = grid.dim();
    check_dim(n, f.dim())?;
    check_dim(n, g.dim())?;
    let lags = lag_nodes(grid);
    let dw = grid.lag_spacing().powi(n as i32);
    let label = format!("{}*{}", f.label(), g.label());
    let (f, g) = (f.clone(), g.clone());
    Ok(KernelFunction::new(n, move |x, y| {
        let mut r = [0.0; MAX_DIM];
        let mut s = C64::new(0.0, 0.0);
        for z in lags.iter() {
            for c in 0..n {
                r[c] = y[c] - z[c];
            }
            s += f.value(x, &z[..n]) * g.value(x, &r[..n]);
        }
        s * dw
    })
    .with_label(label))
}

fn lag_nodes(grid: &PhaseGrid) -> std::sync::Arc<Vec<[f64; MAX_DIM]>> {
    std::sync::Arc::new(
        (0..grid.position().len())
            .map(|k| {
                let mut w = [0.0; MAX_DIM];
                grid.lag_node(k, &mut w);
                w
            })
            .collect(),
    )
}

/// Largest |F| on the outer lag shell relative to the largest |F|, sampled
/// along the position grid.
fn lag_tail(f: &KernelFunction, grid: &PhaseGrid) -> f64 {
    let n = grid.dim();
    let m = grid.points();
    let pos = grid.position();
    let mut x = [0.0; MAX_DIM];
    let mut w = [0.0; MAX_DIM];
    let mut multi = [0usize; MAX_DIM];
    let (mut edge, mut all) = (0.0f64, 0.0f64);
    for p in (0..pos.len()).step_by((pos.len() / 64).max(1)) {
        pos.node(p, &mut x);
        for k in 0..pos.len() {
            crate::fft::unflatten(k, m, n, &mut multi);
            grid.lag_node(k, &mut w);
            let v = f.value(&x[..n], &w[..n]).norm();
            all = all.max(v);
            if multi[..n].iter().any(|&i| i == 0 || i == m - 1) {
                edge = edge.max(v);
            }
        }
    }
    if all > 0.0 {
        edge / all
    } else {
        0.0
    }
}

/// Kernel-side magnetic Poisson bracket
/// `sum_j [i (d_j F) o (Y_j G) - i (Y_j F) o (d_j G)] - sum_jk B_jk (Y_j F) o (Y_k G)`,
/// whose partial Fourier transform is the symbol bracket.
pub fn kernel_bracket(
    b: &MagneticField,
    f: &KernelFunction,
    g: &KernelFunction,
    grid: &PhaseGrid,
) -> Result<Flagged<KernelFunction>> {
    let n = grid.dim();
    check_dim(n, b.dim())?;
    check_dim(n, f.dim())?;
    check_dim(n, g.dim())?;
    let mut warnings = Vec::new();
    for (name, k) in [("first", f), ("second", g)] {
        let t = lag_tail(k, grid);
        if t > 1e-8 {
            warnings.push(format!("{name} kernel has relative weight {t:.2e} on the lag boundary"));
        }
    }
    let lags = lag_nodes(grid);
    let dw = grid.lag_spacing().powi(n as i32);
    let label = format!("{{{},{}}}", f.label(), g.label());
    let (b, f, g) = (b.clone(), f.clone(), g.clone());
    let i = C64::new(0.0, 1.0);
    let k = KernelFunction::new(n, move |x, y| {
        let mut r = [0.0; MAX_DIM];
        let mut df = [C64::new(0.0, 0.0); MAX_DIM];
        let mut dg = [C64::new(0.0, 0.0); MAX_DIM];
        let mut bm = [[0.0; MAX_DIM]; MAX_DIM];
        for j in 0..n {
            for l in 0..n {
                bm[j][l] = b.component(j, l, x);
            }
        }
        let mut s = C64::new(0.0, 0.0);
        for z in lags.iter() {
            for c in 0..n {
                r[c] = y[c] - z[c];
            }
            let fv = f.value(x, &z[..n]);
            let gv = g.value(x, &r[..n]);
            f.x_gradient(x, &z[..n], &mut df[..n]);
            g.x_gradient(x, &r[..n], &mut dg[..n]);
            let mut t = C64::new(0.0, 0.0);
            for j in 0..n {
                t += i * df[j] * r[j] * gv - i * z[j] * fv * dg[j];
                for l in 0..n {
                    t -= bm[j][l] * z[j] * r[l] * fv * gv;
                }
            }
            s += t;
        }
        s * dw
    })
    .with_label(label);
    Ok(Flagged { value: k, warnings })
}

/// Pentagon phase `w_1` (which = 1) or `w_2` (which = 2).
#[allow(clippy::too_many_arguments)]
pub fn phase_w(
    b: &MagneticField,
    which: u8,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    a: &[f64],
    bb: &[f64],
    hbar: f64,
) -> Result<C64> {
    let n = b.dim();
    for p in [x, y, z, a, bb] {
        check_dim(n, p.len())?;
    }
    check_hbar(hbar)?;
    let s = hbar.sqrt();
    let h2 = 0.5 * hbar;
    let pt = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..n).map(f).collect() };
    let verts: [Vec<f64>; 5] = match which {
        1 => [
            pt(&|j| x[j] - h2 * y[j]),
            pt(&|j| x[j] - s * a[j] - h2 * (y[j] - z[j])),
            pt(&|j| x[j] - h2 * y[j] + hbar * z[j]),
            pt(&|j| x[j] - s * bb[j] + h2 * z[j]),
            pt(&|j| x[j] + h2 * y[j]),
        ],
        2 => [
            pt(&|j| x[j] - h2 * y[j]),
            pt(&|j| x[j] - s * bb[j] - h2 * z[j]),
            pt(&|j| x[j] + h2 * y[j] - hbar * z[j]),
            pt(&|j| x[j] - s * a[j] + h2 * (y[j] - z[j])),
            pt(&|j| x[j] + h2 * y[j]),
        ],
        _ => return Err(Error::OutOfRange { index: which as usize, range: 3 }),
    };
    let flux = flux_pentagon(b, [&verts[0], &verts[1], &verts[2], &verts[3], &verts[4]])?;
    Ok(Complex64::from_polar(1.0, -flux / hbar))
}

/// Neville extrapolation to `t = 0` through all given points.
pub fn extrapolate_to_zero(ts: &[f64], qs: &[C64]) -> C64 {
    let mut p = qs.to_vec();
    let k = ts.len();
    for m in 1..k {
        for i in 0..k - m {
            let (ti, tj) = (ts[i], ts[i + m]);
            p[i] = (p[i + 1] * ti - p[i] * tj) / (ti - tj);
        }
    }
    p[0]
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseLemmaReport {
    pub hbar_list: Vec<f64>,
    /// `(w_1 - w_2) / (i hbar)` per hbar, as (re, im).
    pub values: Vec<(f64, f64)>,
    pub limit: (f64, f64),
    pub target: f64,
    pub error: f64,
    pub pass: bool,
}

pub const PHASE_LEMMA_TOL: f64 = 1e-3;
const RICHARDSON_POINTS: usize = 4;

/// Sweeps `(w_1 - w_2) / (i hbar)` and extrapolates in `sqrt(hbar)` over the
/// last few points, comparing to `-sum_jk z_j (y_k - z_k) B_jk(x)`.
#[allow(clippy::too_many_arguments)]
pub fn phase_lemma_check(
    b: &MagneticField,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    a: &[f64],
    bb: &[f64],
    hbar_list: &[f64],
) -> Result<PhaseLemmaReport> {
    if hbar_list.len() < 2 {
        return Err(Error::InvalidGrid("phase lemma needs at least two hbar values".into()));
    }
    let n = b.dim();
    let mut values = Vec::with_capacity(hbar_list.len());
    for &h in hbar_list {
        let w1 = phase_w(b, 1, x, y, z, a, bb, h)?;
        let w2 = phase_w(b, 2, x, y, z, a, bb, h)?;
        values.push((w1 - w2) / C64::new(0.0, h));
    }
    let mut target = 0.0;
    for j in 0..n {
        for k in 0..n {
            target -= z[j] * (y[k] - z[k]) * b.component(j, k, x);
        }
    }
    let k = RICHARDSON_POINTS.min(values.len());
    let start = values.len() - k;
    let ts: Vec<f64> = hbar_list[start..].iter().map(|h| h.sqrt()).collect();
    let limit = extrapolate_to_zero(&ts, &values[start..]);
    let error = (limit - target).norm();
    Ok(PhaseLemmaReport {
        hbar_list: hbar_list.to_vec(),
        values: values.iter().map(|v| (v.re, v.im)).collect(),
        limit: (limit.re, limit.im),
        target,
        error,
        pass: error <= PHASE_LEMMA_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Rieffel,
    VonNeumann,
    Dirac,
    Semiclassical,
    Sigma,
    PhaseLemma,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Rieffel => "rieffel",
            Axiom::VonNeumann => "vonneumann",
            Axiom::Dirac => "dirac",
            Axiom::Semiclassical => "semiclassical",
            Axiom::Sigma => "sigma",
            Axiom::PhaseLemma => "phaselemma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rieffel" => Axiom::Rieffel,
            "vonneumann" => Axiom::VonNeumann,
            "dirac" => Axiom::Dirac,
            "semiclassical" => Axiom::Semiclassical,
            "sigma" => Axiom::Sigma,
            "phaselemma" => Axiom::PhaseLemma,
            _ => return Err(crate::error::parse_err("axiom", format!("unknown axiom {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub hbar: f64,
    pub points_per_axis: usize,
    pub norm: f64,
    pub defect: f64,
    pub runtime_ms: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub rule: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub axiom: Axiom,
    pub field_preset: String,
    pub gauge: String,
    pub fiducial: String,
    pub hbar_list: Vec<f64>,
    pub records: Vec<SweepRecord>,
    pub verdict: Verdict,
}

/// Defects below this are treated as zero by the monotonicity rules.
pub const DEFECT_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerdictRules {
    pub rieffel_band: f64,
    pub vonneumann_ratio: f64,
    pub dirac_ratio: f64,
    pub semiclassical_ratio: f64,
    pub sigma_fraction: f64,
}

impl Default for VerdictRules {
    fn default() -> Self {
        Self {
            rieffel_band: 0.05,
            vonneumann_ratio: 0.1,
            dirac_ratio: 0.2,
            semiclassical_ratio: 1.0 / 3.0,
            sigma_fraction: 0.05,
        }
    }
}

fn strictly_decreasing(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[1] < w[0] || w[0].max(w[1]) <= DEFECT_FLOOR)
}

fn ratio_verdict(defects: &[f64], ratio: f64, what: &str) -> Verdict {
    let (first, last) = (defects[0], defects[defects.len() - 1]);
    let dec = strictly_decreasing(defects);
    let small = last <= DEFECT_FLOOR || last <= ratio * first;
    Verdict {
        pass: dec && small,
        rule: format!(
            "{what}: strictly decreasing ({dec}) and final <= {ratio:.4} x initial ({:.3e} vs {:.3e})",
            last,
            ratio * first
        ),
    }
}

/// Rieffel: gaps between successive norms shrink and the final norm is
/// within the band of `sup |f|`.
pub fn rieffel_verdict(norms: &[f64], sup: f64, band: f64) -> Verdict {
    let gaps: Vec<f64> = norms.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrinking = gaps.len() < 2 || strictly_decreasing(&gaps);
    let last = *norms.last().unwrap_or(&0.0);
    let close = (last - sup).abs() <= band * sup.abs().max(DEFECT_FLOOR);
    Verdict {
        pass: shrinking && close,
        rule: format!(
            "successive gaps shrinking ({shrinking}) and final norm {last:.6} within {:.0}% of sup {sup:.6}",
            band * 100.0
        ),
    }
}

/// Grid per hbar: fixed box, points chosen so the momentum window covers the
/// symbols and the position spacing resolves the coherent states.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridPolicy {
    pub half_width: f64,
    pub xi_radius: f64,
    pub max_points: usize,
    pub fixed_points: Option<usize>,
}

impl GridPolicy {
    /// Box sized to contain an `x_radius` ball plus five coherent widths at
    /// the largest hbar.
    pub fn for_extent(x_radius: f64, xi_radius: f64, hbar_max: f64, max_points: usize) -> Self {
        Self {
            half_width: x_radius + 5.0 * hbar_max.sqrt(),
            xi_radius,
            max_points,
            fixed_points: None,
        }
    }

    pub fn fixed(half_width: f64, points: usize) -> Self {
        Self {
            half_width,
            xi_radius: 0.0,
            max_points: points,
            fixed_points: Some(points),
        }
    }

    pub fn points_for(&self, hbar: f64) -> (usize, Option<String>) {
        if let Some(m) = self.fixed_points {
            return (m, None);
        }
        let l = self.half_width;
        let s = hbar.sqrt();
        // momentum half-range pi hbar / h must reach xi_radius + 5 sqrt(hbar)
        let h_mom = std::f64::consts::PI * hbar / (self.xi_radius + 5.0 * s);
        let h_pos = s / 3.0;
        let h = h_mom.min(h_pos);
        let mut m = (2.0 * l / h).ceil() as usize;
        m += m % 2;
        let m = m.max(4);
        if m > self.max_points {
            let cap = self.max_points - self.max_points % 2;
            return (
                cap,
                Some(format!("hbar={hbar}: {m} points per axis needed, capped at {cap}")),
            );
        }
        (m, None)
    }

    pub fn grid(&self, dim: usize, hbar: f64) -> Result<(PhaseGrid, Option<String>)> {
        let (m, w) = self.points_for(hbar);
        Ok((PhaseGrid::new(BoxGrid::new(dim, self.half_width, m)?, hbar)?, w))
    }
}

/// Shared inputs of an operator-level sweep.
#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub field_preset: String,
    pub gauge: String,
    pub b: MagneticField,
    pub a: VectorPotential,
    pub v: FiducialVector,
    pub hbar_list: Vec<f64>,
    pub policy: GridPolicy,
    pub rules: VerdictRules,
}

impl SweepSetup {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    fn validate(&self) -> Result<()> {
        check_dim(self.dim(), self.a.dim())?;
        check_dim(self.dim(), self.v.dim())?;
        if self.hbar_list.len() < 2 {
            return Err(Error::InvalidGrid("a sweep needs at least two hbar values".into()));
        }
        for w in self.hbar_list.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidGrid("hbar list must be strictly decreasing".into()));
            }
        }
        for &h in &self.hbar_list {
            check_hbar(h)?;
        }
        Ok(())
    }

    /// Runs `step` at each hbar in order; `step` returns (norm, defect, warnings).
    fn run<F>(&self, mut step: F) -> Result<Vec<SweepRecord>>
    where
        F: FnMut(&PhaseGrid) -> Result<(f64, f64, Vec<String>)>,
    {
        self.validate()?;
        let mut out = Vec::with_capacity(self.hbar_list.len());
        for &h in &self.hbar_list {
            let t0 = Instant::now();
            let (grid, cap) = self.policy.grid(self.dim(), h)?;
            let (norm, defect, mut warnings) = step(&grid)?;
            if let Some(c) = cap {
                warnings.insert(0, c);
            }
            out.push(SweepRecord {
                hbar: h,
                points_per_axis: grid.points(),
                norm,
                defect,
                runtime_ms: t0.elapsed().as_secs_f64() * 1e3,
                warnings,
            });
        }
        Ok(out)
    }

    fn report(&self, axiom: Axiom, records: Vec<SweepRecord>, verdict: Verdict) -> SweepReport {
        SweepReport {
            axiom,
            field_preset: self.field_preset.clone(),
            gauge: self.gauge.clone(),
            fiducial: self.v.label().to_string(),
            hbar_list: self.hbar_list.clone(),
            records,
            verdict,
        }
    }

    fn family(&self, grid: &PhaseGrid) -> Result<CoherentFamily> {
        CoherentFamily::new(&self.a, &self.v, grid)
    }
}

fn berezin(fam: &CoherentFamily, f: &Symbol, warnings: &mut Vec<String>) -> Result<OperatorMatrix> {
    let r = fam.berezin(f)?;
    for w in r.warnings {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    Ok(r.value)
}

/// Records `|B(f)|` per hbar.
pub fn rieffel_sweep(setup: &SweepSetup, f: &Symbol) -> Result<SweepReport> {
    let mut sup = 0.0f64;
    let records = setup.run(|grid| {
        let mut w = Vec::new();
        let bf = berezin(&setup.family(grid)?, f, &mut w)?;
        sup = f.sup_on(grid);
        let norm = operator_norm(&bf)?;
        Ok((norm, (norm - sup).abs(), w))
    })?;
    let norms: Vec<f64> = records.iter().map(|r| r.norm).collect();
    let verdict = rieffel_verdict(&norms, sup, setup.rules.rieffel_band);
    Ok(setup.report(Axiom::Rieffel, records, verdict))
}

/// Records `|(B(f)B(g) + B(g)B(f))/2 - B(fg)|` per hbar; `norm` is `|B(fg)|`.
pub fn vonneumann_sweep(setup: &SweepSetup, f: &Symbol, g: &Symbol) -> Result<SweepReport> {
    let fg = f.mul(g);
    let records = setup.run(|grid| {
        let mut w = Vec::new();
        let fam = setup.family(grid)?;
        let bf = berezin(&fam, f, &mut w)?;
        let bg = berezin(&fam, g, &mut w)?;
        let bfg = berezin(&fam, &fg, &mut w)?;
        let d = bf.sym_product(&bg).sub(&bfg);
        Ok((operator_norm(&bfg)?, operator_norm(&d)?, w))
    })?;
    let defects: Vec<f64> = records.iter().map(|r| r.defect).collect();
    let verdict = ratio_verdict(&defects, setup.rules.vonneumann_ratio, "von Neumann defect");
    Ok(setup.report(Axiom::VonNeumann, records, verdict))
}

/// Records `|[B(f), B(g)]/(i hbar) - B({f,g}^B)|` per hbar; `norm` is
/// `|B({f,g}^B)|`.
pub fn dirac_sweep(setup: &SweepSetup, f: &Symbol, g: &Symbol) -> Result<SweepReport> {
    let records = setup.run(|grid| {
        let mut w = Vec::new();
        let fam = setup.family(grid)?;
        let br = poisson_bracket(&setup.b, f, g, grid)?;
        w.extend(br.warnings);
        let bf = berezin(&fam, f, &mut w)?;
        let bg = berezin(&fam, g, &mut w)?;
        let bb = berezin(&fam, &br.value, &mut w)?;
        let c = bf.commutator(&bg).scale(C64::new(0.0, -1.0 / grid.hbar()));
        let d = c.sub(&bb);
        Ok((operator_norm(&bb)?, operator_norm(&d)?, w))
    })?;
    let defects: Vec<f64> = records.iter().map(|r| r.defect).collect();
    let verdict = ratio_verdict(&defects, setup.rules.dirac_ratio, "Dirac defect");
    Ok(setup.report(Axiom::Dirac, records, verdict))
}

/// Records `|B(f) - Op(f)|` per hbar; `norm` is `|Op(f)|`.
pub fn semiclassical_sweep(setup: &SweepSetup, f: &Symbol) -> Result<SweepReport> {
    let records = setup.run(|grid| {
        let mut w = Vec::new();
        let bf = berezin(&setup.family(grid)?, f, &mut w)?;
        let op = weyl_op(&setup.a, f, grid)?;
        Ok((operator_norm(&op)?, operator_norm(&bf.sub(&op))?, w))
    })?;
    let defects: Vec<f64> = records.iter().map(|r| r.defect).collect();
    let verdict = ratio_verdict(&defects, setup.rules.semiclassical_ratio, "Berezin-Weyl distance");
    Ok(setup.report(Axiom::Semiclassical, records, verdict))
}

/// Records `|Sigma(F) - F|_{1,inf}` per hbar; `norm` is `|F|_{1,inf}`.
pub fn sigma_sweep(setup: &SweepSetup, f: &KernelFunction) -> Result<SweepReport> {
    let records = setup.run(|grid| {
        let s = sigma_map(&setup.b, &setup.v, grid.hbar(), f, grid.position())?;
        let d = s.sub(f);
        Ok((norm_1_inf(f, grid), norm_1_inf(&d, grid), Vec::new()))
    })?;
    let defects: Vec<f64> = records.iter().map(|r| r.defect).collect();
    let norm = records.last().map(|r| r.norm).unwrap_or(0.0);
    let dec = strictly_decreasing(&defects);
    let last = *defects.last().unwrap_or(&0.0);
    let frac = setup.rules.sigma_fraction;
    let verdict = Verdict {
        pass: dec && (last <= DEFECT_FLOOR || last < frac * norm),
        rule: format!(
            "Sigma distance strictly decreasing ({dec}) and final < {frac} x |F|_1,inf ({last:.3e} vs {:.3e})",
            frac * norm
        ),
    };
    Ok(setup.report(Axiom::Sigma, records, verdict))
}

/// Phase-lemma sweep as a report: `norm` is `|q(hbar)|`, `defect` is
/// `|q(hbar) - target|`; the verdict uses the extrapolated limit.
pub fn phase_lemma_report(
    setup_labels: (&str, &str, &str),
    r: &PhaseLemmaReport,
) -> SweepReport {
    let records = r
        .hbar_list
        .iter()
        .zip(&r.values)
        .map(|(&h, &(re, im))| SweepRecord {
            hbar: h,
            points_per_axis: 0,
            norm: re.hypot(im),
            defect: C64::new(re - r.target, im).norm(),
            runtime_ms: 0.0,
            warnings: Vec::new(),
        })
        .collect();
    SweepReport {
        axiom: Axiom::PhaseLemma,
        field_preset: setup_labels.0.into(),
        gauge: setup_labels.1.into(),
        fiducial: setup_labels.2.into(),
        hbar_list: r.hbar_list.clone(),
        records,
        verdict: Verdict {
            pass: r.pass,
            rule: format!(
                "extrapolated limit ({:.6e}, {:.6e}) within {PHASE_LEMMA_TOL:e} of {:.6e}",
                r.limit.0, r.limit.1, r.target
            ),
        },
    }
}

/// Gaussian pair used by the default sweeps: unit width, centers offset in
/// both position and momentum so that the magnetic term of the bracket is
/// exercised when `N = 2`.
pub fn standard_pair(dim: usize) -> (Symbol, Symbol) {
    let mut cf = vec![0.0; 2 * dim];
    let mut cg = vec![0.0; 2 * dim];
    cf[0] = 0.5;
    cg[0] = -0.5;
    cg[dim] = 0.5;
    if dim > 1 {
        cf[dim + 1] = 0.5;
    }
    (
        crate::presets::gaussian(dim, &cf, 1.0),
        crate::presets::gaussian(dim, &cg, 1.0),
    )
}

/// Position and momentum radii containing the standard pair to about 1e-8.
pub const STANDARD_PAIR_RADIUS: (f64, f64) = (6.5, 6.5);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomial_limit() {
        let ts = [0.5, 0.25, 0.125, 0.0625];
        let qs: Vec<C64> = ts.iter().map(|t| C64::new(2.0 + 3.0 * t - t * t + 0.5 * t * t * t, 1.0)).collect();
        let l = extrapolate_to_zero(&ts, &qs);
        assert!((l - C64::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_field_phases_are_one() {
        let b = MagneticField::zero(2).unwrap();
        let p = [0.3, -0.2];
        for which in [1, 2] {
            let w = phase_w(&b, which, &p, &p, &p, &p, &p, 0.25).unwrap();
            assert!((w - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn verdict_rules() {
        assert!(ratio_verdict(&[1.0, 0.5, 0.2, 0.05], 0.1, "x").pass);
        assert!(!ratio_verdict(&[1.0, 0.5, 0.6, 0.05], 0.1, "x").pass);
        assert!(!ratio_verdict(&[1.0, 0.5, 0.2, 0.15], 0.1, "x").pass);
        assert!(ratio_verdict(&[1e-12, 2e-12, 1e-12], 0.1, "x").pass);
        assert!(rieffel_verdict(&[0.8, 0.9, 0.95, 0.97], 1.0, 0.05).pass);
        assert!(!rieffel_verdict(&[0.5, 0.6, 0.7, 0.8], 1.0, 0.05).pass);
    }
}
