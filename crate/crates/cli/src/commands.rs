//! Subcommand implementations. Each returns whether its verdict passed.

use std::time::Instant;

use anyhow::{bail, Result};
use magberezin::bargmann::{bargmann_check, BargmannSpace};
use magberezin::berezin::{coherent_vector, CoherentFamily};
use magberezin::fields::{circulation, flux_triangle, probe_points, verify_potential};
use magberezin::io::{write_husimi_csv, write_kernel_csv, write_magw, write_matrix_csv, CSV_MATRIX_LIMIT};
use magberezin::linalg::hermitian_eigh;
use magberezin::presets::random_gaussian_kernel;
use magberezin::report::sweep_csv;
use magberezin::strictq::*;
use magberezin::weyl::weyl_op;
use magberezin::{OperatorMatrix, PhaseGrid, Symbol, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{parse_state, Resolved, StateSpec};
use crate::output::{csv_text, Sink};

#[derive(Serialize)]
struct Check {
    check: String,
    defect: f64,
    tolerance: f64,
    pass: bool,
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Curl check of the potential and Stokes check on seeded triangles.
pub fn fields_verify(r: &Resolved, sink: &mut Sink) -> Result<bool> {
    let tol = &r.config.tolerances;
    let n = r.dim();
    let curl = verify_potential(&r.a, &r.b, &probe_points(n), tol.curl)?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.config.seed);
    let mut stokes: f64 = 0.0;
    for _ in 0..16 {
        let (x, y, z) = (random_point(&mut rng, n), random_point(&mut rng, n), random_point(&mut rng, n));
        let lhs = circulation(&r.a, &x, &z)? + circulation(&r.a, &z, &y)? + circulation(&r.a, &y, &x)?;
        stokes = stokes.max((lhs - flux_triangle(&r.b, &x, &z, &y)?).abs());
    }
    let checks = vec![
        Check {
            check: "curl".into(),
            defect: curl.max_defect,
            tolerance: tol.curl,
            pass: curl.pass,
        },
        Check {
            check: "stokes".into(),
            defect: stokes,
            tolerance: tol.stokes,
            pass: stokes <= tol.stokes,
        },
    ];
    let pass = checks.iter().all(|c| c.pass);
    #[derive(Serialize)]
    struct Out<'a> {
        checks: &'a [Check],
        curl_worst_point: Vec<f64>,
        pass: bool,
    }
    let out = Out {
        checks: &checks,
        curl_worst_point: curl.worst_point,
        pass,
    };
    sink.report("fields_verify", "fields verify", &r.config, &out)?;
    sink.csv("fields_verify.csv", &r.config, &csv_text(&checks)?)?;
    Ok(pass)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantization {
    Weyl,
    Berezin,
}

impl Quantization {
    fn name(self) -> &'static str {
        match self {
            Quantization::Weyl => "weyl",
            Quantization::Berezin => "berezin",
        }
    }
}

fn quantize_op(r: &Resolved, q: Quantization, f: &Symbol, grid: &PhaseGrid, warnings: &mut Vec<String>) -> Result<OperatorMatrix> {
    Ok(match q {
        Quantization::Weyl => weyl_op(&r.a, f, grid)?,
        Quantization::Berezin => {
            let fam = CoherentFamily::new(&r.a, &r.v, grid)?;
            let op = fam.berezin(f)?;
            warnings.extend(op.warnings);
            op.value
        }
    })
}

pub fn quantize(r: &Resolved, q: Quantization, sink: &mut Sink) -> Result<bool> {
    let grid = r.phase_grid(r.first_hbar())?;
    let f = r.symbol(0, "gaussian:0,1")?;
    let mut warnings = Vec::new();
    let op = quantize_op(r, q, &f, &grid, &mut warnings)?;
    let eig = op.eigenvalues()?;
    let smax = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let samples = f.sample(&grid);
    let nonneg = samples.iter().all(|s| s.re >= 0.0 && s.im.abs() <= 1e-14 * s.re.abs().max(1.0));
    let min_eig = eig.first().copied().unwrap_or(0.0);
    let positive = min_eig >= -r.config.tolerances.positivity * smax;
    // positivity is only a verdict for the Berezin map of a nonnegative symbol
    let pass = !(q == Quantization::Berezin && nonneg) || positive;
    #[derive(Serialize)]
    struct Out {
        quantization: &'static str,
        symbol: String,
        hbar: f64,
        points_per_axis: usize,
        norm: f64,
        trace: (f64, f64),
        hermitian_defect: f64,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
        symbol_nonnegative: bool,
        positive: bool,
        pass: bool,
        warnings: Vec<String>,
    }
    let tr = op.trace();
    let out = Out {
        quantization: q.name(),
        symbol: f.label().to_string(),
        hbar: grid.hbar(),
        points_per_axis: grid.points(),
        norm: op.norm()?,
        trace: (tr.re, tr.im),
        hermitian_defect: op.hermitian_defect(),
        min_eigenvalue: min_eig,
        max_eigenvalue: eig.last().copied().unwrap_or(0.0),
        symbol_nonnegative: nonneg,
        positive,
        pass,
        warnings,
    };
    let stem = format!("quantize_{}", q.name());
    sink.report(&stem, &format!("quantize {}", q.name()), &r.config, &out)?;
    let mut buf = Vec::new();
    write_magw(&mut buf, op.entries(), grid.hbar())?;
    sink.raw(&format!("{stem}.magw"), &buf)?;
    if op.entries().nrows() <= CSV_MATRIX_LIMIT {
        let mut body = Vec::new();
        write_matrix_csv(&mut body, op.entries())?;
        sink.csv(&format!("{stem}.csv"), &r.config, &String::from_utf8(body)?)?;
    }
    Ok(pass)
}

pub fn husimi(r: &Resolved, sink: &mut Sink) -> Result<bool> {
    let grid = r.phase_grid(r.first_hbar())?;
    let n = r.dim();
    let spec = match &r.config.state {
        Some(s) => parse_state(s, n)?,
        None => StateSpec::Coherent(vec![0.0; 2 * n]),
    };
    let mut warnings = Vec::new();
    let u = match &spec {
        StateSpec::Coherent(c) => {
            let s = coherent_vector(&r.a, &r.v, grid.hbar(), &c[..n], &c[n..], grid.position())?;
            warnings.extend(s.warnings);
            s.value
        }
        StateSpec::Eigen(k) => {
            let f = r.symbol(0, "harmonic")?;
            let op = weyl_op(&r.a, &f, &grid)?;
            let (_, vecs) = hermitian_eigh(&op.action())?;
            if *k >= vecs.ncols() {
                bail!("eigenvector index {k} out of range {}", vecs.ncols());
            }
            // unit norm in the h^N-weighted inner product
            let s = grid.position().weight().sqrt();
            vecs.column(*k).iter().map(|z| z / s).collect()
        }
    };
    let fam = CoherentFamily::new(&r.a, &r.v, &grid)?;
    let h = fam.husimi(&u)?;
    warnings.extend(h.warnings);
    let cell = (2.0 * std::f64::consts::PI * grid.hbar()).powi(n as i32) * grid.cell_weight();
    let mass: f64 = h.value.iter().sum::<f64>() * cell;
    let norm2: f64 = u.iter().map(C64::norm_sqr).sum::<f64>() * grid.position().weight();
    let min = h.value.iter().cloned().fold(f64::INFINITY, f64::min);
    #[derive(Serialize)]
    struct Out {
        hbar: f64,
        points_per_axis: usize,
        state: String,
        state_norm_squared: f64,
        husimi_mass: f64,
        husimi_min: f64,
        husimi_max: f64,
        warnings: Vec<String>,
    }
    let out = Out {
        hbar: grid.hbar(),
        points_per_axis: grid.points(),
        state: r.config.state.clone().unwrap_or_else(|| "coherent:origin".into()),
        state_norm_squared: norm2,
        husimi_mass: mass,
        husimi_min: min,
        husimi_max: h.value.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        warnings,
    };
    sink.report("husimi", "husimi", &r.config, &out)?;
    let mut body = Vec::new();
    write_husimi_csv(&mut body, &grid, &h.value)?;
    sink.csv("husimi.csv", &r.config, &String::from_utf8(body)?)?;
    Ok(true)
}

pub fn bargmann(r: &Resolved, sink: &mut Sink) -> Result<bool> {
    let grid = r.phase_grid(r.first_hbar())?;
    let f = r.symbol(0, "gaussian:0,1")?;
    let space = BargmannSpace::new(&r.a, &r.v, &grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.config.seed);
    let probe: Vec<C64> = (0..grid.len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let rep = bargmann_check(&space, &f, &probe)?;
    let tol = r.config.tolerances.bargmann;
    let pass = rep.max() <= tol;
    #[derive(Serialize)]
    struct Out {
        hbar: f64,
        points_per_axis: usize,
        symbol: String,
        defects: magberezin::bargmann::BargmannReport,
        max_defect: f64,
        tolerance: f64,
        pass: bool,
    }
    let out = Out {
        hbar: grid.hbar(),
        points_per_axis: grid.points(),
        symbol: f.label().to_string(),
        defects: rep,
        max_defect: rep.max(),
        tolerance: tol,
        pass,
    };
    sink.report("bargmann_check", "bargmann check", &r.config, &out)?;
    if grid.len() <= CSV_MATRIX_LIMIT * 4 {
        let mut body = Vec::new();
        write_kernel_csv(&mut body, &grid, &space.kernel())?;
        sink.csv("bargmann_kernel.csv", &r.config, &String::from_utf8(body)?)?;
    }
    Ok(pass)
}

fn setup(r: &Resolved, hbar_list: Vec<f64>) -> SweepSetup {
    SweepSetup {
        field_preset: r.config.field.clone(),
        gauge: r.config.gauge.clone(),
        b: r.b.clone(),
        a: r.a.clone(),
        v: r.v.clone(),
        hbar_list,
        policy: r.policy(),
        rules: r.config.tolerances.rules(),
    }
}

pub const PHASE_LEMMA_HBAR: [f64; 7] = [0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625];
pub const PHASE_LEMMA_CONFIGURATIONS: usize = 5;

pub fn sweep(r: &Resolved, axiom: Axiom, explicit_hbar: bool, sink: &mut Sink) -> Result<bool> {
    let n = r.dim();
    let (sf, sg) = standard_pair(n);
    let f = r.symbols.first().cloned().unwrap_or(sf);
    let g = r.symbols.get(1).cloned().unwrap_or(sg);
    let hbars = r.config.hbars().to_vec();
    let reports = match axiom {
        Axiom::PhaseLemma => {
            if n < 2 {
                bail!("the phase lemma needs dim >= 2");
            }
            let hb = if explicit_hbar { hbars } else { PHASE_LEMMA_HBAR.to_vec() };
            let mut rng = ChaCha8Rng::seed_from_u64(r.config.seed);
            (0..PHASE_LEMMA_CONFIGURATIONS)
                .map(|_| {
                    let t0 = Instant::now();
                    let p: Vec<Vec<f64>> = (0..5).map(|_| random_point(&mut rng, n)).collect();
                    let lemma = phase_lemma_check(&r.b, &p[0], &p[1], &p[2], &p[3], &p[4], &hb)?;
                    let mut rep = phase_lemma_report((&r.config.field, &r.config.gauge, r.v.label()), &lemma);
                    let ms = t0.elapsed().as_secs_f64() * 1e3 / rep.records.len().max(1) as f64;
                    rep.records.iter_mut().for_each(|x| x.runtime_ms = ms);
                    Ok(rep)
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => {
            let s = setup(r, hbars);
            vec![match axiom {
                Axiom::Rieffel => rieffel_sweep(&s, &f)?,
                Axiom::VonNeumann => vonneumann_sweep(&s, &f, &g)?,
                Axiom::Dirac => dirac_sweep(&s, &f, &g)?,
                Axiom::Semiclassical => semiclassical_sweep(&s, &f)?,
                Axiom::Sigma => sigma_sweep(&s, &random_gaussian_kernel(n, r.config.seed))?,
                Axiom::PhaseLemma => unreachable!(),
            }]
        }
    };
    let pass = reports.iter().all(|x| x.verdict.pass);
    for rep in &reports {
        for rec in &rep.records {
            for w in &rec.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    let stem = format!("sweep_{}", axiom.name());
    sink.report(&stem, &format!("sweep {}", axiom.name()), &r.config, &reports)?;
    sink.csv(&format!("{stem}.csv"), &r.config, &sweep_csv(&reports)?)?;
    Ok(pass)
}

/// Eigenvalues of the quantized symbol, plus the subset whose eigenvectors
/// keep 99% of their mass inside the central 60% of the box.
pub fn spectrum(r: &Resolved, q: Quantization, sink: &mut Sink) -> Result<bool> {
    let grid = r.phase_grid(r.first_hbar())?;
    let f = r.symbol(0, "kinetic")?;
    let mut warnings = Vec::new();
    let op = quantize_op(r, q, &f, &grid, &mut warnings)?;
    let (vals, vecs) = hermitian_eigh(&op.action())?;
    let pos = grid.position();
    let l = pos.half_width();
    let inner: Vec<bool> = (0..pos.len())
        .map(|i| pos.node_vec(i).iter().all(|c| c.abs() <= 0.6 * l))
        .collect();
    #[derive(Serialize)]
    struct Row {
        index: usize,
        eigenvalue: f64,
        interior_mass: f64,
    }
    let rows: Vec<Row> = vals
        .iter()
        .enumerate()
        .map(|(k, &e)| Row {
            index: k,
            eigenvalue: e,
            interior_mass: vecs
                .column(k)
                .iter()
                .zip(&inner)
                .filter(|(_, &m)| m)
                .map(|(c, _)| c.norm_sqr())
                .sum(),
        })
        .collect();
    let interior: Vec<f64> = rows.iter().filter(|x| x.interior_mass >= 0.99).map(|x| x.eigenvalue).collect();
    #[derive(Serialize)]
    struct Out<'a> {
        quantization: &'static str,
        symbol: String,
        hbar: f64,
        points_per_axis: usize,
        eigenvalues: &'a [f64],
        interior_eigenvalues: Vec<f64>,
        warnings: Vec<String>,
    }
    let out = Out {
        quantization: q.name(),
        symbol: f.label().to_string(),
        hbar: grid.hbar(),
        points_per_axis: grid.points(),
        eigenvalues: &vals,
        interior_eigenvalues: interior,
        warnings,
    };
    let stem = format!("spectrum_{}", q.name());
    sink.report(&stem, &format!("spectrum {}", q.name()), &r.config, &out)?;
    let rows: Vec<(usize, String, String)> = rows
        .iter()
        .map(|x| (x.index, magberezin::io::sci(x.eigenvalue), magberezin::io::sci(x.interior_mass)))
        .collect();
    let mut body = String::from("index,eigenvalue,interior_mass\n");
    body.push_str(&csv_text(&rows)?);
    sink.csv(&format!("{stem}.csv"), &r.config, &body)?;
    Ok(true)
}
