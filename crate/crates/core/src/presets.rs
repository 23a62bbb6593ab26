//! Named fields, gauges and symbols addressable from configuration files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, Error, Result};
use crate::fields::{poincare_potential, sinusoidal_field, sinusoidal_potential, MagneticField, VectorPotential};
use crate::phasespace::{KernelFunction, Symbol};
use crate::{C64, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldPreset {
    Zero,
    Constant(f64),
    Sinusoidal { b0: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    Symmetric,
    Landau,
    Poincare,
}

fn parse_f64(what: &'static str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| parse_err(what, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(what, format!("not finite: {s:?}")));
    }
    Ok(v)
}

impl FieldPreset {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        match name.trim() {
            "zero" if args.is_empty() => Ok(Self::Zero),
            "constant" => Ok(Self::Constant(parse_f64("field preset", args)?)),
            "sinusoidal" => {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() != 2 {
                    return Err(parse_err("field preset", "sinusoidal needs b0,eps"));
                }
                Ok(Self::Sinusoidal {
                    b0: parse_f64("field preset", parts[0])?,
                    eps: parse_f64("field preset", parts[1])?,
                })
            }
            _ => Err(parse_err("field preset", format!("unknown preset {s:?}"))),
        }
    }

    /// Builds the field and a matching potential in the requested gauge.
    pub fn build(&self, dim: usize, gauge: Gauge) -> Result<(MagneticField, VectorPotential)> {
        match *self {
            FieldPreset::Zero => Ok((MagneticField::zero(dim)?, VectorPotential::zero(dim)?)),
            _ if dim != 2 => Err(Error::UnsupportedDimension(dim)),
            FieldPreset::Constant(b) => {
                let field = MagneticField::constant_planar(b).with_label(format!("constant:{b}"));
                let a = match gauge {
                    Gauge::Symmetric => VectorPotential::symmetric(&field)?,
                    Gauge::Landau => VectorPotential::landau(b),
                    Gauge::Poincare => poincare_potential(&field),
                };
                Ok((field, a))
            }
            FieldPreset::Sinusoidal { b0, eps } => {
                let field = sinusoidal_field(b0, eps).with_label(format!("sinusoidal:{b0},{eps}"));
                let a = match gauge {
                    Gauge::Symmetric => sinusoidal_potential(b0, eps, false),
                    Gauge::Landau => sinusoidal_potential(b0, eps, true),
                    Gauge::Poincare => poincare_potential(&field),
                };
                Ok((field, a))
            }
        }
    }
}

impl Gauge {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "symmetric" => Ok(Self::Symmetric),
            "landau" => Ok(Self::Landau),
            "poincare" => Ok(Self::Poincare),
            _ => Err(parse_err("gauge", format!("unknown gauge {s:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Symmetric => "symmetric",
            Self::Landau => "landau",
            Self::Poincare => "poincare",
        }
    }
}

fn zero_grad(dx: &mut [C64], dxi: &mut [C64]) {
    dx.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    dxi.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
}

/// exp(-|Z - Z0|^2 / (2 width^2)) with Z0 = (x0, xi0) of length 2N.
pub fn gaussian(dim: usize, center: &[f64], width: f64) -> Symbol {
    assert_eq!(center.len(), 2 * dim, "center must have 2N coordinates");
    let c = center.to_vec();
    let c2 = c.clone();
    let s2 = width * width;
    let value = move |x: &[f64], xi: &[f64]| -> f64 {
        let mut r = 0.0;
        for j in 0..x.len() {
            r += (x[j] - c[j]).powi(2) + (xi[j] - c[j + x.len()]).powi(2);
        }
        (-0.5 * r / s2).exp()
    };
    let v2 = value.clone();
    Symbol::real(dim, value)
        .with_gradient(move |x, xi, dx, dxi| {
            let n = x.len();
            let f = v2(x, xi);
            for j in 0..n {
                dx[j] = C64::new(-(x[j] - c2[j]) / s2 * f, 0.0);
                dxi[j] = C64::new(-(xi[j] - c2[j + n]) / s2 * f, 0.0);
            }
        })
        .with_label(format!("gaussian:{width}"))
}

pub fn coordinate_q(dim: usize, j: usize) -> Symbol {
    Symbol::real(dim, move |x, _| x[j])
        .with_gradient(move |_, _, dx, dxi| {
            zero_grad(dx, dxi);
            dx[j] = C64::new(1.0, 0.0);
        })
        .with_label(format!("q_{}", j + 1))
}

pub fn coordinate_p(dim: usize, j: usize) -> Symbol {
    Symbol::real(dim, move |_, xi| xi[j])
        .with_gradient(move |_, _, dx, dxi| {
            zero_grad(dx, dxi);
            dxi[j] = C64::new(1.0, 0.0);
        })
        .with_label(format!("p_{}", j + 1))
}

/// |x|^2 + |xi|^2.
pub fn harmonic(dim: usize) -> Symbol {
    Symbol::real(dim, |x, xi| {
        x.iter().map(|v| v * v).sum::<f64>() + xi.iter().map(|v| v * v).sum::<f64>()
    })
    .with_gradient(|x, xi, dx, dxi| {
        for j in 0..x.len() {
            dx[j] = C64::new(2.0 * x[j], 0.0);
            dxi[j] = C64::new(2.0 * xi[j], 0.0);
        }
    })
    .with_label("harmonic")
}

/// |xi|^2.
pub fn kinetic(dim: usize) -> Symbol {
    Symbol::real(dim, |_, xi| xi.iter().map(|v| v * v).sum::<f64>())
        .with_gradient(|x, xi, dx, dxi| {
            for j in 0..x.len() {
                dx[j] = C64::new(0.0, 0.0);
                dxi[j] = C64::new(2.0 * xi[j], 0.0);
            }
        })
        .with_label("kinetic")
}

/// Seeded sum of three Gaussian bumps with random centers, widths and
/// amplitudes; smooth and rapidly decaying.
pub fn random_bandlimited(dim: usize, seed: u64) -> Symbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym: Option<Symbol> = None;
    for _ in 0..3 {
        let center: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let width = rng.gen_range(0.6..1.0);
        let amp = rng.gen_range(-1.0..1.0);
        let g = gaussian(dim, &center, width).scale(amp);
        sym = Some(match sym {
            None => g,
            Some(s) => s.add(&g),
        });
    }
    sym.expect("three terms").with_label(format!("random_bandlimited:{seed}"))
}

/// Seeded sum of three Gaussian bumps with positive amplitudes.
pub fn random_nonnegative(dim: usize, seed: u64) -> Symbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym: Option<Symbol> = None;
    for _ in 0..3 {
        let center: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let width = rng.gen_range(0.5..1.0);
        let amp = rng.gen_range(0.1..1.0);
        let g = gaussian(dim, &center, width).scale(amp);
        sym = Some(match sym {
            None => g,
            Some(s) => s.add(&g),
        });
    }
    sym.expect("three terms").with_label(format!("random_nonnegative:{seed}"))
}

/// Seeded Gaussian kernel
/// `c exp(-|x - a|^2 / (2 s^2) - |y - b|^2 / (2 t^2) + i k.y)` with analytic
/// x-gradient.
pub fn random_gaussian_kernel(dim: usize, seed: u64) -> KernelFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.7..0.7)).collect();
    let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = rng.gen_range(0.7..1.2);
    let t = rng.gen_range(0.6..1.0);
    let c = C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
    let a2 = a.clone();
    let value = move |x: &[f64], y: &[f64]| -> C64 {
        let mut e = 0.0;
        let mut ph = 0.0;
        for j in 0..x.len() {
            e -= (x[j] - a[j]).powi(2) / (2.0 * s * s) + (y[j] - b[j]).powi(2) / (2.0 * t * t);
            ph += k[j] * y[j];
        }
        c * C64::from_polar(e.exp(), ph)
    };
    let v2 = value.clone();
    KernelFunction::new(dim, value)
        .with_x_gradient(move |x, y, out| {
            let f = v2(x, y);
            for j in 0..x.len() {
                out[j] = f * (-(x[j] - a2[j]) / (s * s));
            }
        })
        .with_label(format!("random_gaussian_kernel:{seed}"))
}

/// Parses a symbol preset name.
///
/// `gaussian:center,width` takes either a scalar center applied to every
/// coordinate or a `/`-separated list of 2N coordinates.
pub fn parse_symbol(s: &str, dim: usize) -> Result<Symbol> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let index = |a: &str, prefix: &str| -> Result<usize> {
        let j: usize = a
            .strip_prefix(prefix)
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| parse_err("symbol preset", format!("bad coordinate {a:?}")))?;
        if j == 0 || j > dim {
            return Err(parse_err("symbol preset", format!("coordinate index {j} out of range")));
        }
        Ok(j - 1)
    };
    let sym = match name.trim() {
        "gaussian" => {
            let (c, w) = args
                .rsplit_once(',')
                .ok_or_else(|| parse_err("symbol preset", "gaussian needs center,width"))?;
            let width = parse_f64("symbol preset", w)?;
            if width <= 0.0 {
                return Err(parse_err("symbol preset", "gaussian width must be positive"));
            }
            let parts: Vec<f64> = c
                .split('/')
                .map(|p| parse_f64("symbol preset", p))
                .collect::<Result<_>>()?;
            let center = match parts.len() {
                1 => vec![parts[0]; 2 * dim],
                n if n == 2 * dim => parts,
                n => {
                    return Err(parse_err(
                        "symbol preset",
                        format!("gaussian center has {n} coordinates, expected 1 or {}", 2 * dim),
                    ))
                }
            };
            gaussian(dim, &center, width)
        }
        "coordinate" => {
            let a = args.trim();
            if a.starts_with("q_") {
                coordinate_q(dim, index(a, "q_")?)
            } else if a.starts_with("p_") {
                coordinate_p(dim, index(a, "p_")?)
            } else {
                return Err(parse_err("symbol preset", format!("bad coordinate {a:?}")));
            }
        }
        "harmonic" if args.is_empty() => harmonic(dim),
        "kinetic" if args.is_empty() => kinetic(dim),
        "constant" => Symbol::constant(dim, parse_f64("symbol preset", args)?),
        "random_bandlimited" => {
            let seed: u64 = args
                .trim()
                .parse()
                .map_err(|_| parse_err("symbol preset", format!("bad seed {args:?}")))?;
            random_bandlimited(dim, seed)
        }
        _ => return Err(parse_err("symbol preset", format!("unknown symbol {s:?}"))),
    };
    Ok(sym.with_label(s.to_string()))
}
