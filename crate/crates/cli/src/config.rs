//! Experiment configuration: one JSON document, validated before any
//! numerical work starts.

use std::path::Path;

use anyhow::{bail, Context, Result};
use magberezin::berezin::FiducialVector;
use magberezin::presets::{parse_symbol, FieldPreset, Gauge};
use magberezin::strictq::{GridPolicy, VerdictRules, STANDARD_PAIR_RADIUS};
use magberezin::{BoxGrid, MagneticField, PhaseGrid, Symbol, VectorPotential, MAX_DIM};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SWEEP_HBAR: [f64; 4] = [0.25, 0.125, 0.0625, 0.03125];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    #[serde(default = "default_field")]
    pub field: String,
    /// `symmetric`, `landau`, `poincare`, or `zero` for A = 0 regardless of B.
    #[serde(default = "default_gauge")]
    pub gauge: String,
    #[serde(default = "default_fiducial")]
    pub fiducial: String,
    #[serde(default)]
    pub box_half_width: Option<f64>,
    #[serde(default)]
    pub points_per_axis: Option<usize>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub hbar_list: Option<Vec<f64>>,
    #[serde(default)]
    pub symbols: Vec<String>,
    /// Husimi state: `coherent:c1/../c2N` or `eigen:n`.
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Not embedded in reports, so relocating output keeps them identical.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub curl: f64,
    pub stokes: f64,
    pub positivity: f64,
    pub bargmann: f64,
    pub rieffel_band: f64,
    pub vonneumann_ratio: f64,
    pub dirac_ratio: f64,
    pub semiclassical_ratio: f64,
    pub sigma_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let r = VerdictRules::default();
        Self {
            curl: 1e-6,
            stokes: 1e-8,
            positivity: 1e-8,
            bargmann: 1e-6,
            rieffel_band: r.rieffel_band,
            vonneumann_ratio: r.vonneumann_ratio,
            dirac_ratio: r.dirac_ratio,
            semiclassical_ratio: r.semiclassical_ratio,
            sigma_fraction: r.sigma_fraction,
        }
    }
}

impl Tolerances {
    pub fn rules(&self) -> VerdictRules {
        VerdictRules {
            rieffel_band: self.rieffel_band,
            vonneumann_ratio: self.vonneumann_ratio,
            dirac_ratio: self.dirac_ratio,
            semiclassical_ratio: self.semiclassical_ratio,
            sigma_fraction: self.sigma_fraction,
        }
    }
}

fn default_field() -> String {
    "zero".into()
}
fn default_gauge() -> String {
    "symmetric".into()
}
fn default_fiducial() -> String {
    "gaussian".into()
}
fn default_max_points() -> usize {
    2048
}

/// Everything a subcommand needs, built from a validated config.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub b: MagneticField,
    pub a: VectorPotential,
    pub v: FiducialVector,
    pub symbols: Vec<Symbol>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn hbars(&self) -> &[f64] {
        self.hbar_list.as_deref().unwrap_or(&DEFAULT_SWEEP_HBAR)
    }

    /// Checks every field and builds the field, potential, fiducial and symbols.
    pub fn resolve(mut self) -> Result<Resolved> {
        if self.dim == 0 || self.dim > MAX_DIM {
            bail!("dim must be between 1 and {MAX_DIM}, got {}", self.dim);
        }
        if let Some(l) = self.box_half_width {
            if !(l.is_finite() && l > 0.0) {
                bail!("box_half_width must be positive, got {l}");
            }
        }
        if let Some(m) = self.points_per_axis {
            if m < 4 || m % 2 != 0 {
                bail!("points_per_axis must be even and at least 4, got {m}");
            }
        }
        if self.max_points < 4 {
            bail!("max_points must be at least 4");
        }
        if let Some(h) = &self.hbar_list {
            if h.is_empty() {
                bail!("hbar_list must not be empty");
            }
            if let Some(bad) = h.iter().find(|x| !(x.is_finite() && **x > 0.0 && **x <= 1.0)) {
                bail!("hbar values must lie in (0, 1], got {bad}");
            }
        }
        let preset = FieldPreset::parse(&self.field)?;
        let (b, a) = if self.gauge == "zero" {
            let (b, _) = preset.build(self.dim, Gauge::Symmetric)?;
            (b, VectorPotential::zero(self.dim)?.with_label("zero"))
        } else {
            preset.build(self.dim, Gauge::parse(&self.gauge)?)?
        };
        let v = FiducialVector::parse(&self.fiducial, self.dim)?;
        let symbols = self
            .symbols
            .iter()
            .map(|s| parse_symbol(s, self.dim))
            .collect::<magberezin::Result<Vec<_>>>()?;
        if let Some(s) = &self.state {
            parse_state(s, self.dim)?;
        }
        self.hbar_list = Some(self.hbars().to_vec());
        Ok(Resolved {
            config: self,
            b,
            a,
            v,
            symbols,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Coherent(Vec<f64>),
    Eigen(usize),
}

pub fn parse_state(s: &str, dim: usize) -> Result<StateSpec> {
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    match name {
        "coherent" => {
            let c: Vec<f64> = args
                .split('/')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad coherent state center {args:?}"))?;
            if c.len() != 2 * dim {
                bail!("coherent state needs {} coordinates, got {}", 2 * dim, c.len());
            }
            Ok(StateSpec::Coherent(c))
        }
        "eigen" => Ok(StateSpec::Eigen(
            args.trim().parse().with_context(|| format!("bad eigenvector index {args:?}"))?,
        )),
        _ => bail!("unknown state {s:?}"),
    }
}

impl Resolved {
    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Fixed grid at one hbar; needs both box keys.
    pub fn phase_grid(&self, hbar: f64) -> Result<PhaseGrid> {
        let (Some(l), Some(m)) = (self.config.box_half_width, self.config.points_per_axis) else {
            bail!("this subcommand needs box_half_width and points_per_axis");
        };
        Ok(PhaseGrid::new(BoxGrid::new(self.dim(), l, m)?, hbar)?)
    }

    pub fn first_hbar(&self) -> f64 {
        self.config.hbars()[0]
    }

    pub fn symbol(&self, k: usize, fallback: &str) -> Result<Symbol> {
        match self.symbols.get(k) {
            Some(s) => Ok(s.clone()),
            None => Ok(parse_symbol(fallback, self.dim())?),
        }
    }

    /// Sweep grid policy: fixed when `points_per_axis` is given, otherwise
    /// adapted to each hbar under the `max_points` cap.
    pub fn policy(&self) -> GridPolicy {
        let c = &self.config;
        let hmax = c.hbars().iter().cloned().fold(0.0, f64::max);
        match (c.box_half_width, c.points_per_axis) {
            (Some(l), Some(m)) => GridPolicy::fixed(l, m),
            (l, None) => {
                let mut p = GridPolicy::for_extent(STANDARD_PAIR_RADIUS.0, STANDARD_PAIR_RADIUS.1, hmax, c.max_points);
                if let Some(l) = l {
                    p.half_width = l;
                }
                p
            }
            (None, Some(m)) => {
                let p = GridPolicy::for_extent(STANDARD_PAIR_RADIUS.0, STANDARD_PAIR_RADIUS.1, hmax, c.max_points);
                GridPolicy::fixed(p.half_width, m)
            }
        }
    }
}
