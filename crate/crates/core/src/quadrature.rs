//! Gauss–Legendre rules on the unit interval and the unit simplex.

use once_cell::sync::Lazy;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Rule for integrals over [0, 1]; weights sum to 1.
#[derive(Clone, Debug)]
pub struct SegmentRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SegmentRule {
    pub fn gauss(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Self {
            nodes: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Tensor rule for the flux integral over (mu, nu) in [0,1]^2 with the
/// Jacobian factor mu folded into the weights, so the weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    order: usize,
}

impl SimplexRule {
    pub fn gauss(order: usize) -> Self {
        let seg = SegmentRule::gauss(order);
        let mut nodes = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (i, &mu) in seg.nodes.iter().enumerate() {
            for (j, &nu) in seg.nodes.iter().enumerate() {
                nodes.push((mu, nu));
                weights.push(seg.weights[i] * seg.weights[j] * mu);
            }
        }
        Self {
            nodes,
            weights,
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

pub const DEFAULT_SIMPLEX_ORDER: usize = 16;
pub const DEFAULT_SEGMENT_ORDER: usize = 32;

static SIMPLEX: Lazy<SimplexRule> = Lazy::new(|| SimplexRule::gauss(DEFAULT_SIMPLEX_ORDER));
static SEGMENT: Lazy<SegmentRule> = Lazy::new(|| SegmentRule::gauss(DEFAULT_SEGMENT_ORDER));

pub fn default_simplex() -> &'static SimplexRule {
    &SIMPLEX
}

pub fn default_segment() -> &'static SegmentRule {
    &SEGMENT
}
