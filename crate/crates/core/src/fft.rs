//! Multidimensional DFT helpers on `[M; N]` row-major blocks with optional
//! centered indexing (index `k` stands for `k - M/2`).

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

#[derive(Clone)]
pub struct Dft {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// out[a] = sum_b in[b] exp(sign * 2 pi i (a - ca)(b - cb) / M) along every
    /// axis, where `ca = M/2` if `center_out` and `cb = M/2` if `center_in`.
    pub fn apply(&self, data: &mut [C64], dim: usize, sign: i32, center_in: bool, center_out: bool) {
        let m = self.m;
        debug_assert_eq!(data.len(), m.pow(dim as u32));
        let plan = if sign < 0 { &self.forward } else { &self.inverse };
        let mut line = vec![C64::new(0.0, 0.0); m];
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let global = if center_in && center_out && (m / 2) % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        for axis in 0..dim {
            let stride = m.pow((dim - 1 - axis) as u32);
            let outer = data.len() / (m * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * m * stride + s;
                    for k in 0..m {
                        let v = data[base + k * stride];
                        line[k] = if center_out && k % 2 == 1 { -v } else { v };
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for a in 0..m {
                        let mut v = line[a] * global;
                        if center_in && a % 2 == 1 {
                            v = -v;
                        }
                        data[base + a * stride] = v;
                    }
                }
            }
        }
    }
}

/// Row-major multi-index of a flat index in `[M; N]`.
#[inline]
pub fn unflatten(mut idx: usize, m: usize, dim: usize, out: &mut [usize]) {
    for axis in (0..dim).rev() {
        out[axis] = idx % m;
        idx /= m;
    }
}

#[inline]
pub fn flatten(multi: &[usize], m: usize) -> usize {
    multi.iter().fold(0, |acc, &i| acc * m + i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(data: &[C64], m: usize, sign: i32, ci: bool, co: bool) -> Vec<C64> {
        let c_in = if ci { m as f64 / 2.0 } else { 0.0 };
        let c_out = if co { m as f64 / 2.0 } else { 0.0 };
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let ph = sign as f64 * 2.0 * PI * (a as f64 - c_out) * (b as f64 - c_in) / m as f64;
                        data[b] * C64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_in_all_centerings() {
        for m in [4usize, 6, 8, 10] {
            let d = Dft::new(m);
            let data: Vec<C64> = (0..m).map(|k| C64::new((k as f64).sin(), 0.3 * k as f64)).collect();
            for sign in [-1, 1] {
                for ci in [false, true] {
                    for co in [false, true] {
                        let mut x = data.clone();
                        d.apply(&mut x, 1, sign, ci, co);
                        let y = naive(&data, m, sign, ci, co);
                        for (a, b) in x.iter().zip(&y) {
                            assert!((a - b).norm() < 1e-12, "m={m} {sign} {ci} {co}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_dimensional_is_separable() {
        let m = 6;
        let d = Dft::new(m);
        let data: Vec<C64> = (0..m * m).map(|k| C64::new((k as f64 * 0.7).cos(), 0.0)).collect();
        let mut x = data.clone();
        d.apply(&mut x, 2, -1, true, true);
        let c = m as f64 / 2.0;
        for a0 in 0..m {
            for a1 in 0..m {
                let mut s = C64::new(0.0, 0.0);
                for b0 in 0..m {
                    for b1 in 0..m {
                        let ph = -2.0 * PI
                            * ((a0 as f64 - c) * (b0 as f64 - c) + (a1 as f64 - c) * (b1 as f64 - c))
                            / m as f64;
                        s += data[b0 * m + b1] * C64::from_polar(1.0, ph);
                    }
                }
                assert!((x[a0 * m + a1] - s).norm() < 1e-11);
            }
        }
    }
}
