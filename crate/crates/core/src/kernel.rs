//! Discrete beta kernels on the age grid `{0, 1, ..., omega}` and the smoother
//! matrix assembled from them.
//!
//! The unnormalized mass at age `x` for mode `m` and bandwidth `h` is
//!
//! ```text
//! k_h(x; m) = (x + 1/2)^((m + 1/2) / (h (omega + 1))) * (omega + 1/2 - x)^((omega + 1/2 - m) / (h (omega + 1)))
//! ```
//!
//! For the bandwidths met in practice (`h` around `1e-3`) the exponents run into
//! the hundreds of thousands, so every mass is handled through its logarithm and
//! normalized with max-subtraction before exponentiation.

use rayon::prelude::*;

use crate::error::{GradError, Result};

/// Mode, bandwidth and support of a single discrete beta kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    mode: usize,
    bandwidth: f64,
    omega: usize,
}

impl KernelParams {
    pub fn new(mode: usize, bandwidth: f64, omega: usize) -> Result<Self> {
        if mode > omega {
            return Err(GradError::Domain(format!(
                "kernel mode {mode} lies outside 0..={omega}"
            )));
        }
        check_bandwidth(bandwidth)?;
        Ok(Self {
            mode,
            bandwidth,
            omega,
        })
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    /// Exponents applied to `ln(x + 1/2)` and `ln(omega + 1/2 - x)`.
    fn exponents(&self) -> (f64, f64) {
        exponents(self.mode, self.bandwidth, self.omega)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(GradError::Domain(format!(
            "bandwidth must be positive and finite, got {h}"
        )))
    }
}

#[inline]
fn exponents(mode: usize, h: f64, omega: usize) -> (f64, f64) {
    let scale = h * (omega as f64 + 1.0);
    let m = mode as f64;
    ((m + 0.5) / scale, (omega as f64 + 0.5 - m) / scale)
}

/// Natural log of the unnormalized kernel mass at age `x`.
pub fn db_kernel_log(x: usize, params: &KernelParams) -> Result<f64> {
    if x > params.omega {
        return Err(GradError::Domain(format!(
            "age {x} lies outside 0..={}",
            params.omega
        )));
    }
    let (a, b) = params.exponents();
    let x = x as f64;
    let omega = params.omega as f64;
    Ok(a * (x + 0.5).ln() + b * (omega + 0.5 - x).ln())
}

/// Normalized kernel: a probability vector over `0..=omega` with its mode at `m`.
pub fn normalized_kernel(params: &KernelParams) -> Vec<f64> {
    let grid = LogGrid::new(params.omega);
    let mut out = vec![0.0; params.omega + 1];
    grid.log_masses(params.mode, params.bandwidth, &mut out);
    softmax_in_place(&mut out);
    out
}

/// Cached `ln(x + 1/2)` and `ln(omega + 1/2 - x)` for every age of the grid.
#[derive(Debug, Clone)]
pub(crate) struct LogGrid {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl LogGrid {
    pub(crate) fn new(omega: usize) -> Self {
        let w = omega as f64;
        let left = (0..=omega).map(|x| (x as f64 + 0.5).ln()).collect();
        let right = (0..=omega).map(|x| (w + 0.5 - x as f64).ln()).collect();
        Self { left, right }
    }

    pub(crate) fn omega(&self) -> usize {
        self.left.len() - 1
    }

    /// Writes the log masses of the kernel with mode `mode` and bandwidth `h` into `out`.
    pub(crate) fn log_masses(&self, mode: usize, h: f64, out: &mut [f64]) {
        let (a, b) = exponents(mode, h, self.omega());
        for ((o, l), r) in out.iter_mut().zip(&self.left).zip(&self.right) {
            *o = a * l + b * r;
        }
    }
}

/// Replaces log weights by their normalized exponentials.
pub(crate) fn softmax_in_place(logs: &mut [f64]) {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in logs.iter_mut() {
        *v = (*v - top).exp();
        total += *v;
    }
    for v in logs.iter_mut() {
        *v /= total;
    }
}

/// `sum_j w_j v_j` for weights summing to one, accumulated as deviations from
/// the value under the largest weight so that constant vectors come back exactly.
pub(crate) fn weighted_mean(weights: &[f64], values: &[f64]) -> f64 {
    let anchor = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| values[j])
        .unwrap_or(0.0);
    anchor
        + weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * (v - anchor))
            .sum::<f64>()
}

/// Row-stochastic matrix mapping crude rates to graduated rates.
///
/// Row `i` holds the normalized kernel with mode `i` evaluated at the
/// bandwidth assigned to age `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherMatrix {
    weights: Vec<f64>,
    omega: usize,
}

impl SmootherMatrix {
    pub fn omega(&self) -> usize {
        self.omega
    }

    /// Number of rows (and columns), `omega + 1`.
    pub fn order(&self) -> usize {
        self.omega + 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.order();
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.order() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.order())
    }

    /// Matrix-vector product `K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order(), "vector length must equal omega + 1");
        self.rows().map(|row| weighted_mean(row, v)).collect()
    }
}

/// Assembles the smoother matrix from one bandwidth per age.
pub fn smoother_matrix(per_age_bandwidths: &[f64], omega: usize) -> Result<SmootherMatrix> {
    if per_age_bandwidths.len() != omega + 1 {
        return Err(GradError::Domain(format!(
            "expected {} bandwidths, got {}",
            omega + 1,
            per_age_bandwidths.len()
        )));
    }
    for &h in per_age_bandwidths {
        check_bandwidth(h)?;
    }
    let grid = LogGrid::new(omega);
    let n = omega + 1;
    let mut weights = vec![0.0; n * n];
    weights
        .par_chunks_mut(n)
        .zip(per_age_bandwidths.par_iter())
        .enumerate()
        .for_each(|(mode, (row, &h))| {
            grid.log_masses(mode, h, row);
            softmax_in_place(row);
        });
    Ok(SmootherMatrix { weights, omega })
}
