//! Brute-force reference implementations. These evaluate every formula
//! directly in linear space (no logs, no shared helpers from the library) and
//! are only valid where the raw powers stay representable.

#![allow(dead_code)]

/// Unnormalized discrete beta mass by direct powers.
pub fn naive_kernel(x: usize, m: usize, h: f64, omega: usize) -> f64 {
    let (x, m, w) = (x as f64, m as f64, omega as f64);
    let c = h * (w + 1.0);
    (x + 0.5).powf((m + 0.5) / c) * (w + 0.5 - x).powf((w + 0.5 - m) / c)
}

pub fn naive_normalized(m: usize, h: f64, omega: usize) -> Vec<f64> {
    let k: Vec<f64> = (0..=omega).map(|x| naive_kernel(x, m, h, omega)).collect();
    let s: f64 = k.iter().sum();
    k.iter().map(|v| v / s).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Fx,
    Ex,
    Vc,
}

pub fn naive_factors(mode: Mode, q: &[f64], e: &[f64]) -> Vec<f64> {
    match mode {
        Mode::Fx => vec![1.0; q.len()],
        Mode::Ex => {
            let total: f64 = e.iter().sum();
            let inv: Vec<f64> = e.iter().map(|v| 1.0 / (v / total)).collect();
            let top = inv.iter().cloned().fold(0.0, f64::max);
            inv.iter().map(|v| v / top).collect()
        }
        Mode::Vc => {
            let vc: Vec<f64> = q
                .iter()
                .zip(e)
                .map(|(q, e)| (e * q * (1.0 - q)).sqrt() / (e * q))
                .collect();
            let total: f64 = vc.iter().sum();
            vc.iter().map(|v| v / total).collect()
        }
    }
}

pub fn naive_bandwidths(mode: Mode, h: f64, s: f64, q: &[f64], e: &[f64]) -> Vec<f64> {
    naive_factors(mode, q, e).iter().map(|l| h * l.powf(s)).collect()
}

fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

fn expit(t: f64) -> f64 {
    t.exp() / (1.0 + t.exp())
}

/// Leave-one-out estimate at `x`, weights rebuilt from scratch.
pub fn naive_loo(q: &[f64], bw: &[f64], logit_scale: bool, x: usize) -> f64 {
    let omega = q.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for y in (0..=omega).filter(|&y| y != x) {
        let k = naive_kernel(y, x, bw[x], omega);
        let v = if logit_scale { logit(q[y]) } else { q[y] };
        num += k * v;
        den += k;
    }
    let t = num / den;
    if logit_scale {
        expit(t)
    } else {
        t
    }
}

/// CV statistic; `proportional` selects `loo / q - 1` over `loo - q`.
pub fn naive_cv(q: &[f64], bw: &[f64], logit_scale: bool, proportional: bool) -> f64 {
    (0..q.len())
        .map(|x| {
            let l = naive_loo(q, bw, logit_scale, x);
            let r = if proportional { l / q[x] - 1.0 } else { l - q[x] };
            r * r
        })
        .sum()
}

/// Summation form of the kernel estimator.
pub fn naive_graduate(q: &[f64], bw: &[f64]) -> Vec<f64> {
    let omega = q.len() - 1;
    (0..=omega)
        .map(|x| {
            let k: Vec<f64> = (0..=omega).map(|y| naive_kernel(y, x, bw[x], omega)).collect();
            let s: f64 = k.iter().sum();
            k.iter().zip(q).map(|(k, q)| k / s * q).sum()
        })
        .collect()
}

/// Standard normal CDF: power series near the centre, Mills-ratio continued
/// fraction in the tails.
pub fn normal_cdf(z: f64) -> f64 {
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if z.abs() < 3.0 {
        let mut term = z;
        let mut sum = z;
        let mut n = 1.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            n += 2.0;
            term *= z * z / n;
            sum += term;
        }
        0.5 + pdf * sum
    } else {
        let a = z.abs();
        let mut cf = a;
        for k in (1..=200).rev() {
            cf = a + k as f64 / cf;
        }
        let tail = pdf / cf;
        if z > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

/// Quantile by bisection on `normal_cdf`; the upper half goes through
/// `1 - p` (exact in binary for p > 1/2) to keep tail resolution.
pub fn normal_quantile_bisect(p: f64) -> f64 {
    if p > 0.5 {
        return -normal_quantile_bisect(1.0 - p);
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
