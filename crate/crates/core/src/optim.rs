//! Box-constrained Levenberg-Marquardt for problems with a handful of parameters.
//!
//! Each iteration solves `(J^T J + lambda * diag(J^T J)) step = -J^T r` with a
//! forward-difference Jacobian. Parameters sitting on a bound whose step would
//! leave the box are frozen for that solve; the remaining step is clipped to
//! the box. A step longer than a parameter's `max_step` is shortened as a
//! whole, keeping its direction. Only steps that lower the residual sum of
//! squares are accepted.

/// A residual vector over a small box-constrained parameter vector.
pub(crate) trait LeastSquares {
    /// Residuals at `params`, or `None` when any residual is not finite.
    fn residuals(&mut self, params: &[f64]) -> Option<Vec<f64>>;

    /// Inclusive bounds of parameter `i`.
    fn bounds(&self, _i: usize) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Finite-difference increment magnitude for parameter `i`.
    fn fd_step(&self, params: &[f64], i: usize) -> f64;

    /// Largest change of parameter `i` allowed in one iteration.
    fn max_step(&self, _i: usize) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOptions {
    pub initial_damping: f64,
    pub damping_factor: f64,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_factor: 10.0,
            rel_tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Iterate {
    pub index: usize,
    pub rss: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LmReport {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterates: Vec<Iterate>,
    pub converged: bool,
    pub hit_iteration_cap: bool,
}

/// Damping above which no descent step is considered to exist.
const MAX_DAMPING: f64 = 1e16;

fn rss(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes the residual sum of squares from `start`.
///
/// Returns `Err(start)` when the residuals are not finite at the start point.
pub(crate) fn minimize<P: LeastSquares>(
    problem: &mut P,
    start: &[f64],
    opts: &LmOptions,
) -> Result<LmReport, Vec<f64>> {
    let n = start.len();
    let mut params: Vec<f64> = start
        .iter()
        .enumerate()
        .map(|(i, &p)| clamp(p, problem.bounds(i)))
        .collect();
    let mut r = problem.residuals(&params).ok_or_else(|| params.clone())?;
    let mut current = rss(&r);
    let mut iterates = vec![Iterate {
        index: 0,
        rss: current,
        params: params.clone(),
    }];
    let mut lambda = opts.initial_damping;
    let mut converged = current == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jac = match jacobian(problem, &params, &r) {
            Some(j) => j,
            None => break,
        };
        // normal equations
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (k, rk) in r.iter().enumerate() {
            for i in 0..n {
                jtr[i] += jac[i][k] * rk;
                for j in 0..n {
                    jtj[i][j] += jac[i][k] * jac[j][k];
                }
            }
        }
        let diag_floor = (0..n).map(|i| jtj[i][i]).fold(0.0, f64::max) * 1e-12;
        let free: Vec<bool> = (0..n)
            .map(|i| {
                let (lo, hi) = problem.bounds(i);
                // descent direction is -jtr
                !((params[i] <= lo && jtr[i] > 0.0) || (params[i] >= hi && jtr[i] < 0.0))
            })
            .collect();

        let mut accepted = None;
        while lambda <= MAX_DAMPING {
            let mut step = damped_step(&jtj, &jtr, lambda, diag_floor, &free);
            let shrink = step
                .iter()
                .enumerate()
                .map(|(i, d)| problem.max_step(i) / d.abs())
                .fold(1.0, f64::min);
            step.iter_mut().for_each(|d| *d *= shrink);
            let trial: Vec<f64> = params
                .iter()
                .zip(&step)
                .enumerate()
                .map(|(i, (p, d))| clamp(p + d, problem.bounds(i)))
                .collect();
            if let Some(tr) = problem.residuals(&trial) {
                let trial_rss = rss(&tr);
                if trial_rss < current {
                    accepted = Some((trial, tr, trial_rss));
                    lambda = (lambda / opts.damping_factor).max(1e-12);
                    break;
                }
            }
            lambda *= opts.damping_factor;
        }

        let Some((trial, tr, trial_rss)) = accepted else {
            // no step lowers the objective: stationary to working precision
            converged = true;
            break;
        };
        let decrease = current - trial_rss;
        let moved = trial
            .iter()
            .zip(&params)
            .map(|(a, b)| (a - b).abs() / (b.abs() + opts.rel_tolerance))
            .fold(0.0, f64::max);
        params = trial;
        r = tr;
        current = trial_rss;
        iterates.push(Iterate {
            index: iterates.len(),
            rss: current,
            params: params.clone(),
        });
        converged = current == 0.0
            || decrease <= opts.rel_tolerance * (current + decrease)
            || moved <= opts.rel_tolerance;
    }

    Ok(LmReport {
        params,
        rss: current,
        iterates,
        converged,
        hit_iteration_cap: !converged && iterations >= opts.max_iterations,
    })
}

fn clamp(v: f64, (lo, hi): (f64, f64)) -> f64 {
    v.max(lo).min(hi)
}

/// Forward differences, switching to backward ones at an upper bound.
/// Stored column-major: `jac[i][k]` is the derivative of residual `k` in parameter `i`.
fn jacobian<P: LeastSquares>(problem: &mut P, params: &[f64], r: &[f64]) -> Option<Vec<Vec<f64>>> {
    let mut cols = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let (_, hi) = problem.bounds(i);
        let mut step = problem.fd_step(params, i);
        if params[i] + step > hi {
            step = -step;
        }
        let mut shifted = params.to_vec();
        shifted[i] += step;
        let rs = problem.residuals(&shifted)?;
        cols.push(rs.iter().zip(r).map(|(a, b)| (a - b) / step).collect());
    }
    Some(cols)
}

/// Solves the damped normal equations over the free parameters; frozen ones get zero.
fn damped_step(jtj: &[Vec<f64>], jtr: &[f64], lambda: f64, floor: f64, free: &[bool]) -> Vec<f64> {
    let idx: Vec<usize> = (0..jtr.len()).filter(|&i| free[i]).collect();
    let m = idx.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &i) in idx.iter().enumerate() {
        for (col, &j) in idx.iter().enumerate() {
            a[row][col] = jtj[i][j];
        }
        a[row][row] += lambda * jtj[i][i].max(floor).max(f64::MIN_POSITIVE);
        a[row][m] = -jtr[i];
    }
    let solved = gauss_solve(a);
    let mut step = vec![0.0; jtr.len()];
    for (row, &i) in idx.iter().enumerate() {
        step[i] = solved[row];
    }
    step
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for c in 0..m {
        let pivot = (c..m)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap_or(c);
        a.swap(c, pivot);
        let p = a[c][c];
        if p == 0.0 {
            continue;
        }
        for r in c + 1..m {
            let f = a[r][c] / p;
            for k in c..=m {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for c in (0..m).rev() {
        let s: f64 = (c + 1..m).map(|k| a[c][k] * x[k]).sum();
        x[c] = if a[c][c] == 0.0 {
            0.0
        } else {
            (a[c][m] - s) / a[c][c]
        };
    }
    x
}
