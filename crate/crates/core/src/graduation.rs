//! Kernel graduation of crude rates, optionally on the logit scale, with
//! pointwise normal-approximation confidence intervals.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::bandwidth::BandwidthSpec;
use crate::crossval::{loo_estimates, CvTrace};
use crate::error::{GradError, Result};
use crate::kernel::{smoother_matrix, SmootherMatrix};
use crate::table::MortalityTable;

/// Log-odds of a rate strictly inside `(0, 1)`.
pub fn logit_transform(q: f64) -> Result<f64> {
    if q > 0.0 && q < 1.0 {
        Ok((q / (1.0 - q)).ln())
    } else {
        Err(GradError::Domain(format!(
            "logit is defined on (0, 1) only, got {q}"
        )))
    }
}

/// Logistic function, evaluated on the branch that cannot overflow.
pub fn inv_logit(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Standard normal quantile `z` with `Phi(z) = p`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GradError::Domain(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// Graduated rates together with everything needed to report and plot them.
#[derive(Debug, Clone, PartialEq)]
pub struct GraduationResult {
    pub fitted: Vec<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    /// Leave-one-out classical residuals `loo - crude`; NaN for a single-age table.
    pub residuals: Vec<f64>,
    /// Leave-one-out proportional residuals `loo / crude - 1`; NaN where the crude
    /// rate is zero and for a single-age table.
    pub prop_residuals: Vec<f64>,
    pub spec: BandwidthSpec,
    pub logit_used: bool,
    pub smoother: SmootherMatrix,
    pub cv_trace: Option<CvTrace>,
}

impl GraduationResult {
    pub fn omega(&self) -> usize {
        self.fitted.len() - 1
    }

    /// Attaches `(1 - alpha)` pointwise intervals computed from `table`.
    pub fn with_confidence_intervals(mut self, table: &MortalityTable, alpha: f64) -> Result<Self> {
        let (lo, hi) = confidence_intervals(&self, table, alpha)?;
        self.lower = Some(lo);
        self.upper = Some(hi);
        Ok(self)
    }
}

/// Smooths the crude rates of `table` with the bandwidths of `spec`.
///
/// With `logit` set, the smoother averages log-odds and the result is mapped
/// back to rates. Residuals are the leave-one-out ones at the same bandwidths.
pub fn graduate(table: &MortalityTable, spec: &BandwidthSpec, logit: bool) -> Result<GraduationResult> {
    if spec.omega() != table.omega() {
        return Err(GradError::Domain(format!(
            "bandwidths cover ages 0..={} but the table covers 0..={}",
            spec.omega(),
            table.omega()
        )));
    }
    if spec.mode().is_adaptive() {
        table.require_exposures(&format!("the {} bandwidth", spec.mode()))?;
    }
    if logit {
        table.require_open_unit_rates("the logit transform")?;
    }
    let smoother = smoother_matrix(spec.per_age(), table.omega())?;
    let fitted = if logit {
        let t: Vec<f64> = table
            .crude_rates()
            .iter()
            .map(|&q| logit_transform(q))
            .collect::<Result<_>>()?;
        smoother.apply(&t).into_iter().map(inv_logit).collect()
    } else {
        smoother.apply(table.crude_rates())
    };
    // with a single age there is nothing left to predict from
    let loo = if table.omega() == 0 {
        vec![f64::NAN]
    } else {
        loo_estimates(table, spec, logit)?
    };
    let crude = table.crude_rates();
    let residuals = loo.iter().zip(crude).map(|(l, q)| l - q).collect();
    let prop_residuals = loo
        .iter()
        .zip(crude)
        .map(|(l, &q)| if q == 0.0 { f64::NAN } else { l / q - 1.0 })
        .collect();
    Ok(GraduationResult {
        fitted,
        lower: None,
        upper: None,
        residuals,
        prop_residuals,
        spec: spec.clone(),
        logit_used: logit,
        smoother,
        cv_trace: None,
    })
}

/// Pointwise `(1 - alpha)` bounds `fitted -/+ z * sqrt(sum_y K[x][y]^2 q_y (1 - q_y) / e_y)`,
/// with the fitted rates plugged in for `q_y`. Bounds are not clamped to `[0, 1]`.
pub fn confidence_intervals(
    result: &GraduationResult,
    table: &MortalityTable,
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let exposures = table.require_exposures("confidence intervals")?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GradError::Domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if result.fitted.len() != exposures.len() {
        return Err(GradError::Domain(format!(
            "result covers {} ages but the table has {}",
            result.fitted.len(),
            exposures.len()
        )));
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let point_var: Vec<f64> = result
        .fitted
        .iter()
        .zip(exposures)
        .map(|(&q, &e)| q * (1.0 - q) / e)
        .collect();
    let (lower, upper) = result
        .smoother
        .rows()
        .zip(&result.fitted)
        .map(|(row, &q)| {
            let var: f64 = row.iter().zip(&point_var).map(|(k, v)| k * k * v).sum();
            let half = z * var.sqrt();
            (q - half, q + half)
        })
        .unzip();
    Ok((lower, upper))
}
