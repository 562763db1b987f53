//! Leave-one-out cross-validation of the graduation and selection of `h` (and
//! optionally `s`) by damped least squares on the leave-one-out residuals.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bandwidth::{local_factors_ex, local_factors_vc, BandwidthMode, BandwidthSpec, LocalFactors};
use crate::error::{GradError, Result};
use crate::graduation::{inv_logit, logit_transform};
use crate::kernel::{softmax_in_place, weighted_mean, LogGrid};
use crate::optim::{minimize, LeastSquares, LmOptions};
use crate::table::MortalityTable;

/// Residual used inside the cross-validation statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualKind {
    /// `loo - crude`
    Classical,
    /// `loo / crude - 1`
    #[default]
    Proportional,
}

impl ResidualKind {
    pub fn code(self) -> &'static str {
        match self {
            ResidualKind::Classical => "res",
            ResidualKind::Proportional => "propres",
        }
    }

    fn residual(self, loo: f64, crude: f64) -> f64 {
        match self {
            ResidualKind::Classical => loo - crude,
            ResidualKind::Proportional => loo / crude - 1.0,
        }
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ResidualKind {
    type Err = GradError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "res" => Ok(ResidualKind::Classical),
            "propres" => Ok(ResidualKind::Proportional),
            other => Err(GradError::Validation(format!(
                "unknown residual kind `{other}` (expected res or propres)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub optimize_h: bool,
    pub optimize_s: bool,
    pub residual_kind: ResidualKind,
    pub start_h: f64,
    pub start_s: f64,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            optimize_h: true,
            optimize_s: false,
            residual_kind: ResidualKind::Proportional,
            start_h: 0.002,
            start_s: 0.2,
            rel_tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

/// One accepted iterate of the bandwidth search.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRecord {
    pub iteration: usize,
    pub rss: f64,
    /// The optimized parameters on their natural scale: `h`, `s`, or `h, s`.
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CvTrace {
    pub records: Vec<CvRecord>,
    pub converged: bool,
    /// Set when the search stopped at `max_iterations` without converging.
    pub hit_iteration_cap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub h: f64,
    pub s: f64,
    /// Cross-validation statistic at `(h, s)`.
    pub cv: f64,
    pub trace: CvTrace,
}

fn check_grid(table: &MortalityTable, spec: &BandwidthSpec) -> Result<()> {
    if table.omega() < 1 {
        return Err(GradError::Domain(
            "leave-one-out needs at least two ages (omega >= 1)".into(),
        ));
    }
    if spec.omega() != table.omega() {
        return Err(GradError::Domain(format!(
            "bandwidths cover ages 0..={} but the table covers 0..={}",
            spec.omega(),
            table.omega()
        )));
    }
    Ok(())
}

/// Values that are averaged: crude rates, or their logits.
fn smoothing_scale(table: &MortalityTable, logit: bool) -> Result<Vec<f64>> {
    if logit {
        table.require_open_unit_rates("the logit transform")?;
        table.crude_rates().iter().map(|&q| logit_transform(q)).collect()
    } else {
        Ok(table.crude_rates().to_vec())
    }
}

fn loo_at(grid: &LogGrid, values: &[f64], per_age: &[f64], x: usize, logit: bool) -> f64 {
    let mut w = vec![0.0; values.len()];
    grid.log_masses(x, per_age[x], &mut w);
    w[x] = f64::NEG_INFINITY;
    softmax_in_place(&mut w);
    let t = weighted_mean(&w, values);
    if logit {
        inv_logit(t)
    } else {
        t
    }
}

/// Estimate at age `x` from every other age, with the kernel row renormalized
/// after dropping age `x`.
pub fn loo_estimate(table: &MortalityTable, spec: &BandwidthSpec, logit: bool, x: usize) -> Result<f64> {
    check_grid(table, spec)?;
    if x > table.omega() {
        return Err(GradError::Domain(format!(
            "age {x} lies outside 0..={}",
            table.omega()
        )));
    }
    let values = smoothing_scale(table, logit)?;
    let grid = LogGrid::new(table.omega());
    Ok(loo_at(&grid, &values, spec.per_age(), x, logit))
}

/// Leave-one-out estimates for every age.
pub fn loo_estimates(table: &MortalityTable, spec: &BandwidthSpec, logit: bool) -> Result<Vec<f64>> {
    check_grid(table, spec)?;
    let values = smoothing_scale(table, logit)?;
    let grid = LogGrid::new(table.omega());
    Ok(loo_with(&grid, &values, spec.per_age(), logit))
}

fn loo_with(grid: &LogGrid, values: &[f64], per_age: &[f64], logit: bool) -> Vec<f64> {
    (0..values.len())
        .into_par_iter()
        .map(|x| loo_at(grid, values, per_age, x, logit))
        .collect()
}

fn check_residual_kind(table: &MortalityTable, kind: ResidualKind) -> Result<()> {
    if kind == ResidualKind::Proportional {
        if let Some(age) = table.crude_rates().iter().position(|&q| q == 0.0) {
            return Err(GradError::Validation(format!(
                "proportional residuals divide by the crude rate, which is zero at age {age}"
            )));
        }
    }
    Ok(())
}

/// Per-age leave-one-out residuals, always on the rate scale.
pub fn cv_residuals(
    table: &MortalityTable,
    spec: &BandwidthSpec,
    logit: bool,
    kind: ResidualKind,
) -> Result<Vec<f64>> {
    check_residual_kind(table, kind)?;
    let loo = loo_estimates(table, spec, logit)?;
    Ok(loo
        .iter()
        .zip(table.crude_rates())
        .map(|(&l, &q)| kind.residual(l, q))
        .collect())
}

/// Sum of squared leave-one-out residuals.
pub fn cv_statistic(
    table: &MortalityTable,
    spec: &BandwidthSpec,
    logit: bool,
    kind: ResidualKind,
) -> Result<f64> {
    Ok(cv_residuals(table, spec, logit, kind)?
        .iter()
        .map(|r| r * r)
        .sum())
}

/// Builds the local factors that an adaptive mode needs from the table.
pub fn factors_for(table: &MortalityTable, mode: BandwidthMode) -> Result<Option<LocalFactors>> {
    match mode {
        BandwidthMode::Fixed => Ok(None),
        BandwidthMode::Exposure => {
            let e = table.require_exposures("the EX bandwidth")?;
            local_factors_ex(e).map(Some)
        }
        BandwidthMode::VariationCoefficient => {
            let e = table.require_exposures("the VC bandwidth")?;
            local_factors_vc(table.crude_rates(), e).map(Some)
        }
    }
}

/// The CV objective over the free parameters: `ln h` and/or `s`.
struct CvProblem<'a> {
    grid: LogGrid,
    values: Vec<f64>,
    crude: &'a [f64],
    factors: Option<&'a [f64]>,
    logit: bool,
    kind: ResidualKind,
    free_h: bool,
    free_s: bool,
    h: f64,
    s: f64,
}

impl CvProblem<'_> {
    fn unpack(&self, p: &[f64]) -> (f64, f64) {
        let mut it = p.iter();
        let h = if self.free_h {
            it.next().unwrap().exp()
        } else {
            self.h
        };
        let s = if self.free_s { *it.next().unwrap() } else { self.s };
        (h, s)
    }

    fn natural(&self, p: &[f64]) -> Vec<f64> {
        let (h, s) = self.unpack(p);
        let mut out = Vec::with_capacity(2);
        if self.free_h {
            out.push(h);
        }
        if self.free_s {
            out.push(s);
        }
        out
    }

    fn per_age(&self, h: f64, s: f64) -> Vec<f64> {
        match self.factors {
            Some(l) => l.iter().map(|l| h * l.powf(s)).collect(),
            None => vec![h; self.values.len()],
        }
    }
}

impl LeastSquares for CvProblem<'_> {
    fn residuals(&mut self, p: &[f64]) -> Option<Vec<f64>> {
        let (h, s) = self.unpack(p);
        if !(h.is_finite() && h > 0.0) {
            return None;
        }
        let per_age = self.per_age(h, s);
        let loo = loo_with(&self.grid, &self.values, &per_age, self.logit);
        let r: Vec<f64> = loo
            .iter()
            .zip(self.crude)
            .map(|(&l, &q)| self.kind.residual(l, q))
            .collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        let is_s = self.free_s && (!self.free_h || i == 1);
        if is_s {
            (0.0, 1.0)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    fn fd_step(&self, _p: &[f64], _i: usize) -> f64 {
        // 1e-6 in ln h is a relative step of 1e-6 in h
        1e-6
    }

    fn max_step(&self, i: usize) -> f64 {
        // at most one decade of h per iteration; without this a single step
        // can land on the flat interpolating plateau near h = 0
        if self.free_h && i == 0 {
            std::f64::consts::LN_10
        } else {
            f64::INFINITY
        }
    }
}

/// Minimizes `CV(h)`, `CV(h | s)` or `CV(h, s)` depending on `config` and `mode`.
///
/// `fixed_s` must be given exactly when the mode is adaptive and `s` is not optimized.
pub fn select_bandwidth(
    table: &MortalityTable,
    mode: BandwidthMode,
    logit: bool,
    config: &CvConfig,
    fixed_s: Option<f64>,
) -> Result<BandwidthSelection> {
    if config.optimize_s && !mode.is_adaptive() {
        return Err(GradError::Validation(
            "optimizing s requires an adaptive bandwidth (EX or VC)".into(),
        ));
    }
    let wants_fixed_s = mode.is_adaptive() && !config.optimize_s;
    match (wants_fixed_s, fixed_s) {
        (true, None) => {
            return Err(GradError::Validation(format!(
                "an {mode} bandwidth with s not cross-validated needs a value for s"
            )))
        }
        (false, Some(_)) => {
            return Err(GradError::Validation(
                "a fixed s is only meaningful for an adaptive bandwidth with s not cross-validated".into(),
            ))
        }
        _ => {}
    }
    if !(config.start_h.is_finite() && config.start_h > 0.0) {
        return Err(GradError::Validation(format!(
            "start value for h must be positive, got {}",
            config.start_h
        )));
    }
    let s_value = fixed_s.unwrap_or(if mode.is_adaptive() { config.start_s } else { 0.0 });
    if !(0.0..=1.0).contains(&s_value) {
        return Err(GradError::Validation(format!(
            "s must lie in [0, 1], got {s_value}"
        )));
    }
    if table.omega() < 1 {
        return Err(GradError::Domain(
            "cross-validation needs at least two ages (omega >= 1)".into(),
        ));
    }
    check_residual_kind(table, config.residual_kind)?;
    let factors = factors_for(table, mode)?;

    let mut problem = CvProblem {
        grid: LogGrid::new(table.omega()),
        values: smoothing_scale(table, logit)?,
        crude: table.crude_rates(),
        factors: factors.as_ref().map(|f| f.factors()),
        logit,
        kind: config.residual_kind,
        free_h: config.optimize_h,
        free_s: config.optimize_s,
        h: config.start_h,
        s: s_value,
    };
    let mut start = Vec::with_capacity(2);
    if config.optimize_h {
        start.push(config.start_h.ln());
    }
    if config.optimize_s {
        start.push(s_value);
    }
    let opts = LmOptions {
        rel_tolerance: config.rel_tolerance,
        max_iterations: config.max_iterations,
        ..LmOptions::default()
    };
    let report = minimize(&mut problem, &start, &opts).map_err(|p| {
        let (h, s) = problem.unpack(&p);
        GradError::NonFiniteObjective { h, s }
    })?;
    let (mut h, s) = problem.unpack(&report.params);
    if report.params == start {
        // exp(ln h) need not round-trip
        h = config.start_h;
    }
    let records = report
        .iterates
        .iter()
        .map(|it| CvRecord {
            iteration: it.index,
            rss: it.rss,
            params: problem.natural(&it.params),
        })
        .collect();
    Ok(BandwidthSelection {
        h,
        s,
        cv: report.rss,
        trace: CvTrace {
            records,
            converged: report.converged,
            hit_iteration_cap: report.hit_iteration_cap,
        },
    })
}
