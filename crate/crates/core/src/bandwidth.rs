//! Per-age reliability factors and the adaptive bandwidths `h * l_x^s` built from them.

use std::fmt;
use std::str::FromStr;

use crate::error::{GradError, Result};

/// How the bandwidth varies across ages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BandwidthMode {
    /// One bandwidth for every age.
    #[default]
    Fixed,
    /// Reliability taken from the amount of exposure.
    Exposure,
    /// Reliability taken from the binomial variation coefficient.
    VariationCoefficient,
}

impl BandwidthMode {
    pub fn is_adaptive(self) -> bool {
        !matches!(self, BandwidthMode::Fixed)
    }

    pub fn code(self) -> &'static str {
        match self {
            BandwidthMode::Fixed => "FX",
            BandwidthMode::Exposure => "EX",
            BandwidthMode::VariationCoefficient => "VC",
        }
    }
}

impl fmt::Display for BandwidthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for BandwidthMode {
    type Err = GradError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FX" => Ok(BandwidthMode::Fixed),
            "EX" => Ok(BandwidthMode::Exposure),
            "VC" => Ok(BandwidthMode::VariationCoefficient),
            other => Err(GradError::Validation(format!(
                "unknown bandwidth mode `{other}` (expected FX, EX or VC)"
            ))),
        }
    }
}

/// Which reliability measure produced a set of local factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Exposure,
    VariationCoefficient,
}

impl FactorKind {
    pub fn mode(self) -> BandwidthMode {
        match self {
            FactorKind::Exposure => BandwidthMode::Exposure,
            FactorKind::VariationCoefficient => BandwidthMode::VariationCoefficient,
        }
    }
}

/// Local factors `l_x`, each in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactors {
    factors: Vec<f64>,
    kind: FactorKind,
}

impl LocalFactors {
    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

fn check_exposures(exposures: &[f64]) -> Result<()> {
    if exposures.is_empty() {
        return Err(GradError::Validation("exposure vector is empty".into()));
    }
    match exposures.iter().position(|&e| !(e.is_finite() && e > 0.0)) {
        Some(age) => Err(GradError::Validation(format!(
            "exposure at age {age} must be positive and finite, got {}",
            exposures[age]
        ))),
        None => Ok(()),
    }
}

/// Exposure-based factors: inverse empirical frequency of exposure, scaled so
/// the largest factor equals one.
pub fn local_factors_ex(exposures: &[f64]) -> Result<LocalFactors> {
    check_exposures(exposures)?;
    let total: f64 = exposures.iter().sum();
    let inverse_freq: Vec<f64> = exposures.iter().map(|e| total / e).collect();
    let top = inverse_freq.iter().copied().fold(f64::MIN, f64::max);
    let factors = inverse_freq.iter().map(|v| v / top).collect();
    Ok(LocalFactors {
        factors,
        kind: FactorKind::Exposure,
    })
}

/// Variation-coefficient factors `VC_x / sum_y VC_y`, with
/// `VC_x = sqrt(e q (1 - q)) / (e q)`.
pub fn local_factors_vc(crude_rates: &[f64], exposures: &[f64]) -> Result<LocalFactors> {
    check_exposures(exposures)?;
    if crude_rates.len() != exposures.len() {
        return Err(GradError::Validation(format!(
            "{} crude rates but {} exposures",
            crude_rates.len(),
            exposures.len()
        )));
    }
    if let Some(age) = crude_rates.iter().position(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(GradError::Validation(format!(
            "crude rate {} at age {age} is outside (0, 1); the variation coefficient is undefined there",
            crude_rates[age]
        )));
    }
    let vc: Vec<f64> = crude_rates
        .iter()
        .zip(exposures)
        .map(|(&q, &e)| (e * q * (1.0 - q)).sqrt() / (e * q))
        .collect();
    let total: f64 = vc.iter().sum();
    Ok(LocalFactors {
        factors: vc.iter().map(|v| v / total).collect(),
        kind: FactorKind::VariationCoefficient,
    })
}

fn check_sensitivity(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(GradError::Validation(format!(
            "sensitivity s must lie in [0, 1], got {s}"
        )))
    }
}

fn check_global_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(GradError::Validation(format!(
            "global bandwidth must be positive and finite, got {h}"
        )))
    }
}

/// Per-age bandwidths `global_h * l_x^s`.
pub fn adaptive_bandwidths(global_h: f64, s: f64, factors: &LocalFactors) -> Result<Vec<f64>> {
    check_global_h(global_h)?;
    check_sensitivity(s)?;
    debug_assert!(factors.factors.iter().all(|&l| l > 0.0));
    Ok(factors.factors.iter().map(|l| global_h * l.powf(s)).collect())
}

/// Bandwidth choice together with the per-age bandwidths it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSpec {
    mode: BandwidthMode,
    global_h: f64,
    sensitivity_s: f64,
    per_age: Vec<f64>,
}

impl BandwidthSpec {
    /// Same bandwidth `h` at every age of `0..=omega`.
    pub fn fixed(h: f64, omega: usize) -> Result<Self> {
        check_global_h(h)?;
        Ok(Self {
            mode: BandwidthMode::Fixed,
            global_h: h,
            sensitivity_s: 0.0,
            per_age: vec![h; omega + 1],
        })
    }

    pub fn adaptive(h: f64, s: f64, factors: &LocalFactors) -> Result<Self> {
        let per_age = adaptive_bandwidths(h, s, factors)?;
        Ok(Self {
            mode: factors.kind.mode(),
            global_h: h,
            sensitivity_s: s,
            per_age,
        })
    }

    pub fn mode(&self) -> BandwidthMode {
        self.mode
    }

    pub fn global_h(&self) -> f64 {
        self.global_h
    }

    pub fn sensitivity_s(&self) -> f64 {
        self.sensitivity_s
    }

    pub fn per_age(&self) -> &[f64] {
        &self.per_age
    }

    pub fn omega(&self) -> usize {
        self.per_age.len() - 1
    }
}
