use crate::error::{GradError, Result};

/// Crude mortality rates for the contiguous ages `0..=omega`, with optional
/// exposures to risk.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    crude_rates: Vec<f64>,
    exposures: Option<Vec<f64>>,
}

impl MortalityTable {
    pub fn new(crude_rates: Vec<f64>, exposures: Option<Vec<f64>>) -> Result<Self> {
        if crude_rates.is_empty() {
            return Err(GradError::Validation("mortality table has no ages".into()));
        }
        if let Some(age) = crude_rates.iter().position(|q| !(0.0..=1.0).contains(q)) {
            return Err(GradError::Validation(format!(
                "crude rate at age {age} must lie in [0, 1], got {}",
                crude_rates[age]
            )));
        }
        if let Some(e) = &exposures {
            if e.len() != crude_rates.len() {
                return Err(GradError::Validation(format!(
                    "{} crude rates but {} exposures",
                    crude_rates.len(),
                    e.len()
                )));
            }
            if let Some(age) = e.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(GradError::Validation(format!(
                    "exposure at age {age} must be positive and finite, got {}",
                    e[age]
                )));
            }
        }
        Ok(Self {
            crude_rates,
            exposures,
        })
    }

    /// Highest age in the table.
    pub fn omega(&self) -> usize {
        self.crude_rates.len() - 1
    }

    pub fn len(&self) -> usize {
        self.crude_rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crude_rates.is_empty()
    }

    pub fn crude_rates(&self) -> &[f64] {
        &self.crude_rates
    }

    pub fn exposures(&self) -> Option<&[f64]> {
        self.exposures.as_deref()
    }

    /// Exposures, or an error explaining what needs them.
    pub fn require_exposures(&self, purpose: &str) -> Result<&[f64]> {
        self.exposures().ok_or_else(|| {
            GradError::Missing(format!(
                "{purpose} requires exposures to risk (an `ex` column), but the table has none"
            ))
        })
    }

    /// Keeps ages `0..=omega` only.
    pub fn truncate(&self, omega: usize) -> Result<Self> {
        if omega > self.omega() {
            return Err(GradError::Validation(format!(
                "omega {omega} exceeds the highest age {} in the table",
                self.omega()
            )));
        }
        Ok(Self {
            crude_rates: self.crude_rates[..=omega].to_vec(),
            exposures: self.exposures.as_ref().map(|e| e[..=omega].to_vec()),
        })
    }

    /// Fails unless every crude rate lies strictly inside `(0, 1)`.
    pub(crate) fn require_open_unit_rates(&self, purpose: &str) -> Result<()> {
        match self.crude_rates.iter().position(|&q| !(q > 0.0 && q < 1.0)) {
            Some(age) => Err(GradError::Validation(format!(
                "{purpose} needs every crude rate strictly inside (0, 1); age {age} has {}",
                self.crude_rates[age]
            ))),
            None => Ok(()),
        }
    }
}
