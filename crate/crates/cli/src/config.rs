use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;
use gradkit::{BandwidthMode, ResidualKind};

use crate::plot::PlotKind;

/// Everything a single graduation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub omega: Option<usize>,
    pub bandwidth_mode: BandwidthMode,
    /// Used verbatim when `cvh` is off, otherwise the start value of the search.
    pub h: Option<f64>,
    /// Used verbatim when `cvs` is off, otherwise the start value of the search.
    pub s: Option<f64>,
    pub cvh: bool,
    pub cvs: bool,
    pub cvres: ResidualKind,
    pub logit: bool,
    pub alpha: f64,
    pub ci: bool,
    pub plots: Vec<PlotKind>,
    pub plot_dir: PathBuf,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            output_path: None,
            omega: None,
            bandwidth_mode: BandwidthMode::Fixed,
            h: None,
            s: None,
            cvh: true,
            cvs: false,
            cvres: ResidualKind::Proportional,
            logit: false,
            alpha: 0.05,
            ci: false,
            plots: Vec::new(),
            plot_dir: PathBuf::from("."),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let adaptive = self.bandwidth_mode.is_adaptive();
        if !self.cvh && self.h.is_none() {
            bail!("--no-cvh needs a bandwidth via --h");
        }
        if adaptive && !self.cvs && self.s.is_none() {
            bail!(
                "the {} bandwidth needs --s unless s is cross-validated (--cvs)",
                self.bandwidth_mode
            );
        }
        if !adaptive && (self.cvs || self.s.is_some()) {
            bail!("s applies only to the EX and VC bandwidths");
        }
        if let Some(h) = self.h {
            if !(h.is_finite() && h > 0.0) {
                bail!("--h must be positive, got {h}");
            }
        }
        if let Some(s) = self.s {
            if !(0.0..=1.0).contains(&s) {
                bail!("--s must lie in [0, 1], got {s}");
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("--alpha must lie in (0, 1), got {}", self.alpha);
        }
        Ok(())
    }
}

/// Graduates crude mortality rates with discrete beta kernels.
#[derive(Debug, Parser)]
#[command(name = "gradkit", version)]
pub struct Cli {
    /// CSV with header `age,qx[,ex]`
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Where to write the graduated table
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Drop ages above N before anything else
    #[arg(long, value_name = "N")]
    omega: Option<usize>,
    /// FX, EX or VC
    #[arg(long, default_value = "FX", value_parser = |s: &str| s.parse::<BandwidthMode>())]
    bandwidth: BandwidthMode,
    #[arg(long, value_name = "REAL")]
    h: Option<f64>,
    #[arg(long, value_name = "REAL")]
    s: Option<f64>,
    /// Cross-validate h (default)
    #[arg(long, overrides_with = "no_cvh")]
    cvh: bool,
    #[arg(long, overrides_with = "cvh")]
    no_cvh: bool,
    /// Cross-validate s as well
    #[arg(long, overrides_with = "no_cvs")]
    cvs: bool,
    #[arg(long, overrides_with = "cvs")]
    no_cvs: bool,
    /// res (classical) or propres (proportional)
    #[arg(long, default_value = "propres", value_parser = |s: &str| s.parse::<ResidualKind>())]
    cvres: ResidualKind,
    /// Smooth on the log-odds scale
    #[arg(long)]
    logit: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Add pointwise confidence bounds
    #[arg(long)]
    ci: bool,
    #[arg(long, value_enum, value_delimiter = ',', value_name = "KIND[,KIND...]")]
    plot: Vec<PlotKind>,
    #[arg(long, default_value = ".", value_name = "PATH")]
    plot_dir: PathBuf,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            input_path: c.input,
            output_path: c.output,
            omega: c.omega,
            bandwidth_mode: c.bandwidth,
            h: c.h,
            s: c.s,
            cvh: !c.no_cvh,
            cvs: c.cvs && !c.no_cvs,
            cvres: c.cvres,
            logit: c.logit,
            alpha: c.alpha,
            ci: c.ci,
            plots: c.plot,
            plot_dir: c.plot_dir,
        }
    }
}
