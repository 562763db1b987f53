//! The `gradkit` command line: mortality CSV in, graduated table, search trace
//! and SVG diagnostics out.

mod config;
pub mod format;
pub mod plot;
mod run;

pub use config::{Cli, RunConfig};
pub use plot::{plot_svg, render_plot, PlotKind};
pub use run::{run, RunOutcome};
