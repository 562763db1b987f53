use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use gradkit::{
    factors_for, graduate, read_table, select_bandwidth, write_result, BandwidthSelection, BandwidthSpec,
    CvConfig, GraduationResult, MortalityTable,
};

use crate::config::RunConfig;
use crate::format::{g6, trace_line};
use crate::plot::render_plot;

/// What a successful run produced, for callers that want more than the files.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub table: MortalityTable,
    pub result: GraduationResult,
    pub selection: Option<BandwidthSelection>,
}

/// Reads, cross-validates, graduates and writes, printing the search trace to `out`.
///
/// Errors carry the stage they came from as their outermost context.
pub fn run(config: &RunConfig, out: &mut impl Write) -> Result<RunOutcome> {
    config.validate().context("configuration")?;
    let mode = config.bandwidth_mode;

    let table = read_table(&config.input_path, config.omega).context("input")?;

    let (h, s, selection) = if config.cvh || config.cvs {
        let defaults = CvConfig::default();
        let cv = CvConfig {
            optimize_h: config.cvh,
            optimize_s: config.cvs,
            residual_kind: config.cvres,
            start_h: config.h.unwrap_or(defaults.start_h),
            start_s: config.s.unwrap_or(defaults.start_s),
            ..defaults
        };
        let fixed_s = if mode.is_adaptive() && !config.cvs {
            config.s
        } else {
            None
        };
        let sel = select_bandwidth(&table, mode, config.logit, &cv, fixed_s).context("cross-validation")?;
        for record in &sel.trace.records {
            writeln!(out, "{}", trace_line(record))?;
        }
        if sel.trace.hit_iteration_cap {
            eprintln!(
                "warning: cross-validation stopped after {} iterations without converging",
                cv.max_iterations
            );
        }
        (sel.h, sel.s, Some(sel))
    } else {
        // validate() guarantees h; s is required for adaptive modes
        (config.h.unwrap_or_default(), config.s.unwrap_or(0.0), None)
    };

    let spec = match factors_for(&table, mode).context("graduation")? {
        Some(factors) => BandwidthSpec::adaptive(h, s, &factors),
        None => BandwidthSpec::fixed(h, table.omega()),
    }
    .context("graduation")?;
    let mut result = graduate(&table, &spec, config.logit).context("graduation")?;
    result.cv_trace = selection.as_ref().map(|sel| sel.trace.clone());
    if config.ci {
        result = result
            .with_confidence_intervals(&table, config.alpha)
            .context("confidence intervals")?;
    }

    if let Some(path) = &config.output_path {
        write_result(&result, &table, path).context("output")?;
    }
    if !config.plots.is_empty() {
        fs::create_dir_all(&config.plot_dir)
            .with_context(|| format!("plot: cannot create {}", config.plot_dir.display()))?;
    }
    for &kind in &config.plots {
        render_plot(
            kind,
            &table,
            Some(&result),
            config.plot_dir.join(kind.file_name()),
        )
        .with_context(|| format!("plot {}", kind.name()))?;
    }

    write!(out, "Bandwidth {mode}: h = {}", g6(h))?;
    if mode.is_adaptive() {
        write!(out, ", s = {}", g6(s))?;
    }
    if let Some(sel) = &selection {
        write!(out, ", CV ({}) = {}", config.cvres, g6(sel.cv))?;
    }
    writeln!(out)?;

    Ok(RunOutcome {
        table,
        result,
        selection,
    })
}
