//! Graduation of age-specific mortality rates with discrete beta kernels.
//!
//! Crude rates `q_x` on the ages `0..=omega` are smoothed by a Nadaraya-Watson
//! estimator whose weights are discrete beta probability mass functions. The
//! kernels live on the age grid itself, so no weight leaks past age 0 or
//! `omega`. Bandwidths are either fixed or scaled per age by a reliability
//! factor derived from exposures (EX) or from the binomial variation
//! coefficient (VC), and are selected by leave-one-out cross-validation.
//!
//! ```
//! use gradkit::{graduate, BandwidthSpec, MortalityTable};
//!
//! let table = MortalityTable::new(vec![0.004, 0.0003, 0.0002, 0.0004, 0.001], None)?;
//! let spec = BandwidthSpec::fixed(0.05, table.omega())?;
//! let result = graduate(&table, &spec, false)?;
//! assert_eq!(result.fitted.len(), 5);
//! # Ok::<(), gradkit::GradError>(())
//! ```

pub mod bandwidth;
pub mod crossval;
pub mod error;
pub mod graduation;
pub mod io;
pub mod kernel;
mod optim;
pub mod table;

pub use bandwidth::{
    adaptive_bandwidths, local_factors_ex, local_factors_vc, BandwidthMode, BandwidthSpec, FactorKind,
    LocalFactors,
};
pub use crossval::{
    cv_residuals, cv_statistic, factors_for, loo_estimate, loo_estimates, select_bandwidth,
    BandwidthSelection, CvConfig, CvRecord, CvTrace, ResidualKind,
};
pub use error::{GradError, Result};
pub use graduation::{
    confidence_intervals, graduate, inv_logit, logit_transform, normal_quantile, GraduationResult,
};
pub use io::{read_result, read_table, result_csv, write_result, ResultRow};
pub use kernel::{db_kernel_log, normalized_kernel, smoother_matrix, KernelParams, SmootherMatrix};
pub use table::MortalityTable;
