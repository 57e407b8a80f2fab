//! Configuration, preprocessing, experiment orchestration and reporting.
//!
//! The three entry points mirror the command line: [`cmd_preprocess`] fills
//! the variant cache, [`cmd_run`] trains and evaluates the selected
//! experiments over every resample, and [`cmd_report`] renders plots and a
//! results table from a finished run.

mod config;
mod experiment;
mod preprocess;
mod report;
mod run;

pub use config::{Paths, PipelineConfig, SplitConfig, CACHE_DIR_ENV, CONFIG_VERSION};
pub use experiment::{Experiment, ModelJob, EN_NORMAL_MEMBERS};
pub use preprocess::{cmd_preprocess, variant_cache, PreprocessSummary};
pub use report::{cmd_report, correlation_svg, resolve_run_dir, roc_svg, roc_to_svg, ReportSummary, ROC_ORIGIN, ROC_SIDE};
pub use run::{
    cmd_run, CorrelationSummary, ExperimentRecord, JobRecord, ResampleRecord, RunOptions, RunSummary,
    LATEST_RUN_FILE,
};
