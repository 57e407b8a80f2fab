//! Labels, finding taxonomy, resampling splits and image variants.

mod cache;
mod finding;
mod labels;
mod splits;
mod variant;

pub use cache::VariantCache;
pub(crate) use cache::write_atomic;
pub use finding::{Finding, N_FINDINGS};
pub use labels::{load_labels, parse_labels, prevalence, write_labels, LabelRow, LabelTable};
pub use splits::{make_splits, train_size, Resample, SplitPlan, SPLIT_PLAN_FORMAT};
pub use variant::{materialize_variant, Materialized, PreprocessConfig, Variant};
