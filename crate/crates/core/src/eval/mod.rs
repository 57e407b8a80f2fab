//! ROC analysis, per-split aggregation, correlation and ensembling.

mod aggregate;
mod correlation;
mod ensemble;
mod predictions;
mod roc;

pub use aggregate::{aggregate, mean_sd, table_csv, table_text, AucReport, AucSummary};
pub use correlation::{correlation_matrix, pearson, per_finding_correlation, CorrelationMatrix};
pub use ensemble::ensemble_average;
pub use predictions::{PredictionMatrix, Provenance};
pub use roc::{auc, finding_aucs, roc_curve, RocCurve};
