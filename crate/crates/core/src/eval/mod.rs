//! Cross-validation protocol, per-class metrics, reporting and annotator
//! agreement.

mod corpus;
mod folds;
mod kappa;
mod metrics;
mod protocol;
mod report;

pub use corpus::{corpus_stats, CorpusStats};
pub use folds::{make_folds, FoldPlan};
pub use kappa::{
    annotation_tables, fleiss_kappa, parse_annotations, read_annotations, AnnotationRow,
    AnnotationTable, REFERENCE_KAPPA,
};
pub use metrics::{class_distribution, evaluate_labels, prf1, ClassMetrics, TaskMetrics};
pub use protocol::{check_leakage, run_cv, CvConfig, CvOutcome, FoldAudit, TuningPoint};
pub use report::{report, Report, ReportRow, SHARE_THRESHOLD};
