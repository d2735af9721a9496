//! Joint prediction of the four aspects of a suspected trolling event in a
//! forum conversation snippet: the suspect comment's intention and intention
//! disclosure, and every direct responder's interpretation and response
//! strategy.
//!
//! Three systems are provided:
//!
//! * [`models::PipelineModel`]: chained logistic regressions in the task
//!   order I → D → R → B, each consuming the earlier labels as features.
//! * [`models::JointModel`]: a conditional random field over all four tasks
//!   with exact inference (see [`crf`]).
//! * [`models::HybridModel`]: a three-task CRF (I, D, R) followed by a
//!   response strategy classifier.
//!
//! The surrounding machinery covers comment dump ingestion and snippet
//! mining ([`snippets`]), lexicon resources ([`lexicons`]), featurization
//! ([`features`]), the L-BFGS engine ([`optim`]) and the cross-validation
//! protocol with agreement statistics ([`eval`]).

pub mod cli;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexicons;
pub mod models;
pub mod optim;
pub mod snippets;
pub mod synth;
mod text;

pub use error::{Error, Result};

/// Crate version, written into every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First line of every artifact written by the CLI.
pub fn artifact_header(seed: u64, command: &str) -> String {
    format!("#trollgraph v{VERSION} seed={seed} cmd={command}")
}
