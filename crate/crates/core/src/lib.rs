//! Local quantum architecture search.
//!
//! Starting from a template circuit (usually a hardware-efficient ansatz),
//! the search repeatedly samples local edits (add, remove, switch or move a
//! gate), trains every edited circuit on a regression task, and keeps the
//! best ones as parents for the next round.
//!
//! - [`circuit`]: gate vocabulary, [`Ansatz`] and HEA-k-m construction
//! - [`sim`]: state-vector simulator with adjoint gradients
//! - [`train`]: Adam mini-batch regression and metrics
//! - [`data`]: synthetic datasets, CSV ingestion, min-max scaling, splits
//! - [`search`]: modification sampling and the search loop
//! - [`report`]: JSON and CSV reports

pub mod circuit;
pub mod data;
pub mod error;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod report;
pub mod rng;
pub mod search;
pub mod sim;
pub mod train;

pub use circuit::{build_hea, Ansatz, Binding, Gate, GateKind, HeaSpec, Violation};
pub use data::{Dataset, Scaler, Split};
pub use error::{Error, Result};
pub use search::{
    expected_action_count, run_lqas, run_lqas_with, sample_modified, Candidate, IterationReport,
    Modification, ModificationProbs, SearchConfig, SearchOutcome,
};
pub use sim::{gradient, predict, predict_batch, StateVector};
pub use train::{mse, r2, train, Metrics, TrainConfig, TrainResult};
