//! Run-length-limited DNA strands: the constrained system, its maximum-entropy
//! Markov measure, and the cost of synthesizing sampled batches against a
//! periodic machine reference.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod measure;
pub mod par;
pub mod params;
pub mod scs;
pub mod seeding;
pub mod spectral;
pub mod strand;
pub mod synthesis;

pub use error::{Error, Result};
pub use graph::{build_graph, count_words, TransferGraph};
pub use measure::{Batch, MarkovMeasure};
pub use par::Execution;
pub use params::{ConstraintParams, StateId, Symbol};
pub use spectral::{capacity, perron_eigenvalue, SpectralData};
pub use strand::StrandFormat;
pub use synthesis::{batch_cost, expected_cost_rate, greedy_embed, ReferenceSeq};
