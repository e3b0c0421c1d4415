//! Effective-resistance metrics on weighted networks.
//!
//! A resistance network is a connected graph whose edges carry symmetric
//! positive conductances. This crate computes the metrics that arise from
//! its Dirichlet energy form: the finite effective resistance through six
//! equivalent formulations, the free / wired / harmonic / boundary / trace
//! resistances of infinite networks as exhaustion limits, Schur-complement
//! network reduction, random-walk verification of the probabilistic
//! identities, and the isometric embedding of the resulting metric spaces
//! into coordinates.

pub mod embedding;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod models;
pub mod network;
pub mod oracle;
pub mod resistance;
pub mod solver;
pub mod trace;
pub mod walk;

pub use nalgebra;

pub use embedding::{
    EmbeddingResult, MeasureMode, NsdReport, ProbabilityMeasure,
};
pub use error::{Error, Result};
pub use limits::{Convergence, LimitEstimate, Monotonicity, RoydenSplit, TruncationValue};
pub use models::{Exhaustion, InfiniteNetworkSpec, NetworkSource};
pub use network::{load_network, Network, ValidationReport};
pub use resistance::ResistanceReport;
pub use solver::{CurrentFlow, Potential};
pub use trace::TraceResult;
pub use walk::{HittingEstimate, WalkConfig};
