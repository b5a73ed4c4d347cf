//! Numerical verification of operator Kantorovich-type inequalities on
//! finite-dimensional Hermitian matrices.

pub mod catalog;
pub mod demo;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod random;
pub mod report;
pub mod search;
pub mod serde_matrix;
pub mod window;

pub use catalog::{
    evaluate, registry, statement, verify_counterexample, Certificate, EvalError, InstanceBundle, Statement,
    StatementClass, StatementId, Verdict,
};
pub use error::LinalgError;
pub use linalg::{geometric_mean, HermitianMatrix};
pub use maps::{MapKindTag, PartialIsometryPair, PositivityClass, UnitalPositiveMap};
pub use report::{CertificateRecord, RunReport, StatementSummary};
pub use search::{probe_conjecture, sweep, ProbeConfig, SearchConfig, SearchState, SweepOptions};
pub use window::SpectralWindow;
