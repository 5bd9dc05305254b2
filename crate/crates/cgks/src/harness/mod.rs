//! Case driver: configuration, built-in cases, error norms, field output,
//! and the independent oracles used by the test suite.

pub mod cases;
pub mod config;
pub mod oracles;
pub mod output;
pub mod riemann;

pub use cases::{run_case, CaseOutput, ErrorNorms, ErrorReport};
pub use config::CaseConfig;
