//! Random-graph laboratory for near-sparse edge-probability bands: exact
//! small-n component laws, skip-ahead samplers with coupling, component
//! censuses and event flags, the analytic `q(C)` machinery, and Monte Carlo
//! experiment drivers that confront samples with the closed-form bounds.

pub mod components;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod probmodel;
pub mod sampler;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
