//! Experiment harness for the `alig` optimizers: theorem envelopes, rate
//! fits, learning-rate sweeps and a property suite.

pub mod envelopes;
pub mod error;
pub mod experiments;
pub mod lemmas;
pub mod oracle;
pub mod rates;
pub mod sweep;
pub mod verify;

pub use error::{HarnessError, Result};
