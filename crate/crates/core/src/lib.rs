//! Error-compensated quantized SGD.
//!
//! The crate is organised bottom-up:
//!
//! * [`rng`]: counter-based random streams keyed by `(seed, worker, iteration)`.
//! * [`quantizer`]: stochastic uniform quantization plus the one-bit baseline.
//! * [`feedback`]: accumulated quantization error and gradient compensation.
//! * [`codec`]: the `ECQ1` wire format and communication-cost accounting.
//! * [`problems`]: quadratic testbeds, synthetic and LibSVM datasets.
//! * [`sim`]: deterministic synchronous data-parallel SGD.
//! * [`analysis`]: closed-form bounds and their empirical verifiers.
//! * [`config`]: the flat `key = value` experiment configuration.

pub mod analysis;
pub mod codec;
pub mod config;
mod error;
pub mod feedback;
pub mod linalg;
pub mod problems;
pub mod quantizer;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};

/// Library version echoed into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
