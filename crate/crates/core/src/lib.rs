//! Adaptive Markov chain Monte Carlo in Wasserstein distance: kernel families,
//! adaptation policies, exact and empirical transport distances, and
//! diagnostics for containment, diminishing adaptation, drift and the law of
//! large numbers.

pub mod adaptation;
pub mod cli;
pub mod empirical;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod markov;
pub mod process;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
