//! Large-deviation bounds for sums of `[0,1]`-valued random variables whose
//! dependencies are described by a graph: adjacent variables may be
//! arbitrarily dependent, while every independent set of the graph is only
//! t-wise independent.
//!
//! The crate is split by concern:
//!
//! - [`bounds`]: closed-form tail and moment bounds, evaluated in log space.
//! - [`graph`]: dependency graphs, colorings and chromatic numbers.
//! - [`sampler`]: exactly t-wise independent polynomial families over a prime
//!   field and dependent ensembles built on top of them.
//! - [`verify`]: exhaustive and Monte Carlo oracles that check the bounds.
//! - [`patterns`]: pattern occurrence counting in random strings.

pub mod bounds;
mod error;
pub mod graph;
pub mod patterns;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
