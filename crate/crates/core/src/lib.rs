//! Exact Bayesian network structure learning by order-based dynamic
//! programming with suborder pruning, spanning-tree bounds and
//! divide-and-conquer.

pub mod bounds;
pub mod dnc;
pub mod engine;
pub mod error;
pub mod nodeset;
pub mod oracle;
pub mod scores;
pub mod sim;
pub mod testing;

pub use error::{Error, Result};
pub use nodeset::NodeSet;
pub use scores::ScoreProvider;
