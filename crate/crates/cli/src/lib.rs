//! Command-line drivers: richness reports, decay curves, subclass-tree
//! analysis, typicality batches, endpoint fetching and synthetic data.

pub mod commands;
pub mod decay;
pub mod error;
pub mod load;
pub mod svg;
pub mod tree;

pub use commands::{run, run_args, Cli};
pub use error::{exit, CliError};
