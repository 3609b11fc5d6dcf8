//! File formats, model descriptors, the acceptance suite and the command-line
//! driver on top of `rigidity-forge-core`.

pub mod cli;
pub mod codec;
pub mod descriptor;
pub mod suite;
