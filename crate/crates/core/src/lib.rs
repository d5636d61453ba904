pub mod cli;
pub mod couplings;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod metrics;
pub mod oracles;
pub mod paths;
pub mod report;
pub mod rng;
pub mod sde;
pub mod special;

#[cfg(test)]
pub(crate) mod testutil;
