//! Bayesian survival analysis for Test-cricket batting.
//!
//! A batsman's dismissal probability (the *hazard*) is modelled as a function
//! of their current score through an "effective average" curve that starts at
//! an initial ability and relaxes exponentially towards an equilibrium
//! ability. Careers of innings (with not-outs treated as right-censored
//! observations) feed a censored likelihood; a nested-sampling engine turns
//! that likelihood plus the priors into posterior samples and a marginal
//! likelihood, which supports model comparison against a constant-hazard
//! baseline. A post-processing stage pools many players' posteriors into a
//! hyperparameter posterior and predicts the ability of an unseen player.
//!
//! The `hazard-bayes` binary (see [`cli`]) wires these pieces into an
//! offline, seed-reproducible pipeline over CSV files.

pub mod analysis;
pub mod cli;
pub mod hierarchy;
pub mod ingest;
pub mod model;
pub mod nested;
pub mod priors;
pub mod simulate;
pub mod stats;

pub use model::{BattingParams, InningsRecord};
pub use nested::NsConfig;
