//! Fair allocation of indivisible goods under additive valuations.
//!
//! The crate provides two allocation algorithms built on a Nash social welfare
//! matching: [`algorithms::solve_efr`] guarantees a `(√3 − 1)`-approximation of
//! envy-freeness up to a random good, and [`algorithms::solve_efx`] guarantees a
//! `(φ − 1)`-approximation of envy-freeness up to any good. Every guarantee is
//! checked with exact rational arithmetic, including the irrational thresholds.
//!
//! The [`oracle`] module holds brute-force reference implementations used to
//! cross-check the pipeline on small instances.

pub mod algorithms;
pub mod envy;
mod error;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod rational;

pub use error::{Error, Result};
pub use model::{Allocation, Bundle, FairnessNotion, FairnessReport, Factor, Instance};
pub use rational::{Rational, Threshold};
