//! Analysis of finite random-map systems.
//!
//! A random-map system is a finite state space together with a weighted set
//! of maps; iterating a map drawn i.i.d. at every step yields a constructive
//! Markov chain. This crate decides whether the innovation sequence
//! determines the chain, quantifies the missing information when it does not
//! (the accordability relation, the counts M and N, the eventual image set of
//! the backward walk), filters the stationary law through sampled map words
//! exactly, and samples the stationary law perfectly by coupling from the
//! past. Analyses are exact over the rationals; floating point appears only
//! in Monte Carlo sampling and total-variation reporting.

pub mod accord;
pub mod catalog;
pub mod cftp;
pub mod clique;
pub mod dot;
pub mod error;
pub mod exec;
pub mod filtering;
pub mod hypothesis;
pub mod kernel;
pub mod ratio;
pub mod report;
pub mod scc;
pub mod semigroup;
pub mod simplex;
pub mod subsets;
pub mod system;

pub use error::{Error, Result};
pub use kernel::{build_kernel, classify_kernel, stationary_distribution, Distribution, Kernel};
pub use ratio::Rat;
pub use system::{
    load_system, serialize_system, MapElement, NamedMap, RandomMapSystem, StateSpace,
};
