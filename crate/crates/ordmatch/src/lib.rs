//! Exact analysis of randomized ordinal assignment mechanisms and of the
//! distributed lottery protocols that implement them without a trusted party.
//!
//! `n` players with strict preference orders over `n` items each receive
//! exactly one item. The classical centralized mechanisms (serial
//! dictatorship, random priority, probabilistic serial) live in
//! [`mechanisms`]. The distributed protocols — preference priority and the
//! online eating protocols, all built from weighted duel lotteries — live in
//! [`protocols`], with the lottery primitive itself in [`lottery`] and
//! adversary models (fail-stop and Byzantine corruptions) in [`adversary`].
//!
//! Everything is computed in exact rational arithmetic: outcome
//! distributions are enumerated over every random branch and, when an
//! adversary is present, over its decision points. The [`analysis`] module
//! turns those enumerations into verdicts: stability, ordinal efficiency,
//! equal treatment, truthfulness gains, uniform dominance, and worst-case
//! (maximin) guarantees, each with exact witnesses rather than sampled
//! estimates.
//!
//! The runnable examples under `examples/` are the best starting point; the
//! `ordmatch` binary exposes the same functionality as a small CLI.

pub mod adversary;
pub mod analysis;
pub mod lottery;
pub mod mechanisms;
pub mod model;
pub mod protocols;
pub mod rational;

mod error;

pub use error::Error;
pub use rational::Rational;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
