//! Formal concept analysis over probabilistic contexts.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! - exact FCA: derivation operators, NextClosure enumeration, covering
//!   relation, triadic concept checks and DOT output ([`context`],
//!   [`lattice`], [`triadic`], [`dot`]);
//! - turning tensors of conditional probabilities into binary contexts by
//!   pooling, normalizing and thresholding ([`pipeline`]);
//! - a synthetic world that samples sentences from a known context, learns
//!   the context back by co-occurrence counting, and a Gibbs sampler over an
//!   abstract probability provider ([`pattern`], [`synthetic`], [`gibbs`]);
//! - ranking and multilabel metrics against gold contexts ([`eval`]).
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitset;
pub mod context;
pub mod dot;
pub mod error;
pub mod eval;
pub mod gibbs;
pub mod lattice;
pub mod matrix;
pub mod pattern;
pub mod pipeline;
pub mod rng;
pub mod synthetic;
pub mod triadic;

pub use bitset::BitSet;
pub use context::{FormalConcept, FormalContext};
pub use error::{Error, Result};
pub use eval::{EvalReport, GoldContext};
pub use lattice::{build_lattice, enumerate_concepts, ConceptLattice};
pub use matrix::ScoreMatrix;
pub use pipeline::{Direction, Normalization, Pooling, PooledContext, TriadicTensor};
pub use triadic::TriadicContext;
