//! Exact simulation and end-to-end training of hybrid quantum-classical
//! neural networks built around data re-uploading circuits.
//!
//! The crate provides:
//! - dense statevector and density-matrix simulation of few-qubit circuits
//!   ([`state`], [`gates`]),
//! - classical-data encodings into quantum states ([`embed`]),
//! - the data re-uploading circuit ansatz with ranged CNOT entangling layers
//!   ([`circuit`]),
//! - a minimal dense feed-forward network with exact backprop ([`dense`]),
//! - parameter-shift gradients, AdamW, and the hybrid training loop
//!   ([`train`]),
//! - depolarizing / amplitude-damping noise on the density-matrix backend
//!   ([`noise`]),
//! - expressibility and entangling-capability analyzers ([`analysis`]),
//! - regression evaluation metrics ([`eval`]).
//!
//! # Bit ordering
//!
//! Qubit 0 is the **most significant bit** of the basis index, project-wide.
//! For a 2-qubit state the amplitudes are ordered |00⟩, |01⟩, |10⟩, |11⟩
//! and wire 0 owns the leftmost bit. Global phase is ignored everywhere.

pub mod analysis;
pub mod circuit;
pub mod dense;
pub mod embed;
pub mod error;
pub mod eval;
pub mod gates;
pub mod noise;
pub mod state;
pub mod train;

pub use error::{Error, Result};
