//! Link-level simulator for rich-feedback HARQ over short non-binary LDPC
//! codes.
//!
//! A device encodes a short message with a non-binary LDPC mother code and,
//! after each failed decoding attempt, sends extra multiplicative-repetition
//! symbols chosen by the receiver's feedback. The receiver runs q-ary belief
//! propagation and derives the per-symbol posterior entropy, which feeds
//! either a fixed baseline policy or a deep-Q-network agent that decides how
//! many of the most uncertain symbols to request.

pub mod bpdec;
pub mod deeprl;
pub mod error;
pub mod experiment;
pub mod galois;
pub mod ldpc;
pub mod phy;
pub mod policies;
pub mod prob;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};
