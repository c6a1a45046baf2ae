//! Concatenated Iceberg codes: construction, decoding, circuit synthesis and
//! Monte-Carlo fault simulation.

pub mod bits;
pub mod circuit;
pub mod code;
pub mod decoder;
pub mod effects;
pub mod error;
pub mod experiments;
pub mod factory;
pub mod frame;
pub mod gadgets;
pub mod parallel;
pub mod pauli;
pub mod program;
pub mod stats;
pub mod synth;
pub mod tableau;

pub use bits::{BitMatrix, Bits};
pub use code::{LogicalAction, PauliKind, StabilizerCode};
pub use error::{Error, Result};
pub use pauli::{Letter, PauliString, Sign};
