//! Core library for steganographic coding over Pauli channels.

pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod keys;
pub mod pauli;
pub mod qecc;
pub mod secrecy;
pub mod sim;
pub mod typicality;

pub use bounds::{BoundInputs, SweepConfig, SweepRow};
pub use channel::{Alphabet, Family, PauliChannel};
pub use codebook::{Codebook, CodebookMode, CodebookParams, CodebookSize, SecurityLevel};
pub use error::{Error, Result};
pub use keys::{KeyPurpose, SecretKeyStream};
pub use pauli::{ErrorString, Pauli};
pub use qecc::{Code, ParityCheckCode, StabilizerCode};
pub use secrecy::{AdvantageEstimate, InducedDistribution, SecrecyReport};
pub use sim::{ExperimentConfig, SimReport};
pub use typicality::TypicalSetSpec;
