//! Shared-secret key material and deterministic randomness derivation.
//!
//! Alice and Bob hold the same 256-bit seed and a per-block counter; every
//! random choice the protocol makes (codeword sampling, the typical-set
//! permutation, the partition index) is derived by hashing
//! `(seed, counter, purpose)` into an independent ChaCha20 stream. Identical
//! key state therefore reproduces identical codebooks on both ends — and in
//! tests — with no hidden global state. Key *consumption* is accounted by
//! the closed-form bit counts in the codec module, not by PRNG bits drawn.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// What a derived random stream is used for. Each purpose gets an
/// independent stream from the same key state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum KeyPurpose {
    /// i.i.d. codeword letters.
    CodewordSampling = 1,
    /// The pseudorandom permutation of the enumerated typical set.
    PartitionPermutation = 2,
    /// Selecting which partition block is this block's codebook.
    PartitionIndex = 3,
}

/// Shared secret key: 256-bit seed plus a strictly increasing block counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKeyStream {
    seed: [u8; 32],
    counter: u64,
}

impl SecretKeyStream {
    /// Wrap raw 256-bit key material; the counter starts at block 0.
    pub fn new(seed: [u8; 32]) -> SecretKeyStream {
        SecretKeyStream { seed, counter: 0 }
    }

    /// Parse key material from a hex string of at most 64 digits; shorter
    /// strings are left-padded with zeros (so `"ff"` is the key `0x…00ff`).
    pub fn from_hex(hex_str: &str) -> Result<SecretKeyStream> {
        let trimmed = hex_str.trim();
        if trimmed.is_empty() || trimmed.len() > 64 {
            return Err(Error::InvalidKey {
                reason: format!(
                    "key hex must be 1..=64 digits, got {} characters",
                    trimmed.len()
                ),
            });
        }
        let padded = if trimmed.len() % 2 == 1 {
            format!("0{trimmed}")
        } else {
            trimmed.to_string()
        };
        let bytes = hex::decode(&padded).map_err(|e| Error::InvalidKey {
            reason: format!("invalid hex: {e}"),
        })?;
        let mut seed = [0u8; 32];
        seed[32 - bytes.len()..].copy_from_slice(&bytes);
        Ok(SecretKeyStream::new(seed))
    }

    /// Current block counter.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Jump to a specific block counter (both ends must agree out of band).
    pub fn with_counter(mut self, counter: u64) -> SecretKeyStream {
        self.counter = counter;
        self
    }

    /// Advance to the next block; returns the counter that was just
    /// consumed.
    pub fn advance(&mut self) -> u64 {
        let used = self.counter;
        self.counter += 1;
        used
    }

    /// Short public identifier: first 8 bytes of SHA-256(seed) in hex.
    /// Safe to embed in reports and exported codebooks.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.seed);
        hex::encode(&digest[..8])
    }

    /// Derive the deterministic random stream for one purpose at the current
    /// counter: ChaCha20 seeded with SHA-256(seed ‖ counter ‖ purpose).
    pub fn derive_rng(&self, purpose: KeyPurpose) -> ChaCha20Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed);
        hasher.update(self.counter.to_le_bytes());
        hasher.update([purpose as u8]);
        let digest: [u8; 32] = hasher.finalize().into();
        ChaCha20Rng::from_seed(digest)
    }
}
