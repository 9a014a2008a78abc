//! Shared fixtures for the criterion suites in `benches/`.
//!
//! Every benchmark pins the same channel point and key so that numbers are
//! comparable across runs and across the two suites.

use stegosim_core::codebook::build_codebook;
use stegosim_core::{
    Codebook, CodebookMode, CodebookParams, CodebookSize, Family, PauliChannel, SecretKeyStream,
};

/// Fixed key material; benchmarks never exercise key variability.
pub const KEY_HEX: &str = "3b6a27bcceb6a42d62a3a8d02a6f0d73653215771de243a63ac048a18b59da29";

/// The benchmark channel point: bit-flip `p = 0.05`, overhead `δp = 0.20`.
pub const P: f64 = 0.05;
pub const DP: f64 = 0.20;

/// The shared key stream at block counter 0.
pub fn key() -> SecretKeyStream {
    SecretKeyStream::from_hex(KEY_HEX).expect("fixed key parses")
}

/// The physical bit-flip channel `𝒩_p`.
pub fn physical() -> PauliChannel {
    Family::BitFlip.channel(P).expect("valid parameter")
}

/// Codebook parameters at block length `n` with an explicit message count.
pub fn params(n: usize, messages: u64) -> CodebookParams {
    CodebookParams::new(
        Family::BitFlip,
        P,
        DP,
        n,
        CodebookSize::Messages(messages),
        CodebookMode::Iid,
        0.05,
    )
    .expect("valid parameters")
}

/// A built codebook at block length `n` with `messages` entries.
pub fn codebook(n: usize, messages: u64) -> Codebook {
    build_codebook(&params(n, messages), &key()).expect("codebook builds")
}
