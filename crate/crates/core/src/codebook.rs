//! Keyed codebooks: the message → error-string map, steganographic
//! encode/decode, and secret-key accounting.
//!
//! Alice hides `log₂|ℳ|` bits per block by applying a deliberate error
//! drawn from the emulation channel `𝒩_q`, chosen so that the physical
//! noise `𝒩_p` composed with it looks exactly like the channel `𝒩_{p+δp}`
//! the eavesdropper expects. The codebook is the key-derived map from
//! messages to those deliberate errors; two constructions are provided:
//!
//! - **iid** — each codeword's letters sampled i.i.d. from `𝒩_q` with the
//!   key-derived stream, resampling collisions. Works at any block length.
//! - **partition** — enumerate the typical set of `𝒩_q`, permute it with a
//!   key-derived pseudorandom permutation, and use the key-selected block of
//!   `|ℳ|` consecutive strings. Exact and auditable, but needs an
//!   enumerable typical set.
//!
//! Decoding is exact maximum likelihood over the codebook: Bob (who knows
//! the total error exactly on a nondegenerate code) divides out each
//! candidate codeword and scores the quotient under the physical channel.
//! For symmetric channels this reduces to minimum weight, which runs as
//! XOR + popcount over packed strings.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    sample_error_with, solve_intermediate, Alphabet, Family, PauliChannel,
};
use crate::error::{Error, Result};
use crate::keys::{KeyPurpose, SecretKeyStream};
use crate::pauli::{ErrorString, Pauli};
use crate::typicality::{self, TypicalSetSpec};

/// Exported codebook format version.
pub const CODEBOOK_FORMAT_VERSION: u32 = 1;

/// Hard ceiling on materialized codebook size.
const MAX_MESSAGES: u64 = 1 << 26;

/// How the codebook is constructed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookMode {
    /// Keyed i.i.d. sampling from the emulation channel, resampling
    /// collisions.
    #[default]
    Iid,
    /// Key-selected block of a key-permuted enumeration of the typical set.
    Partition,
}

impl std::fmt::Display for CodebookMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodebookMode::Iid => write!(f, "iid"),
            CodebookMode::Partition => write!(f, "partition"),
        }
    }
}

impl std::str::FromStr for CodebookMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<CodebookMode> {
        match s.to_ascii_lowercase().as_str() {
            "iid" => Ok(CodebookMode::Iid),
            "partition" => Ok(CodebookMode::Partition),
            other => Err(Error::config(format!(
                "unknown codebook mode '{other}' (expected 'iid' or 'partition')"
            ))),
        }
    }
}

/// Codebook size: either a rate target in bits per channel use, or an
/// explicit message count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookSize {
    /// `|ℳ| = max(1, ⌊2^{N·rate}⌋)`.
    Rate(f64),
    /// Explicit `|ℳ|`.
    Messages(u64),
}

/// Everything that determines a codebook besides the key.
#[derive(Clone, Debug, PartialEq)]
pub struct CodebookParams {
    family: Family,
    p: f64,
    dp: f64,
    n: usize,
    size: CodebookSize,
    mode: CodebookMode,
    tol: f64,
}

impl CodebookParams {
    /// Validate parameters: the emulation channel must exist
    /// (`solve_intermediate` succeeds), `n ≥ 1`, `tol > 0`, and the size
    /// target must be positive.
    pub fn new(
        family: Family,
        p: f64,
        dp: f64,
        n: usize,
        size: CodebookSize,
        mode: CodebookMode,
        tol: f64,
    ) -> Result<CodebookParams> {
        if n == 0 {
            return Err(Error::config("block length must be at least 1"));
        }
        if tol <= 0.0 || !tol.is_finite() {
            return Err(Error::config(format!(
                "typicality tolerance must be positive, got {tol}"
            )));
        }
        if !dp.is_finite() || dp < 0.0 {
            return Err(Error::prob("dp", dp));
        }
        solve_intermediate(family, p, p + dp)?;
        match size {
            CodebookSize::Rate(r) if r <= 0.0 || !r.is_finite() => {
                return Err(Error::config(format!("rate must be positive, got {r}")));
            }
            CodebookSize::Messages(0) => {
                return Err(Error::config("message count must be at least 1"));
            }
            _ => {}
        }
        let params = CodebookParams {
            family,
            p,
            dp,
            n,
            size,
            mode,
            tol,
        };
        params.message_count()?; // reject absurd sizes up front
        Ok(params)
    }

    /// Channel family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// Physical error parameter `p`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Emulation overhead `δp` (total parameter is `p + δp`).
    pub fn dp(&self) -> f64 {
        self.dp
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Size target.
    pub fn size(&self) -> CodebookSize {
        self.size
    }

    /// Construction mode.
    pub fn mode(&self) -> CodebookMode {
        self.mode
    }

    /// Typicality tolerance used by partition mode.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The emulation channel `𝒩_q` with `q` solving
    /// `compose(𝒩_p, 𝒩_q) = 𝒩_{p+δp}`.
    pub fn emulation_channel(&self) -> Result<PauliChannel> {
        let q = solve_intermediate(self.family, self.p, self.p + self.dp)?;
        self.family.channel(q)
    }

    /// Number of messages `|ℳ|` this codebook encodes.
    pub fn message_count(&self) -> Result<u64> {
        let m = match self.size {
            CodebookSize::Rate(r) => messages_from_rate(self.n, r)?,
            CodebookSize::Messages(m) => m,
        };
        if m > MAX_MESSAGES {
            return Err(Error::config(format!(
                "|M| = {m} exceeds the materialization ceiling of {MAX_MESSAGES}"
            )));
        }
        Ok(m)
    }
}

/// `|ℳ| = max(1, ⌊2^{N·rate}⌋)` in double precision.
fn messages_from_rate(n: usize, rate: f64) -> Result<u64> {
    if rate <= 0.0 || !rate.is_finite() {
        return Err(Error::config(format!("rate must be positive, got {rate}")));
    }
    let bits = n as f64 * rate;
    if bits >= 62.0 {
        return Err(Error::config(format!(
            "rate {rate} at N = {n} implies 2^{bits:.1} messages"
        )));
    }
    Ok((bits.exp2().floor() as u64).max(1))
}

/// An immutable message → error-string map plus the metadata needed to
/// regenerate or audit it.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    params: CodebookParams,
    emulation: PauliChannel,
    entries: Vec<ErrorString>,
    key_fingerprint: String,
    key_counter: u64,
}

impl Codebook {
    /// Construction parameters.
    pub fn params(&self) -> &CodebookParams {
        &self.params
    }

    /// The emulation channel codewords are distributed by.
    pub fn emulation(&self) -> &PauliChannel {
        &self.emulation
    }

    /// Codewords in message order.
    pub fn entries(&self) -> &[ErrorString] {
        &self.entries
    }

    /// `|ℳ|`.
    pub fn message_count(&self) -> u64 {
        self.entries.len() as u64
    }

    /// Achieved rate `log₂|ℳ| / N` in bits per use.
    pub fn achieved_rate(&self) -> f64 {
        (self.entries.len() as f64).log2() / self.params.n as f64
    }

    /// Fingerprint of the key that built this codebook.
    pub fn key_fingerprint(&self) -> &str {
        &self.key_fingerprint
    }

    /// Key counter (block index) the codebook was derived at.
    pub fn key_counter(&self) -> u64 {
        self.key_counter
    }
}

/// Build the codebook for the current key state.
///
/// Fully deterministic: identical `(params, key seed, key counter)`
/// reproduce an identical codebook, which is how Bob obtains Alice's map
/// without communication.
pub fn build_codebook(params: &CodebookParams, key: &SecretKeyStream) -> Result<Codebook> {
    let emulation = params.emulation_channel()?;
    let m = params.message_count()?;
    let entries = match params.mode {
        CodebookMode::Iid => build_iid_entries(params, &emulation, m, key)?,
        CodebookMode::Partition => {
            let layout = PartitionLayout::compute(params, &emulation, m, key)?;
            let block = layout.key_selected_block(key);
            layout.block_entries(block)
        }
    };
    Ok(Codebook {
        params: params.clone(),
        emulation,
        entries,
        key_fingerprint: key.fingerprint(),
        key_counter: key.counter(),
    })
}

/// i.i.d. keyed sampling with rejection of duplicates.
fn build_iid_entries(
    params: &CodebookParams,
    emulation: &PauliChannel,
    m: u64,
    key: &SecretKeyStream,
) -> Result<Vec<ErrorString>> {
    // Distinctness is only achievable within the support's string space.
    let support_size = emulation.support().len() as u128;
    let space = checked_pow(support_size, params.n);
    if let Some(space) = space {
        if u128::from(m) > space {
            return Err(Error::config(format!(
                "cannot draw {m} distinct codewords from a support of {space} strings"
            )));
        }
    }
    let mut rng = key.derive_rng(KeyPurpose::CodewordSampling);
    let mut seen: HashSet<ErrorString> = HashSet::with_capacity(m as usize);
    let mut entries = Vec::with_capacity(m as usize);
    // Generous stall guard: far above the coupon-collector cost of any
    // feasible configuration, far below "forever" for infeasible ones.
    let max_draws = 200u64.saturating_mul(m).saturating_add(1_000_000);
    let mut draws = 0u64;
    while entries.len() < m as usize {
        if draws >= max_draws {
            return Err(Error::config(format!(
                "codeword sampling stalled after {draws} draws; \
                 the rate is too close to the support size"
            )));
        }
        draws += 1;
        let e = sample_error_with(emulation, params.n, &mut rng);
        if seen.insert(e.clone()) {
            entries.push(e);
        }
    }
    Ok(entries)
}

/// The permuted typical set, chunked into blocks of `|ℳ|`.
struct PartitionLayout {
    typical: Vec<ErrorString>,
    /// Key-permuted indices into `typical`.
    order: Vec<u32>,
    block_size: usize,
    block_count: usize,
}

impl PartitionLayout {
    fn compute(
        params: &CodebookParams,
        emulation: &PauliChannel,
        m: u64,
        key: &SecretKeyStream,
    ) -> Result<PartitionLayout> {
        let spec = TypicalSetSpec::new(emulation.clone(), params.n, params.tol)?;
        let typical = typicality::enumerate_typical(&spec)?;
        if (typical.len() as u128) < u128::from(m) {
            return Err(Error::RateExceedsTypicalSet {
                needed: m,
                available: typical.len() as u128,
            });
        }
        let mut order: Vec<u32> = (0..typical.len() as u32).collect();
        let mut rng = key.derive_rng(KeyPurpose::PartitionPermutation);
        // Fisher–Yates with the key-derived stream.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let block_size = m as usize;
        let block_count = typical.len() / block_size;
        Ok(PartitionLayout {
            typical,
            order,
            block_size,
            block_count,
        })
    }

    fn key_selected_block(&self, key: &SecretKeyStream) -> usize {
        let mut rng = key.derive_rng(KeyPurpose::PartitionIndex);
        rng.gen_range(0..self.block_count as u64) as usize
    }

    fn block_entries(&self, block: usize) -> Vec<ErrorString> {
        self.order[block * self.block_size..(block + 1) * self.block_size]
            .iter()
            .map(|&i| self.typical[i as usize].clone())
            .collect()
    }
}

/// All partition blocks for the current key state, in block order.
///
/// The blocks are pairwise disjoint, each holds exactly `|ℳ|` typical
/// strings, and together they cover the typical set up to a remainder of
/// fewer than `|ℳ|` strings. Exposed for audits; [`build_codebook`] uses
/// the single key-selected block.
pub fn partition_blocks(
    params: &CodebookParams,
    key: &SecretKeyStream,
) -> Result<Vec<Vec<ErrorString>>> {
    let emulation = params.emulation_channel()?;
    let m = params.message_count()?;
    let layout = PartitionLayout::compute(params, &emulation, m, key)?;
    Ok((0..layout.block_count)
        .map(|b| layout.block_entries(b))
        .collect())
}

/// Look up message `m`'s codeword.
pub fn encode(cb: &Codebook, m: u64) -> Result<&ErrorString> {
    cb.entries
        .get(m as usize)
        .ok_or(Error::InvalidMessage {
            index: m,
            messages: cb.message_count(),
        })
}

/// Exact maximum-likelihood decoding of an observed total error string.
///
/// Returns `argmax_m P_physical(observed ⊘ codeword_m)` where `⊘` is
/// letterwise Pauli division (each letter is its own inverse). Ties break
/// toward the smallest message index.
pub fn decode_ml(cb: &Codebook, observed: &ErrorString, physical: &PauliChannel) -> Result<u64> {
    MlDecoder::new(cb, physical)?.decode(observed)
}

const HIGH_BITS: u64 = 0xAAAA_AAAA_AAAA_AAAA;
const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// Number of non-identity letters in a packed base-4 string.
#[inline]
fn packed_weight(v: u64) -> u32 {
    ((v | (v >> 1)) & LOW_BITS).count_ones()
}

/// A codebook prepared for repeated ML decoding against one physical
/// channel.
///
/// When the channel is symmetric with a sub-dominant error letter
/// (`p_err < p_I`, true for bit-flip `p < 1/2` and depolarizing `p < 3/4`)
/// and the block packs into 64 bits, maximum likelihood is equivalent to
/// minimum quotient weight and runs as XOR + popcount per codeword.
/// Otherwise a per-letter log-probability scorer is used.
pub struct MlDecoder<'a> {
    entries: &'a [ErrorString],
    n: usize,
    ln_probs: [f64; 4],
    /// Base-4 packed entries when `n ≤ 32`.
    packed: Option<Vec<u64>>,
    /// True when minimum packed weight realizes the ML rule.
    min_weight: bool,
    binary_channel: bool,
}

impl<'a> MlDecoder<'a> {
    /// Prepare `cb` for decoding under `physical`.
    pub fn new(cb: &'a Codebook, physical: &PauliChannel) -> Result<MlDecoder<'a>> {
        if cb.entries.is_empty() {
            return Err(Error::config("cannot decode with an empty codebook"));
        }
        let probs = *physical.probs();
        let ln_probs = probs.map(|p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY });
        let n = cb.params.n;
        let packed: Option<Vec<u64>> =
            (n <= 32).then(|| cb.entries.iter().map(ErrorString::to_index).collect());
        // Minimum weight = maximum likelihood needs every non-identity
        // letter equally likely and rarer than identity; for a binary
        // channel the strings must stay binary too, checked per call.
        let min_weight = packed.is_some()
            && physical.is_symmetric()
            && probs[1] > 0.0
            && probs[1] < probs[0]
            && (physical.alphabet() == Alphabet::Quaternary
                || packed
                    .as_ref()
                    .expect("packed when n <= 32")
                    .iter()
                    .all(|&v| v & HIGH_BITS == 0));
        Ok(MlDecoder {
            entries: &cb.entries,
            n,
            ln_probs,
            packed,
            min_weight,
            binary_channel: physical.alphabet() == Alphabet::Binary,
        })
    }

    /// Decode one observed string.
    pub fn decode(&self, observed: &ErrorString) -> Result<u64> {
        if observed.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: observed.len(),
            });
        }
        if self.min_weight {
            let obs = observed.to_index();
            if !self.binary_channel || obs & HIGH_BITS == 0 {
                let packed = self.packed.as_ref().expect("packed entries");
                let mut best_m = 0u64;
                let mut best_w = u32::MAX;
                for (m, &e) in packed.iter().enumerate() {
                    let w = packed_weight(obs ^ e);
                    if w < best_w {
                        best_w = w;
                        best_m = m as u64;
                    }
                }
                return Ok(best_m);
            }
            // Fall through: observed letters outside the binary alphabet.
        }
        Ok(self.decode_scored(observed))
    }

    /// General path: score `Σ count_L · ln p_L` of each quotient.
    fn decode_scored(&self, observed: &ErrorString) -> u64 {
        let mut best_m = 0u64;
        let mut best_score = f64::NEG_INFINITY;
        for (m, entry) in self.entries.iter().enumerate() {
            let mut counts = [0u32; 4];
            for (a, b) in observed.letters().iter().zip(entry.letters()) {
                counts[(*a * *b).code() as usize] += 1;
            }
            let mut score = 0.0;
            for (count, ln_p) in counts.iter().zip(&self.ln_probs) {
                if *count > 0 {
                    score += f64::from(*count) * ln_p;
                }
            }
            if score > best_score {
                best_score = score;
                best_m = m as u64;
            }
        }
        best_m
    }
}

/// Real-exponent and exact forms of the partition count `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCount {
    /// `log₂ n = N·(H(𝒩_q) − achievable rate)`.
    pub log2_n: f64,
    /// `⌊|𝒯| / |ℳ|⌋` with `|ℳ| = max(1, ⌊2^{N·rate}⌋)`, when `|𝒯|` is
    /// exactly countable and the quotient fits.
    pub exact: Option<u64>,
}

/// Number of disjoint codebooks the typical set of `𝒩_q` splits into at the
/// achievable rate — the quantity whose logarithm is the key cost.
pub fn partition_count(
    family: Family,
    p: f64,
    dp: f64,
    n: usize,
    tol: f64,
) -> Result<PartitionCount> {
    let q = solve_intermediate(family, p, p + dp)?;
    let h_q = family.entropy(q)?;
    let rate = family.entropy(p + dp)? - family.entropy(p)?;
    let log2_n = n as f64 * (h_q - rate);
    if log2_n < -1e-9 {
        return Err(Error::config(format!(
            "negative key requirement (log2 n = {log2_n}): \
             rate exceeds the emulation entropy"
        )));
    }
    let log2_n = log2_n.max(0.0);

    let spec = TypicalSetSpec::new(family.channel(q)?, n, tol)?;
    let exact = match typicality::typical_count_exact(&spec)? {
        Some(t) => {
            let m = match messages_from_rate(n, rate) {
                Ok(m) => u128::from(m),
                // Rate target too large for an integer |M|: exponent form only.
                Err(_) => return Ok(PartitionCount { log2_n, exact: None }),
            };
            u64::try_from(t / m).ok()
        }
        None => None,
    };
    Ok(PartitionCount { log2_n, exact })
}

/// Extra key spent protecting the message content itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityLevel {
    /// Codebook selection only.
    None,
    /// One-time pad over the `M = N·rate` message bits.
    Classical,
    /// Twirling a quantum payload: `2M` bits.
    Quantum,
}

impl std::str::FromStr for SecurityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<SecurityLevel> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(SecurityLevel::None),
            "classical" => Ok(SecurityLevel::Classical),
            "quantum" => Ok(SecurityLevel::Quantum),
            other => Err(Error::config(format!(
                "unknown security level '{other}' (expected none|classical|quantum)"
            ))),
        }
    }
}

/// Secret-key bits consumed per block:
/// `K = N·(H(𝒩_q) − H(𝒩_{p+δp}) + H(𝒩_p))`, plus `N·rate` for a classical
/// one-time pad or `2·N·rate` for quantum twirling.
pub fn key_bits_per_block(
    family: Family,
    p: f64,
    dp: f64,
    n: usize,
    secure: SecurityLevel,
) -> Result<f64> {
    let q = solve_intermediate(family, p, p + dp)?;
    let h_q = family.entropy(q)?;
    let h_total = family.entropy(p + dp)?;
    let h_phys = family.entropy(p)?;
    let mut k = n as f64 * (h_q - h_total + h_phys);
    if k < 0.0 && k > -1e-9 {
        k = 0.0; // fp cancellation noise on a mathematically zero value
    }
    let message_bits = n as f64 * (h_total - h_phys);
    Ok(match secure {
        SecurityLevel::None => k,
        SecurityLevel::Classical => k + message_bits,
        SecurityLevel::Quantum => k + 2.0 * message_bits,
    })
}

/// `base^exp` in `u128`, `None` on overflow.
fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

// ---------------------------------------------------------------------------
// Versioned JSON export/import
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CodebookFile {
    version: u32,
    family: Family,
    p: f64,
    dp: f64,
    n: usize,
    mode: CodebookMode,
    tol: f64,
    /// Present when the size target was a rate.
    rate: Option<f64>,
    /// Resolved |ℳ|.
    messages: u64,
    key_fingerprint: String,
    key_counter: u64,
    /// Hex-encoded codewords, 2 bits per letter, letter `j` at bit `2(j mod 4)`
    /// of byte `⌊j/4⌋`.
    codewords: Vec<String>,
}

/// Pack letters at 2 bits each, little-endian within each byte.
fn pack_hex(e: &ErrorString) -> String {
    let mut bytes = vec![0u8; e.len().div_ceil(4)];
    for (j, letter) in e.letters().iter().enumerate() {
        bytes[j / 4] |= letter.code() << ((j % 4) * 2);
    }
    hex::encode(bytes)
}

/// Inverse of [`pack_hex`] for a known block length.
fn unpack_hex(s: &str, n: usize) -> Result<ErrorString> {
    let bytes = hex::decode(s).map_err(|e| Error::code(format!("codeword hex: {e}")))?;
    if bytes.len() != n.div_ceil(4) {
        return Err(Error::LengthMismatch {
            expected: n.div_ceil(4),
            got: bytes.len(),
        });
    }
    // Unused trailing bits must be zero, keeping the encoding canonical.
    if n % 4 != 0 && bytes[n / 4] >> ((n % 4) * 2) != 0 {
        return Err(Error::code("nonzero padding bits in codeword"));
    }
    let letters = (0..n)
        .map(|j| Pauli::from_code((bytes[j / 4] >> ((j % 4) * 2)) & 0b11).expect("2-bit code"))
        .collect();
    Ok(ErrorString::new(letters))
}

impl Codebook {
    /// Serialize to the versioned JSON layout.
    pub fn to_json(&self) -> Result<String> {
        let (rate, _) = match self.params.size {
            CodebookSize::Rate(r) => (Some(r), 0),
            CodebookSize::Messages(_) => (None, 0),
        };
        let file = CodebookFile {
            version: CODEBOOK_FORMAT_VERSION,
            family: self.params.family,
            p: self.params.p,
            dp: self.params.dp,
            n: self.params.n,
            mode: self.params.mode,
            tol: self.params.tol,
            rate,
            messages: self.message_count(),
            key_fingerprint: self.key_fingerprint.clone(),
            key_counter: self.key_counter,
            codewords: self.entries.iter().map(pack_hex).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Deserialize and validate a codebook exported by [`Codebook::to_json`].
    pub fn from_json(s: &str) -> Result<Codebook> {
        let file: CodebookFile = serde_json::from_str(s)?;
        if file.version != CODEBOOK_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: file.version,
                expected: CODEBOOK_FORMAT_VERSION,
            });
        }
        let size = match file.rate {
            Some(r) => CodebookSize::Rate(r),
            None => CodebookSize::Messages(file.messages),
        };
        let params = CodebookParams::new(
            file.family, file.p, file.dp, file.n, size, file.mode, file.tol,
        )?;
        if params.message_count()? != file.messages
            || file.codewords.len() as u64 != file.messages
        {
            return Err(Error::code(format!(
                "codeword count {} does not match the declared |M| = {}",
                file.codewords.len(),
                file.messages
            )));
        }
        let entries: Vec<ErrorString> = file
            .codewords
            .iter()
            .map(|c| unpack_hex(c, file.n))
            .collect::<Result<_>>()?;
        if file.family.alphabet() == Alphabet::Binary {
            for e in &entries {
                if e.letters().iter().any(|l| matches!(l, Pauli::Y | Pauli::Z)) {
                    return Err(Error::AlphabetMismatch {
                        context: "bit-flip codebook contains Y/Z letters",
                    });
                }
            }
        }
        let mut seen = HashSet::with_capacity(entries.len());
        if !entries.iter().all(|e| seen.insert(e.clone())) {
            return Err(Error::code("duplicate codewords"));
        }
        let emulation = params.emulation_channel()?;
        Ok(Codebook {
            params,
            emulation,
            entries,
            key_fingerprint: file.key_fingerprint,
            key_counter: file.key_counter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::string_probability;
    use crate::typicality::is_typical;

    fn key(hex_str: &str) -> SecretKeyStream {
        SecretKeyStream::from_hex(hex_str).unwrap()
    }

    fn params(
        family: Family,
        p: f64,
        dp: f64,
        n: usize,
        size: CodebookSize,
        mode: CodebookMode,
        tol: f64,
    ) -> CodebookParams {
        CodebookParams::new(family, p, dp, n, size, mode, tol).unwrap()
    }

    #[test]
    fn message_count_from_rate_floors_and_clamps() {
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            16,
            CodebookSize::Rate(0.2),
            CodebookMode::Iid,
            0.3,
        );
        // 2^{16·0.2} = 2^3.2 = 9.18… → 9.
        assert_eq!(p.message_count().unwrap(), 9);

        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            4,
            CodebookSize::Rate(0.01),
            CodebookMode::Iid,
            0.3,
        );
        // 2^{0.04} < 2 → clamp to 1.
        assert_eq!(p.message_count().unwrap(), 1);
    }

    #[test]
    fn params_validation() {
        // Emulation must exist: target milder than physical.
        assert!(CodebookParams::new(
            Family::BitFlip,
            0.2,
            -0.1,
            8,
            CodebookSize::Messages(2),
            CodebookMode::Iid,
            0.3
        )
        .is_err());
        // Singular physical parameter.
        assert!(CodebookParams::new(
            Family::BitFlip,
            0.5,
            0.1,
            8,
            CodebookSize::Messages(2),
            CodebookMode::Iid,
            0.3
        )
        .is_err());
        assert!(CodebookParams::new(
            Family::BitFlip,
            0.1,
            0.08,
            8,
            CodebookSize::Messages(0),
            CodebookMode::Iid,
            0.3
        )
        .is_err());
        assert!(CodebookParams::new(
            Family::BitFlip,
            0.1,
            0.08,
            0,
            CodebookSize::Messages(2),
            CodebookMode::Iid,
            0.3
        )
        .is_err());
    }

    #[test]
    fn iid_codebook_is_deterministic_and_distinct() {
        let p = params(
            Family::Depolarizing,
            0.1,
            0.1,
            12,
            CodebookSize::Messages(64),
            CodebookMode::Iid,
            0.3,
        );
        let a = build_codebook(&p, &key("ab")).unwrap();
        let b = build_codebook(&p, &key("ab")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.message_count(), 64);
        let set: HashSet<_> = a.entries().iter().collect();
        assert_eq!(set.len(), 64);

        // A different counter (next block) produces a different codebook.
        let c = build_codebook(&p, &key("ab").with_counter(1)).unwrap();
        assert_ne!(a.entries(), c.entries());
        // And a different key likewise.
        let d = build_codebook(&p, &key("ac")).unwrap();
        assert_ne!(a.entries(), d.entries());
    }

    #[test]
    fn iid_rejects_more_messages_than_the_support_allows() {
        // Binary support at N=3 has 8 strings.
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            3,
            CodebookSize::Messages(9),
            CodebookMode::Iid,
            0.3,
        );
        assert!(build_codebook(&p, &key("aa")).is_err());
        // Exactly 8 is satisfiable (coupon-collector over 8 strings).
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            3,
            CodebookSize::Messages(8),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("aa")).unwrap();
        assert_eq!(cb.message_count(), 8);
    }

    #[test]
    fn partition_codebook_entries_are_typical_and_regenerate() {
        // q = 0.08/(1−0.2) = 0.1; the tol=0.3 typical set at N=20 has
        // weights {1,2,3}.
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            20,
            CodebookSize::Messages(16),
            CodebookMode::Partition,
            0.3,
        );
        let cb = build_codebook(&p, &key("0123")).unwrap();
        assert_eq!(cb.message_count(), 16);
        let set: HashSet<_> = cb.entries().iter().collect();
        assert_eq!(set.len(), 16);
        let spec = TypicalSetSpec::new(cb.emulation().clone(), 20, 0.3).unwrap();
        for e in cb.entries() {
            assert!(is_typical(e, &spec).unwrap());
            assert!((1..=3).contains(&e.weight()));
        }
        assert_eq!(cb, build_codebook(&p, &key("0123")).unwrap());
    }

    #[test]
    fn partition_rejects_rates_beyond_the_typical_set() {
        // N=10, tol=0.2 gives exactly the 10 weight-1 strings.
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            10,
            CodebookSize::Messages(11),
            CodebookMode::Partition,
            0.2,
        );
        assert!(matches!(
            build_codebook(&p, &key("aa")),
            Err(Error::RateExceedsTypicalSet {
                needed: 11,
                available: 10
            })
        ));
    }

    #[test]
    fn partition_blocks_are_disjoint_and_cover_with_small_remainder() {
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            10,
            CodebookSize::Messages(3),
            CodebookMode::Partition,
            0.2,
        );
        let blocks = partition_blocks(&p, &key("77")).unwrap();
        assert_eq!(blocks.len(), 3); // ⌊10/3⌋
        let mut all = HashSet::new();
        for block in &blocks {
            assert_eq!(block.len(), 3);
            for e in block {
                assert!(all.insert(e.clone()), "blocks must be disjoint");
            }
        }
        // Remainder: 10 − 9 = 1 < |ℳ|.
        assert_eq!(all.len(), 9);

        // The built codebook is one of the blocks.
        let cb = build_codebook(&p, &key("77")).unwrap();
        assert!(blocks.iter().any(|b| b.as_slice() == cb.entries()));
    }

    #[test]
    fn encode_bounds_check() {
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            10,
            CodebookSize::Messages(3),
            CodebookMode::Partition,
            0.2,
        );
        let cb = build_codebook(&p, &key("aa")).unwrap();
        assert_eq!(encode(&cb, 0).unwrap(), &cb.entries()[0]);
        assert!(matches!(
            encode(&cb, 3),
            Err(Error::InvalidMessage {
                index: 3,
                messages: 3
            })
        ));
    }

    #[test]
    fn noiseless_round_trip_decodes_every_message() {
        let p = params(
            Family::Depolarizing,
            0.1,
            0.1,
            10,
            CodebookSize::Messages(32),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("cafe")).unwrap();
        let physical = PauliChannel::depolarizing(0.1).unwrap();
        for m in 0..32 {
            let observed = encode(&cb, m).unwrap();
            assert_eq!(decode_ml(&cb, observed, &physical).unwrap(), m);
        }
    }

    #[test]
    fn single_codeword_codebook_always_decodes_zero() {
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            6,
            CodebookSize::Messages(1),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("01")).unwrap();
        let physical = PauliChannel::bit_flip(0.1).unwrap();
        for idx in 0..(1u64 << 6) {
            let observed = ErrorString::from_masks(idx, 0, 6);
            assert_eq!(decode_ml(&cb, &observed, &physical).unwrap(), 0);
        }
    }

    #[test]
    fn ml_equals_brute_force_probability_argmax() {
        // Cross-check both decoder paths against direct probability
        // maximization over every message, for every observable string.
        let physical = PauliChannel::bit_flip(0.23).unwrap();
        let p = params(
            Family::BitFlip,
            0.23,
            0.1,
            6,
            CodebookSize::Messages(7),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("beef")).unwrap();
        for idx in 0..(1u64 << 6) {
            let observed = ErrorString::from_masks(idx, 0, 6);
            let mut best = f64::NEG_INFINITY;
            for m in 0..7u64 {
                let quotient = observed.mul(encode(&cb, m).unwrap()).unwrap();
                best = best.max(string_probability(&physical, &quotient).unwrap());
            }
            // The decoded message must realize the maximum likelihood
            // (up to fp rounding of the product order among exact ties).
            let decoded = decode_ml(&cb, &observed, &physical).unwrap();
            let achieved = string_probability(
                &physical,
                &observed.mul(encode(&cb, decoded).unwrap()).unwrap(),
            )
            .unwrap();
            assert!(achieved >= best * (1.0 - 1e-9));
        }
    }

    #[test]
    fn ml_equals_minimum_hamming_distance_for_subcritical_bitflip() {
        let physical = PauliChannel::bit_flip(0.1).unwrap();
        let p = params(
            Family::BitFlip,
            0.1,
            0.1,
            16,
            CodebookSize::Messages(24),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("1234")).unwrap();
        let mut rng_seed = 0u64;
        for _ in 0..200 {
            rng_seed += 1;
            let observed =
                crate::channel::sample_error(&physical, 16, rng_seed);
            let decoded = decode_ml(&cb, &observed, &physical).unwrap();
            // Distance oracle.
            let mut best = (0u64, usize::MAX);
            for (m, e) in cb.entries().iter().enumerate() {
                let d = observed.mul(e).unwrap().weight();
                if d < best.1 {
                    best = (m as u64, d);
                }
            }
            let decoded_dist = observed
                .mul(encode(&cb, decoded).unwrap())
                .unwrap()
                .weight();
            assert_eq!(decoded_dist, best.1, "ML must achieve minimum distance");
        }
    }

    #[test]
    fn ties_break_toward_the_smallest_message() {
        // Entries IX and XI are equidistant from II.
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            2,
            CodebookSize::Messages(2),
            CodebookMode::Iid,
            0.3,
        );
        let mut cb = build_codebook(&p, &key("aa")).unwrap();
        cb.entries = vec![
            ErrorString::parse("IX").unwrap(),
            ErrorString::parse("XI").unwrap(),
        ];
        let physical = PauliChannel::bit_flip(0.1).unwrap();
        let observed = ErrorString::identity(2);
        assert_eq!(decode_ml(&cb, &observed, &physical).unwrap(), 0);
    }

    #[test]
    fn partition_count_frozen_values() {
        // N=16, tol=0.3: |𝒯| = 696, |ℳ| = ⌊2^{16·0.21108…}⌋ = 10 → 69.
        let pc = partition_count(Family::BitFlip, 0.1, 0.08, 16, 0.3).unwrap();
        assert_eq!(pc.exact, Some(69));
        assert!((pc.log2_n - 4.126_626_263_204_523).abs() < 1e-9);

        // log₂ n at N=100 (the key-rate form).
        let pc = partition_count(Family::BitFlip, 0.1, 0.08, 100, 0.3).unwrap();
        assert!((pc.log2_n - 25.791_414_145_028_27).abs() < 1e-9);
        assert!((pc.log2_n / 100.0 - 0.257_916).abs() < 1e-4);

        // Noiseless physical channel: n = 1, K = 0.
        let pc = partition_count(Family::BitFlip, 0.0, 0.18, 50, 0.3).unwrap();
        assert_eq!(pc.log2_n, 0.0);
    }

    #[test]
    fn partition_count_covers_the_whole_typical_set_when_m_equals_t() {
        // p=0, δp=0.5 → q=0.5: every string is typical, |𝒯| = 2^N, and the
        // achievable rate is h(0.5) = 1 → |ℳ| = 2^N → n = 1.
        let pc = partition_count(Family::BitFlip, 0.0, 0.5, 3, 0.05).unwrap();
        assert_eq!(pc.exact, Some(1));
        assert!(pc.log2_n.abs() < 1e-12);
    }

    #[test]
    fn key_bits_frozen_values() {
        let k = key_bits_per_block(Family::BitFlip, 0.1, 0.08, 100, SecurityLevel::None)
            .unwrap();
        assert!((k - 25.791_414_145_028_27).abs() < 1e-9);
        assert!((k - 25.7916).abs() < 1e-3);

        // Noiseless: q = δp, so the count cancels to 0 exactly.
        let k = key_bits_per_block(Family::BitFlip, 0.0, 0.18, 100, SecurityLevel::None)
            .unwrap();
        assert_eq!(k, 0.0);

        // Surcharges add N·rate and 2·N·rate.
        let base =
            key_bits_per_block(Family::BitFlip, 0.1, 0.08, 100, SecurityLevel::None).unwrap();
        let classical =
            key_bits_per_block(Family::BitFlip, 0.1, 0.08, 100, SecurityLevel::Classical)
                .unwrap();
        let quantum =
            key_bits_per_block(Family::BitFlip, 0.1, 0.08, 100, SecurityLevel::Quantum).unwrap();
        let m_bits = 100.0 * 0.211_081_452_138_998_54;
        assert!((classical - (base + m_bits)).abs() < 1e-9);
        assert!((quantum - (base + 2.0 * m_bits)).abs() < 1e-9);
        assert!((quantum - 68.007_704_572_827_98).abs() < 1e-9);
    }

    #[test]
    fn key_bits_nonnegative_on_the_valid_grid() {
        for family in [Family::BitFlip, Family::Depolarizing] {
            let limit = family.singular_param();
            for i in 0..20 {
                let p = limit * i as f64 / 21.0;
                for j in 1..10 {
                    let dp = (limit - p) * j as f64 / 11.0;
                    let k =
                        key_bits_per_block(family, p, dp, 50, SecurityLevel::None).unwrap();
                    assert!(k >= 0.0, "family {family} p={p} dp={dp}: K = {k}");
                }
            }
        }
    }

    #[test]
    fn packing_layout_is_stable() {
        // I,X,Y,Z at positions 0..3 → codes 0,1,2,3 → byte 0b11_10_01_00.
        let e = ErrorString::parse("IXYZ").unwrap();
        assert_eq!(pack_hex(&e), "e4");
        assert_eq!(unpack_hex("e4", 4).unwrap(), e);
        // Five letters spill into a second byte; padding bits stay zero.
        let e = ErrorString::parse("IXYZX").unwrap();
        assert_eq!(pack_hex(&e), "e401");
        assert_eq!(unpack_hex("e401", 5).unwrap(), e);
        assert!(unpack_hex("e4f1", 5).is_err()); // nonzero padding
    }

    #[test]
    fn json_round_trip_preserves_the_codebook() {
        for mode in [CodebookMode::Iid, CodebookMode::Partition] {
            let p = params(
                Family::Depolarizing,
                0.1,
                0.1,
                8,
                CodebookSize::Messages(12),
                mode,
                0.5,
            );
            let cb = build_codebook(&p, &key("feedface")).unwrap();
            let json = cb.to_json().unwrap();
            let back = Codebook::from_json(&json).unwrap();
            assert_eq!(cb, back);
        }
        // Rate-sized codebooks round-trip the rate field.
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            16,
            CodebookSize::Rate(0.2),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("feedface")).unwrap();
        let back = Codebook::from_json(&cb.to_json().unwrap()).unwrap();
        assert_eq!(cb, back);
        assert_eq!(back.params().size(), CodebookSize::Rate(0.2));
    }

    #[test]
    fn json_import_validates() {
        let p = params(
            Family::BitFlip,
            0.1,
            0.08,
            8,
            CodebookSize::Messages(4),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("aa")).unwrap();
        let json = cb.to_json().unwrap();

        let wrong_version = json.replacen("\"version\": 1", "\"version\": 9", 1);
        assert!(matches!(
            Codebook::from_json(&wrong_version),
            Err(Error::UnsupportedVersion {
                found: 9,
                expected: 1
            })
        ));

        // A Y letter (code 2) in a bit-flip codebook: replace a codeword.
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["codewords"][0] = serde_json::json!("0200");
        assert!(matches!(
            Codebook::from_json(&file.to_string()),
            Err(Error::AlphabetMismatch { .. })
        ));

        // Duplicate codewords.
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["codewords"][1] = file["codewords"][0].clone();
        assert!(Codebook::from_json(&file.to_string()).is_err());

        // Codeword count mismatch.
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["codewords"].as_array_mut().unwrap().pop();
        assert!(Codebook::from_json(&file.to_string()).is_err());
    }

    #[test]
    fn spec_noiseless_emulation_matches_target_distribution() {
        // p = 0: the emulation channel must equal the target channel.
        let p = params(
            Family::BitFlip,
            0.0,
            0.18,
            8,
            CodebookSize::Messages(4),
            CodebookMode::Iid,
            0.3,
        );
        let cb = build_codebook(&p, &key("aa")).unwrap();
        assert!((cb.emulation().error_param() - 0.18).abs() < 1e-12);
    }
}
