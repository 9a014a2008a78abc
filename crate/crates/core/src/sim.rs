//! Monte Carlo harness for end-to-end protocol runs.
//!
//! A trial draws a message, encodes it as a deliberate error, composes it
//! with a sampled physical error, and checks whether exact ML decoding
//! recovers the message. Runs are reproducible: trial `t` of seed `s` uses
//! its own deterministic stream, so reports are byte-identical across
//! repeats and thread counts.
//!
//! Two receiver models are supported. The *syndrome-transparent* model
//! hands Bob the total error string directly. The *code-mediated* model
//! ([`run_with_code`]) lets Bob see only syndrome measurements of a
//! concrete code: each code block's syndrome is looked up in a table of
//! minimum-weight representatives, and trials whose total error is not a
//! representative are counted as erasures. On non-erased trials the two
//! models coincide by construction.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_error_with, Alphabet, Family, PauliChannel};
use crate::codebook::{
    build_codebook, encode, key_bits_per_block, Codebook, CodebookMode, CodebookParams,
    CodebookSize, MlDecoder, SecurityLevel,
};
use crate::error::{Error, Result};
use crate::keys::SecretKeyStream;
use crate::pauli::{ErrorString, Pauli};
use crate::qecc::{code_by_id, Code};
use crate::secrecy::{self, DEFAULT_SECRECY_TARGET};
use crate::typicality::{DEFAULT_ENUMERATION_CAP, DEFAULT_TOLERANCE};

/// Exact ML decoding scans the whole codebook per trial; refuse beyond
/// this size.
const MAX_DECODE_MESSAGES: u64 = 1 << 24;

/// Two-sided z for a 95% confidence interval.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
///
/// Stays inside `[0, 1]` and behaves sensibly at the boundary counts,
/// unlike the normal approximation. Zero trials yield the vacuous `(0, 1)`.
pub fn wilson_ci(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = p_hat + z2 / (2.0 * n);
    let half = WILSON_Z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    // The interval ends are exactly 0 / 1 at the boundary counts; compute
    // them as such rather than through fp cancellation.
    let lo = if successes == 0 {
        0.0
    } else {
        ((center - half) / denom).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        ((center + half) / denom).min(1.0)
    };
    (lo, hi)
}

/// Parse a thread-count override.
fn parse_thread_count(raw: &str) -> Result<usize> {
    match raw.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(Error::config(format!(
            "STEGOSIM_THREADS must be a positive integer, got '{raw}'"
        ))),
        Ok(k) => Ok(k),
    }
}

/// Run `f` on a rayon pool sized by the `STEGOSIM_THREADS` environment
/// variable; when the variable is unset, use the default global pool.
pub(crate) fn install_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var("STEGOSIM_THREADS") {
        Ok(raw) => {
            let threads = parse_thread_count(&raw)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::config(format!("cannot build a {threads}-thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(std::env::VarError::NotPresent) => Ok(f()),
        Err(e) => Err(Error::config(format!("STEGOSIM_THREADS: {e}"))),
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

/// Everything one experiment needs: channel point, codebook shape, trial
/// budget, and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub p: f64,
    pub dp: f64,
    pub n: usize,
    /// Rate target or explicit message count.
    pub size: CodebookSize,
    #[serde(default)]
    pub mode: CodebookMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub trials: u64,
    /// Seed of the per-trial randomness (messages and physical errors).
    pub seed: u64,
    /// Hex-encoded 32-byte master key seed for codebook construction.
    pub key_seed: String,
    /// Optional code identifier for the code-mediated receiver model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    /// Attach the analytic secrecy deficit to the report.
    #[serde(default)]
    pub audit: bool,
}

impl ExperimentConfig {
    /// The codebook parameters this experiment materializes.
    pub fn params(&self) -> Result<CodebookParams> {
        CodebookParams::new(
            self.family, self.p, self.dp, self.n, self.size, self.mode, self.tol,
        )
    }
}

/// Configuration echo embedded in a report. Carries the key fingerprint
/// rather than the key seed so reports can be shared without leaking key
/// material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub family: Family,
    pub p: f64,
    pub dp: f64,
    pub n: usize,
    /// Materialized message count.
    pub messages: u64,
    /// Achieved rate `log₂|ℳ|/N` in bits per use.
    pub rate: f64,
    pub mode: CodebookMode,
    pub tol: f64,
    pub trials: u64,
    pub seed: u64,
    pub key_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
}

/// Outcome of a Monte Carlo run.
///
/// Serialization is deterministic for a given config: the wall clock is
/// carried for callers but never serialized, so equal seeds give
/// byte-identical JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub config: ReportConfig,
    pub success_count: u64,
    pub trials: u64,
    /// Successes over all trials (erasures count as failures).
    pub success_rate: f64,
    /// 95% Wilson interval on the success rate.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials whose total error escaped the code's injective-syndrome set
    /// (code-mediated runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasures: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure_rate: Option<f64>,
    /// Secret-key bits the construction consumes per block.
    pub key_bits: f64,
    /// Analytic key-averaged secrecy deficit, when audited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrecy_deficit: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl SimReport {
    /// Deterministic pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct TrialOutcome {
    success: bool,
    erased: bool,
}

/// Syndrome-indexed minimum-weight representatives of one code block: the
/// largest error set Bob can identify injectively from syndromes alone.
struct CodedReceiver<'c> {
    code: &'c Code,
    reps: HashMap<u64, ErrorString>,
}

impl<'c> CodedReceiver<'c> {
    /// Fill the table greedily by weight (ties broken lexicographically),
    /// so each syndrome maps to its first minimum-weight error.
    fn prepare(code: &'c Code, alphabet: Alphabet) -> Result<CodedReceiver<'c>> {
        let n = code.n();
        let letters: &[Pauli] = match alphabet {
            Alphabet::Binary => &[Pauli::X],
            Alphabet::Quaternary => &[Pauli::X, Pauli::Y, Pauli::Z],
        };
        let mut support: u128 = 1;
        for _ in 0..n {
            support = support.saturating_mul(letters.len() as u128 + 1);
        }
        if support > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge {
                required: support,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }

        let want = code.syndrome_count();
        let mut reps = HashMap::new();
        let identity = ErrorString::identity(n);
        reps.insert(code.syndrome(&identity)?, identity);
        for w in 1..=n {
            if reps.len() as u64 == want {
                break;
            }
            // Position subsets of size w in lexicographic order.
            let mut pos: Vec<usize> = (0..w).collect();
            'subsets: loop {
                // Letter assignments in odometer order (digit 0 fastest).
                let mut digits = vec![0usize; w];
                loop {
                    let mut string = vec![Pauli::I; n];
                    for (slot, &position) in pos.iter().enumerate() {
                        string[position] = letters[digits[slot]];
                    }
                    let e = ErrorString::new(string);
                    reps.entry(code.syndrome(&e)?).or_insert(e);
                    if reps.len() as u64 == want {
                        break 'subsets;
                    }
                    let mut d = 0;
                    while d < w {
                        digits[d] += 1;
                        if digits[d] < letters.len() {
                            break;
                        }
                        digits[d] = 0;
                        d += 1;
                    }
                    if d == w {
                        break;
                    }
                }
                // Advance the position subset.
                let mut i = w;
                loop {
                    if i == 0 {
                        break 'subsets;
                    }
                    i -= 1;
                    if pos[i] != i + n - w {
                        pos[i] += 1;
                        for j in i + 1..w {
                            pos[j] = pos[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        }
        Ok(CodedReceiver { code, reps })
    }

    /// Reconstruct the total error from per-block syndromes. The trial is
    /// an erasure when any block's actual error is not the representative
    /// of its syndrome — Bob's reconstruction would be silently wrong, and
    /// the simulator (which knows the ground truth) flags it.
    fn erased(&self, total: &ErrorString) -> Result<bool> {
        let b = self.code.n();
        for chunk in total.letters().chunks(b) {
            let tile = ErrorString::new(chunk.to_vec());
            match self.reps.get(&self.code.syndrome(&tile)?) {
                Some(rep) if *rep == tile => {}
                _ => return Ok(true),
            }
        }
        Ok(false)
    }
}

/// One deterministic stream per trial: equal `(seed, trial)` pairs give
/// equal draws regardless of thread count or interleaving.
fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn simulate_trials(
    cb: &Codebook,
    decoder: &MlDecoder<'_>,
    physical: &PauliChannel,
    receiver: Option<&CodedReceiver<'_>>,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    install_pool(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(seed, trial);
                let m = rng.gen_range(0..cb.message_count());
                let codeword = encode(cb, m)?;
                let physical_error = sample_error_with(physical, codeword.len(), &mut rng);
                let total = physical_error.mul(codeword)?;
                if let Some(receiver) = receiver {
                    if receiver.erased(&total)? {
                        return Ok(TrialOutcome {
                            success: false,
                            erased: true,
                        });
                    }
                    // Not erased: Bob's syndrome lookup reproduces `total`
                    // exactly, so decoding proceeds on the same string the
                    // transparent model sees.
                }
                Ok(TrialOutcome {
                    success: decoder.decode(&total)? == m,
                    erased: false,
                })
            })
            .collect::<Result<Vec<TrialOutcome>>>()
    })?
}

fn run_internal(
    config: &ExperimentConfig,
    code: Option<&Code>,
    prebuilt: Option<Codebook>,
) -> Result<SimReport> {
    let started = Instant::now();
    if config.trials == 0 {
        return Err(Error::config("trial count must be at least 1"));
    }
    let params = config.params()?;
    let messages = params.message_count()?;
    if messages > MAX_DECODE_MESSAGES {
        return Err(Error::config(format!(
            "exact ML decoding over {messages} messages exceeds the limit of {MAX_DECODE_MESSAGES}"
        )));
    }
    if let Some(code) = code {
        if config.n % code.n() != 0 {
            return Err(Error::config(format!(
                "code '{}' acts on blocks of {}, which does not divide the block length {}",
                code.name(),
                code.n(),
                config.n
            )));
        }
    }

    // The codebook is keyed material shared by Alice and Bob for the whole
    // experiment; every trial reuses the counter-0 codebook.
    let cb = match prebuilt {
        Some(cb) => {
            if *cb.params() != params {
                return Err(Error::config(
                    "supplied codebook was built for different parameters than the experiment",
                ));
            }
            cb
        }
        None => {
            let key = SecretKeyStream::from_hex(&config.key_seed)?;
            build_codebook(&params, &key)?
        }
    };
    let physical = config.family.channel(config.p)?;
    let decoder = MlDecoder::new(&cb, &physical)?;
    let receiver = code
        .map(|c| CodedReceiver::prepare(c, config.family.alphabet()))
        .transpose()?;

    let outcomes = simulate_trials(
        &cb,
        &decoder,
        &physical,
        receiver.as_ref(),
        config.trials,
        config.seed,
    )?;
    let success_count = outcomes.iter().filter(|o| o.success).count() as u64;
    let erasure_count = outcomes.iter().filter(|o| o.erased).count() as u64;
    let (ci_low, ci_high) = wilson_ci(success_count, config.trials);

    let secrecy_deficit = if config.audit {
        Some(secrecy::secrecy_deficit(&params, DEFAULT_SECRECY_TARGET)?.deficit)
    } else {
        None
    };

    Ok(SimReport {
        config: ReportConfig {
            family: config.family,
            p: config.p,
            dp: config.dp,
            n: config.n,
            messages,
            rate: cb.achieved_rate(),
            mode: config.mode,
            tol: config.tol,
            trials: config.trials,
            seed: config.seed,
            key_fingerprint: cb.key_fingerprint().to_owned(),
            code: code.map(|c| c.name().to_owned()),
        },
        success_count,
        trials: config.trials,
        success_rate: success_count as f64 / config.trials as f64,
        ci_low,
        ci_high,
        erasures: code.map(|_| erasure_count),
        erasure_rate: code.map(|_| erasure_count as f64 / config.trials as f64),
        key_bits: key_bits_per_block(
            config.family,
            config.p,
            config.dp,
            config.n,
            SecurityLevel::None,
        )?,
        secrecy_deficit,
        seed: config.seed,
        wall_clock: started.elapsed(),
    })
}

fn resolve_code(config: &ExperimentConfig) -> Result<Option<Code>> {
    config.code.as_deref().map(code_by_id).transpose()
}

/// Run the experiment with the syndrome-transparent receiver, or — when
/// `config.code` names a library code — with that code mediating.
pub fn run_trials(config: &ExperimentConfig) -> Result<SimReport> {
    run_internal(config, resolve_code(config)?.as_ref(), None)
}

/// Run the experiment with Bob behind a concrete code: he learns the total
/// error only through per-block syndrome measurements. The code's length
/// must divide the block length; each length-`n` block is measured
/// independently. Any `config.code` field is ignored in favor of `code`.
pub fn run_with_code(config: &ExperimentConfig, code: &Code) -> Result<SimReport> {
    run_internal(config, Some(code), None)
}

/// Run the experiment on a previously exported codebook instead of
/// building one: the codebook's parameters must match the experiment's.
/// `config.key_seed` is not consulted — the codebook is the keyed material.
pub fn run_with_codebook(config: &ExperimentConfig, codebook: Codebook) -> Result<SimReport> {
    run_internal(config, resolve_code(config)?.as_ref(), Some(codebook))
}
