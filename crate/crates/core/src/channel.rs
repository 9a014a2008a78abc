//! Pauli channels: bit-flip and depolarizing families, their entropies, and
//! the composition algebra used to emulate a noisier channel through a
//! quieter one.
//!
//! A Pauli channel applies letter `L` with probability `p_L` independently on
//! each qubit. Modulo phase the letters form the Klein four-group, so the
//! composite of two Pauli channels is again Pauli with letter distribution
//! equal to the XOR-convolution of the two distributions. Within one family
//! the composite stays in the family, which gives closed-form parameter maps:
//!
//! - bit-flip: `p ∘ q = p + q − 2pq`
//! - depolarizing: `p ∘ q = p + q − 4pq/3`
//!
//! Inverting the map ("which `q` turns physical `p` into target `p + δp`?")
//! is [`solve_intermediate`]; the maps become non-invertible at the fixed
//! points `p = 1/2` (bit-flip) and `p = 3/4` (depolarizing), which are
//! rejected as singular.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{ErrorString, Pauli};

/// Absolute tolerance for "probabilities sum to one" checks.
const PROB_SUM_TOL: f64 = 1e-9;

/// Letter set a channel acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// `{I, X}` — bit-flip-type channels.
    Binary,
    /// `{I, X, Y, Z}` — general Pauli channels.
    Quaternary,
}

impl Alphabet {
    /// The letters of this alphabet in lexicographic order.
    pub fn letters(self) -> &'static [Pauli] {
        match self {
            Alphabet::Binary => &[Pauli::I, Pauli::X],
            Alphabet::Quaternary => &[Pauli::I, Pauli::X, Pauli::Y, Pauli::Z],
        }
    }

    /// Alphabet size.
    pub fn size(self) -> usize {
        self.letters().len()
    }

    /// Number of strings of length `n` over this alphabet.
    pub fn string_count(self, n: usize) -> u128 {
        (self.size() as u128).pow(n as u32)
    }
}

/// The two channel families the toolkit models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `{I, X}` with probabilities `(1 − p, p)`.
    #[serde(rename = "bitflip")]
    BitFlip,
    /// `{I, X, Y, Z}` with probabilities `(1 − p, p/3, p/3, p/3)`.
    #[serde(rename = "depol")]
    Depolarizing,
}

impl Family {
    /// The alphabet the family's channels act on.
    pub fn alphabet(self) -> Alphabet {
        match self {
            Family::BitFlip => Alphabet::Binary,
            Family::Depolarizing => Alphabet::Quaternary,
        }
    }

    /// Construct the family's channel at error parameter `p`.
    pub fn channel(self, p: f64) -> Result<PauliChannel> {
        match self {
            Family::BitFlip => PauliChannel::bit_flip(p),
            Family::Depolarizing => PauliChannel::depolarizing(p),
        }
    }

    /// Per-use output entropy of the family's channel at parameter `p`:
    /// binary entropy `h(p)` for bit-flip, `s(p)` for depolarizing.
    pub fn entropy(self, p: f64) -> Result<f64> {
        match self {
            Family::BitFlip => binary_entropy(p),
            Family::Depolarizing => depolarizing_entropy(p),
        }
    }

    /// Parameter of the composition of two channels of this family.
    pub fn compose_param(self, p: f64, q: f64) -> f64 {
        match self {
            Family::BitFlip => p + q - 2.0 * p * q,
            Family::Depolarizing => p + q - 4.0 * p * q / 3.0,
        }
    }

    /// The parameter value at which composition stops being invertible.
    pub fn singular_param(self) -> f64 {
        match self {
            Family::BitFlip => 0.5,
            Family::Depolarizing => 0.75,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::BitFlip => write!(f, "bitflip"),
            Family::Depolarizing => write!(f, "depol"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "bitflip" | "bit-flip" | "bit_flip" => Ok(Family::BitFlip),
            "depol" | "depolarizing" => Ok(Family::Depolarizing),
            other => Err(Error::config(format!(
                "unknown channel family '{other}' (expected 'bitflip' or 'depol')"
            ))),
        }
    }
}

/// An i.i.d. Pauli channel: a probability for each letter, applied
/// independently per qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    alphabet: Alphabet,
    /// Letter probabilities indexed by letter code.
    probs: [f64; 4],
}

impl PauliChannel {
    /// Build a channel from explicit letter probabilities (indexed
    /// `[I, X, Y, Z]`).
    ///
    /// Probabilities must lie in `[0, 1]` and sum to 1 within `1e-9`; a
    /// binary channel must put zero mass on `Y` and `Z`.
    pub fn new(alphabet: Alphabet, probs: [f64; 4]) -> Result<PauliChannel> {
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::ProbabilityOutOfRange {
                    name: ["p_I", "p_X", "p_Y", "p_Z"][i],
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::ProbabilitySum {
                sum,
                tol: PROB_SUM_TOL,
            });
        }
        if alphabet == Alphabet::Binary && (probs[2] != 0.0 || probs[3] != 0.0) {
            return Err(Error::AlphabetMismatch {
                context: "binary channel with mass on Y or Z",
            });
        }
        Ok(PauliChannel { alphabet, probs })
    }

    /// Bit-flip channel: `X` with probability `p`, identity otherwise.
    pub fn bit_flip(p: f64) -> Result<PauliChannel> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::prob("p", p));
        }
        PauliChannel::new(Alphabet::Binary, [1.0 - p, p, 0.0, 0.0])
    }

    /// Depolarizing channel: each of `X`, `Y`, `Z` with probability `p/3`.
    pub fn depolarizing(p: f64) -> Result<PauliChannel> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::prob("p", p));
        }
        PauliChannel::new(
            Alphabet::Quaternary,
            [1.0 - p, p / 3.0, p / 3.0, p / 3.0],
        )
    }

    /// The identity channel on the given alphabet.
    pub fn identity(alphabet: Alphabet) -> PauliChannel {
        PauliChannel {
            alphabet,
            probs: [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// The channel's alphabet.
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Probability of a single letter.
    #[inline]
    pub fn prob(&self, letter: Pauli) -> f64 {
        self.probs[letter.code() as usize]
    }

    /// All four letter probabilities, indexed by letter code.
    pub fn probs(&self) -> &[f64; 4] {
        &self.probs
    }

    /// Total non-identity probability (the family parameter for bit-flip and
    /// depolarizing channels).
    pub fn error_param(&self) -> f64 {
        1.0 - self.probs[0]
    }

    /// Letters with non-zero probability, in lexicographic order.
    pub fn support(&self) -> Vec<Pauli> {
        Pauli::ALL
            .iter()
            .copied()
            .filter(|p| self.prob(*p) > 0.0)
            .collect()
    }

    /// Shannon entropy of the letter distribution in bits
    /// (`0·log 0 = 0`).
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// True when every non-identity letter in the alphabet carries the same
    /// probability (always true for binary channels). Symmetric channels
    /// admit weight-class arithmetic: all strings of equal weight are
    /// equiprobable.
    pub fn is_symmetric(&self) -> bool {
        match self.alphabet {
            Alphabet::Binary => true,
            Alphabet::Quaternary => {
                let [_, x, y, z] = self.probs;
                let m = x.max(y).max(z);
                let d = (x - y).abs().max((x - z).abs());
                d <= 1e-12 * m.max(1.0)
            }
        }
    }

    /// The same letter distribution viewed over the quaternary alphabet.
    pub fn promote(&self) -> PauliChannel {
        PauliChannel {
            alphabet: Alphabet::Quaternary,
            probs: self.probs,
        }
    }
}

/// Binary entropy `h(p) = −p·log2 p − (1−p)·log2(1−p)` with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::prob("p", p));
    }
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    Ok(h)
}

/// Depolarizing output entropy
/// `s(q) = −(1−q)·log2(1−q) − q·log2(q/3)`: the entropy of the letter
/// distribution `(1−q, q/3, q/3, q/3)`.
pub fn depolarizing_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) || !q.is_finite() {
        return Err(Error::prob("q", q));
    }
    let mut s = 0.0;
    if q < 1.0 {
        s -= (1.0 - q) * (1.0 - q).log2();
    }
    if q > 0.0 {
        s -= q * (q / 3.0).log2();
    }
    Ok(s)
}

/// Composite of two Pauli channels applied in sequence.
///
/// The letter distribution is the XOR-convolution of the inputs'
/// distributions (letters multiply modulo phase). Two binary channels
/// compose to a binary channel; otherwise the result is quaternary.
pub fn compose(a: &PauliChannel, b: &PauliChannel) -> PauliChannel {
    let alphabet = if a.alphabet == Alphabet::Binary && b.alphabet == Alphabet::Binary {
        Alphabet::Binary
    } else {
        Alphabet::Quaternary
    };
    let mut probs = [0.0f64; 4];
    for i in 0..4 {
        if a.probs[i] == 0.0 {
            continue;
        }
        for j in 0..4 {
            probs[i ^ j] += a.probs[i] * b.probs[j];
        }
    }
    // Exactly renormalizable rounding noise only; construction keeps probs valid.
    PauliChannel { alphabet, probs }
}

/// Solve `p ∘ q = p + δp` for the intermediate parameter `q` within a family.
///
/// `delta_p = p_total − p_physical` must be non-negative; the physical
/// parameter must sit strictly below the family's fixed point (`1/2` for
/// bit-flip, `3/4` for depolarizing), where the composition map degenerates
/// and no intermediate channel exists. The solution is
/// `q = δp / (1 − 2p)` (bit-flip) or `q = δp / (1 − 4p/3)` (depolarizing);
/// targets that would need `q > 1` are rejected.
pub fn solve_intermediate(family: Family, p_physical: f64, p_total: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_physical) || !p_physical.is_finite() {
        return Err(Error::prob("p_physical", p_physical));
    }
    if !(0.0..=1.0).contains(&p_total) || !p_total.is_finite() {
        return Err(Error::prob("p_total", p_total));
    }
    let denom = match family {
        Family::BitFlip => 1.0 - 2.0 * p_physical,
        Family::Depolarizing => 1.0 - 4.0 * p_physical / 3.0,
    };
    if denom.abs() < 1e-12 {
        return Err(Error::SingularChannel { p: p_physical });
    }
    let delta = p_total - p_physical;
    let q = delta / denom;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::NoValidEmulation {
            physical: p_physical,
            target: p_total,
        });
    }
    Ok(q)
}

/// Probability the channel produces exactly the string `e` on a block of
/// `e.len()` independent uses.
///
/// Errors when `e` contains a letter outside the channel's alphabet.
pub fn string_probability(channel: &PauliChannel, e: &ErrorString) -> Result<f64> {
    let mut prob = 1.0;
    for &letter in e.letters() {
        if channel.alphabet == Alphabet::Binary && !matches!(letter, Pauli::I | Pauli::X) {
            return Err(Error::AlphabetMismatch {
                context: "string contains Y/Z letters but the channel is binary",
            });
        }
        prob *= channel.prob(letter);
    }
    Ok(prob)
}

/// Draw one error string of length `n` from the channel using the supplied
/// RNG (inverse-CDF per letter; one uniform draw per qubit).
pub fn sample_error_with<R: Rng + ?Sized>(
    channel: &PauliChannel,
    n: usize,
    rng: &mut R,
) -> ErrorString {
    let mut letters = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = Pauli::I;
        for &letter in Pauli::ALL.iter() {
            let pl = channel.prob(letter);
            if pl <= 0.0 {
                continue; // never select outside the support, even on fp edges
            }
            chosen = letter;
            acc += pl;
            if u < acc {
                break;
            }
        }
        letters.push(chosen);
    }
    ErrorString::new(letters)
}

/// Draw one error string of length `n` from a deterministic stream seeded by
/// `seed`. Equal seeds give equal strings across runs and platforms.
pub fn sample_error(channel: &PauliChannel, n: usize, seed: u64) -> ErrorString {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_error_with(channel, n, &mut rng)
}
