//! Weak-typicality machinery for i.i.d. Pauli error distributions.
//!
//! A string `e` is typical for a channel when its per-symbol sample entropy
//! `−(1/N)·log₂ P(e)` lies within `tol` of the channel's letter entropy. The
//! typical set carries almost all probability at large `N` and its size is
//! `≈ 2^{N·H}`; both facts are what random stego coding and the key
//! accounting lean on, so this module computes them **exactly**:
//!
//! - membership and enumeration by direct evaluation (small `N`, capped);
//! - total mass and set size by type classes — all strings with the same
//!   letter counts share one probability, so a sum over at most `N+1`
//!   weight classes (symmetric channels) or `O(N³)` letter-count vectors
//!   (general quaternary) replaces enumeration. No Monte Carlo anywhere.
//!
//! Counts are tracked exactly in `u128` where they fit and in log₂ form
//! always; masses accumulate in log space to dodge overflow in the
//! binomial coefficients.

use crate::channel::{Alphabet, PauliChannel};
use crate::error::{Error, Result};
use crate::pauli::{ErrorString, Pauli};

/// Default ceiling on exact string-space enumeration (strings, not bytes).
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Default typicality tolerance in bits per symbol.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

/// A typical set: channel, block length, and tolerance in bits/symbol.
#[derive(Clone, Debug)]
pub struct TypicalSetSpec {
    channel: PauliChannel,
    n: usize,
    tol: f64,
}

impl TypicalSetSpec {
    /// Validate and build a spec. Requires `n ≥ 1` and `tol > 0`.
    pub fn new(channel: PauliChannel, n: usize, tol: f64) -> Result<TypicalSetSpec> {
        if n == 0 {
            return Err(Error::config("block length must be at least 1"));
        }
        if tol <= 0.0 || !tol.is_finite() {
            return Err(Error::config(format!(
                "typicality tolerance must be positive and finite, got {tol}"
            )));
        }
        Ok(TypicalSetSpec { channel, n, tol })
    }

    /// The channel whose product distribution defines typicality.
    pub fn channel(&self) -> &PauliChannel {
        &self.channel
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Tolerance in bits per symbol.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The target entropy `H(channel)` the sample entropy is compared to.
    pub fn entropy(&self) -> f64 {
        self.channel.entropy()
    }
}

/// Per-symbol sample entropy `−(1/N)·log₂ P(e)`.
///
/// A letter of probability zero makes the string impossible; the sample
/// entropy is then `+∞`, the non-typical sentinel. Letters outside the
/// channel's alphabet are rejected.
pub fn sample_entropy(e: &ErrorString, channel: &PauliChannel) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::config("sample entropy of an empty string"));
    }
    let mut log2_prob = 0.0f64;
    for &letter in e.letters() {
        if channel.alphabet() == Alphabet::Binary && !matches!(letter, Pauli::I | Pauli::X) {
            return Err(Error::AlphabetMismatch {
                context: "string contains Y/Z letters but the channel is binary",
            });
        }
        let p = channel.prob(letter);
        if p == 0.0 {
            return Ok(f64::INFINITY);
        }
        log2_prob += p.log2();
    }
    Ok(-log2_prob / e.len() as f64)
}

/// True iff `|sample_entropy(e) − H(channel)| ≤ tol`.
///
/// Impossible strings (infinite sample entropy) are never typical.
pub fn is_typical(e: &ErrorString, spec: &TypicalSetSpec) -> Result<bool> {
    if e.len() != spec.n {
        return Err(Error::LengthMismatch {
            expected: spec.n,
            got: e.len(),
        });
    }
    let se = sample_entropy(e, &spec.channel)?;
    Ok((se - spec.entropy()).abs() <= spec.tol)
}

/// Enumerate the typical set exactly, in lexicographic order
/// (`I < X < Y < Z`), under the default cap of [`DEFAULT_ENUMERATION_CAP`]
/// strings of search space.
pub fn enumerate_typical(spec: &TypicalSetSpec) -> Result<Vec<ErrorString>> {
    enumerate_typical_capped(spec, DEFAULT_ENUMERATION_CAP)
}

/// Enumerate the typical set with an explicit search-space cap.
///
/// Only letters inside the channel's support are visited (strings with a
/// zero-probability letter are never typical), so the search space is
/// `|support|^N`; exceeding `cap` is an error.
pub fn enumerate_typical_capped(spec: &TypicalSetSpec, cap: u128) -> Result<Vec<ErrorString>> {
    let support = spec.channel.support();
    let space = checked_pow(support.len() as u128, spec.n);
    match space {
        Some(s) if s <= cap => {}
        _ => {
            return Err(Error::EnumerationTooLarge {
                required: space.unwrap_or(u128::MAX),
                cap,
            });
        }
    }

    let h = spec.entropy();
    let log2_p: Vec<f64> = support.iter().map(|&l| spec.channel.prob(l).log2()).collect();
    let n = spec.n;
    let inv_n = 1.0 / n as f64;

    // Depth-first odometer over support letters; support is in lexicographic
    // order, so output order is lexicographic too.
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    let mut prefix = vec![0.0f64; n + 1]; // prefix[d] = Σ log2 p over digits[..d]
    let mut depth = 0usize;
    loop {
        if depth == n {
            let se = -prefix[n] * inv_n;
            if (se - h).abs() <= spec.tol {
                out.push(
                    digits
                        .iter()
                        .map(|&d| support[d])
                        .collect::<ErrorString>(),
                );
            }
            // Backtrack to the deepest position that can still advance.
            loop {
                if depth == 0 {
                    return Ok(out);
                }
                depth -= 1;
                if digits[depth] + 1 < support.len() {
                    digits[depth] += 1;
                    prefix[depth + 1] = prefix[depth] + log2_p[digits[depth]];
                    depth += 1;
                    break;
                }
            }
        } else {
            digits[depth] = 0;
            prefix[depth + 1] = prefix[depth] + log2_p[0];
            depth += 1;
        }
    }
}

/// One type class: every string with the same letter counts, which all share
/// one probability and one sample entropy.
#[derive(Clone, Copy, Debug)]
struct ClassInfo {
    /// Sample entropy of every member (bits/symbol).
    sample_entropy: f64,
    /// `ln` of the class's total probability mass.
    ln_mass: f64,
    /// `log₂` of the number of member strings.
    log2_count: f64,
    /// Exact member count when it fits in `u128`.
    count: Option<u128>,
}

/// Enumerate the non-empty type classes of `spec`'s product distribution.
fn type_classes(spec: &TypicalSetSpec) -> Result<Vec<ClassInfo>> {
    let ch = &spec.channel;
    let n = spec.n;
    if ch.is_symmetric() {
        // Weight classes: C(n,w)·mult^w strings of probability
        // p_I^{n−w}·p_e^w each; mass per class is binomial in the total
        // error parameter.
        let mult = match ch.alphabet() {
            Alphabet::Binary => 1u32,
            Alphabet::Quaternary => 3u32,
        };
        // Use the stored letter probabilities directly so class arithmetic
        // agrees with per-string enumeration to the last ulp.
        let p_i = ch.probs()[0];
        let pe = ch.probs()[1];
        let mut out = Vec::with_capacity(n + 1);
        let mut ln_choose = 0.0f64; // ln C(n, w), updated iteratively
        let mut count: Option<u128> = Some(1); // C(n,w)·mult^w, exactly
        for w in 0..=n {
            if w > 0 {
                let wf = w as f64;
                ln_choose += ((n - w + 1) as f64).ln() - wf.ln();
                count = count.and_then(|c| {
                    c.checked_mul((n - w + 1) as u128)
                        .map(|c| c / w as u128)
                        .and_then(|c| c.checked_mul(mult as u128))
                });
            }
            let possible = (w == 0 || pe > 0.0) && (w == n || p_i > 0.0);
            if !possible {
                continue;
            }
            let mut ln_mass = ln_choose;
            let mut log2_prob = 0.0;
            if w > 0 {
                ln_mass += w as f64 * (mult as f64 * pe).ln();
                log2_prob += w as f64 * pe.log2();
            }
            if w < n {
                ln_mass += (n - w) as f64 * p_i.ln();
                log2_prob += (n - w) as f64 * p_i.log2();
            }
            out.push(ClassInfo {
                sample_entropy: -log2_prob / n as f64,
                ln_mass,
                log2_count: ln_choose / std::f64::consts::LN_2 + w as f64 * (mult as f64).log2(),
                count,
            });
        }
        Ok(out)
    } else {
        // General letter-count vectors (n_I, n_X, n_Y, n_Z):
        // multinomial(n; counts) strings each of probability Π p_L^{n_L}.
        let compositions = composition_count(n);
        if compositions > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge {
                required: compositions,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let probs = *ch.probs();
        let ln_fact = ln_factorials(n);
        let mut out = Vec::new();
        for nx in 0..=n {
            for ny in 0..=(n - nx) {
                for nz in 0..=(n - nx - ny) {
                    let ni = n - nx - ny - nz;
                    let counts = [ni, nx, ny, nz];
                    if counts.iter().zip(&probs).any(|(&c, &p)| c > 0 && p == 0.0) {
                        continue; // zero-probability class
                    }
                    let mut ln_multi = ln_fact[n];
                    let mut ln_prob = 0.0;
                    let mut log2_prob = 0.0;
                    for (c, p) in counts.iter().zip(&probs) {
                        ln_multi -= ln_fact[*c];
                        if *c > 0 {
                            ln_prob += *c as f64 * p.ln();
                            log2_prob += *c as f64 * p.log2();
                        }
                    }
                    out.push(ClassInfo {
                        sample_entropy: -log2_prob / n as f64,
                        ln_mass: ln_multi + ln_prob,
                        log2_count: ln_multi / std::f64::consts::LN_2,
                        count: multinomial_exact(n, counts),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Exact total probability of the typical set, via type classes.
///
/// Never sampled: the sum runs over at most `N+1` weight classes for the
/// (always symmetric) bit-flip and depolarizing families, so block lengths
/// up to millions are exact and fast. Errors only when a non-symmetric
/// quaternary channel has too many letter-count classes to visit.
pub fn typical_mass(spec: &TypicalSetSpec) -> Result<f64> {
    let h = spec.entropy();
    let mut total = 0.0;
    for class in type_classes(spec)? {
        if (class.sample_entropy - h).abs() <= spec.tol {
            total += class.ln_mass.exp();
        }
    }
    // Clamp fp accumulation noise at the top end.
    Ok(total.min(1.0))
}

/// `log₂ |𝒯|`: size of the typical set in bits, exact up to fp rounding.
pub fn log2_typical_count(spec: &TypicalSetSpec) -> Result<f64> {
    let h = spec.entropy();
    let logs: Vec<f64> = type_classes(spec)?
        .into_iter()
        .filter(|c| (c.sample_entropy - h).abs() <= spec.tol)
        .map(|c| c.log2_count)
        .collect();
    Ok(log2_sum_exp2(&logs))
}

/// Exact `|𝒯|` when it fits in `u128`; `None` when any class count
/// overflows.
pub fn typical_count_exact(spec: &TypicalSetSpec) -> Result<Option<u128>> {
    let h = spec.entropy();
    let mut total: u128 = 0;
    for class in type_classes(spec)? {
        if (class.sample_entropy - h).abs() <= spec.tol {
            match class.count.and_then(|c| total.checked_add(c)) {
                Some(t) => total = t,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(total))
}

/// `log₂ Σ 2^{l_i}` without overflow.
fn log2_sum_exp2(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY; // empty set
    }
    let sum: f64 = logs.iter().map(|&l| (l - m).exp2()).sum();
    m + sum.log2()
}

/// `base^exp` in `u128`, `None` on overflow.
fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Number of letter-count vectors for 4 letters: C(n+3, 3).
fn composition_count(n: usize) -> u128 {
    let n = n as u128;
    (n + 1) * (n + 2) * (n + 3) / 6
}

/// `[ln 0!, …, ln n!]`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0f64; n + 1];
    for i in 1..=n {
        v[i] = v[i - 1] + (i as f64).ln();
    }
    v
}

/// Exact multinomial coefficient, `None` on overflow.
fn multinomial_exact(n: usize, counts: [usize; 4]) -> Option<u128> {
    // Product of binomials along a partial sum: n! / Π c_i! =
    // C(n, c0)·C(n−c0, c1)·C(n−c0−c1, c2).
    let mut remaining = n;
    let mut acc: u128 = 1;
    for c in counts {
        acc = acc.checked_mul(binomial_exact(remaining, c)?)?;
        remaining -= c;
    }
    Some(acc)
}

/// Exact binomial coefficient, `None` on overflow.
fn binomial_exact(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Always divides exactly: C(n,i)·(n−i) = (i+1)·C(n,i+1).
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
