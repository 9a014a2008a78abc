//! Closed-form achievable rates, converse upper bounds with finite-N
//! slack, and parameter sweeps.
//!
//! The hiding rate of the protocol is pinned between two closed forms:
//! the random-coding construction achieves `H(p+δp) − H(p)` bits per use,
//! and the converse caps the message size at the same difference plus
//! slack terms `g(N, δ)` and `f(N, ε)` that price the allowed secrecy and
//! recoverability imperfections. At `δ = ε = 0` the two meet exactly.

use serde::{Deserialize, Serialize};

use crate::channel::{binary_entropy, solve_intermediate, Family};
use crate::codebook::{key_bits_per_block, SecurityLevel};
use crate::error::{Error, Result};

/// Achievable steganographic rate in bits per channel use:
/// `h(p+δp) − h(p)` (bit-flip) or `s(p+δp) − s(p)` (depolarizing).
pub fn achievable_rate(family: Family, p: f64, dp: f64) -> Result<f64> {
    // Same domain as the emulation construction that realizes the rate.
    solve_intermediate(family, p, p + dp)?;
    Ok(family.entropy(p + dp)? - family.entropy(p)?)
}

/// Secrecy slack `g(N, δ) = δ·N + h₂(δ)`.
pub fn slack_g(n: usize, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::prob("delta", delta));
    }
    Ok(delta * n as f64 + binary_entropy(delta)?)
}

/// Recoverability slack `f(N, ε) = ε·N + (1+ε)·h₂(ε/(1+ε))`.
pub fn slack_f(n: usize, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::prob("eps", eps));
    }
    Ok(eps * n as f64 + (1.0 + eps) * binary_entropy(eps / (1.0 + eps))?)
}

/// Inputs to the converse bound, with optional overrides for the two
/// entropy terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub family: Family,
    pub n: usize,
    pub p: f64,
    pub dp: f64,
    /// Secrecy parameter δ.
    pub delta: f64,
    /// Recoverability parameter ε.
    pub eps: f64,
    /// Override for `H(σ_E)`; defaults to `N·H_family(p+δp)`.
    pub h_sigma_e: Option<f64>,
    /// Override for the joint output entropy; defaults to `N·H_family(p)`
    /// (the asymptotic value — the `𝒪(ε)` correction has no closed
    /// finite-N form and is absorbed by the slack terms).
    pub h_joint: Option<f64>,
}

impl BoundInputs {
    /// Validate the channel domain and slack parameters.
    pub fn new(
        family: Family,
        n: usize,
        p: f64,
        dp: f64,
        delta: f64,
        eps: f64,
    ) -> Result<BoundInputs> {
        if n == 0 {
            return Err(Error::config("block length must be at least 1"));
        }
        solve_intermediate(family, p, p + dp)?;
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::prob("delta", delta));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::prob("eps", eps));
        }
        Ok(BoundInputs {
            family,
            n,
            p,
            dp,
            delta,
            eps,
            h_sigma_e: None,
            h_joint: None,
        })
    }

    /// Set explicit entropy terms (e.g. a measured coset output entropy).
    pub fn with_entropies(mut self, h_sigma_e: Option<f64>, h_joint: Option<f64>) -> BoundInputs {
        self.h_sigma_e = h_sigma_e;
        self.h_joint = h_joint;
        self
    }
}

/// Converse bound on the message size in bits:
/// `M ≤ H(σ_E) − H_joint + g(N, δ) + f(N, ε)`.
pub fn upper_bound_m(inputs: &BoundInputs) -> Result<f64> {
    let n = inputs.n as f64;
    let h_sigma_e = match inputs.h_sigma_e {
        Some(v) => v,
        None => n * inputs.family.entropy(inputs.p + inputs.dp)?,
    };
    let h_joint = match inputs.h_joint {
        Some(v) => v,
        None => n * inputs.family.entropy(inputs.p)?,
    };
    Ok(h_sigma_e - h_joint + slack_g(inputs.n, inputs.delta)? + slack_f(inputs.n, inputs.eps)?)
}

/// The largest output entropy a covertext can have after `𝒩_{p_total}^{⊗N}`.
///
/// Exact for bit-flip (`N·h(p_total)`, attained by Z-eigenstates). For
/// depolarizing, `N·s(p_total)` is an upper bound under the
/// nondegenerate-code assumption — which pure input maximizes it is open,
/// so this value should be read as a cap, not a maximum.
pub fn max_output_entropy(family: Family, p_total: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::config("block length must be at least 1"));
    }
    Ok(n as f64 * family.entropy(p_total)?)
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

/// Grid specification for a sweep, deserialized from the TOML config file.
///
/// Every combination of `family × p × dp × n` becomes one row; `delta` and
/// `eps` apply to all rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Vec<Family>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub eps: f64,
}

/// One sweep grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub p: f64,
    pub dp: f64,
    pub n: usize,
    pub delta: f64,
    pub eps: f64,
    /// Achievable rate in bits per use.
    pub rate: f64,
    /// Key consumption `K/N` in bits per use.
    pub key_rate: f64,
    /// Converse bound on message bits per block.
    pub upper_bound: f64,
}

/// The stable CSV column order.
pub const SWEEP_CSV_HEADER: &str = "family,p,dp,n,delta,eps,rate,key_rate,upper_bound";

impl SweepRow {
    /// Format as one CSV line in [`SWEEP_CSV_HEADER`] order.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.family,
            self.p,
            self.dp,
            self.n,
            self.delta,
            self.eps,
            self.rate,
            self.key_rate,
            self.upper_bound
        )
    }
}

/// Evaluate the closed forms on every grid point. Any point outside the
/// valid channel domain fails the whole sweep — grids are meant to be
/// constructed valid.
pub fn sweep_rows(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.family.is_empty() || config.p.is_empty() || config.dp.is_empty() || config.n.is_empty()
    {
        return Err(Error::config("sweep grid has an empty axis"));
    }
    let mut rows = Vec::new();
    for &family in &config.family {
        for &p in &config.p {
            for &dp in &config.dp {
                for &n in &config.n {
                    let rate = achievable_rate(family, p, dp)?;
                    let key_rate =
                        key_bits_per_block(family, p, dp, n, SecurityLevel::None)? / n as f64;
                    let inputs = BoundInputs::new(family, n, p, dp, config.delta, config.eps)?;
                    rows.push(SweepRow {
                        family,
                        p,
                        dp,
                        n,
                        delta: config.delta,
                        eps: config.eps,
                        rate,
                        key_rate,
                        upper_bound: upper_bound_m(&inputs)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
