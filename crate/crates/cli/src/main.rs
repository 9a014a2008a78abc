//! `stegosim` — command-line front end for the steganographic-coding
//! toolkit: closed-form rates and bounds, secrecy audits, codebook
//! management, and Monte Carlo protocol runs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stegosim_core::bounds::{self, BoundInputs, SweepConfig, SWEEP_CSV_HEADER};
use stegosim_core::codebook::{build_codebook, key_bits_per_block};
use stegosim_core::qecc::{code_by_id, parse_code_text, Code};
use stegosim_core::secrecy::{secrecy_deficit, secrecy_deficit_exact, DEFAULT_SECRECY_TARGET};
use stegosim_core::sim::{run_trials, run_with_code, run_with_codebook};
use stegosim_core::{
    Codebook, CodebookMode, CodebookParams, CodebookSize, ExperimentConfig, Family,
    SecretKeyStream, SecurityLevel,
};

#[derive(Parser)]
#[command(
    name = "stegosim",
    version,
    about = "Steganography over Pauli channels: rates, key costs, secrecy audits, Monte Carlo runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The channel point every subcommand works at.
#[derive(Args)]
struct ChannelArgs {
    /// Channel family: bitflip or depol.
    #[arg(long)]
    family: Family,
    /// Physical error parameter p.
    #[arg(long)]
    p: f64,
    /// Deliberate-noise overhead δp; Eve expects the p + δp channel.
    #[arg(long)]
    dp: f64,
}

/// Codebook size: a rate target or an explicit message count.
#[derive(Args)]
struct SizeArgs {
    /// Rate target in bits per channel use (|ℳ| = max(1, ⌊2^(N·rate)⌋)).
    #[arg(long, conflicts_with = "messages")]
    rate: Option<f64>,
    /// Explicit message count |ℳ|.
    #[arg(long)]
    messages: Option<u64>,
}

impl SizeArgs {
    fn resolve(&self) -> Result<CodebookSize> {
        match (self.rate, self.messages) {
            (Some(r), None) => Ok(CodebookSize::Rate(r)),
            (None, Some(m)) => Ok(CodebookSize::Messages(m)),
            (None, None) => bail!("one of --rate or --messages is required"),
            (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
        }
    }

    /// Like `resolve`, but defaults to the achievable rate of the channel
    /// point when neither flag is given.
    fn resolve_or_achievable(&self, channel: &ChannelArgs) -> Result<CodebookSize> {
        match (self.rate, self.messages) {
            (None, None) => Ok(CodebookSize::Rate(bounds::achievable_rate(
                channel.family,
                channel.p,
                channel.dp,
            )?)),
            _ => self.resolve(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the achievable hiding rate in bits per channel use.
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Print the secret-key bits consumed per block of N uses.
    Keyrate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length N.
        #[arg(long)]
        n: usize,
        /// Also pad the payload: none, classical (+N·rate), quantum (+2N·rate).
        #[arg(long, default_value = "none")]
        secure: SecurityLevel,
    },
    /// Evaluate the converse upper bound on hidden bits per block.
    Bounds {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length N.
        #[arg(long)]
        n: usize,
        /// Secrecy slack parameter δ ∈ [0, 1).
        #[arg(long)]
        delta: f64,
        /// Recoverability slack parameter ε ∈ [0, 1).
        #[arg(long)]
        eps: f64,
        /// Print the labeled term-by-term breakdown instead of one number.
        #[arg(long)]
        verbose: bool,
    },
    /// Run Monte Carlo protocol trials and print a JSON report.
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length N.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        size: SizeArgs,
        /// Number of trials.
        #[arg(long)]
        trials: u64,
        /// Seed for per-trial randomness (messages, physical errors).
        #[arg(long)]
        seed: u64,
        /// Hex-encoded 32-byte master key seed.
        #[arg(long = "key-seed")]
        key_seed: String,
        /// Codebook construction: iid or partition.
        #[arg(long, default_value = "iid")]
        mode: CodebookMode,
        /// Typicality tolerance for partition mode.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Receive through a concrete code: a library id (rep3, rep5,
        /// hamming74, five_qubit) or @path to a text description.
        #[arg(long)]
        code: Option<String>,
        /// Attach the analytic secrecy deficit to the report.
        #[arg(long)]
        audit: bool,
        /// Write the experiment's codebook to a JSON file.
        #[arg(long = "export-codebook")]
        export_codebook: Option<PathBuf>,
        /// Use a previously exported codebook file instead of building one.
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Audit the secrecy deficit and print a JSON report.
    Secrecy {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length N.
        #[arg(long)]
        n: usize,
        /// Codebook construction: iid or partition.
        #[arg(long)]
        mode: CodebookMode,
        /// Require the exact string-level deficit; fail rather than fall
        /// back to the weight-marginal bound.
        #[arg(long)]
        exact: bool,
        /// Typicality tolerance for partition mode.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Secrecy target δ the verdict is judged against.
        #[arg(long, default_value_t = DEFAULT_SECRECY_TARGET)]
        delta: f64,
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Evaluate rate/key/bound closed forms over a TOML grid into a CSV.
    Sweep {
        /// TOML grid: arrays `family`, `p`, `dp`, `n`; scalars `delta`, `eps`.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build, export, and import codebooks without running trials.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
}

#[derive(Subcommand)]
enum CodebookAction {
    /// Build a codebook and write it as versioned JSON.
    Build {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length N.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        size: SizeArgs,
        /// Codebook construction: iid or partition.
        #[arg(long, default_value = "iid")]
        mode: CodebookMode,
        /// Typicality tolerance for partition mode.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Hex-encoded 32-byte master key seed.
        #[arg(long = "key-seed")]
        key_seed: String,
        /// Output path; prints to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an exported codebook file and print a summary.
    Import {
        /// Codebook JSON file.
        #[arg(long)]
        file: PathBuf,
        /// Re-export the validated codebook (round-trip check).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Rate { channel } => {
            let rate = bounds::achievable_rate(channel.family, channel.p, channel.dp)?;
            println!("{rate}");
        }
        Command::Keyrate { channel, n, secure } => {
            let bits = key_bits_per_block(channel.family, channel.p, channel.dp, n, secure)?;
            println!("{bits}");
        }
        Command::Bounds {
            channel,
            n,
            delta,
            eps,
            verbose,
        } => {
            let inputs = BoundInputs::new(channel.family, n, channel.p, channel.dp, delta, eps)?;
            let bound = bounds::upper_bound_m(&inputs)?;
            if verbose {
                let rate = bounds::achievable_rate(channel.family, channel.p, channel.dp)?;
                println!("rate_term   {}", n as f64 * rate);
                println!("slack_g     {}", bounds::slack_g(n, delta)?);
                println!("slack_f     {}", bounds::slack_f(n, eps)?);
                println!("upper_bound {bound}");
            } else {
                println!("{bound}");
            }
        }
        Command::Simulate {
            channel,
            n,
            size,
            trials,
            seed,
            key_seed,
            mode,
            tol,
            code,
            audit,
            export_codebook,
            codebook,
        } => {
            let (code_field, imported_code) = split_code_arg(code.as_deref())?;
            let config = ExperimentConfig {
                family: channel.family,
                p: channel.p,
                dp: channel.dp,
                n,
                size: size.resolve()?,
                mode,
                tol,
                trials,
                seed,
                key_seed: key_seed.clone(),
                code: code_field,
                audit,
            };
            if let Some(path) = &export_codebook {
                // The keyed build is deterministic, so this is exactly the
                // codebook the run below uses.
                let cb = match &codebook {
                    Some(file) => read_codebook(file)?,
                    None => {
                        let key = SecretKeyStream::from_hex(&key_seed)?;
                        build_codebook(&config.params()?, &key)?
                    }
                };
                fs::write(path, cb.to_json()?)
                    .with_context(|| format!("writing codebook to {}", path.display()))?;
            }
            let report = match (&codebook, &imported_code) {
                (Some(_), Some(_)) => {
                    bail!("--codebook cannot be combined with an @path code")
                }
                (Some(path), None) => {
                    let cb = read_codebook(path)?;
                    run_with_codebook(&config, cb)?
                }
                (None, Some(code)) => run_with_code(&config, code)?,
                (None, None) => run_trials(&config)?,
            };
            eprintln!("wall clock: {:.3}s", report.wall_clock.as_secs_f64());
            println!("{}", report.to_json()?);
        }
        Command::Secrecy {
            channel,
            n,
            mode,
            exact,
            tol,
            delta,
            size,
        } => {
            let params = CodebookParams::new(
                channel.family,
                channel.p,
                channel.dp,
                n,
                size.resolve_or_achievable(&channel)?,
                mode,
                tol,
            )?;
            let report = if exact {
                secrecy_deficit_exact(&params, delta)?
            } else {
                secrecy_deficit(&params, delta)?
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Sweep { config, out } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading sweep config {}", config.display()))?;
            let grid: SweepConfig = toml::from_str(&text)
                .with_context(|| format!("parsing sweep config {}", config.display()))?;
            let rows = bounds::sweep_rows(&grid)?;
            let mut csv = String::with_capacity(64 * (rows.len() + 1));
            csv.push_str(SWEEP_CSV_HEADER);
            csv.push('\n');
            for row in &rows {
                csv.push_str(&row.to_csv());
                csv.push('\n');
            }
            fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} rows -> {}", rows.len(), out.display());
        }
        Command::Codebook { action } => match action {
            CodebookAction::Build {
                channel,
                n,
                size,
                mode,
                tol,
                key_seed,
                out,
            } => {
                let params = CodebookParams::new(
                    channel.family,
                    channel.p,
                    channel.dp,
                    n,
                    size.resolve()?,
                    mode,
                    tol,
                )?;
                let key = SecretKeyStream::from_hex(&key_seed)?;
                let cb = build_codebook(&params, &key)?;
                let json = cb.to_json()?;
                match out {
                    Some(path) => {
                        fs::write(&path, json)
                            .with_context(|| format!("writing {}", path.display()))?;
                        print_codebook_summary(&cb);
                    }
                    None => println!("{json}"),
                }
            }
            CodebookAction::Import { file, out } => {
                let cb = read_codebook(&file)?;
                if let Some(path) = out {
                    fs::write(&path, cb.to_json()?)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                print_codebook_summary(&cb);
            }
        },
    }
    Ok(())
}

/// `--code NAME` stays a config field (resolved by the library); `--code
/// @path` loads a plain-text code description right here.
fn split_code_arg(raw: Option<&str>) -> Result<(Option<String>, Option<Code>)> {
    match raw {
        None => Ok((None, None)),
        Some(spec) => match spec.strip_prefix('@') {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading code description {path}"))?;
                Ok((None, Some(parse_code_text(&text)?)))
            }
            None => {
                code_by_id(spec)?; // validate the id before starting work
                Ok((Some(spec.to_owned()), None))
            }
        },
    }
}

fn read_codebook(path: &Path) -> Result<Codebook> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading codebook {}", path.display()))?;
    Ok(Codebook::from_json(&text)?)
}

fn print_codebook_summary(cb: &Codebook) {
    let params = cb.params();
    println!(
        "family={} p={} dp={} n={} mode={} messages={} rate={:.6} fingerprint={}",
        params.family(),
        params.p(),
        params.dp(),
        params.n(),
        params.mode(),
        cb.message_count(),
        cb.achieved_rate(),
        cb.key_fingerprint()
    );
}
