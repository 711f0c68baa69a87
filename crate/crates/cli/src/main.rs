//! `slpconv` command-line tool.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or parse error,
//! 3 I/O error, 4 exactness bound exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slpconv::conv::{schoolbook_sliding, ConvConfig, DEFAULT_MAX_VALUE, DEFAULT_SCHOOLBOOK_THRESHOLD};
use slpconv::corpus::{seeded_slp, CorpusParams};
use slpconv::matcher::{find_hamming, find_matches};
use slpconv::{hamming_repr, lz78, ConvEngine, ConvRepr, Mode, Slp, WindowTrie};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] slpconv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(slpconv::Error::BoundExceeded(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "slpconv", version, about = "Convolution over SLP-compressed text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct EngineOpts {
    /// Largest admissible input value for exact convolution.
    #[arg(long, default_value_t = DEFAULT_MAX_VALUE)]
    max_value: u64,
    /// Kernels up to this length use the quadratic loop.
    #[arg(long, default_value_t = DEFAULT_SCHOOLBOOK_THRESHOLD)]
    schoolbook_threshold: usize,
}

impl EngineOpts {
    fn engine(&self) -> ConvEngine {
        ConvEngine::new(ConvConfig {
            max_value: self.max_value,
            schoolbook_threshold: self.schoolbook_threshold,
            ..ConvConfig::default()
        })
    }
}

#[derive(Args, Debug, Clone)]
struct PatternOpts {
    /// Read the pattern as raw bytes, byte b becoming code b+1.
    #[arg(long)]
    raw: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a text with LZ78 into an SLP1 grammar, or generate a random
    /// grammar with --seed.
    Build {
        /// Text file (decimal codes, or bytes with --raw).
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        raw: bool,
        /// Generate a random corpus grammar instead of reading a text.
        #[arg(long, conflicts_with = "input")]
        seed: Option<u64>,
    },
    /// Build a BCR1 or TCR1 convolution representation.
    Convolve {
        slp: PathBuf,
        pattern: PathBuf,
        #[arg(long, default_value = "trie")]
        mode: Mode,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        pat: PatternOpts,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Print the convolution value at a 1-based position.
    Query { repr: PathBuf, slp: PathBuf, i: u64 },
    /// Positions whose Hamming distance to the pattern is at most k.
    Hamming {
        slp: PathBuf,
        pattern: PathBuf,
        #[arg(long, default_value_t = 0)]
        threshold: i64,
        #[arg(long, default_value = "trie")]
        mode: Mode,
        #[command(flatten)]
        pat: PatternOpts,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Exact occurrences, with code 0 (or '?' under --raw) as a wildcard
    /// when --wildcards is given.
    Match {
        slp: PathBuf,
        pattern: PathBuf,
        #[arg(long)]
        wildcards: bool,
        #[arg(long, default_value = "trie")]
        mode: Mode,
        #[command(flatten)]
        pat: PatternOpts,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Grammar statistics, plus window-trie figures for a given m.
    Stats {
        slp: PathBuf,
        #[arg(short)]
        m: Option<usize>,
    },
    /// Compare both representations (and optionally a stored one) against a
    /// brute-force scan of the decoded text.
    Verify {
        slp: PathBuf,
        pattern: PathBuf,
        /// A BCR1 or TCR1 file to check as well.
        #[arg(long)]
        repr: Option<PathBuf>,
        /// Maximum number of characters to decode.
        #[arg(long, default_value_t = 100_000_000)]
        cap: u64,
        #[command(flatten)]
        pat: PatternOpts,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Print the window trie for pattern length m.
    DumpTrie {
        slp: PathBuf,
        #[arg(short)]
        m: usize,
    },
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn load_slp(path: &Path) -> CliResult<Slp> {
    Ok(Slp::parse(&read_bytes(path)?)?)
}

/// Parses a code sequence: whitespace-separated decimals, or raw bytes
/// mapped to `b + 1` (with `?` mapped to 0 when `wildcards` is set).
fn parse_codes(bytes: &[u8], raw: bool, wildcards: bool) -> CliResult<Vec<u64>> {
    let codes: Vec<u64> = if raw {
        bytes
            .iter()
            .map(|&b| if wildcards && b == b'?' { 0 } else { b as u64 + 1 })
            .collect()
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| CliError::Usage("code file is not UTF-8".into()))?;
        text.split_ascii_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad code {tok:?}")))
            })
            .collect::<CliResult<_>>()?
    };
    if codes.is_empty() {
        return Err(CliError::Usage("empty code sequence".into()));
    }
    Ok(codes)
}

fn load_pattern(path: &Path, raw: bool, wildcards: bool) -> CliResult<Vec<u64>> {
    parse_codes(&read_bytes(path)?, raw, wildcards)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slpconv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Build {
            input,
            output,
            raw,
            seed,
        } => {
            let slp = match (input, seed) {
                (Some(path), None) => lz78::compress(&parse_codes(&read_bytes(&path)?, raw, false)?)?,
                (None, Some(seed)) => seeded_slp(seed, CorpusParams::default()),
                _ => return Err(CliError::Usage("give either an input file or --seed".into())),
            };
            write_out(output.as_deref(), &slp.to_slp1())
        }
        Command::Convolve {
            slp,
            pattern,
            mode,
            output,
            pat,
            engine,
        } => {
            let slp = load_slp(&slp)?;
            let pattern = load_pattern(&pattern, pat.raw, false)?;
            let engine = engine.engine();
            let repr = ConvRepr::build(&slp, &pattern, mode, &engine)?;
            write_out(output.as_deref(), &repr.to_text())?;
            let m = pattern.len();
            let n = slp.n() as u64;
            let big_n = slp.text_len();
            let alpha = slp.alpha(m);
            let r = match &repr {
                ConvRepr::Trie(t) => t.window().len().to_string(),
                ConvRepr::Basic(_) if m >= 2 && big_n >= m as u64 => WindowTrie::build(&slp, m)?.len().to_string(),
                ConvRepr::Basic(_) => "-".into(),
            };
            let work = engine.work();
            eprintln!(
                "n={n} N={big_n} m={m} alpha={alpha} r={r} bound={} sliding_input={} transformed={} sliding_calls={}",
                (n * m as u64).min(big_n - alpha),
                work.sliding_input,
                work.transformed,
                work.sliding_calls
            );
            Ok(())
        }
        Command::Query { repr, slp, i } => {
            let slp = load_slp(&slp)?;
            let text = String::from_utf8(read_bytes(&repr)?)
                .map_err(|_| CliError::Usage("representation file is not UTF-8".into()))?;
            let repr = ConvRepr::parse(&text, &slp)?;
            println!("{}", repr.query(&slp, i)?);
            Ok(())
        }
        Command::Hamming {
            slp,
            pattern,
            threshold,
            mode,
            pat,
            engine,
        } => {
            let slp = load_slp(&slp)?;
            let pattern = load_pattern(&pattern, pat.raw, false)?;
            let occ = find_hamming(&slp, &pattern, threshold, mode, &engine.engine())?;
            write_out(None, &occ.to_text())
        }
        Command::Match {
            slp,
            pattern,
            wildcards,
            mode,
            pat,
            engine,
        } => {
            let slp = load_slp(&slp)?;
            let pattern = load_pattern(&pattern, pat.raw, wildcards)?;
            if !wildcards && pattern.contains(&0) {
                return Err(CliError::Usage("code 0 needs --wildcards".into()));
            }
            let engine = engine.engine();
            let occ = if wildcards {
                find_matches(&slp, &pattern, mode, &engine)?
            } else {
                find_hamming(&slp, &pattern, 0, mode, &engine)?
            };
            write_out(None, &occ.to_text())
        }
        Command::Stats { slp, m } => {
            let slp = load_slp(&slp)?;
            let mut line = format!(
                "n={} N={} height={} sigma={}",
                slp.n(),
                slp.text_len(),
                slp.height(),
                slp.alphabet_size()
            );
            if let Some(m) = m {
                if m == 0 {
                    return Err(CliError::Usage("m must be at least 1".into()));
                }
                let alpha = slp.alpha(m);
                line.push_str(&format!(" m={m} alpha={alpha}"));
                if m >= 2 {
                    let stats = WindowTrie::build(&slp, m)?.stats(&slp);
                    line.push_str(&format!(" r={} bound={}", stats.r, stats.bound));
                }
            }
            println!("{line}");
            Ok(())
        }
        Command::Verify {
            slp,
            pattern,
            repr,
            cap,
            pat,
            engine,
        } => {
            let slp = load_slp(&slp)?;
            let pattern = load_pattern(&pattern, pat.raw, false)?;
            let stored = match repr {
                Some(path) => {
                    let text = String::from_utf8(read_bytes(&path)?)
                        .map_err(|_| CliError::Usage("representation file is not UTF-8".into()))?;
                    Some(ConvRepr::parse(&text, &slp)?)
                }
                None => None,
            };
            verify(&slp, &pattern, stored.as_ref(), cap, &engine.engine())
        }
        Command::DumpTrie { slp, m } => {
            let slp = load_slp(&slp)?;
            write_out(None, &WindowTrie::build(&slp, m)?.dump())
        }
    }
}

fn compare(label: &str, expected: &[i64], got: &[i64]) -> CliResult<()> {
    if expected.len() != got.len() {
        return Err(CliError::Mismatch(format!(
            "{label}: {} positions, expected {}",
            got.len(),
            expected.len()
        )));
    }
    match expected.iter().zip(got).position(|(a, b)| a != b) {
        Some(k) => Err(CliError::Mismatch(format!(
            "{label}: mismatch at position {}: expected {}, got {}",
            k + 1,
            expected[k],
            got[k]
        ))),
        None => {
            println!("{label}: ok ({} positions)", got.len());
            Ok(())
        }
    }
}

fn verify(slp: &Slp, pattern: &[u64], stored: Option<&ConvRepr>, cap: u64, engine: &ConvEngine) -> CliResult<()> {
    let text = slp.decode(cap)?;
    let m = pattern.len();
    if m > text.len() {
        println!("pattern longer than text: nothing to compare");
        return Ok(());
    }
    let naive = schoolbook_sliding(&text, pattern);
    for mode in [Mode::Basic, Mode::Trie] {
        let repr = ConvRepr::build(slp, pattern, mode, engine)?;
        compare(&format!("convolution ({mode:?})"), &naive, &repr.materialize(slp, cap)?)?;
    }
    if let Some(repr) = stored {
        compare("stored representation", &naive, &repr.materialize(slp, cap)?)?;
    }
    if pattern.contains(&0) {
        println!("hamming: skipped (pattern contains code 0)");
    } else {
        let naive_ham: Vec<i64> = text
            .windows(m)
            .map(|w| w.iter().zip(pattern).filter(|(a, b)| a != b).count() as i64)
            .collect();
        for mode in [Mode::Basic, Mode::Trie] {
            let score = hamming_repr(slp, pattern, mode, engine)?;
            compare(&format!("hamming ({mode:?})"), &naive_ham, &score.materialize(slp, cap)?)?;
        }
    }
    println!("verify: pass");
    Ok(())
}
