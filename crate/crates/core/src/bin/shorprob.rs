use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shorprob::cli::{
    parse_range, resolve_input, verify_range, write_pretty, write_sweep, write_verify_summary,
    CliError, CliResult, OutputDocument, SimulationDoc, SweepFormat,
};
use shorprob::oracle::{census_limit_from_env, census_with_limit, Enumerator};
use shorprob::simulator::{monte_carlo_with, Method, RangeMode, SuccessModel};

/// Exact success probabilities of Shor's algorithm.
#[derive(Debug, Parser)]
#[command(name = "shorprob", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Step and overall probabilities for one N.
    Prob {
        /// N in decimal.
        n: Option<String>,
        /// Known factorization, e.g. "2^2*3*5".
        #[arg(long)]
        factors: Option<String>,
        /// Human-readable table instead of JSON.
        #[arg(long)]
        pretty: bool,
        /// Include brute-force census counts (N must be within the census limit).
        #[arg(long)]
        census: bool,
    },
    /// Check closed forms against the census for every N in A..B (inclusive).
    Verify { range: String },
    /// Exhaustive census of the residues mod N.
    Census {
        n: Option<String>,
        #[arg(long)]
        factors: Option<String>,
        /// Write one JSON record per residue to stdout; the summary goes to stderr.
        #[arg(long)]
        dump: bool,
    },
    /// Seeded Monte-Carlo runs of the algorithm.
    Simulate {
        n: Option<String>,
        #[arg(long)]
        factors: Option<String>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = RangeArg::Full)]
        range: RangeArg,
        #[arg(long, value_enum, default_value_t = MethodArg::ShorRun)]
        method: MethodArg,
    },
    /// Table of probabilities for every N in A..B (inclusive).
    Sweep {
        range: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Algorithm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RangeArg {
    Full,
    Algorithm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    ShorRun,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn print_json<T: serde::Serialize>(out: &mut impl Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let limit = census_limit_from_env();
    match cli.command {
        Command::Prob { n, factors, pretty, census } => {
            let f = resolve_input(n.as_deref(), factors.as_deref())?;
            if pretty {
                write_pretty(&mut out, &f)?;
            } else {
                let mut doc = OutputDocument::new(&f);
                if census {
                    doc = doc.with_census(&census_with_limit(&f, limit)?);
                }
                print_json(&mut out, &doc)?;
            }
        }
        Command::Verify { range } => {
            let (a, b) = parse_range(&range)?;
            let summary = verify_range(a, b, limit)?;
            write_verify_summary(&mut out, &summary)?;
            out.flush()?;
            if !summary.mismatches.is_empty() {
                return Err(CliError::VerificationFailed(summary.mismatches.len()));
            }
        }
        Command::Census { n, factors, dump } => {
            let f = resolve_input(n.as_deref(), factors.as_deref())?;
            let c = census_with_limit(&f, limit)?;
            let doc = OutputDocument::new(&f).with_census(&c);
            if dump {
                let e = Enumerator::new(&f)?;
                for rec in e.records() {
                    serde_json::to_writer(&mut out, &rec)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                    writeln!(out)?;
                }
                let mut err = io::stderr().lock();
                serde_json::to_writer(&mut err, &doc).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(err)?;
            } else {
                print_json(&mut out, &doc)?;
            }
        }
        Command::Simulate { n, factors, trials, seed, mode, range, method } => {
            let f = resolve_input(n.as_deref(), factors.as_deref())?;
            let mode = match mode {
                ModeArg::Paper => SuccessModel::PaperModel,
                ModeArg::Algorithm => SuccessModel::AlgorithmModel,
            };
            let range = match range {
                RangeArg::Full => RangeMode::FullRange,
                RangeArg::Algorithm => RangeMode::AlgorithmRange,
            };
            let method = match method {
                MethodArg::ShorRun => Method::ShorRun,
                MethodArg::Bernoulli => Method::Bernoulli,
            };
            let report = monte_carlo_with(&f, trials, seed, mode, range, method, limit)?;
            print_json(&mut out, &SimulationDoc::from(&report))?;
        }
        Command::Sweep { range, format, output } => {
            let (a, b) = parse_range(&range)?;
            let format = match format {
                FormatArg::Csv => SweepFormat::Csv,
                FormatArg::Json => SweepFormat::Json,
            };
            match output {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| {
                        CliError::Io(format!("cannot write {}: {e}", path.display()))
                    })?;
                    let mut w = BufWriter::new(file);
                    write_sweep(&mut w, a, b, format)?;
                    w.flush()?;
                }
                None => write_sweep(&mut out, a, b, format)?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
