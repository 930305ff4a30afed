use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cli_verify::expand::{parse_document, series_text};
use cli_verify::{
    cmd_decompose, cmd_expand, run_suite, suite_names, CliError, DecomposeRequest, ExpandTarget, RunConfig, THREADS_ENV,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "delta-verify", version, about = "δ-expansions of newforms: expand, decompose and verify")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Prime p (odd).
    #[arg(long, global = true)]
    p: Option<u64>,
    /// p-adic precision M: results are exact mod p^M.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Denominator exponent E: coefficients may have denominators up to p^E.
    #[arg(long = "denom-exp", global = true)]
    denom_exp: Option<u32>,
    /// Weighted-degree cap (total degree for formal-group series).
    #[arg(long = "weight-cap", global = true)]
    weight_cap: Option<i64>,
    /// Laurent floor: largest allowed negative power of q.
    #[arg(long = "laurent-floor", global = true)]
    laurent_floor: Option<u32>,
    /// Cap on derivative degree.
    #[arg(long = "delta-cap", global = true)]
    delta_cap: Option<u32>,
    /// level11, level32 or a coefficient-table JSON file.
    #[arg(long, global = true, default_value = "level11")]
    profile: String,
    /// Override the f♯ case: non-cm, cm-inert or cm-split.
    #[arg(long, global = true)]
    case: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write one series as a delta-series/1 document.
    Expand {
        /// f, fminus1, fsharp, psi, fcrys, psi-char or table.
        target: String,
        /// Order of f_crys.
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    /// Run a verification suite and write its report.
    Check {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Decompose a permutation-symmetric series into the images δ^i S_j.
    Decompose {
        input: PathBuf,
        /// Symmetrize a single-family input over this many families (default p).
        #[arg(long)]
        sigma: Option<usize>,
        /// Shuffle the elimination order.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Infra(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Infra(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig {
        p: cli.p,
        prec: cli.prec,
        denom_exp: cli.denom_exp,
        weight_cap: cli.weight_cap,
        laurent_floor: cli.laurent_floor,
        delta_cap: cli.delta_cap,
        profile: cli.profile,
        case: cli.case,
        threads: cli.threads,
    };
    match cli.cmd {
        Cmd::Expand { target, r } => {
            let target = ExpandTarget::parse(&target, r)?;
            let json = cmd_expand(target, &cfg)?;
            let text = match (cli.format, target) {
                (Format::Text, t) if t != ExpandTarget::Table => series_text(&parse_document(&json)?),
                _ => json,
            };
            emit(&text, &cli.out)
        }
        Cmd::Check { suite } => {
            if !suite_names().contains(&suite.as_str()) {
                return Err(CliError::Config(format!("unknown suite {suite}; expected {}", suite_names().join(", "))));
            }
            let report = run_suite(&suite, &cfg)?;
            let text = match cli.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(&text, &cli.out)?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!(
                    "suite {suite}: {} of {} checks passed",
                    report.passed(),
                    report.checks.len()
                )))
            }
        }
        Cmd::Decompose { input, sigma, seed } => {
            let text =
                std::fs::read_to_string(&input).map_err(|e| CliError::Infra(format!("{}: {e}", input.display())))?;
            let (report, exact) = cmd_decompose(&text, &DecomposeRequest { sigma, seed }, &cfg)?;
            emit(&report, &cli.out)?;
            if exact {
                Ok(())
            } else {
                Err(CliError::CheckFailed("input is not δ-symmetric within the window".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("delta-verify: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
