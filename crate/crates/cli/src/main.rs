//! `resil`: exact and sampled resilience of Rademacher sums from the shell.
//!
//! Sign strings use `+`/`-`, character `i` giving `ξ_i`. Positions printed in
//! witnesses and certificates are 1-based.

mod error;
mod input;
mod record;
mod request;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::Ratio;

use resilience_core::families::{Family, FamilySpec};
use resilience_core::scalar::serde_ratio;
use resilience_core::stats::{Mode, SweepConfig};

use error::CliError;
use input::{parse_grid, parse_int_list, parse_weights};
use record::{replay, run, RunRecord};
use request::{Request, Signs, Table, WeightInput};

#[derive(Parser, Debug)]
#[command(
    name = "resil",
    version,
    about = "Resilience of Rademacher sums",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized commands (required by estimate, sweep, sampled certify and Monte Carlo bestats).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread cap. Results do not depend on it.
    #[arg(long, global = true, env = "RESIL_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// The full run record.
    Json,
    /// A plot-ready table; columns are listed in each command's help.
    Csv,
}

fn parse_ratio(s: &str) -> Result<Ratio<u64>, String> {
    serde_ratio::parse(s)
}

/// A weight sequence from a file or a named family.
#[derive(Args, Debug)]
struct WeightArgs {
    /// Weights file: whitespace-separated integers or p/q rationals, or a JSON document.
    #[arg(long, conflicts_with = "family")]
    weights: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Length for --family.
    #[arg(long)]
    n: Option<usize>,
    /// The family's own k parameter (pk_lower).
    #[arg(long)]
    family_k: Option<u32>,
    #[arg(long, value_parser = parse_ratio)]
    epsilon: Option<Ratio<u64>>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<WeightInput, CliError> {
        if let Some(path) = &self.weights {
            let text = read(path)?;
            let parsed = parse_weights(&text)?;
            return Ok(WeightInput::Inline {
                sequence: parsed.sequence,
                scale: parsed.scale,
            });
        }
        match self.family {
            Some(family) => Ok(WeightInput::Family {
                spec: spec(family, self.n, self.family_k, self.epsilon)?,
            }),
            None => Err(CliError::Usage(
                "give --weights FILE or --family NAME --n N".into(),
            )),
        }
    }
}

fn spec(
    family: Family,
    n: Option<usize>,
    k: Option<u32>,
    epsilon: Option<Ratio<u64>>,
) -> Result<FamilySpec, CliError> {
    let n = n.ok_or_else(|| CliError::Usage(format!("--family {family} needs --n")))?;
    Ok(FamilySpec {
        family,
        n,
        k,
        epsilon,
    })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// R_x(ξ) with a minimum witness.
    #[command(after_help = "CSV columns: x,current_sum,value,witness,algorithm")]
    Resilience {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, allow_hyphen_values = true)]
        signs: String,
        #[arg(short, long, allow_hyphen_values = true)]
        x: BigInt,
        /// Use the depth-limited search and stop beyond this many flips.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Exact distribution of R_x over all sign vectors.
    #[command(after_help = "CSV columns: distance,count")]
    Profile {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(short, long, allow_hyphen_values = true)]
        x: BigInt,
    },
    /// Exact q_k(a) = max_x Pr[R_x <= k].
    #[command(after_help = "CSV columns: k,n,value,ball_size,argmax,ties")]
    Qk {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(short, long)]
        k: usize,
        /// Comma-separated targets; default is every atom of X.
        #[arg(long, allow_hyphen_values = true)]
        candidates: Option<String>,
    },
    /// An additive basis of order h for [1, n].
    #[command(after_help = "CSV columns: order,range,size,sum_of_squares,elements,verified")]
    Basis {
        #[arg(long)]
        order: u32,
        #[arg(long)]
        range: u64,
        /// Exhaustive minimum sum of squares (small ranges only).
        #[arg(long)]
        optimal: bool,
    },
    /// Generate a weight family.
    #[command(after_help = "CSV columns: index,weight")]
    Construct {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        k: Option<u32>,
        #[arg(long, value_parser = parse_ratio)]
        epsilon: Option<Ratio<u64>>,
    },
    /// Constructive flip certificate for layered or janson_spencer.
    #[command(after_help = "CSV columns: family,sum_before,success,size,budget,flips")]
    Certify {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_ratio)]
        epsilon: Option<Ratio<u64>>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "index")]
        signs: Option<String>,
        /// Sample index of a seeded sign vector (needs --seed).
        #[arg(long)]
        index: Option<u64>,
    },
    /// Monte Carlo Pr[R_x <= k] with a 95% Wilson interval.
    #[command(after_help = "CSV columns: x,k,estimate,hits,samples,ci_low,ci_high,seed")]
    Estimate {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(short, long, allow_hyphen_values = true, default_value = "0")]
        x: BigInt,
        #[arg(short, long)]
        k: usize,
        #[arg(long)]
        samples: u64,
    },
    /// Estimates across a grid of lengths and a log-log slope fit.
    #[command(
        after_help = "CSV columns: n,estimate,hits,ci_low,ci_high,samples,seed,wall_time_ms,error"
    )]
    Sweep {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        family_k: Option<u32>,
        #[arg(long, value_parser = parse_ratio)]
        epsilon: Option<Ratio<u64>>,
        #[arg(short, long)]
        k: usize,
        #[arg(short, long, allow_hyphen_values = true, default_value = "0")]
        x: BigInt,
        /// start:end:xF, start:end:+S or a comma list.
        #[arg(long)]
        n_grid: String,
        #[arg(long)]
        samples: u64,
    },
    /// σ, ρ, Kolmogorov distance to the normal, and the top atom.
    #[command(after_help = "CSV columns: sigma,rho,kolmogorov_distance,ratio,max_atom")]
    Bestats {
        #[command(flatten)]
        weights: WeightArgs,
        /// Sample instead of enumerating (needs --seed).
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Re-execute a JSON run record and check its outputs are reproduced.
    Replay { record: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is randomized and requires --seed")))
}

fn request(cli: &Cli) -> Result<Request, CliError> {
    Ok(match &cli.command {
        Command::Resilience {
            weights,
            signs,
            x,
            kmax,
        } => Request::Resilience {
            weights: weights.resolve()?,
            signs: signs.clone(),
            x: x.clone(),
            kmax: *kmax,
        },
        Command::Profile { weights, x } => Request::Profile {
            weights: weights.resolve()?,
            x: x.clone(),
        },
        Command::Qk {
            weights,
            k,
            candidates,
        } => Request::Qk {
            weights: weights.resolve()?,
            k: *k,
            candidates: candidates
                .as_deref()
                .map(parse_int_list)
                .transpose()?
                .unwrap_or_default(),
        },
        Command::Basis {
            order,
            range,
            optimal,
        } => Request::Basis {
            order: *order,
            range: *range,
            optimal: *optimal,
        },
        Command::Construct {
            family,
            n,
            k,
            epsilon,
        } => Request::Construct {
            spec: spec(*family, Some(*n), *k, *epsilon)?,
        },
        Command::Certify {
            family,
            n,
            epsilon,
            signs,
            index,
        } => Request::Certify {
            spec: spec(*family, Some(*n), None, *epsilon)?,
            signs: match signs {
                Some(s) => Signs::Explicit { signs: s.clone() },
                None => Signs::Sampled {
                    seed: need_seed(cli.seed, "certify without --signs")?,
                    index: index.unwrap_or(0),
                },
            },
        },
        Command::Estimate {
            weights,
            x,
            k,
            samples,
        } => Request::Estimate {
            weights: weights.resolve()?,
            x: x.clone(),
            k: *k,
            samples: *samples,
            seed: need_seed(cli.seed, "estimate")?,
        },
        Command::Sweep {
            family,
            family_k,
            epsilon,
            k,
            x,
            n_grid,
            samples,
        } => Request::Sweep {
            config: SweepConfig {
                template: FamilySpec {
                    family: *family,
                    n: 0,
                    k: *family_k,
                    epsilon: *epsilon,
                },
                k: *k,
                x: x.clone(),
                n_grid: parse_grid(n_grid)?,
                samples: *samples,
                seed: need_seed(cli.seed, "sweep")?,
            },
        },
        Command::Bestats { weights, samples } => Request::Bestats {
            weights: weights.resolve()?,
            mode: match samples {
                Some(s) => Mode::MonteCarlo {
                    samples: *s,
                    seed: need_seed(cli.seed, "Monte Carlo bestats")?,
                },
                None => Mode::Exhaustive,
            },
        },
        Command::Replay { .. } => unreachable!("handled before dispatch"),
    })
}

fn render(format: Format, record: &RunRecord, table: &Table) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_vec_pretty(record).expect("records serialize");
            text.push(b'\n');
            Ok(text)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io {
                path: "csv".into(),
                source: e.into(),
            };
            w.write_record(&table.header).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io {
                path: "csv".into(),
                source: e.into_error(),
            })
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let (path, result) = match out {
        Some(p) => (p.display().to_string(), std::fs::write(p, bytes)),
        None => ("stdout".to_string(), std::io::stdout().write_all(bytes)),
    };
    result.map_err(|source| CliError::Io { path, source })
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let (record, table) = match &cli.command {
        Command::Replay { record } => {
            let text = read(record)?;
            let old: RunRecord = serde_json::from_str(&text).map_err(|e| CliError::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            let (fresh, output) = replay(&old)?;
            (fresh, output.table)
        }
        _ => {
            let (record, output) = run(request(&cli)?)?;
            (record, output.table)
        }
    };
    emit(cli.out.as_deref(), &render(cli.format, &record, &table)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("resil: {e}");
            e.exit_code()
        }
    }
}
