use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use gptd_core::construction::build;
use gptd_core::distinguish::{is_jpd, jpd_family, symmetric_error};
use gptd_core::rational::{approx, format_rational};
use gptd_core::verifier::{
    enumerate_systems, enumerate_systems_unchecked, pe_profile, verify_batch, verify_random, verify_realization,
    BatchSummary,
};
use gptd_core::{IndependenceSystem, StateSpace};

#[derive(Parser)]
#[command(name = "gptd")]
#[command(about = "Exact perfect-distinguishability structures of polytope state spaces")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Build the state space realizing an independence system
    Build {
        #[arg(long)]
        system: PathBuf,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide joint perfect distinguishability of generators (exit 0 = yes, 1 = no)
    CheckJpd {
        #[arg(long)]
        space: PathBuf,
        /// 1-based generator positions, e.g. 1,2,3
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        /// Print the witnessing measurement as a JSON matrix
        #[arg(long)]
        witness: bool,
    },
    /// Minimum symmetric error probability of generators
    Pe {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        /// Also print the optimal measurement
        #[arg(long)]
        witness: bool,
    },
    /// Independence system of jointly distinguishable subsets of the given generators
    Family {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        states: Vec<usize>,
    },
    /// Verify that the construction realizes a system exactly
    Verify {
        #[arg(long)]
        system: PathBuf,
        /// Write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify every independence system on [n]
    VerifyAll {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        parallel: bool,
        /// Allow n above the enumeration guardrail
        #[arg(long)]
        force: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify seeded random independence systems on [n]
    VerifyRandom {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exact error profile F(H) over all subsets of the given generators
    PeProfile {
        #[arg(long)]
        space: PathBuf,
        /// 1-based generator positions (default: the first n generators)
        #[arg(long, value_delimiter = ',')]
        states: Option<Vec<usize>>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// 1-based CLI positions to 0-based generator positions.
fn positions(one_based: &[usize]) -> Result<Vec<usize>> {
    one_based
        .iter()
        .map(|&p| match p {
            0 => bail!("generator positions are 1-based"),
            p => Ok(p - 1),
        })
        .collect()
}

fn print_batch(summary: &BatchSummary, report: Option<&Path>) -> Result<ExitCode> {
    for r in &summary.failures {
        println!("{}", r.summary_line());
    }
    println!(
        "n={} systems={} passed={} lp_calls={} {:.1}ms",
        summary.n, summary.systems, summary.passed, summary.lp_calls, summary.elapsed_ms
    );
    if let Some(path) = report {
        write_json(path, summary)?;
    }
    Ok(if summary.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Commands::Build { system, out } => {
            let system: IndependenceSystem = read_json(&system)?;
            let built = build(&system)?;
            match out {
                Some(path) => write_json(&path, &built.to_json())?,
                None => println!("{}", serde_json::to_string_pretty(&built.to_json())?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Commands::CheckJpd { space, subset, witness } => {
            let space: StateSpace = read_json(&space)?;
            let verdict = is_jpd(&space, &positions(&subset)?)?;
            match &verdict {
                Some(m) => {
                    println!("jpd");
                    if witness {
                        println!("{}", serde_json::to_string(m)?);
                    }
                }
                None => println!("not jpd"),
            }
            Ok(if verdict.is_some() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Commands::Pe { space, subset, witness } => {
            let space: StateSpace = read_json(&space)?;
            let report = symmetric_error(&space, &positions(&subset)?)?;
            println!(
                "P_e* = {} (~ {:.6})",
                format_rational(&report.value),
                approx(&report.value)
            );
            let avg = report.average();
            println!("average = {} (~ {:.6})", format_rational(&avg), approx(&avg));
            if witness {
                println!("{}", serde_json::to_string(&report.optimal_measurement)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Commands::Family { space, states } => {
            let space: StateSpace = read_json(&space)?;
            let family = jpd_family(&space, &positions(&states)?)?;
            println!("{}", serde_json::to_string(&family)?);
            Ok(ExitCode::SUCCESS)
        }
        Commands::Verify { system, report } => {
            let system: IndependenceSystem = read_json(&system)?;
            let r = verify_realization(&system)?;
            println!("{}", r.summary_line());
            if let Some(path) = report {
                write_json(&path, &r)?;
            }
            Ok(if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Commands::VerifyAll {
            n,
            parallel,
            force,
            report,
        } => {
            let systems = if force {
                enumerate_systems_unchecked(n)?
            } else {
                enumerate_systems(n)?
            };
            let summary = verify_batch(n, None, &systems, parallel)?;
            print_batch(&summary, report.as_deref())
        }
        Commands::VerifyRandom {
            n,
            count,
            seed,
            parallel,
            report,
        } => {
            let summary = verify_random(n, count, seed, parallel)?;
            print_batch(&summary, report.as_deref())
        }
        Commands::PeProfile { space, states } => {
            let space: StateSpace = read_json(&space)?;
            let states = match states {
                Some(s) => positions(&s)?,
                None => (0..space.dim().min(space.len())).collect(),
            };
            let profile = pe_profile(&space, &states)?;
            let rows: Vec<_> = profile
                .entries
                .iter()
                .map(|e| json!({"subset": e.subset, "value": format_rational(&e.value), "approx": approx(&e.value)}))
                .collect();
            let out = json!({
                "states": profile.states.iter().map(|p| p + 1).collect::<Vec<_>>(),
                "entries": rows,
                "pairs": profile.pairs,
                "all_pass": profile.all_pass(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(if profile.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
