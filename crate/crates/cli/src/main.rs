use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbsim::{parse_config, run, validate, EXIT_ABORTED, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "fbsim", version, about = "Flying base station fleet simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode per seed and write metrics.
    Run {
        config: PathBuf,
        /// Comma-separated seeds; replaces the config's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        snapshots: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=value`, with dotted keys such as `fleet.safety_radius`.
        #[arg(long = "override")]
        overrides: Vec<String>,
    },
    /// Parse the config and build the first scenario without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "override")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config, overrides } => {
            match parse_config(&config, &overrides).and_then(|c| validate(&c)) {
                Ok(msg) => {
                    println!("{msg}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_CONFIG as u8)
                }
            }
        }
        Command::Run {
            config,
            seeds,
            snapshots,
            out,
            mut overrides,
        } => {
            if let Some(s) = seeds {
                let list: Vec<String> = s.iter().map(u64::to_string).collect();
                overrides.push(format!("seeds=[{}]", list.join(",")));
            }
            if let Some(n) = snapshots {
                overrides.push(format!("snapshots={n}"));
            }
            if let Some(o) = out {
                overrides.push(format!("out={:?}", o.display().to_string()));
            }
            let cfg = match parse_config(&config, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            };
            match run(&cfg) {
                Ok(outcome) => {
                    for r in &outcome.reports {
                        let c = &r.summary["fbs_count"];
                        println!(
                            "seed {}: mean FBS count {:.2} (std {:.2})",
                            r.seed, c.mean, c.std
                        );
                    }
                    if let Some(a) = &outcome.aborted {
                        eprintln!("aborted: {a}");
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_ABORTED as u8)
                }
            }
        }
    }
}
