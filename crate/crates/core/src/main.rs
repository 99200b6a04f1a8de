use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use contour_pdo::cli::{run_file, schema, Overrides};

#[derive(Parser)]
#[command(
    name = "contour-pdo",
    version,
    about = "Holomorphic extension of pseudodifferential operators by contour deformation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON run configuration.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the configuration schema with defaults.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Schema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&schema()).expect("schema serializes")
            );
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            threads,
            seed,
            out,
        } => {
            if let Some(t) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("error: cannot configure {t} threads: {e}");
                    return ExitCode::from(1);
                }
            }
            match run_file(&config, &Overrides { seed, out }) {
                Ok(summary) => {
                    for r in summary.rows.iter().filter(|r| r.error.is_some()) {
                        eprintln!("point {:?}: {}", r.x.as_slice(), r.error.as_deref().unwrap_or_default());
                    }
                    for c in summary.checks.iter().filter(|c| !c.passed) {
                        eprintln!("check {} failed: margin {:e} at {}", c.name, c.worst_margin, c.location);
                    }
                    println!("results: {}", summary.csv.display());
                    println!("diagnostics: {}", summary.diagnostics.display());
                    ExitCode::from(summary.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
