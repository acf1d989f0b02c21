use clap::{Parser, Subcommand};
use log::info;
use music_core::analytic::SeriesTruncation;
use music_core::imaging::Grid;
use music_core::runner::{
    case_config, parse_angle, parse_config, run_experiment, sweep_aperture, sweep_csv, write_artifacts, Example,
    ExperimentResult,
};
use music_core::{MusicError, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Limited-aperture MUSIC imaging experiments.
#[derive(Parser, Debug)]
#[command(name = "music", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the series prediction next to the direct map.
        #[arg(long)]
        analytic_check: bool,
        /// Print the configuration with all defaults filled in and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Run one of the built-in cases 1-8.
    Case {
        #[arg(long)]
        id: u8,
        /// EPS1, EPS2, MU1 or MU2
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Defaults to case<ID>_<EXAMPLE>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare predicted and measured noise-space norms over aperture widths.
    SweepAperture {
        #[arg(long)]
        example: String,
        /// Comma-separated widths such as pi/3,pi/2,2pi/3,pi
        #[arg(long, value_delimiter = ',')]
        widths: Vec<String>,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| MusicError::Io { path: path.display().to_string(), source: e })
}

fn report(result: &ExperimentResult, written: &[PathBuf]) {
    let m = &result.metadata;
    println!("signal_dim = {} (expected rank {})", m.signal_dim, m.expected_rank);
    if let Some(snr) = m.achieved_snr_db {
        println!("achieved snr = {snr:.3} dB");
    }
    for (rank, p) in result.peaks.iter().enumerate() {
        println!("peak {}: ({:.3}, {:.3}) value {:.6e}", rank + 1, p.position.x, p.position.y, p.value);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, analytic_check, dump_config } => {
            let mut config = parse_config(&read(&config)?)?;
            config.analytic_check |= analytic_check;
            if dump_config {
                println!("{}", config.to_json()?);
                return Ok(());
            }
            info!("running experiment, config hash {}", config.hash()?);
            let result = run_experiment(&config)?;
            let written = write_artifacts(&result, &out)?;
            report(&result, &written);
        }
        Command::Case { id, example, seed, out } => {
            let example: Example = example.parse()?;
            let config = case_config(id, example, seed)?;
            info!("case {id} {example}, seed {seed}");
            let result = run_experiment(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("case{id}_{example}")));
            let written = write_artifacts(&result, &out)?;
            report(&result, &written);
        }
        Command::SweepAperture { example, widths, step, out } => {
            let example: Example = example.parse()?;
            if widths.is_empty() {
                return Err(MusicError::Config("--widths needs at least one value".into()));
            }
            let widths = widths.iter().map(|w| parse_angle(w)).collect::<Result<Vec<_>>>()?;
            let grid = Grid { step, ..Grid::default() };
            let rows = sweep_aperture(example, &widths, &grid, &SeriesTruncation::default())?;
            let table = sweep_csv(&rows);
            match out {
                Some(path) => {
                    std::fs::write(&path, table).map_err(|e| MusicError::Io { path: path.display().to_string(), source: e })?;
                    println!("wrote {}", path.display());
                }
                None => print!("{table}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
