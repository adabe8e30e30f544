use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradobs::scenario::{self, RunOptions, RunReport, ScenarioConfig, SweepSpec, Variant};
use gradobs::Error;

/// Regional gradient observability: strategic sensor analysis and observer simulation.
#[derive(Debug, Parser)]
#[command(name = "gradobs", version)]
struct Cli {
    /// Fail with exit code 2 when the sensors are not strategic.
    #[arg(long, global = true)]
    require_strategic: bool,
    /// Directory for report.json, trajectory.csv, decay.json and sweep.csv.
    #[arg(long, global = true, env = "GRADOBS_OUTDIR", default_value = ".")]
    outdir: PathBuf,
    /// Override the quadrature order of the config.
    #[arg(long, global = true)]
    quadrature_order: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Strategic-sensor verdict for a scenario.
    Analyze { config: PathBuf },
    /// Analysis, observer synthesis and plant/observer simulation.
    Simulate {
        config: PathBuf,
        /// Simulate even when the sensors are not strategic.
        #[arg(long)]
        force: bool,
    },
    /// Verdict (and optionally decay rate) along a sensor position range.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        sensor: usize,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Coordinate axis of the position parameter.
        #[arg(long, default_value_t = 0)]
        axis: usize,
        /// Extra positions drawn from the config seed.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long)]
        simulate: bool,
    },
    /// Print or save a preset scenario config.
    Canned {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "strategic")]
        variant: String,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

fn run(cli: Cli) -> Result<Option<RunReport>, Error> {
    let options = RunOptions { outdir: cli.outdir, require_strategic: cli.require_strategic, force: false, quadrature_order: cli.quadrature_order };
    match cli.command {
        Command::Analyze { config } => scenario::analyze(&load(&config)?, &options).map(Some),
        Command::Simulate { config, force } => scenario::simulate_cmd(&load(&config)?, &RunOptions { force, ..options }).map(Some),
        Command::Sweep { config, sensor, from, to, steps, axis, random, simulate } => {
            let spec = SweepSpec { sensor, axis, from, to, steps, random, simulate };
            scenario::sweep(&load(&config)?, &spec, &options).map(Some)
        }
        Command::Canned { name, out, variant } => {
            let config = scenario::canned(&name, variant.parse::<Variant>()?)?;
            let text = config.to_json() + "\n";
            match out {
                Some(path) => std::fs::write(&path, text)?,
                None => print!("{text}"),
            }
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(Some(report)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(scenario::exit_code(&e) as u8)
        }
    }
}
