use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mimodist::harness::{parse_config, run_experiment, write_output, ExperimentKind, ExperimentOutput};
use mimodist::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Sweep,
}

impl From<Experiment> for ExperimentKind {
    fn from(e: Experiment) -> Self {
        match e {
            Experiment::Fig1 => Self::Fig1,
            Experiment::Fig2 => Self::Fig2,
            Experiment::Fig3 => Self::Fig3,
            Experiment::Sweep => Self::Sweep,
        }
    }
}

/// Uplink spectral efficiency under correlated base-station hardware distortion.
#[derive(Debug, Parser)]
#[command(name = "mimodist", version)]
struct Cli {
    experiment: Experiment,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's `trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads for the Monte Carlo loops.
    #[arg(long, env = "MIMODIST_THREADS")]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<usize, Error> {
    let mut spec = parse_config(&cli.config)?;
    let requested = ExperimentKind::from(cli.experiment);
    if spec.experiment != requested {
        return Err(Error::InvalidParameter {
            key: "experiment".into(),
            value: spec.experiment.name().into(),
            expected: format!("`{}` to match the subcommand", requested.name()),
        });
    }
    if let Some(seed) = cli.seed {
        spec.base.seed = seed;
    }
    if let Some(trials) = cli.trials {
        spec.base.trials = trials;
    }
    spec.validate()?;
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidParameter {
                key: "threads".into(),
                value: "0".into(),
                expected: ">= 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    }
    let output = run_experiment(&spec)?;
    write_output(&cli.out, spec.experiment, &output)?;
    Ok(match &output {
        ExperimentOutput::Rows(rows) => rows.len(),
        ExperimentOutput::Curves(curves) => curves.iter().map(|c| c.points.len()).sum(),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(n) => {
            eprintln!("wrote {n} rows to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
