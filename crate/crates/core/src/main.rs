use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use analytic_edmd::harness::{emit_outputs, run, Experiment, ExperimentConfig, Format, Overrides};
use analytic_edmd::Result;

#[derive(Parser)]
#[command(name = "edmd", version, about = "EDMD spectra of analytic circle maps and torus maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare assembled Bernoulli-map matrices with their closed form
    BernoulliCheck(Common),
    /// EDMD spectrum of a Blaschke map against the exact eigenvalues
    Spectrum(Common),
    /// Eigenvalue errors over a sweep of dictionary sizes
    Converge(Common),
    /// Spectrum from a single trajectory, at M and M/2 samples
    Timeseries(Common),
    /// Two-dimensional EDMD of the deformed cat map
    Catmap(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; built-in defaults are used if omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nbar: Option<usize>,
    /// Sample count M (nodes per side for lattices)
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format; repeat for several
    #[arg(long = "format", value_enum)]
    formats: Vec<Format>,
}

fn execute(experiment: Experiment, args: Common) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default_for(experiment),
    };
    config.apply(&Overrides {
        nbar: args.nbar,
        nodes: args.nodes,
        seed: args.seed,
        out_dir: args.out_dir,
        formats: (!args.formats.is_empty()).then_some(args.formats),
    });
    config.validate()?;
    let report = run(experiment, &config)?;
    println!("{}: {}", experiment.name(), report.summary());
    for path in emit_outputs(&report, &config.output.formats, &config.output.dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::BernoulliCheck(a) => (Experiment::BernoulliCheck, a),
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Converge(a) => (Experiment::Converge, a),
        Command::Timeseries(a) => (Experiment::Timeseries, a),
        Command::Catmap(a) => (Experiment::Catmap, a),
    };
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
