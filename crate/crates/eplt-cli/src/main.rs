//! Command-line harness: experiment configs in, verification reports and
//! CSV/JSON tables out. Exit code 0 iff every certification in the run
//! passed its tolerance; 1 on a failed certification; 2 on usage errors.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "eplt",
    about = "Construct and certify entanglement-preserving local thermalizations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal and quenched spectra with quench gaps over a (kT, ε) grid.
    Thermal(CommonArgs),
    /// Build an EPLT family, certify local thermality, sweep entanglement.
    EpltVerify(CommonArgs),
    /// Thermalization race: relaxation vs the finite-twirl protocol.
    Race(CommonArgs),
    /// Compile a mixture to its correlated-bath dilation and verify it.
    Dilation(CommonArgs),
    /// Draw finite random-unitary twirls and report their convergence.
    TwirlSample(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: String,
    /// Seed override for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Certification tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn run(command: &Command) -> eplt_core::Result<(output::Report, &CommonArgs)> {
    match command {
        Command::Thermal(args) => {
            let cfg: config::ThermalConfig = config::load(&args.config)?;
            Ok((commands::cmd_thermal(&cfg, args.tolerance)?, args))
        }
        Command::EpltVerify(args) => {
            let cfg: config::EpltVerifyConfig = config::load(&args.config)?;
            Ok((commands::cmd_eplt_verify(&cfg, args.seed, args.tolerance)?, args))
        }
        Command::Race(args) => {
            let cfg: config::RaceConfig = config::load(&args.config)?;
            Ok((commands::cmd_race(&cfg, args.seed, args.tolerance)?, args))
        }
        Command::Dilation(args) => {
            let cfg: config::DilationConfig = config::load(&args.config)?;
            Ok((commands::cmd_dilation(&cfg, args.seed, args.tolerance)?, args))
        }
        Command::TwirlSample(args) => {
            let cfg: config::TwirlSampleConfig = config::load(&args.config)?;
            Ok((commands::cmd_twirl_sample(&cfg, args.seed, args.tolerance)?, args))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (report, args) = match run(&cli.command) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let text = match args.format {
        Format::Csv => report.to_csv(&timestamp),
        Format::Json => report.to_json(&timestamp),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {path}: {e}");
                std::process::exit(2);
            }
        }
        None => print!("{text}"),
    }
    std::process::exit(if report.pass { 0 } else { 1 });
}
