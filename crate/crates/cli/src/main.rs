//! `pdlsim` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdlsim::experiment::{emit_report, run, with_threads, PlotSwitch};
use pdlsim::metrics::fmt_sig9;
use pdlsim::{CodedConstellation, Error, ExperimentKind, ExperimentSpec, RunReport};

#[derive(Parser)]
#[command(name = "pdlsim", version, about = "CO-OFDM twin-wave / PDL link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the experiment described by the config (single point by default).
    Run,
    /// Sweep launch power and report the optimum.
    SweepPower,
    /// Sweep the aligned PDL angle θ.
    SweepTheta,
    /// Monte Carlo over statistical PDL realizations.
    MonteCarlo,
    /// Write the 16-point coded constellation as CSV.
    DumpConstellation,
}

#[derive(Args)]
struct Options {
    /// JSON experiment spec; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Trials per point, overrides the config.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use the single-band desk preset instead of the full system
    /// (ignored when --config is given).
    #[arg(long, global = true)]
    desk_scale: bool,
    #[arg(long, global = true, value_enum, default_value_t = Toggle::On)]
    plots: Toggle,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Toggle {
    On,
    Off,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidInput(_) | Error::Json(_) => 2,
        Error::Numerical(_) => 3,
        Error::Io(_) | Error::Csv(_) => 4,
    }
}

fn load_spec(kind: Option<ExperimentKind>, opts: &Options) -> pdlsim::Result<ExperimentSpec> {
    let mut spec = match &opts.config {
        Some(path) => {
            let mut spec = ExperimentSpec::load(path)?;
            if let Some(k) = kind {
                spec.kind = k;
            }
            spec
        }
        None => ExperimentSpec::preset(kind.unwrap_or(ExperimentKind::Single), opts.desk_scale),
    };
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(n) = opts.trials {
        spec.n_trials = n;
    }
    spec.validate()?;
    Ok(spec)
}

fn summarize(report: &RunReport) {
    println!("{:?} / {} (config {})", report.kind, report.codec, report.config_hash);
    if let Some(b) = &report.baseline {
        println!("  baseline (no PDL): Q = {} dB", fmt_sig9(b.mean_q_db));
    }
    for p in &report.points {
        let penalty = p
            .penalty_db
            .map(|v| format!(", penalty {} dB", fmt_sig9(v)))
            .unwrap_or_default();
        println!(
            "  {} = {}: Q = {} ± {} dB over {} trials{}",
            p.parameter,
            fmt_sig9(p.value),
            fmt_sig9(p.mean_q_db),
            fmt_sig9(p.std_q_db),
            p.n_trials,
            penalty
        );
    }
    if let Some(p) = report.optimum_launch_power_dbm {
        println!("  optimum launch power: {} dBm", fmt_sig9(p));
    }
    if let Some(o) = &report.outage {
        println!(
            "  outage: {} ({} of {} trials below {} dB)",
            fmt_sig9(o.probability),
            o.count,
            o.total,
            fmt_sig9(report.config.q_threshold_db)
        );
    }
    if let Some(rms) = report.cumulated_pdl_rms_db {
        println!("  rms cumulated PDL: {} dB", fmt_sig9(rms));
    }
    if let Some(e) = &report.pdf_error {
        println!("  Q pdf skipped: {e}");
    }
}

fn simulate(kind: Option<ExperimentKind>, opts: &Options) -> pdlsim::Result<()> {
    let spec = load_spec(kind, opts)?;
    let threads = opts.threads.unwrap_or(0);
    let report = with_threads(threads, || run(&spec))??;
    summarize(&report);
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let plots = if opts.plots == Toggle::On {
        PlotSwitch::On
    } else {
        PlotSwitch::Off
    };
    for path in emit_report(&report, &out, plots)? {
        println!("  wrote {}", path.display());
    }
    Ok(())
}

fn dump_constellation(out: Option<&Path>) -> pdlsim::Result<()> {
    let c = CodedConstellation::new();
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join("constellation.csv");
            c.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            println!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            c.write_csv(&mut stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run => simulate(None, &cli.opts),
        Command::SweepPower => simulate(Some(ExperimentKind::PowerSweep), &cli.opts),
        Command::SweepTheta => simulate(Some(ExperimentKind::ThetaSweep), &cli.opts),
        Command::MonteCarlo => simulate(Some(ExperimentKind::MonteCarlo), &cli.opts),
        Command::DumpConstellation => dump_constellation(cli.opts.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdlsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
