use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use geophase_cli::config::parse_list;
use geophase_cli::{
    run, CliError, CliResult, Experiment, ExperimentConfig, JitterSpec, TripodInitial,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    SpinDemo,
    TripodCycle,
    TripodDouble,
    GateHalf,
    GateFull,
    XiScan,
    Robustness,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::SpinDemo => Experiment::SpinDemo,
            ExperimentArg::TripodCycle => Experiment::TripodCycle,
            ExperimentArg::TripodDouble => Experiment::TripodDouble,
            ExperimentArg::GateHalf => Experiment::GateHalf,
            ExperimentArg::GateFull => Experiment::GateFull,
            ExperimentArg::XiScan => Experiment::XiScan,
            ExperimentArg::Robustness => Experiment::Robustness,
        }
    }
}

/// Simulate geometric phases in spin, tripod and two-particle systems.
#[derive(Debug, Parser)]
#[command(name = "geophase", version)]
struct Args {
    /// Experiment to run.
    experiment: ExperimentArg,
    /// Key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dipole-dipole shift, or a comma-separated list for xi-scan.
    #[arg(long)]
    xi: Option<String>,
    /// Peak pulse amplitude α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Gaussian pulse width T.
    #[arg(long)]
    pulse_width: Option<f64>,
    /// Comma-separated pulse centers.
    #[arg(long)]
    centers: Option<String>,
    /// Center of the first pulse (double-loop experiments).
    #[arg(long)]
    first_center: Option<f64>,
    /// Pulse spacing (double-loop experiments).
    #[arg(long)]
    spacing: Option<f64>,
    /// Time step.
    #[arg(long)]
    step: Option<f64>,
    /// Write every n-th trajectory sample to the CSV.
    #[arg(long)]
    stride: Option<usize>,
    /// Random seed for robustness jitter.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Jitter: one relative width for all, or amplitude=..,timing=..,width=..,xi=..
    #[arg(long)]
    jitter: Option<String>,
    /// Spin quantum number for spin-demo.
    #[arg(long)]
    j: Option<f64>,
    /// Field magnitude for spin-demo.
    #[arg(long)]
    omega: Option<f64>,
    /// Duration of each field rotation in spin-demo.
    #[arg(long)]
    segment_duration: Option<f64>,
    /// Tripod initial state: 2, 3, plus or minus.
    #[arg(long)]
    initial: Option<String>,
    /// Rerun at half the step and report the change.
    #[arg(long)]
    convergence_check: bool,
    /// Output directory for CSV, report and summary files.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Args {
    fn overrides(&self) -> CliResult<ExperimentConfig> {
        Ok(ExperimentConfig {
            experiment: Some(self.experiment.into()),
            alpha: self.alpha,
            pulse_width: self.pulse_width,
            centers: self
                .centers
                .as_deref()
                .map(|c| parse_list("centers", c))
                .transpose()?,
            first_center: self.first_center,
            spacing: self.spacing,
            xi: self
                .xi
                .as_deref()
                .map(|x| parse_list("xi", x))
                .transpose()?,
            step: self.step,
            stride: self.stride,
            seed: self.seed,
            runs: self.runs,
            jitter: self
                .jitter
                .as_deref()
                .map(str::parse::<JitterSpec>)
                .transpose()?,
            out: self.out.clone(),
            spin_j: self.j,
            omega: self.omega,
            segment_duration: self.segment_duration,
            initial: self
                .initial
                .as_deref()
                .map(str::parse::<TripodInitial>)
                .transpose()?,
            convergence_check: self.convergence_check.then_some(true),
        })
    }
}

fn execute(args: &Args) -> CliResult<()> {
    let base = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.overlay(args.overrides()?);
    if let Some(e) = base_experiment_mismatch(&cfg, args) {
        return Err(e);
    }
    let output = run(&cfg)?;
    print!("{}", output.report.render_text());
    println!();
    print!("{}", output.report.render_summary());
    if let Some(dir) = &cfg.out {
        for path in output.write_to(dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

/// A config file naming a different experiment than the command line is
/// almost certainly a mistake.
fn base_experiment_mismatch(cfg: &ExperimentConfig, args: &Args) -> Option<CliError> {
    let path = args.config.as_ref()?;
    let from_file = ExperimentConfig::from_file(path).ok()?.experiment?;
    let chosen = cfg.experiment?;
    (from_file != chosen).then(|| {
        CliError::Config(format!(
            "config file is for {from_file} but {chosen} was requested"
        ))
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
