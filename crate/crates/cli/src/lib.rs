//! Command-line front end for `secfusion`: scenario files, subcommands and
//! CSV output.

pub mod config;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::warn;

use secfusion::model::check_observability;
use secfusion::simulation::{
    covariance_consistency_probe, gain_optimality_probe, run_monte_carlo, run_scenario, Simulator,
};
use secfusion::{Error, ScenarioConfig};

use output::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PROBE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "secfusion", version, about = "Secure fusion estimation under false-data-injection attacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one realization and write the trajectories.
    Run(Common),
    /// Monte Carlo mean squared error curves.
    Mc {
        #[command(flatten)]
        common: Common,
        /// Append the per-component fused error curves.
        #[arg(long)]
        components: bool,
    },
    /// Monte Carlo comparison against the augmented Kalman filter baseline.
    Compare(Common),
    /// Observability rank of every augmented subsystem.
    Check {
        #[command(flatten)]
        common: Common,
        /// Observability window; defaults to the augmented dimension.
        #[arg(long)]
        window: Option<usize>,
        /// Step whose matrices are used.
        #[arg(long, default_value_t = 1)]
        step: usize,
    },
    /// Perturbs the optimal gains and checks that no trace decreases.
    ProbeOptimality {
        #[command(flatten)]
        common: Common,
        /// Steps to probe (repeatable).
        #[arg(long = "step")]
        steps: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Compares predicted and empirical local error covariances.
    ProbeConsistency {
        #[command(flatten)]
        common: Common,
        /// Steps to check (repeatable).
        #[arg(long = "checkpoint")]
        checkpoints: Vec<usize>,
        /// Largest accepted relative Frobenius error.
        #[arg(long, default_value_t = 0.15)]
        tolerance: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in scenario name or path to a TOML/JSON file.
    #[arg(long, default_value = "ieee4bus")]
    pub scenario: String,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Attack-energy bound of one weak sensor, `id=value` (repeatable).
    #[arg(long = "eta", value_parser = parse_eta)]
    pub eta: Vec<(usize, f64)>,
    /// Pseudo-noise level of the baseline filter.
    #[arg(long = "q-theta")]
    pub q_theta: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Do not echo the effective configuration.
    #[arg(long, short)]
    pub quiet: bool,
}

fn parse_eta(s: &str) -> Result<(usize, f64), String> {
    let (id, v) = s.split_once('=').ok_or_else(|| format!("expected id=value, got {s:?}"))?;
    let id = id.trim().parse().map_err(|_| format!("bad sensor id in {s:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad value in {s:?}"))?;
    Ok((id, v))
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Probe(String),
    /// Some Monte Carlo runs failed; the partial table was still written.
    Partial(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Partial(_) => EXIT_NUMERICAL,
            CliError::Probe(_) => EXIT_PROBE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Probe(m) | CliError::Partial(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl Common {
    /// Loads the scenario and applies the command-line overrides.
    pub fn scenario(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = config::load_scenario(&self.scenario)?;
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        for &(id, v) in &self.eta {
            cfg.set_eta(id, v)?;
        }
        if let Some(q) = self.q_theta {
            cfg.baseline.q_theta = q;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.validate()?;
        if !cfg.assignments_disjoint() {
            warn!("strong-defense sensors are shared between weak sensors; cross covariances ignore the shared noise");
        }
        if !self.quiet {
            eprint!("{}", config::describe(&cfg));
        }
        Ok(cfg)
    }

    fn emit(&self, table: &Table) -> Result<(), CliError> {
        let io_err = |e: &dyn std::fmt::Display| CliError::Io(format!("cannot write output: {e}"));
        match &self.out {
            Some(path) => {
                let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(f);
                table.write(&mut w).map_err(|e| io_err(&e))?;
                w.flush().map_err(|e| io_err(&e))
            }
            None => match table.write(io::stdout().lock()) {
                Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe) => Ok(()),
                r => r.map_err(|e| io_err(&e)),
            },
        }
    }
}

fn mc_table(common: &Common, compare: bool, components: bool) -> Result<(), CliError> {
    let cfg = common.scenario()?;
    let rep = run_monte_carlo(&cfg)?;
    let table = if compare { output::compare_table(&rep) } else { output::mse_table(&rep, components) };
    common.emit(&table)?;
    if rep.is_partial() {
        for f in &rep.failures {
            warn!("run {} (seed {}) failed: {}", f.run, f.seed, f.error);
        }
        return Err(CliError::Partial(format!("{} of {} runs failed", rep.failures.len(), rep.runs)));
    }
    Ok(())
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(common) => {
            let cfg = common.scenario()?;
            let rec = run_scenario(&cfg, cfg.seed)?;
            common.emit(&output::run_table(&rec))
        }
        Command::Mc { common, components } => mc_table(common, false, *components),
        Command::Compare(common) => mc_table(common, true, false),
        Command::Check { common, window, step } => {
            let cfg = common.scenario()?;
            let sim = Simulator::new(&cfg, cfg.seed)?;
            let mut reports = Vec::new();
            for (idx, &id) in sim.weak_ids().iter().enumerate() {
                let aug = sim.augmented(idx, *step)?;
                let h = window.unwrap_or(aug.n_aug());
                reports.push((id, check_observability(&aug, h)));
            }
            common.emit(&output::observability_table(&reports))?;
            let bad: Vec<String> = reports.iter().filter(|(_, r)| !r.full_rank).map(|(id, _)| id.to_string()).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(CliError::Probe(format!("augmented subsystem not observable for sensor(s) {}", bad.join(", "))))
            }
        }
        Command::ProbeOptimality { common, steps, trials } => {
            let cfg = common.scenario()?;
            let steps = if steps.is_empty() { vec![1, 10, 50] } else { steps.clone() };
            let reports = steps
                .iter()
                .filter(|&&s| s <= cfg.horizon)
                .map(|&s| gain_optimality_probe(&cfg, s, *trials, cfg.seed))
                .collect::<Result<Vec<_>, _>>()?;
            common.emit(&output::optimality_table(&reports))?;
            match reports.iter().find(|r| !r.passed()) {
                None => Ok(()),
                Some(r) => Err(CliError::Probe(format!("gain perturbation lowered the trace at step {}: margin {:e}", r.step, r.min_margin()))),
            }
        }
        Command::ProbeConsistency { common, checkpoints, tolerance } => {
            let cfg = common.scenario()?;
            let checkpoints = if checkpoints.is_empty() { vec![20.min(cfg.horizon)] } else { checkpoints.clone() };
            let rep = covariance_consistency_probe(&cfg, cfg.runs, &checkpoints)?;
            common.emit(&output::consistency_table(&rep))?;
            for v in &rep.violations {
                warn!("recursion not exact for this scenario: {v}");
            }
            if rep.passed(*tolerance) {
                Ok(())
            } else if !rep.violations.is_empty() {
                Err(CliError::Probe(format!("scenario violates consistency preconditions: {}", rep.violations.join("; "))))
            } else {
                Err(CliError::Probe(format!("relative error {:.4} exceeds {tolerance}", rep.max_frobenius_error())))
            }
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
