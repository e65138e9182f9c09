use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use zc_prach::coherence::{full_dictionary_coherence, CoherenceMethod};
use zc_prach::config::SystemConfig;
use zc_prach::design::Design;
use zc_prach::dictionary::Dictionary;
use zc_prach::experiment::{
    emit_both, failure_budget_ok, run_experiment, simulate_trial, to_csv, Cell, DesignSpec, ExperimentSpec, MetricRow,
    MethodName, SolverKind,
};
use zc_prach::Result;

/// Worker threads for Monte-Carlo trials; defaults to all cores.
const THREADS_ENV: &str = "ZC_PRACH_THREADS";

#[derive(Parser)]
#[command(name = "zc-prach", version, about = "Zadoff-Chu random-access code design and PRACH detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code matrix and print its design plan.
    Design {
        #[command(flatten)]
        design: DesignArgs,
        /// Write the code matrix and plan as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mutual coherence of the dictionary of a design.
    Coherence {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long = "by", value_enum, default_value_t = CoherenceArg::Structured)]
        by: CoherenceArg,
    },
    /// Run one trial of the first cell of an experiment spec and print it in detail.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run every cell of an experiment spec and write CSV and JSON results.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Output stem; overrides the spec. Without either the CSV goes to stdout.
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cra,
    CraMulti,
    CcgSingle,
    CcgMulti,
}

impl From<MethodArg> for MethodName {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cra => MethodName::Cra,
            MethodArg::CraMulti => MethodName::CraMulti,
            MethodArg::CcgSingle => MethodName::CcgSingle,
            MethodArg::CcgMulti => MethodName::CcgMulti,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CoherenceArg {
    BruteForce,
    Structured,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lasso,
    Omp,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    /// Number of codes G.
    #[arg(long)]
    codes: Option<usize>,
    /// Shift step, or its lower bound for the coherence-based methods.
    #[arg(long)]
    ncs: Option<usize>,
    /// System configuration JSON; the LTE preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "lte")]
    preset: String,
}

impl DesignArgs {
    fn build(&self) -> Result<(SystemConfig, Design)> {
        let cfg = match &self.config {
            Some(p) => SystemConfig::from_json_file(p)?,
            None => SystemConfig::preset(&self.preset)
                .ok_or_else(|| zc_prach::Error::InvalidConfig(format!("unknown preset '{}'", self.preset)))?,
        };
        let spec = DesignSpec { method: self.method.into(), u: self.root, n_cs: self.ncs, g: self.codes, label: None };
        let design = spec.build(&cfg)?;
        Ok((cfg, design))
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tau_sup: Option<f64>,
    #[arg(long)]
    tau_tap: Option<f64>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    trials: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, spec: &mut ExperimentSpec) {
        let s = &mut spec.solver;
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if self.lambda.is_some() {
            s.lambda = self.lambda;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.max_iter {
            s.max_iter = v;
        }
        if let Some(v) = self.tol {
            s.tol = v;
        }
        if let Some(v) = self.tau_sup {
            s.tau_sup = v;
        }
        if let Some(v) = self.tau_tap {
            s.tau_tap = v;
        }
        if let Some(v) = self.solver {
            s.solver = match v {
                SolverArg::Lasso => SolverKind::Lasso,
                SolverArg::Omp => SolverKind::Omp,
            };
        }
    }
}

fn load_spec(path: &PathBuf, solver: &SolverArgs) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_json_file(path)?;
    solver.apply(&mut spec);
    spec.validate()?;
    Ok(spec)
}

fn check_failures(rows: &[MetricRow]) -> ExitCode {
    let (failed, ok) = failure_budget_ok(rows);
    if ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} failed trials exceed 1% of all trials");
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Design { design, out } => {
            let (_, d) = design.build()?;
            if let Some(path) = out {
                fs::write(path, serde_json::to_string_pretty(&d)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&d.plan)?);
        }
        Command::Coherence { design, by } => {
            let (cfg, d) = design.build()?;
            let dict = Dictionary::new(&d.code_matrix, &cfg)?;
            let method = match by {
                CoherenceArg::BruteForce => CoherenceMethod::BruteForce,
                CoherenceArg::Structured => CoherenceMethod::Structured,
                CoherenceArg::ClosedForm => CoherenceMethod::ClosedForm,
            };
            let report = full_dictionary_coherence(&dict, method)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Simulate { spec, trial, solver } => {
            let spec = load_spec(&spec, &solver)?;
            let cfg = spec.system_config()?;
            let ds = &spec.designs[0];
            let design = ds.build(&cfg)?;
            let dict = Dictionary::new(&design.code_matrix, &cfg)?;
            let cell = Cell {
                dictionary: &dict,
                design: &design,
                k: spec.k[0],
                snr_db: spec.snr_db[0],
                seed: spec.seed,
                solver: &spec.solver,
            };
            let detail = simulate_trial(&cell, trial)?;
            println!("{}", serde_json::to_string_pretty(&json!({ "design": ds.label_for(&design), "trial": detail }))?);
        }
        Command::Sweep { spec, out, solver } => {
            let spec = load_spec(&spec, &solver)?;
            let rows = run_experiment(&spec)?;
            match out.or(spec.output.clone()) {
                Some(stem) => emit_both(&rows, &stem)?,
                None => print!("{}", to_csv(&rows)?),
            }
            return Ok(check_failures(&rows));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("could not size the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
