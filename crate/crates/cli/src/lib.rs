//! `catpool` command-line surface: every command reads an optional TOML
//! config, lets flags override it, and writes plot-ready tables.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use catpool::hypothesis::CriticalValueTable;
use catpool::ingest::{Schema, Window};
use catpool::optimize::Algorithm;
use clap::{Args, Parser, Subcommand};

use crate::commands::compare::CompareSettings;
use crate::commands::empirical::EmpiricalSettings;
use crate::commands::ingest::IngestSettings;
use crate::commands::optimize::OptimizeSettings;
use crate::commands::rv::RvArgs;
use crate::config::{
    default_p_sweep, default_participants, parse_algorithm, second_study_participants, ConfigFile, Experiment,
    ExperimentDefaults, ExperimentOverrides, LambdaPolicy, DEFAULT_XI_LEVELS,
};
use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "CATPOOL_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "catpool", version, about = "Pareto-optimal catastrophe risk pools: simulation, optimisation and tail estimation")]
pub struct Cli {
    /// TOML experiment config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output tables.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasible boxes and minimal asymptotic ratios per ξ.
    Asymptotic(ExperimentArgs),
    /// Simulated DR curves over the ξ × p grid.
    #[command(name = "simulate-dr")]
    SimulateDr(ExperimentArgs),
    /// Optimise layer multipliers and measure the distance to the feasible box.
    Optimize {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Race optimizers on a suite of pool problems from shared starts.
    Compare {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        /// Number of pool problems (sample seeds 1..=N).
        #[arg(long)]
        problems: Option<usize>,
        /// Algorithms to compare.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
    },
    /// Aggregate a claim export into monthly per-state series.
    Ingest(IngestArgs),
    /// Tail estimation, tests and DR curves on monthly series.
    Empirical(EmpiricalArgs),
    /// Regenerate the regular-variation critical-value table.
    #[command(name = "rv-critical")]
    RvCritical(RvCriticalArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ComputeArgs {
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub compute: ComputeArgs,
    /// Sample seeds (a single `--seed` overrides).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Observations per participant.
    #[arg(short, long)]
    pub m: Option<usize>,
    /// Quantile levels.
    #[arg(long = "p", value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Attachment multipliers ξ, used as given.
    #[arg(long = "xi", value_delimiter = ',')]
    pub xi_grid: Option<Vec<f64>>,
    /// Levels c mapped to ξ = c^(1/α₁).
    #[arg(long, value_delimiter = ',')]
    pub xi_levels: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub lambda_policy: Option<LambdaPolicy>,
    /// Layer multipliers in config order.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
}

impl ExperimentArgs {
    fn overrides(&self) -> ExperimentOverrides {
        ExperimentOverrides {
            seeds: self.compute.seed.map(|s| vec![s]).or_else(|| self.seeds.clone()),
            m: self.m,
            p_grid: self.p_grid.clone(),
            xi_grid: self.xi_grid.clone(),
            xi_levels: self.xi_levels.clone(),
            lambda_policy: self.lambda_policy,
            lambdas: self.lambdas.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimizerArgs {
    /// GSA, DE, ABC, HS or PSO.
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub stall_limit: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IngestArgs {
    /// Raw claim export (CSV).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Series file (default: series.csv in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub states: Option<Vec<String>>,
    /// First month, YYYY-MM.
    #[arg(long)]
    pub start: Option<String>,
    /// Last month, YYYY-MM.
    #[arg(long)]
    pub end: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub date_column: Option<String>,
    #[arg(long)]
    pub state_column: Option<String>,
    #[arg(long)]
    pub building_column: Option<String>,
    #[arg(long)]
    pub contents_column: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    pub compute: ComputeArgs,
    /// Aggregated series file; without one a synthetic stand-in is used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Upper order statistics for the tail estimates (default 10% of m).
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Months per synthetic series.
    #[arg(long)]
    pub synthetic_m: Option<usize>,
    /// Level of the regular-variation test.
    #[arg(long)]
    pub significance: Option<f64>,
    #[arg(long = "p", value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub xi_levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RvCriticalArgs {
    #[command(flatten)]
    pub compute: ComputeArgs,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Table path (default: rv_critical_values.txt in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn set_threads(compute: &ComputeArgs) -> CliResult<()> {
    if let Some(n) = compute.threads {
        if n == 0 {
            return Err(CliError::config("threads: need at least one"));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    Ok(())
}

fn optimizer_settings(file: &ConfigFile, args: &OptimizerArgs) -> CliResult<OptimizeSettings> {
    let algorithm = match args.algorithm.as_deref().or(file.optimizer.algorithm.as_deref()) {
        Some(name) => parse_algorithm("optimizer.algorithm", name)?,
        None => Algorithm::Gsa,
    };
    let stall_limit = args.stall_limit.or(file.optimizer.stall_limit).unwrap_or(500);
    let max_iterations = args.max_iterations.or(file.optimizer.max_iterations).unwrap_or(10_000);
    if stall_limit == 0 || max_iterations == 0 {
        return Err(CliError::config("optimizer: stall_limit and max_iterations must be positive"));
    }
    Ok(OptimizeSettings {
        algorithm,
        stall_limit,
        max_iterations,
    })
}

fn parse_month(field: &str, text: &str) -> CliResult<catpool::ingest::YearMonth> {
    text.parse()
        .map_err(|e| CliError::config(format!("{field}: {e}")))
}

/// Runs one parsed invocation and returns the files written.
pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out_dir = cli
        .output_dir
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match cli.command {
        Command::Asymptotic(args) => {
            set_threads(&args.compute)?;
            let exp = Experiment::resolve(
                &file,
                &args.overrides(),
                ExperimentDefaults {
                    participants: default_participants(),
                    p_grid: vec![0.9],
                    xi_levels: DEFAULT_XI_LEVELS.to_vec(),
                    m: 100_000,
                    seeds: vec![1],
                    lambda_policy: LambdaPolicy::BoxLower,
                },
            )?;
            Ok(vec![commands::asymptotic::run(&exp, &out_dir)?])
        }
        Command::SimulateDr(args) => {
            set_threads(&args.compute)?;
            let exp = Experiment::resolve(
                &file,
                &args.overrides(),
                ExperimentDefaults {
                    participants: default_participants(),
                    p_grid: default_p_sweep(),
                    xi_levels: DEFAULT_XI_LEVELS.to_vec(),
                    m: 100_000,
                    seeds: vec![1],
                    lambda_policy: LambdaPolicy::BoxLower,
                },
            )?;
            Ok(vec![commands::simulate::run(&exp, &out_dir)?])
        }
        Command::Optimize { experiment, optimizer } => {
            set_threads(&experiment.compute)?;
            let exp = Experiment::resolve(
                &file,
                &experiment.overrides(),
                ExperimentDefaults {
                    participants: default_participants(),
                    p_grid: vec![0.9],
                    xi_levels: vec![0.1],
                    m: 100_000,
                    seeds: vec![1],
                    lambda_policy: LambdaPolicy::Optimize,
                },
            )?;
            if exp.lambda_policy != LambdaPolicy::Optimize {
                return Err(CliError::config("lambda_policy: optimize requires lambda_policy = optimize"));
            }
            let settings = optimizer_settings(&file, &optimizer)?;
            Ok(vec![commands::optimize::run(&exp, &settings, &out_dir)?.0])
        }
        Command::Compare {
            experiment,
            optimizer,
            problems,
            algorithms,
        } => {
            set_threads(&experiment.compute)?;
            let mut overrides = experiment.overrides();
            // --seed drives the optimizers here, not the samples
            overrides.seeds = experiment.seeds.clone();
            let exp = Experiment::resolve(
                &file,
                &overrides,
                ExperimentDefaults {
                    participants: second_study_participants(),
                    p_grid: vec![0.95],
                    xi_levels: vec![0.3],
                    m: 10_000,
                    seeds: vec![1],
                    lambda_policy: LambdaPolicy::Optimize,
                },
            )?;
            let base = optimizer_settings(&file, &optimizer)?;
            let algorithms = match algorithms.or_else(|| file.compare.algorithms.clone()) {
                Some(names) => names
                    .iter()
                    .map(|n| parse_algorithm("compare.algorithms", n))
                    .collect::<CliResult<Vec<_>>>()?,
                None => Algorithm::ALL.to_vec(),
            };
            let settings = CompareSettings {
                problems: problems.or(file.compare.problems).unwrap_or(20),
                algorithms,
                stall_limit: base.stall_limit,
                max_iterations: base.max_iterations,
                seed: experiment.compute.seed.unwrap_or(1),
            };
            Ok(commands::compare::run(&exp, &settings, &out_dir)?.0)
        }
        Command::Ingest(args) => {
            let sec = &file.ingest;
            let input = args
                .input
                .clone()
                .or_else(|| sec.input.clone())
                .ok_or_else(|| CliError::config("ingest.input: no claim export given"))?;
            let defaults = Window::default();
            let start = match args.start.as_deref().or(sec.start.as_deref()) {
                Some(s) => parse_month("ingest.start", s)?,
                None => defaults.start,
            };
            let end = match args.end.as_deref().or(sec.end.as_deref()) {
                Some(s) => parse_month("ingest.end", s)?,
                None => defaults.end,
            };
            let window = Window::new(start, end).map_err(|e| CliError::config(format!("ingest window: {e}")))?;
            let mut schema = Schema::default();
            if let Some(c) = args.delimiter.or(sec.delimiter) {
                if !c.is_ascii() {
                    return Err(CliError::config(format!("ingest.delimiter: `{c}` is not ASCII")));
                }
                schema.delimiter = c as u8;
            }
            let pick = |flag: &Option<String>, key: &Option<String>, slot: &mut String| {
                if let Some(v) = flag.clone().or_else(|| key.clone()) {
                    *slot = v;
                }
            };
            pick(&args.date_column, &sec.date_column, &mut schema.date);
            pick(&args.state_column, &sec.state_column, &mut schema.state);
            pick(&args.building_column, &sec.building_column, &mut schema.building);
            pick(&args.contents_column, &sec.contents_column, &mut schema.contents);
            let settings = IngestSettings {
                input,
                output: args.output.clone().or_else(|| sec.output.clone()),
                states: args
                    .states
                    .clone()
                    .or_else(|| sec.states.clone())
                    .unwrap_or_else(|| vec!["FL".into(), "CA".into(), "NY".into()]),
                window,
                schema,
            };
            let outcome = commands::ingest::run(&settings, &out_dir)?;
            Ok(vec![outcome.series_path, outcome.rejects_path])
        }
        Command::Empirical(args) => {
            set_threads(&args.compute)?;
            let sec = &file.empirical;
            let settings = EmpiricalSettings {
                data: args.data.clone().or_else(|| sec.data.clone()),
                k: args.k.or(sec.k),
                pools: sec.pools.clone(),
                synthetic_m: args.synthetic_m.or(sec.synthetic_m).unwrap_or(10_000),
                significance: args.significance.or(sec.significance).unwrap_or(0.05),
                xi_levels: args
                    .xi_levels
                    .clone()
                    .or_else(|| file.xi_levels.clone())
                    .unwrap_or_else(|| DEFAULT_XI_LEVELS.to_vec()),
                p_grid: args
                    .p_grid
                    .clone()
                    .or_else(|| file.p_grid.clone())
                    .unwrap_or_else(default_p_sweep),
                seed: args.compute.seed.unwrap_or(1),
            };
            Ok(commands::empirical::run(&settings, &out_dir)?.files)
        }
        Command::RvCritical(args) => {
            set_threads(&args.compute)?;
            let golden = CriticalValueTable::golden();
            let sec = &file.rv;
            let rv = RvArgs {
                grid: args.grid.or(sec.grid).unwrap_or(golden.grid),
                replications: args.replications.or(sec.replications).unwrap_or(golden.replications),
                levels: args
                    .levels
                    .clone()
                    .or_else(|| sec.levels.clone())
                    .unwrap_or_else(|| vec![0.01, 0.05, 0.1]),
                seed: args.compute.seed.unwrap_or(golden.seed),
                output: args.output.clone().or_else(|| sec.output.clone()),
            };
            Ok(vec![commands::rv::run(&rv, &out_dir)?])
        }
    }
}
