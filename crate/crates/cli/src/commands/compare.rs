use std::path::{Path, PathBuf};

use catpool::optimize::{compare_optimizers, pool_objective, Algorithm, ComparisonReport, OptimizerConfig, Problem};

use super::output_path;
use crate::config::Experiment;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct CompareSettings {
    pub problems: usize,
    pub algorithms: Vec<Algorithm>,
    pub stall_limit: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

/// Builds one pool problem per sample seed `1..=problems` at the first grid
/// cell and races every configured algorithm from a shared starting set.
/// Writes `comparison.csv`, `comparison.json`, `ecdf_time.csv` and
/// `ecdf_error.csv`.
pub fn run(exp: &Experiment, settings: &CompareSettings, out_dir: &Path) -> CliResult<(Vec<PathBuf>, ComparisonReport)> {
    if settings.algorithms.len() < 2 {
        return Err(CliError::config("compare.algorithms: need at least two algorithms"));
    }
    if settings.problems == 0 {
        return Err(CliError::config("compare.problems: need at least one problem"));
    }
    let xi = exp.xi_grid[0];
    let p = exp.p_grid[0];
    let model = exp.model_at(xi)?;
    let problems = (1..=settings.problems as u64)
        .map(|sample_seed| {
            let objective = pool_objective(exp.params.clone(), exp.m, sample_seed, &model, p)?;
            let bounds = objective.search_box()?;
            Ok(Problem::new(
                format!("pool-seed-{sample_seed}"),
                bounds,
                move |x| objective.evaluate(x),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut base = OptimizerConfig::new(problems[0].bounds.clone(), settings.algorithms[0], settings.seed);
    base.stall_limit = settings.stall_limit;
    base.max_iterations = settings.max_iterations;
    let report = compare_optimizers(&problems, &settings.algorithms, &base)?;

    let mut paths = Vec::new();
    let csv_path = output_path(out_dir, "comparison.csv")?;
    report.write_csv(create(&csv_path)?)?;
    paths.push(csv_path);
    let json_path = output_path(out_dir, "comparison.json")?;
    std::fs::write(&json_path, report.to_json()?).map_err(|source| CliError::Output {
        path: json_path.clone(),
        source,
    })?;
    paths.push(json_path);
    let time_path = output_path(out_dir, "ecdf_time.csv")?;
    report.write_ecdf_csv(create(&time_path)?, &report.ecdf_time)?;
    paths.push(time_path);
    let error_path = output_path(out_dir, "ecdf_error.csv")?;
    report.write_ecdf_csv(create(&error_path)?, &report.ecdf_error)?;
    paths.push(error_path);
    Ok((paths, report))
}

fn create(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}
