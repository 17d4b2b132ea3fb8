use std::path::{Path, PathBuf};

use catpool::optimize::{minimize, pool_objective, Algorithm, OptimizerConfig};
use catpool::pool::distance_to_box;

use super::{csv_file, finish};
use crate::config::Experiment;
use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct OptimizeSettings {
    pub algorithm: Algorithm,
    pub stall_limit: usize,
    pub max_iterations: usize,
}

/// One optimizer run per `(ξ, p, seed)`.
#[derive(Debug, Clone)]
pub struct OptimizeRow {
    pub xi: f64,
    pub p: f64,
    pub seed: u64,
    /// Multipliers in config order.
    pub lambdas: Vec<f64>,
    pub objective: f64,
    pub pi_distance: f64,
    pub time_seconds: f64,
    pub converged: bool,
}

/// Minimises the total simulated ratio over the layer multipliers for every
/// grid cell and seed, then measures how far the optimum lands from the
/// asymptotically optimal box. Writes `optimize.csv`.
pub fn run(exp: &Experiment, settings: &OptimizeSettings, out_dir: &Path) -> CliResult<(PathBuf, Vec<OptimizeRow>)> {
    let mut rows = Vec::new();
    for &xi in &exp.xi_grid {
        let model = exp.model_at(xi)?;
        for &p in &exp.p_grid {
            for &seed in &exp.seeds {
                let objective = pool_objective(exp.params.clone(), exp.m, seed, &model, p)?;
                let mut config = OptimizerConfig::new(objective.search_box()?, settings.algorithm, seed);
                config.stall_limit = settings.stall_limit;
                config.max_iterations = settings.max_iterations;
                let run = minimize(&|x| objective.evaluate(x), &config)?;
                let pi_distance = distance_to_box(&run.best_point, objective.feasible_box())?;
                let mut lambdas = vec![0.0; run.best_point.len()];
                for (i, &l) in run.best_point.iter().enumerate() {
                    lambdas[exp.labels[i] - 1] = l;
                }
                log::info!(
                    "xi={xi} p={p} seed={seed}: objective {:.6}, distance {:.3e}",
                    run.best_value,
                    pi_distance
                );
                rows.push(OptimizeRow {
                    xi,
                    p,
                    seed,
                    lambdas,
                    objective: run.best_value,
                    pi_distance,
                    time_seconds: run.wall_time,
                    converged: run.converged,
                });
            }
        }
    }

    let (mut w, path) = csv_file(out_dir, "optimize.csv")?;
    let n = exp.params.len();
    let mut header: Vec<String> = ["xi", "p", "seed", "algorithm"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    header.extend(["objective", "pi_distance", "time_seconds", "converged"].iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![
            r.xi.to_string(),
            r.p.to_string(),
            r.seed.to_string(),
            settings.algorithm.name().to_string(),
        ];
        rec.extend(r.lambdas.iter().map(|l| l.to_string()));
        rec.extend([
            r.objective.to_string(),
            r.pi_distance.to_string(),
            r.time_seconds.to_string(),
            r.converged.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    finish(w, &path)?;
    Ok((path, rows))
}
