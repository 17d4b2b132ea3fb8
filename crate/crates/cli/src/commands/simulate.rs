use std::path::{Path, PathBuf};

use catpool::distributions::frechet_quantile;
use catpool::montecarlo::{dr_simulated_columns, simulate_frechet_losses, DrReport};
use catpool::pool::{attachment_from_var, feasible_box, LayerSpec};
use rayon::prelude::*;

use super::{csv_file, finish};
use crate::config::{Experiment, LambdaPolicy};
use crate::error::{CliError, CliResult};

fn multipliers(exp: &Experiment, xi: f64) -> CliResult<Vec<f64>> {
    match exp.lambda_policy {
        LambdaPolicy::BoxLower => Ok(feasible_box(&exp.model_at(xi)?).lower),
        LambdaPolicy::Explicit => Ok(exp.lambdas.clone().expect("validated with the policy")),
        LambdaPolicy::Optimize => Err(CliError::config(
            "lambda_policy: simulate-dr takes box_lower or explicit; use `optimize` for optimized layers",
        )),
    }
}

/// Simulated `DR_i(p)` over the `ξ × p` grid, one frozen sample per seed,
/// into `dr_curves.csv`.
pub fn run(exp: &Experiment, out_dir: &Path) -> CliResult<PathBuf> {
    let cells: Vec<(f64, f64)> = exp
        .xi_grid
        .iter()
        .flat_map(|&xi| exp.p_grid.iter().map(move |&p| (xi, p)))
        .collect();
    let lambdas: Vec<Vec<f64>> = exp.xi_grid.iter().map(|&xi| multipliers(exp, xi)).collect::<CliResult<_>>()?;

    let (mut w, path) = csv_file(out_dir, "dr_curves.csv")?;
    w.write_record(["xi", "p", "i", "dr", "retained", "share", "seed"])?;
    for &seed in &exp.seeds {
        let losses = simulate_frechet_losses(&exp.params, exp.m, seed);
        let reports: Vec<DrReport> = cells
            .par_iter()
            .map(|&(xi, p)| {
                let model = exp.model_at(xi)?;
                let lam = &lambdas[exp.xi_grid.iter().position(|&x| x == xi).expect("grid point")];
                let specs = exp
                    .params
                    .iter()
                    .zip(lam)
                    .enumerate()
                    .map(|(i, (fr, &l))| {
                        let d = attachment_from_var(&model, i, frechet_quantile(fr, p)?)?;
                        LayerSpec::new(d, l * d)
                    })
                    .collect::<catpool::Result<Vec<_>>>()?;
                Ok(dr_simulated_columns(&losses, &exp.params, &specs, p)?)
            })
            .collect::<CliResult<_>>()?;
        for (&(xi, p), r) in cells.iter().zip(&reports) {
            for i in 0..exp.params.len() {
                w.write_record([
                    xi.to_string(),
                    p.to_string(),
                    exp.labels[i].to_string(),
                    r.dr[i].to_string(),
                    r.retained_ratio[i].to_string(),
                    r.share_ratio[i].to_string(),
                    seed.to_string(),
                ])?;
            }
        }
    }
    finish(w, &path)?;
    Ok(path)
}
