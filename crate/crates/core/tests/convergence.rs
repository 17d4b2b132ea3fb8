//! Simulated ratios approach their asymptotic limit as `p → 1`.

use catpool::distributions::{frechet_quantile, FrechetParams};
use catpool::montecarlo::{dr_simulated_columns, simulate_frechet_losses};
use catpool::pool::{asymptotic_dr, attachment_from_var, feasible_box, LambdaVector, LayerSpec, TailModel};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    0.5 * (xs[(n - 1) / 2] + xs[n / 2])
}

#[test]
fn gap_to_the_limit_shrinks_with_p() {
    let params = vec![
        FrechetParams::new(8.5, 100.0).unwrap(),
        FrechetParams::new(8.5, 90.0).unwrap(),
    ];
    let model = TailModel::from_frechet(&params, 0.3f64.powf(1.0 / 8.5)).unwrap();
    let bx = feasible_box(&model);
    let mid: Vec<f64> = bx
        .lower
        .iter()
        .zip(&bx.upper)
        .map(|(&lo, hi)| 0.5 * (lo + hi.finite().unwrap()))
        .collect();
    let limit = asymptotic_dr(&model, &LambdaVector::new(mid.clone()).unwrap()).unwrap().values;

    let levels = [0.9, 0.99, 0.999, 0.9999];
    let seeds = 1..=20u64;
    let mut gaps = vec![vec![Vec::new(); levels.len()]; params.len()];
    for seed in seeds {
        let losses = simulate_frechet_losses(&params, 1_000_000, seed);
        for (j, &p) in levels.iter().enumerate() {
            let specs: Vec<LayerSpec> = params
                .iter()
                .zip(&mid)
                .enumerate()
                .map(|(i, (fr, &l))| {
                    let d = attachment_from_var(&model, i, frechet_quantile(fr, p).unwrap()).unwrap();
                    LayerSpec::new(d, l * d).unwrap()
                })
                .collect();
            let r = dr_simulated_columns(&losses, &params, &specs, p).unwrap();
            for i in 0..params.len() {
                gaps[i][j].push((r.dr[i] - limit[i]).abs());
            }
        }
    }
    for (i, per_level) in gaps.into_iter().enumerate() {
        let medians: Vec<f64> = per_level.into_iter().map(median).collect();
        let shrinking = medians.windows(2).filter(|w| w[1] < w[0]).count();
        eprintln!("participant {i}: limit {:.4}, median gaps {medians:.4?}", limit[i]);
        assert!(shrinking >= 2, "participant {i}: {medians:?}");
    }
}
