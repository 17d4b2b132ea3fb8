use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use catpool::distributions::{frechet_sample, FrechetParams};
use catpool::evt::{default_tail_count, hill_estimate, hill_sweep, pooled_tail_estimate, scale_sweep};
use catpool::hypothesis::{
    correlation_tests, rv_critical_value, rv_test, tail_equivalence_from_estimates, CriticalValueTable,
};
use catpool::ingest::read_series;
use catpool::montecarlo::dr_empirical;
use catpool::pool::LambdaVector;
use catpool::rng::derive_seed;

use super::{csv_file, finish};
use crate::config::PoolSpec;
use crate::error::{CliError, CliResult};

/// Tail indices and relative scale of the synthetic stand-in: two
/// tail-equivalent series and a lighter third one.
pub const SYNTHETIC_ALPHAS: [f64; 3] = [0.604, 0.604, 0.719];
pub const SYNTHETIC_THETA: f64 = 0.3637;
pub const SYNTHETIC_STATES: [&str; 3] = ["S1", "S2", "S3"];

#[derive(Debug, Clone)]
pub struct EmpiricalSettings {
    /// Aggregated series file; `None` runs on synthetic Fréchet data.
    pub data: Option<PathBuf>,
    pub k: Option<usize>,
    pub pools: Option<Vec<PoolSpec>>,
    pub synthetic_m: usize,
    pub significance: f64,
    pub xi_levels: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DrRow {
    pub pool: String,
    pub xi: f64,
    pub p: f64,
    pub state: String,
    pub dr: f64,
    pub retained: f64,
    pub share: f64,
}

/// What the pipeline estimated, for reporting and checks.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalSummary {
    pub synthetic: bool,
    pub m: usize,
    pub k: usize,
    /// Hill `α̂` at `k` per state.
    pub alpha_hat: BTreeMap<String, f64>,
    /// Pooled `α̂` at `k` per tail-equivalent pool.
    pub pooled_alpha: BTreeMap<String, f64>,
    /// `θ̂` at `h = k` per `(pool, state)` against the pool's first member.
    pub theta_hat: BTreeMap<(String, String), f64>,
    pub dr: Vec<DrRow>,
    pub files: Vec<PathBuf>,
}

pub fn default_pools(synthetic: bool) -> Vec<PoolSpec> {
    let [a, b, c] = if synthetic { SYNTHETIC_STATES } else { ["FL", "CA", "NY"] };
    let pool = |states: &[&str], pooled_tail: bool| PoolSpec {
        name: states.join("-"),
        states: states.iter().map(|s| s.to_string()).collect(),
        pooled_tail,
    };
    vec![pool(&[a, b], true), pool(&[b, c], false), pool(&[a, b, c], false)]
}

/// Monthly-loss stand-in with known tails, `m` observations per series.
pub fn synthetic_series(m: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let scales = [
        1.0,
        SYNTHETIC_THETA.powf(1.0 / SYNTHETIC_ALPHAS[1]),
        1.0,
    ];
    SYNTHETIC_STATES
        .iter()
        .zip(SYNTHETIC_ALPHAS.iter().zip(scales))
        .enumerate()
        .map(|(i, (name, (&a, s)))| {
            let law = FrechetParams::new(a, s).expect("valid synthetic law");
            (name.to_string(), frechet_sample(&law, m, derive_seed(seed, i as u64)))
        })
        .collect()
}

fn load(settings: &EmpiricalSettings) -> CliResult<Vec<(String, Vec<f64>)>> {
    match &settings.data {
        Some(path) => {
            let series = read_series(path)?;
            if series.is_empty() {
                return Err(CliError::Data(format!("{} holds no series", path.display())));
            }
            Ok(series.into_iter().map(|s| (s.state.clone(), s.values())).collect())
        }
        None => {
            if settings.synthetic_m < 20 {
                return Err(CliError::config(format!(
                    "empirical.synthetic_m: need at least 20, got {}",
                    settings.synthetic_m
                )));
            }
            Ok(synthetic_series(settings.synthetic_m, settings.seed))
        }
    }
}

fn critical_value(significance: f64) -> CliResult<f64> {
    let golden = CriticalValueTable::golden();
    match golden.get(&significance.to_string()) {
        Some(c) => Ok(c),
        None => {
            log::info!("no frozen critical value at {significance}; simulating one");
            Ok(rv_critical_value(significance, golden.grid, golden.replications, golden.seed)?)
        }
    }
}

/// Tail estimation, tests and diversification ratios on observed (or
/// synthetic) monthly losses. Writes `hill.csv`, `theta.csv`, `tests.csv`
/// and `empirical_dr.csv`.
pub fn run(settings: &EmpiricalSettings, out_dir: &Path) -> CliResult<EmpiricalSummary> {
    if !(settings.significance > 0.0 && settings.significance < 1.0) {
        return Err(CliError::config(format!(
            "empirical.significance: {} is not in (0, 1)",
            settings.significance
        )));
    }
    if let Some(c) = settings.xi_levels.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(CliError::config(format!("xi_levels: {c} is not positive")));
    }
    let p_grid: Vec<f64> = settings.p_grid.iter().copied().filter(|&p| p > 0.8).collect();
    if let Some(p) = p_grid.iter().find(|&&p| p >= 1.0) {
        return Err(CliError::config(format!("p_grid: {p} is not below 1")));
    }
    if p_grid.len() < settings.p_grid.len() {
        log::info!(
            "dropped {} levels at or below 0.8; the quantile extrapolation needs p > 0.8",
            settings.p_grid.len() - p_grid.len()
        );
    }

    let series = load(settings)?;
    let synthetic = settings.data.is_none();
    let m = series[0].1.len();
    if let Some((name, s)) = series.iter().find(|(_, s)| s.len() != m) {
        return Err(CliError::Data(format!("series {name} has {} months, expected {m}", s.len())));
    }
    let k = settings.k.unwrap_or_else(|| default_tail_count(m));
    if k == 0 || k >= m {
        return Err(CliError::config(format!("empirical.k: need 1 <= k < {m}, got {k}")));
    }
    let by_state: BTreeMap<&str, &[f64]> = series.iter().map(|(n, s)| (n.as_str(), s.as_slice())).collect();
    let pools = settings.pools.clone().unwrap_or_else(|| default_pools(synthetic));
    for pool in &pools {
        if pool.states.len() < 2 {
            return Err(CliError::config(format!("empirical.pools: `{}` needs two states", pool.name)));
        }
        if let Some(s) = pool.states.iter().find(|s| !by_state.contains_key(s.as_str())) {
            return Err(CliError::config(format!(
                "empirical.pools: `{}` names state {s}, absent from the data",
                pool.name
            )));
        }
    }

    let mut summary = EmpiricalSummary {
        synthetic,
        m,
        k,
        ..Default::default()
    };
    let sweep_max = (m / 2).max(k);

    // Hill sweeps, with pooled rows named after their pool.
    let (mut w, path) = csv_file(out_dir, "hill.csv")?;
    w.write_record(["state", "k", "alpha_hat"])?;
    let mut sweeps = BTreeMap::new();
    for (name, s) in &series {
        let sweep = hill_sweep(s, 1..=sweep_max)?;
        for e in &sweep {
            w.write_record([name.clone(), e.k.to_string(), e.alpha.to_string()])?;
        }
        summary.alpha_hat.insert(name.clone(), hill_estimate(s, k)?.alpha);
        sweeps.insert(name.as_str(), sweep);
    }
    for pool in pools.iter().filter(|p| p.pooled_tail) {
        for kk in 1..=sweep_max {
            let ests: Option<Vec<_>> = pool
                .states
                .iter()
                .map(|s| sweeps[s.as_str()].iter().find(|e| e.k == kk).copied())
                .collect();
            if let Some(pooled) = ests.and_then(|e| pooled_tail_estimate(&e).ok()) {
                w.write_record([pool.name.clone(), kk.to_string(), pooled.alpha_pool.to_string()])?;
            }
        }
        let at_k = pool
            .states
            .iter()
            .map(|s| hill_estimate(by_state[s.as_str()], k))
            .collect::<catpool::Result<Vec<_>>>()?;
        summary
            .pooled_alpha
            .insert(pool.name.clone(), pooled_tail_estimate(&at_k)?.alpha_pool);
    }
    finish(w, &path)?;
    summary.files.push(path);

    // Relative scales inside tail-equivalent pools.
    let (mut w, path) = csv_file(out_dir, "theta.csv")?;
    w.write_record(["h", "theta_hat", "state", "reference"])?;
    for pool in pools.iter().filter(|p| p.pooled_tail) {
        let reference = &pool.states[0];
        for state in &pool.states[1..] {
            let sweep = scale_sweep(by_state[state.as_str()], by_state[reference.as_str()], 1..=sweep_max)?;
            for &(h, t) in &sweep {
                w.write_record([h.to_string(), t.to_string(), state.clone(), reference.clone()])?;
                if h == k {
                    summary.theta_hat.insert((pool.name.clone(), state.clone()), t);
                }
            }
        }
    }
    finish(w, &path)?;
    summary.files.push(path);

    // Regular variation per state, then tail equivalence and correlation per pair.
    let (mut w, path) = csv_file(out_dir, "tests.csv")?;
    w.write_record(["test", "k", "statistic", "critical_or_p"])?;
    let crit = critical_value(settings.significance)?;
    for (name, s) in &series {
        let r = rv_test(s, k, crit, settings.significance)?;
        w.write_record([format!("rv:{name}"), k.to_string(), r.statistic.to_string(), crit.to_string()])?;
    }
    for (i, (a, sa)) in series.iter().enumerate() {
        for (b, sb) in &series[i + 1..] {
            let pair = format!("{a}-{b}");
            let est = [hill_estimate(sa, k)?, hill_estimate(sb, k)?];
            let eq = tail_equivalence_from_estimates(est)?;
            w.write_record([
                format!("equivalence:{pair}"),
                k.to_string(),
                eq.statistic.to_string(),
                eq.p_value.to_string(),
            ])?;
            let c = correlation_tests(sa, sb)?;
            for (label, r) in [("pearson", c.pearson), ("spearman", c.spearman)] {
                w.write_record([
                    format!("{label}:{pair}"),
                    String::new(),
                    r.coefficient.to_string(),
                    r.p_value.to_string(),
                ])?;
            }
        }
    }
    finish(w, &path)?;
    summary.files.push(path);

    // Diversification ratios with multipliers at the lower corner of the box.
    let (mut w, path) = csv_file(out_dir, "empirical_dr.csv")?;
    w.write_record(["pool", "xi", "p", "i", "state", "dr", "retained", "share"])?;
    for pool in &pools {
        let mut members: Vec<(String, f64)> = pool
            .states
            .iter()
            .map(|s| {
                let a = match pool.pooled_tail {
                    true => summary.pooled_alpha[&pool.name],
                    false => summary.alpha_hat[s],
                };
                (s.clone(), a)
            })
            .collect();
        // heaviest tail first; ties keep the configured order
        members.sort_by(|x, y| x.1.total_cmp(&y.1));
        let alphas: Vec<f64> = members.iter().map(|m| m.1).collect();
        let data: Vec<Vec<f64>> = members.iter().map(|(s, _)| by_state[s.as_str()].to_vec()).collect();
        for &c in &settings.xi_levels {
            let xi = c.powf(1.0 / alphas[0]);
            let lambdas = LambdaVector::new(alphas.iter().map(|&a| xi.powf(-alphas[0] / a).max(1.0)).collect())?;
            for &p in &p_grid {
                let r = dr_empirical(&data, &alphas, xi, &lambdas, p)?;
                for (i, (state, _)) in members.iter().enumerate() {
                    w.write_record([
                        pool.name.clone(),
                        xi.to_string(),
                        p.to_string(),
                        (i + 1).to_string(),
                        state.clone(),
                        r.dr[i].to_string(),
                        r.retained_ratio[i].to_string(),
                        r.share_ratio[i].to_string(),
                    ])?;
                    summary.dr.push(DrRow {
                        pool: pool.name.clone(),
                        xi,
                        p,
                        state: state.clone(),
                        dr: r.dr[i],
                        retained: r.retained_ratio[i],
                        share: r.share_ratio[i],
                    });
                }
            }
        }
    }
    finish(w, &path)?;
    summary.files.push(path);
    Ok(summary)
}
