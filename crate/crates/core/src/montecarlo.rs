//! Finite-sample estimators of the diversification ratio
//! `DR_i(p) = VaR_p(X_i - Y_i) / VaR_p(X_i) + P_i / VaR_p(X_i)`.
//!
//! Loss matrices are column-major: `losses[i][j]` is observation `j` of
//! participant `i`. Empirical quantiles are the `⌊pm⌋`-th order statistic with
//! no interpolation.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{frechet_layer_expectation, frechet_quantile, frechet_sample, FrechetParams};
use crate::error::{Error, Result};
use crate::evt;
use crate::pool::{attachment_from_var, layer_loss, LambdaVector, LayerSpec, TailModel};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct PoolSample {
    losses: Vec<Vec<f64>>,
    layers: Vec<Vec<f64>>,
    aggregate: Vec<f64>,
    layer_specs: Vec<LayerSpec>,
}

impl PoolSample {
    pub fn losses(&self) -> &[Vec<f64>] {
        &self.losses
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    /// `S_j = Σ_i Y_{j,i}`.
    pub fn aggregate(&self) -> &[f64] {
        &self.aggregate
    }

    pub fn layer_specs(&self) -> &[LayerSpec] {
        &self.layer_specs
    }

    /// Observations per participant.
    pub fn m(&self) -> usize {
        self.aggregate.len()
    }

    pub fn n(&self) -> usize {
        self.layer_specs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrReport {
    pub p: f64,
    /// `VaR_p(X_i - Y_i) / VaR_p(X_i)`.
    pub retained_ratio: Vec<f64>,
    /// `E[Y_i] / Σ E[Y] · S_(⌊pm⌋) / X_(⌊pm⌋),i`.
    pub share_ratio: Vec<f64>,
    pub dr: Vec<f64>,
}

impl DrReport {
    /// `Σ_i DR_i(p)`, the practical objective.
    pub fn total(&self) -> f64 {
        self.dr.iter().sum()
    }
}

fn check_columns(losses: &[Vec<f64>], n: usize) -> Result<usize> {
    if losses.len() != n {
        return Err(Error::domain(format!(
            "{} loss columns for {n} participants",
            losses.len()
        )));
    }
    let m = losses.first().map_or(0, Vec::len);
    if m == 0 {
        return Err(Error::domain("pool sample has no observations"));
    }
    for (i, col) in losses.iter().enumerate() {
        if col.len() != m {
            return Err(Error::domain(format!(
                "column {i} has {} observations, expected {m}",
                col.len()
            )));
        }
        if col.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::domain(format!("column {i} holds a negative or non-finite loss")));
        }
    }
    Ok(m)
}

/// Applies each participant's layer to its column and sums across participants.
pub fn build_pool_sample(losses: Vec<Vec<f64>>, layer_specs: Vec<LayerSpec>) -> Result<PoolSample> {
    let m = check_columns(&losses, layer_specs.len())?;
    let layers: Vec<Vec<f64>> = losses
        .par_iter()
        .zip(&layer_specs)
        .map(|(col, spec)| col.iter().map(|&x| layer_loss(x, spec)).collect())
        .collect();
    let mut aggregate = vec![0.0; m];
    for col in &layers {
        for (s, y) in aggregate.iter_mut().zip(col) {
            *s += y;
        }
    }
    Ok(PoolSample {
        losses,
        layers,
        aggregate,
        layer_specs,
    })
}

/// `m` independent Fréchet draws per participant; column `i` uses its own
/// seed derived from `(seed, i)`.
pub fn simulate_frechet_losses(params: &[FrechetParams], m: usize, seed: u64) -> Vec<Vec<f64>> {
    params
        .iter()
        .enumerate()
        .map(|(i, fr)| frechet_sample(fr, m, derive_seed(seed, i as u64)))
        .collect()
}

/// Layers `d_i = ξ^(α₀/α_i) VaR_p(X_i)`, `l_i = λ_i d_i` from exact Fréchet
/// quantiles. `params` must follow the model's participant order.
pub fn frechet_layer_specs(
    model: &TailModel,
    params: &[FrechetParams],
    lambdas: &LambdaVector,
    p: f64,
) -> Result<Vec<LayerSpec>> {
    if params.len() != model.n() || lambdas.len() != model.n() {
        return Err(Error::domain("model, laws and multipliers differ in length"));
    }
    params
        .iter()
        .zip(lambdas.as_slice())
        .enumerate()
        .map(|(i, (fr, &lam))| {
            let d = attachment_from_var(model, i, frechet_quantile(fr, p)?)?;
            LayerSpec::new(d, lam * d)
        })
        .collect()
}

fn quantile_rank(p: f64, m: usize) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let r = (p * m as f64).floor() as usize;
    if r == 0 {
        return Err(Error::domain(format!("floor(p m) = 0 for p = {p}, m = {m}")));
    }
    Ok(r)
}

/// The `r`-th smallest value (1-based) without a full sort.
fn order_stat_unsorted(values: &[f64], r: usize) -> f64 {
    let mut buf = values.to_vec();
    let (_, v, _) = buf.select_nth_unstable_by(r - 1, f64::total_cmp);
    *v
}

fn retained_at(var: f64, spec: &LayerSpec) -> f64 {
    (var - layer_loss(var, spec)) / var
}

fn assemble(p: f64, retained: Vec<f64>, expected: &[f64], s_r: f64, x_r: &[f64]) -> Result<DrReport> {
    let total: f64 = expected.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegeneratePool(
            "every layer has zero expected loss".into(),
        ));
    }
    let mut share = Vec::with_capacity(expected.len());
    for (i, (&e, &x)) in expected.iter().zip(x_r).enumerate() {
        if !(x > 0.0) {
            return Err(Error::DegeneratePool(format!(
                "participant {i} has a zero empirical VaR"
            )));
        }
        share.push(e / total * s_r / x);
    }
    let dr = retained.iter().zip(&share).map(|(r, s)| r + s).collect();
    Ok(DrReport {
        p,
        retained_ratio: retained,
        share_ratio: share,
        dr,
    })
}

/// Simulation estimator: exact Fréchet VaR in the retained term, quadrature
/// `E[Y_i]` and sample order statistics in the share term.
pub fn dr_simulated(pool: &PoolSample, frechet: &[FrechetParams], p: f64) -> Result<DrReport> {
    simulated_report(pool.losses(), pool.aggregate(), frechet, pool.layer_specs(), p)
}

/// [`dr_simulated`] on borrowed loss columns, for sweeping layers over one
/// sample without copying it.
pub fn dr_simulated_columns(
    losses: &[Vec<f64>],
    frechet: &[FrechetParams],
    layer_specs: &[LayerSpec],
    p: f64,
) -> Result<DrReport> {
    let m = check_columns(losses, layer_specs.len())?;
    let mut aggregate = vec![0.0; m];
    for (col, spec) in losses.iter().zip(layer_specs) {
        for (s, &x) in aggregate.iter_mut().zip(col) {
            *s += layer_loss(x, spec);
        }
    }
    simulated_report(losses, &aggregate, frechet, layer_specs, p)
}

fn simulated_report(
    losses: &[Vec<f64>],
    aggregate: &[f64],
    frechet: &[FrechetParams],
    layer_specs: &[LayerSpec],
    p: f64,
) -> Result<DrReport> {
    if frechet.len() != layer_specs.len() {
        return Err(Error::domain("one Fréchet law per participant required"));
    }
    let r = quantile_rank(p, aggregate.len())?;
    let mut retained = Vec::with_capacity(frechet.len());
    let mut expected = Vec::with_capacity(frechet.len());
    for (fr, spec) in frechet.iter().zip(layer_specs) {
        retained.push(retained_at(frechet_quantile(fr, p)?, spec));
        expected.push(frechet_layer_expectation(fr, spec));
    }
    let x_r: Vec<f64> = losses.par_iter().map(|col| order_stat_unsorted(col, r)).collect();
    let s_r = order_stat_unsorted(aggregate, r);
    assemble(p, retained, &expected, s_r, &x_r)
}

/// Layers for observed data: `d_i = ξ^(α̂₀/α̂_i) · evt_var(data_i, α̂_i, p)`.
pub fn empirical_layer_specs(
    data: &[Vec<f64>],
    alphas: &[f64],
    xi: f64,
    lambdas: &LambdaVector,
    p: f64,
) -> Result<Vec<LayerSpec>> {
    if data.len() != alphas.len() || lambdas.len() != alphas.len() || alphas.is_empty() {
        return Err(Error::domain("data, tail indices and multipliers differ in length"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::domain(format!("xi must be positive, got {xi}")));
    }
    let a0 = alphas[0];
    data.iter()
        .zip(alphas)
        .zip(lambdas.as_slice())
        .map(|((col, &a), &lam)| {
            let d = xi.powf(a0 / a) * evt::evt_var(col, a, p)?;
            LayerSpec::new(d, lam * d)
        })
        .collect()
}

/// Estimator over observed losses: retained VaR from `R_(⌊pm⌋),i` with
/// `R = X - Y`, `E[Y_i]` as a sample mean.
pub fn dr_empirical(
    data: &[Vec<f64>],
    alphas: &[f64],
    xi: f64,
    lambdas: &LambdaVector,
    p: f64,
) -> Result<DrReport> {
    if !(p > 0.8 && p < 1.0) {
        return Err(Error::domain(format!(
            "empirical DR needs 0.8 < p < 1, got {p}"
        )));
    }
    let m = data.first().map_or(0, Vec::len);
    if m < 5 {
        return Err(Error::domain(format!("need at least 5 observations, got {m}")));
    }
    let specs = empirical_layer_specs(data, alphas, xi, lambdas, p)?;
    let pool = build_pool_sample(data.to_vec(), specs)?;
    empirical_report(&pool, p)
}

/// Empirical estimator on a prepared sample.
pub fn empirical_report(pool: &PoolSample, p: f64) -> Result<DrReport> {
    let r = quantile_rank(p, pool.m())?;
    let mf = pool.m() as f64;
    let mut retained = Vec::with_capacity(pool.n());
    let mut x_r = Vec::with_capacity(pool.n());
    let mut expected = Vec::with_capacity(pool.n());
    for (x, y) in pool.losses().iter().zip(pool.layers()) {
        let kept: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let var_x = order_stat_unsorted(x, r);
        let var_r = order_stat_unsorted(&kept, r);
        retained.push(if var_x > 0.0 { var_r / var_x } else { 0.0 });
        x_r.push(var_x);
        expected.push(y.iter().sum::<f64>() / mf);
    }
    let s_r = order_stat_unsorted(pool.aggregate(), r);
    assemble(p, retained, &expected, s_r, &x_r)
}

/// A simulated pool frozen once so that the layer multipliers can be varied
/// under common random numbers. Attachments, exact VaRs and the loss order
/// statistics do not depend on `λ` and are computed up front.
#[derive(Debug, Clone)]
pub struct FrozenPool {
    losses: Vec<Vec<f64>>,
    params: Vec<FrechetParams>,
    attachments: Vec<f64>,
    retained_below: Vec<f64>,
    vars: Vec<f64>,
    x_at_rank: Vec<f64>,
    rank: usize,
    p: f64,
}

impl FrozenPool {
    /// Simulates `m` draws per participant. `params` follows the model order.
    pub fn simulate(model: &TailModel, params: Vec<FrechetParams>, m: usize, seed: u64, p: f64) -> Result<Self> {
        let losses = simulate_frechet_losses(&params, m, seed);
        Self::from_losses(model, params, losses, p)
    }

    pub fn from_losses(model: &TailModel, params: Vec<FrechetParams>, losses: Vec<Vec<f64>>, p: f64) -> Result<Self> {
        if params.len() != model.n() {
            return Err(Error::domain("one Fréchet law per participant required"));
        }
        let m = check_columns(&losses, model.n())?;
        let rank = quantile_rank(p, m)?;
        let vars = params
            .iter()
            .map(|fr| frechet_quantile(fr, p))
            .collect::<Result<Vec<_>>>()?;
        let attachments = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| attachment_from_var(model, i, v))
            .collect::<Result<Vec<_>>>()?;
        let retained_below = vars
            .iter()
            .zip(&attachments)
            .map(|(&v, &d)| (v.min(d)) / v)
            .collect();
        let x_at_rank = losses.par_iter().map(|c| order_stat_unsorted(c, rank)).collect();
        Ok(Self {
            losses,
            params,
            attachments,
            retained_below,
            vars,
            x_at_rank,
            rank,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.params.len()
    }

    pub fn m(&self) -> usize {
        self.losses.first().map_or(0, Vec::len)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn attachments(&self) -> &[f64] {
        &self.attachments
    }

    pub fn layer_specs(&self, lambdas: &[f64]) -> Result<Vec<LayerSpec>> {
        if lambdas.len() != self.n() {
            return Err(Error::domain(format!(
                "{} multipliers for {} participants",
                lambdas.len(),
                self.n()
            )));
        }
        self.attachments
            .iter()
            .zip(lambdas)
            .map(|(&d, &lam)| {
                if !(lam >= 1.0 && lam.is_finite()) {
                    return Err(Error::domain(format!("multiplier {lam} below 1")));
                }
                LayerSpec::new(d, lam * d)
            })
            .collect()
    }

    /// Same estimator as [`dr_simulated`] on the frozen sample; `λ_i = 1`
    /// (an empty layer) is allowed.
    pub fn evaluate(&self, lambdas: &[f64]) -> Result<DrReport> {
        let specs = self.layer_specs(lambdas)?;
        let mut aggregate = vec![0.0; self.m()];
        for (col, spec) in self.losses.iter().zip(&specs) {
            for (s, &x) in aggregate.iter_mut().zip(col) {
                *s += layer_loss(x, spec);
            }
        }
        let s_r = order_stat_unsorted(&aggregate, self.rank);
        let mut retained = Vec::with_capacity(self.n());
        let mut expected = Vec::with_capacity(self.n());
        for (i, spec) in specs.iter().enumerate() {
            retained.push(if self.vars[i] <= spec.attachment() {
                self.retained_below[i]
            } else {
                retained_at(self.vars[i], spec)
            });
            expected.push(frechet_layer_expectation(&self.params[i], spec));
        }
        assemble(self.p, retained, &expected, s_r, &self.x_at_rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fr(alpha: f64, scale: f64) -> FrechetParams {
        FrechetParams::new(alpha, scale).unwrap()
    }

    fn spec(d: f64, l: f64) -> LayerSpec {
        LayerSpec::new(d, l).unwrap()
    }

    fn model1() -> (TailModel, Vec<FrechetParams>) {
        let params = vec![fr(8.5, 100.0), fr(8.5, 90.0)];
        let model = TailModel::from_frechet(&params, 0.1f64.powf(1.0 / 8.5)).unwrap();
        (model, params)
    }

    /// Brute-force estimator: full sorts, Simpson expectations, explicit branches.
    fn brute_force(losses: &[Vec<f64>], params: &[FrechetParams], specs: &[LayerSpec], p: f64) -> Vec<f64> {
        let m = losses[0].len();
        let r = (p * m as f64).floor() as usize;
        let mut s: Vec<f64> = (0..m)
            .map(|j| {
                losses
                    .iter()
                    .zip(specs)
                    .map(|(c, sp)| (c[j] - sp.attachment()).clamp(0.0, sp.width()))
                    .sum()
            })
            .collect();
        s.sort_by(f64::total_cmp);
        let e: Vec<f64> = params
            .iter()
            .zip(specs)
            .map(|(fr, sp)| {
                let n = 200_000;
                let h = sp.width() / n as f64;
                let f = |x: f64| 1.0 - fr.cdf(x);
                let mut acc = f(sp.attachment()) + f(sp.limit());
                for k in 1..n {
                    acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(sp.attachment() + k as f64 * h);
                }
                acc * h / 3.0
            })
            .collect();
        let total: f64 = e.iter().sum();
        (0..params.len())
            .map(|i| {
                let v = params[i].quantile(p).unwrap();
                let (d, l) = (specs[i].attachment(), specs[i].limit());
                let retained = if v <= d {
                    1.0
                } else if v <= l {
                    d / v
                } else {
                    (v - l + d) / v
                };
                let mut x = losses[i].clone();
                x.sort_by(f64::total_cmp);
                retained + e[i] / total * s[r - 1] / x[r - 1]
            })
            .collect()
    }

    #[test]
    fn build_single_row() {
        let pool = build_pool_sample(vec![vec![15.0], vec![25.0]], vec![spec(10.0, 20.0); 2]).unwrap();
        assert_eq!(pool.layers(), &[vec![5.0], vec![10.0]]);
        assert_eq!(pool.aggregate(), &[15.0]);
    }

    #[test]
    fn build_below_attachments() {
        let pool = build_pool_sample(vec![vec![1.0, 2.0, 3.0], vec![0.0, 4.0, 9.0]], vec![spec(10.0, 20.0); 2]).unwrap();
        assert!(pool.aggregate().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn build_rejects_bad_shapes() {
        assert!(build_pool_sample(vec![vec![1.0], vec![1.0, 2.0]], vec![spec(0.0, 1.0); 2]).is_err());
        assert!(build_pool_sample(vec![vec![1.0]], vec![spec(0.0, 1.0); 2]).is_err());
        assert!(build_pool_sample(vec![vec![-1.0]], vec![spec(0.0, 1.0)]).is_err());
    }

    #[test]
    fn layer_means_match_quadrature() {
        let params = [fr(8.5, 100.0), fr(3.0, 10.0)];
        let specs = vec![spec(110.0, 160.0), spec(8.0, 30.0)];
        let pool = build_pool_sample(simulate_frechet_losses(&params, 1_000_000, 5), specs.clone()).unwrap();
        for i in 0..2 {
            let mean = pool.layers()[i].iter().sum::<f64>() / pool.m() as f64;
            let exact = frechet_layer_expectation(&params[i], &specs[i]);
            assert!(((mean - exact) / exact).abs() < 0.02, "{mean} vs {exact}");
        }
    }

    #[test]
    fn empty_layers_are_degenerate() {
        let params = [fr(8.5, 100.0), fr(8.5, 90.0)];
        let specs: Vec<LayerSpec> = params
            .iter()
            .map(|p| {
                let d = p.quantile(0.9).unwrap() * 1.5;
                spec(d, d)
            })
            .collect();
        let pool = build_pool_sample(simulate_frechet_losses(&params, 10_000, 1), specs).unwrap();
        assert!(matches!(dr_simulated(&pool, &params, 0.9), Err(Error::DegeneratePool(_))));
    }

    #[test]
    fn single_participant_cannot_diversify() {
        let params = [fr(2.0, 1.0)];
        let pool = build_pool_sample(simulate_frechet_losses(&params, 200_000, 3), vec![spec(1e-9, 1e9)]).unwrap();
        let r = dr_simulated(&pool, &params, 0.9).unwrap();
        assert!(r.retained_ratio[0] < 1e-8);
        assert!((r.share_ratio[0] - 1.0).abs() < 1e-3, "{:?}", r);
        assert!((r.dr[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn simulated_matches_brute_force() {
        let (model, params) = model1();
        let lower = crate::pool::feasible_box(&model).lower;
        for (lam, p) in [(lower.clone(), 0.9), (vec![1.8, 2.2], 0.95), (vec![1.05, 4.0], 0.99)] {
            let lambdas = LambdaVector::new(lam).unwrap();
            let specs = frechet_layer_specs(&model, &params, &lambdas, p).unwrap();
            let losses = simulate_frechet_losses(&params, 100_000, 11);
            let oracle = brute_force(&losses, &params, &specs, p);
            let pool = build_pool_sample(losses, specs).unwrap();
            let r = dr_simulated(&pool, &params, p).unwrap();
            for i in 0..2 {
                assert!((r.dr[i] - oracle[i]).abs() < 1e-8, "{} vs {}", r.dr[i], oracle[i]);
                assert!((r.dr[i] - r.retained_ratio[i] - r.share_ratio[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn box_lower_bound_regression() {
        // Independent numpy run (m = 1e6, 3 seeds) gives 0.8875 for both
        // participants at p = 0.99; the share term does not vanish here.
        let (model, params) = model1();
        let lambdas = LambdaVector::new(crate::pool::feasible_box(&model).lower).unwrap();
        let specs = frechet_layer_specs(&model, &params, &lambdas, 0.99).unwrap();
        let pool = build_pool_sample(simulate_frechet_losses(&params, 1_000_000, 2), specs).unwrap();
        let r = dr_simulated(&pool, &params, 0.99).unwrap();
        for dr in &r.dr {
            assert!((dr - 0.8875).abs() < 0.01, "{dr}");
        }
    }

    #[test]
    fn frozen_pool_agrees_with_dr_simulated() {
        let (model, params) = model1();
        let frozen = FrozenPool::simulate(&model, params.clone(), 50_000, 8, 0.95).unwrap();
        let lam = vec![1.4, 2.0];
        let a = frozen.evaluate(&lam).unwrap();
        let b = frozen.evaluate(&lam).unwrap();
        assert_eq!(a, b);
        let specs = frechet_layer_specs(&model, &params, &LambdaVector::new(lam).unwrap(), 0.95).unwrap();
        let pool = build_pool_sample(simulate_frechet_losses(&params, 50_000, 8), specs).unwrap();
        let c = dr_simulated(&pool, &params, 0.95).unwrap();
        let d = dr_simulated_columns(pool.losses(), &params, pool.layer_specs(), 0.95).unwrap();
        assert_eq!(c, d);
        for i in 0..2 {
            assert!((a.dr[i] - c.dr[i]).abs() < 1e-12);
        }
        assert!(matches!(frozen.evaluate(&[1.0, 1.0]), Err(Error::DegeneratePool(_))));
    }

    #[test]
    fn empirical_symmetry_and_errors() {
        let xs = frechet_sample(&fr(1.5, 10.0), 600, 4);
        let data = vec![xs.clone(), xs.clone()];
        let lambdas = LambdaVector::new(vec![2.0, 2.0]).unwrap();
        let r = dr_empirical(&data, &[1.5, 1.5], 0.8, &lambdas, 0.9).unwrap();
        assert_eq!(r.dr[0], r.dr[1]);
        assert!(r.dr.iter().all(|&d| d >= 0.0));
        assert!(matches!(
            dr_empirical(&data, &[1.5, 1.5], 0.8, &lambdas, 0.8),
            Err(Error::Domain(_))
        ));
        // attachments far beyond every observation
        assert!(matches!(
            dr_empirical(&data, &[1.5, 1.5], 1e6, &lambdas, 0.9),
            Err(Error::DegeneratePool(_))
        ));
    }

    #[test]
    fn empirical_permutation_permutes_report() {
        let a = frechet_sample(&fr(1.2, 10.0), 800, 1);
        let b = frechet_sample(&fr(1.6, 4.0), 800, 2);
        let c = frechet_sample(&fr(2.0, 7.0), 800, 3);
        let specs = vec![spec(20.0, 60.0), spec(5.0, 9.0), spec(10.0, 40.0)];
        let fwd = build_pool_sample(vec![a.clone(), b.clone(), c.clone()], specs.clone()).unwrap();
        let rev = build_pool_sample(vec![c, b, a], specs.into_iter().rev().collect()).unwrap();
        let f = empirical_report(&fwd, 0.9).unwrap();
        let r = empirical_report(&rev, 0.9).unwrap();
        for i in 0..3 {
            assert!((f.dr[i] - r.dr[2 - i]).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn wider_layer_never_raises_retained(d in 1.0f64..30.0, w1 in 0.0f64..50.0, extra in 0.0f64..50.0, seed in 0u64..1000) {
            let xs = frechet_sample(&fr(1.5, 10.0), 300, seed);
            let other = frechet_sample(&fr(1.5, 10.0), 300, seed + 1);
            let make = |w: f64| build_pool_sample(vec![xs.clone(), other.clone()], vec![spec(d, d + w), spec(5.0, 50.0)]).unwrap();
            if let (Ok(a), Ok(b)) = (empirical_report(&make(w1), 0.9), empirical_report(&make(w1 + extra), 0.9)) {
                prop_assert!(b.retained_ratio[0] <= a.retained_ratio[0] + 1e-15);
            }
        }

        #[test]
        fn decomposition_identity(seed in 0u64..1000, p in 0.81f64..0.99, l1 in 1.01f64..5.0, l2 in 1.01f64..5.0) {
            let data = vec![frechet_sample(&fr(1.2, 3.0), 400, seed), frechet_sample(&fr(2.0, 3.0), 400, seed + 7)];
            let lambdas = LambdaVector::new(vec![l1, l2]).unwrap();
            if let Ok(r) = dr_empirical(&data, &[1.2, 2.0], 0.7, &lambdas, p) {
                for i in 0..2 {
                    prop_assert!((r.dr[i] - r.retained_ratio[i] - r.share_ratio[i]).abs() <= 1e-12);
                    prop_assert!(r.retained_ratio[i] >= 0.0 && r.share_ratio[i] >= 0.0);
                }
            }
        }
    }
}
