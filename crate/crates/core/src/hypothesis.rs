//! Hypothesis tests used to screen loss data: regular variation of the tail,
//! equality of two tail indices, and pairwise independence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::evt::{self, HillEstimate, PooledTailEstimate};
use crate::quad;
use crate::rng::stream_rng;

/// Golden critical values of the limit variable `T`, generated by
/// `catpool rv-critical` and checked in.
pub const GOLDEN_CRITICAL_VALUES: &str = include_str!("../assets/rv_critical_values.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RvTestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub significance: f64,
    pub k: usize,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEquivalenceResult {
    pub statistic: f64,
    pub p_value: f64,
    pub pooled: PooledTailEstimate,
    pub estimates: [HillEstimate; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub coefficient: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationTests {
    pub pearson: Correlation,
    pub spearman: Correlation,
}

/// Regular-variation statistic
/// `k ∫₀¹ ((ln X_(m-⌊kt⌋) - ln X_(m-k)) / γ̂(k) + ln t)² t² dt`.
///
/// `⌊kt⌋` is constant on each `(j/k, (j+1)/k]`, so the integral is a sum of
/// `k` smooth segment integrals; `⌊kt⌋ = 0` reads the sample maximum.
pub fn rv_test_statistic(sample: &[f64], k: usize) -> Result<f64> {
    let sorted = evt::order_statistics(sample)?;
    rv_statistic_sorted(&sorted, k)
}

pub fn rv_statistic_sorted(sorted: &[f64], k: usize) -> Result<f64> {
    let m = sorted.len();
    let hill = evt::hill_from_sorted(sorted, k)?;
    let threshold = evt::order_stat(sorted, m - k);
    let kf = k as f64;
    let mut total = 0.0;
    for j in 0..k {
        let c = (evt::order_stat(sorted, m - j) / threshold).ln() / hill.gamma;
        let a = j as f64 / kf;
        let b = (j + 1) as f64 / kf;
        let seg = quad::integrate(
            |t: f64| {
                let v = c + t.ln();
                v * v * t * t
            },
            a,
            b,
            1e-12,
        );
        total += seg.value;
    }
    Ok(kf * total)
}

/// Compares the statistic at `k` against `critical_value`.
pub fn rv_test(sample: &[f64], k: usize, critical_value: f64, significance: f64) -> Result<RvTestResult> {
    let statistic = rv_test_statistic(sample, k)?;
    Ok(RvTestResult {
        statistic,
        critical_value,
        significance,
        k,
        reject: statistic > critical_value,
    })
}

/// One draw of `T = ∫₀¹ (B(t) + t ln t ∫₀¹ B(s)/s ds)² dt` on a uniform grid.
/// The inner integral starts at the first grid point; both integrals use the
/// trapezoid rule.
fn simulate_limit_once(grid: usize, seed: u64, replicate: u64, bridge: &mut Vec<f64>) -> f64 {
    let mut rng = stream_rng(seed, replicate);
    let h = 1.0 / grid as f64;
    let sd = h.sqrt();
    bridge.clear();
    bridge.push(0.0);
    let mut w = 0.0;
    for _ in 0..grid {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        bridge.push(w);
    }
    let w1 = w;
    for (i, b) in bridge.iter_mut().enumerate() {
        *b -= (i as f64 * h) * w1;
    }
    bridge[grid] = 0.0;

    let mut inner = 0.5 * bridge[1] / h;
    for (i, b) in bridge.iter().enumerate().take(grid).skip(2) {
        inner += b / (i as f64 * h);
    }
    // the s = 1 endpoint contributes B(1) = 0
    inner *= h;

    let mut outer = 0.0;
    for (i, b) in bridge.iter().enumerate().take(grid).skip(1) {
        let t = i as f64 * h;
        let v = b + t * t.ln() * inner;
        outer += v * v;
    }
    outer * h
}

/// Sorted Monte-Carlo draws of the limit variable `T`.
pub fn simulate_rv_limit(grid: usize, replications: usize, seed: u64) -> Result<Vec<f64>> {
    if grid < 2 || replications == 0 {
        return Err(Error::domain("need grid >= 2 and at least one replication"));
    }
    let mut draws: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(grid + 1),
            |buf, r| simulate_limit_once(grid, seed, r, buf),
        )
        .collect();
    draws.sort_by(f64::total_cmp);
    Ok(draws)
}

/// Upper `significance` quantile of sorted draws: rank `⌈(1 - significance) R⌉`,
/// clamped to `[1, R]`.
pub fn upper_quantile(sorted: &[f64], significance: f64) -> Result<f64> {
    if !(significance > 0.0 && significance <= 1.0) {
        return Err(Error::domain(format!(
            "significance must lie in (0, 1], got {significance}"
        )));
    }
    if sorted.is_empty() {
        return Err(Error::domain("no draws"));
    }
    let r = sorted.len();
    let rank = ((1.0 - significance) * r as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, r) - 1])
}

/// Monte-Carlo critical value of `T` at `significance`.
pub fn rv_critical_value(significance: f64, grid: usize, replications: usize, seed: u64) -> Result<f64> {
    let draws = simulate_rv_limit(grid, replications, seed)?;
    upper_quantile(&draws, significance)
}

/// Parsed golden critical-value table.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub grid: usize,
    pub replications: usize,
    pub seed: u64,
    /// significance → critical value
    pub values: BTreeMap<String, f64>,
}

impl CriticalValueTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = None;
        let mut replications = None;
        let mut seed = None;
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |_| Error::Parse(format!("line {}: bad value `{value}`", n + 1));
            match key {
                "grid" => grid = Some(value.parse().map_err(bad)?),
                "replications" => replications = Some(value.parse().map_err(bad)?),
                "seed" => seed = Some(value.parse().map_err(bad)?),
                level => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad value `{value}`", n + 1)))?;
                    values.insert(level.to_string(), v);
                }
            }
        }
        let missing = |k: &str| Error::Parse(format!("critical-value table lacks `{k}`"));
        Ok(Self {
            grid: grid.ok_or_else(|| missing("grid"))?,
            replications: replications.ok_or_else(|| missing("replications"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            values,
        })
    }

    pub fn golden() -> Self {
        Self::parse(GOLDEN_CRITICAL_VALUES).expect("bundled critical-value table parses")
    }

    /// Critical value at a significance level written as in the table (`"0.01"`).
    pub fn get(&self, significance: &str) -> Option<f64> {
        self.values.get(significance).copied()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# Monte-Carlo upper quantiles of the Brownian-bridge limit T\n");
        out.push_str("# significance = critical value\n");
        let _ = writeln!(out, "grid = {}", self.grid);
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "seed = {}", self.seed);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v:.6}");
        }
        out
    }
}

/// Builds a table for the given significance levels from one simulation.
pub fn critical_value_table(
    levels: &[f64],
    grid: usize,
    replications: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    let draws = simulate_rv_limit(grid, replications, seed)?;
    let mut values = BTreeMap::new();
    for &level in levels {
        values.insert(format!("{level}"), upper_quantile(&draws, level)?);
    }
    Ok(CriticalValueTable {
        grid,
        replications,
        seed,
        values,
    })
}

/// `P(χ²₁ > x)`.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    erfc((x / 2.0).sqrt())
}

/// `x` with `P(χ²₁ > x) = p`.
pub fn chi2_1_isf(p: f64) -> f64 {
    let r = erfc_inv(p);
    2.0 * r * r
}

/// Two-sample tail-equivalence test: `Σ k_i (γ̂_i - γ̂_pool)² / γ̂_i²` against χ²₁.
pub fn tail_equivalence_test(samples: (&[f64], &[f64]), ks: (usize, usize)) -> Result<TailEquivalenceResult> {
    let e1 = evt::hill_estimate(samples.0, ks.0)?;
    let e2 = evt::hill_estimate(samples.1, ks.1)?;
    tail_equivalence_from_estimates([e1, e2])
}

pub fn tail_equivalence_from_estimates(estimates: [HillEstimate; 2]) -> Result<TailEquivalenceResult> {
    let pooled = evt::pooled_tail_estimate(&estimates)?;
    let statistic: f64 = estimates
        .iter()
        .map(|e| e.k as f64 * (e.gamma - pooled.gamma_pool).powi(2) / (e.gamma * e.gamma))
        .sum();
    Ok(TailEquivalenceResult {
        statistic,
        p_value: chi2_1_sf(statistic),
        pooled,
        estimates,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties receiving their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn t_test(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Pearson and Spearman coefficients with two-sided t-approximation p-values.
pub fn correlation_tests(x: &[f64], y: &[f64]) -> Result<CorrelationTests> {
    if x.len() != y.len() {
        return Err(Error::domain("correlation inputs differ in length"));
    }
    if x.len() < 3 {
        return Err(Error::domain("correlation tests need at least 3 pairs"));
    }
    let r = pearson(x, y)?;
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    Ok(CorrelationTests {
        pearson: Correlation {
            coefficient: r,
            p_value: t_test(r, x.len()),
        },
        spearman: Correlation {
            coefficient: rho,
            p_value: t_test(rho, x.len()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{frechet_sample, FrechetParams};

    /// Closed form of `∫_a^b (c + ln t)² t² dt`.
    fn segment_closed_form(c: f64, a: f64, b: f64) -> f64 {
        let anti = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let l = t.ln();
            let t3 = t * t * t;
            c * c * t3 / 3.0 + 2.0 * c * (t3 * l / 3.0 - t3 / 9.0) + (t3 * l * l / 3.0 - 2.0 * t3 * l / 9.0 + 2.0 * t3 / 27.0)
        };
        anti(b) - anti(a)
    }

    fn statistic_closed_form(sample: &[f64], k: usize) -> f64 {
        let sorted = evt::order_statistics(sample).unwrap();
        let m = sorted.len();
        let gamma = evt::hill_from_sorted(&sorted, k).unwrap().gamma;
        let lt = sorted[m - k - 1].ln();
        let kf = k as f64;
        kf * (0..k)
            .map(|j| {
                let c = (sorted[m - j - 1].ln() - lt) / gamma;
                segment_closed_form(c, j as f64 / kf, (j + 1) as f64 / kf)
            })
            .sum::<f64>()
    }

    #[test]
    fn statistic_matches_closed_form() {
        for (alpha, k) in [(1.0, 50), (3.0, 200), (0.6, 10)] {
            let xs = frechet_sample(&FrechetParams::new(alpha, 1.0).unwrap(), 2_000, 17);
            let s = rv_test_statistic(&xs, k).unwrap();
            let oracle = statistic_closed_form(&xs, k);
            assert!((s - oracle).abs() < 1e-9 * oracle.max(1.0), "{s} vs {oracle}");
            assert!(s >= 0.0);
        }
    }

    #[test]
    fn statistic_near_zero_for_exact_pareto_spacings() {
        // log X_(m-j) - log X_(m-k) = -g log(max(j,1)/k)
        let k = 400;
        let g = 0.5;
        let mut xs: Vec<f64> = (0..=k)
            .map(|j| (-g * ((j.max(1) as f64) / k as f64).ln()).exp())
            .collect();
        xs.extend(std::iter::repeat(0.5).take(600));
        let s = rv_test_statistic(&xs, k).unwrap();
        assert!(s < 0.05, "{s}");
    }

    #[test]
    fn statistic_is_scale_invariant() {
        let xs = frechet_sample(&FrechetParams::new(2.0, 1.0).unwrap(), 3_000, 4);
        let base = rv_test_statistic(&xs, 300).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * 37.5).collect();
        let s = rv_test_statistic(&scaled, 300).unwrap();
        assert!((s - base).abs() <= 1e-12 * base);
        // power-of-two factors leave every ratio bit-identical
        for c in [0.25, 1024.0] {
            let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
            assert_eq!(rv_test_statistic(&scaled, 300).unwrap(), base);
        }
    }

    #[test]
    fn statistic_rejects_nonpositive_tail() {
        let xs = [0.0, 0.0, 0.0, 1.0, 2.0];
        assert!(rv_test_statistic(&xs, 3).is_err());
    }

    #[test]
    fn quantile_plumbing() {
        let draws = simulate_rv_limit(1_000, 2_000, 3).unwrap();
        assert_eq!(upper_quantile(&draws, 1.0).unwrap(), draws[0]);
        assert!(draws.iter().all(|&t| t > 0.0));
        let mut last = f64::INFINITY;
        for s in [0.01, 0.05, 0.1, 0.25, 0.5] {
            let q = upper_quantile(&draws, s).unwrap();
            assert!(q <= last);
            last = q;
        }
        assert!(upper_quantile(&draws, 0.0).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        assert_eq!(
            simulate_rv_limit(1_000, 200, 9).unwrap(),
            simulate_rv_limit(1_000, 200, 9).unwrap()
        );
    }

    #[test]
    fn golden_table_parses_and_round_trips() {
        let table = CriticalValueTable::golden();
        assert!(table.get("0.01").unwrap() > table.get("0.05").unwrap());
        let again = CriticalValueTable::parse(&table.render()).unwrap();
        assert_eq!(again.grid, table.grid);
        for (k, v) in &table.values {
            assert!((again.values[k] - v).abs() < 1e-6);
        }
    }

    #[test]
    fn equivalence_examples() {
        let e = |gamma: f64, k: usize| HillEstimate { gamma, alpha: 1.0 / gamma, k, m: 1000 };
        let r = tail_equivalence_from_estimates([e(1.0, 100), e(2.0, 100)]).unwrap();
        assert!((r.pooled.gamma_pool - 1.2).abs() < 1e-12);
        assert!((r.statistic - 20.0).abs() < 1e-9);

        let xs = frechet_sample(&FrechetParams::new(2.0, 1.0).unwrap(), 1_000, 1);
        let scaled: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
        let r = tail_equivalence_test((&xs, &scaled), (100, 100)).unwrap();
        assert!(r.statistic.abs() < 1e-20);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi2_round_trip() {
        for p in [0.9, 0.5, 0.05, 0.01, 1e-4, 1e-8] {
            let x = chi2_1_isf(p);
            assert!((chi2_1_sf(x) - p).abs() < 1e-8 * p.max(1e-3), "p={p}");
        }
        // 95% point of chi-square(1)
        assert!((chi2_1_isf(0.05) - 3.841_458_820_694_124).abs() < 1e-9);
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.5, 4.0, 10.0];
        let r = correlation_tests(&x, &x).unwrap();
        assert!((r.pearson.coefficient - 1.0).abs() < 1e-15);
        assert!((r.spearman.coefficient - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = correlation_tests(&x, &y).unwrap();
        assert!((r.pearson.coefficient + 1.0).abs() < 1e-15);
        assert!((r.spearman.coefficient + 1.0).abs() < 1e-15);
        assert!(correlation_tests(&x, &[1.0; 5]).is_err());
        assert!(correlation_tests(&x[..2], &x[..2]).is_err());
    }

    #[test]
    fn correlation_reference_values() {
        // Computed independently: scipy.stats.pearsonr / spearmanr.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let y = [2.0, 1.0, 4.0, 3.0, 7.0, 8.0, 5.0, 6.0];
        let r = correlation_tests(&x, &y).unwrap();
        assert!((r.pearson.coefficient - 0.761_904_761_904_762).abs() < 1e-12);
        assert!((r.pearson.p_value - 0.028_004_939_153_071_9).abs() < 1e-9);
    }

    #[test]
    fn average_ranks_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }
}
