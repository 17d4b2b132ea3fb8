//! Extreme-value estimators over a single loss sample.
//!
//! Order statistics follow the 1-based convention `X_(1) ≤ … ≤ X_(m)`, stored
//! as `sorted[j - 1]`. Every index computation in this module goes through
//! [`order_stat`].

use serde::Serialize;

use crate::error::{Error, Result};

/// Share of the sample used for `k` and `h` when the caller does not choose.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

/// Sorted copy of the sample (stable for ties).
pub fn order_statistics(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::domain("order statistics of an empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("sample contains NaN"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// `X_(j)` from an ascending sample, `1 ≤ j ≤ m`.
#[inline]
pub fn order_stat(sorted: &[f64], j: usize) -> f64 {
    debug_assert!(j >= 1 && j <= sorted.len());
    sorted[j - 1]
}

/// `⌊fraction · m⌋`, at least 1.
pub fn default_tail_count(m: usize) -> usize {
    ((DEFAULT_TAIL_FRACTION * m as f64).floor() as usize).max(1)
}

/// Drops observations `≤ 0`, returning the kept values and how many were removed.
pub fn strip_nonpositive(sample: &[f64]) -> (Vec<f64>, usize) {
    let kept: Vec<f64> = sample.iter().copied().filter(|&x| x > 0.0).collect();
    let removed = sample.len() - kept.len();
    (kept, removed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillEstimate {
    /// Inverse tail index `γ̂`.
    pub gamma: f64,
    /// Tail index `α̂ = 1/γ̂`.
    pub alpha: f64,
    pub k: usize,
    pub m: usize,
}

/// Hill estimator on an ascending sample.
pub fn hill_from_sorted(sorted: &[f64], k: usize) -> Result<HillEstimate> {
    let m = sorted.len();
    if k == 0 || k >= m {
        return Err(Error::domain(format!("Hill needs 1 <= k < m, got k={k}, m={m}")));
    }
    let threshold = order_stat(sorted, m - k);
    if !(threshold > 0.0) {
        return Err(Error::domain(format!(
            "threshold order statistic X_(m-k) = {threshold} is not positive"
        )));
    }
    // log of the ratio so that rescaling by a power of two is exact
    let gamma = (1..=k)
        .map(|j| (order_stat(sorted, m - j + 1) / threshold).ln())
        .sum::<f64>()
        / k as f64;
    if gamma <= 0.0 {
        return Err(Error::InfiniteTailIndex { k });
    }
    Ok(HillEstimate {
        gamma,
        alpha: 1.0 / gamma,
        k,
        m,
    })
}

/// Hill estimator `γ̂ = (1/k) Σ_{j=1}^{k} (ln X_(m-j+1) - ln X_(m-k))`.
pub fn hill_estimate(sample: &[f64], k: usize) -> Result<HillEstimate> {
    hill_from_sorted(&order_statistics(sample)?, k)
}

/// Hill estimates over a range of `k`, sorting once. Values of `k` that fail
/// (tied tops, nonpositive threshold) are skipped.
pub fn hill_sweep(sample: &[f64], ks: impl IntoIterator<Item = usize>) -> Result<Vec<HillEstimate>> {
    let sorted = order_statistics(sample)?;
    Ok(ks
        .into_iter()
        .filter_map(|k| hill_from_sorted(&sorted, k).ok())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledTailEstimate {
    pub gamma_pool: f64,
    pub alpha_pool: f64,
    pub weights: Vec<f64>,
}

/// Inverse-variance weighted combination of Hill estimates, with
/// `Σ = diag(γ̂_i² / k_i)` so `w_i ∝ k_i / γ̂_i²`.
pub fn pooled_tail_estimate(estimates: &[HillEstimate]) -> Result<PooledTailEstimate> {
    if estimates.len() < 2 {
        return Err(Error::domain("pooling needs at least two estimates"));
    }
    if estimates.iter().any(|e| !(e.gamma > 0.0)) {
        return Err(Error::domain("pooled estimator needs positive inverse tail indices"));
    }
    let precision: Vec<f64> = estimates
        .iter()
        .map(|e| e.k as f64 / (e.gamma * e.gamma))
        .collect();
    let total: f64 = precision.iter().sum();
    let weights: Vec<f64> = precision.iter().map(|p| p / total).collect();
    let gamma_pool: f64 = weights.iter().zip(estimates).map(|(w, e)| w * e.gamma).sum();
    Ok(PooledTailEstimate {
        gamma_pool,
        alpha_pool: 1.0 / gamma_pool,
        weights,
    })
}

/// Empirical relative tail scale: exceedances of `sample_i` over the
/// reference's `X_(m-h)`, divided by the reference's own exceedance count.
pub fn scale_estimate(sample_i: &[f64], sample_ref: &[f64], h: usize) -> Result<f64> {
    let m = sample_ref.len();
    if sample_i.len() != m {
        return Err(Error::domain(format!(
            "samples differ in length ({} vs {m})",
            sample_i.len()
        )));
    }
    if h == 0 || h >= m {
        return Err(Error::domain(format!("need 1 <= h < m, got h={h}, m={m}")));
    }
    let sorted_ref = order_statistics(sample_ref)?;
    let threshold = order_stat(&sorted_ref, m - h);
    let count = |xs: &[f64]| xs.iter().filter(|&&x| x >= threshold).count();
    let denominator = count(sample_ref);
    if denominator == 0 {
        return Err(Error::Degenerate("no reference exceedances".into()));
    }
    Ok(count(sample_i) as f64 / denominator as f64)
}

/// `θ̂` for each `h` in turn, sorting the reference once.
pub fn scale_sweep(
    sample_i: &[f64],
    sample_ref: &[f64],
    hs: impl IntoIterator<Item = usize>,
) -> Result<Vec<(usize, f64)>> {
    let m = sample_ref.len();
    if sample_i.len() != m {
        return Err(Error::domain("samples differ in length"));
    }
    let sorted_ref = order_statistics(sample_ref)?;
    let sorted_i = order_statistics(sample_i)?;
    let exceed = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&x| x < t);
    Ok(hs
        .into_iter()
        .filter(|&h| h >= 1 && h < m)
        .map(|h| {
            let t = order_stat(&sorted_ref, m - h);
            (h, exceed(&sorted_i, t) as f64 / exceed(&sorted_ref, t) as f64)
        })
        .collect())
}

/// EVT quantile extrapolation from the `⌊0.8m⌋`-th order statistic:
/// `X_(⌊0.8m⌋) · (0.2 / (1 - p))^(1/α̂)` for `p ∈ (0.8, 1)`.
pub fn evt_var(sample: &[f64], alpha_hat: f64, p: f64) -> Result<f64> {
    evt_var_sorted(&order_statistics(sample)?, alpha_hat, p)
}

pub fn evt_var_sorted(sorted: &[f64], alpha_hat: f64, p: f64) -> Result<f64> {
    if !(p > 0.8 && p < 1.0) {
        return Err(Error::domain(format!(
            "EVT extrapolation needs 0.8 < p < 1, got {p}"
        )));
    }
    if !(alpha_hat > 0.0) {
        return Err(Error::domain("tail index must be positive"));
    }
    let anchor_rank = (0.8 * sorted.len() as f64).floor() as usize;
    if anchor_rank == 0 {
        return Err(Error::domain("sample too small for the 0.8 anchor"));
    }
    let anchor = order_stat(sorted, anchor_rank);
    Ok(anchor * (0.2 / (1.0 - p)).powf(1.0 / alpha_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{frechet_quantile, frechet_sample, FrechetParams};

    #[test]
    fn order_statistics_examples() {
        assert_eq!(order_statistics(&[3.0, 1.0, 2.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(order_statistics(&[5.0; 3]).unwrap(), vec![5.0; 3]);
        assert!(order_statistics(&[]).is_err());
    }

    #[test]
    fn order_statistics_is_a_sorted_permutation() {
        let xs = frechet_sample(&FrechetParams::new(1.0, 1.0).unwrap(), 10_000, 9);
        let sorted = order_statistics(&xs).unwrap();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        // multiset equality via bit patterns
        let mut a: Vec<u64> = xs.iter().map(|x| x.to_bits()).collect();
        let mut b: Vec<u64> = sorted.iter().map(|x| x.to_bits()).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn hill_hand_example() {
        let h = hill_estimate(&[1.0, 2.0, 4.0, 8.0], 2).unwrap();
        let gamma = 1.5 * 2f64.ln();
        assert!((h.gamma - gamma).abs() < 1e-12);
        assert!((h.alpha - 1.0 / gamma).abs() < 1e-12);
        assert!((h.alpha - 0.9618).abs() < 1e-4);
        assert!((h.alpha * h.gamma - 1.0).abs() < 1e-12);
        assert_eq!((h.k, h.m), (2, 4));
    }

    #[test]
    fn hill_errors() {
        assert!(matches!(
            hill_estimate(&[1.0, 3.0, 3.0, 3.0], 2),
            Err(Error::InfiniteTailIndex { k: 2 })
        ));
        assert!(matches!(hill_estimate(&[0.0, 0.0, 4.0, 8.0], 2), Err(Error::Domain(_))));
        assert!(hill_estimate(&[1.0, 2.0], 2).is_err());
        assert!(hill_estimate(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn hill_recovers_frechet_index() {
        let xs = frechet_sample(&FrechetParams::new(8.5, 1.0).unwrap(), 1_000_000, 11);
        let h = hill_estimate(&xs, 10_000).unwrap();
        assert!((h.alpha / 8.5 - 1.0).abs() < 0.05, "{}", h.alpha);
    }

    #[test]
    fn hill_is_scale_invariant() {
        let xs = frechet_sample(&FrechetParams::new(2.0, 1.0).unwrap(), 2_000, 5);
        let base = hill_estimate(&xs, 200).unwrap();
        for c in [1e-3, 0.5, 7.0, 1e6] {
            let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
            let h = hill_estimate(&scaled, 200).unwrap();
            assert!((h.alpha - base.alpha).abs() < 1e-10 * base.alpha);
        }
    }

    #[test]
    fn pooled_examples() {
        let e = |gamma: f64, k: usize| HillEstimate { gamma, alpha: 1.0 / gamma, k, m: 10 * k };
        let p = pooled_tail_estimate(&[e(0.7, 30), e(0.7, 90)]).unwrap();
        assert!((p.gamma_pool - 0.7).abs() < 1e-15);

        let p = pooled_tail_estimate(&[e(1.0, 100), e(2.0, 100)]).unwrap();
        assert!((p.weights[0] - 0.8).abs() < 1e-12);
        assert!((p.weights[1] - 0.2).abs() < 1e-12);
        assert!((p.gamma_pool - 1.2).abs() < 1e-12);
        assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // invariance under common rescaling of k
        let q = pooled_tail_estimate(&[e(1.0, 300), e(2.0, 300)]).unwrap();
        assert!((q.weights[0] - p.weights[0]).abs() < 1e-15);

        assert!(pooled_tail_estimate(&[e(1.0, 10)]).is_err());
        assert!(pooled_tail_estimate(&[e(1.0, 10), e(-1.0, 10)]).is_err());
    }

    #[test]
    fn scale_examples() {
        let xs = frechet_sample(&FrechetParams::new(1.0, 1.0).unwrap(), 500, 3);
        for h in [1, 10, 55, 499] {
            assert_eq!(scale_estimate(&xs, &xs, h).unwrap(), 1.0);
        }
        let zeros = vec![0.0; 500];
        assert_eq!(scale_estimate(&zeros, &xs, 50).unwrap(), 0.0);
        assert!(scale_estimate(&xs[..10], &xs, 5).is_err());
        assert!(scale_estimate(&xs, &xs, 500).is_err());
    }

    #[test]
    fn scale_sweep_matches_pointwise() {
        let a = frechet_sample(&FrechetParams::new(1.0, 1.0).unwrap(), 400, 1);
        let b = frechet_sample(&FrechetParams::new(1.0, 0.6).unwrap(), 400, 2);
        let sweep = scale_sweep(&b, &a, 1..400).unwrap();
        for (h, v) in sweep {
            assert_eq!(v, scale_estimate(&b, &a, h).unwrap());
        }
    }

    #[test]
    fn evt_var_examples() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let anchor = 80.0;
        let v = evt_var(&xs, 3.0, 0.8 + 1e-12).unwrap();
        assert!((v - anchor).abs() < 1e-8);
        let v = evt_var(&xs, 1.0, 0.98).unwrap();
        assert!((v - 10.0 * anchor).abs() < 1e-9);
        assert!(evt_var(&xs, 1.0, 0.8).is_err());
        assert!(evt_var(&xs, 1.0, 1.0).is_err());
    }

    #[test]
    fn evt_var_tracks_frechet_quantile() {
        let params = FrechetParams::new(8.5, 100.0).unwrap();
        let xs = frechet_sample(&params, 1_000_000, 4);
        let v = evt_var(&xs, 8.5, 0.999).unwrap();
        let q = frechet_quantile(&params, 0.999).unwrap();
        assert!((v / q - 1.0).abs() < 0.05, "{v} vs {q}");
    }

    #[test]
    fn evt_var_monotone_in_p() {
        let xs = frechet_sample(&FrechetParams::new(1.5, 1.0).unwrap(), 1_000, 8);
        let sorted = order_statistics(&xs).unwrap();
        let mut last = 0.0;
        for i in 1..200 {
            let p = 0.8 + 0.2 * i as f64 / 200.0;
            let v = evt_var_sorted(&sorted, 1.5, p).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn hill_median_consistency() {
        for alpha in [0.6, 2.0, 8.5] {
            let params = FrechetParams::new(alpha, 1.0).unwrap();
            let mut estimates: Vec<f64> = (0..50)
                .map(|seed| hill_estimate(&frechet_sample(&params, 100_000, seed), 1_000).unwrap().alpha)
                .collect();
            estimates.sort_by(f64::total_cmp);
            let median = 0.5 * (estimates[24] + estimates[25]);
            assert!((median / alpha - 1.0).abs() < 0.03, "alpha={alpha} median={median}");
        }
    }
}
