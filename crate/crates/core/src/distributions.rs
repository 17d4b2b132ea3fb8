//! Fréchet distribution primitives.
//!
//! `F(x) = exp(-(x/s)^(-α))` for `x > 0` is the regularly varying family used
//! as ground truth for every simulation in the crate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::LayerSpec;
use crate::quad;
use crate::rng::{open_unit, stream_rng};

/// Draws per independent substream when sampling in parallel.
const SAMPLE_CHUNK: usize = 1 << 16;

/// Shape (tail index) and scale of a Fréchet law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetParams {
    alpha: f64,
    scale: f64,
}

impl FrechetParams {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("Fréchet alpha must be positive, got {alpha}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!("Fréchet scale must be positive, got {scale}")));
        }
        Ok(Self { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        frechet_cdf(self, x)
    }

    /// `1 - F(x)`, accurate far into the tail.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        -(-(x / self.scale).powf(-self.alpha)).exp_m1()
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        frechet_quantile(self, p)
    }
}

/// Distribution function; zero on the nonpositive half-line.
pub fn frechet_cdf(params: &FrechetParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-(x / params.scale).powf(-params.alpha)).exp()
}

/// Closed-form quantile `s (-ln p)^(-1/α)` for `p ∈ (0, 1)`.
pub fn frechet_quantile(params: &FrechetParams, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    Ok(params.scale * (-p.ln()).powf(-1.0 / params.alpha))
}

/// `count` inverse-transform draws. Output depends only on `(params, count, seed)`,
/// not on the size of the thread pool.
pub fn frechet_sample(params: &FrechetParams, count: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    let inv_alpha = -1.0 / params.alpha;
    let scale = params.scale;
    out.par_chunks_mut(SAMPLE_CHUNK)
        .enumerate()
        .for_each(|(chunk, slot)| {
            let mut rng = stream_rng(seed, chunk as u64);
            for x in slot.iter_mut() {
                let u = open_unit(&mut rng);
                *x = scale * (-u.ln()).powf(inv_alpha);
            }
        });
    out
}

/// `E[Y] = ∫_d^l (1 - F(x)) dx` for the layer `(d, l)`, by adaptive quadrature
/// to an absolute tolerance of `1e-10 (l - d)`.
pub fn frechet_layer_expectation(params: &FrechetParams, layer: &LayerSpec) -> f64 {
    let (d, l) = (layer.attachment(), layer.limit());
    let width = l - d;
    if width <= 0.0 {
        return 0.0;
    }
    // Geometric panels keep the quadrature from stepping over mass that sits
    // near the attachment of a very wide layer.
    let mut total = 0.0;
    let mut a = d;
    while a < l {
        let b = if a > 0.0 { (2.0 * a).min(l) } else { l };
        total += quad::integrate(|x| params.survival(x), a, b, 1e-10 * (b - a)).value;
        a = b;
    }
    total.clamp(0.0, width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(alpha: f64, scale: f64) -> FrechetParams {
        FrechetParams::new(alpha, scale).unwrap()
    }

    /// Inverts the CDF by bisection; independent of the closed-form quantile.
    fn bisect_quantile(params: &FrechetParams, p: f64) -> f64 {
        let (mut lo, mut hi) = (1e-300_f64, 1.0_f64);
        while frechet_cdf(params, hi) < p {
            hi *= 2.0;
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if frechet_cdf(params, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Composite Simpson with `panels` panels.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let n = panels + panels % 2;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(FrechetParams::new(0.0, 1.0).is_err());
        assert!(FrechetParams::new(1.0, -2.0).is_err());
        assert!(FrechetParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert!((frechet_cdf(&fr(8.5, 100.0), 100.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(frechet_cdf(&fr(8.5, 100.0), 0.0), 0.0);
        assert_eq!(frechet_cdf(&fr(8.5, 100.0), -3.0), 0.0);
        let v = frechet_cdf(&fr(1.0, 2.0), 4.0);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.606531).abs() < 1e-6);
        // cross-check by numerical inversion
        assert!((bisect_quantile(&fr(1.0, 2.0), v) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn quantile_examples() {
        let q = frechet_quantile(&fr(8.5, 100.0), (-1f64).exp()).unwrap();
        assert!((q - 100.0).abs() < 1e-12);
        let q = frechet_quantile(&fr(1.0, 1.0), 0.5).unwrap();
        assert!((q - 1.0 / 2f64.ln()).abs() < 1e-14);
        assert!((q - 1.442695).abs() < 1e-6);
        let params = fr(9.0, 100.0);
        let q = frechet_quantile(&params, 0.99).unwrap();
        assert!((q - bisect_quantile(&params, 0.99)).abs() < 1e-10);
    }

    #[test]
    fn quantile_domain() {
        let params = fr(2.0, 1.0);
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(frechet_quantile(&params, p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_inverts_cdf_on_grid() {
        for alpha in [0.5, 1.0, 2.0, 8.5, 9.0] {
            for scale in [1.0, 90.0, 100.0] {
                let params = fr(alpha, scale);
                for x in [0.3, 0.9, 1.0, 2.5, 10.0, 77.0, 150.0].map(|f| f * scale) {
                    let p = frechet_cdf(&params, x);
                    // ln p loses digits once 1 - p is tiny; that is conditioning, not error
                    if p <= 0.0 || p >= 1.0 - 1e-6 {
                        continue;
                    }
                    let back = frechet_quantile(&params, p).unwrap();
                    assert!(((back - x) / x).abs() < 1e-10, "alpha={alpha} s={scale} x={x} back={back}");
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = fr(3.0, 7.0);
        assert_eq!(frechet_sample(&params, 5, 7), frechet_sample(&params, 5, 7));
        assert_ne!(frechet_sample(&params, 5, 7), frechet_sample(&params, 5, 8));
        let long = frechet_sample(&params, SAMPLE_CHUNK + 10, 7);
        assert_eq!(&long[..5], &frechet_sample(&params, 5, 7)[..]);
    }

    #[test]
    fn sample_quantile_matches_closed_form() {
        let params = fr(8.5, 100.0);
        let mut xs = frechet_sample(&params, 1_000_000, 1);
        let k = (0.8 * xs.len() as f64) as usize - 1;
        let (_, q, _) = xs.select_nth_unstable_by(k, f64::total_cmp);
        let exact = frechet_quantile(&params, 0.8).unwrap();
        assert!(((*q - exact) / exact).abs() < 0.01);
    }

    #[test]
    fn sample_ecdf_matches_cdf() {
        let params = fr(2.0, 1.0);
        let xs = frechet_sample(&params, 1_000_000, 2);
        let ecdf = xs.iter().filter(|&&x| x <= 1.0).count() as f64 / xs.len() as f64;
        assert!((ecdf - (-1f64).exp()).abs() < 0.005);
    }

    #[test]
    fn layer_expectation_examples() {
        let layer = LayerSpec::new(50.0, 50.0).unwrap();
        assert_eq!(frechet_layer_expectation(&fr(2.0, 1.0), &layer), 0.0);

        let params = fr(8.5, 100.0);
        let layer = LayerSpec::new(10.0, 20.0).unwrap();
        let v = frechet_layer_expectation(&params, &layer);
        let oracle = simpson(|x| params.survival(x), 10.0, 20.0, 1_000_000);
        assert!(v > 0.0 && v <= 10.0);
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");

        let params = fr(0.5, 1.0);
        let layer = LayerSpec::new(1.0, 2.0).unwrap();
        let v = frechet_layer_expectation(&params, &layer);
        let oracle = simpson(|x| params.survival(x), 1.0, 2.0, 1_000_000);
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn layer_expectation_over_wide_layer() {
        // Layers in the optimizer can be 1e4 wide in the far tail.
        let params = fr(9.0, 100.0);
        let layer = LayerSpec::new(80.0, 80.0 * 1e4).unwrap();
        let v = frechet_layer_expectation(&params, &layer);
        let oracle = simpson(|x| params.survival(x), 80.0, 8000.0, 2_000_000)
            + simpson(|x| params.survival(x), 8000.0, 800_000.0, 2_000_000);
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn regular_variation_ratio() {
        for alpha in [0.5, 2.0, 8.5] {
            let params = fr(alpha, 3.0);
            let t = frechet_quantile(&params, 1.0 - 1e-6).unwrap();
            for x in [0.5, 2.0, 4.0] {
                let ratio = params.survival(t * x) / params.survival(t);
                let target = x.powf(-alpha);
                assert!(((ratio - target) / target).abs() < 1e-3);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn layer_expectation_monotone(
                d in 0.0f64..200.0, w1 in 0.0f64..100.0, w2 in 0.0f64..100.0, shift in 0.0f64..50.0
            ) {
                let params = fr(2.0, 50.0);
                let base = frechet_layer_expectation(&params, &LayerSpec::new(d, d + w1).unwrap());
                let wider = frechet_layer_expectation(&params, &LayerSpec::new(d, d + w1 + w2).unwrap());
                prop_assert!(wider >= base - 1e-9 * (w1 + w2 + 1.0));
                let higher = if shift <= w1 {
                    frechet_layer_expectation(&params, &LayerSpec::new(d + shift, d + w1).unwrap())
                } else { 0.0 };
                prop_assert!(higher <= base + 1e-9 * (w1 + 1.0));
            }

            #[test]
            fn cdf_monotone(a in 0.1f64..10.0, x in 0.0f64..1e3, dx in 0.0f64..1e3) {
                let params = fr(a, 10.0);
                prop_assert!(frechet_cdf(&params, x + dx) >= frechet_cdf(&params, x));
            }
        }
    }
}
