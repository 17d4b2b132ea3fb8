//! Layer losses, premiums and the asymptotic theory of the optimal pool.
//!
//! Participants are indexed from 0 here; participant 0 always carries the
//! heaviest tail and unit relative scale (`θ₀ = 1`).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::FrechetParams;
use crate::error::{Error, Result};

/// Below this distance from 1 the factor `(λ^(1-α) - 1)/(1 - α)` is replaced
/// by its limit `ln λ`.
pub const UNIT_ALPHA_EPS: f64 = 1e-9;

/// Relative tolerance under which two tail indices are treated as equal when
/// normalising a model from raw tail constants.
pub const TAIL_INDEX_TIE: f64 = 1e-12;

/// Coverage of the slice of a loss between `attachment` and `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    attachment: f64,
    limit: f64,
}

impl LayerSpec {
    pub fn new(attachment: f64, limit: f64) -> Result<Self> {
        if !(attachment >= 0.0) || !(limit >= attachment) || !limit.is_finite() {
            return Err(Error::domain(format!(
                "layer needs 0 <= attachment <= limit < inf, got ({attachment}, {limit})"
            )));
        }
        Ok(Self { attachment, limit })
    }

    pub fn attachment(&self) -> f64 {
        self.attachment
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn width(&self) -> f64 {
        self.limit - self.attachment
    }
}

/// Loss ceded to the pool for a ground-up loss `x`.
#[inline]
pub fn layer_loss(x: f64, layer: &LayerSpec) -> f64 {
    if x < layer.attachment {
        0.0
    } else if x < layer.limit {
        x - layer.attachment
    } else {
        layer.limit - layer.attachment
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Premiums {
    /// `P_i = E[Y_i] / E[S] · VaR_p(S)`.
    pub shares: Vec<f64>,
    /// `η = VaR_p(S) / E[S] - 1`.
    pub loading: f64,
}

/// Mean-proportional split of the pool's VaR.
pub fn premium_shares(expected_layers: &[f64], var_of_pool: f64) -> Result<Premiums> {
    if expected_layers.iter().any(|&e| !(e >= 0.0)) || !(var_of_pool >= 0.0) {
        return Err(Error::domain("expected layers and pool VaR must be nonnegative"));
    }
    let total: f64 = expected_layers.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegeneratePool(
            "every expected layer loss is zero".into(),
        ));
    }
    Ok(Premiums {
        shares: expected_layers
            .iter()
            .map(|e| e / total * var_of_pool)
            .collect(),
        loading: var_of_pool / total - 1.0,
    })
}

/// Tail indices `α_i`, relative scales `θ_i` and the attachment multiplier `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    alphas: Vec<f64>,
    thetas: Vec<f64>,
    xi: f64,
    /// `original_index[i]` is the caller's index of participant `i`.
    original_index: Vec<usize>,
}

impl TailModel {
    /// Builds an already-normalised model and checks every invariant.
    pub fn new(alphas: Vec<f64>, thetas: Vec<f64>, xi: f64) -> Result<Self> {
        let n = alphas.len();
        Self::validated(alphas, thetas, xi, (0..n).collect())
    }

    /// Normalises raw tail constants `c_i` (with `1 - F_i(t) ~ c_i t^(-α_i)`):
    /// participants are reordered so that index 0 has the smallest tail index
    /// and, among ties, the largest constant; then `θ_i = c_i / c_0` on ties
    /// and 0 for lighter tails.
    pub fn from_tail_constants(alphas: &[f64], constants: &[f64], xi: f64) -> Result<Self> {
        if alphas.len() != constants.len() {
            return Err(Error::domain("alphas and tail constants differ in length"));
        }
        if alphas.is_empty() {
            return Err(Error::domain("a pool needs at least one participant"));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite()))
            || constants.iter().any(|&c| !(c > 0.0 && c.is_finite()))
        {
            return Err(Error::domain("tail indices and constants must be positive"));
        }
        let alpha_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let heavy = |a: f64| (a - alpha_min).abs() <= TAIL_INDEX_TIE * alpha_min;
        let reference = (0..alphas.len())
            .filter(|&i| heavy(alphas[i]))
            .max_by(|&i, &j| constants[i].total_cmp(&constants[j]).then(j.cmp(&i)))
            .expect("at least one participant attains the minimum");
        let mut order = vec![reference];
        order.extend((0..alphas.len()).filter(|&i| i != reference));
        let c0 = constants[reference];
        let new_alphas = order
            .iter()
            .map(|&i| if heavy(alphas[i]) { alpha_min } else { alphas[i] })
            .collect();
        let thetas = order
            .iter()
            .map(|&i| {
                if i == reference {
                    1.0
                } else if heavy(alphas[i]) {
                    constants[i] / c0
                } else {
                    0.0
                }
            })
            .collect();
        Self::validated(new_alphas, thetas, xi, order)
    }

    /// Fréchet laws have tail constant `s^α`.
    pub fn from_frechet(params: &[FrechetParams], xi: f64) -> Result<Self> {
        let alphas: Vec<f64> = params.iter().map(|p| p.alpha()).collect();
        let constants: Vec<f64> = params.iter().map(|p| p.scale().powf(p.alpha())).collect();
        Self::from_tail_constants(&alphas, &constants, xi)
    }

    fn validated(alphas: Vec<f64>, thetas: Vec<f64>, xi: f64, order: Vec<usize>) -> Result<Self> {
        let n = alphas.len();
        if n == 0 {
            return Err(Error::domain("a pool needs at least one participant"));
        }
        if thetas.len() != n {
            return Err(Error::domain(format!(
                "{} tail indices but {} scales",
                n,
                thetas.len()
            )));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain(format!("xi must be positive, got {xi}")));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::domain("tail indices must be positive"));
        }
        let a1 = alphas[0];
        if alphas.iter().any(|&a| a < a1) {
            return Err(Error::domain("participant 0 must carry the smallest tail index"));
        }
        if thetas[0] != 1.0 {
            return Err(Error::domain("participant 0 must have theta = 1"));
        }
        for (i, (&a, &t)) in alphas.iter().zip(&thetas).enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::domain(format!("theta[{i}] = {t} outside [0, 1]")));
            }
            if (a > a1) != (t == 0.0) {
                return Err(Error::domain(format!(
                    "theta[{i}] must be 0 exactly when alpha[{i}] > alpha[0]"
                )));
            }
        }
        Ok(Self {
            alphas,
            thetas,
            xi,
            original_index: order,
        })
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    /// Same participants, different attachment multiplier.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::validated(
            self.alphas.clone(),
            self.thetas.clone(),
            xi,
            self.original_index.clone(),
        )
    }

    /// `ξ^(α₀/α_i)`: participant `i`'s attachment as a multiple of its own VaR.
    pub fn attachment_multiplier(&self, i: usize) -> f64 {
        self.xi.powf(self.alphas[0] / self.alphas[i])
    }

    fn check_len(&self, lambdas: &LambdaVector) -> Result<()> {
        if lambdas.len() != self.n() {
            return Err(Error::domain(format!(
                "model has {} participants but {} multipliers were given",
                self.n(),
                lambdas.len()
            )));
        }
        Ok(())
    }
}

/// Layer-width multipliers `λ_i = l_i / d_i`, each strictly above 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if let Some((i, l)) = lambdas.iter().enumerate().find(|(_, &l)| !(l > 1.0)) {
            return Err(Error::domain(format!("lambda[{i}] = {l} must exceed 1")));
        }
        Ok(Self(lambdas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Upper edge of one coordinate of the feasible box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UpperBound {
    Finite(f64),
    Unbounded,
}

impl UpperBound {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            UpperBound::Finite(u) => x <= u,
            UpperBound::Unbounded => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            UpperBound::Finite(u) => Some(u),
            UpperBound::Unbounded => None,
        }
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperBound::Finite(u) => write!(f, "{u}"),
            UpperBound::Unbounded => f.write_str("inf"),
        }
    }
}

/// Axis-aligned set of asymptotically optimal multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<UpperBound>,
}

impl FeasibleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<UpperBound>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::domain("box bounds differ in dimension"));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.admits(*l) {
                return Err(Error::domain(format!("box coordinate {i} is empty")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, u))| x >= l && u.admits(x))
    }
}

/// Asymptotic diversification ratios at a given `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticDr {
    /// `DR_i(1)` per participant.
    pub values: Vec<f64>,
    /// Coupling coefficients `δ̃_i`.
    pub coupling: Vec<f64>,
    /// Pool residual `Δ_{ξ,λ}`.
    pub delta_pool: f64,
    /// Participants whose layer reaches past the pool's diversification threshold.
    pub z_set: BTreeSet<usize>,
}

/// `θ^(-1/α₀)`, infinite for `θ = 0`.
fn inverse_scale_root(theta: f64, alpha1: f64) -> f64 {
    if theta == 0.0 {
        f64::INFINITY
    } else {
        theta.powf(-1.0 / alpha1)
    }
}

/// `(λ^(1-α) - 1)/(1 - α)`, continuous through `α = 1`.
pub fn layer_growth_factor(lambda: f64, alpha: f64) -> f64 {
    if (1.0 - alpha).abs() < UNIT_ALPHA_EPS {
        lambda.ln()
    } else {
        (lambda.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
    }
}

/// Participants `j` with `θ_j > 0` and `ξ > θ_j^(-1/α₀) (λ_j - 1)^(-1)`.
pub fn z_set(model: &TailModel, lambdas: &LambdaVector) -> Result<BTreeSet<usize>> {
    model.check_len(lambdas)?;
    let a1 = model.alphas[0];
    Ok(model
        .thetas
        .iter()
        .zip(lambdas.as_slice())
        .enumerate()
        .filter(|(_, (&theta, &lambda))| {
            theta > 0.0 && model.xi > inverse_scale_root(theta, a1) / (lambda - 1.0)
        })
        .map(|(j, _)| j)
        .collect())
}

fn delta_over(model: &TailModel, members: &BTreeSet<usize>) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let a1 = model.alphas[0];
    let sum: f64 = members
        .iter()
        .map(|&j| (inverse_scale_root(model.thetas[j], a1) + model.xi).powf(-a1))
        .sum();
    sum.powf(1.0 / a1)
}

/// `Δ_{ξ,λ} = (Σ_{j∈Z} (θ_j^(-1/α₀) + ξ)^(-α₀))^(1/α₀)`, zero for empty `Z`.
pub fn pool_delta(model: &TailModel, lambdas: &LambdaVector) -> Result<f64> {
    let z = z_set(model, lambdas)?;
    Ok(delta_over(model, &z))
}

/// Limit of every participant's diversification ratio as `p → 1`.
///
/// With equal tail indices this is exactly the tail-equivalent formula, since
/// the coupling coefficient's `ξ` factor has exponent zero and the `(1 - α)`
/// factors cancel.
pub fn asymptotic_dr(model: &TailModel, lambdas: &LambdaVector) -> Result<AsymptoticDr> {
    let z = z_set(model, lambdas)?;
    let delta = delta_over(model, &z);
    let a1 = model.alphas[0];
    let lam = lambdas.as_slice();
    let denominator: f64 = lam
        .iter()
        .zip(&model.thetas)
        .map(|(&l, &t)| layer_growth_factor(l, a1) * t.powf(1.0 / a1))
        .sum();
    let mut values = Vec::with_capacity(model.n());
    let mut coupling = Vec::with_capacity(model.n());
    for i in 0..model.n() {
        let ai = model.alphas[i];
        let m = model.attachment_multiplier(i);
        let c = layer_growth_factor(lam[i], ai) * model.xi.powf(a1 / ai - 1.0) / denominator;
        let base = if m >= 1.0 {
            1.0
        } else if m >= 1.0 / lam[i] {
            m
        } else {
            1.0 - (lam[i] - 1.0) * m
        };
        values.push(base + c * delta);
        coupling.push(c);
    }
    Ok(AsymptoticDr {
        values,
        coupling,
        delta_pool: delta,
        z_set: z,
    })
}

/// Box of multipliers attaining every participant's minimal `DR_i(1)`:
/// `max{ξ^(-α₀/α_i), 1} ≤ λ_i ≤ 1 + θ_i^(-1/α₀) ξ^(-1)`.
pub fn feasible_box(model: &TailModel) -> FeasibleBox {
    let a1 = model.alphas[0];
    let lower = model
        .alphas
        .iter()
        .map(|&ai| model.xi.powf(-a1 / ai).max(1.0))
        .collect();
    let upper = model
        .thetas
        .iter()
        .map(|&t| {
            if t == 0.0 {
                UpperBound::Unbounded
            } else {
                UpperBound::Finite(1.0 + inverse_scale_root(t, a1) / model.xi)
            }
        })
        .collect();
    FeasibleBox { lower, upper }
}

/// `min_λ DR_i(1)`: 1 for `ξ ≥ 1`, else `ξ^(α₀/α_i)`.
pub fn minimal_asymptotic_dr(model: &TailModel) -> Vec<f64> {
    (0..model.n())
        .map(|i| model.attachment_multiplier(i).min(1.0))
        .collect()
}

/// Euclidean distance from `point` to the box (exact via coordinate clamping).
pub fn distance_to_box(point: &[f64], bx: &FeasibleBox) -> Result<f64> {
    if point.len() != bx.dim() {
        return Err(Error::domain(format!(
            "point has dimension {} but box has {}",
            point.len(),
            bx.dim()
        )));
    }
    let sq: f64 = point
        .iter()
        .zip(bx.lower.iter().zip(&bx.upper))
        .map(|(&x, (&lo, hi))| {
            let gap = if x < lo {
                lo - x
            } else {
                match hi {
                    UpperBound::Finite(u) if x > *u => x - u,
                    _ => 0.0,
                }
            };
            gap * gap
        })
        .sum();
    Ok(sq.sqrt())
}

/// `d_i = ξ^(α₀/α_i) · VaR_p(X_i)`.
pub fn attachment_from_var(model: &TailModel, i: usize, var_i: f64) -> Result<f64> {
    if i >= model.n() {
        return Err(Error::domain(format!("participant {i} out of range")));
    }
    if !(var_i > 0.0) {
        return Err(Error::domain(format!("VaR must be positive, got {var_i}")));
    }
    Ok(model.attachment_multiplier(i) * var_i)
}
