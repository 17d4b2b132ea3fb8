//! Bounded Nelder-Mead used as the local polish inside annealing.

use super::{Progress, SearchBox};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimises from `start` with trial points clamped to the box. Stops after
/// `max_evals` evaluations or once the simplex has collapsed.
pub(crate) fn nelder_mead(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    start: &[f64],
    start_f: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), start_f));
    let mut used = 0;
    for i in 0..n {
        let mut x = start.to_vec();
        let step = 0.05 * bounds.span(i);
        x[i] = if x[i] + step <= bounds.upper()[i] { x[i] + step } else { x[i] - step };
        let f = progress.eval(&x);
        used += 1;
        simplex.push((x, f));
    }

    let point = |centroid: &[f64], worst: &[f64], coef: f64| -> Vec<f64> {
        let mut x: Vec<f64> = centroid
            .iter()
            .zip(worst)
            .map(|(c, w)| c + coef * (c - w))
            .collect();
        bounds.clamp_in_place(&mut x);
        x
    };

    while used < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = (0..n)
            .map(|i| {
                simplex
                    .iter()
                    .map(|(x, _)| (x[i] - simplex[0].0[i]).abs() / bounds.span(i))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= 1e-14 * (1.0 + simplex[0].1.abs())) || size <= 1e-12 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let reflected = point(&centroid, &worst, REFLECT);
        let fr = progress.eval(&reflected);
        used += 1;
        if fr < simplex[0].1 {
            let expanded = point(&centroid, &worst, EXPAND);
            let fe = progress.eval(&expanded);
            used += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (base, fb) = if fr < simplex[n].1 {
                (reflected, fr)
            } else {
                (worst, simplex[n].1)
            };
            let contracted = point(&centroid, &base, -CONTRACT);
            let fc = progress.eval(&contracted);
            used += 1;
            if fc < fb {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, v)| b + SHRINK * (v - b))
                        .collect();
                    let f = progress.eval(&x);
                    *vertex = (x, f);
                }
                used += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
