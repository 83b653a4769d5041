//! Leaf-removal thresholds: the analytic curve and Monte Carlo estimates.
//!
//! Densities are clauses per variable (`α = M/N`). In these units the
//! peeling fixed point is `α = x / (k (1 − e^{−x})^{k−1})`; multiplying by
//! `k!` gives the same curve for the `G_{N,p}` ensemble parameterised by the
//! hyperedge probability (see [`alpha_lr_gnp`]).

use rayon::prelude::*;
use serde::Serialize;

use super::{clauses_for_density, leaf_removal, max_matching, sample_graph};
use crate::error::Result;
use crate::rng;

/// `x / (k (1 − e^{−x})^{k−1})`, the density at which `x` is a fixed point of peeling.
pub fn leaf_removal_potential(x: f64, k: usize) -> f64 {
    let q = -(-x).exp_m1();
    x / (k as f64 * q.powi(k as i32 - 1))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > rel_tol * (c.abs() + d.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimiser of the potential; `0` for `k = 2`, where the infimum is the limit at the origin.
fn potential_argmin(k: usize) -> f64 {
    if k <= 2 {
        return 0.0;
    }
    let phi = |t: f64| leaf_removal_potential(t.exp(), k);
    let t = golden_min(phi, 1e-6f64.ln(), 50f64.ln(), 1e-12);
    // refine in linear coordinates around the log-space estimate
    let x = t.exp();
    golden_min(|x| leaf_removal_potential(x, k), 0.9 * x, 1.1 * x, 1e-13)
}

/// Clause density below which the 2-core is empty with high probability.
pub fn alpha_lr(k: usize) -> f64 {
    assert!(k >= 2, "alpha_lr needs k >= 2");
    if k == 2 {
        return 0.5;
    }
    leaf_removal_potential(potential_argmin(k), k)
}

/// Same threshold in `G_{N,p}` units, `min_x (k−1)!·x/(1−e^{−x})^{k−1}`.
pub fn alpha_lr_gnp(k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    fact * alpha_lr(k)
}

/// Reference value for the k = 3 dimer-covering threshold. No closed form is
/// implemented; estimate other values with [`estimate_thresholds`].
pub fn alpha_dc_reference() -> f64 {
    0.92
}

/// Asymptotic fraction of variables in the 2-core at density `alpha`.
pub fn core_fraction(alpha: f64, k: usize) -> f64 {
    assert!(k >= 2, "core_fraction needs k >= 2");
    if alpha < alpha_lr(k) {
        return 0.0;
    }
    // The potential grows without bound to the right of its minimiser:
    // bracket the largest root from there and bisect.
    let lo0 = potential_argmin(k);
    let mut hi = lo0.max(1.0);
    while leaf_removal_potential(hi, k) < alpha {
        hi *= 2.0;
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if leaf_removal_potential(mid, k) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    -(-x).exp_m1() - x * (-x).exp()
}

/// Monte Carlo summary at one density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub alpha: f64,
    pub empty_core_freq: f64,
    pub empty_core_se: f64,
    pub cover_freq: f64,
    pub cover_se: f64,
    pub mean_core_frac: f64,
    /// Standard error of `mean_core_frac`.
    pub se: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empty-core, covering and core-size statistics over `trials` graphs per density.
/// Trial `t` at grid point `i` uses the stream derived from `(seed, i, t)`.
pub fn estimate_thresholds(
    k: usize,
    n: usize,
    alpha_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    if trials == 0 {
        return crate::error::invalid("trials must be at least 1");
    }
    alpha_grid
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let m = clauses_for_density(n, alpha);
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let s = rng::derive_seed(seed, ((i as u64) << 32) | t as u64);
                    let g = sample_graph(n, m, k, s)?;
                    let r = leaf_removal(&g);
                    // a covering of the whole graph exists iff the core has one
                    let covered = r.is_empty() || max_matching(&r.core).is_covering();
                    Ok((r.is_empty(), covered, r.core_fraction(n)))
                })
                .collect::<Result<Vec<_>>>()?;
            let ind = |f: fn(&(bool, bool, f64)) -> bool| -> Vec<f64> {
                outcomes.iter().map(|o| if f(o) { 1.0 } else { 0.0 }).collect()
            };
            let (empty_core_freq, empty_core_se) = mean_se(&ind(|o| o.0));
            let (cover_freq, cover_se) = mean_se(&ind(|o| o.1));
            let fracs: Vec<f64> = outcomes.iter().map(|o| o.2).collect();
            let (mean_core_frac, se) = mean_se(&fracs);
            Ok(ThresholdRow { alpha, empty_core_freq, empty_core_se, cover_freq, cover_se, mean_core_frac, se })
        })
        .collect()
}
