//! Finite surrogates for suprema over continua: parameter lattices, scale-stability
//! of sampled suprema, and the super-polynomial growth test used as "divergence".

use serde::{Deserialize, Serialize};

/// Multiplier applied to empirically fitted constants before they are stored as certified.
pub const CERTIFY_MARGIN: f64 = 2.0;

/// Default relative tolerance for the scale-stability test.
pub const STABILITY_TOL: f64 = 0.05;

/// Inclusive lattice `start, start + step, …` up to `stop` (with a half-step guard).
pub fn lattice(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0);
    let count = ((stop - start) / step + 0.5).floor().max(0.0) as usize;
    (0..=count).map(|k| start + k as f64 * step).collect()
}

/// A supremum estimated from scaled samples, with the sup over the inner half of the scales kept
/// alongside so that growth at the edge of the sample is visible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledSup {
    pub value: f64,
    pub inner: f64,
    pub argmax: usize,
    pub stable: bool,
}

/// Sup of `values` and of the subset with `scale ≤ max_scale / 2`; stable iff the full sup exceeds
/// the inner one by at most the factor `1 + tol`.
pub fn scale_stable_sup(scales: &[f64], values: &[f64], tol: f64) -> ScaledSup {
    assert_eq!(scales.len(), values.len());
    assert!(!values.is_empty());
    let max_scale = scales.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut value = f64::NEG_INFINITY;
    let mut inner = f64::NEG_INFINITY;
    let mut argmax = 0;
    for (i, (&s, &v)) in scales.iter().zip(values).enumerate() {
        if v > value {
            value = v;
            argmax = i;
        }
        if s <= 0.5 * max_scale && v > inner {
            inner = v;
        }
    }
    let stable = value.is_finite()
        && if inner.is_finite() && inner > 0.0 {
            value <= (1.0 + tol) * inner
        } else {
            value <= 0.0 || inner == value
        };
    ScaledSup { value, inner, argmax, stable }
}

/// Log-log slopes of consecutive points of a positive ladder `(r_k, v_k)`.
pub fn log_log_slopes(radii: &[f64], values: &[f64]) -> Vec<f64> {
    radii
        .windows(2)
        .zip(values.windows(2))
        .map(|(r, v)| (v[1].ln() - v[0].ln()) / (r[1].ln() - r[0].ln()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub slopes: Vec<f64>,
    pub divergent: bool,
}

/// Growth factor between consecutive slopes that counts as acceleration.
const ACCELERATION: f64 = 1.3;

/// Super-polynomial growth test on a ladder of dimensionless radii (in units of the critical
/// radius) with log-values `ln v_k`.
///
/// Polynomial growth has log-log slopes that settle to a constant; exponential-type growth has
/// slopes that keep growing geometrically. Below radius 1 the two cannot be told apart
/// ((1+q)^k ≈ e^{kq}), so only windows starting at radius ≥ 1 count. The ladder is divergent
/// when such a window has three consecutive positive slopes, each at least 1.3 times the
/// previous, the last one ≥ 1.
pub fn superpoly_divergence(radii: &[f64], log_values: &[f64]) -> GrowthVerdict {
    let (r, v): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(log_values)
        .filter(|(r, v)| v.is_finite() && **r > 0.0)
        .map(|(r, v)| (r.ln(), *v))
        .unzip();
    let slopes: Vec<f64> = r.windows(2).zip(v.windows(2)).map(|(r, v)| (v[1] - v[0]) / (r[1] - r[0])).collect();
    let unbounded = log_values.iter().any(|v| *v == f64::INFINITY);
    let divergent = unbounded
        || slopes.windows(3).enumerate().any(|(k, s)| {
            r[k] >= -1e-12
                && s[0] > 0.0
                && s[1] >= ACCELERATION * s[0]
                && s[2] >= ACCELERATION * s[1]
                && s[2] >= 1.0
        });
    GrowthVerdict { slopes, divergent }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
