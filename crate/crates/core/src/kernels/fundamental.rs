//! Fundamental solutions Γ_{μ+λ} and their two-sided exponential bounds.

use super::heat::{heat_kernel, HeatModel};
use super::time_integral::log_time_integral;
use crate::fit::ols_slope;
use crate::geometry::{dist, Point, MAX_DIM};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// e^{−√(κ²+λ) r}/(4π r) with r = |x − y|, the fundamental solution of −Δ + κ² + λ in ℝ³.
pub fn gamma_constant_v(kappa: f64, lambda: f64, x: &Point, y: &Point) -> Result<f64> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::CoincidentPoints(*x));
    }
    let s = (kappa * kappa + lambda).sqrt();
    Ok((-s * r).exp() / (4.0 * PI * r))
}

/// ∇ₓ of [`gamma_constant_v`]: −(x−y)/r · (s r + 1) e^{−s r}/(4π r²).
pub fn gradient_gamma_constant_v(kappa: f64, lambda: f64, x: &Point, y: &Point) -> Result<Point> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::CoincidentPoints(*x));
    }
    let s = (kappa * kappa + lambda).sqrt();
    let g = -(s * r + 1.0) * (-s * r).exp() / (4.0 * PI * r * r * r);
    let mut out = [0.0; MAX_DIM];
    for k in 0..MAX_DIM {
        out[k] = g * (x[k] - y[k]);
    }
    Ok(out)
}

/// Gap √(κ²+λ) r − (κ r/2 + √λ r/2) of the lower bound d_{μ+λ} ≥ ½ d_μ + ½√λ |x−y| for the constant
/// potential; nonnegative for all κ, λ, r ≥ 0.
pub fn agmon_shift_gap(kappa: f64, lambda: f64, r: f64) -> f64 {
    (kappa * kappa + lambda).sqrt() * r - 0.5 * kappa * r - 0.5 * lambda.sqrt() * r
}

pub type GammaFn = Arc<dyn Fn(&Point, &Point, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FundamentalModel {
    /// V = κ² in d = 3.
    ConstantV { kappa: f64 },
    /// V = |x|² in dimension `d`, through Γ_{V+λ} = ∫₀^∞ e^{−λt} W_t dt with the Mehler kernel.
    HarmonicOscillatorHeat { d: usize },
    User { name: String, d: usize, eval: GammaFn },
}

impl fmt::Debug for FundamentalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ConstantV { kappa } => write!(f, "ConstantV({kappa})"),
            Self::HarmonicOscillatorHeat { d } => write!(f, "HarmonicOscillatorHeat({d})"),
            Self::User { name, .. } => write!(f, "User({name})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub model: FundamentalModel,
}

impl FundamentalSolution {
    pub fn constant_v(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("κ must be finite and ≥ 0, got {kappa}")));
        }
        Ok(Self { model: FundamentalModel::ConstantV { kappa } })
    }

    pub fn harmonic_oscillator(d: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidArgument(format!("dimension {d} outside 1..=3")));
        }
        Ok(Self { model: FundamentalModel::HarmonicOscillatorHeat { d } })
    }

    pub fn dim(&self) -> usize {
        match &self.model {
            FundamentalModel::ConstantV { .. } => 3,
            FundamentalModel::HarmonicOscillatorHeat { d } | FundamentalModel::User { d, .. } => *d,
        }
    }

    /// Γ_{μ+λ}(x, y).
    pub fn eval(&self, x: &Point, y: &Point, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("λ must be ≥ 0, got {lambda}")));
        }
        match &self.model {
            FundamentalModel::ConstantV { kappa } => gamma_constant_v(*kappa, lambda, x, y),
            FundamentalModel::HarmonicOscillatorHeat { d } => {
                let r = dist(x, y);
                if r == 0.0 {
                    return Err(Error::CoincidentPoints(*x));
                }
                let model = HeatModel::Mehler { d: *d };
                let w = |t: f64| heat_kernel(&model, t, x, y).unwrap_or(0.0) * (-lambda * t).exp();
                Ok(log_time_integral(w, w, (r * r / 4.0).max(1e-3))?.accept()?.value)
            }
            FundamentalModel::User { eval, .. } => {
                if dist(x, y) == 0.0 {
                    return Err(Error::CoincidentPoints(*x));
                }
                Ok(eval(x, y, lambda))
            }
        }
    }
}

/// Gradient bound |∇₁Γ| ≤ C₃ e^{−ε₃ d}/r^{d−2} (∫_{B(x,r/2)} dμ(z)/|z−x|^{d−1} + 1/r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientFit {
    pub c3: f64,
    pub eps3: f64,
    /// ln(C₃,max / C₃,min) after removing e^{−ε₃ d}.
    pub spread: f64,
}

/// C₁ e^{−ε₁ d}/r^{d−2} ≤ Γ ≤ C₂ e^{−ε₂ d}/r^{d−2} on a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalFit {
    pub c1: f64,
    pub c2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// ln(C₂/C₁): zero when Γ r^{d−2} is exactly exponential in d_ρ.
    pub residual: f64,
    pub pairs_used: usize,
    pub gradient: Option<GradientFit>,
}

struct ExpFit {
    lo: f64,
    hi: f64,
    eps: f64,
}

/// ε from the least-squares slope of `ys` against `ds`; the constants bracket ys + ε d.
fn exp_fit(ds: &[f64], ys: &[f64]) -> ExpFit {
    let eps = if ds.len() > 1 { (-ols_slope(ds, ys)).max(0.0) } else { 0.0 };
    let eps = if eps.is_finite() { eps } else { 0.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (d, y) in ds.iter().zip(ys) {
        let v = y + eps * d;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    ExpFit { lo, hi, eps }
}

/// Fits the two-sided bound on `pairs`, with `distance` the Agmon distance of the matching ρ.
///
/// Both sides share the least-squares exponent ε; C₁ and C₂ are the extreme values of
/// Γ r^{d−2} e^{ε d}. For the constant potential the gradient bound is fitted as well, with the
/// μ-integral 2πκ² r of μ = κ² dx.
pub fn check_fundamental_bounds(
    gamma: &FundamentalSolution,
    distance: impl Fn(&Point, &Point) -> Result<f64>,
    pairs: &[(Point, Point)],
) -> Result<FundamentalFit> {
    let d = gamma.dim() as i32;
    let (mut ds, mut ys, mut gys) = (Vec::new(), Vec::new(), Vec::new());
    for (x, y) in pairs {
        let r = dist(x, y);
        if r == 0.0 {
            continue;
        }
        let dv = distance(x, y)?;
        let g = gamma.eval(x, y, 0.0)?;
        ds.push(dv);
        ys.push((g * r.powi(d - 2)).ln());
        if let FundamentalModel::ConstantV { kappa } = gamma.model {
            let grad = gradient_gamma_constant_v(kappa, 0.0, x, y)?;
            let mag = crate::geometry::norm(&grad);
            let bracket = 2.0 * PI * kappa * kappa * r + 1.0 / r;
            gys.push((mag * r.powi(d - 2) / bracket).ln());
        }
    }
    if ds.is_empty() {
        return Err(Error::InvalidArgument("no pair with x ≠ y".into()));
    }
    let main = exp_fit(&ds, &ys);
    let gradient = (!gys.is_empty()).then(|| {
        let g = exp_fit(&ds, &gys);
        GradientFit { c3: g.hi.exp(), eps3: g.eps, spread: g.hi - g.lo }
    });
    Ok(FundamentalFit {
        c1: main.lo.exp(),
        c2: main.hi.exp(),
        eps1: main.eps,
        eps2: main.eps,
        residual: main.hi - main.lo,
        pairs_used: ds.len(),
        gradient,
    })
}
