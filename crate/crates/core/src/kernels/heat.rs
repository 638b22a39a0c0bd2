//! Heat kernels W_t of −Δ + κ² and of the harmonic oscillator −Δ + |x|², and the bounds on
//! t∂ₜW_t.

use super::certify::{decay_fit, holder_fit, DecayFit, FitLattice, Revalidation, SmoothnessFit};
use crate::critical_radius::CriticalRadius;
use crate::geometry::{dist2, norm, Point, MAX_DIM};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gaussian factor e^{−|x−y|²/(a t)} used in the fitted bounds. With a = 4 the polynomial factor
/// |x−y|²/t of t∂ₜW is never absorbed, so the bounds carry the slack a = 5.
pub const GAUSSIAN_SLACK: f64 = 5.0;

/// Power N of (1 + √t/ρ(x) + √t/ρ(y))^{−N} in the Hölder bound.
pub const HOLDER_DECAY_POWER: i32 = 2;

/// Finite-difference step of the Mehler equation residual.
pub const PDE_STEP: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeatModel {
    ConstantV { kappa: f64, d: usize },
    Mehler { d: usize },
}

impl HeatModel {
    pub fn dim(&self) -> usize {
        match self {
            Self::ConstantV { d, .. } | Self::Mehler { d } => *d,
        }
    }

    /// V(y).
    pub fn potential(&self, y: &Point) -> f64 {
        match self {
            Self::ConstantV { kappa, .. } => kappa * kappa,
            Self::Mehler { .. } => crate::geometry::norm2(y),
        }
    }
}

/// ln sinh z for z > 0, finite for all z.
fn ln_sinh(z: f64) -> f64 {
    z + (-(-2.0 * z).exp_m1() / 2.0).ln()
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    Ok(())
}

pub(crate) fn ln_heat_kernel(model: &HeatModel, t: f64, x: &Point, y: &Point) -> f64 {
    match *model {
        HeatModel::ConstantV { kappa, d } => -(d as f64) / 2.0 * (4.0 * PI * t).ln() - dist2(x, y) / (4.0 * t) - kappa * kappa * t,
        HeatModel::Mehler { d } => {
            let (th2, th) = ((2.0 * t).tanh(), t.tanh());
            let base = -0.5 * (2.0 * PI).ln() - 0.5 * ln_sinh(2.0 * t);
            (0..d)
                .map(|k| {
                    let (a, b) = (x[k], y[k]);
                    // [cosh 2t (a² + b²) − 2ab]/(2 sinh 2t) = (a − b)²/(2 tanh 2t) + ab tanh t
                    base - (a - b) * (a - b) / (2.0 * th2) - a * b * th
                })
                .sum()
        }
    }
}

/// W_t(x, y).
pub fn heat_kernel(model: &HeatModel, t: f64, x: &Point, y: &Point) -> Result<f64> {
    check_time(t)?;
    Ok(ln_heat_kernel(model, t, x, y).exp())
}

/// ∂ₜ ln W_t(x, y) in closed form.
///
/// Mehler, per axis: −coth 2t + (a − b)² csch² 2t − ab sech² t.
pub fn heat_log_derivative(model: &HeatModel, t: f64, x: &Point, y: &Point) -> Result<f64> {
    check_time(t)?;
    Ok(match *model {
        HeatModel::ConstantV { kappa, d } => -(d as f64) / (2.0 * t) + dist2(x, y) / (4.0 * t * t) - kappa * kappa,
        HeatModel::Mehler { d } => {
            let coth = 1.0 / (2.0 * t).tanh();
            let csch = 1.0 / (2.0 * t).sinh();
            let sech = 1.0 / t.cosh();
            (0..d)
                .map(|k| {
                    let (a, b) = (x[k], y[k]);
                    -coth + (a - b) * (a - b) * csch * csch - a * b * sech * sech
                })
                .sum()
        }
    })
}

/// ∂ₜW_t(x, y).
pub fn heat_time_derivative(model: &HeatModel, t: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(heat_kernel(model, t, x, y)? * heat_log_derivative(model, t, x, y)?)
}

/// |∂ₜW − ∂ₓ²W + x²W| for the one-dimensional Mehler kernel, with fourth-order centered
/// differences of step `step` in both t and x.
pub fn mehler_pde_residual(t: f64, x: f64, y: f64, step: f64) -> Result<f64> {
    check_time(t)?;
    let h = step.min(t / 4.0);
    let model = HeatModel::Mehler { d: 1 };
    let w = |t: f64, x: f64| ln_heat_kernel(&model, t, &[x, 0.0, 0.0], &[y, 0.0, 0.0]).exp();
    let dt = (-w(t + 2.0 * h, x) + 8.0 * w(t + h, x) - 8.0 * w(t - h, x) + w(t - 2.0 * h, x)) / (12.0 * h);
    let dxx = (-w(t, x + 2.0 * h) + 16.0 * w(t, x + h) - 30.0 * w(t, x) + 16.0 * w(t, x - h) - w(t, x - 2.0 * h)) / (12.0 * h * h);
    Ok((dt - dxx + x * x * w(t, x)).abs())
}

/// A sample point for the t∂ₜW bounds; `h` is the displacement of the Hölder condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSample {
    pub t: f64,
    pub x: Point,
    pub y: Point,
    pub h: Point,
}

/// t log-uniform in `t_range`, x and y uniform in B(0, `radius`), |h| = √t · 2^{−U(0,6)}.
pub fn heat_sample(d: usize, radius: f64, t_range: (f64, f64), count: usize, seed: u64) -> Vec<HeatSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_ball = |rng: &mut ChaCha8Rng, r: f64| loop {
        let mut p = [0.0; MAX_DIM];
        for c in p.iter_mut().take(d) {
            *c = rng.gen_range(-r..=r);
        }
        if norm(&p) <= r {
            return p;
        }
    };
    (0..count)
        .map(|_| {
            let t = rng.gen_range(t_range.0.ln()..=t_range.1.ln()).exp();
            let x = in_ball(&mut rng, radius);
            let y = in_ball(&mut rng, radius);
            let dir = loop {
                let e = in_ball(&mut rng, 1.0);
                let n = norm(&e);
                if n > 0.1 {
                    break e.map(|c| c / n);
                }
            };
            let len = t.sqrt() * 2f64.powf(-rng.gen_range(0.0..6.0));
            HeatSample { t, x, y, h: dir.map(|c| c * len) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub n: i32,
    pub fit: SmoothnessFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatBoundReport {
    pub model: HeatModel,
    /// (C, c₀) of |t∂ₜW| ≤ C t^{−d/2} e^{−|x−y|²/(at)} exp(−c₀(1 + max{|x−y|, √(t/2)}/ρ(x))^{1/(k₀+1)}).
    pub size: DecayFit,
    pub gaussian_slack: f64,
    /// (C_N, δ) of the Hölder-in-x bound on pairs with |h| ≤ √t.
    pub holder: HolderFit,
    pub revalidation: Revalidation,
}

struct HeatData {
    q: Vec<f64>,
    size_log: Vec<f64>,
    scale: Vec<f64>,
    holder_log: Vec<f64>,
}

fn heat_data(model: &HeatModel, rho: &CriticalRadius, samples: &[HeatSample]) -> Result<HeatData> {
    let d = model.dim() as f64;
    let rows: Vec<(f64, f64, f64, f64)> = samples
        .par_iter()
        .map(|s| {
            let r2 = dist2(&s.x, &s.y);
            let gauss = -d / 2.0 * s.t.ln() - r2 / (GAUSSIAN_SLACK * s.t);
            let (rx, ry) = (rho.eval(&s.x), rho.eval(&s.y));
            let q = 1.0 + r2.sqrt().max((s.t / 2.0).sqrt()) / rx;
            let q_t = s.t * heat_time_derivative(model, s.t, &s.x, &s.y)?;
            let mut xh = s.x;
            for k in 0..MAX_DIM {
                xh[k] += s.h[k];
            }
            let q_th = s.t * heat_time_derivative(model, s.t, &xh, &s.y)?;
            let damp = HOLDER_DECAY_POWER as f64 * (1.0 + s.t.sqrt() / rx + s.t.sqrt() / ry).ln();
            let hn = norm(&s.h);
            Ok((q, q_t.abs().ln() - gauss, s.t.sqrt() / hn, (q_th - q_t).abs().ln() - gauss + damp))
        })
        .collect::<Result<_>>()?;
    let mut out = HeatData { q: vec![], size_log: vec![], scale: vec![], holder_log: vec![] };
    for (q, a, sc, b) in rows {
        out.q.push(q);
        out.size_log.push(a);
        out.scale.push(sc);
        out.holder_log.push(b);
    }
    Ok(out)
}

/// Fits (C, c₀) and the Hölder-in-x constants (C_N, δ) with N = 2, then re-checks both on `fresh`.
///
/// Every sample must satisfy |h| ≤ √t.
pub fn check_heat_derivative_bounds(
    model: &HeatModel,
    rho: &CriticalRadius,
    samples: &[HeatSample],
    fresh: &[HeatSample],
    fit: &FitLattice,
) -> Result<HeatBoundReport> {
    for s in samples.iter().chain(fresh) {
        check_time(s.t)?;
        let hn = norm(&s.h);
        if hn > s.t.sqrt() * (1.0 + 1e-12) || hn == 0.0 {
            return Err(Error::Precondition(format!("Hölder samples need 0 < |h| ≤ √t, got |h| = {hn} at t = {}", s.t)));
        }
    }
    if !rho.has_constants() {
        return Err(Error::Precondition("ρ has no (C0, k0) yet".into()));
    }
    let m = fit.m.unwrap_or(1.0 / (rho.k0() + 1.0));
    let data = heat_data(model, rho, samples)?;
    let size = decay_fit(&data.q, &data.size_log, m, &fit.c)?;
    let smooth = holder_fit(&data.scale, &data.holder_log, &fit.delta)
        .ok_or_else(|| Error::Precondition("no Hölder exponent on the lattice is stable".into()))?;
    let check = heat_data(model, rho, fresh)?;
    let (lc, lh) = (size.certified_constant.ln(), smooth.certified_constant.ln());
    let (c, delta) = (size.c, smooth.delta);
    let margins: Vec<f64> = check
        .q
        .iter()
        .zip(&check.size_log)
        .map(|(q, l)| lc - c * q.powf(m) - l)
        .chain(check.scale.iter().zip(&check.holder_log).map(|(s, l)| lh - delta * s.ln() - l))
        .collect();
    Ok(HeatBoundReport {
        model: *model,
        size,
        gaussian_slack: GAUSSIAN_SLACK,
        holder: HolderFit { n: HOLDER_DECAY_POWER, fit: smooth },
        revalidation: Revalidation::from_log_margins(margins),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use crate::quadrature::{integrate, QuadOptions};
    use proptest::prelude::*;
    use rand::Rng;

    fn fd_time_derivative(model: &HeatModel, t: f64, x: &Point, y: &Point) -> f64 {
        let h = 1e-3 * t;
        let w = |s: f64| heat_kernel(model, s, x, y).unwrap();
        (-w(t + 2.0 * h) + 8.0 * w(t + h) - 8.0 * w(t - h) + w(t - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn gaussian_mass_is_one() {
        let model = HeatModel::ConstantV { kappa: 0.0, d: 1 };
        let q = integrate(|y| heat_kernel(&model, 0.7, &[0.3, 0.0, 0.0], &[y, 0.0, 0.0]).unwrap(), -20.0, 20.0, &[0.3], QuadOptions::default());
        assert!((q.value - 1.0).abs() < 1e-10);
        assert!(matches!(heat_kernel(&model, 0.0, &[0.0; 3], &[0.0; 3]), Err(Error::NonpositiveTime(_))));
    }

    #[test]
    fn mehler_solves_the_oscillator_heat_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = rng.gen_range(0.1f64.ln()..3f64.ln()).exp();
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let res = mehler_pde_residual(t, x, y, PDE_STEP).unwrap();
            assert!(res < 1e-4, "t={t} x={x} y={y} residual {res}");
        }
    }

    #[test]
    fn mehler_small_time_is_gaussian() {
        let mehler = HeatModel::Mehler { d: 1 };
        let gauss = HeatModel::ConstantV { kappa: 0.0, d: 1 };
        for (x, y) in [(0.0, 0.05), (0.3, 0.25), (-0.5, -0.42)] {
            let (a, b) = (point(&[x]), point(&[y]));
            let m = heat_kernel(&mehler, 1e-3, &a, &b).unwrap();
            let g = heat_kernel(&gauss, 1e-3, &a, &b).unwrap();
            assert!(((m - g) / g).abs() < 0.05);
        }
    }

    #[test]
    fn analytic_time_derivatives_match_differences() {
        let models = [HeatModel::ConstantV { kappa: 1.3, d: 3 }, HeatModel::Mehler { d: 1 }, HeatModel::Mehler { d: 3 }];
        let pts = [(point(&[0.0, 0.0, 0.0]), point(&[0.0, 0.0, 0.0])), (point(&[0.4, -0.2, 1.0]), point(&[-0.3, 0.5, 0.2]))];
        for model in &models {
            for (x, y) in &pts {
                for t in [0.05, 0.3, 1.0, 3.0] {
                    let a = heat_time_derivative(model, t, x, y).unwrap();
                    let f = fd_time_derivative(model, t, x, y);
                    assert!((a - f).abs() <= 1e-7 * (1.0 + a.abs()), "{model:?} t={t}: {a} vs {f}");
                }
            }
        }
        // At x = y = 0 in one dimension: t∂ₜW = −t coth(2t) W.
        let w = heat_kernel(&HeatModel::Mehler { d: 1 }, 0.4, &[0.0; 3], &[0.0; 3]).unwrap();
        let d = heat_time_derivative(&HeatModel::Mehler { d: 1 }, 0.4, &[0.0; 3], &[0.0; 3]).unwrap();
        assert!((0.4 * d + 0.4 / (0.8f64).tanh() * w).abs() < 1e-14);
    }

    #[test]
    fn derivative_bounds_fit_for_both_models() {
        let cases = [
            (HeatModel::ConstantV { kappa: 1.0, d: 3 }, CriticalRadius::constant(1.0).unwrap(), 3),
            (HeatModel::Mehler { d: 1 }, CriticalRadius::harmonic_oscillator(), 1),
        ];
        for (model, rho, d) in cases {
            let s = heat_sample(d, 3.0, (1e-3, 200.0), 600, 1);
            let f = heat_sample(d, 3.0, (1e-3, 200.0), 600, 2);
            let rep = check_heat_derivative_bounds(&model, &rho, &s, &f, &FitLattice::default()).unwrap();
            assert!(rep.size.c > 0.0 && rep.size.certified_constant.is_finite(), "{rep:?}");
            assert!(rep.holder.fit.delta > 0.0 && rep.revalidation.passed, "{rep:?}");
        }
    }

    #[test]
    fn hoelder_precondition_rejects_long_steps() {
        let rho = CriticalRadius::constant(1.0).unwrap();
        let mut s = heat_sample(3, 1.0, (0.1, 1.0), 4, 3);
        s[0].h = [2.0 * s[0].t.sqrt(), 0.0, 0.0];
        let r = check_heat_derivative_bounds(&HeatModel::ConstantV { kappa: 1.0, d: 3 }, &rho, &s, &s, &FitLattice::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn constant_potential_semigroup(t in 0.05f64..2.0, s in 0.05f64..2.0, x in -1.0f64..1.0, y in -1.0f64..1.0, kappa in 0.0f64..2.0) {
            let model = HeatModel::ConstantV { kappa, d: 1 };
            let q = integrate(
                |z| heat_kernel(&model, t, &[x, 0.0, 0.0], &[z, 0.0, 0.0]).unwrap() * heat_kernel(&model, s, &[z, 0.0, 0.0], &[y, 0.0, 0.0]).unwrap(),
                -30.0, 30.0, &[x, y], QuadOptions::default(),
            );
            let direct = heat_kernel(&model, t + s, &[x, 0.0, 0.0], &[y, 0.0, 0.0]).unwrap();
            prop_assert!((q.value - direct).abs() < 1e-9 * direct.max(1e-3));
        }
    }
}
