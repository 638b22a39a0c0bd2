//! Integrals over (0, ∞) with explicit tail remainders.

use super::REMAINDER_TOL;
use crate::quadrature::{integrate, QuadOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct TailedIntegral {
    pub value: f64,
    /// Quadrature error estimate plus both tail bounds.
    pub remainder: f64,
    /// ∫ of the envelope, the scale against which a near-zero value is judged.
    pub mass: f64,
}

impl TailedIntegral {
    pub fn accept(self) -> Result<Self> {
        let scale = self.value.abs().max(1e-6 * self.mass);
        if self.remainder > REMAINDER_TOL * scale || !self.value.is_finite() {
            return Err(Error::QuadratureFailure { value: self.value, remainder: self.remainder });
        }
        Ok(self)
    }
}

const SCAN_HALF_WIDTH: f64 = 40.0;
const SCAN_STEP: f64 = 0.5;
const TAIL_RATIO: f64 = 1e-18;

fn log_slope(g: &impl Fn(f64) -> f64, s: f64) -> f64 {
    let e = 1e-3;
    let (a, b) = (g(s - e), g(s + e));
    if a <= 0.0 || b <= 0.0 {
        return f64::NAN;
    }
    (b.ln() - a.ln()) / (2.0 * e)
}

/// ∫₀^∞ f(t) dt in the variable s = ln t, where `env(t) ≥ |f(t)|` is log-concave in s in both
/// tails.
///
/// The range is grown from the maximum of the envelope until it has dropped by 10⁻¹⁸ at both
/// ends; each tail is bounded by G(s)/|∂ₛ ln G(s)| with G(s) = e^s env(e^s), which dominates
/// the tail when the logarithmic slope keeps growing in magnitude past the cut.
pub(crate) fn log_time_integral(f: impl Fn(f64) -> f64, env: impl Fn(f64) -> f64, center: f64) -> Result<TailedIntegral> {
    let g_env = |s: f64| {
        let t = s.exp();
        t * env(t)
    };
    let c = center.ln();
    let mut peak = (c, g_env(c));
    let mut s = c - SCAN_HALF_WIDTH;
    while s <= c + SCAN_HALF_WIDTH {
        let v = g_env(s);
        if v > peak.1 {
            peak = (s, v);
        }
        s += SCAN_STEP;
    }
    if !(peak.1 > 0.0) {
        return Ok(TailedIntegral { value: 0.0, remainder: 0.0, mass: 0.0 });
    }
    if !peak.1.is_finite() {
        return Err(Error::QuadratureFailure { value: f64::NAN, remainder: f64::INFINITY });
    }
    let floor = TAIL_RATIO * peak.1;
    let mut tails = 0.0;
    let mut ends = [peak.0, peak.0];
    for (dir, end) in [(-1.0, 0usize), (1.0, 1usize)] {
        let mut s = peak.0;
        let mut steps = 0;
        loop {
            s += dir;
            steps += 1;
            let v = g_env(s);
            let slope = -dir * log_slope(&g_env, s);
            if v == 0.0 {
                break;
            }
            if v <= floor && slope > 0.2 {
                tails += v / slope;
                break;
            }
            if steps > 400 {
                return Err(Error::QuadratureFailure { value: f64::NAN, remainder: v });
            }
        }
        ends[end] = s;
    }
    let breaks: Vec<f64> = {
        let mut b = Vec::new();
        let mut x = ends[0] + 2.0;
        while x < ends[1] {
            b.push(x);
            x += 2.0;
        }
        b
    };
    let mass = integrate(g_env, ends[0], ends[1], &breaks, QuadOptions { rel_tol: 1e-8, ..Default::default() });
    let g = |s: f64| {
        let t = s.exp();
        t * f(t)
    };
    let opts = QuadOptions { abs_tol: 1e-14 * mass.value, rel_tol: 1e-12, max_panels: 4000 };
    let q = integrate(g, ends[0], ends[1], &breaks, opts);
    let out = TailedIntegral { value: q.value, remainder: q.error + tails, mass: mass.value + tails };
    if !q.converged {
        return Err(Error::QuadratureFailure { value: out.value, remainder: out.remainder });
    }
    Ok(out)
}

/// ∫₀^∞ p(σ) e^{−(σ−k)} dv with σ = √(k² + v²), p(σ) = σ + 1 when `linear` and 1 otherwise.
///
/// With λ = u² and v = u r this is the λ-integral of the constant-potential resolvent, scaled so
/// that the e^{−κr} factor is pulled out (k = κr). Since σ ≥ v and σ ≤ v + k the tail beyond
/// V is at most e^{−(V−k)}(V + k + 2) (linear) or e^{−(V−k)}.
pub(crate) fn resolvent_lambda_integral(k: f64, linear: bool) -> Result<TailedIntegral> {
    let h = |v: f64| {
        let sigma = k.hypot(v);
        let decay = (-(v * v) / (sigma + k)).exp();
        if linear {
            (sigma + 1.0) * decay
        } else {
            decay
        }
    };
    let cut = k + 45.0;
    let width = (k + 1.0).sqrt();
    let breaks: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|f| f * width).filter(|b| *b < cut).collect();
    let q = integrate(h, 0.0, cut, &breaks, QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_panels: 2000 });
    let tail = (-(cut - k)).exp() * if linear { cut + k + 2.0 } else { 1.0 };
    let out = TailedIntegral { value: q.value, remainder: q.error + tail, mass: q.value };
    if !q.converged {
        return Err(Error::QuadratureFailure { value: out.value, remainder: out.remainder });
    }
    out.accept()
}
