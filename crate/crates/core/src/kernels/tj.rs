//! Kernels of T_j = (−Δ + V)^{−j/2} V^{j/2}, j = 1, 2.
//!
//! T₁ uses L^{−1/2} = (1/π) ∫₀^∞ λ^{−1/2} (L + λ)^{−1} dλ. T₂ uses L^{−1} = ∫₀^∞ e^{−tL} dt, so
//! K₂ = Γ_V V(y); the λ-form with λ^{−1} diverges at λ = 0.

use super::certify::{decay_fit, DecayFit, FitLattice};
use super::heat::{heat_kernel, HeatModel};
use super::time_integral::{log_time_integral, resolvent_lambda_integral};
use super::{KernelDecl, KernelModel, KernelValue, SczType};
use crate::critical_radius::CriticalRadius;
use crate::geometry::{dist, dist2, Point};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TjModel {
    /// V = κ² in d = 3.
    ConstantV { kappa: f64 },
    /// V = |x|² in dimension d.
    Mehler { d: usize },
}

impl TjModel {
    pub fn dim(&self) -> usize {
        match self {
            Self::ConstantV { .. } => 3,
            Self::Mehler { d } => *d,
        }
    }

    pub fn potential(&self, y: &Point) -> f64 {
        match self {
            Self::ConstantV { kappa } => kappa * kappa,
            Self::Mehler { .. } => crate::geometry::norm2(y),
        }
    }

    fn heat(&self) -> HeatModel {
        match *self {
            Self::ConstantV { kappa } => HeatModel::ConstantV { kappa, d: 3 },
            Self::Mehler { d } => HeatModel::Mehler { d },
        }
    }
}

/// |(1/π) ∫₀^∞ λ^{−1/2} (a + λ)^{−1} dλ − a^{−1/2}|, by quadrature in ln λ.
pub fn scalar_resolvent_identity(a: f64) -> Result<f64> {
    let f = |l: f64| l.powf(-0.5) / (a + l) / PI;
    let v = log_time_integral(f, f, a)?.accept()?.value;
    Ok((v - a.powf(-0.5)).abs())
}

/// K_j(x, y) for j ∈ {1, 2}.
pub fn tj_kernel(j: u8, model: &TjModel, x: &Point, y: &Point) -> Result<f64> {
    if !(j == 1 || j == 2) {
        return Err(Error::InvalidArgument(format!("j must be 1 or 2, got {j}")));
    }
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::CoincidentPoints(*x));
    }
    let v = model.potential(y);
    match (*model, j) {
        (TjModel::ConstantV { kappa }, 1) => {
            // (1/π)∫λ^{−1/2} e^{−√(κ²+λ) r}/(4πr) dλ = e^{−κr}/(2π² r²) ∫₀^∞ e^{−(σ−κr)} dv
            let k = kappa * r;
            let i = resolvent_lambda_integral(k, false)?;
            Ok((-k).exp() * i.value / (2.0 * PI * PI * r * r) * v.sqrt())
        }
        _ => {
            let heat = model.heat();
            let weight = move |t: f64| if j == 1 { (PI * t).powf(-0.5) } else { 1.0 };
            let f = |t: f64| weight(t) * heat_kernel(&heat, t, x, y).unwrap_or(0.0);
            let center = (dist2(x, y) / (2.0 * model.dim() as f64)).max(1e-8);
            let integral = log_time_integral(f, f, center)?.accept()?;
            Ok(integral.value * v.powf(j as f64 / 2.0))
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TjKernel {
    pub j: u8,
    pub model: TjModel,
    pub decl: KernelDecl,
}

impl TjKernel {
    /// Declared (s, 1). Construction first checks the scalar identity behind the λ-representation
    /// at a ∈ {1, 4}.
    pub fn new(j: u8, model: TjModel, s: f64, c: f64, m: f64) -> Result<Self> {
        if !(j == 1 || j == 2) {
            return Err(Error::InvalidArgument(format!("j must be 1 or 2, got {j}")));
        }
        for a in [1.0, 4.0] {
            let err = scalar_resolvent_identity(a)?;
            if err > 1e-8 {
                return Err(Error::QuadratureFailure { value: a.powf(-0.5), remainder: err });
            }
        }
        let decl = KernelDecl { tag: SczType::Integral { s }, c, m, delta: 1.0 };
        decl.validate()?;
        Ok(Self { j, model, decl })
    }
}

impl KernelModel for TjKernel {
    fn name(&self) -> String {
        format!("tj({})", self.j)
    }
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        Ok([tj_kernel(self.j, &self.model, x, y)?, 0.0, 0.0])
    }
    fn decl(&self) -> KernelDecl {
        self.decl
    }
    fn translation_invariant(&self) -> bool {
        matches!(self.model, TjModel::ConstantV { .. })
    }
}

/// Fits |K_j| ≤ C exp(−c(1 + |x−y|/ρ(x))^m) V(y)^{j/2}/|x−y|^{d−j} on `pairs`.
pub fn check_tj_bound(k: &TjKernel, rho: &CriticalRadius, pairs: &[(Point, Point)], fit: &FitLattice) -> Result<DecayFit> {
    let d = k.dim() as i32;
    let j = k.j as i32;
    let rows: Vec<(f64, f64)> = pairs
        .par_iter()
        .filter(|(x, y)| x != y && k.model.potential(y) > 0.0)
        .map(|(x, y)| {
            let r = dist(x, y);
            let v = tj_kernel(k.j, &k.model, x, y)?;
            let log = (v.abs() * r.powi(d - j)).ln() - 0.5 * j as f64 * k.model.potential(y).ln();
            Ok((1.0 + r / rho.eval(x), log))
        })
        .collect::<Result<_>>()?;
    let (qs, logs): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    decay_fit(&qs, &logs, fit.m.unwrap_or(k.decl.m), &fit.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use crate::grid::GridDomain;
    use crate::kernels::{certify_scz_integral, integral_sample, pair_sample, LEBESGUE_RHO3};
    use crate::quadrature::{integrate, QuadOptions};

    /// K₁(z) = ∫₀^∞ e^{−z cosh s} cosh s ds.
    fn bessel_k1(z: f64) -> f64 {
        let upper = (60.0 / z).acosh().max(1.0) + 2.0;
        integrate(|s: f64| (-z * s.cosh()).exp() * s.cosh(), 0.0, upper, &[], QuadOptions { rel_tol: 1e-13, ..Default::default() }).value
    }

    #[test]
    fn scalar_identity_holds() {
        for a in [1.0, 4.0, 0.3] {
            assert!(scalar_resolvent_identity(a).unwrap() < 1e-8);
        }
    }

    #[test]
    fn t2_is_screened_coulomb_times_potential() {
        let kappa = 1.3;
        for r in [0.1, 0.7, 2.0, 5.0] {
            let v = tj_kernel(2, &TjModel::ConstantV { kappa }, &[0.0; 3], &point(&[0.0, r, 0.0])).unwrap();
            let exact = kappa * kappa * (-kappa * r).exp() / (4.0 * PI * r);
            assert!(((v - exact) / exact).abs() < 1e-8, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn t1_matches_bessel_form() {
        let kappa = 1.0;
        for r in [0.2, 1.0, 3.0] {
            let v = tj_kernel(1, &TjModel::ConstantV { kappa }, &[0.0; 3], &point(&[r, 0.0, 0.0])).unwrap();
            let exact = kappa * kappa * bessel_k1(kappa * r) / (2.0 * PI * PI * r);
            assert!(((v - exact) / exact).abs() < 1e-8, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn heat_route_agrees_with_lambda_route_for_t1() {
        // ∫ (πt)^{−1/2} W_t dt with the constant-potential heat kernel.
        let (x, y) = ([0.0; 3], point(&[0.8, 0.3, 0.0]));
        let heat = HeatModel::ConstantV { kappa: 1.0, d: 3 };
        let f = |t: f64| (PI * t).powf(-0.5) * heat_kernel(&heat, t, &x, &y).unwrap();
        let via_heat = log_time_integral(f, f, 0.1).unwrap().value;
        let via_lambda = tj_kernel(1, &TjModel::ConstantV { kappa: 1.0 }, &x, &y).unwrap();
        assert!((via_heat - via_lambda).abs() < 1e-9 * via_lambda);
    }

    #[test]
    fn oscillator_kernels_are_positive_and_bounded() {
        let rho = CriticalRadius::harmonic_oscillator();
        for j in [1u8, 2] {
            let k = TjKernel::new(j, TjModel::Mehler { d: 3 }, 4.0, 0.1, 0.5).unwrap();
            let pairs = pair_sample(&rho, 3, 2.0, (0.05, 8.0), 150, j as u64);
            let fit = check_tj_bound(&k, &rho, &pairs, &FitLattice::default()).unwrap();
            assert!(fit.certified_constant.is_finite() && fit.c > 0.0, "{fit:?}");
        }
    }

    #[test]
    fn t1_certifies_in_integral_form() {
        // κ = 2 puts ρ = r₀/2 well below the resolvable annulus radii, so 1 + R/ρ spans a factor > 3.
        let kappa = 2.0;
        let rho = CriticalRadius::constant(LEBESGUE_RHO3 / kappa).unwrap();
        let k = TjKernel::new(1, TjModel::ConstantV { kappa }, 4.0, LEBESGUE_RHO3 / 4.0, 1.0).unwrap();
        let domain = GridDomain::new(3, 8.0, 33).unwrap();
        let sample = integral_sample(&rho, &domain, 40, 1).unwrap();
        let fresh = integral_sample(&rho, &domain, 40, 2).unwrap();
        let cert = certify_scz_integral(&k, &rho, &domain, &sample, &fresh, &FitLattice::default(), None).unwrap();
        assert!(cert.size.c > 0.0 && cert.size.m > 0.0 && cert.revalidation.passed, "{cert:?}");
    }
}
