//! The Riesz transform ∇(−Δ + κ²)^{−1/2} in ℝ³ through its λ-representation.

use super::time_integral::resolvent_lambda_integral;
use super::{KernelDecl, KernelModel, KernelValue, SczType, LEBESGUE_RHO3};
use crate::geometry::{dist, Point, MAX_DIM};
use crate::{Error, Result};
use std::f64::consts::PI;

/// K(x, y) = (1/π) ∫₀^∞ λ^{−1/2} ∇ₓΓ_{κ²+λ}(x, y) dλ.
///
/// With λ = u² and v = u r the vector kernel is
/// −(x−y)/r · e^{−κr}/(2π² r³) · ∫₀^∞ (σ + 1) e^{−(σ−κr)} dv, σ = √((κr)² + v²).
pub fn riesz_kernel(kappa: f64, x: &Point, y: &Point) -> Result<Point> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::CoincidentPoints(*x));
    }
    let k = kappa * r;
    let integral = resolvent_lambda_integral(k, true)?;
    let g = -(-k).exp() * integral.value / (2.0 * PI * PI * r.powi(4));
    let mut out = [0.0; MAX_DIM];
    for c in 0..3 {
        out[c] = g * (x[c] - y[c]);
    }
    Ok(out)
}

/// The Riesz kernel for V = κ² or its adjoint K*(x, y) = −K(y, x).
#[derive(Clone, Copy, Debug)]
pub struct RieszKernel {
    pub kappa: f64,
    pub adjoint: bool,
    pub decl: KernelDecl,
}

impl RieszKernel {
    /// Declared as (∞, 1) with m = 1 and c = ε/(2D₁), where ε = r₀ is the decay of Γ in units of
    /// d_ρ and D₁ = 2 for constant ρ.
    pub fn new(kappa: f64, adjoint: bool) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("κ must be finite and ≥ 0, got {kappa}")));
        }
        let decl = KernelDecl { tag: SczType::Pointwise, c: LEBESGUE_RHO3 / 4.0, m: 1.0, delta: 1.0 };
        Ok(Self { kappa, adjoint, decl })
    }
}

impl KernelModel for RieszKernel {
    fn name(&self) -> String {
        format!("{}riesz_constV(κ={})", if self.adjoint { "adjoint_" } else { "" }, self.kappa)
    }
    fn dim(&self) -> usize {
        3
    }
    fn components(&self) -> usize {
        3
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        if self.adjoint {
            Ok(riesz_kernel(self.kappa, y, x)?.map(|c| -c))
        } else {
            riesz_kernel(self.kappa, x, y)
        }
    }
    fn decl(&self) -> KernelDecl {
        self.decl
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn odd(&self) -> bool {
        true
    }
}
