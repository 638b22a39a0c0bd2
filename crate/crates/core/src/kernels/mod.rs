//! Kernels of Schrödinger operators and certification of exponential Calderón–Zygmund bounds.
//!
//! The constant potential V = κ² in d = 3 has closed-form fundamental solutions and heat
//! kernels, which makes it the ground-truth model; the harmonic oscillator V = |x|² enters
//! through the Mehler heat kernel.

mod certify;
mod fundamental;
mod heat;
mod multiplier;
mod operator;
mod riesz;
mod table;
mod time_integral;
mod tj;

pub use certify::{
    certify_scz_integral, certify_scz_pointwise, decay_fit, integral_sample, pair_sample, smoothness_triples,
    DecayFit, FitLattice, IntegralSample, Revalidation, SczCertificate, SmoothnessFit, MIN_DECAY,
};
pub use fundamental::{
    agmon_shift_gap, check_fundamental_bounds, gamma_constant_v, gradient_gamma_constant_v, FundamentalFit, FundamentalModel,
    FundamentalSolution, GradientFit,
};
pub use heat::{
    check_heat_derivative_bounds, heat_kernel, heat_log_derivative, heat_sample, heat_time_derivative, mehler_pde_residual,
    HeatBoundReport, HeatModel, HeatSample, HolderFit, GAUSSIAN_SLACK, HOLDER_DECAY_POWER, PDE_STEP,
};
pub use multiplier::{multiplier_kernel, MultiplierKernel, Phi};
pub use operator::{apply_kernel_operator, KernelOperator};
pub use riesz::{riesz_kernel, RieszKernel};
pub use table::TableKernel;
pub use tj::{check_tj_bound, scalar_resolvent_identity, tj_kernel, TjKernel, TjModel};

use crate::geometry::{Point, MAX_DIM};
use crate::Result;
use serde::{Deserialize, Serialize};

/// ρ_μ of the Lebesgue measure in d = 3, √(3/(4π)); the constant potential κ² has ρ = r₀/κ.
pub const LEBESGUE_RHO3: f64 = 0.488_602_511_902_919_9;

/// Relative remainder above which a quadrature value is rejected.
pub const REMAINDER_TOL: f64 = 1e-6;

/// Kernel values: up to three real components (vector kernels, or real and imaginary parts).
pub type KernelValue = [f64; MAX_DIM];

/// Euclidean norm over the first `n` components.
pub fn value_norm(v: &KernelValue, n: usize) -> f64 {
    v[..n].iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SczType {
    /// Pointwise size and smoothness bounds, `(∞, δ)`.
    Pointwise,
    /// `s`-averages over annuli, `(s, δ)` with `1 < s < ∞`.
    Integral { s: f64 },
}

impl SczType {
    pub fn s(&self) -> f64 {
        match self {
            Self::Pointwise => f64::INFINITY,
            Self::Integral { s } => *s,
        }
    }

    /// Hölder conjugate s′.
    pub fn s_prime(&self) -> f64 {
        match self {
            Self::Pointwise => 1.0,
            Self::Integral { s } => s / (s - 1.0),
        }
    }
}

/// Declared type and decay parameters of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDecl {
    pub tag: SczType,
    pub c: f64,
    pub m: f64,
    pub delta: f64,
}

impl KernelDecl {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(crate::Error::InvalidArgument(s));
        if let SczType::Integral { s } = self.tag {
            if !(s > 1.0 && s.is_finite()) {
                return bad(format!("integrability exponent must lie in (1, ∞), got {s}"));
            }
        }
        if !(self.c >= 0.0 && self.m > 0.0) {
            return bad(format!("decay parameters need c ≥ 0 and m > 0, got c = {}, m = {}", self.c, self.m));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("smoothness δ must lie in (0, 1], got {}", self.delta));
        }
        Ok(())
    }
}

/// A kernel K(x, y), finite for x ≠ y.
pub trait KernelModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    /// Number of meaningful entries in [`KernelValue`].
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue>;
    fn decl(&self) -> KernelDecl;
    /// K(x, y) depends on x − y only.
    fn translation_invariant(&self) -> bool {
        false
    }
    /// K(x, x + z) = −K(x, x − z), so symmetric cells around the diagonal cancel.
    fn odd(&self) -> bool {
        false
    }
    /// K can be evaluated away from grid nodes. When false, the diagonal cell of the grid
    /// operator is dropped.
    fn off_grid(&self) -> bool {
        true
    }
}

/// The kernel K ≡ 0.
#[derive(Clone, Copy, Debug)]
pub struct ZeroKernel {
    pub dim: usize,
    pub decl: KernelDecl,
}

impl KernelModel for ZeroKernel {
    fn name(&self) -> String {
        "zero".into()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _: &Point, _: &Point) -> Result<KernelValue> {
        Ok([0.0; MAX_DIM])
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

/// |x − y|^{−d}: Calderón–Zygmund size without any exponential decay.
#[derive(Clone, Copy, Debug)]
pub struct PowerKernel {
    pub dim: usize,
}

impl KernelModel for PowerKernel {
    fn name(&self) -> String {
        "power".into()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        let r = crate::geometry::dist(x, y);
        if r == 0.0 {
            return Err(crate::Error::CoincidentPoints(*x));
        }
        Ok([r.powi(-(self.dim as i32)), 0.0, 0.0])
    }
    fn decl(&self) -> KernelDecl {
        KernelDecl { tag: SczType::Pointwise, c: 0.0, m: 1.0, delta: 1.0 }
    }
    fn translation_invariant(&self) -> bool {
        true
    }
}
