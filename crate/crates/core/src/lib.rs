//! Numerical laboratory for harmonic analysis in the Schrödinger setting.
//!
//! Everything lives on a uniform Cartesian grid over a box in ℝ^d (d ≤ 3):
//!
//! - [`grid`]: domains, grid functions, balls, ball families and midpoint quadrature.
//! - [`critical_radius`]: critical radius functions ρ, their compatibility constants
//!   `(C₀, k₀)`, the critical-ball covering and the radius ρ_μ induced by a measure.
//! - [`agmon`]: the Agmon distance d_ρ as a shortest path in the metric ρ⁻¹|dx|.
//! - [`measures`]: density-plus-atoms measures and their growth constants.
//! - [`weights`]: estimation of weight-class constants (A_p, A^{ρ,θ}_p, A^{ρ,loc}_p,
//!   H^{ρ,m}_{p,c}, RH and doubling) over finite ball families.
//! - [`maximal`]: local, exponential and sharp maximal operators, BMO(w), empirical
//!   operator norms and the Rubio de Francia iteration.
//! - [`kernels`]: fundamental solutions, heat kernels, Riesz / multiplier / T_j kernels
//!   and certification of exponential Calderón–Zygmund size and smoothness bounds.
//!
//! Suprema over all balls, all pairs or all functions are replaced by suprema over
//! recorded, seeded finite families; every such quantity is a lower bound of the
//! continuum supremum.

pub mod agmon;
pub mod critical_radius;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod maximal;
pub mod measures;
pub mod quadrature;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::Point;
