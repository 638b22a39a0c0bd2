//! Weight-class constants over finite ball families.
//!
//! For a ball B = B(x, r) with q = r/ρ(x), the A_p product is
//! `P_p(B) = (avg_B w)^{1/p} (avg_B w^{−1/(p−1)})^{(p−1)/p}` (p > 1) or `avg_B w / inf_B w` (p = 1),
//! where averages are node means. Each class divides P_p (or the reverse Hölder / doubling ratio)
//! by its growth factor, and the class constant is the maximum over the family. Everything is
//! computed in log space.

use crate::critical_radius::CriticalRadius;
use crate::fit::{lattice, superpoly_divergence, GrowthVerdict};
use crate::geometry::{dist2, Point};
use crate::grid::{Ball, BallFamily, FamilyPolicy, GridDomain, GridFunction};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Value substituted for non-positive weights by [`floor_weight`].
pub const WEIGHT_FLOOR: f64 = 1e-300;

/// Relative change under family doubling below which a constant is accepted.
pub const REFINEMENT_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightClass {
    Ap { p: f64 },
    ApRhoTheta { p: f64, theta: f64 },
    ApLoc { p: f64 },
    H { p: f64, c: f64, m: f64 },
    Rh { eta: f64, c: f64, m: f64 },
    Doubling { kappa: f64, c: f64, m: f64 },
}

impl WeightClass {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{self:?}: {msg}")));
        match *self {
            Self::Ap { p } | Self::ApLoc { p } if !(p >= 1.0 && p.is_finite()) => bad("p must be ≥ 1"),
            Self::ApRhoTheta { p, theta } if !(p >= 1.0 && p.is_finite() && theta >= 0.0) => bad("need p ≥ 1, θ ≥ 0"),
            Self::H { p, c, m } if !(p >= 1.0 && p.is_finite() && c >= 0.0 && m >= 0.0) => bad("need p ≥ 1, c, m ≥ 0"),
            Self::Rh { eta, c, m } if !(eta > 1.0 && eta.is_finite() && c >= 0.0 && m >= 0.0) => bad("need η > 1, c, m ≥ 0"),
            Self::Doubling { kappa, c, m } if !(kappa >= 1.0 && c >= 0.0 && m >= 0.0) => bad("need κ ≥ 1, c, m ≥ 0"),
            _ => Ok(()),
        }
    }
}

/// Replaces non-positive nodal values by [`WEIGHT_FLOOR`], logging how many were changed.
pub fn floor_weight(w: &GridFunction) -> GridFunction {
    let changed = w.values().iter().filter(|v| **v <= 0.0).count();
    if changed > 0 {
        log::warn!("flooring {changed} non-positive weight values at {WEIGHT_FLOOR:e}");
    }
    w.map(|v| if v <= 0.0 { WEIGHT_FLOOR } else { v }).expect("floored values are finite")
}

/// ln w on the grid, for weights that are strictly positive at every node.
#[derive(Clone, Debug)]
pub struct LogWeight {
    domain: GridDomain,
    lw: Vec<f64>,
}

impl LogWeight {
    pub fn new(w: &GridFunction) -> Result<Self> {
        if let Some((index, &value)) = w.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::ZeroWeightNode { index, value });
        }
        Ok(Self { domain: *w.domain(), lw: w.values().iter().map(|v| v.ln()).collect() })
    }

    pub fn from_log(domain: GridDomain, lw: Vec<f64>) -> Result<Self> {
        if lw.len() != domain.node_count() || lw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("log-weight must be finite at every node".into()));
        }
        Ok(Self { domain, lw })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// The weight w^a.
    pub fn pow(&self, a: f64) -> Self {
        Self { domain: self.domain, lw: self.lw.iter().map(|v| a * v).collect() }
    }

    /// The weight w · other^a.
    pub fn times_pow(&self, other: &Self, a: f64) -> Self {
        Self { domain: self.domain, lw: self.lw.iter().zip(&other.lw).map(|(u, v)| u + a * v).collect() }
    }

    pub fn to_grid(&self) -> Result<GridFunction> {
        GridFunction::new(self.domain, self.lw.iter().map(|v| v.exp()).collect())
    }

    /// ln of the node mean of w^a over `idx`.
    pub fn log_mean_pow(&self, idx: &[usize], a: f64) -> f64 {
        let max = idx.iter().map(|&i| a * self.lw[i]).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = idx.iter().map(|&i| (a * self.lw[i] - max).exp()).sum();
        max + s.ln() - (idx.len() as f64).ln()
    }

    pub fn log_min(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.lw[i]).fold(f64::INFINITY, f64::min)
    }

    /// ln P_p over the node set.
    pub fn log_ap_product(&self, idx: &[usize], p: f64) -> f64 {
        if p == 1.0 {
            self.log_mean_pow(idx, 1.0) - self.log_min(idx)
        } else {
            self.log_mean_pow(idx, 1.0) / p + (p - 1.0) / p * self.log_mean_pow(idx, -1.0 / (p - 1.0))
        }
    }

    /// ln of (avg w^η)^{1/η} / avg w.
    pub fn log_rh_ratio(&self, idx: &[usize], eta: f64) -> f64 {
        self.log_mean_pow(idx, eta) / eta - self.log_mean_pow(idx, 1.0)
    }
}

/// A family ball with its node set and critical-scale ratio q = r/ρ(center).
#[derive(Clone, Debug)]
pub struct PreparedBall {
    pub ball: Ball,
    pub q: f64,
    pub clip: f64,
    pub idx: Vec<usize>,
}

pub fn prepare_family(domain: &GridDomain, rho: &CriticalRadius, family: &BallFamily) -> Result<Vec<PreparedBall>> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    family
        .balls
        .par_iter()
        .map(|b| {
            let rx = rho.eval(&b.center);
            if !(rx > 0.0 && rx.is_finite()) {
                return Err(Error::NonPositiveRho { point: b.center, value: rx });
            }
            Ok(PreparedBall { ball: *b, q: b.radius / rx, clip: domain.clip_fraction(b), idx: domain.ball_indices(b) })
        })
        .filter(|pb| pb.as_ref().map_or(true, |pb| !pb.idx.is_empty()))
        .collect()
}

fn doubling_log_ratio(lw: &LogWeight, pb: &PreparedBall, kappa: f64) -> Option<f64> {
    let d = lw.domain.dim() as f64;
    let h = lw.domain.spacing();
    let outer = lw.log_mean_pow(&pb.idx, 1.0) + (pb.idx.len() as f64).ln();
    let mut best: Option<f64> = None;
    let mut r = pb.ball.radius / 2.0;
    while r >= 0.5 * h {
        let r2 = r * r * (1.0 + 1e-12);
        let inner: Vec<usize> = pb.idx.iter().copied().filter(|&i| dist2(&lw.domain.node(i), &pb.ball.center) <= r2).collect();
        if inner.is_empty() {
            break;
        }
        let v = outer - (lw.log_mean_pow(&inner, 1.0) + (inner.len() as f64).ln()) - d * kappa * (pb.ball.radius / r).ln();
        best = Some(best.map_or(v, |b: f64| b.max(v)));
        r /= 2.0;
    }
    best
}

/// ln of the class expression on one ball, or `None` when the ball is outside the class's family
/// (super-critical balls for A^{ρ,loc}, balls without inner nodes for doubling).
pub fn log_expression(lw: &LogWeight, pb: &PreparedBall, class: &WeightClass) -> Option<f64> {
    let growth = |c: f64, m: f64| c * (1.0 + pb.q).powf(m);
    match *class {
        WeightClass::Ap { p } => Some(lw.log_ap_product(&pb.idx, p)),
        WeightClass::ApRhoTheta { p, theta } => Some(lw.log_ap_product(&pb.idx, p) - theta * (1.0 + pb.q).ln()),
        WeightClass::ApLoc { p } => (pb.q <= 1.0 + 1e-12).then(|| lw.log_ap_product(&pb.idx, p)),
        WeightClass::H { p, c, m } => Some(lw.log_ap_product(&pb.idx, p) - growth(c, m)),
        WeightClass::Rh { eta, c, m } => Some(lw.log_rh_ratio(&pb.idx, eta) - growth(c, m)),
        WeightClass::Doubling { kappa, c, m } => doubling_log_ratio(lw, pb, kappa).map(|v| v - growth(c, m)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub class: WeightClass,
    pub constant: f64,
    pub log_constant: f64,
    pub witness_ball: Ball,
    pub witness_clip_fraction: f64,
    pub family: FamilyPolicy,
    pub balls_evaluated: usize,
    /// Super-polynomial growth of the running maximum along dyadic bins of q = r/ρ(x).
    pub divergence: GrowthVerdict,
}

impl ClassReport {
    /// Finite in the operational sense: no super-polynomial growth along the family.
    pub fn finite(&self) -> bool {
        !self.divergence.divergent && self.log_constant.is_finite()
    }
}

/// Running maximum of the log-values over dyadic bins of q, evaluated at the bin edges.
pub fn envelope_ladder(qs: &[f64], logs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = qs.iter().copied().zip(logs.iter().copied()).filter(|(q, _)| *q > 0.0).collect();
    if pairs.is_empty() {
        return (Vec::new(), Vec::new());
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut edge = 2f64.powf(pairs[0].0.log2().floor() + 1.0);
    let mut running = f64::NEG_INFINITY;
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for (q, v) in pairs {
        while q > edge {
            radii.push(edge);
            values.push(running);
            edge *= 2.0;
        }
        running = running.max(v);
    }
    radii.push(edge);
    values.push(running);
    (radii, values)
}

pub fn class_constant_prepared(lw: &LogWeight, prepared: &[PreparedBall], class: &WeightClass, policy: &FamilyPolicy) -> Result<ClassReport> {
    class.validate()?;
    let values: Vec<Option<f64>> = prepared.par_iter().map(|pb| log_expression(lw, pb, class)).collect();
    let mut best: Option<(usize, f64)> = None;
    let (mut qs, mut logs) = (Vec::new(), Vec::new());
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            qs.push(prepared[k].q);
            logs.push(v);
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((k, v));
            }
        }
    }
    let (k, log_constant) = best.ok_or(Error::EmptyFamily)?;
    let (radii, env) = envelope_ladder(&qs, &logs);
    Ok(ClassReport {
        class: *class,
        constant: log_constant.exp(),
        log_constant,
        witness_ball: prepared[k].ball,
        witness_clip_fraction: prepared[k].clip,
        family: policy.clone(),
        balls_evaluated: logs.len(),
        divergence: superpoly_divergence(&radii, &env),
    })
}

/// Maximum of the class expression over the family.
pub fn class_constant(w: &GridFunction, rho: &CriticalRadius, class: &WeightClass, family: &BallFamily) -> Result<ClassReport> {
    let lw = LogWeight::new(w)?;
    let prepared = prepare_family(w.domain(), rho, family)?;
    class_constant_prepared(&lw, &prepared, class, &family.policy)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub constants: Vec<f64>,
    pub family_sizes: Vec<usize>,
    /// |C_last − C_prev| / C_prev.
    pub relative_change: f64,
    pub accepted: bool,
}

/// Recomputes the constant on `doublings` successive doublings of the family.
pub fn refinement_study(w: &GridFunction, rho: &CriticalRadius, class: &WeightClass, family: &BallFamily, doublings: usize) -> Result<RefinementStudy> {
    let mut fam = family.clone();
    let mut constants = Vec::new();
    let mut family_sizes = Vec::new();
    for k in 0..=doublings {
        if k > 0 {
            fam = fam.doubled(w.domain())?;
        }
        constants.push(class_constant(w, rho, class, &fam)?.constant);
        family_sizes.push(fam.len());
    }
    let n = constants.len();
    let relative_change = if n >= 2 { (constants[n - 1] - constants[n - 2]).abs() / constants[n - 2] } else { 0.0 };
    Ok(RefinementStudy { constants, family_sizes, relative_change, accepted: relative_change < REFINEMENT_TOL })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub ell: f64,
    /// A_p product on B(0, 2ℓ).
    pub product: f64,
    /// ℓ^{−d}(e^ℓ − 1)^{1/p} for p > 1, ℓ^{−d}e^ℓ for p = 1.
    pub lower_shape: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTable {
    pub p: f64,
    pub rows: Vec<DivergenceRow>,
    /// min over ℓ of product / lower_shape.
    pub fitted_c: f64,
    /// Increments of ln(product) per unit ℓ between consecutive rows.
    pub log_slopes: Vec<f64>,
    pub min_log_slope: f64,
}

/// A_p products on the balls B(0, 2ℓ) compared with the exponential lower shape.
pub fn ap_rho_divergence(w: &GridFunction, p: f64, ells: &[f64]) -> Result<DivergenceTable> {
    let domain = w.domain();
    let l_max = ells.iter().cloned().fold(0.0, f64::max);
    if 2.0 * l_max > domain.half_width() * (1.0 + 1e-12) {
        return Err(Error::DomainTooSmall { radius: 2.0 * l_max, half_width: domain.half_width() });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be ≥ 1")));
    }
    let lw = LogWeight::new(w)?;
    let d = domain.dim() as i32;
    let rows: Vec<DivergenceRow> = ells
        .iter()
        .map(|&ell| {
            let idx = domain.ball_indices(&Ball { center: [0.0; 3], radius: 2.0 * ell });
            let product = lw.log_ap_product(&idx, p).exp();
            let lower_shape = if p == 1.0 { ell.powi(-d) * ell.exp() } else { ell.powi(-d) * (ell.exp() - 1.0).powf(1.0 / p) };
            DivergenceRow { ell, product, lower_shape }
        })
        .collect();
    let fitted_c = rows.iter().map(|r| r.product / r.lower_shape).fold(f64::INFINITY, f64::min);
    let log_slopes: Vec<f64> = rows.windows(2).map(|r| (r[1].product.ln() - r[0].product.ln()) / (r[1].ell - r[0].ell)).collect();
    let min_log_slope = log_slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DivergenceTable { p, rows, fitted_c, log_slopes, min_log_slope })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub a_theta: Vec<ClassReport>,
    pub h: Vec<ClassReport>,
    pub a_loc: ClassReport,
    /// Decided by the θ = 0 row; the per-θ rows are informational.
    pub a_theta_finite: bool,
    pub h_finite: bool,
    pub a_loc_finite: bool,
    /// Per ball, H(c, m) ≤ K(θ, c, m)·A^{ρ,θ} with K = sup_t (1+t)^θ e^{−c(1+t)^m}, for every pair
    /// (θ, m) in the sweeps with m > 0.
    pub theta_to_h_per_ball: bool,
    /// Per sub-critical ball, A^{ρ,loc} ≤ e^{c2^m}·H(c, m).
    pub h_to_loc_per_ball: bool,
    /// A^{ρ,θ} finite ⇒ H finite, and H finite ⇒ A^{ρ,loc} finite.
    pub implications_hold: bool,
}

pub const THETA_SWEEP: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];
pub const M_SWEEP: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

/// ln sup_{t ≥ 0} (1+t)^θ e^{−c(1+t)^m} for m > 0, c > 0.
fn log_poly_exp_sup(theta: f64, c: f64, m: f64) -> f64 {
    // Maximize θ ln s − c s^m over s ≥ 1: stationary point s* = (θ/(cm))^{1/m}.
    let s = (theta / (c * m)).powf(1.0 / m).max(1.0);
    theta * s.ln() - c * s.powf(m)
}

/// A^{ρ,θ} (θ sweep), H^{ρ,m}_{p,c} (m sweep) and A^{ρ,loc}_p on one family, with the per-ball
/// comparisons behind A^{ρ}_p ⊂ H^{ρ}_{p,c} ⊂ A^{ρ,loc}_p.
pub fn check_inclusions(w: &GridFunction, rho: &CriticalRadius, p: f64, c: f64, family: &BallFamily) -> Result<InclusionReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("inclusions need c > 0".into()));
    }
    let lw = LogWeight::new(w)?;
    let prepared = prepare_family(w.domain(), rho, family)?;
    let a_theta = THETA_SWEEP
        .iter()
        .map(|&theta| class_constant_prepared(&lw, &prepared, &WeightClass::ApRhoTheta { p, theta }, &family.policy))
        .collect::<Result<Vec<_>>>()?;
    let h = M_SWEEP
        .iter()
        .map(|&m| class_constant_prepared(&lw, &prepared, &WeightClass::H { p, c, m }, &family.policy))
        .collect::<Result<Vec<_>>>()?;
    let a_loc = class_constant_prepared(&lw, &prepared, &WeightClass::ApLoc { p }, &family.policy)?;

    let mut theta_to_h_per_ball = true;
    let mut h_to_loc_per_ball = true;
    for pb in &prepared {
        let log_p = lw.log_ap_product(&pb.idx, p);
        for &m in M_SWEEP.iter().filter(|m| **m > 0.0) {
            let log_h = log_p - c * (1.0 + pb.q).powf(m);
            for &theta in &THETA_SWEEP {
                let log_a = log_p - theta * (1.0 + pb.q).ln();
                if log_h > log_a + log_poly_exp_sup(theta, c, m) + 1e-9 {
                    theta_to_h_per_ball = false;
                }
            }
            if pb.q <= 1.0 + 1e-12 && log_p > log_h + c * 2f64.powf(m) + 1e-9 {
                h_to_loc_per_ball = false;
            }
        }
    }
    // Super-polynomial growth of the unweighted product rules out every polynomial factor, so the
    // θ = 0 verdict decides the whole scale; larger θ need boxes beyond the crossover ℓ ≈ θ ln ℓ.
    let a_theta_finite = a_theta[0].finite();
    let h_finite = h.iter().any(|r| r.finite());
    let a_loc_finite = a_loc.finite();
    let implications_hold = (!a_theta_finite || h_finite) && (!h_finite || a_loc_finite);
    Ok(InclusionReport {
        a_theta,
        h,
        a_loc,
        a_theta_finite,
        h_finite,
        a_loc_finite,
        theta_to_h_per_ball,
        h_to_loc_per_ball,
        implications_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// (q, H_{q,c}-constant) for q ≥ p, starting with q = p.
    pub monotone_constants: Vec<(f64, f64)>,
    /// Per ball P_q ≤ P_p for each q ≥ p, and constants nonincreasing in q.
    pub monotone_holds: bool,
    /// max over balls of |ln P_{p'}(σ) − ln P_p(w)|, σ = w^{−1/(p−1)}.
    pub duality_max_log_gap: f64,
    pub duality_holds: bool,
    /// σ(σ(w)) = w nodewise.
    pub duality_involution: bool,
    /// Factorization w₁w₂^{1−p}, when a second weight is given.
    pub factorization: Option<FactorizationReport>,
    /// D^{ρ,m}_{p,cp} constant of w and the per-ball discrete doubling inequality.
    pub doubling: ClassReport,
    pub doubling_per_ball: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub c: f64,
    pub m: f64,
    pub w1: ClassReport,
    pub w2: ClassReport,
    pub product: ClassReport,
    /// Per ball P_p(w₁w₂^{1−p}) ≤ A_1(w₁)^{1/p} A_1(w₂)^{(p−1)/p}.
    pub per_ball: bool,
    /// Constant of the product ≤ C₁^{1/p} C₂^{(p−1)/p}.
    pub constant_bound_holds: bool,
}

/// Checks of the H-class structure lemmas on one family: monotonicity in p, duality, the
/// factorization w₁w₂^{1−p} (when `w2` is given, with (c₁, m₁) = (c2_1, m2_1) for both factors),
/// and the doubling property D^{ρ,m}_{p,cp}.
#[allow(clippy::too_many_arguments)]
pub fn structure_lemmas(
    w: &GridFunction,
    rho: &CriticalRadius,
    p: f64,
    c: f64,
    m: f64,
    family: &BallFamily,
    factor_pair: Option<(&GridFunction, (f64, f64), &GridFunction, (f64, f64))>,
) -> Result<StructureReport> {
    if !(p > 1.0) {
        return Err(Error::Precondition("structure lemmas need p > 1".into()));
    }
    let lw = LogWeight::new(w)?;
    let prepared = prepare_family(w.domain(), rho, family)?;
    let policy = &family.policy;

    let qs = [p, p + 0.5, 2.0 * p, 4.0 * p];
    let mut monotone_constants = Vec::new();
    let mut monotone_holds = true;
    for &q in &qs {
        let r = class_constant_prepared(&lw, &prepared, &WeightClass::H { p: q, c, m }, policy)?;
        if let Some(&(_, prev)) = monotone_constants.last() {
            if r.constant > prev * (1.0 + 1e-12) {
                monotone_holds = false;
            }
        }
        monotone_constants.push((q, r.constant));
        for pb in &prepared {
            if lw.log_ap_product(&pb.idx, q) > lw.log_ap_product(&pb.idx, p) + 1e-12 {
                monotone_holds = false;
            }
        }
    }

    let p_dual = p / (p - 1.0);
    let sigma = lw.pow(-1.0 / (p - 1.0));
    let duality_max_log_gap = prepared
        .iter()
        .map(|pb| (sigma.log_ap_product(&pb.idx, p_dual) - lw.log_ap_product(&pb.idx, p)).abs())
        .fold(0.0, f64::max);
    let back = sigma.pow(-1.0 / (p_dual - 1.0));
    let duality_involution = back.lw.iter().zip(&lw.lw).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()));

    let factorization = match factor_pair {
        None => None,
        Some((w1, (c1, m1), w2, (c2, m2))) => {
            let l1 = LogWeight::new(w1)?;
            let l2 = LogWeight::new(w2)?;
            let prod = l1.times_pow(&l2, 1.0 - p);
            let cf = (c1 + (p - 1.0) * c2) / p;
            let mf = m1.max(m2);
            let r1 = class_constant_prepared(&l1, &prepared, &WeightClass::H { p: 1.0, c: c1, m: m1 }, policy)?;
            let r2 = class_constant_prepared(&l2, &prepared, &WeightClass::H { p: 1.0, c: c2, m: m2 }, policy)?;
            let rp = class_constant_prepared(&prod, &prepared, &WeightClass::H { p, c: cf, m: mf }, policy)?;
            let per_ball = prepared.iter().all(|pb| {
                prod.log_ap_product(&pb.idx, p)
                    <= l1.log_ap_product(&pb.idx, 1.0) / p + (p - 1.0) / p * l2.log_ap_product(&pb.idx, 1.0) + 1e-9
            });
            let constant_bound_holds = rp.log_constant <= r1.log_constant / p + (p - 1.0) / p * r2.log_constant + 1e-9;
            Some(FactorizationReport { c: cf, m: mf, w1: r1, w2: r2, product: rp, per_ball, constant_bound_holds })
        }
    };

    let doubling = class_constant_prepared(&lw, &prepared, &WeightClass::Doubling { kappa: p, c: c * p, m }, policy)?;
    let doubling_per_ball = prepared.iter().all(|pb| {
        let r2 = 0.25 * pb.ball.radius * pb.ball.radius * (1.0 + 1e-12);
        let inner: Vec<usize> = pb.idx.iter().copied().filter(|&i| dist2(&w.domain().node(i), &pb.ball.center) <= r2).collect();
        if inner.is_empty() {
            return true;
        }
        let (nr, nbig) = (inner.len() as f64, pb.idx.len() as f64);
        let lhs = lw.log_mean_pow(&pb.idx, 1.0) + nbig.ln() - lw.log_mean_pow(&inner, 1.0) - nr.ln();
        let rhs = p * lw.log_ap_product(&pb.idx, p) + p * (nbig / nr).ln();
        lhs <= rhs + 1e-9
    });

    Ok(StructureReport {
        monotone_constants,
        monotone_holds,
        duality_max_log_gap,
        duality_holds: duality_max_log_gap <= 1e-9,
        duality_involution,
        factorization,
        doubling,
        doubling_per_ball,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhRow {
    pub eta: f64,
    /// Smallest c on the lattice {0, 0.25, …, 8} with a finite RH_{η,c} constant, if any.
    pub c_star: Option<f64>,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderReport {
    pub rows: Vec<RhRow>,
    pub eta: f64,
    pub c_star: f64,
    /// RH constants at fixed c* are nondecreasing in η (power-mean monotonicity).
    pub monotone_in_eta: bool,
    /// Exponent q = η(p−1)+1 and c₂ = (c₁ + cp)η/q of the class H_{q,c₂} that w^η falls into.
    pub q: f64,
    pub c2: f64,
    pub m2: f64,
    /// max over balls of |ln P_q(w^η) − [(η/q) ln RH_η + (ηp/q) ln P_p(w)]|.
    pub openness_identity_gap: f64,
    pub w_eta_class: ClassReport,
    /// Smallest β on {1.05, …, 2} with w ∈ RH_{ηβ, c̃}, c̃ = c* + c/η.
    pub beta: Option<f64>,
    pub c_tilde: f64,
}

pub fn eta_lattice() -> Vec<f64> {
    lattice(1.05, 2.0, 0.05)
}

/// Reverse Hölder exponent search for a weight of H^{ρ,m}_{p,c}, and the openness step.
pub fn reverse_holder_suite(w: &GridFunction, rho: &CriticalRadius, p: f64, c: f64, m: f64, family: &BallFamily) -> Result<ReverseHolderReport> {
    if !(p > 1.0) {
        return Err(Error::Precondition("openness needs p > 1".into()));
    }
    let lw = LogWeight::new(w)?;
    let prepared = prepare_family(w.domain(), rho, family)?;
    let policy = &family.policy;
    let c_lattice = lattice(0.0, 8.0, 0.25);

    let mut rows = Vec::new();
    for eta in eta_lattice() {
        let mut row = RhRow { eta, c_star: None, constant: f64::INFINITY };
        for &cc in &c_lattice {
            let r = class_constant_prepared(&lw, &prepared, &WeightClass::Rh { eta, c: cc, m }, policy)?;
            if r.finite() {
                row = RhRow { eta, c_star: Some(cc), constant: r.constant };
                break;
            }
        }
        rows.push(row);
    }
    let first = rows.iter().find(|r| r.c_star.is_some()).ok_or(Error::NoEta)?;
    let (eta, c_star) = (first.eta, first.c_star.unwrap());

    let mut monotone_in_eta = true;
    let mut prev = f64::NEG_INFINITY;
    for e in eta_lattice() {
        let r = class_constant_prepared(&lw, &prepared, &WeightClass::Rh { eta: e, c: c_star, m }, policy)?;
        if r.log_constant < prev - 1e-12 {
            monotone_in_eta = false;
        }
        prev = r.log_constant;
    }

    let q = eta * (p - 1.0) + 1.0;
    let c2 = (c_star + c * p) * eta / q;
    let m2 = m;
    let w_eta = lw.pow(eta);
    let openness_identity_gap = prepared
        .iter()
        .map(|pb| {
            let lhs = w_eta.log_ap_product(&pb.idx, q);
            let rhs = eta / q * lw.log_rh_ratio(&pb.idx, eta) + eta * p / q * lw.log_ap_product(&pb.idx, p);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max);
    let w_eta_class = class_constant_prepared(&w_eta, &prepared, &WeightClass::H { p: q, c: c2, m: m2 }, policy)?;

    let c_tilde = c_star + c / eta;
    let mut beta = None;
    for b in eta_lattice() {
        let r = class_constant_prepared(&lw, &prepared, &WeightClass::Rh { eta: eta * b, c: c_tilde, m }, policy)?;
        if r.finite() {
            beta = Some(b);
            break;
        }
    }
    Ok(ReverseHolderReport {
        rows,
        eta,
        c_star,
        monotone_in_eta,
        q,
        c2,
        m2,
        openness_identity_gap,
        w_eta_class,
        beta,
        c_tilde,
    })
}

/// The weight e^{a|x|} on the domain.
pub fn exp_weight(domain: GridDomain, a: f64) -> Result<GridFunction> {
    GridFunction::from_fn(domain, |x: &Point| (a * crate::geometry::norm(x)).exp())
}
