//! Critical radius functions ρ and the compatibility condition
//!
//! ```text
//! C₀⁻¹ ρ(x) (1 + |x−y|/ρ(x))^{−k₀} ≤ ρ(y) ≤ C₀ ρ(x) (1 + |x−y|/ρ(x))^{k₀/(k₀+1)}.
//! ```

use crate::fit::{lattice, scale_stable_sup, STABILITY_TOL};
use crate::geometry::{dist, norm, Point, MAX_DIM};
use crate::grid::{Ball, GridDomain};
use crate::measures::MeasureModel;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Largest C₀ the lattice fit accepts as finite.
pub const C0_CAP: f64 = 1e3;

pub type RhoFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RhoModel {
    Constant(f64),
    /// ρ(x) = min{1, 1/|x|}.
    HarmonicOscillator,
    FromMeasure(Arc<MeasureModel>),
    User { name: String, eval: RhoFn },
}

impl fmt::Debug for RhoModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(r) => write!(f, "Constant({r})"),
            Self::HarmonicOscillator => write!(f, "HarmonicOscillator"),
            Self::FromMeasure(_) => write!(f, "FromMeasure"),
            Self::User { name, .. } => write!(f, "User({name})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Builtin,
    FromMeasure,
    User,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsSource {
    /// Derived in closed form.
    Analytic,
    /// Produced by [`CriticalRadius::validate`].
    Fitted,
    /// Not yet known.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct CriticalRadius {
    model: RhoModel,
    c0: f64,
    k0: f64,
    source: ConstantsSource,
}

impl CriticalRadius {
    pub fn constant(rho0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::NonPositiveRho { point: [0.0; MAX_DIM], value: rho0 });
        }
        Ok(Self { model: RhoModel::Constant(rho0), c0: 1.0, k0: 0.0, source: ConstantsSource::Analytic })
    }

    /// ρ(x) = min{1, 1/|x|}, with C₀ = 2/√3 and k₀ = 1.
    ///
    /// With k₀ = 1 the lower inequality holds with constant 1; the upper one is extremal at
    /// |x| = 2, y = x/2, where ρ(y)/ρ(x) = 2 and 1 + |x−y|/ρ(x) = 3.
    pub fn harmonic_oscillator() -> Self {
        Self { model: RhoModel::HarmonicOscillator, c0: 2.0 / 3f64.sqrt(), k0: 1.0, source: ConstantsSource::Analytic }
    }

    /// ρ_μ for a measure on a domain of dimension ≥ 3. Constants are unknown until validated.
    pub fn from_measure(mu: Arc<MeasureModel>) -> Result<Self> {
        if mu.dim() < 3 {
            return Err(Error::Precondition("ρ_μ needs d ≥ 3".into()));
        }
        Ok(Self { model: RhoModel::FromMeasure(mu), c0: f64::NAN, k0: f64::NAN, source: ConstantsSource::Unknown })
    }

    /// A user evaluator, checked for positivity on `probe_points`.
    pub fn user(name: &str, eval: RhoFn, probe_points: &[Point]) -> Result<Self> {
        for p in probe_points {
            let v = eval(p);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveRho { point: *p, value: v });
            }
        }
        Ok(Self {
            model: RhoModel::User { name: name.into(), eval },
            c0: f64::NAN,
            k0: f64::NAN,
            source: ConstantsSource::Unknown,
        })
    }

    pub fn model(&self) -> &RhoModel {
        &self.model
    }
    pub fn provenance(&self) -> Provenance {
        match self.model {
            RhoModel::Constant(_) | RhoModel::HarmonicOscillator => Provenance::Builtin,
            RhoModel::FromMeasure(_) => Provenance::FromMeasure,
            RhoModel::User { .. } => Provenance::User,
        }
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn constants_source(&self) -> ConstantsSource {
        self.source
    }
    pub fn has_constants(&self) -> bool {
        self.c0.is_finite() && self.k0.is_finite()
    }
    pub fn with_constants(mut self, c0: f64, k0: f64, source: ConstantsSource) -> Self {
        self.c0 = c0;
        self.k0 = k0;
        self.source = source;
        self
    }

    /// ρ(x); NaN if a measure-induced radius cannot be bracketed at x.
    pub fn eval(&self, x: &Point) -> f64 {
        match &self.model {
            RhoModel::Constant(r) => *r,
            RhoModel::HarmonicOscillator => {
                let n = norm(x);
                if n <= 1.0 {
                    1.0
                } else {
                    1.0 / n
                }
            }
            RhoModel::FromMeasure(mu) => rho_from_measure(mu, x).unwrap_or(f64::NAN),
            RhoModel::User { eval, .. } => eval(x),
        }
    }

    /// The radius αρ (constants are unchanged by scaling).
    pub fn scaled(&self, alpha: f64) -> Self {
        let inner = self.clone();
        let model = match &self.model {
            RhoModel::Constant(r) => RhoModel::Constant(alpha * r),
            _ => RhoModel::User { name: format!("{alpha}·{:?}", self.model), eval: Arc::new(move |x| alpha * inner.eval(x)) },
        };
        Self { model, ..self.clone() }
    }
}

/// Per-k₀ lattice row of a validation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub k0: f64,
    pub c0: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub c0: f64,
    pub k0: f64,
    /// Pair at which the fitted C₀ is attained.
    pub binding_pair: (Point, Point),
    pub table: Vec<LatticeRow>,
}

/// log of the smallest C₀ making both inequalities hold for the pair, given k₀.
fn log_required_c0(rx: f64, ry: f64, r: f64, k0: f64) -> f64 {
    let lt = (1.0 + r / rx).ln();
    let lower = rx.ln() - k0 * lt - ry.ln();
    let upper = ry.ln() - rx.ln() - k0 / (k0 + 1.0) * lt;
    lower.max(upper).max(0.0)
}

impl CriticalRadius {
    /// Fits (C₀, k₀) on the lattice k₀ ∈ {0, 0.25, …, 8}: the smallest k₀ whose required C₀ is
    /// finite (at most [`C0_CAP`] and stable when the pair scale max(|x|, |y|) is halved), with that
    /// C₀. Fails with the worst pair of the best lattice point.
    pub fn validate(&self, pairs: &[(Point, Point)]) -> Result<Validation> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("empty pair sample".into()));
        }
        let rhos: Vec<(f64, f64)> = pairs
            .par_iter()
            .map(|(x, y)| (self.eval(x), self.eval(y)))
            .collect();
        for ((x, y), (rx, ry)) in pairs.iter().zip(&rhos) {
            for (p, v) in [(x, rx), (y, ry)] {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::NonPositiveRho { point: *p, value: *v });
                }
            }
        }
        let scales: Vec<f64> = pairs.iter().map(|(x, y)| norm(x).max(norm(y))).collect();
        let mut table = Vec::new();
        let mut chosen = None;
        let mut best_failure: Option<(f64, usize)> = None;
        for k0 in lattice(0.0, 8.0, 0.25) {
            let required: Vec<f64> = pairs
                .iter()
                .zip(&rhos)
                .map(|((x, y), (rx, ry))| log_required_c0(*rx, *ry, dist(x, y), k0).exp())
                .collect();
            let sup = scale_stable_sup(&scales, &required, STABILITY_TOL);
            table.push(LatticeRow { k0, c0: sup.value, stable: sup.stable });
            let ok = sup.stable && sup.value <= C0_CAP;
            if ok && chosen.is_none() {
                chosen = Some((k0, sup.value, sup.argmax));
            }
            if best_failure.map_or(true, |(v, _)| sup.value < v) {
                best_failure = Some((sup.value, sup.argmax));
            }
        }
        match chosen {
            Some((k0, c0, i)) => Ok(Validation { c0, k0, binding_pair: pairs[i], table }),
            None => {
                let (v, i) = best_failure.expect("lattice is nonempty");
                Err(Error::NoFit { x: pairs[i].0, y: pairs[i].1, required_c0: v })
            }
        }
    }

    /// Validates and stores the fitted constants.
    pub fn fitted(self, pairs: &[(Point, Point)]) -> Result<(Self, Validation)> {
        let v = self.validate(pairs)?;
        Ok((self.with_constants(v.c0, v.k0, ConstantsSource::Fitted), v))
    }

    /// Both inequalities with the stored constants, for one pair.
    pub fn holds_on(&self, x: &Point, y: &Point) -> bool {
        let required = log_required_c0(self.eval(x), self.eval(y), dist(x, y), self.k0);
        required <= self.c0.ln() + 1e-12
    }
}

/// Seeded pairs in the ball |x| ≤ radius of ℝ^d: half uniform, half with |x − y| log-uniform in
/// [10⁻³, 2·radius] so that close pairs are represented.
pub fn sample_pairs(d: usize, radius: f64, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_ball = |rng: &mut ChaCha8Rng| loop {
        let mut p = [0.0; MAX_DIM];
        for c in p.iter_mut().take(d) {
            *c = rng.gen_range(-radius..=radius);
        }
        if norm(&p) <= radius {
            return p;
        }
    };
    (0..count)
        .map(|k| {
            let x = in_ball(&mut rng);
            if k % 2 == 0 {
                (x, in_ball(&mut rng))
            } else {
                loop {
                    let mut dir = [0.0; MAX_DIM];
                    for c in dir.iter_mut().take(d) {
                        *c = rng.gen_range(-1.0..=1.0);
                    }
                    let n = norm(&dir);
                    if n < 1e-3 || n > 1.0 {
                        continue;
                    }
                    let len = (1e-3f64.ln() + rng.gen::<f64>() * (2e3 * radius).ln()).exp();
                    let mut y = x;
                    for a in 0..d {
                        y[a] += dir[a] / n * len;
                    }
                    if norm(&y) <= radius {
                        break (x, y);
                    }
                }
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    /// ρ(x)/ρ(y).
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// ρ(x)/ρ(y) for |x − y| ≤ ρ(x), with the interval [1/(C₀ 2^{k₀/(k₀+1)}), C₀ 2^{k₀}] implied by
/// the compatibility condition.
pub fn rho_sim_on_neighbors(rho: &CriticalRadius, x: &Point, y: &Point) -> Result<RatioCheck> {
    let rx = rho.eval(x);
    if dist(x, y) > rx * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("|x − y| = {} exceeds ρ(x) = {rx}", dist(x, y))));
    }
    if !rho.has_constants() {
        return Err(Error::Precondition("ρ has no (C0, k0) yet".into()));
    }
    let (c0, k0) = (rho.c0(), rho.k0());
    let ratio = rx / rho.eval(y);
    let lower = 1.0 / (c0 * 2f64.powf(k0 / (k0 + 1.0)));
    let upper = c0 * 2f64.powf(k0);
    let slack = 1e-12;
    Ok(RatioCheck { ratio, lower, upper, holds: ratio >= lower * (1.0 - slack) && ratio <= upper * (1.0 + slack) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCovering {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    /// (σ, max pointwise overlap of the dilated balls).
    pub overlaps: Vec<(f64, usize)>,
    pub c: f64,
    pub n1: f64,
    /// Number of domain nodes not covered by the undilated balls (0 by construction).
    pub uncovered: usize,
}

pub const COVERING_DILATIONS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

impl CriticalCovering {
    /// C σ^{N₁}.
    pub fn overlap_bound(&self, sigma: f64) -> f64 {
        self.c * sigma.powf(self.n1)
    }
}

/// First-fit covering by critical balls in node order, with (C, N₁) fitted from the overlap of the
/// dilated balls at σ ∈ {1, 2, 4, 8}.
pub fn build_covering(rho: &CriticalRadius, domain: &GridDomain) -> Result<CriticalCovering> {
    let total = domain.node_count();
    let mut covered = vec![false; total];
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    for i in 0..total {
        if covered[i] {
            continue;
        }
        let x = domain.node(i);
        let r = rho.eval(&x);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::NonPositiveRho { point: x, value: r });
        }
        domain.for_each_in_ball(&Ball { center: x, radius: r }, |j, _| covered[j] = true);
        covered[i] = true;
        centers.push(x);
        radii.push(r);
    }
    let uncovered = covered.iter().filter(|c| !**c).count();

    let overlaps: Vec<(f64, usize)> = COVERING_DILATIONS
        .iter()
        .map(|&sigma| {
            let mut count = vec![0usize; total];
            for (c, r) in centers.iter().zip(&radii) {
                domain.for_each_in_ball(&Ball { center: *c, radius: sigma * r }, |j, _| count[j] += 1);
            }
            (sigma, count.into_iter().max().unwrap_or(0))
        })
        .collect();
    let c = overlaps[0].1.max(1) as f64;
    let n1 = overlaps
        .iter()
        .skip(1)
        .map(|&(s, o)| (o as f64 / c).ln() / s.ln())
        .fold(0.0, f64::max)
        + 1e-12;
    Ok(CriticalCovering { centers, radii, overlaps, c, n1, uncovered })
}

/// ρ_μ(x) = sup{r > 0 : μ(B(x,r))/r^{d−2} ≤ 1}: scan down from 4L by halving until the ratio is at
/// most 1, then bisect the crossing to relative tolerance 10⁻⁸.
pub fn rho_from_measure(mu: &MeasureModel, x: &Point) -> Result<f64> {
    let d = mu.dim();
    if d < 3 {
        return Err(Error::Precondition("ρ_μ needs d ≥ 3".into()));
    }
    let ratio = |r: f64| mu.ball_measure(x, r) / r.powi(d as i32 - 2);
    let r_max = 4.0 * mu.domain().half_width();
    let r_min = mu.domain().spacing();
    let no_bracket = Error::NoBracket { point: *x, r_min, r_max };
    if ratio(r_max) <= 1.0 {
        return Err(no_bracket);
    }
    let mut hi = r_max;
    let mut lo = 0.5 * hi;
    while ratio(lo) > 1.0 {
        hi = lo;
        lo *= 0.5;
        if lo < r_min {
            return Err(no_bracket);
        }
    }
    while hi - lo > 1e-8 * lo {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let check = ratio(lo);
    if !(0.5..=2.0).contains(&check) {
        return Err(Error::Precondition(format!("μ(B(x,ρ))/ρ^(d−2) = {check} is not comparable to 1")));
    }
    Ok(lo)
}
