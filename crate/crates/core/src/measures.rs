//! Radon measures given as a density plus finitely many atoms, and the growth conditions
//!
//! ```text
//! μ(B(x,r)) ≤ C_μ (r/R)^{d−2+δ_μ} μ(B(x,R)),     μ(B(x,2r)) ≤ D_μ (μ(B(x,r)) + r^{d−2}).
//! ```

use crate::critical_radius::CriticalRadius;
use crate::fit::{lattice, scale_stable_sup, STABILITY_TOL};
use crate::geometry::{dist, dist2, norm2, unit_ball_volume, unit_sphere_area, Point};
use crate::grid::{Ball, GridDomain, GridFunction};
use crate::quadrature::{integrate, QuadOptions};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest growth constant accepted as finite by the certification.
const CONSTANT_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    None,
    /// `scale` times Lebesgue measure.
    Lebesgue { scale: f64 },
    /// V(y) = scale·|y|².
    Quadratic { scale: f64 },
    /// Nodal density integrated by the midpoint rule.
    Grid(GridFunction),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub delta: f64,
    pub c_mu: f64,
    pub d_mu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureModel {
    domain: GridDomain,
    density: Density,
    atoms: Vec<Atom>,
    certified: Option<GrowthConstants>,
}

impl MeasureModel {
    pub fn new(domain: GridDomain, density: Density, atoms: Vec<Atom>) -> Result<Self> {
        match &density {
            Density::Lebesgue { scale } | Density::Quadratic { scale } if !(*scale >= 0.0 && scale.is_finite()) => {
                return Err(Error::InvalidArgument(format!("density scale {scale} must be ≥ 0")))
            }
            Density::Grid(g) => {
                if g.domain() != &domain {
                    return Err(Error::InvalidArgument("density lives on a different domain".into()));
                }
                if let Some((index, &value)) = g.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
                    return Err(Error::NegativeWeight { index, value });
                }
            }
            _ => {}
        }
        if let Some(a) = atoms.iter().find(|a| !(a.mass > 0.0 && a.mass.is_finite())) {
            return Err(Error::InvalidArgument(format!("atom mass {} must be positive", a.mass)));
        }
        Ok(Self { domain, density, atoms, certified: None })
    }

    pub fn lebesgue(domain: GridDomain, scale: f64) -> Result<Self> {
        Self::new(domain, Density::Lebesgue { scale }, Vec::new())
    }

    pub fn quadratic(domain: GridDomain, scale: f64) -> Result<Self> {
        Self::new(domain, Density::Quadratic { scale }, Vec::new())
    }

    pub fn atom(domain: GridDomain, point: Point, mass: f64) -> Result<Self> {
        Self::new(domain, Density::None, vec![Atom { point, mass }])
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
    pub fn density(&self) -> &Density {
        &self.density
    }
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
    pub fn certified(&self) -> Option<GrowthConstants> {
        self.certified
    }
    pub fn with_certificate(mut self, constants: GrowthConstants) -> Self {
        self.certified = Some(constants);
        self
    }

    /// The measure αμ.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let density = match &self.density {
            Density::None => Density::None,
            Density::Lebesgue { scale } => Density::Lebesgue { scale: alpha * scale },
            Density::Quadratic { scale } => Density::Quadratic { scale: alpha * scale },
            Density::Grid(g) => Density::Grid(g.map(|v| alpha * v)?),
        };
        let atoms = self.atoms.iter().map(|a| Atom { point: a.point, mass: alpha * a.mass }).collect();
        Self::new(self.domain, density, atoms)
    }

    /// Density value at a point (atoms excluded).
    pub fn density_at(&self, y: &Point) -> f64 {
        match &self.density {
            Density::None => 0.0,
            Density::Lebesgue { scale } => *scale,
            Density::Quadratic { scale } => scale * norm2(y),
            Density::Grid(g) => g.values()[self.domain.nearest_node(y)],
        }
    }

    /// The density sampled on the grid, as a measure with nodal density.
    pub fn to_grid(&self) -> Result<Self> {
        let g = GridFunction::from_fn(self.domain, |y| self.density_at(y))?;
        Self::new(self.domain, Density::Grid(g), self.atoms.clone())
    }

    /// The measure restricted to the points where `keep` holds.
    pub fn restricted(&self, keep: impl Fn(&Point) -> bool) -> Result<Self> {
        let g = GridFunction::from_fn(self.domain, |y| if keep(y) { self.density_at(y) } else { 0.0 })?;
        let atoms = self.atoms.iter().filter(|a| keep(&a.point)).copied().collect();
        Self::new(self.domain, Density::Grid(g), atoms)
    }

    /// μ(B(x, r)): closed form for the analytic densities, midpoint rule for nodal ones, plus atoms.
    pub fn ball_measure(&self, x: &Point, r: f64) -> f64 {
        let d = self.dim();
        let wd = unit_ball_volume(d);
        let continuous = match &self.density {
            Density::None => 0.0,
            Density::Lebesgue { scale } => scale * wd * r.powi(d as i32),
            Density::Quadratic { scale } => {
                scale * wd * r.powi(d as i32) * (norm2(x) + d as f64 * r * r / (d as f64 + 2.0))
            }
            Density::Grid(g) => match Ball::new(*x, r) {
                Ok(b) => g.ball_mass(&b),
                Err(_) => 0.0,
            },
        };
        let r2 = r * r * (1.0 + 1e-12);
        continuous + self.atoms.iter().filter(|a| dist2(&a.point, x) <= r2).map(|a| a.mass).sum::<f64>()
    }

    /// Mean of the density over the sphere |y − x| = s, for the analytic densities.
    fn spherical_mean(&self, x: &Point, s: f64) -> Option<f64> {
        match &self.density {
            Density::None => Some(0.0),
            Density::Lebesgue { scale } => Some(*scale),
            Density::Quadratic { scale } => Some(scale * (norm2(x) + s * s)),
            Density::Grid(_) => None,
        }
    }
}

/// Seeded triples (x, r, R) with x in the inner half of the box, r log-uniform in [r_min, r_max]
/// and R/r log-uniform in [1, ratio_max].
pub fn growth_sample(domain: &GridDomain, count: usize, r_min: f64, r_max: f64, ratio_max: f64, seed: u64) -> Vec<(Point, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = 0.5 * domain.half_width();
    (0..count)
        .map(|_| {
            let mut x = [0.0; 3];
            for c in x.iter_mut().take(domain.dim()) {
                *c = rng.gen_range(-l..=l);
            }
            let r = (r_min.ln() + rng.gen::<f64>() * (r_max / r_min).ln()).exp();
            let big_r = r * (rng.gen::<f64>() * ratio_max.ln()).exp();
            (x, r, big_r.max(r * (1.0 + 1e-9)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub constants: GrowthConstants,
    /// Unrounded sup of μ(B(x,2r)) / (μ(B(x,r)) + r^{d−2}) on the sample.
    pub d_mu_raw: f64,
    /// Sample triple at which C_μ is attained.
    pub witness: (Point, f64, f64),
}

impl MeasureModel {
    /// Fits the largest δ_μ on the lattice {0.25, 0.5, …, 4} whose C_μ is finite (stable when the
    /// ratio R/r grows), and the smallest D_μ on a lattice of step 1/4.
    pub fn certify_growth(&self, sample: &[(Point, f64, f64)]) -> Result<GrowthCertificate> {
        if sample.is_empty() {
            return Err(Error::InvalidArgument("empty certification sample".into()));
        }
        let d = self.dim() as f64;
        let masses: Vec<(f64, f64)> = sample.iter().map(|(x, r, big_r)| (self.ball_measure(x, *r), self.ball_measure(x, *big_r))).collect();
        let log_ratio: Vec<f64> = sample.iter().map(|(_, r, big_r)| (big_r / r).ln()).collect();

        let mut best: Option<(f64, f64, usize)> = None;
        let mut worst_failure: Option<(usize, f64)> = None;
        for delta in lattice(0.25, 4.0, 0.25) {
            let required: Vec<f64> = sample
                .iter()
                .zip(&masses)
                .map(|((_, r, big_r), (mr, m_big))| {
                    if *mr == 0.0 {
                        0.0
                    } else if *m_big == 0.0 {
                        f64::INFINITY
                    } else {
                        mr / m_big * (big_r / r).powf(d - 2.0 + delta)
                    }
                })
                .collect();
            let sup = scale_stable_sup(&log_ratio, &required, STABILITY_TOL);
            if sup.stable && sup.value <= CONSTANT_CAP {
                best = Some((delta, sup.value.max(f64::MIN_POSITIVE), sup.argmax));
            } else if worst_failure.is_none() {
                worst_failure = Some((sup.argmax, sup.value));
            }
        }
        let Some((delta, c_mu, argmax)) = best else {
            let (i, v) = worst_failure.expect("lattice is nonempty");
            let (x, r, big_r) = sample[i];
            return Err(Error::CannotCertify {
                reason: format!("no δ_μ > 0 admits a bounded C_μ (ratio reaches {v:.3e})"),
                x,
                r,
                big_r,
            });
        };

        let mut d_raw: f64 = 1.0;
        for (x, r, _) in sample {
            let num = self.ball_measure(x, 2.0 * r);
            let den = self.ball_measure(x, *r) + r.powf(d - 2.0);
            d_raw = d_raw.max(num / den);
        }
        let d_mu = (d_raw * 4.0 - 1e-9).ceil() / 4.0;
        Ok(GrowthCertificate {
            constants: GrowthConstants { delta, c_mu, d_mu: d_mu.max(1.0) },
            d_mu_raw: d_raw,
            witness: sample[argmax],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralRatio {
    /// ∫_{B(x,R)} dμ(y) / |y − x|^k.
    pub integral: f64,
    /// μ(B(x,R)) / R^k.
    pub bound_base: f64,
    /// integral / bound_base (0 when both vanish).
    pub constant: f64,
    /// Analytic bound for the excluded singular cell (0 on the analytic route).
    pub excluded_shell: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimates {
    pub first: IntegralRatio,
    pub second: Option<IntegralRatio>,
}

impl MeasureModel {
    fn singular_integral(&self, x: &Point, big_r: f64, k: usize) -> Result<IntegralRatio> {
        let d = self.dim();
        if k >= d {
            return Err(Error::InvalidArgument(format!("kernel exponent {k} must be below d = {d}")));
        }
        let kf = k as f64;
        let mut excluded_shell = 0.0;
        let mut integral = match self.spherical_mean(x, 0.0) {
            Some(_) => {
                let area = unit_sphere_area(d);
                let q = integrate(
                    |s| area * s.powi((d - 1 - k) as i32) * self.spherical_mean(x, s).unwrap(),
                    0.0,
                    big_r,
                    &[],
                    QuadOptions { rel_tol: 1e-12, ..Default::default() },
                );
                q.value
            }
            None => {
                let Density::Grid(g) = &self.density else { unreachable!() };
                let h = self.domain.spacing();
                let cell = self.domain.cell_volume();
                // Radius of the ball with the volume of one cell.
                let r0 = (cell / unit_ball_volume(d)).powf(1.0 / d as f64);
                let mut sum = 0.0;
                let mut near_max: f64 = 0.0;
                self.domain.for_each_in_ball(&Ball::new(*x, big_r)?, |i, y| {
                    let s = dist(y, x);
                    if s < 0.5 * h {
                        near_max = near_max.max(g.values()[i]);
                    } else {
                        sum += g.values()[i] / s.powi(k as i32) * cell;
                    }
                });
                excluded_shell = near_max * unit_sphere_area(d) * r0.powf(d as f64 - kf) / (d as f64 - kf);
                sum
            }
        };
        for a in &self.atoms {
            let s = dist(&a.point, x);
            if s <= big_r * (1.0 + 1e-12) {
                if s == 0.0 {
                    return Err(Error::Precondition("an atom sits at the evaluation point".into()));
                }
                integral += a.mass / s.powi(k as i32);
            }
        }
        let total = integral + excluded_shell;
        if total > 0.0 && excluded_shell / total > 0.1 {
            return Err(Error::SingularityUnresolved { fraction: excluded_shell / total });
        }
        let bound_base = self.ball_measure(x, big_r) / big_r.powf(kf);
        let constant = if total == 0.0 { 0.0 } else { total / bound_base };
        Ok(IntegralRatio { integral: total, bound_base, constant, excluded_shell })
    }

    /// ∫_{B(x,R)} dμ/|y−x|^{d−2} against μ(B(x,R))/R^{d−2}, and for δ_μ > 1 the same with d − 1.
    pub fn check_integral_estimates(&self, x: &Point, big_r: f64) -> Result<IntegralEstimates> {
        let d = self.dim();
        if d < 3 {
            return Err(Error::Precondition("integral estimates need d ≥ 3".into()));
        }
        let cert = self.certified.ok_or_else(|| Error::Precondition("measure is not certified".into()))?;
        let first = self.singular_integral(x, big_r, d - 2)?;
        let second = if cert.delta > 1.0 { Some(self.singular_integral(x, big_r, d - 1)?) } else { None };
        Ok(IntegralEstimates { first, second })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraDecayReport {
    pub n: f64,
    pub constant: f64,
    pub witness: (Point, f64),
}

impl MeasureModel {
    /// Empirical C in μ(B(x₀,R)) ≤ C R^{d−2} (1 + R/ρ(x₀))^N over the sample.
    pub fn check_extra_decay(&self, rho: &CriticalRadius, sample: &[(Point, f64)], n: f64) -> Result<ExtraDecayReport> {
        let cert = self.certified.ok_or_else(|| Error::Precondition("measure is not certified".into()))?;
        if n < cert.d_mu.log2() {
            return Err(Error::Precondition(format!("N = {n} is below log2 D_mu = {}", cert.d_mu.log2())));
        }
        let d = self.dim() as f64;
        let mut constant: f64 = 0.0;
        let mut witness = sample.first().copied().ok_or_else(|| Error::InvalidArgument("empty sample".into()))?;
        for &(x0, big_r) in sample {
            let rho_x = rho.eval(&x0);
            let c = self.ball_measure(&x0, big_r) / (big_r.powf(d - 2.0) * (1.0 + big_r / rho_x).powf(n));
            if c > constant {
                constant = c;
                witness = (x0, big_r);
            }
        }
        Ok(ExtraDecayReport { n, constant, witness })
    }
}
