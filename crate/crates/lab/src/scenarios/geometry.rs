use super::{Check, Recorder};
use crate::config::ExperimentConfig;
use scz_core::agmon::{check_global_bounds, check_local_equivalence, constant_rho_distance, AgmonGraph, Stencil};
use scz_core::critical_radius::{build_covering, rho_from_measure, sample_pairs, CriticalRadius, RhoFn};
use scz_core::geometry::{dist, norm, Point, ORIGIN};
use scz_core::grid::GridDomain;
use scz_core::measures::{growth_sample, Density, GrowthConstants, MeasureModel};
use scz_core::quadrature::{integrate, QuadOptions};
use scz_core::Error;
use std::f64::consts::PI;
use std::sync::Arc;

fn unit_ball_volume(d: usize) -> f64 {
    [2.0, PI, 4.0 * PI / 3.0][d - 1]
}

/// Reads `samples` (default 1000) and `seed`.
pub fn critical_radius_validation(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let pairs = Arc::new(sample_pairs(cfg.domain.d, cfg.domain.half_width, cfg.params.samples.unwrap_or(1000), cfg.seed()));
    let (c1, p1, p2, p3) = (cfg.clone(), pairs.clone(), pairs.clone(), pairs);
    vec![
        Check::new(
            "configured_rho",
            "ρ(y) lies between C₀⁻¹ρ(x)(1+|x−y|/ρ(x))^{−k₀} and C₀ρ(x)(1+|x−y|/ρ(x))^{k₀/(k₀+1)} for some finite (C₀, k₀)",
            move |r: &mut Recorder| {
                let v = c1.rho()?.validate(&p1)?;
                r.holds("lattice_fit_found", true);
                r.constant("c0", v.c0);
                r.constant("k0", v.k0);
                for row in &v.table {
                    if row.c0.is_finite() {
                        r.point("c0_by_k0", row.k0, row.c0);
                    }
                }
                Ok(())
            },
        ),
        Check::new("constant_rho", "a constant ρ is compatible with C₀ = 1, k₀ = 0", move |r: &mut Recorder| {
            let v = CriticalRadius::constant(1.0)?.validate(&p2)?;
            r.at_most("c0", v.c0, 1.0, 1e-12);
            r.at_most("k0", v.k0, 0.0, 0.0);
            Ok(())
        }),
        Check::new("exponential_rho_rejected", "ρ = e^{|x|} grows too fast to be a critical radius", move |r: &mut Recorder| {
            let f: RhoFn = Arc::new(|x: &Point| norm(x).exp());
            let res = CriticalRadius::user("exp_abs", f, &[])?.validate(&p3);
            if let Err(Error::NoFit { required_c0, .. }) = &res {
                r.constant("worst_required_c0", *required_c0);
            }
            r.holds("rejected_with_witness", matches!(res, Err(Error::NoFit { .. })));
            Ok(())
        }),
    ]
}

/// Reads `samples` (default 1000) and `seed`; the constant-ρ oracle needs d ≥ 2 to be nontrivial.
pub fn agmon_lemmas(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let count = cfg.params.samples.unwrap_or(1000);
    let (c1, c2, c3) = (cfg.clone(), cfg.clone(), cfg);
    vec![
        Check::new(
            "local_and_global_bounds",
            "d_ρ(x,y) ≍ |x−y|/ρ(x) when |x−y| ≤ 2ρ(x); (1+|x−y|/ρ(x))^{1/(k₀+1)}/D₁ ≤ d_ρ ≤ C(1+|x−y|/ρ(x))^{k₀+1}",
            move |r: &mut Recorder| {
                let g = c1.grid();
                let rho = c1.fitted_rho()?;
                let graph = AgmonGraph::new(&rho, &g, Stencil::Extended)?;
                let pairs = sample_pairs(g.dim(), 0.9 * g.half_width(), count, c1.seed());
                // Shrink each pair toward x, snap both ends to nodes, and keep those with |x − y| ≤ 2ρ(x).
                let near: Vec<(Point, Point)> = pairs
                    .iter()
                    .map(|(x, y)| {
                        let t = (1.9 * rho.eval(x) / dist(x, y).max(1e-300)).min(1.0);
                        let y: Point = std::array::from_fn(|a| x[a] + t * (y[a] - x[a]));
                        (g.node(g.nearest_node(x)), g.node(g.nearest_node(&y)))
                    })
                    .filter(|(x, y)| dist(x, y) <= 2.0 * rho.eval(x))
                    .collect();
                r.constant("local_pairs", near.len() as f64);
                let local = check_local_equivalence(&graph, &rho, &near)?;
                r.constant("d0", local.d0);
                r.constant("local_min_ratio", local.min_ratio);
                r.constant("local_max_ratio", local.max_ratio);
                r.holds("d0_finite", local.d0.is_finite());
                let global = check_global_bounds(&graph, &rho, &pairs)?;
                r.constant("c0d", global.c0d);
                r.constant("d1", global.d1);
                r.constant("lower_bound_slack", global.lower_bound_slack);
                r.holds("c0d_finite", global.c0d.is_finite());
                r.holds("d1_finite", global.d1.is_finite());
                r.holds("combined_lower_bound", global.lower_bound_holds);
                Ok(())
            },
        ),
        Check::new(
            "constant_rho_closed_form",
            "for constant ρ₀ the Agmon distance is |x−y|/ρ₀",
            move |r: &mut Recorder| {
                let g = c2.grid();
                let graph = AgmonGraph::new(&CriticalRadius::constant(1.0)?, &g, Stencil::Extended)?;
                let c = g.nearest_node(&ORIGIN);
                let origin = g.node(c);
                let field = graph.distances_from(c);
                let mut worst: f64 = 0.0;
                for i in (0..g.node_count()).filter(|&i| i != c) {
                    let x = g.node(i);
                    let exact = constant_rho_distance(1.0, &x, &origin);
                    worst = worst.max((field[i] / exact - 1.0).abs());
                    if x[1..].iter().all(|v| *v == origin[1]) && x[0] > origin[0] {
                        r.point("graph_distance_axis", x[0], field[i]);
                        r.point("closed_form_axis", x[0], exact);
                    }
                }
                r.at_most("max_relative_error", worst, 0.0, 0.08);
                Ok(())
            },
        ),
        Check::new(
            "oscillator_line_quadrature",
            "in d = 1 with ρ = min{1, 1/|x|}, d_ρ(a, b) = ∫_a^b max{1, |t|} dt",
            move |r: &mut Recorder| {
                let l = c3.domain.half_width.max(6.0);
                let g = GridDomain::with_spacing(1, l, 0.01)?;
                let graph = AgmonGraph::new(&CriticalRadius::harmonic_oscillator(), &g, Stencil::Extended)?;
                let mut worst: f64 = 0.0;
                for (a, b) in [(-0.75, 0.05), (0.0333, 0.15), (0.25, 0.833), (-0.33, 0.5)] {
                    let (a, b) = (a * l, b * l);
                    let exact = integrate(|t: f64| t.abs().max(1.0), a, b, &[-1.0, 1.0], QuadOptions::default()).value;
                    let v = graph.distance(&[a, 0.0, 0.0], &[b, 0.0, 0.0])?;
                    worst = worst.max((v / exact - 1.0).abs());
                }
                r.at_most("max_relative_error", worst, 0.0, 0.01);
                Ok(())
            },
        ),
    ]
}

pub fn covering_overlap(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    vec![Check::new(
        "critical_ball_covering",
        "critical balls cover the domain and σ-dilates overlap at most Cσ^{N₁} times",
        move |r: &mut Recorder| {
            let rho = cfg.fitted_rho()?;
            let cov = build_covering(&rho, &cfg.grid())?;
            r.constant("balls", cov.centers.len() as f64);
            r.constant("c", cov.c);
            r.constant("n1", cov.n1);
            r.at_most("uncovered_nodes", cov.uncovered as f64, 0.0, 0.0);
            for &(sigma, o) in &cov.overlaps {
                r.point("overlap", sigma, o as f64);
                r.point("bound", sigma, cov.overlap_bound(sigma));
                r.at_most(&format!("overlap_sigma_{sigma}"), o as f64, cov.overlap_bound(sigma), 0.0);
            }
            Ok(())
        },
    )]
}

/// Reads `samples` (default 400) and `seed`.
pub fn measures_growth(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let count = cfg.params.samples.unwrap_or(400);
    let (c1, c2, c3, c4) = (cfg.clone(), cfg.clone(), cfg.clone(), cfg);
    let sample = move |c: &ExperimentConfig| growth_sample(&c.grid(), count, 0.01, 4.0 * c.domain.half_width, 1e3, c.seed());
    vec![
        Check::new(
            "configured_measure",
            "μ(B(x,r)) ≤ C_μ(r/R)^{d−2+δ_μ}μ(B(x,R)) for r < R, and μ(B(x,2r)) ≤ D_μ(μ(B(x,r)) + r^{d−2})",
            move |r: &mut Recorder| {
                let mu = c1.measure_model()?;
                let cert = mu.certify_growth(&sample(&c1))?;
                r.holds("certified", true);
                r.constant("delta_mu", cert.constants.delta);
                r.constant("c_mu", cert.constants.c_mu);
                r.constant("d_mu", cert.constants.d_mu);
                r.constant("d_mu_raw", cert.d_mu_raw);
                Ok(())
            },
        ),
        Check::new(
            "lebesgue_reference",
            "Lebesgue measure in d = 3 has (δ_μ, C_μ, D_μ) = (2, 1, 8)",
            move |r: &mut Recorder| {
                let g = GridDomain::new(3, c2.domain.half_width, 9)?;
                let cert = MeasureModel::lebesgue(g, 1.0)?.certify_growth(&growth_sample(&g, count, 0.01, 4.0 * g.half_width(), 1e3, c2.seed()))?;
                let k = cert.constants;
                r.at_most("delta_mu_error", (k.delta - 2.0).abs(), 0.0, 0.0);
                r.at_most("c_mu_error", (k.c_mu - 1.0).abs(), 0.0, 0.05);
                r.at_most("d_mu_error", (k.d_mu - 8.0).abs(), 0.0, 0.0);
                Ok(())
            },
        ),
        Check::new("atom_control", "a point mass has no finite growth constants", move |r: &mut Recorder| {
            let g = GridDomain::new(3, c3.domain.half_width, 9)?;
            let atom = MeasureModel::atom(g, ORIGIN, 1.0)?;
            let mut s = growth_sample(&g, 100, 0.01, 4.0, 1e3, c3.seed());
            s.extend((0..20).map(|k| (ORIGIN, 0.01 * 1.3f64.powi(k), 1.0 + k as f64)));
            r.holds("fails_with_witness", matches!(atom.certify_growth(&s), Err(Error::CannotCertify { .. })));
            Ok(())
        }),
        Check::new(
            "integral_estimates",
            "∫_{B(x,R)} dμ/|y−x|^{d−2} ≤ C μ(B(x,R))/R^{d−2} with C = d/2 for Lebesgue, and C = d with exponent d−1",
            move |r: &mut Recorder| {
                let d = c4.domain.d;
                if d < 2 {
                    return Err("the integral estimates need d ≥ 2".into());
                }
                let fine = GridDomain::new(d, 2.0, [0, 0, 401, 81][d])?;
                let mu = MeasureModel::lebesgue(fine, 1.0)?.to_grid()?.with_certificate(GrowthConstants { delta: 2.0, c_mu: 1.0, d_mu: 8.0 });
                let est = mu.check_integral_estimates(&ORIGIN, 1.5)?;
                let half = d as f64 / 2.0;
                r.constant("first_constant", est.first.constant);
                r.at_most("first_relative_error", (est.first.constant - half).abs() / half, 0.0, 0.02);
                let second = est.second.ok_or("no second estimate for δ_μ = 2")?;
                r.constant("second_constant", second.constant);
                r.at_most("second_relative_error", (second.constant - d as f64).abs() / d as f64, 0.0, 0.02);
                Ok(())
            },
        ),
    ]
}

/// Reads `samples` (default 200, pairs for the validation) and `seed`.
pub fn rho_mu_construction(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (c1, c2, c3, c4) = (cfg.clone(), cfg.clone(), cfg.clone(), cfg);
    let probe_points = |c: &ExperimentConfig| -> Vec<Point> {
        let l = 0.25 * c.domain.half_width;
        let mut pts = vec![ORIGIN];
        pts.extend(sample_pairs(c.domain.d, l, 3, c.seed()).into_iter().map(|p| p.0));
        pts
    };
    vec![
        Check::new(
            "configured_measure",
            "ρ_μ(x) is the radius at which μ(B(x, r))/r^{d−2} crosses 1; s·Lebesgue gives (s ω_d)^{−1/2}",
            move |r: &mut Recorder| {
                let mu = c1.measure_model()?;
                let d = c1.domain.d;
                let exact = match mu.density() {
                    Density::Lebesgue { scale } if mu.atoms().is_empty() => Some((scale * unit_ball_volume(d)).powf(-0.5)),
                    _ => None,
                };
                let mut worst: f64 = 0.0;
                for (i, x) in probe_points(&c1).iter().enumerate() {
                    let v = rho_from_measure(&mu, x)?;
                    r.constant(&format!("rho_mu_{i}"), v);
                    if let Some(e) = exact {
                        worst = worst.max((v - e).abs());
                    }
                }
                match exact {
                    Some(_) => r.at_most("max_abs_error", worst, 0.0, 1e-6),
                    None => r.holds("positive_everywhere", true),
                };
                Ok(())
            },
        ),
        Check::new(
            "quadratic_closed_form",
            "for V = |y|², ρ_μ(0) = ((d+2)/(d ω_d))^{1/4}",
            move |r: &mut Recorder| {
                let d = c2.domain.d;
                let mu = MeasureModel::quadratic(c2.grid(), 1.0)?;
                let v = rho_from_measure(&mu, &ORIGIN)?;
                let exact = ((d as f64 + 2.0) / (d as f64 * unit_ball_volume(d))).powf(0.25);
                r.constant("rho_mu_origin", v);
                r.at_most("abs_error", (v - exact).abs(), 0.0, 1e-6);
                Ok(())
            },
        ),
        Check::new("scaling_monotone", "ρ_{αμ} ≤ ρ_μ for α ≥ 1", move |r: &mut Recorder| {
            let mu = c3.measure_model()?;
            let mut ok = true;
            for x in probe_points(&c3) {
                let base = rho_from_measure(&mu, &x)?;
                for alpha in [2.0, 4.0, 8.0] {
                    let v = rho_from_measure(&mu.scaled(alpha)?, &x)?;
                    r.point("rho_by_scale", alpha, v);
                    ok &= v <= base * (1.0 + 1e-9);
                }
            }
            r.holds("monotone", ok);
            Ok(())
        }),
        Check::new(
            "quadratic_is_critical_radius",
            "ρ_μ of μ = |y|²dy satisfies the critical radius compatibility",
            move |r: &mut Recorder| {
                let mu = Arc::new(MeasureModel::quadratic(c4.grid(), 1.0)?);
                let rho = CriticalRadius::from_measure(mu)?;
                let pairs = sample_pairs(c4.domain.d, 0.5 * c4.domain.half_width, c4.params.samples.unwrap_or(200), c4.seed());
                let v = rho.validate(&pairs)?;
                r.constant("c0", v.c0);
                r.constant("k0", v.k0);
                r.holds("lattice_fit_found", true);
                Ok(())
            },
        ),
    ]
}
