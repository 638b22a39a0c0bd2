use super::{Check, CheckError, Recorder};
use crate::config::{ExperimentConfig, KernelName};
use scz_core::agmon::{check_global_bounds, constant_rho_distance, AgmonGraph, Stencil};
use scz_core::critical_radius::{sample_pairs, CriticalRadius};
use scz_core::geometry::{point, ORIGIN};
use scz_core::grid::GridDomain;
use scz_core::kernels::{
    certify_scz_integral, certify_scz_pointwise, check_fundamental_bounds, check_heat_derivative_bounds, check_tj_bound, heat_sample,
    integral_sample, mehler_pde_residual, pair_sample, scalar_resolvent_identity, smoothness_triples, tj_kernel, FitLattice,
    FundamentalSolution, HeatModel, PowerKernel, TjKernel, TjModel, LEBESGUE_RHO3, PDE_STEP,
};
use scz_core::quadrature::{integrate, QuadOptions};
use scz_core::Error;
use std::f64::consts::PI;
use std::sync::Arc;

/// K₁(z) = ∫₀^∞ e^{−z cosh s} cosh s ds.
fn bessel_k1(z: f64) -> f64 {
    let upper = (60.0 / z).acosh().max(1.0) + 2.0;
    integrate(|s: f64| (-z * s.cosh()).exp() * s.cosh(), 0.0, upper, &[], QuadOptions { rel_tol: 1e-13, ..Default::default() }).value
}

fn tj_params(cfg: &ExperimentConfig) -> Result<(u8, f64), CheckError> {
    let spec = cfg.kernel.as_ref().ok_or("no kernel configured")?;
    match KernelName::parse(&spec.name) {
        Some(KernelName::Tj(j)) => Ok((j, spec.kappa.unwrap_or(1.0))),
        _ => Err(format!("tj_certification needs a tj(j) kernel, got `{}`", spec.name).into()),
    }
}

/// Reads `samples` (annulus samples, default 40) and `seed`.
pub fn tj_certification(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (c1, c2, c3) = (cfg.clone(), cfg.clone(), cfg);
    vec![
        Check::new(
            "resolvent_identity",
            "(1/π)∫₀^∞ λ^{−1/2}(a + λ)^{−1} dλ = a^{−1/2}",
            |r: &mut Recorder| {
                let worst = [0.3, 1.0, 4.0].into_iter().map(scalar_resolvent_identity).collect::<scz_core::Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
                r.at_most("max_abs_error", worst, 0.0, 1e-8);
                Ok(())
            },
        ),
        Check::new(
            "closed_forms",
            "for V = κ², K₁ = κ²K₁(κr)/(2π²r) and K₂ = κ²e^{−κr}/(4πr)",
            move |r: &mut Recorder| {
                let (j, kappa) = tj_params(&c1)?;
                let model = TjModel::ConstantV { kappa };
                let mut worst: f64 = 0.0;
                for k in 0..24 {
                    let rr = 0.05 * 1.25f64.powi(k);
                    let v = tj_kernel(j, &model, &ORIGIN, &point(&[rr, 0.0, 0.0]))?;
                    let exact = if j == 1 {
                        kappa * kappa * bessel_k1(kappa * rr) / (2.0 * PI * PI * rr)
                    } else {
                        kappa * kappa * (-kappa * rr).exp() / (4.0 * PI * rr)
                    };
                    worst = worst.max(((v - exact) / exact).abs());
                    r.point("kernel_by_r", rr, v);
                    r.point("closed_form_by_r", rr, exact);
                }
                r.at_most("max_relative_error", worst, 0.0, 1e-8);
                Ok(())
            },
        ),
        Check::new(
            "integral_certification",
            "the kernel satisfies the s-average exponential size and smoothness conditions over annuli",
            move |r: &mut Recorder| {
                let kernel = c2.kernel()?;
                let (_, kappa) = tj_params(&c2)?;
                let rho = CriticalRadius::constant(LEBESGUE_RHO3 / kappa)?;
                let g = c2.grid();
                let count = c2.params.samples.unwrap_or(40);
                let s1 = integral_sample(&rho, &g, count, c2.seed())?;
                let s2 = integral_sample(&rho, &g, count, c2.seed() + 1)?;
                let cert = certify_scz_integral(kernel.as_ref(), &rho, &g, &s1, &s2, &FitLattice::default(), None)?;
                r.constant("s", cert.tag.s());
                r.constant("c", cert.size.c);
                r.constant("m", cert.size.m);
                r.constant("size_constant", cert.size.certified_constant);
                r.constant("delta", cert.smoothness.delta);
                r.constant("smoothness_constant", cert.smoothness.certified_constant);
                r.constant("fresh_min_margin", cert.revalidation.min_margin);
                r.holds("c_positive", cert.size.c > 0.0);
                r.holds("fresh_sample_revalidation", cert.revalidation.passed);
                Ok(())
            },
        ),
        Check::new(
            "oscillator_bound",
            "for V = |x|², |K_j| ≤ C e^{−c(1+|x−y|/ρ(x))^m} V(y)^{j/2}/|x−y|^{d−j}",
            move |r: &mut Recorder| {
                let (j, _) = tj_params(&c3)?;
                let rho = CriticalRadius::harmonic_oscillator();
                let k = TjKernel::new(j, TjModel::Mehler { d: 3 }, 4.0, 0.1, 0.5)?;
                let pairs = pair_sample(&rho, 3, 2.0, (0.05, 8.0), 150, c3.seed());
                let fit = check_tj_bound(&k, &rho, &pairs, &FitLattice::default())?;
                r.constant("c", fit.c);
                r.constant("certified_constant", fit.certified_constant);
                r.holds("constant_finite", fit.certified_constant.is_finite());
                r.holds("c_positive", fit.c > 0.0);
                Ok(())
            },
        ),
    ]
}

/// Reads `samples` (default 600) and `seed`; the Mehler model uses the configured dimension.
pub fn heat_derivative_bounds(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let count = cfg.params.samples.unwrap_or(600);
    let mut checks = vec![Check::new(
        "mehler_pde",
        "the Mehler kernel solves ∂ₜW = ∂²ₓW − x²W",
        {
            let cfg = cfg.clone();
            move |r: &mut Recorder| {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed());
                let mut worst: f64 = 0.0;
                for _ in 0..100 {
                    let t = rng.gen_range(0.1f64.ln()..3f64.ln()).exp();
                    let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    let res = mehler_pde_residual(t, x, y, PDE_STEP)?;
                    r.point("residual_by_t", t, res);
                    worst = worst.max(res);
                }
                r.at_most("max_residual", worst, 0.0, 1e-4);
                Ok(())
            }
        },
    )];
    let models = [
        ("constant_potential", HeatModel::ConstantV { kappa: 1.0, d: 3 }),
        ("mehler", HeatModel::Mehler { d: cfg.domain.d }),
    ];
    for (name, model) in models {
        let cfg = cfg.clone();
        checks.push(Check::new(
            name,
            "|t∂ₜW_t(x,y)| ≤ C t^{−d/2}e^{−|x−y|²/(at)}e^{−c₀(1+max{|x−y|,√t}/ρ(x))^{1/(k₀+1)}}, Hölder in x for |h| ≤ √t",
            move |r: &mut Recorder| {
                let rho = match model {
                    HeatModel::ConstantV { kappa, .. } => CriticalRadius::constant(1.0 / kappa)?,
                    HeatModel::Mehler { .. } => CriticalRadius::harmonic_oscillator(),
                };
                let d = model.dim();
                let s = heat_sample(d, 3.0, (1e-3, 200.0), count, cfg.seed());
                let f = heat_sample(d, 3.0, (1e-3, 200.0), count, cfg.seed() + 1);
                let rep = check_heat_derivative_bounds(&model, &rho, &s, &f, &FitLattice::default())?;
                r.constant("size_constant", rep.size.certified_constant);
                r.constant("c0", rep.size.c);
                r.constant("gaussian_slack", rep.gaussian_slack);
                r.constant("holder_delta", rep.holder.fit.delta);
                r.constant("holder_constant", rep.holder.fit.certified_constant);
                r.holds("size_constant_finite", rep.size.certified_constant.is_finite());
                r.holds("c0_positive", rep.size.c > 0.0);
                r.holds("fresh_sample_revalidation", rep.revalidation.passed);
                Ok(())
            },
        ));
    }
    checks
}

/// Reads `samples` (pairs, default 400) and `seed`. ρ should be the constant r₀/κ.
pub fn riesz_constv_certification(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let count = cfg.params.samples.unwrap_or(400);
    let kappa = cfg.kernel.as_ref().and_then(|k| k.kappa).unwrap_or(1.0);
    let samples = move |cfg: &ExperimentConfig, rho: &CriticalRadius| {
        let pairs = pair_sample(rho, 3, 1.0, (0.01, 128.0), count, cfg.seed());
        let fresh = pair_sample(rho, 3, 1.0, (0.01, 128.0), count, cfg.seed() + 1);
        let tri = smoothness_triples(&pairs[..40.min(count)], 3, 8, cfg.seed() + 2);
        let tri_fresh = smoothness_triples(&fresh[..40.min(count)], 3, 8, cfg.seed() + 3);
        (pairs, tri, fresh, tri_fresh)
    };
    let gamma_fit = move |seed: u64| {
        let gamma = FundamentalSolution::constant_v(kappa)?;
        let r0 = LEBESGUE_RHO3 / kappa;
        check_fundamental_bounds(&gamma, |x, y| Ok(constant_rho_distance(r0, x, y)), &sample_pairs(3, 4.0, 300, seed))
    };
    let (c1, c2, c3, c4) = (cfg.clone(), cfg.clone(), cfg.clone(), cfg);
    vec![
        Check::new(
            "fundamental_solution",
            "Γ(x,y) = e^{−κ|x−y|}/(4π|x−y|) meets C₁e^{−ε d_ρ}/r ≤ Γ ≤ C₂e^{−ε d_ρ}/r with C₁ = C₂ = 1/(4π)",
            move |r: &mut Recorder| {
                let fit = gamma_fit(c1.seed())?;
                r.constant("eps", fit.eps1.min(fit.eps2));
                r.constant("c1", fit.c1);
                r.constant("c2", fit.c2);
                let c = 1.0 / (4.0 * PI);
                r.at_most("residual", fit.residual, 0.0, 1e-8);
                r.at_most("c1_error", (fit.c1 - c).abs(), 0.0, 1e-8);
                r.at_most("c2_error", (fit.c2 - c).abs(), 0.0, 1e-8);
                Ok(())
            },
        ),
        Check::new(
            "pointwise_certification",
            "the kernel obeys |K| ≤ C e^{−c(1+|x−y|/ρ(x))}/|x−y|^d and the matching Hölder smoothness",
            move |r: &mut Recorder| {
                let kernel = c2.kernel()?;
                let rho = c2.rho()?;
                let (pairs, tri, fresh, tri_fresh) = samples(&c2, &rho);
                let cert = certify_scz_pointwise(kernel.as_ref(), &rho, (&pairs, &tri), (&fresh, &tri_fresh), &FitLattice::default())?;
                r.constant("c", cert.size.c);
                r.constant("size_constant", cert.size.certified_constant);
                r.constant("delta", cert.smoothness.delta);
                r.constant("fresh_min_margin", cert.revalidation.min_margin);
                r.at_most("m_error", (cert.size.m - kernel.decl().m).abs(), 0.0, 0.0);
                r.holds("fresh_sample_revalidation", cert.revalidation.passed);
                Ok(())
            },
        ),
        Check::new(
            "decay_constant_form",
            "the fitted decay c is within a factor 2 of ε/(2D₁), with ε the decay of Γ in d_ρ and D₁ the Agmon lower-bound constant",
            move |r: &mut Recorder| {
                let kernel = c3.kernel()?;
                let rho = c3.rho()?;
                let (pairs, tri, fresh, tri_fresh) = samples(&c3, &rho);
                let cert = certify_scz_pointwise(kernel.as_ref(), &rho, (&pairs, &tri), (&fresh, &tri_fresh), &FitLattice::default())?;
                let fit = gamma_fit(c3.seed())?;
                let eps = fit.eps1.min(fit.eps2);
                let fitted = rho.clone().fitted(&sample_pairs(3, 3.0, 200, c3.seed()))?.0;
                let cube = GridDomain::new(3, 3.0, 25)?;
                let graph = AgmonGraph::new(&fitted, &cube, Stencil::Extended)?;
                let d1 = check_global_bounds(&graph, &fitted, &sample_pairs(3, 2.8, 200, c3.seed() + 1))?.d1;
                let target = eps / (2.0 * d1);
                let ratio = cert.size.c / target;
                r.constant("eps", eps);
                r.constant("d1", d1);
                r.constant("target", target);
                r.constant("fitted_c", cert.size.c);
                r.constant("ratio", ratio);
                r.at_most("ratio", ratio, 2.0, 0.0);
                r.at_least("ratio", ratio, 0.5, 0.0);
                Ok(())
            },
        ),
        Check::new(
            "no_decay_control",
            "1/|x−y|^d has no exponential decay and yields a violation witness",
            move |r: &mut Recorder| {
                let rho = c4.rho()?;
                let (pairs, tri, fresh, tri_fresh) = samples(&c4, &rho);
                let res = certify_scz_pointwise(&PowerKernel { dim: 3 }, &rho, (&pairs, &tri), (&fresh, &tri_fresh), &FitLattice::default());
                r.holds("violation_witness", matches!(res, Err(Error::ViolationWitness { .. })));
                Ok(())
            },
        ),
    ]
}
