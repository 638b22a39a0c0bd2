use super::{Check, Recorder};
use crate::config::ExperimentConfig;
use scz_core::grid::GridFunction;
use scz_core::kernels::{KernelOperator, SczType};
use scz_core::maximal::{
    compare_centered_uncentered, endpoint_bmo_experiment, maximal_boundedness_experiment, rdf_iteration, rdf_norm_estimate, EndpointParams,
    ProbeKind, ProbeSet, RDF_DEFAULT_TERMS,
};
use scz_core::Error;
use std::sync::Arc;

/// Reads `c` and `m` (the centered operator's (c₂, m₂), default (1, 1)) and `doublings` (default 2).
pub fn maximal_comparison(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (c2, m2) = (cfg.params.c.unwrap_or(1.0), cfg.params.m.unwrap_or(1.0));
    let doublings = cfg.params.doublings.unwrap_or(2);
    let cfg2 = cfg.clone();
    vec![
        Check::new(
            "uncentered_by_centered",
            "the uncentered operator with m₁ = (k₀+1)m₂, c₁ = c₂(2C₀)^{m₂} is dominated pointwise by the centered one with (c₂, m₂)",
            move |r: &mut Recorder| {
                let rho = cfg.fitted_rho()?;
                let (m1, c1) = ((rho.k0() + 1.0) * m2, c2 * (2.0 * rho.c0()).powf(m2));
                r.constant("c1", c1);
                r.constant("m1", m1);
                let base = cfg.probes()?;
                let mut set = base;
                for _ in 0..doublings {
                    set = set.doubled();
                }
                let probes = set.generate(&cfg.grid())?;
                let mut ratios = Vec::with_capacity(probes.len());
                for (i, f) in probes.iter().enumerate() {
                    let cmp = compare_centered_uncentered(f, &rho, c1, m1, c2, m2)?;
                    if i == 0 {
                        let g = cfg.grid();
                        for (j, v) in cmp.ratio.iter().enumerate() {
                            r.point("ratio_first_probe", g.node(j)[0], *v);
                        }
                    }
                    ratios.push(cmp.max_ratio);
                }
                let sups: Vec<f64> = (0..=doublings).map(|k| ratios[..base.count << k].iter().copied().fold(0.0, f64::max)).collect();
                for (k, s) in sups.iter().enumerate() {
                    r.point("sup_ratio_by_probe_count", (base.count << k) as f64, *s);
                }
                let change = sups.windows(2).map(|w| (w[1] - w[0]).abs() / w[0]).fold(0.0, f64::max);
                r.constant("fitted_constant", *sups.last().expect("at least one probe set"));
                r.holds("sup_ratio_finite", sups.iter().all(|s| s.is_finite()));
                r.at_most("sup_ratio_relative_change", change, 0.0, 0.10);
                Ok(())
            },
        ),
        Check::new(
            "parameter_map_enforced",
            "the comparison is refused when m₁ < (k₀+1)m₂",
            move |r: &mut Recorder| {
                let rho = cfg2.fitted_rho()?;
                let f = GridFunction::constant(cfg2.grid(), 1.0)?;
                let m1 = 0.9 * (rho.k0() + 1.0) * m2;
                let res = compare_centered_uncentered(&f, &rho, c2 * (2.0 * rho.c0()).powf(m2), m1, c2, m2);
                r.holds("relation_violation_raised", matches!(res, Err(Error::ParameterRelationViolated(_))));
                Ok(())
            },
        ),
    ]
}

/// Reads `p` (default 2), `c`, `m` (the weight's (c₁, m₁), default (1, 1)) and `doublings` (default 3).
pub fn maximal_characterization(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (p, c1, m1) = (cfg.params.p.unwrap_or(2.0), cfg.params.c.unwrap_or(1.0), cfg.params.m.unwrap_or(1.0));
    let doublings = cfg.params.doublings.unwrap_or(3);
    vec![Check::new(
        "maximal_boundedness",
        "w ∈ H^{ρ,m₁}_{p,c₁} makes the centered operator with c₂ = 1.05c₁(8C₀)^{m₁} bounded on L^p(w); boundedness returns w to H^{ρ,(k₀+1)m₁}_{p,c₂(2C₀)^{m₁}}",
        move |r: &mut Recorder| {
            let rho = cfg.fitted_rho()?;
            let e = maximal_boundedness_experiment(&cfg.weight()?, &rho, p, c1, m1, &cfg.family()?, &cfg.probes()?, doublings)?;
            for (n, v) in e.direction1.probe_counts.iter().zip(&e.direction1.norms) {
                r.point("norm_by_probe_count", *n as f64, *v);
            }
            for (n, v) in e.below_threshold.probe_counts.iter().zip(&e.below_threshold.norms) {
                r.point("below_threshold_norm_by_probe_count", *n as f64, *v);
            }
            r.constant("c2", e.c2);
            r.constant("m1_prime", e.m1_prime);
            r.constant("c1_prime", e.c1_prime);
            r.constant("weight_class_constant", e.weight_class.constant);
            r.constant("direction2_class_constant", e.direction2_class.constant);
            let (c0, k0) = (rho.c0(), rho.k0());
            r.at_most("c2_relation_error", (e.c2 - 1.05 * c1 * (8.0 * c0).powf(m1)).abs() / e.c2, 0.0, 1e-12);
            r.at_most("direction1_relative_change", e.direction1.max_relative_change, 0.0, 0.10);
            r.at_least("m1_prime_margin", e.m1_prime - (k0 + 1.0) * m1, 0.0, 1e-12);
            r.at_least("c1_prime_margin", e.c1_prime - e.c2 * (2.0 * c0).powf(m1), 0.0, 1e-9 * e.c1_prime);
            r.holds("direction2_class_finite", e.direction2_pass);
            Ok(())
        },
    )]
}

/// Reads `p` (default 2), `c`, `m` (default (1, 1)); the configured probes are the functions h.
pub fn rdf_iteration_properties(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (p, c1, m1) = (cfg.params.p.unwrap_or(2.0), cfg.params.c.unwrap_or(1.0), cfg.params.m.unwrap_or(1.0));
    vec![Check::new(
        "rubio_de_francia",
        "ℛh = Σ T̃^k h/(2‖T̃‖)^k satisfies h ≤ ℛh, ‖ℛh‖ ≤ 2‖h‖ and T̃(ℛh) ≤ 2‖T̃‖ℛh",
        move |r: &mut Recorder| {
            let rho = cfg.fitted_rho()?;
            let w = cfg.weight()?;
            let nlb = rdf_norm_estimate(&w, &rho, p, c1, m1, &ProbeSet::new(ProbeKind::Gaussians, 8, cfg.seed()))?;
            r.constant("norm_lower_bound", nlb);
            let hs = cfg.probes()?.generate(&cfg.grid())?;
            let (mut dom, mut norm, mut sub) = (true, true, true);
            let mut worst_tail: f64 = 0.0;
            for (i, h) in hs.iter().enumerate() {
                let (rh, rep) = rdf_iteration(h, &w, &rho, p, c1, m1, RDF_DEFAULT_TERMS, nlb)?;
                dom &= rep.dominates && rh.values().iter().zip(h.values()).all(|(a, b)| a >= b);
                norm &= rep.norm_bound_holds && rep.rh_norm <= 2.0 * rep.h_norm + rep.tail_bound;
                sub &= rep.subinvariance_holds;
                worst_tail = worst_tail.max(rep.tail_max);
                r.point("rh_norm_over_h_norm", i as f64, rep.rh_norm / rep.h_norm);
            }
            r.constant("functions", hs.len() as f64);
            r.constant("largest_tail", worst_tail);
            r.holds("dominates_nodewise", dom);
            r.holds("norm_bound", norm);
            r.holds("sub_invariance_with_tail", sub);
            Ok(())
        },
    )]
}

/// Reads `c` (the class of w^{−1}, default 0.9 times the threshold), `p` (extrapolation exponent,
/// default 2) and `doublings` (default 1). The extrapolation weight is w^{−1/5}.
pub fn endpoint_bmo(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let doublings = cfg.params.doublings.unwrap_or(1);
    let p = cfg.params.p.unwrap_or(2.0);
    let params = move |cfg: &ExperimentConfig| -> scz_core::Result<EndpointParams> {
        let decl = cfg.kernel()?.decl();
        let s_prime = match decl.tag {
            SczType::Pointwise => None,
            SczType::Integral { .. } => Some(decl.tag.s_prime()),
        };
        let base = EndpointParams { c1: decl.c, m1: decl.m, s_prime, weight_c: 0.0 };
        Ok(EndpointParams { weight_c: cfg.params.c.unwrap_or(0.9 * base.threshold()), ..base })
    };
    let cfg2 = cfg.clone();
    vec![
        Check::new(
            "bmo_and_extrapolation",
            "for w^{−1} ∈ H^{ρ,m₁}_{1,c} with c below c₁2^{−m₁}, T maps L^∞(w) to BMO(w), and extrapolation gives L^p(w) bounds",
            move |r: &mut Recorder| {
                let kernel = cfg.kernel()?;
                let op = KernelOperator::new(kernel.as_ref(), cfg.grid(), 0)?;
                let apply = |f: &GridFunction| op.apply(f);
                let w = cfg.weight()?;
                let w2 = w.map(|v| v.powf(-0.2))?;
                let params = params(&cfg)?;
                let rho = cfg.fitted_rho()?;
                let rep = endpoint_bmo_experiment(&apply, &w, &rho, params, &cfg.family()?, &cfg.probes()?, doublings, Some((p, &w2)))?;
                r.constant("threshold", rep.threshold);
                r.constant("weight_c", params.weight_c);
                r.constant("inverse_weight_class_constant", rep.inverse_weight_class.constant);
                for (n, v) in rep.probe_counts.iter().zip(&rep.bmo_norms) {
                    r.point("bmo_norm_by_probe_count", *n as f64, *v);
                }
                r.holds("inverse_weight_class_finite", rep.inverse_weight_class.finite());
                r.at_most("bmo_relative_change", rep.max_relative_change, 0.0, 0.10);
                let ex = rep.extrapolation.as_ref().ok_or("no extrapolation report")?;
                for (n, v) in ex.sweep.probe_counts.iter().zip(&ex.sweep.norms) {
                    r.point("extrapolated_norm_by_probe_count", *n as f64, *v);
                }
                r.constant("m_star", ex.m_star);
                r.constant("c_star", ex.c_star);
                r.at_most("extrapolated_relative_change", ex.sweep.max_relative_change, 0.0, 0.10);
                Ok(())
            },
        ),
        Check::new(
            "threshold_enforced",
            "weights with c at or above c₁2^{−m₁} are refused",
            move |r: &mut Recorder| {
                let kernel = cfg2.kernel()?;
                let op = KernelOperator::new(kernel.as_ref(), cfg2.grid(), 0)?;
                let apply = |f: &GridFunction| op.apply(f);
                let base = params(&cfg2)?;
                let above = EndpointParams { weight_c: 1.1 * base.threshold(), ..base };
                let res = endpoint_bmo_experiment(&apply, &cfg2.weight()?, &cfg2.fitted_rho()?, above, &cfg2.family()?, &cfg2.probes()?, 0, None);
                r.holds("weight_out_of_range_raised", matches!(res, Err(Error::WeightOutOfRange(_))));
                Ok(())
            },
        ),
    ]
}
