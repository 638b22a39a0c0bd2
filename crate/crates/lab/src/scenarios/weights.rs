use super::{Check, CheckResult, Recorder};
use crate::config::{ClassSpec, ExperimentConfig};
use scz_core::weights::{ap_rho_divergence, check_inclusions, class_constant, refinement_study, reverse_holder_suite as rh_suite, structure_lemmas, WeightClass};
use std::sync::Arc;

fn class_label(c: &WeightClass) -> String {
    match *c {
        WeightClass::Ap { p } => format!("ap(p={p})"),
        WeightClass::ApRhoTheta { p, theta } => format!("ap_rho(p={p},theta={theta})"),
        WeightClass::ApLoc { p } => format!("ap_loc(p={p})"),
        WeightClass::H { p, c, m } => format!("h(p={p},c={c},m={m})"),
        WeightClass::Rh { eta, c, m } => format!("rh(eta={eta},c={c},m={m})"),
        WeightClass::Doubling { kappa, c, m } => format!("doubling(kappa={kappa},c={c},m={m})"),
    }
}

/// Finite-or-divergent verdict for one class; finite ones must also be stable under family doubling.
fn class_check(cfg: &Arc<ExperimentConfig>, spec: &ClassSpec) -> Check {
    let (cfg, spec) = (cfg.clone(), spec.clone());
    let anchor = if spec.expect_finite {
        "the class constant of w is finite and stable under refinement of the ball family"
    } else {
        "the class constant of w diverges along the ball family"
    };
    Check::new(format!("class_{}", class_label(&spec.class)), anchor, move |r: &mut Recorder| -> CheckResult {
        let w = cfg.weight()?;
        let rho = cfg.fitted_rho()?;
        let fam = cfg.family()?;
        let rep = class_constant(&w, &rho, &spec.class, &fam)?;
        r.constant("constant", rep.constant);
        r.constant("log_constant", rep.log_constant);
        r.constant("balls_evaluated", rep.balls_evaluated as f64);
        r.holds("finite_as_expected", rep.finite() == spec.expect_finite);
        if spec.expect_finite {
            let study = refinement_study(&w, &rho, &spec.class, &fam, cfg.params.doublings.unwrap_or(1))?;
            for (n, c) in study.family_sizes.iter().zip(&study.constants) {
                r.point("constant_by_family_size", *n as f64, *c);
            }
            r.at_most("refinement_relative_change", study.relative_change, 0.0, 0.05);
        }
        Ok(())
    })
}

/// Reads `exponents` (default [2, 1]) and `ells` (default 2..=10).
pub fn exponential_weight_counterexample(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let mut checks: Vec<Check> = cfg.classes.iter().map(|s| class_check(&cfg, s)).collect();
    let ells = cfg.params.ells.clone().unwrap_or_else(|| (2..=10).map(f64::from).collect());
    for p in cfg.params.exponents.clone().unwrap_or_else(|| vec![2.0, 1.0]) {
        let (cfg, ells) = (cfg.clone(), ells.clone());
        checks.push(Check::new(
            format!("ap_rho_ladder_p{p}"),
            "the A_p product of e^{|x|} on B(0, 2ℓ) grows like ℓ^{−d}(e^ℓ − 1)^{1/p} (ℓ^{−d}e^ℓ for p = 1), so its log-slope reaches 1/p",
            move |r: &mut Recorder| {
                let t = ap_rho_divergence(&cfg.weight()?, p, &ells)?;
                for row in &t.rows {
                    r.point(&format!("product_p{p}"), row.ell, row.product);
                    r.point(&format!("lower_shape_p{p}"), row.ell, row.lower_shape);
                }
                for (row, slope) in t.rows.iter().skip(1).zip(&t.log_slopes) {
                    r.point(&format!("log_slope_p{p}"), row.ell, *slope);
                }
                r.constant("fitted_c", t.fitted_c);
                r.at_least("min_log_slope", t.min_log_slope, 1.0 / p, 0.05);
                Ok(())
            },
        ));
    }
    checks
}

/// Reads `p` (default 2), `c` (default 1) and `m` (default 1) for the inclusion and structure checks.
pub fn weight_class_suite(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let mut checks: Vec<Check> = cfg.classes.iter().map(|s| class_check(&cfg, s)).collect();
    let (p, c, m) = (cfg.params.p.unwrap_or(2.0), cfg.params.c.unwrap_or(1.0), cfg.params.m.unwrap_or(1.0));
    let c1 = cfg.clone();
    checks.push(Check::new(
        "inclusions",
        "A^{ρ,θ}_p ⊂ H^{ρ,m}_{p,c} ⊂ A^{ρ,loc}_p, ball by ball",
        move |r: &mut Recorder| {
            let inc = check_inclusions(&c1.weight()?, &c1.fitted_rho()?, p, c, &c1.family()?)?;
            r.constant("a_theta_finite", f64::from(u8::from(inc.a_theta_finite)));
            r.constant("h_finite", f64::from(u8::from(inc.h_finite)));
            r.constant("a_loc_finite", f64::from(u8::from(inc.a_loc_finite)));
            r.holds("theta_to_h_per_ball", inc.theta_to_h_per_ball);
            r.holds("h_to_loc_per_ball", inc.h_to_loc_per_ball);
            r.holds("implications", inc.implications_hold);
            Ok(())
        },
    ));
    checks.push(Check::new(
        "structure_lemmas",
        "H classes grow with p, w ↦ w^{−1/(p−1)} maps H_p to H_{p′}, and H-weights are doubling",
        move |r: &mut Recorder| {
            let rep = structure_lemmas(&cfg.weight()?, &cfg.fitted_rho()?, p, c, m, &cfg.family()?, None)?;
            for (q, k) in &rep.monotone_constants {
                r.point("h_constant_by_p", *q, *k);
            }
            r.constant("duality_max_log_gap", rep.duality_max_log_gap);
            r.constant("doubling_constant", rep.doubling.constant);
            r.holds("monotone_in_p", rep.monotone_holds);
            r.holds("duality", rep.duality_holds);
            r.holds("duality_involution", rep.duality_involution);
            r.holds("doubling_per_ball", rep.doubling_per_ball);
            Ok(())
        },
    ));
    checks
}

/// Reads `p` (default 2), `c` (default 1) and `m` (default 1).
pub fn reverse_holder_suite(cfg: Arc<ExperimentConfig>) -> Vec<Check> {
    let (p, c, m) = (cfg.params.p.unwrap_or(2.0), cfg.params.c.unwrap_or(1.0), cfg.params.m.unwrap_or(1.0));
    vec![Check::new(
        "reverse_holder_and_openness",
        "w ∈ H_{p,c} satisfies a reverse Hölder inequality RH_η, so w^η ∈ H_{q,c₂} and w ∈ H_{p−ε}",
        move |r: &mut Recorder| {
            let rep = rh_suite(&cfg.weight()?, &cfg.fitted_rho()?, p, c, m, &cfg.family()?)?;
            for row in &rep.rows {
                if let Some(cs) = row.c_star {
                    r.point("c_star_by_eta", row.eta, cs);
                }
            }
            r.constant("eta", rep.eta);
            r.constant("c_star", rep.c_star);
            r.constant("q", rep.q);
            r.constant("c2", rep.c2);
            r.constant("m2", rep.m2);
            r.constant("c_tilde", rep.c_tilde);
            r.holds("eta_above_one", rep.eta > 1.0);
            r.holds("monotone_in_eta", rep.monotone_in_eta);
            r.at_most("openness_identity_gap", rep.openness_identity_gap, 0.0, 1e-9);
            r.holds("w_eta_class_finite", rep.w_eta_class.finite());
            r.holds("self_improvement_found", rep.beta.is_some());
            if let Some(b) = rep.beta {
                r.constant("beta", b);
            }
            Ok(())
        },
    )]
}
