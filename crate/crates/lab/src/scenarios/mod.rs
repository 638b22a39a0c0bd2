//! Built-in scenarios. Each expands a config into independent checks; the runner executes the
//! checks in parallel and assembles the report in registry order.

mod geometry;
mod kernels;
mod operators;
mod weights;

use crate::config::ExperimentConfig;
use crate::report::{Criterion, Num, Op, PlotRow};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type CheckError = Box<dyn std::error::Error + Send + Sync>;
pub type CheckResult = Result<(), CheckError>;

pub struct Check {
    pub name: String,
    pub anchor: String,
    pub run: Box<dyn Fn(&mut Recorder) -> CheckResult + Send + Sync>,
}

impl Check {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, run: impl Fn(&mut Recorder) -> CheckResult + Send + Sync + 'static) -> Self {
        Self { name: name.into(), anchor: anchor.into(), run: Box::new(run) }
    }
}

pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
    /// Config sections the scenario cannot run without.
    pub requires: &'static [&'static str],
    pub build: fn(Arc<ExperimentConfig>) -> Vec<Check>,
}

const REGISTRY: &[Entry] = &[
    Entry {
        name: "prop31_counterexample",
        description: "e^{|x|} lies in the exponential class H but its A_p^{ρ,θ} products diverge along B(0, 2ℓ)",
        requires: &["weight", "classes", "family"],
        build: weights::exponential_weight_counterexample,
    },
    Entry {
        name: "def21_validation",
        description: "fit (C₀, k₀) for the configured ρ; constant ρ passes and e^{|x|} is rejected",
        requires: &[],
        build: geometry::critical_radius_validation,
    },
    Entry {
        name: "agmon_lemmas",
        description: "Agmon distance: local equivalence to |x−y|/ρ(x), global growth bounds and closed-form oracles",
        requires: &[],
        build: geometry::agmon_lemmas,
    },
    Entry {
        name: "covering_overlap",
        description: "critical-ball covering and the polynomial bound on overlaps of dilated balls",
        requires: &[],
        build: geometry::covering_overlap,
    },
    Entry {
        name: "measures_growth",
        description: "growth constants (δ_μ, C_μ, D_μ) of the configured measure, with Lebesgue and atom references",
        requires: &["measure"],
        build: geometry::measures_growth,
    },
    Entry {
        name: "rho_mu_construction",
        description: "critical radius ρ_μ induced by a measure, against closed forms",
        requires: &["measure"],
        build: geometry::rho_mu_construction,
    },
    Entry {
        name: "weight_class_suite",
        description: "class constants, inclusions between classes and structure lemmas for the configured weight",
        requires: &["weight", "classes", "family"],
        build: weights::weight_class_suite,
    },
    Entry {
        name: "reverse_holder_suite",
        description: "reverse Hölder exponents and the openness of H classes",
        requires: &["weight", "family"],
        build: weights::reverse_holder_suite,
    },
    Entry {
        name: "prop35_maximal_comparison",
        description: "uncentered exponential maximal operator dominated by the centered one under the parameter map",
        requires: &["probes"],
        build: operators::maximal_comparison,
    },
    Entry {
        name: "thm36_maximal_characterization",
        description: "H-class weights make the exponential maximal operator bounded on L^p(w), and conversely",
        requires: &["weight", "family", "probes"],
        build: operators::maximal_characterization,
    },
    Entry {
        name: "rdf_iteration_properties",
        description: "Rubio de Francia iteration: domination, norm bound and sub-invariance",
        requires: &["weight", "probes"],
        build: operators::rdf_iteration_properties,
    },
    Entry {
        name: "endpoint_bmo_riesz",
        description: "L^∞(w) → BMO(w) for the Riesz transform and the extrapolated L^p(w) bound",
        requires: &["weight", "kernel", "family", "probes"],
        build: operators::endpoint_bmo,
    },
    Entry {
        name: "endpoint_bmo_multiplier",
        description: "L^∞(w) → BMO(w) for a Laplace-transform-type multiplier φ(L)",
        requires: &["weight", "kernel", "family", "probes"],
        build: operators::endpoint_bmo,
    },
    Entry {
        name: "tj_certification",
        description: "kernels of (−Δ+V)^{−j/2}V^{j/2}: closed forms and the integral (s, δ) certification",
        requires: &["kernel"],
        build: kernels::tj_certification,
    },
    Entry {
        name: "heat_derivative_bounds",
        description: "size and Hölder bounds for t∂ₜW_t, constant potential and Mehler",
        requires: &[],
        build: kernels::heat_derivative_bounds,
    },
    Entry {
        name: "riesz_constV_certification",
        description: "pointwise exponential Calderón–Zygmund certification of the Riesz kernel for V = κ²",
        requires: &["kernel"],
        build: kernels::riesz_constv_certification,
    },
];

pub fn registry() -> &'static [Entry] {
    REGISTRY
}

pub fn find(name: &str) -> Option<&'static Entry> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Collects the criteria, constants and plot rows of one check.
pub struct Recorder<'a> {
    scenario: &'a str,
    overrides: &'a BTreeMap<String, f64>,
    scale: f64,
    pub(crate) criteria: Vec<Criterion>,
    pub(crate) constants: BTreeMap<String, Num>,
    pub(crate) plot: Vec<PlotRow>,
}

impl<'a> Recorder<'a> {
    pub fn new(scenario: &'a str, overrides: &'a BTreeMap<String, f64>, scale: f64) -> Self {
        Self { scenario, overrides, scale, criteria: Vec::new(), constants: BTreeMap::new(), plot: Vec::new() }
    }

    fn tolerance(&self, quantity: &str, default: f64) -> f64 {
        self.overrides.get(quantity).copied().unwrap_or(default) * self.scale
    }

    pub fn at_most(&mut self, quantity: &str, value: f64, nominal: f64, tolerance: f64) -> bool {
        let c = Criterion::new(quantity, value, Op::AtMost, nominal, self.tolerance(quantity, tolerance));
        let pass = c.pass;
        self.criteria.push(c);
        pass
    }

    pub fn at_least(&mut self, quantity: &str, value: f64, nominal: f64, tolerance: f64) -> bool {
        let c = Criterion::new(quantity, value, Op::AtLeast, nominal, self.tolerance(quantity, tolerance));
        let pass = c.pass;
        self.criteria.push(c);
        pass
    }

    /// A yes/no property, stored as 1 ≥ 1 or 0 ≥ 1; never loosened by tolerances.
    pub fn holds(&mut self, quantity: &str, ok: bool) -> bool {
        let c = Criterion::new(quantity, if ok { 1.0 } else { 0.0 }, Op::AtLeast, 1.0, 0.0);
        self.criteria.push(c);
        ok
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), Num(value));
    }

    pub fn point(&mut self, series: &str, x: f64, y: f64) {
        self.plot.push(PlotRow { scenario: self.scenario.to_string(), series: series.to_string(), x, y });
    }
}
