//! Experiment configuration: JSON, strict schema, paths resolved against the config file.

use crate::scenarios;
use scz_core::critical_radius::CriticalRadius;
use scz_core::grid::{FamilyPolicy, GridDomain, GridFunction};
use scz_core::kernels::{KernelDecl, KernelModel, MultiplierKernel, Phi, RieszKernel, TableKernel, TjKernel, TjModel, HeatModel, LEBESGUE_RHO3};
use scz_core::maximal::ProbeSet;
use scz_core::measures::{Atom, Density, MeasureModel};
use scz_core::weights::WeightClass;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// Schema violation at a JSON pointer ("" is the whole document).
    #[error("config error at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ConfigError {
    pub fn at(pointer: &str, message: impl Into<String>) -> Self {
        Self::Schema { pointer: pointer.to_string(), message: message.into() }
    }

    pub fn pointer(&self) -> Option<&str> {
        match self {
            Self::Schema { pointer, .. } => Some(pointer),
            Self::Io { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub rho: RhoSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeSet>,
    #[serde(default)]
    pub params: Params,
    /// Per-quantity tolerance overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub d: usize,
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    Constant {
        value: f64,
    },
    /// min{1, 1/|x|}.
    #[default]
    HarmonicOscillator,
    /// ρ_μ of the configured measure.
    FromMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// "none", "lebesgue", "quadratic", or the path of a grid-function file.
    pub density: String,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<Atom>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// e^{a|x|}.
    ExpAbs { a: f64 },
    /// (1 + |x|)^α.
    Power { alpha: f64 },
    Constant,
    /// A grid-function file on the configured domain.
    File { path: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// riesz_constV, adjoint_riesz_constV, laplace_multiplier, tj(1), tj(2) or user_table.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Phi>,
    /// CSV table for user_table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Overrides the declared type and (c, m, δ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decl: Option<KernelDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub class: WeightClass,
    /// Whether the constant is expected to be finite for the configured weight.
    pub expect_finite: bool,
}

/// Numeric knobs; each scenario documents which it reads and their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doublings: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ells: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
}

/// Builds a JSON pointer from the path serde_path_to_error tracked.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

impl ExperimentConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            ConfigError::Schema { pointer, message: e.into_inner().to_string() }
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let entry = scenarios::find(&self.scenario)
            .ok_or_else(|| ConfigError::at("/scenario", format!("unknown scenario `{}`; see `scz-lab list`", self.scenario)))?;
        let DomainSpec { d, half_width, n } = self.domain;
        if !(1..=3).contains(&d) {
            return Err(ConfigError::at("/domain/d", format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(ConfigError::at("/domain/half_width", "must be positive"));
        }
        if n < 2 {
            return Err(ConfigError::at("/domain/n", format!("needs n ≥ 2 nodes per axis, got {n}")));
        }
        GridDomain::new(d, half_width, n).map_err(|e| ConfigError::at("/domain", e.to_string()))?;
        if let RhoSpec::Constant { value } = self.rho {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::at("/rho/value", "must be positive"));
            }
        }
        if self.rho == RhoSpec::FromMeasure && self.measure.is_none() {
            return Err(ConfigError::at("/rho", "from_measure needs a measure"));
        }
        for field in entry.requires {
            let present = match *field {
                "measure" => self.measure.is_some(),
                "weight" => self.weight.is_some(),
                "kernel" => self.kernel.is_some(),
                "classes" => !self.classes.is_empty(),
                "family" => self.family.is_some(),
                "probes" => self.probes.is_some(),
                other => unreachable!("unknown requirement {other}"),
            };
            if !present {
                return Err(ConfigError::at(&format!("/{field}"), format!("scenario `{}` needs `{field}`", self.scenario)));
            }
        }
        if let Some(m) = &self.measure {
            if !(m.scale.is_finite() && m.scale > 0.0) {
                return Err(ConfigError::at("/measure/scale", "must be positive"));
            }
            if !matches!(m.density.as_str(), "none" | "lebesgue" | "quadratic") && !self.resolve(&m.density).is_file() {
                return Err(ConfigError::at("/measure/density", format!("`{}` is neither a built-in density nor a file", m.density)));
            }
            for (i, a) in m.atoms.iter().enumerate() {
                if !(a.mass.is_finite() && a.mass > 0.0) {
                    return Err(ConfigError::at(&format!("/measure/atoms/{i}/mass"), "must be positive"));
                }
            }
        }
        if let Some(WeightSpec::File { path }) = &self.weight {
            if !self.resolve(path).is_file() {
                return Err(ConfigError::at("/weight/path", format!("no file `{path}`")));
            }
        }
        for (i, c) in self.classes.iter().enumerate() {
            c.class.validate().map_err(|e| ConfigError::at(&format!("/classes/{i}/class"), e.to_string()))?;
        }
        if let Some(k) = &self.kernel {
            self.check_kernel(k)?;
        }
        if let Some(FamilyPolicy::Explicit { .. }) = self.family {
            return Err(ConfigError::at("/family/policy", "explicit families cannot be reproduced from a config"));
        }
        if let Some(p) = self.params.p {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(ConfigError::at("/params/p", "must be ≥ 1"));
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(ConfigError::at(&format!("/tolerances/{k}"), "must be finite and ≥ 0"));
            }
        }
        Ok(())
    }

    fn check_kernel(&self, k: &KernelSpec) -> Result<(), ConfigError> {
        let name = KernelName::parse(&k.name).ok_or_else(|| ConfigError::at("/kernel/name", format!("unknown kernel `{}`", k.name)))?;
        if let Some(kappa) = k.kappa {
            if !(kappa.is_finite() && kappa >= 0.0) {
                return Err(ConfigError::at("/kernel/kappa", "must be finite and ≥ 0"));
            }
        }
        if name == KernelName::Multiplier && k.phi.is_none() {
            return Err(ConfigError::at("/kernel/phi", "laplace_multiplier needs phi"));
        }
        if name == KernelName::Table {
            match &k.path {
                None => return Err(ConfigError::at("/kernel/path", "user_table needs a CSV path")),
                Some(p) if !self.resolve(p).is_file() => return Err(ConfigError::at("/kernel/path", format!("no file `{p}`"))),
                _ => {}
            }
        }
        if let Some(decl) = &k.decl {
            decl.validate().map_err(|e| ConfigError::at("/kernel/decl", e.to_string()))?;
        }
        let dim = match name {
            KernelName::Table => None,
            _ => Some(3),
        };
        if let Some(dim) = dim {
            if self.domain.d != dim {
                return Err(ConfigError::at("/domain/d", format!("kernel `{}` lives in d = {dim}", k.name)));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> GridDomain {
        GridDomain::new(self.domain.d, self.domain.half_width, self.domain.n).expect("validated domain")
    }

    pub fn seed(&self) -> u64 {
        self.params.seed.unwrap_or(1)
    }

    pub fn measure_model(&self) -> scz_core::Result<MeasureModel> {
        let spec = self.measure.as_ref().ok_or_else(|| scz_core::Error::Precondition("no measure configured".into()))?;
        let g = self.grid();
        let density = match spec.density.as_str() {
            "none" => Density::None,
            "lebesgue" => Density::Lebesgue { scale: spec.scale },
            "quadratic" => Density::Quadratic { scale: spec.scale },
            path => {
                let f = read_grid_function(&self.resolve(path))?;
                if f.domain() != &g {
                    return Err(scz_core::Error::InvalidArgument("density file lives on a different domain".into()));
                }
                Density::Grid(f.map(|v| v * spec.scale)?)
            }
        };
        MeasureModel::new(g, density, spec.atoms.clone())
    }

    /// The configured ρ, without fitted constants.
    pub fn rho(&self) -> scz_core::Result<CriticalRadius> {
        match self.rho {
            RhoSpec::Constant { value } => CriticalRadius::constant(value),
            RhoSpec::HarmonicOscillator => Ok(CriticalRadius::harmonic_oscillator()),
            RhoSpec::FromMeasure => CriticalRadius::from_measure(Arc::new(self.measure_model()?)),
        }
    }

    /// The configured ρ with (C₀, k₀) fitted on seeded pairs inside the box.
    pub fn fitted_rho(&self) -> scz_core::Result<CriticalRadius> {
        let pairs = scz_core::critical_radius::sample_pairs(self.domain.d, self.domain.half_width, 400, self.seed());
        Ok(self.rho()?.fitted(&pairs)?.0)
    }

    pub fn weight(&self) -> scz_core::Result<GridFunction> {
        let g = self.grid();
        match self.weight.as_ref().ok_or_else(|| scz_core::Error::Precondition("no weight configured".into()))? {
            WeightSpec::ExpAbs { a } => scz_core::weights::exp_weight(g, *a),
            WeightSpec::Power { alpha } => GridFunction::from_fn(g, |x| (1.0 + scz_core::geometry::norm(x)).powf(*alpha)),
            WeightSpec::Constant => GridFunction::constant(g, 1.0),
            WeightSpec::File { path } => {
                let f = read_grid_function(&self.resolve(path))?;
                if f.domain() != &g {
                    return Err(scz_core::Error::InvalidArgument("weight file lives on a different domain".into()));
                }
                Ok(f)
            }
        }
    }

    pub fn family(&self) -> scz_core::Result<scz_core::grid::BallFamily> {
        let policy = self.family.clone().ok_or_else(|| scz_core::Error::Precondition("no ball family configured".into()))?;
        scz_core::grid::BallFamily::generate(&self.grid(), policy)
    }

    pub fn probes(&self) -> scz_core::Result<ProbeSet> {
        self.probes.ok_or_else(|| scz_core::Error::Precondition("no probe set configured".into()))
    }

    pub fn kernel(&self) -> scz_core::Result<Box<dyn KernelModel>> {
        let spec = self.kernel.as_ref().ok_or_else(|| scz_core::Error::Precondition("no kernel configured".into()))?;
        let kappa = spec.kappa.unwrap_or(1.0);
        let name = KernelName::parse(&spec.name).expect("validated kernel name");
        let with_decl = |mut decl: KernelDecl| {
            if let Some(d) = spec.decl {
                decl = d;
            }
            decl
        };
        Ok(match name {
            KernelName::Riesz { adjoint } => {
                let mut k = RieszKernel::new(kappa, adjoint)?;
                k.decl = with_decl(k.decl);
                Box::new(k)
            }
            KernelName::Multiplier => {
                let phi = spec.phi.clone().expect("validated phi");
                let d = with_decl(default_multiplier_decl());
                let mut k = MultiplierKernel::new(phi, HeatModel::ConstantV { kappa, d: 3 }, d.c, d.m)?;
                k.decl = d;
                Box::new(k)
            }
            KernelName::Tj(j) => {
                let d = with_decl(KernelDecl { tag: scz_core::kernels::SczType::Integral { s: 4.0 }, c: LEBESGUE_RHO3 / 4.0, m: 1.0, delta: 1.0 });
                let mut k = TjKernel::new(j, TjModel::ConstantV { kappa }, d.tag.s(), d.c, d.m)?;
                k.decl = d;
                Box::new(k)
            }
            KernelName::Table => {
                let path = self.resolve(spec.path.as_deref().expect("validated path"));
                let file = std::fs::File::open(&path).map_err(|e| scz_core::Error::Format(format!("{}: {e}", path.display())))?;
                let mut k = TableKernel::from_reader(&spec.name, std::io::BufReader::new(file))?;
                if let Some(d) = spec.decl {
                    k = k.with_decl(d)?;
                }
                Box::new(k)
            }
        })
    }
}

/// Declared decay of multiplier kernels for constant V: the same (c, m) as the Riesz kernel,
/// since φ(tL) for the built-in φ decays at least as fast as Γ.
pub fn default_multiplier_decl() -> KernelDecl {
    KernelDecl { tag: scz_core::kernels::SczType::Pointwise, c: LEBESGUE_RHO3 / 4.0, m: 1.0, delta: 1.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelName {
    Riesz { adjoint: bool },
    Multiplier,
    Tj(u8),
    Table,
}

impl KernelName {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "riesz_constV" => Self::Riesz { adjoint: false },
            "adjoint_riesz_constV" => Self::Riesz { adjoint: true },
            "laplace_multiplier" => Self::Multiplier,
            "tj(1)" => Self::Tj(1),
            "tj(2)" => Self::Tj(2),
            "user_table" => Self::Table,
            _ => return None,
        })
    }
}

pub fn read_grid_function(path: &Path) -> scz_core::Result<GridFunction> {
    let file = std::fs::File::open(path).map_err(|e| scz_core::Error::Format(format!("{}: {e}", path.display())))?;
    GridFunction::read_from(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_json(text, Path::new("."))
    }

    #[test]
    fn pointer_names_the_offending_field() {
        let err = parse(r#"{"scenario":"def21_validation","domain":{"d":1,"half_width":2,"n":"x"}}"#).unwrap_err();
        assert_eq!(err.pointer(), Some("/domain/n"));
        let err = parse(r#"{"scenario":"def21_validation","domain":{"d":1,"half_width":2,"n":5},"colour":1}"#).unwrap_err();
        assert_eq!(err.pointer(), Some("/colour"), "{err}");
        let err = parse(r#"{"scenario":"nope","domain":{"d":1,"half_width":2,"n":5}}"#).unwrap_err();
        assert_eq!(err.pointer(), Some("/scenario"));
    }

    #[test]
    fn scenario_requirements_are_checked() {
        let err = parse(r#"{"scenario":"weight_class_suite","domain":{"d":1,"half_width":2,"n":5}}"#).unwrap_err();
        assert_eq!(err.pointer(), Some("/weight"));
    }

    #[test]
    fn kernel_names() {
        for n in ["riesz_constV", "adjoint_riesz_constV", "laplace_multiplier", "tj(1)", "tj(2)", "user_table"] {
            assert!(KernelName::parse(n).is_some());
        }
        assert!(KernelName::parse("tj(3)").is_none());
    }
}
