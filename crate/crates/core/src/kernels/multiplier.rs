//! Laplace-transform type multipliers m_φ(L) with m_φ(λ) = λ ∫₀^∞ e^{−λt} φ(t) dt.
//!
//! m_φ(L) = ∫₀^∞ φ(t) L e^{−tL} dt = −∫₀^∞ φ(t) ∂ₜe^{−tL} dt, so off the diagonal the kernel is
//! ℳ_φ(x, y) = −∫₀^∞ φ(t) ∂ₜW_t(x, y) dt. With φ(t) = e^{−at} this is −a Γ_{V+a}.

use super::heat::{heat_kernel, heat_log_derivative, HeatModel};
use super::time_integral::log_time_integral;
use super::{KernelDecl, KernelModel, KernelValue, SczType};
use crate::geometry::{dist2, Point};
use crate::special::gamma;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Bounded functions φ on (0, ∞).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Phi {
    One,
    ExpDecay(f64),
    /// t^{−iγ}/Γ(1 − iγ), giving the imaginary power L^{iγ}.
    ImaginaryPower(f64),
    /// Σ αₖ φₖ.
    Linear(Vec<(f64, Phi)>),
}

impl Phi {
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Self::One => Complex64::new(1.0, 0.0),
            Self::ExpDecay(a) => Complex64::new((-a * t).exp(), 0.0),
            Self::ImaginaryPower(g) => Complex64::from_polar(1.0, -g * t.ln()) / gamma(Complex64::new(1.0, -g)),
            Self::Linear(terms) => terms.iter().map(|(a, p)| *a * p.eval(t)).sum(),
        }
    }

    /// An upper bound for sup |φ|.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::One | Self::ExpDecay(_) => 1.0,
            Self::ImaginaryPower(g) => 1.0 / gamma(Complex64::new(1.0, -g)).norm(),
            Self::Linear(terms) => terms.iter().map(|(a, p)| a.abs() * p.sup_bound()).sum(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Self::One | Self::ExpDecay(_) => true,
            Self::ImaginaryPower(g) => *g == 0.0,
            Self::Linear(terms) => terms.iter().all(|(_, p)| p.is_real()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ExpDecay(a) if !(*a >= 0.0 && a.is_finite()) => Err(Error::InvalidArgument(format!("exp_decay needs a ≥ 0, got {a}"))),
            Self::ImaginaryPower(g) if !g.is_finite() => Err(Error::InvalidArgument(format!("imaginary_power needs finite γ, got {g}"))),
            Self::Linear(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidArgument("empty linear combination".into()));
                }
                for (a, p) in terms {
                    if !a.is_finite() {
                        return Err(Error::InvalidArgument(format!("coefficient {a} is not finite")));
                    }
                    p.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::One => write!(f, "one"),
            Self::ExpDecay(a) => write!(f, "exp_decay({a})"),
            Self::ImaginaryPower(g) => write!(f, "imaginary_power({g})"),
            Self::Linear(terms) => {
                for (k, (a, p)) in terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{a}*{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_atom(s: &str) -> std::result::Result<Phi, String> {
    let s = s.trim();
    if s == "one" {
        return Ok(Phi::One);
    }
    let arg = |name: &str| -> Option<std::result::Result<f64, String>> {
        let inner = s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')?;
        Some(inner.trim().parse::<f64>().map_err(|e| format!("bad number in {s:?}: {e}")))
    };
    let phi = if let Some(a) = arg("exp_decay") {
        Phi::ExpDecay(a?)
    } else if let Some(g) = arg("imaginary_power") {
        Phi::ImaginaryPower(g?)
    } else {
        return Err(format!("unknown φ {s:?}; expected one, exp_decay(a) or imaginary_power(γ)"));
    };
    phi.validate().map_err(|e| e.to_string())?;
    Ok(phi)
}

impl FromStr for Phi {
    type Err = String;

    /// "one", "exp_decay(a)", "imaginary_power(γ)", or a sum of terms "α*φ".
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if !s.contains('+') && !s.contains('*') {
            return parse_atom(s);
        }
        let terms = s
            .split('+')
            .map(|term| match term.split_once('*') {
                Some((a, p)) => {
                    let a: f64 = a.trim().parse().map_err(|e| format!("bad coefficient {a:?}: {e}"))?;
                    if !a.is_finite() {
                        return Err(format!("coefficient {a} is not finite"));
                    }
                    Ok((a, parse_atom(p)?))
                }
                None => Ok((1.0, parse_atom(term)?)),
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(Phi::Linear(terms))
    }
}

impl TryFrom<String> for Phi {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Phi> for String {
    fn from(p: Phi) -> String {
        p.to_string()
    }
}

/// ℳ_φ(x, y) = −∫₀^∞ φ(t) ∂ₜW_t(x, y) dt, real and imaginary parts integrated separately.
pub fn multiplier_kernel(phi: &Phi, model: &HeatModel, x: &Point, y: &Point) -> Result<Complex64> {
    phi.validate()?;
    let r2 = dist2(x, y);
    if r2 == 0.0 {
        return Err(Error::CoincidentPoints(*x));
    }
    let sup = phi.sup_bound();
    let d = model.dim() as f64;
    let dw = |t: f64| heat_kernel(model, t, x, y).unwrap_or(0.0) * heat_log_derivative(model, t, x, y).unwrap_or(0.0);
    let env = |t: f64| {
        let w = heat_kernel(model, t, x, y).unwrap_or(0.0);
        sup * w * (heat_log_derivative(model, t, x, y).unwrap_or(0.0).abs() + 1.0 / t)
    };
    let center = (r2 / (2.0 * d)).max(1e-8);
    let re = log_time_integral(|t| -phi.eval(t).re * dw(t), env, center)?.accept()?;
    let im = if phi.is_real() { 0.0 } else { log_time_integral(|t| -phi.eval(t).im * dw(t), env, center)?.accept()?.value };
    Ok(Complex64::new(re.value, im))
}

#[derive(Clone, Debug)]
pub struct MultiplierKernel {
    pub phi: Phi,
    pub model: HeatModel,
    pub decl: KernelDecl,
}

impl MultiplierKernel {
    /// Declared (∞, 1) with the given (c, m), typically c = c₀ from the t∂ₜW bound and m = 1/(k₀+1).
    pub fn new(phi: Phi, model: HeatModel, c: f64, m: f64) -> Result<Self> {
        phi.validate()?;
        let decl = KernelDecl { tag: SczType::Pointwise, c, m, delta: 1.0 };
        decl.validate()?;
        Ok(Self { phi, model, decl })
    }
}

impl KernelModel for MultiplierKernel {
    fn name(&self) -> String {
        format!("laplace_multiplier({})", self.phi)
    }
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn components(&self) -> usize {
        if self.phi.is_real() {
            1
        } else {
            2
        }
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        let v = multiplier_kernel(&self.phi, &self.model, x, y)?;
        Ok([v.re, v.im, 0.0])
    }
    fn decl(&self) -> KernelDecl {
        self.decl
    }
    fn translation_invariant(&self) -> bool {
        matches!(self.model, HeatModel::ConstantV { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical_radius::CriticalRadius;
    use crate::geometry::point;
    use crate::kernels::{certify_scz_pointwise, gamma_constant_v, pair_sample, smoothness_triples, FitLattice};
    use proptest::prelude::*;

    const CONST_V: HeatModel = HeatModel::ConstantV { kappa: 1.0, d: 3 };

    #[test]
    fn phi_parses_and_prints() {
        for s in ["one", "exp_decay(0.5)", "imaginary_power(0.5)", "2*one + -0.5*exp_decay(1)"] {
            let p: Phi = s.parse().unwrap();
            let again: Phi = p.to_string().parse().unwrap();
            assert_eq!(p, again);
        }
        assert!("exp_decay(-1)".parse::<Phi>().is_err());
        assert!("cosine(1)".parse::<Phi>().is_err());
        let json = serde_json::to_string(&Phi::ExpDecay(0.25)).unwrap();
        assert_eq!(json, "\"exp_decay(0.25)\"");
    }

    #[test]
    fn identity_has_no_off_diagonal_kernel() {
        for model in [CONST_V, HeatModel::Mehler { d: 3 }, HeatModel::Mehler { d: 1 }] {
            for (x, y) in [(point(&[0.0, 0.0, 0.0]), point(&[0.5, 0.0, 0.0])), (point(&[0.3, -0.2, 0.1]), point(&[-1.0, 0.4, 0.9]))] {
                let v = multiplier_kernel(&Phi::One, &model, &x, &y).unwrap();
                assert!(v.norm() <= 1e-8, "{model:?}: {v}");
            }
        }
    }

    #[test]
    fn exponential_phi_gives_shifted_resolvent() {
        for a in [0.5, 2.0] {
            for (x, y) in [(point(&[0.0, 0.0, 0.0]), point(&[0.7, 0.0, 0.0])), (point(&[0.2, 0.1, -0.4]), point(&[-1.3, 0.8, 1.1]))] {
                let v = multiplier_kernel(&Phi::ExpDecay(a), &CONST_V, &x, &y).unwrap().re;
                let exact = -a * gamma_constant_v(1.0, a, &x, &y).unwrap();
                assert!(((v - exact) / exact).abs() < 1e-6, "a={a}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn imaginary_power_satisfies_size_bound() {
        let rho = CriticalRadius::constant(1.0).unwrap();
        let k = MultiplierKernel::new(Phi::ImaginaryPower(0.5), CONST_V, 0.1, 1.0).unwrap();
        let pairs = pair_sample(&rho, 3, 1.0, (0.01, 64.0), 200, 1);
        let fresh = pair_sample(&rho, 3, 1.0, (0.01, 64.0), 200, 2);
        let t = smoothness_triples(&pairs[..20], 3, 6, 3);
        let tf = smoothness_triples(&fresh[..20], 3, 6, 4);
        let cert = certify_scz_pointwise(&k, &rho, (&pairs, &t), (&fresh, &tf), &FitLattice::default()).unwrap();
        assert!(cert.size.c > 0.0 && cert.revalidation.passed, "{cert:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn linear_in_phi(alpha in -3.0f64..3.0, a in 0.1f64..3.0, g in -1.0f64..1.0, r in 0.2f64..3.0) {
            let (x, y) = ([0.0; 3], point(&[r, 0.0, 0.0]));
            let p1 = Phi::ExpDecay(a);
            let p2 = Phi::ImaginaryPower(g);
            let combo = Phi::Linear(vec![(alpha, p1.clone()), (1.0, p2.clone())]);
            let lhs = multiplier_kernel(&combo, &CONST_V, &x, &y).unwrap();
            let rhs = alpha * multiplier_kernel(&p1, &CONST_V, &x, &y).unwrap() + multiplier_kernel(&p2, &CONST_V, &x, &y).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
        }
    }
}
