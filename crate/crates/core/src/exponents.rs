//! From link spectra to regularity exponents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::links::{self, LinkModel, Spectrum, SpectrumMethod, SpectrumOptions};

/// Integrability exponent p of the potential; `Infinite` is V ∈ L^∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialExponent {
    Finite(f64),
    Infinite,
}

impl PotentialExponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// n/p, zero for p = ∞.
    pub fn n_over_p(self, n: usize) -> f64 {
        match self {
            Self::Finite(p) => n as f64 / p,
            Self::Infinite => 0.0,
        }
    }

    /// Requires p > n/2.
    pub fn check_admissible(self, n: usize) -> Result<()> {
        match self {
            Self::Infinite => Ok(()),
            Self::Finite(p) if p.is_finite() && p > 0.5 * n as f64 => Ok(()),
            Self::Finite(p) => Err(Error::Hypothesis(format!(
                "potential exponent p = {p} must exceed n/2 = {}",
                0.5 * n as f64
            ))),
        }
    }
}

impl fmt::Display for PotentialExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PotentialExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinite),
            t => t
                .parse::<f64>()
                .map(|p| if p.is_infinite() { Self::Infinite } else { Self::Finite(p) })
                .map_err(|_| Error::Parse(format!("potential exponent '{s}'"))),
        }
    }
}

impl Serialize for PotentialExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(p) => s.serialize_f64(*p),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PotentialExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Self::Finite(p)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LogLipschitz,
    #[serde(rename = "Holder_nu")]
    HolderNu,
    #[serde(rename = "Holder_mu")]
    HolderMu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub nu1: f64,
    pub lambda1: f64,
    pub ell: usize,
    pub mu: f64,
    pub p_potential: PotentialExponent,
    pub regime: Regime,
    pub gamma_bar: f64,
    pub delta: f64,
}

/// ν₁ for a link of dimension `ell`: clamped to 1 once λ₁ ≥ ℓ.
pub fn nu1_from_lambda1(lambda1: f64, ell: usize) -> Result<f64> {
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(Error::DisconnectedLink { lambda1 });
    }
    if ell < 1 {
        return Err(Error::InvalidInput("link dimension must be >= 1".into()));
    }
    if lambda1 >= ell as f64 {
        return Ok(1.0);
    }
    Ok(links::indicial_from_lambda(lambda1, ell + 1).min(1.0))
}

pub fn indicial_exponents(spectrum: &Spectrum) -> Vec<f64> {
    spectrum
        .lambdas
        .iter()
        .map(|&l| links::indicial_from_lambda(l, spectrum.n_ambient))
        .collect()
}

/// Hölder exponent μ and regime for exponent ν, dimension n and potential in L^p.
/// Metric regularity γ enters only through γ̄; pass 1 for an exact cone.
pub fn holder_exponent(nu: f64, n: usize, p: PotentialExponent) -> Result<ExponentReport> {
    holder_exponent_with_gamma(nu, n, p, 1.0)
}

pub fn holder_exponent_with_gamma(nu: f64, n: usize, p: PotentialExponent, metric_gamma: f64) -> Result<ExponentReport> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidInput(format!("nu must lie in (0, 1], got {nu}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be >= 2, got {n}")));
    }
    if !(metric_gamma > 0.0 && metric_gamma <= 1.0) {
        return Err(Error::InvalidInput(format!("metric gamma must lie in (0, 1], got {metric_gamma}")));
    }
    p.check_admissible(n)?;
    let np = p.n_over_p(n);
    let (mu, regime) = match p {
        PotentialExponent::Infinite if nu >= 1.0 => (1.0, Regime::LogLipschitz),
        PotentialExponent::Infinite => (nu, Regime::HolderNu),
        PotentialExponent::Finite(_) => (nu.min(1.0 - 0.5 * np), Regime::HolderMu),
    };
    let ell = n - 1;
    let lambda1 = nu * (ell as f64 - 1.0 + nu);
    Ok(ExponentReport {
        nu1: nu,
        lambda1,
        ell,
        mu,
        p_potential: p,
        regime,
        gamma_bar: metric_gamma.min(2.0 - np),
        delta: 1.0 - np,
    })
}

/// Full report from the first link eigenvalue; keeps the unclamped λ₁.
pub fn exponent_report(lambda1: f64, ell: usize, p: PotentialExponent, metric_gamma: f64) -> Result<ExponentReport> {
    let nu1 = nu1_from_lambda1(lambda1, ell)?;
    let mut r = holder_exponent_with_gamma(nu1, ell + 1, p, metric_gamma)?;
    r.lambda1 = lambda1;
    Ok(r)
}

/// Exponent ν over a finite catalogue of strata: the smallest ν₁.
pub fn nu_of_space(nu1_values: &[f64]) -> Result<f64> {
    nu1_values
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| Error::InvalidInput("empty stratum catalogue".into()))
}

/// First eigenvalue of the k-fold suspension of a link with first eigenvalue
/// `mu1_base`, the suspension sitting in a cone of dimension n.
pub fn suspension_lambda1(mu1_base: f64, n: usize, k: usize) -> Result<f64> {
    if k < 1 || k + 2 > n {
        return Err(Error::InvalidInput(format!("need 1 <= k <= n-2, got k={k} n={n}")));
    }
    if !(mu1_base > 0.0) {
        return Err(Error::DisconnectedLink { lambda1: mu1_base });
    }
    let dim_z = (n - k - 1) as f64;
    if mu1_base >= dim_z {
        return Ok(n as f64 - 1.0);
    }
    let b = dim_z - 1.0;
    let gamma = 2.0 * mu1_base / (b + (b * b + 4.0 * mu1_base).sqrt());
    Ok(gamma * (n as f64 - 2.0 + gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuspensionCheck {
    pub lambda1_base: f64,
    pub lambda1_susp: f64,
    pub nu_base: f64,
    pub nu_susp: f64,
    pub gap: f64,
}

/// Compare ν₁ of `base` with ν₁ of its k-fold suspension in a cone of dimension n.
pub fn check_suspension_invariance(base: &LinkModel, k: usize, n: usize, method: SpectrumMethod) -> Result<SuspensionCheck> {
    check_suspension_invariance_with(
        base,
        k,
        n,
        &SpectrumOptions {
            method,
            ..Default::default()
        },
    )
}

pub fn check_suspension_invariance_with(base: &LinkModel, k: usize, n: usize, opts: &SpectrumOptions) -> Result<SuspensionCheck> {
    let dim_z = base.dim_ell();
    if k < 1 || dim_z + k + 1 != n {
        return Err(Error::InvalidInput(format!(
            "suspension of a {dim_z}-dimensional link with k={k} lives in dimension {}, not {n}",
            dim_z + k + 1
        )));
    }
    let base_spec = links::link_spectrum_with(base, dim_z + 1, 2, opts)?;
    let susp = LinkModel::suspension(base.clone(), k);
    let susp_spec = links::link_spectrum_with(&susp, n, 2, opts)?;
    let nu_base = nu1_from_lambda1(base_spec.lambda1(), dim_z)?;
    let nu_susp = nu1_from_lambda1(susp_spec.lambda1(), n - 1)?;
    Ok(SuspensionCheck {
        lambda1_base: base_spec.lambda1(),
        lambda1_susp: susp_spec.lambda1(),
        nu_base,
        nu_susp,
        gap: (nu_base - nu_susp).abs(),
    })
}
