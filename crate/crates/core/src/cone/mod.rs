//! Truncated cones C_ρ(S) discretized spectrally in the link and by finite
//! volumes in t = ln r.
//!
//! Metric g = a(r) dr² + b(r) r² h with a = 1 + c_r Λ r^γ, b = 1 + c_θ Λ r^γ.
//! Potentials and metric factors are radial, so link eigenmodes decouple and
//! every operator is a set of per-mode tridiagonal matrices on the radial
//! nodes. The ball of radius r_min around the apex is replaced by the exact
//! model energy of the mode-wise power solution, which keeps the apex at
//! zero capacity without a coordinate singularity.

mod energy;
mod field;
mod solve;

pub use energy::{
    discrete_green_identity, energy_profile, fit_monotonicity_constant, monotonicity_check, EnergyProfile,
    GreenIdentity, MonotonicityParams, MonotonicityReport,
};
pub use field::{circle_basis, harmonic_extension_model, Field, PowerMode, Representation};
pub use solve::{bilinear_form, dtn_model_spectrum, dtn_perturbed, solve_schrodinger, DtnReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::PotentialExponent;
use crate::linalg::SymTridiagonal;
use crate::links::{self, LinkModel, Spectrum, SpectrumOptions};

pub const DEFAULT_RADIAL_NODES: usize = 256;
pub const DEFAULT_R_MIN_RATIO: f64 = 1e-3;
pub const DEFAULT_MODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPerturbation {
    #[serde(rename = "Lambda", alias = "lambda")]
    pub lambda: f64,
    pub gamma: f64,
    /// Coefficient of Λ r^γ in the dr² factor, |c_r| ≤ 1.
    #[serde(default = "one")]
    pub radial: f64,
    /// Coefficient of Λ r^γ in the r² h factor, |c_θ| ≤ 1.
    #[serde(default = "one")]
    pub angular: f64,
}

fn one() -> f64 {
    1.0
}

impl MetricPerturbation {
    pub fn conformal(lambda: f64, gamma: f64) -> Self {
        Self {
            lambda,
            gamma,
            radial: 1.0,
            angular: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "perturbation needs Lambda >= 0 and gamma in (0, 1], got {} and {}",
                self.lambda, self.gamma
            )));
        }
        if self.radial.abs() > 1.0 || self.angular.abs() > 1.0 {
            return Err(Error::InvalidInput("perturbation coefficients must lie in [-1, 1]".into()));
        }
        Ok(())
    }

    /// (a(r), b(r)).
    pub fn factors(&self, r: f64) -> (f64, f64) {
        let s = self.lambda * r.powf(self.gamma);
        (1.0 + self.radial * s, 1.0 + self.angular * s)
    }
}

/// Radial potential profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum PotentialProfile {
    Zero,
    Constant { value: f64 },
    /// coeff / r².
    InverseSquare { coeff: f64 },
    /// coeff · r^exponent with exponent > -2.
    Power { coeff: f64, exponent: f64 },
    /// amplitude / (1 + (r/scale)²).
    Lorentzian { amplitude: f64, scale: f64 },
}

impl PotentialProfile {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant { value } => value,
            Self::InverseSquare { coeff } => coeff / (r * r),
            Self::Power { coeff, exponent } => coeff * r.powf(exponent),
            Self::Lorentzian { amplitude, scale } => amplitude / (1.0 + (r / scale).powi(2)),
        }
    }

    /// lim_{r→0} r² V(r).
    pub fn inverse_square_coeff(&self) -> f64 {
        match *self {
            Self::InverseSquare { coeff } => coeff,
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Self::Zero => true,
            Self::Constant { value } => value == 0.0,
            Self::InverseSquare { coeff } | Self::Power { coeff, .. } => coeff == 0.0,
            Self::Lorentzian { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Parse `zero`, `constant:v`, `inverse_square:c`, `power:c:e` or
    /// `lorentzian:a:s`.
    pub fn parse_short(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse(format!("potential spec '{s}'")))
        };
        let profile = match (parts[0], parts.len()) {
            ("zero", 1) => Self::Zero,
            ("constant", 2) => Self::Constant { value: num(1)? },
            ("inverse_square", 2) => Self::InverseSquare { coeff: num(1)? },
            ("power", 3) => Self::Power {
                coeff: num(1)?,
                exponent: num(2)?,
            },
            ("lorentzian", 3) => Self::Lorentzian {
                amplitude: num(1)?,
                scale: num(2)?,
            },
            _ => return Err(Error::Parse(format!("potential spec '{s}'"))),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Power { exponent, .. } if !(exponent > -2.0) => Err(Error::InvalidInput(format!(
                "power potentials need exponent > -2, got {exponent}; use inverse_square for -2"
            ))),
            Self::Lorentzian { scale, .. } if !(scale > 0.0) => {
                Err(Error::InvalidInput("lorentzian scale must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Radial profile with its declared integrability exponent. The exponent is
/// metadata for the exponent formulas and is not checked by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub profile: PotentialProfile,
    pub p: PotentialExponent,
}

impl Potential {
    pub fn zero() -> Self {
        Self {
            profile: PotentialProfile::Zero,
            p: PotentialExponent::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    /// Uniform in ln r.
    #[default]
    Geometric,
    Uniform,
}

/// Declarative scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    pub link: LinkModel,
    pub n: usize,
    pub rho: f64,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_r_min_ratio")]
    pub r_min_ratio: f64,
    #[serde(default)]
    pub spacing: RadialSpacing,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub perturbation: Option<MetricPerturbation>,
    #[serde(default)]
    pub potential: Option<Potential>,
}

fn default_radial_nodes() -> usize {
    DEFAULT_RADIAL_NODES
}

fn default_r_min_ratio() -> f64 {
    DEFAULT_R_MIN_RATIO
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

impl ConeConfig {
    pub fn new(link: LinkModel, n: usize, rho: f64) -> Self {
        Self {
            link,
            n,
            rho,
            radial_nodes: DEFAULT_RADIAL_NODES,
            r_min_ratio: DEFAULT_R_MIN_RATIO,
            spacing: RadialSpacing::Geometric,
            modes: DEFAULT_MODES,
            perturbation: None,
            potential: None,
        }
    }

    pub fn build(&self) -> Result<ConeGrid> {
        ConeGrid::new(self)
    }
}

/// Which terms enter an assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// ∫ |du|_g² - V u² dvol_g.
    Full,
    /// ∫ |du|_g² dvol_g.
    Gradient,
    /// ∫ |du|_0² dvol_0.
    Model,
}

#[derive(Debug, Clone)]
pub struct ConeGrid {
    pub n: usize,
    pub rho: f64,
    pub link: LinkModel,
    pub spectrum: Spectrum,
    pub radii: Vec<f64>,
    pub perturbation: MetricPerturbation,
    pub potential: Potential,
    /// t-spacing between consecutive nodes.
    dt: Vec<f64>,
    /// Dual cell length in t of each node.
    dual: Vec<f64>,
    operators: Vec<SymTridiagonal>,
}

impl ConeGrid {
    pub fn new(cfg: &ConeConfig) -> Result<Self> {
        if cfg.n < 2 {
            return Err(Error::InvalidInput(format!("n must be >= 2, got {}", cfg.n)));
        }
        if !(cfg.rho > 0.0) || !cfg.rho.is_finite() {
            return Err(Error::InvalidInput(format!("rho must be positive, got {}", cfg.rho)));
        }
        if cfg.radial_nodes < 4 {
            return Err(Error::InvalidInput("need at least 4 radial intervals".into()));
        }
        if !(cfg.r_min_ratio > 0.0 && cfg.r_min_ratio < 1.0) {
            return Err(Error::InvalidInput("r_min_ratio must lie in (0, 1)".into()));
        }
        let perturbation = cfg.perturbation.unwrap_or(MetricPerturbation::conformal(0.0, 1.0));
        perturbation.validate()?;
        let potential = cfg.potential.unwrap_or_else(Potential::zero);
        potential.profile.validate()?;
        potential.p.check_admissible(cfg.n)?;
        let spectrum = links::link_spectrum_with(&cfg.link, cfg.n, cfg.modes.max(2), &SpectrumOptions::default())?;

        let nn = cfg.radial_nodes;
        let r_min = cfg.rho * cfg.r_min_ratio;
        let radii: Vec<f64> = match cfg.spacing {
            RadialSpacing::Geometric => {
                let (t0, t1) = (r_min.ln(), cfg.rho.ln());
                (0..=nn)
                    .map(|i| {
                        if i == nn {
                            cfg.rho
                        } else {
                            (t0 + (t1 - t0) * i as f64 / nn as f64).exp()
                        }
                    })
                    .collect()
            }
            RadialSpacing::Uniform => (0..=nn)
                .map(|i| r_min + (cfg.rho - r_min) * i as f64 / nn as f64)
                .collect(),
        };
        let dt: Vec<f64> = radii.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let dual: Vec<f64> = (0..=nn)
            .map(|i| {
                let left = if i > 0 { dt[i - 1] } else { 0.0 };
                let right = if i < nn { dt[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        let mut grid = Self {
            n: cfg.n,
            rho: cfg.rho,
            link: cfg.link.clone(),
            spectrum,
            radii,
            perturbation,
            potential,
            dt,
            dual,
            operators: Vec::new(),
        };
        for j in 0..grid.modes() {
            grid.cap_exponent(j)?;
        }
        grid.operators = (0..grid.modes()).map(|j| grid.assemble(j, FormKind::Full)).collect();
        Ok(grid)
    }

    pub fn modes(&self) -> usize {
        self.spectrum.len()
    }

    pub fn intervals(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn lambda(&self, mode: usize) -> f64 {
        self.spectrum.lambdas[mode]
    }

    pub fn nu(&self, mode: usize) -> f64 {
        self.spectrum.nus[mode]
    }

    pub fn has_perturbation(&self) -> bool {
        self.perturbation.lambda != 0.0
    }

    fn factors(&self, r: f64) -> (f64, f64) {
        self.perturbation.factors(r)
    }

    /// Growth exponent of mode `mode` at the apex, including an inverse-square
    /// part of the potential: a(a + n - 2) = λ - lim r²V.
    pub fn cap_exponent(&self, mode: usize) -> Result<f64> {
        let half = 0.5 * (self.n as f64 - 2.0);
        let disc = half * half + self.lambda(mode) - self.potential.profile.inverse_square_coeff();
        if disc < 0.0 {
            return Err(Error::CoercivityFailure { mode, pivot: disc });
        }
        Ok(-half + disc.sqrt())
    }

    /// Per unit t: r^{n-2} b^{(n-1)/2} / √a, the weight of u_t².
    fn kinetic_density(&self, r: f64, kind: FormKind) -> f64 {
        let base = r.powi(self.n as i32 - 2);
        if kind == FormKind::Model {
            return base;
        }
        let (a, b) = self.factors(r);
        base * b.powf(0.5 * (self.n as f64 - 1.0)) / a.sqrt()
    }

    /// Per unit t: r^{n-2} √a b^{(n-3)/2}, the weight of λ u².
    fn angular_density(&self, r: f64, kind: FormKind) -> f64 {
        let base = r.powi(self.n as i32 - 2);
        if kind == FormKind::Model {
            return base;
        }
        let (a, b) = self.factors(r);
        base * a.sqrt() * b.powf(0.5 * (self.n as f64 - 3.0))
    }

    /// Per unit t: r^n √a b^{(n-1)/2}, the volume weight.
    pub(crate) fn volume_density(&self, r: f64, kind: FormKind) -> f64 {
        let base = r.powi(self.n as i32);
        if kind == FormKind::Model {
            return base;
        }
        let (a, b) = self.factors(r);
        base * a.sqrt() * b.powf(0.5 * (self.n as f64 - 1.0))
    }

    /// Zeroth-order density per unit t at node i for the given mode.
    fn node_density(&self, mode: usize, i: usize, kind: FormKind) -> f64 {
        let r = self.radii[i];
        let mut q = self.lambda(mode) * self.angular_density(r, kind);
        if kind == FormKind::Full {
            q -= self.potential.profile.value(r) * self.volume_density(r, kind);
        }
        q
    }

    fn face_coeff(&self, i: usize, kind: FormKind) -> f64 {
        let rf = (self.radii[i] * self.radii[i + 1]).sqrt();
        self.kinetic_density(rf, kind) / self.dt[i]
    }

    /// Energy of the inner ball carried by the power solution with unit value
    /// at r_min.
    pub(crate) fn cap_energy(&self, mode: usize, kind: FormKind) -> f64 {
        let a = self.cap_exponent(mode).unwrap_or(0.0);
        let rm = self.r_min().powi(self.n as i32 - 2);
        match kind {
            FormKind::Full => a * rm,
            _ => {
                let num = a * a + self.lambda(mode);
                let den = 2.0 * a + self.n as f64 - 2.0;
                if num == 0.0 {
                    0.0
                } else {
                    num / den * rm
                }
            }
        }
    }

    /// Per-mode quadratic form on radial nodes 0..=N.
    pub fn assemble(&self, mode: usize, kind: FormKind) -> SymTridiagonal {
        let nn = self.intervals();
        let mut diag: Vec<f64> = (0..=nn).map(|i| self.node_density(mode, i, kind) * self.dual[i]).collect();
        let mut off = Vec::with_capacity(nn);
        for i in 0..nn {
            let c = self.face_coeff(i, kind);
            diag[i] += c;
            diag[i + 1] += c;
            off.push(-c);
        }
        diag[0] += self.cap_energy(mode, kind);
        SymTridiagonal { diag, off }
    }

    /// Cached full operator of a mode.
    pub fn operator(&self, mode: usize) -> &SymTridiagonal {
        &self.operators[mode]
    }

    /// Lumped volume weights per node (per unit link volume), inner ball
    /// added to node 0.
    pub fn volume_weights(&self, kind: FormKind) -> Vec<f64> {
        let mut w: Vec<f64> = (0..self.radii.len())
            .map(|i| self.volume_density(self.radii[i], kind) * self.dual[i])
            .collect();
        w[0] += self.r_min().powi(self.n as i32) / self.n as f64;
        w
    }

    /// Boundary density dσ_g / dσ_h at r = ρ.
    pub fn boundary_measure(&self) -> f64 {
        let (_, b) = self.factors(self.rho);
        self.rho.powi(self.n as i32 - 1) * b.powf(0.5 * (self.n as f64 - 1.0))
    }

    /// Cumulative energy of one mode's nodal values at every radial node,
    /// treating node k as the outer boundary.
    pub(crate) fn cumulative_energy(&self, mode: usize, u: &[f64], kind: FormKind) -> Vec<f64> {
        let mut out = Vec::with_capacity(u.len());
        let mut acc = self.cap_energy(mode, kind) * u[0] * u[0];
        out.push(acc);
        let mut q_prev = self.node_density(mode, 0, kind) * u[0] * u[0];
        for i in 0..self.intervals() {
            let q_next = self.node_density(mode, i + 1, kind) * u[i + 1] * u[i + 1];
            let du = u[i + 1] - u[i];
            acc += self.face_coeff(i, kind) * du * du + 0.5 * self.dt[i] * (q_prev + q_next);
            out.push(acc);
            q_prev = q_next;
        }
        out
    }

    /// Exact energy density integrals for u = c (r/ρ)^a on mode `mode`,
    /// from the apex to R.
    pub(crate) fn power_mode_energy(&self, m: &PowerMode, radius: f64, kind: FormKind) -> f64 {
        let lambda = self.lambda(m.mode);
        let a = m.exponent;
        let nf = self.n as f64;
        let s = 2.0 * a + nf - 2.0;
        let c2 = m.coeff * m.coeff / self.rho.powf(2.0 * a);
        let closed = |r: f64| {
            let num = a * a + lambda;
            if num == 0.0 {
                0.0
            } else {
                num / s * r.powf(s)
            }
        };
        if kind == FormKind::Model || (!self.has_perturbation() && (kind == FormKind::Gradient || self.potential.profile.is_zero())) {
            return c2 * closed(radius);
        }
        // Composite Gauss-Legendre in t over [t_R - span, t_R]; the remaining
        // inner tail is taken from the model closed form.
        let span = (36.0 / s.max(1e-3)).min(60.0);
        let t_hi = radius.ln();
        let t_lo = t_hi - span;
        let panels = 400;
        let w = span / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let t0 = t_lo + p as f64 * w;
            for (x, gw) in GAUSS5 {
                let t = t0 + 0.5 * w * (1.0 + x);
                let r = t.exp();
                let r2a = r.powf(2.0 * a);
                let mut f = (a * a * self.kinetic_density(r, kind) + lambda * self.angular_density(r, kind)) * r2a;
                if kind == FormKind::Full {
                    f -= self.potential.profile.value(r) * self.volume_density(r, kind) * r2a;
                }
                acc += 0.5 * w * gw * f;
            }
        }
        c2 * (acc + closed(t_lo.exp()))
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn potential_short_forms() {
        assert_eq!(PotentialProfile::parse_short("zero").unwrap(), PotentialProfile::Zero);
        assert_eq!(
            PotentialProfile::parse_short("inverse_square:-0.16").unwrap(),
            PotentialProfile::InverseSquare { coeff: -0.16 }
        );
        assert_eq!(
            PotentialProfile::parse_short("power:2:-1").unwrap(),
            PotentialProfile::Power { coeff: 2.0, exponent: -1.0 }
        );
        for bad in ["constant", "power:1:-2", "lorentzian:1:0", "cubic:1", "constant:x"] {
            assert!(PotentialProfile::parse_short(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn volume_matches_model_cone() {
        for n in [2usize, 3, 4] {
            let link = if n == 2 { LinkModel::circle(2.0 * PI) } else { LinkModel::sphere(n - 1) };
            let g = ConeConfig::new(link, n, 0.7).build().unwrap();
            let vol: f64 = g.volume_weights(FormKind::Full).iter().sum();
            let exact = 0.7f64.powi(n as i32) / n as f64;
            assert!((vol - exact).abs() / exact < 1e-3, "n={n}: {vol} vs {exact}");
        }
    }

    #[test]
    fn perturbation_factors_respect_bound() {
        let p = MetricPerturbation {
            lambda: 0.1,
            gamma: 0.5,
            radial: -0.5,
            angular: 1.0,
        };
        for r in [1e-3, 0.1, 0.5] {
            let (a, b) = p.factors(r);
            let bound = 0.1 * r.powf(0.5) + 1e-15;
            assert!((a - 1.0).abs() <= bound && (b - 1.0).abs() <= bound);
        }
        assert!(MetricPerturbation::conformal(0.1, 1.5).validate().is_err());
    }

    #[test]
    fn potential_json_shape() {
        let p: Potential = serde_json::from_str(r#"{"kind":"inverse_square","params":{"coeff":-0.16},"p":1.6666666666666667}"#).unwrap();
        assert_eq!(p.profile, PotentialProfile::InverseSquare { coeff: -0.16 });
        let z: Potential = serde_json::from_str(r#"{"kind":"constant","params":{"value":1.0},"p":"inf"}"#).unwrap();
        assert_eq!(z.p, PotentialExponent::Infinite);
        assert!(PotentialProfile::Power { coeff: 1.0, exponent: -3.0 }.validate().is_err());
    }

    #[test]
    fn rejects_inadmissible_exponent_before_solving() {
        let mut cfg = ConeConfig::new(LinkModel::circle(2.0 * PI), 2, 1.0);
        cfg.potential = Some(Potential {
            profile: PotentialProfile::Constant { value: 1.0 },
            p: PotentialExponent::Finite(1.0),
        });
        assert!(matches!(cfg.build(), Err(Error::Hypothesis(_))));
    }
}
