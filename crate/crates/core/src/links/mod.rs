//! Link geometries and their Laplace spectra.

pub mod bessel;
pub mod sturm;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::par;

pub use bessel::{bessel_deriv_first_zero, poincare_constant, PoincareConstants};
pub use sturm::{suspension_operator_spectrum, SturmLiouvilleGrid};

/// Relative gap below which adjacent eigenvalues are reported as one level.
pub const MULTIPLICITY_MERGE: f64 = 1e-8;
pub const DEFAULT_SL_NODES: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkModel {
    Circle { circumference: f64 },
    #[serde(rename = "sphere")]
    RoundSphere { dim: usize },
    /// [0, π/2] × S^{k-1} × Z with dψ² + sin²ψ g_{S^{k-1}} + cos²ψ g_Z.
    Suspension { base: Box<LinkModel>, k: usize },
    /// A single weighted Sturm–Liouville operator used as a one-dimensional link.
    Discretized { grid: SturmLiouvilleGrid },
}

impl LinkModel {
    pub fn circle(circumference: f64) -> Self {
        Self::Circle { circumference }
    }

    pub fn sphere(dim: usize) -> Self {
        Self::RoundSphere { dim }
    }

    pub fn suspension(base: LinkModel, k: usize) -> Self {
        Self::Suspension {
            base: Box::new(base),
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Circle { circumference } => {
                if !(*circumference > 0.0) || !circumference.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "circle circumference must be positive, got {circumference}"
                    )));
                }
            }
            Self::RoundSphere { dim } => {
                if *dim < 1 {
                    return Err(Error::InvalidInput("sphere dimension must be >= 1".into()));
                }
            }
            Self::Suspension { base, k } => {
                if *k < 1 {
                    return Err(Error::InvalidInput("suspension order k must be >= 1".into()));
                }
                base.validate()?;
            }
            Self::Discretized { grid } => grid.validate()?,
        }
        Ok(())
    }

    /// Link dimension ℓ.
    pub fn dim_ell(&self) -> usize {
        match self {
            Self::Circle { .. } => 1,
            Self::RoundSphere { dim } => *dim,
            Self::Suspension { base, k } => base.dim_ell() + k,
            Self::Discretized { grid } => grid.n - 1,
        }
    }

    /// Total Riemannian volume. For a discretized link this is the measure of
    /// the weighted interval.
    pub fn volume(&self) -> f64 {
        match self {
            Self::Circle { circumference } => *circumference,
            Self::RoundSphere { dim } => sphere_volume(*dim),
            Self::Suspension { base, k } => {
                let a = *k as f64 - 1.0;
                let b = base.dim_ell() as f64;
                sphere_volume(k - 1) * half_beta(a, b) * base.volume()
            }
            Self::Discretized { grid } => half_beta(grid.k as f64 - 1.0, (grid.n - grid.k - 1) as f64),
        }
    }

    /// Parse the short CLI form: `circle:L`, `sphere:d`, `suspension:k:<base>`.
    pub fn parse_short(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("link spec '{s}'")))?;
        let link = match kind {
            "circle" => Self::circle(parse_num(rest)?),
            "sphere" => Self::sphere(rest.parse().map_err(|_| Error::Parse(format!("sphere dim '{rest}'")))?),
            "suspension" => {
                let (k, base) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("suspension spec '{rest}'")))?;
                let k = k.parse().map_err(|_| Error::Parse(format!("suspension k '{k}'")))?;
                Self::suspension(Self::parse_short(base)?, k)
            }
            _ => return Err(Error::Parse(format!("unknown link kind '{kind}'"))),
        };
        link.validate()?;
        Ok(link)
    }
}

fn parse_num(s: &str) -> Result<f64> {
    match s {
        "pi" => Ok(PI),
        _ => s.parse().map_err(|_| Error::Parse(format!("number '{s}'"))),
    }
}

/// Volume of the unit round sphere S^d; S⁰ counts two points.
pub fn sphere_volume(d: usize) -> f64 {
    let m = (d + 1) as f64;
    2.0 * PI.powf(0.5 * m) / gamma(0.5 * m)
}

/// ∫_0^{π/2} sin^a ψ cos^b ψ dψ = B((a+1)/2, (b+1)/2)/2.
fn half_beta(a: f64, b: f64) -> f64 {
    let (x, y) = (0.5 * (a + 1.0), 0.5 * (b + 1.0));
    0.5 * gamma(x) * gamma(y) / gamma(x + y)
}

/// Multiplicity of degree-m harmonics on S^d (d = 0: the even and odd functions).
pub fn sphere_harmonic_multiplicity(d: usize, m: usize) -> usize {
    if d == 0 {
        return usize::from(m <= 1);
    }
    binom(m + d, d) - if m >= 2 { binom(m + d - 2, d) } else { 0 }
}

fn binom(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// Stable positive root ν of ν(n - 2 + ν) = λ.
pub fn indicial_from_lambda(lambda: f64, n_ambient: usize) -> f64 {
    let s = n_ambient as f64 - 2.0;
    if lambda <= 0.0 {
        return 0.0;
    }
    2.0 * lambda / (s + (s * s + 4.0 * lambda).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambdas: Vec<f64>,
    pub n_ambient: usize,
    pub nus: Vec<f64>,
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub lambda: f64,
    pub nu: f64,
    pub multiplicity: usize,
}

impl Spectrum {
    /// Build from eigenvalues listed with multiplicity. A leading eigenvalue
    /// within rounding of zero is snapped to zero.
    pub fn from_lambdas(mut lambdas: Vec<f64>, n_ambient: usize) -> Result<Self> {
        if n_ambient < 2 {
            return Err(Error::InvalidInput(format!("ambient dimension must be >= 2, got {n_ambient}")));
        }
        if lambdas.len() < 2 {
            return Err(Error::InvalidInput("a spectrum needs at least two eigenvalues".into()));
        }
        if lambdas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("eigenvalues must be nondecreasing".into()));
        }
        let scale = lambdas[1].abs().max(1.0);
        if lambdas[0].abs() <= 1e-10 * scale {
            lambdas[0] = 0.0;
        }
        if lambdas[0] != 0.0 {
            return Err(Error::InvalidInput(format!("lowest eigenvalue must be 0, got {}", lambdas[0])));
        }
        if !(lambdas[1] > 1e-10 * scale) {
            return Err(Error::DisconnectedLink { lambda1: lambdas[1] });
        }
        let nus = lambdas.iter().map(|&l| indicial_from_lambda(l, n_ambient)).collect();
        Ok(Self {
            lambdas,
            n_ambient,
            nus,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambda1(&self) -> f64 {
        self.lambdas[1]
    }

    pub fn nu1(&self) -> f64 {
        self.nus[1]
    }

    /// Distinct levels; neighbours within [`MULTIPLICITY_MERGE`] relative merge.
    pub fn levels(&self) -> Vec<SpectrumLevel> {
        let mut out: Vec<SpectrumLevel> = Vec::new();
        for (&lambda, &nu) in self.lambdas.iter().zip(&self.nus) {
            match out.last_mut() {
                Some(last) if (lambda - last.lambda).abs() <= MULTIPLICITY_MERGE * lambda.abs().max(1e-300) => {
                    last.multiplicity += 1;
                }
                _ => out.push(SpectrumLevel {
                    lambda,
                    nu,
                    multiplicity: 1,
                }),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    /// Closed forms for circles and spheres; discretized operators for
    /// suspensions and Sturm–Liouville links.
    #[default]
    Auto,
    /// Closed forms everywhere they exist, including the full suspension spectrum.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub method: SpectrumMethod,
    pub nodes: usize,
    /// Initial eigenvalue ceiling for tensor enumeration; doubled as needed.
    pub ceiling: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            method: SpectrumMethod::Auto,
            nodes: DEFAULT_SL_NODES,
            ceiling: None,
        }
    }
}

pub fn link_spectrum(link: &LinkModel, n_ambient: usize, count: usize) -> Result<Spectrum> {
    link_spectrum_with(link, n_ambient, count, &SpectrumOptions::default())
}

pub fn link_spectrum_with(link: &LinkModel, n_ambient: usize, count: usize, opts: &SpectrumOptions) -> Result<Spectrum> {
    link.validate()?;
    if count < 2 {
        return Err(Error::InvalidInput(format!("count must be >= 2, got {count}")));
    }
    if n_ambient != link.dim_ell() + 1 {
        return Err(Error::InvalidInput(format!(
            "ambient dimension {n_ambient} does not match link dimension {}",
            link.dim_ell()
        )));
    }
    let mut ceiling = opts.ceiling.unwrap_or(4.0 * (link.dim_ell() as f64 + 1.0)).max(1.0);
    loop {
        let levels = levels_below(link, ceiling, opts)?;
        let total: usize = levels.iter().map(|&(_, m)| m).sum();
        if total >= count {
            let mut lambdas = Vec::with_capacity(count);
            for (v, m) in levels {
                for _ in 0..m {
                    if lambdas.len() < count {
                        lambdas.push(v);
                    }
                }
            }
            return Spectrum::from_lambdas(lambdas, n_ambient);
        }
        if let LinkModel::Discretized { grid } = link {
            if total >= grid.nodes {
                return Err(Error::TooManyModes {
                    requested: count,
                    available: grid.nodes,
                });
            }
        }
        if ceiling > 1e12 {
            return Err(Error::TooManyModes {
                requested: count,
                available: total,
            });
        }
        ceiling *= 2.0;
    }
}

/// Every eigenvalue strictly below `ceiling` with its multiplicity, sorted.
pub fn levels_below(link: &LinkModel, ceiling: f64, opts: &SpectrumOptions) -> Result<Vec<(f64, usize)>> {
    let mut out = match link {
        LinkModel::Circle { circumference } => {
            let mut v = vec![(0.0, 1)];
            let mut j = 1usize;
            loop {
                let l = (2.0 * PI * j as f64 / circumference).powi(2);
                if l >= ceiling {
                    break;
                }
                v.push((l, 2));
                j += 1;
            }
            v
        }
        LinkModel::RoundSphere { dim } => {
            let mut v = Vec::new();
            let mut m = 0usize;
            loop {
                let l = (m * (m + dim - 1)) as f64;
                if l >= ceiling {
                    break;
                }
                v.push((l, sphere_harmonic_multiplicity(*dim, m)));
                m += 1;
            }
            v
        }
        LinkModel::Discretized { grid } => sturm::suspension_operator_spectrum_below(grid, ceiling)?
            .into_iter()
            .map(|v| (v, 1))
            .collect(),
        LinkModel::Suspension { base, k } => suspension_levels(base, *k, ceiling, opts)?,
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(merge_levels(out))
}

fn merge_levels(levels: Vec<(f64, usize)>) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(levels.len());
    for (v, m) in levels {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() <= MULTIPLICITY_MERGE * v.abs().max(1e-300) => last.1 += m,
            _ => out.push((v, m)),
        }
    }
    out
}

fn suspension_levels(base: &LinkModel, k: usize, ceiling: f64, opts: &SpectrumOptions) -> Result<Vec<(f64, usize)>> {
    let n = base.dim_ell() + k + 1;
    let base_levels = levels_below(base, ceiling, opts)?;
    // (μ, base multiplicity, sphere degree m, sphere multiplicity)
    let mut pairs = Vec::new();
    for &(mu, mb) in &base_levels {
        let mut m = 0usize;
        loop {
            let ms = sphere_harmonic_multiplicity(k - 1, m);
            if ms == 0 {
                break;
            }
            let lam = (m * (m + k).saturating_sub(2)) as f64;
            // λ/sin² + μ/cos² >= λ + μ, so larger pairs cannot reach the ceiling.
            if lam + mu >= ceiling {
                break;
            }
            pairs.push((mu, mb, m, ms));
            m += 1;
        }
    }
    let per_pair = par::try_map_range(pairs.len(), |i| -> Result<Vec<(f64, usize)>> {
        let (mu, mb, m, ms) = pairs[i];
        let mult = mb * ms;
        match opts.method {
            SpectrumMethod::ClosedForm if base_is_closed_form(base) => {
                let mut v = Vec::new();
                for j in 0.. {
                    let e = sturm::closed_form_eigenvalue(k, n, mu, m, j);
                    if e >= ceiling {
                        break;
                    }
                    v.push((e, mult));
                }
                Ok(v)
            }
            _ => {
                let lam = (m * (m + k).saturating_sub(2)) as f64;
                let grid = SturmLiouvilleGrid::new(opts.nodes, k, n, mu, lam)?.with_dirichlet_at_pole(k == 1 && m == 1);
                Ok(sturm::suspension_operator_spectrum_below(&grid, ceiling)?
                    .into_iter()
                    .map(|e| (e, mult))
                    .collect())
            }
        }
    })?;
    Ok(per_pair.into_iter().flatten().collect())
}

fn base_is_closed_form(link: &LinkModel) -> bool {
    match link {
        LinkModel::Circle { .. } | LinkModel::RoundSphere { .. } => true,
        LinkModel::Suspension { base, .. } => base_is_closed_form(base),
        LinkModel::Discretized { .. } => false,
    }
}
