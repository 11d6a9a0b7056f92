use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConeGrid, Field, FormKind};
use crate::error::{Error, Result};
use crate::exponents::{nu1_from_lambda1, PotentialExponent};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub radii: Vec<f64>,
    /// Model Dirichlet energy ∫_{B(ρ)} |du|_0² dvol_0.
    pub e0: Vec<f64>,
    /// ∫_{B(ρ)} |du|_g² dvol_g (no potential term).
    pub eg: Vec<f64>,
    /// e^{-Cρ^γ̄} ρ^{-(n-2+2ν₁)} Eg(ρ) at the constants below.
    pub phi: Vec<f64>,
    pub c: f64,
    pub nu1: f64,
    pub gamma_bar: f64,
    pub n: usize,
}

impl EnergyProfile {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rho", "E0", "Eg", "phi"])?;
        for i in 0..self.radii.len() {
            w.write_record([
                format!("{:.17e}", self.radii[i]),
                format!("{:.17e}", self.e0[i]),
                format!("{:.17e}", self.eg[i]),
                format!("{:.17e}", self.phi[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Recompute φ for a new constant C.
    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self.phi = phi_values(&self.radii, &self.eg, self.n, self.nu1, self.gamma_bar, c);
        self
    }
}

fn phi_values(radii: &[f64], e: &[f64], n: usize, nu1: f64, gamma_bar: f64, c: f64) -> Vec<f64> {
    let s = n as f64 - 2.0 + 2.0 * nu1;
    radii
        .iter()
        .zip(e)
        .map(|(&r, &e)| (-c * r.powf(gamma_bar)).exp() * e / r.powf(s))
        .collect()
}

/// Interpolate node-wise cumulative energies at R, log-linearly in r when
/// both neighbours are positive.
fn interpolate(radii: &[f64], e: &[f64], r: f64) -> f64 {
    let i = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1) - 1;
    let (r0, r1, e0, e1) = (radii[i], radii[i + 1], e[i], e[i + 1]);
    let s = (r / r0).ln() / (r1 / r0).ln();
    if e0 > 0.0 && e1 > 0.0 {
        (e0.ln() * (1.0 - s) + e1.ln() * s).exp()
    } else {
        e0 * (1.0 - s) + e1 * s
    }
}

/// E₀ and E_g on balls of the given radii. Exact power-mode fields use the
/// closed-form radial integrals.
pub fn energy_profile(u: &Field, grid: &ConeGrid, radii: &[f64]) -> Result<EnergyProfile> {
    u.check_shape(grid)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be nonempty and strictly increasing".into()));
    }
    for &r in radii {
        if r < grid.r_min() * (1.0 - 1e-12) || r > grid.rho * (1.0 + 1e-12) {
            return Err(Error::RadiusOutOfRange {
                radius: r,
                min: grid.r_min(),
                max: grid.rho,
            });
        }
    }
    let (e0, eg) = match &u.exact {
        Some(modes) => {
            let e = |kind| -> Vec<f64> {
                radii
                    .iter()
                    .map(|&r| modes.iter().map(|m| grid.power_mode_energy(m, r, kind)).sum())
                    .collect()
            };
            (e(FormKind::Model), e(FormKind::Gradient))
        }
        None => {
            let cumulative = |kind| -> Vec<f64> {
                let per_mode = par::map_range(grid.modes(), |j| grid.cumulative_energy(j, &u.mode_column(j), kind));
                let mut total = vec![0.0; grid.radii.len()];
                for col in &per_mode {
                    for (t, v) in total.iter_mut().zip(col) {
                        *t += v;
                    }
                }
                radii.iter().map(|&r| interpolate(&grid.radii, &total, r)).collect()
            };
            (cumulative(FormKind::Model), cumulative(FormKind::Gradient))
        }
    };
    let nu1 = nu1_from_lambda1(grid.spectrum.lambda1(), grid.link.dim_ell())?;
    let metric_gamma = if grid.has_perturbation() { grid.perturbation.gamma } else { 1.0 };
    let gamma_bar = metric_gamma.min(2.0 - grid.potential.p.n_over_p(grid.n));
    let phi = phi_values(radii, &eg, grid.n, nu1, gamma_bar, 0.0);
    Ok(EnergyProfile {
        radii: radii.to_vec(),
        e0,
        eg,
        phi,
        c: 0.0,
        nu1,
        gamma_bar,
        n: grid.n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityParams {
    pub n: usize,
    pub nu1: f64,
    pub gamma_bar: f64,
    pub p: PotentialExponent,
    pub c: f64,
}

impl MonotonicityParams {
    pub fn from_profile(profile: &EnergyProfile, p: PotentialExponent, c: f64) -> Self {
        Self {
            n: profile.n,
            nu1: profile.nu1,
            gamma_bar: profile.gamma_bar,
            p,
            c,
        }
    }

    fn log_branch(&self) -> bool {
        (1.0 - 0.5 * self.p.n_over_p(self.n) - self.nu1).abs() < 1e-12
    }

    /// Ψ(ρ₊, ρ₋).
    pub fn psi(&self, hi: f64, lo: f64) -> f64 {
        if self.log_branch() {
            (hi / lo).ln()
        } else {
            let e = 2.0 - self.p.n_over_p(self.n) - 2.0 * self.nu1;
            (hi.powf(e) - lo.powf(e)).abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// max over ρ₋ < ρ₊ of Φ(ρ₋) - Φ(ρ₊) - CΨ(ρ₊, ρ₋).
    pub max_violation: f64,
    pub worst_pair: (f64, f64),
    pub pairs: usize,
    pub log_branch: bool,
    pub c: f64,
}

pub fn monotonicity_check(profile: &EnergyProfile, params: &MonotonicityParams) -> Result<MonotonicityReport> {
    let k = profile.radii.len();
    if k < 3 {
        return Err(Error::InsufficientSpan(format!("monotonicity needs >= 3 radii, got {k}")));
    }
    let phi = phi_values(&profile.radii, &profile.eg, params.n, params.nu1, params.gamma_bar, params.c);
    let mut worst = f64::NEG_INFINITY;
    let mut pair = (0.0, 0.0);
    for i in 0..k {
        for j in i + 1..k {
            let (lo, hi) = (profile.radii[i], profile.radii[j]);
            let v = phi[i] - phi[j] - params.c * params.psi(hi, lo);
            if v > worst {
                worst = v;
                pair = (lo, hi);
            }
        }
    }
    Ok(MonotonicityReport {
        max_violation: worst,
        worst_pair: pair,
        pairs: k * (k - 1) / 2,
        log_branch: params.log_branch(),
        c: params.c,
    })
}

/// Smallest C (to bisection accuracy) with no violation on the sampled pairs.
pub fn fit_monotonicity_constant(profile: &EnergyProfile, params: &MonotonicityParams) -> Result<f64> {
    let viol = |c: f64| -> Result<f64> {
        Ok(monotonicity_check(profile, &MonotonicityParams { c, ..*params })?.max_violation)
    };
    if viol(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1e-6;
    while viol(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::BracketNotFound { lo: 0.0, hi });
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if viol(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenIdentity {
    /// Σ over interior nodes of (div_g ∇_g u) v dvol_g.
    pub volume: f64,
    /// Σ ⟨du, dv⟩_g dvol_g.
    pub energy: f64,
    /// Σ (∂u/∂n_g) v dσ_g.
    pub boundary: f64,
    /// |volume + energy - boundary| relative to the summed term magnitudes.
    pub residual: f64,
}

/// Discrete Green identity for the assembled gradient form.
pub fn discrete_green_identity(u: &Field, v: &Field, grid: &ConeGrid) -> Result<GreenIdentity> {
    u.check_shape(grid)?;
    v.check_shape(grid)?;
    let nn = grid.intervals();
    let (mut volume, mut energy, mut boundary, mut scale) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..grid.modes() {
        let op = grid.assemble(j, FormKind::Gradient);
        let uj = u.mode_column(j);
        let vj = v.mode_column(j);
        let ku = op.apply(&uj);
        for i in 0..=nn {
            let t = ku[i] * vj[i];
            scale += t.abs();
            energy += t;
            if i < nn {
                volume -= t;
            } else {
                boundary += t;
            }
        }
    }
    let residual = if scale > 0.0 {
        (volume + energy - boundary).abs() / scale
    } else {
        0.0
    };
    Ok(GreenIdentity {
        volume,
        energy,
        boundary,
        residual,
    })
}
