//! Exponent fits for ball-normalized energies E(r) ≈ Λ r^{2α-2}, with the
//! competing log model E(r) ≈ Λ |log r|^{2γ}.

use serde::{Deserialize, Serialize};

use super::MorreyReport;
use crate::error::{Error, Result};

/// The log model wins only if its residual beats the power model by this factor.
pub const LOG_PREFERENCE_RATIO: f64 = 1.2;
/// Power-law exponents this close to 1 are treated as the log-Lipschitz class.
const NEAR_ONE: f64 = 0.05;
const ALPHA_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitRegime {
    Holder,
    LogCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Reported exponent: the power-law estimate in the Hölder regime, 1 in
    /// the log-corrected regime; clamped to (0, 1.5].
    pub alpha_hat: f64,
    /// Two-standard-error band of the power-law exponent.
    pub alpha_band: (f64, f64),
    /// Unclamped power-law exponent (slope + 2)/2.
    pub alpha_power: f64,
    pub slope: f64,
    /// RMS residual of the power model in log space.
    pub residual_power: f64,
    /// γ̂ of the |log r|^{2γ} model (radii below 1 only).
    pub gamma_hat: Option<f64>,
    pub residual_log: Option<f64>,
    pub regime: FitRegime,
    pub radii_used: usize,
}

struct Ols {
    slope: f64,
    rms: f64,
    slope_se: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Ols {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ols {
        slope,
        rms: (ssr / k).sqrt(),
        slope_se: if k > 2.0 { (ssr / (k - 2.0) / sxx).sqrt() } else { 0.0 },
    }
}

/// Fit the supremum-over-centers profile of a report.
pub fn fit_holder_exponent(report: &MorreyReport) -> Result<HolderFit> {
    let (radii, e) = report.sup_profile();
    fit_energy_scaling(&radii, &e)
}

pub fn fit_energy_scaling(radii: &[f64], energies: &[f64]) -> Result<HolderFit> {
    if radii.len() != energies.len() {
        return Err(Error::InvalidInput("radii and energies differ in length".into()));
    }
    let mut pts: Vec<(f64, f64)> = radii.iter().copied().zip(energies.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 4 {
        return Err(Error::InsufficientSpan(format!("need >= 4 distinct radii, got {}", pts.len())));
    }
    let span = pts[pts.len() - 1].0 / pts[0].0;
    if !(pts[0].0 > 0.0) || span < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSpan(format!("radii span a factor {span:.3}, need >= 10")));
    }
    if pts.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::InvalidInput("energies must be positive and finite for a log-log fit".into()));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let pow = ols(&x, &y);
    let alpha_power = 0.5 * (pow.slope + 2.0);
    let half_band = pow.slope_se;

    let (gamma_hat, residual_log) = if pts.iter().all(|p| p.0 < 1.0) {
        let lx: Vec<f64> = pts.iter().map(|p| (-p.0.ln()).ln()).collect();
        let lg = ols(&lx, &y);
        (Some(0.5 * lg.slope), Some(lg.rms))
    } else {
        (None, None)
    };
    let log_wins = matches!((gamma_hat, residual_log), (Some(g), Some(rl)) if g > 0.0 && pow.rms > LOG_PREFERENCE_RATIO * rl);
    let regime = if log_wins || (alpha_power - 1.0).abs() <= NEAR_ONE {
        FitRegime::LogCorrected
    } else {
        FitRegime::Holder
    };
    let alpha_hat = match regime {
        FitRegime::LogCorrected => 1.0,
        FitRegime::Holder => alpha_power.clamp(f64::EPSILON, ALPHA_MAX),
    };
    Ok(HolderFit {
        alpha_hat,
        alpha_band: (alpha_power - half_band, alpha_power + half_band),
        alpha_power,
        slope: pow.slope,
        residual_power: pow.rms,
        gamma_hat,
        residual_log,
        regime,
        radii_used: pts.len(),
    })
}
