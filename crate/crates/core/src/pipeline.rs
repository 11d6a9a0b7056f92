//! Predict-then-verify: exponent prediction for a cone scene followed by the
//! suspension, DtN, monotonicity and Hölder-fit checks. Stage failures are
//! recorded and the remaining stages still run.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{
    dtn_perturbed, energy_profile, fit_monotonicity_constant, harmonic_extension_model, monotonicity_check,
    solve_schrodinger, ConeConfig, ConeGrid, Field, MonotonicityParams, Potential,
};
use crate::error::{Error, Result};
use crate::exponents::{check_suspension_invariance, exponent_report, ExponentReport, Regime, SuspensionCheck};
use crate::links::{LinkModel, SpectrumMethod};
use crate::morrey::{
    ball_energies, chaining_modulus, cone_graph, fit_energy_scaling, fit_holder_exponent, geometric_radii, morrey_constant,
    ChainingParams, ChainingReport, FitRegime, HolderFit,
};

/// Radii used for the DtN rate regression.
pub const RATE_RADII: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Scene given inline or as a path to a JSON `ConeConfig`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SceneRef {
    Inline(ConeConfig),
    Path(PathBuf),
}

// Dispatch on the JSON type so errors inside an inline scene are reported
// instead of the generic untagged-enum mismatch.
impl<'de> Deserialize<'de> for SceneRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(p) => Ok(Self::Path(PathBuf::from(p))),
            v @ serde_json::Value::Object(_) => {
                serde_json::from_value(v).map(Self::Inline).map_err(|e| D::Error::custom(format!("scene: {e}")))
            }
            _ => Err(D::Error::custom("scene must be a path string or an inline scene object")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyToggles {
    pub suspension: bool,
    pub dtn: bool,
    pub monotonicity: bool,
    pub holder_fit: bool,
}

impl Default for VerifyToggles {
    fn default() -> Self {
        Self {
            suspension: true,
            dtn: true,
            monotonicity: true,
            holder_fit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative DtN eigenvalue error on the model cone.
    pub dtn_relative: f64,
    /// Allowed shortfall of the DtN rate slope below its target.
    pub dtn_rate_margin: f64,
    /// Number of DtN eigenvalues compared.
    pub dtn_modes: usize,
    pub alpha: f64,
    pub suspension_closed_form: f64,
    pub suspension_discretized: f64,
    pub monotonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dtn_relative: 0.02,
            dtn_rate_margin: 0.1,
            dtn_modes: 6,
            alpha: 0.05,
            suspension_closed_form: 1e-10,
            suspension_discretized: 1e-3,
            monotonicity: 1e-8,
        }
    }
}

/// Cone-graph resolution for the Hölder fit on circle links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphOptions {
    pub h: f64,
    /// Graph radius η, capped at the scene radius.
    pub radius: f64,
    /// Random chaining centers in addition to the apex.
    pub centers: usize,
    pub a_dilation: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            h: 0.0025,
            radius: 1.0,
            centers: 8,
            a_dilation: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub field_csv: Option<PathBuf>,
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub scene: SceneRef,
    /// Overrides the scene potential.
    #[serde(default)]
    pub potential: Option<Potential>,
    /// Boundary trace coefficients per link mode; defaults to the first
    /// nonconstant mode.
    #[serde(default)]
    pub trace: Option<Vec<f64>>,
    #[serde(default)]
    pub verify: VerifyToggles,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub graph: GraphOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

impl PipelineConfig {
    pub fn new(scene: ConeConfig) -> Self {
        Self {
            scene: SceneRef::Inline(scene),
            potential: None,
            trace: None,
            verify: VerifyToggles::default(),
            tolerances: Tolerances::default(),
            graph: GraphOptions::default(),
            seed: 0,
            outputs: Outputs::default(),
        }
    }

    /// Read a config file; relative scene paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        if let SceneRef::Path(p) = &cfg.scene {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.scene = SceneRef::Path(base.join(p));
            }
        }
        Ok(cfg)
    }

    /// The scene with the potential override applied.
    pub fn resolve_scene(&self) -> Result<ConeConfig> {
        let mut scene = match &self.scene {
            SceneRef::Inline(c) => c.clone(),
            SceneRef::Path(p) => {
                if !p.exists() {
                    return Err(Error::Io(format!("scene file {} does not exist", p.display())));
                }
                serde_json::from_str(&std::fs::read_to_string(p)?)?
            }
        };
        if let Some(v) = self.potential {
            scene.potential = Some(v);
        }
        Ok(scene)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome<T> {
    pub pass: bool,
    pub error: Option<String>,
    pub details: Option<T>,
}

impl<T> StageOutcome<T> {
    fn from_result(r: Result<(bool, T)>) -> Self {
        match r {
            Ok((pass, details)) => Self {
                pass,
                error: None,
                details: Some(details),
            },
            Err(e) => Self {
                pass: false,
                error: Some(e.to_string()),
                details: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionEntry {
    pub k: usize,
    pub closed_form: Option<SuspensionCheck>,
    pub discretized: SuspensionCheck,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rho: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    /// "metric" or "potential".
    pub perturbation: String,
    /// Index of the tracked eigenvalue.
    pub index: usize,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnStage {
    pub eigenvalues: Vec<f64>,
    pub model: Vec<f64>,
    /// |μ_j - ν_j/ρ| / (ν_j/ρ), or ρ|μ_j| where ν_j = 0.
    pub relative_errors: Vec<f64>,
    pub max_relative_error: f64,
    pub symmetry_defect: f64,
    /// One rate regression per perturbation present in the scene.
    pub rates: Vec<RateCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityStage {
    pub exact_field: bool,
    pub c_fitted: f64,
    pub max_violation: f64,
    pub worst_pair: (f64, f64),
    pub pairs: usize,
    pub log_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    ConeGraph,
    Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderStage {
    pub source: EnergySource,
    pub fit: HolderFit,
    pub predicted_mu: f64,
    pub predicted_regime: Regime,
    pub alpha_error: f64,
    pub chaining: Option<ChainingReport>,
    pub chaining_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub predicted: ExponentReport,
    /// |α̂ - μ| from the Hölder-fit stage.
    pub headline: Option<f64>,
    pub suspension: Option<StageOutcome<Vec<SuspensionEntry>>>,
    pub dtn: Option<StageOutcome<DtnStage>>,
    pub monotonicity: Option<StageOutcome<MonotonicityStage>>,
    pub holder_fit: Option<StageOutcome<HolderStage>>,
    pub pass: bool,
}

/// Exponent prediction for a scene; rejects p ≤ n/2 before anything else.
pub fn predict(scene: &ConeConfig, spectrum_lambda1: f64) -> Result<ExponentReport> {
    let p = scene.potential.map(|v| v.p).unwrap_or(crate::exponents::PotentialExponent::Infinite);
    p.check_admissible(scene.n)?;
    let gamma = scene.perturbation.filter(|m| m.lambda != 0.0).map_or(1.0, |m| m.gamma);
    exponent_report(spectrum_lambda1, scene.link.dim_ell(), p, gamma)
}

fn is_model(grid: &ConeGrid) -> bool {
    !grid.has_perturbation() && grid.potential.profile.is_zero()
}

pub fn run(cfg: &PipelineConfig) -> Result<VerificationReport> {
    let scene = cfg.resolve_scene()?;
    let p = scene.potential.map(|v| v.p).unwrap_or(crate::exponents::PotentialExponent::Infinite);
    p.check_admissible(scene.n)?;
    let grid = scene.build()?;
    let predicted = predict(&scene, grid.spectrum.lambda1())?;
    let trace = match &cfg.trace {
        Some(t) => t.clone(),
        None => vec![0.0, 1.0],
    };

    let suspension = cfg
        .verify
        .suspension
        .then(|| StageOutcome::from_result(suspension_stage(&scene.link, scene.n, &cfg.tolerances)));
    let dtn = cfg
        .verify
        .dtn
        .then(|| StageOutcome::from_result(dtn_stage(&scene, &grid, &cfg.tolerances)));

    let field = if cfg.verify.monotonicity || cfg.verify.holder_fit || cfg.outputs.field_csv.is_some() {
        Some(if is_model(&grid) {
            harmonic_extension_model(&trace, &grid)
        } else {
            solve_schrodinger(&grid, &trace)
        })
    } else {
        None
    };
    if let (Some(Ok(u)), Some(path)) = (&field, &cfg.outputs.field_csv) {
        u.write_csv(&grid, path)?;
    }
    let monotonicity = cfg.verify.monotonicity.then(|| {
        StageOutcome::from_result(with_field(&field, |u| {
            monotonicity_stage(u, &grid, &cfg.tolerances, cfg.outputs.profile_csv.as_deref())
        }))
    });
    let holder_fit = cfg
        .verify
        .holder_fit
        .then(|| StageOutcome::from_result(with_field(&field, |u| holder_stage(u, &grid, &predicted, cfg))));

    let headline = holder_fit
        .as_ref()
        .and_then(|s| s.details.as_ref())
        .map(|d| d.alpha_error);
    let pass = [
        suspension.as_ref().map(|s| s.pass),
        dtn.as_ref().map(|s| s.pass),
        monotonicity.as_ref().map(|s| s.pass),
        holder_fit.as_ref().map(|s| s.pass),
    ]
    .into_iter()
    .flatten()
    .all(|b| b);
    Ok(VerificationReport {
        predicted,
        headline,
        suspension,
        dtn,
        monotonicity,
        holder_fit,
        pass,
    })
}

fn with_field<T>(field: &Option<Result<Field>>, f: impl FnOnce(&Field) -> Result<T>) -> Result<T> {
    match field {
        Some(Ok(u)) => f(u),
        Some(Err(e)) => Err(e.clone()),
        None => Err(Error::InvalidInput("no field was computed".into())),
    }
}

fn closed_form_base(link: &LinkModel) -> bool {
    matches!(link, LinkModel::Circle { .. } | LinkModel::RoundSphere { .. })
}

pub fn suspension_stage(base: &LinkModel, n: usize, tol: &Tolerances) -> Result<(bool, Vec<SuspensionEntry>)> {
    let mut out = Vec::new();
    for k in 1..=3 {
        let closed_form = if closed_form_base(base) {
            Some(check_suspension_invariance(base, k, n + k, SpectrumMethod::ClosedForm)?)
        } else {
            None
        };
        let discretized = check_suspension_invariance(base, k, n + k, SpectrumMethod::Auto)?;
        let pass = closed_form.is_none_or(|c| c.gap <= tol.suspension_closed_form)
            && discretized.gap <= tol.suspension_discretized;
        out.push(SuspensionEntry {
            k,
            closed_form,
            discretized,
            pass,
        });
    }
    Ok((out.iter().all(|e| e.pass), out))
}

fn relative_errors(eigenvalues: &[f64], model: &[f64], rho: f64, count: usize) -> Vec<f64> {
    eigenvalues
        .iter()
        .zip(model)
        .take(count)
        .map(|(&e, &m)| if m > 0.0 { (e - m).abs() / m } else { rho * e.abs() })
        .collect()
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

/// Log-log slope of the rate errors against ρ.
pub fn rate_slope(points: &[RatePoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.rho, p.error)).collect();
    log_log_slope(&xy)
}

/// |μ_index - ν_index/ρ| over `radii` for the scene rescaled to each radius.
pub fn dtn_rate_points(scene: &ConeConfig, index: usize, radii: &[f64]) -> Result<Vec<RatePoint>> {
    radii
        .iter()
        .map(|&rho| {
            let mut c = scene.clone();
            c.rho = rho;
            c.modes = c.modes.max(index + 1);
            let d = dtn_perturbed(&c.build()?)?;
            Ok(RatePoint {
                rho,
                error: (d.eigenvalues[index] - d.model[index]).abs(),
            })
        })
        .collect()
}

/// Rate regression on one perturbation. Metric perturbations move μ_1 at
/// rate ρ^{γ̄-1}; a bounded potential lifts μ_0 off zero at rate ρ^{1-n/p}.
fn rate_check(scene: &ConeConfig, metric: bool, tol: &Tolerances) -> Result<RateCheck> {
    let n_over_p = scene.potential.map_or(0.0, |v| v.p.n_over_p(scene.n));
    let (index, target) = match scene.perturbation {
        Some(m) if metric => (1, m.gamma.min(2.0 - n_over_p) - 1.0),
        _ => (0, 1.0 - n_over_p),
    };
    let points = dtn_rate_points(scene, index, &RATE_RADII)?;
    let slope = rate_slope(&points);
    Ok(RateCheck {
        perturbation: if metric { "metric" } else { "potential" }.into(),
        index,
        points,
        slope,
        target,
        pass: slope.is_finite() && slope >= target - tol.dtn_rate_margin,
    })
}

pub fn dtn_stage(scene: &ConeConfig, grid: &ConeGrid, tol: &Tolerances) -> Result<(bool, DtnStage)> {
    let d = dtn_perturbed(grid)?;
    let rel = relative_errors(&d.eigenvalues, &d.model, grid.rho, tol.dtn_modes);
    let max_rel = rel.iter().copied().fold(0.0, f64::max);
    let mut stage = DtnStage {
        eigenvalues: d.eigenvalues.clone(),
        model: d.model.clone(),
        relative_errors: rel,
        max_relative_error: max_rel,
        symmetry_defect: d.symmetry_defect,
        rates: Vec::new(),
    };
    if is_model(grid) {
        return Ok((max_rel <= tol.dtn_relative, stage));
    }
    // The two contributions can have opposite signs, and the log-log slope of
    // their sum is then steeper than either rate. Each is checked alone.
    if grid.has_perturbation() {
        let mut metric_only = scene.clone();
        metric_only.potential = None;
        stage.rates.push(rate_check(&metric_only, true, tol)?);
    }
    if !grid.potential.profile.is_zero() {
        let mut potential_only = scene.clone();
        potential_only.perturbation = None;
        stage.rates.push(rate_check(&potential_only, false, tol)?);
    }
    let pass = stage.rates.iter().all(|r| r.pass);
    Ok((pass, stage))
}

pub fn monotonicity_stage(
    u: &Field,
    grid: &ConeGrid,
    tol: &Tolerances,
    profile_csv: Option<&Path>,
) -> Result<(bool, MonotonicityStage)> {
    let radii = geometric_radii(10.0 * grid.r_min(), grid.rho, 24);
    let profile = energy_profile(u, grid, &radii)?;
    let params = MonotonicityParams::from_profile(&profile, grid.potential.p, 0.0);
    let exact = u.exact.is_some();
    let c = if exact { 0.0 } else { fit_monotonicity_constant(&profile, &params)? };
    let rep = monotonicity_check(&profile, &MonotonicityParams { c, ..params })?;
    if let Some(path) = profile_csv {
        profile.with_constant(c).write_csv(path)?;
    }
    let pass = if exact {
        rep.max_violation <= tol.monotonicity
    } else {
        c.is_finite() && rep.max_violation <= tol.monotonicity
    };
    Ok((
        pass,
        MonotonicityStage {
            exact_field: exact,
            c_fitted: c,
            max_violation: rep.max_violation,
            worst_pair: rep.worst_pair,
            pairs: rep.pairs,
            log_branch: rep.log_branch,
        },
    ))
}

/// Integer β when the link is a circle of circumference 2πβ on a 2-cone.
fn cone_beta(grid: &ConeGrid) -> Option<usize> {
    match grid.link {
        LinkModel::Circle { circumference } if grid.n == 2 && !grid.has_perturbation() => {
            let beta = circumference / (2.0 * std::f64::consts::PI);
            let r = beta.round();
            (r >= 1.0 && (beta - r).abs() < 1e-6).then_some(r as usize)
        }
        _ => None,
    }
}

pub fn holder_stage(u: &Field, grid: &ConeGrid, predicted: &ExponentReport, cfg: &PipelineConfig) -> Result<(bool, HolderStage)> {
    let a = cfg.graph.a_dilation;
    let (source, fit, chaining, chaining_error) = match cone_beta(grid) {
        Some(beta) => {
            let eta = cfg.graph.radius.min(grid.rho);
            let h = cfg.graph.h;
            let cg = cone_graph(beta, h, eta)?;
            let f = cg.sample(|r, t| u.evaluate(grid, r, t).unwrap_or(f64::NAN));
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("field could not be sampled on the cone graph".into()));
            }
            let radii = geometric_radii(10.0 * h, eta / (2.0 * a), 10);
            let mut rep = ball_energies(&f, &cg.graph, &radii, &[cg.apex])?;
            let fit = fit_holder_exponent(&rep)?;
            rep.fit = Some(fit.clone());

            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let near: Vec<usize> = (0..cg.polar.len()).filter(|&i| cg.polar[i].0 <= eta / 4.0).collect();
            let mut centers = vec![cg.apex];
            for _ in 0..cfg.graph.centers {
                centers.push(near[rng.random_range(0..near.len())]);
            }
            let top = eta / (2.0 * a);
            // Morrey radii visited by the chaining: 2A·top·2^{-k}.
            let morrey_radii: Vec<f64> = std::iter::successors(Some(a * top), |r| Some(r * 0.5))
                .take_while(|&r| r >= 0.25 * a * h)
                .collect();
            let alpha = predicted.mu.clamp(f64::EPSILON, 1.0);
            let (chaining, err) = match morrey_constant(&f, &cg.graph, alpha, &centers, &morrey_radii).and_then(|lambda| {
                chaining_modulus(
                    &f,
                    &cg.graph,
                    &ChainingParams {
                        alpha,
                        lambda: lambda * (1.0 + 1e-9),
                        eta,
                        a_dilation: a,
                        centers,
                        scales: None,
                    },
                )
            }) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            (EnergySource::ConeGraph, fit, chaining, err)
        }
        None => {
            let lo = (10.0 * grid.r_min()).max(1e-2 * grid.rho);
            let radii = geometric_radii(lo, grid.rho / (2.0 * a), 12);
            let profile = energy_profile(u, grid, &radii)?;
            let vol = grid.link.volume() / grid.n as f64;
            let energies: Vec<f64> = radii
                .iter()
                .zip(&profile.eg)
                .map(|(&r, &e)| e / (vol * r.powi(grid.n as i32)))
                .collect();
            (EnergySource::Profile, fit_energy_scaling(&radii, &energies)?, None, None)
        }
    };
    let alpha_error = (fit.alpha_hat - predicted.mu).abs();
    let pass = if predicted.regime == Regime::LogLipschitz {
        fit.regime == FitRegime::LogCorrected
    } else {
        alpha_error <= cfg.tolerances.alpha
    };
    Ok((
        pass,
        HolderStage {
            source,
            fit,
            predicted_mu: predicted.mu,
            predicted_regime: predicted.regime,
            alpha_error,
            chaining,
            chaining_error,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{MetricPerturbation, PotentialProfile};
    use crate::exponents::PotentialExponent;
    use std::f64::consts::PI;

    fn scene(l: f64) -> ConeConfig {
        ConeConfig::new(LinkModel::circle(l), 2, 1.0)
    }

    #[test]
    fn rejects_subcritical_p_before_solving() {
        let mut s = scene(4.0 * PI);
        s.potential = Some(Potential {
            profile: PotentialProfile::Constant { value: 1.0 },
            p: PotentialExponent::Finite(1.0),
        });
        assert!(matches!(run(&PipelineConfig::new(s)), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn beta_two_cone_passes() {
        let mut cfg = PipelineConfig::new(scene(4.0 * PI));
        cfg.graph.centers = 2;
        cfg.verify.suspension = false;
        let rep = run(&cfg).unwrap();
        assert!(rep.pass, "{rep:#?}");
        assert!((rep.predicted.mu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perturbed_dtn_rate() {
        let mut s = scene(4.0 * PI);
        s.perturbation = Some(MetricPerturbation::conformal(0.1, 0.5));
        s.modes = 4;
        s.radial_nodes = 128;
        let (pass, d) = dtn_stage(&s, &s.build().unwrap(), &Tolerances::default()).unwrap();
        assert!(pass, "{d:?}");
        assert_eq!(d.rates.len(), 1);
        assert_eq!(d.rates[0].index, 1);
    }

    #[test]
    fn mixed_scene_checks_each_rate_alone() {
        let mut s = scene(4.0 * PI);
        s.perturbation = Some(MetricPerturbation::conformal(0.2, 0.5));
        s.potential = Some(Potential {
            profile: crate::cone::PotentialProfile::Constant { value: -1.0 },
            p: crate::exponents::PotentialExponent::Infinite,
        });
        s.modes = 4;
        s.radial_nodes = 128;
        let (pass, d) = dtn_stage(&s, &s.build().unwrap(), &Tolerances::default()).unwrap();
        assert!(pass, "{d:?}");
        let kinds: Vec<_> = d.rates.iter().map(|r| (r.perturbation.as_str(), r.index)).collect();
        assert_eq!(kinds, [("metric", 1), ("potential", 0)]);
    }

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"{"scene": {"link": {"kind": "circle", "circumference": 6.283185307179586}, "n": 2, "rho": 1.0}}"#;
        let cfg: PipelineConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(cfg.verify.holder_fit);
        let back: PipelineConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let missing = PipelineConfig {
            scene: SceneRef::Path("/nonexistent/scene.json".into()),
            ..cfg
        };
        assert!(matches!(missing.resolve_scene(), Err(Error::Io(_))));
    }

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = RATE_RADII.iter().map(|&r| (r, 3.0 * r.powf(0.7))).collect();
        assert!((log_log_slope(&pts) - 0.7).abs() < 1e-12);
    }
}
