//! `conereg`: exponent prediction and numerical verification on metric cones.
//! Every subcommand prints one JSON document on stdout. Exit status is 0 when
//! all checks pass, 1 when a check fails and 2 on errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use conereg::cone::{solve_schrodinger, ConeConfig, MetricPerturbation, Potential, PotentialProfile};
use conereg::exponents::{check_suspension_invariance, exponent_report, PotentialExponent};
use conereg::links::{link_spectrum_with, LinkModel, SpectrumMethod, SpectrumOptions};
use conereg::morrey::{
    ball_energies, chaining_modulus, fit_holder_exponent, geometric_radii, read_field_csv, ChainingParams,
    MetricMeasureGraph,
};
use conereg::pipeline::{self, PipelineConfig, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "conereg", version, about = "Hölder exponents for Schrödinger equations on metric cones")]
struct Cli {
    /// Worker threads for data-parallel stages.
    #[arg(long, global = true, env = "CONEREG_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Predicted Hölder exponent and regime.
    Exponent(SceneArgs),
    /// Lowest link eigenvalues with indicial exponents.
    Spectrum {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Closed-form suspension spectra instead of the discretized operator.
        #[arg(long)]
        closed_form: bool,
        /// Sturm–Liouville nodes for discretized links.
        #[arg(long, default_value_t = conereg::links::DEFAULT_SL_NODES)]
        nodes: usize,
    },
    /// Compare ν₁ of the link with ν₁ of its k-fold suspensions.
    SuspensionCheck {
        #[command(flatten)]
        scene: SceneArgs,
        /// Suspension orders; defaults to 1, 2, 3.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
    },
    /// Discrete Dirichlet-to-Neumann spectrum against ν_j/ρ.
    Dtn(SceneArgs),
    /// Solve (Δ+V)u = 0 with the given trace.
    Solve {
        #[command(flatten)]
        scene: SceneArgs,
        /// Write the spectral field as CSV (r, mode, value).
        #[arg(long)]
        field_csv: Option<PathBuf>,
    },
    /// Energy monotonicity profile and fitted constant C.
    Monotonicity {
        #[command(flatten)]
        scene: SceneArgs,
        /// Write the profile as CSV (rho, E0, Eg, phi).
        #[arg(long)]
        profile_csv: Option<PathBuf>,
    },
    /// Fit the Hölder exponent from ball energies, on a scene or on a graph.
    HolderFit {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Run every enabled verification stage.
    Verify(SceneArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct SceneArgs {
    /// Pipeline config (JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Link: circle:L, sphere:d or suspension:k:<base>.
    #[arg(long)]
    link: Option<String>,
    /// Cone dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    radial_nodes: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    /// Conformal metric perturbation strength Λ.
    #[arg(long = "Lambda")]
    perturbation_lambda: Option<f64>,
    /// Metric Hölder exponent γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// zero, constant:v, inverse_square:c, power:c:e or lorentzian:a:s.
    #[arg(long)]
    potential: Option<String>,
    /// Integrability exponent of V: a number or inf.
    #[arg(long)]
    p: Option<PotentialExponent>,
    /// Boundary trace coefficients per link mode.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    trace: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Vertex table (id, measure[, x, y]).
    #[arg(long, requires_all = ["edges", "field"])]
    vertices: Option<PathBuf>,
    /// Edge list (u, v, length, conductance).
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Field values (id, value).
    #[arg(long)]
    field: Option<PathBuf>,
    /// Ball centers.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    centers: Vec<usize>,
    /// Radii; defaults to 10 geometric radii over [r_min, r_max].
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Also run the chaining estimate at this exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Morrey constant Λ for the chaining estimate.
    #[arg(long = "morrey-lambda")]
    morrey_lambda: Option<f64>,
    /// Morrey scale η for the chaining estimate.
    #[arg(long)]
    eta: Option<f64>,
}

impl SceneArgs {
    fn pipeline(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => {
                let (Some(link), Some(n)) = (&self.link, self.n) else {
                    bail!("either --config or both --link and --n are required");
                };
                PipelineConfig::new(ConeConfig::new(LinkModel::parse_short(link)?, n, self.rho.unwrap_or(1.0)))
            }
        };
        let mut scene = cfg.resolve_scene()?;
        if let Some(link) = &self.link {
            scene.link = LinkModel::parse_short(link)?;
        }
        if let Some(n) = self.n {
            scene.n = n;
        }
        if let Some(rho) = self.rho {
            scene.rho = rho;
        }
        if let Some(v) = self.radial_nodes {
            scene.radial_nodes = v;
        }
        if let Some(v) = self.modes {
            scene.modes = v;
        }
        if self.perturbation_lambda.is_some() || self.gamma.is_some() {
            let base = scene.perturbation.unwrap_or(MetricPerturbation::conformal(0.0, 1.0));
            let mut m = MetricPerturbation::conformal(
                self.perturbation_lambda.unwrap_or(base.lambda),
                self.gamma.unwrap_or(base.gamma),
            );
            m.radial = base.radial;
            m.angular = base.angular;
            m.validate()?;
            scene.perturbation = Some(m);
        }
        if self.potential.is_some() || self.p.is_some() {
            let base = scene.potential.unwrap_or(Potential::zero());
            let profile = match &self.potential {
                Some(s) => PotentialProfile::parse_short(s)?,
                None => base.profile,
            };
            scene.potential = Some(Potential {
                profile,
                p: self.p.unwrap_or(base.p),
            });
        }
        cfg.scene = pipeline::SceneRef::Inline(scene);
        cfg.potential = None;
        if let Some(t) = &self.trace {
            cfg.trace = Some(t.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn scene(&self) -> Result<ConeConfig> {
        Ok(self.pipeline()?.resolve_scene()?)
    }
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    radii: &'a [f64],
    trace: &'a [f64],
    field: &'a conereg::cone::Field,
}

#[derive(Serialize)]
struct GraphFitOutput {
    report: conereg::morrey::MorreyReport,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Exponent(args) => {
            let scene = args.scene()?;
            let spec = link_spectrum_with(&scene.link, scene.n, 2, &SpectrumOptions::default())?;
            let p = scene.potential.map_or(PotentialExponent::Infinite, |v| v.p);
            let gamma = scene.perturbation.filter(|m| m.lambda != 0.0).map_or(1.0, |m| m.gamma);
            emit(&exponent_report(spec.lambda1(), scene.link.dim_ell(), p, gamma)?)?;
            Ok(true)
        }
        Command::Spectrum {
            scene,
            count,
            closed_form,
            nodes,
        } => {
            let scene = scene.scene()?;
            let opts = SpectrumOptions {
                method: if closed_form { SpectrumMethod::ClosedForm } else { SpectrumMethod::Auto },
                nodes,
                ceiling: None,
            };
            let spec = link_spectrum_with(&scene.link, scene.n, count, &opts)?;
            emit(&serde_json::json!({ "spectrum": spec, "levels": spec.levels() }))?;
            Ok(true)
        }
        Command::SuspensionCheck { scene, k } => {
            let scene = scene.scene()?;
            let ks = if k.is_empty() { vec![1, 2, 3] } else { k };
            let tol = Tolerances::default();
            let mut rows = Vec::new();
            let mut pass = true;
            for k in ks {
                let n = scene.link.dim_ell() + 1 + k;
                let check = check_suspension_invariance(&scene.link, k, n, SpectrumMethod::Auto)?;
                pass &= check.gap <= tol.suspension_discretized;
                rows.push(serde_json::json!({ "k": k, "n": n, "check": check }));
            }
            emit(&rows)?;
            Ok(pass)
        }
        Command::Dtn(args) => {
            let cfg = args.pipeline()?;
            let scene = cfg.resolve_scene()?;
            let grid = scene.build()?;
            let (pass, stage) = pipeline::dtn_stage(&scene, &grid, &cfg.tolerances)?;
            emit(&serde_json::json!({ "pass": pass, "dtn": stage }))?;
            Ok(pass)
        }
        Command::Solve { scene, field_csv } => {
            let cfg = scene.pipeline()?;
            let grid = cfg.resolve_scene()?.build()?;
            let trace = cfg.trace.clone().unwrap_or_else(|| vec![0.0, 1.0]);
            let u = solve_schrodinger(&grid, &trace)?;
            if let Some(path) = field_csv {
                u.write_csv(&grid, &path)?;
            }
            emit(&SolveOutput {
                radii: &grid.radii,
                trace: &trace,
                field: &u,
            })?;
            Ok(true)
        }
        Command::Monotonicity { scene, profile_csv } => {
            let cfg = scene.pipeline()?;
            let scene = cfg.resolve_scene()?;
            let grid = scene.build()?;
            let trace = cfg.trace.clone().unwrap_or_else(|| vec![0.0, 1.0]);
            let model = grid.perturbation.lambda == 0.0 && grid.potential.profile.is_zero();
            let u = if model {
                conereg::cone::harmonic_extension_model(&trace, &grid)?
            } else {
                solve_schrodinger(&grid, &trace)?
            };
            let (pass, stage) = pipeline::monotonicity_stage(&u, &grid, &cfg.tolerances, profile_csv.as_deref())?;
            emit(&serde_json::json!({ "pass": pass, "monotonicity": stage }))?;
            Ok(pass)
        }
        Command::HolderFit { scene, graph } => match &graph.vertices {
            Some(vertices) => {
                let (Some(edges), Some(field)) = (&graph.edges, &graph.field) else {
                    bail!("--vertices needs --edges and --field");
                };
                let g = MetricMeasureGraph::from_csv(vertices, edges)?;
                let f = read_field_csv(field, g.len())?;
                let radii = if graph.radii.is_empty() {
                    let (Some(lo), Some(hi)) = (graph.r_min, graph.r_max) else {
                        bail!("give --radii or both --r-min and --r-max");
                    };
                    geometric_radii(lo, hi, 10)
                } else {
                    graph.radii.clone()
                };
                let mut report = ball_energies(&f, &g, &radii, &graph.centers)?;
                report.fit = Some(fit_holder_exponent(&report)?);
                if let Some(alpha) = graph.alpha {
                    let (Some(lambda), Some(eta)) = (graph.morrey_lambda, graph.eta) else {
                        bail!("--alpha needs --morrey-lambda and --eta");
                    };
                    report.chaining = Some(chaining_modulus(
                        &f,
                        &g,
                        &ChainingParams {
                            alpha,
                            lambda,
                            eta,
                            a_dilation: 2.0,
                            centers: graph.centers.clone(),
                            scales: None,
                        },
                    )?);
                }
                let pass = report.chaining.as_ref().is_none_or(|c| c.ratio <= 1.0);
                emit(&GraphFitOutput { report })?;
                Ok(pass)
            }
            None => {
                let cfg = scene.pipeline()?;
                let scene = cfg.resolve_scene()?;
                let grid = scene.build()?;
                let predicted = pipeline::predict(&scene, grid.spectrum.lambda1())?;
                let trace = cfg.trace.clone().unwrap_or_else(|| vec![0.0, 1.0]);
                let u = if grid.perturbation.lambda == 0.0 && grid.potential.profile.is_zero() {
                    conereg::cone::harmonic_extension_model(&trace, &grid)?
                } else {
                    solve_schrodinger(&grid, &trace)?
                };
                let (pass, stage) = pipeline::holder_stage(&u, &grid, &predicted, &cfg)?;
                emit(&serde_json::json!({ "pass": pass, "holder_fit": stage }))?;
                Ok(pass)
            }
        },
        Command::Verify(args) => {
            let report = pipeline::run(&args.pipeline()?)?;
            emit(&report)?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
