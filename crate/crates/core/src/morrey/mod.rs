//! Ball-normalized Dirichlet energies on metric-measure graphs, Hölder
//! exponent fits and the dyadic chaining bound.

mod chain;
mod fit;
mod graph;

pub use chain::{
    chaining_modulus, doubling_and_poincare_diagnostics, holder_seminorm, log_holder_seminorm, morrey_constant,
    ChainingParams, ChainingReport, Diagnostics,
};
pub use fit::{fit_energy_scaling, fit_holder_exponent, FitRegime, HolderFit, LOG_PREFERENCE_RATIO};
pub use graph::{cone_graph, path_graph, read_field_csv, square_grid, write_field_csv, ConeGraph, Edge, MetricMeasureGraph};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Relative slack for closed-ball membership.
const BALL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallEnergy {
    pub center: usize,
    pub radius: f64,
    pub measure: f64,
    pub energy: f64,
    /// energy / measure.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MorreyReport {
    pub energies: Vec<BallEnergy>,
    #[serde(default)]
    pub fit: Option<HolderFit>,
    #[serde(default)]
    pub chaining: Option<ChainingReport>,
}

impl MorreyReport {
    /// Sorted distinct radii with the supremum of normalized energy over
    /// centers.
    pub fn sup_profile(&self) -> (Vec<f64>, Vec<f64>) {
        let mut pairs: Vec<(f64, f64)> = self.energies.iter().map(|b| (b.radius, b.normalized)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut radii: Vec<f64> = Vec::new();
        let mut sup: Vec<f64> = Vec::new();
        for (r, e) in pairs {
            if radii.last() == Some(&r) {
                let last = sup.last_mut().expect("parallel vectors");
                *last = last.max(e);
            } else {
                radii.push(r);
                sup.push(e);
            }
        }
        (radii, sup)
    }
}

/// Cumulative statistics of closed balls around one center, answering
/// queries for any radius by binary search.
#[derive(Debug, Clone)]
pub(crate) struct BallStats {
    pub center: usize,
    /// Vertex distances, ascending, with prefix sums of μ, μ(f - f(p)),
    /// μ(f - f(p))².
    dist: Vec<f64>,
    mass: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    /// Edge keys max(d_u, d_v), ascending, with prefix energy sums.
    edge_key: Vec<f64>,
    edge_energy: Vec<f64>,
    pub f_center: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BallQuery {
    pub measure: f64,
    /// Mean of f over the ball.
    pub mean: f64,
    /// Σ μ (f - mean)².
    pub variance_sum: f64,
    pub energy: f64,
}

impl BallStats {
    pub fn new(graph: &MetricMeasureGraph, f: &[f64], center: usize, cutoff: f64) -> Self {
        let d = graph.distances_from(center, cutoff);
        let fc = f[center];
        let mut verts: Vec<usize> = (0..graph.len()).filter(|&v| d[v].is_finite()).collect();
        verts.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        let mut dist = Vec::with_capacity(verts.len());
        let (mut mass, mut first, mut second) = (Vec::new(), Vec::new(), Vec::new());
        let (mut m, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let mu = graph.measures();
        for &v in &verts {
            let g = f[v] - fc;
            m += mu[v];
            s1 += mu[v] * g;
            s2 += mu[v] * g * g;
            dist.push(d[v]);
            mass.push(m);
            first.push(s1);
            second.push(s2);
        }
        let mut keyed: Vec<(f64, f64)> = Vec::new();
        for &v in &verts {
            for (w, k) in graph.neighbors(v) {
                if w > v && d[w].is_finite() {
                    let e = &graph.edges()[k];
                    if e.conductance > 0.0 {
                        keyed.push((d[v].max(d[w]), e.conductance * (f[v] - f[w]).powi(2)));
                    }
                }
            }
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut acc = 0.0;
        let mut edge_key = Vec::with_capacity(keyed.len());
        let mut edge_energy = Vec::with_capacity(keyed.len());
        for (k, e) in keyed {
            acc += e;
            edge_key.push(k);
            edge_energy.push(acc);
        }
        Self {
            center,
            dist,
            mass,
            first,
            second,
            edge_key,
            edge_energy,
            f_center: fc,
        }
    }

    pub fn query(&self, radius: f64) -> BallQuery {
        let lim = radius * (1.0 + BALL_SLACK);
        let nv = self.dist.partition_point(|&d| d <= lim);
        let ne = self.edge_key.partition_point(|&d| d <= lim);
        let measure = self.mass[nv - 1];
        let s1 = self.first[nv - 1];
        let s2 = self.second[nv - 1];
        BallQuery {
            measure,
            mean: self.f_center + s1 / measure,
            variance_sum: (s2 - s1 * s1 / measure).max(0.0),
            energy: if ne == 0 { 0.0 } else { self.edge_energy[ne - 1] },
        }
    }

    /// Number of vertices in the closed ball.
    pub fn count(&self, radius: f64) -> usize {
        self.dist.partition_point(|&d| d <= radius * (1.0 + BALL_SLACK))
    }
}

/// Normalized Dirichlet energies (1/μ(B)) Σ_{e ⊂ B} c_e (Δf)² of closed
/// balls B(p, r) for every center and radius.
pub fn ball_energies(f: &[f64], graph: &MetricMeasureGraph, radii: &[f64], centers: &[usize]) -> Result<MorreyReport> {
    if f.len() != graph.len() {
        return Err(Error::InvalidInput("field length does not match graph".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= graph.len()) {
        return Err(Error::InvalidInput(format!("center {c} out of range")));
    }
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let per_center = par::map_slice(centers, |&c| {
        let stats = BallStats::new(graph, f, c, rmax * (1.0 + 2.0 * BALL_SLACK));
        radii
            .iter()
            .map(|&r| {
                let q = stats.query(r);
                BallEnergy {
                    center: c,
                    radius: r,
                    measure: q.measure,
                    energy: q.energy,
                    normalized: q.energy / q.measure,
                }
            })
            .collect::<Vec<_>>()
    });
    let energies: Vec<BallEnergy> = per_center.into_iter().flatten().collect();
    if let Some(b) = energies.iter().find(|b| !(b.measure > 0.0)) {
        return Err(Error::EmptyBall {
            center: b.center,
            radius: b.radius,
        });
    }
    Ok(MorreyReport {
        energies,
        fit: None,
        chaining: None,
    })
}

/// `count` radii geometrically spaced over [lo, hi].
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}
