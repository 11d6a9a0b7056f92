//! Dyadic chaining: ball averages along B(p, ρ/2^k) converge to f(p), and the
//! step |f_B - f_{2B}| is controlled by doubling, Poincaré and Morrey bounds.

use serde::{Deserialize, Serialize};

use super::{BallStats, MetricMeasureGraph};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainingParams {
    pub alpha: f64,
    /// Morrey constant Λ: (1/μ(B)) ∫_B |df|² ≤ Λ r^{2α-2} for r < η.
    pub lambda: f64,
    pub eta: f64,
    /// Poincaré dilation A ≥ 1.
    pub a_dilation: f64,
    pub centers: Vec<usize>,
    /// Test radii ρ; defaults to the dyadic ladder below η/(2A).
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainingReport {
    pub alpha: f64,
    pub lambda: f64,
    pub a_dilation: f64,
    /// ℓ with A ≤ 2^ℓ.
    pub ell: u32,
    pub v_est: f64,
    pub c_poin_est: f64,
    /// √(8 V^{ℓ+1} C Λ) (2A)^{α-1} / (2^α - 1): the bound is κ ρ^α.
    pub kappa_bound: f64,
    /// sup |f(p) - f_{B(p,ρ)}| / ρ^α.
    pub kappa_measured: f64,
    /// sup |f_{B(x,d)} - f_{B(y,d)}| / d^α over center pairs with d = d(x, y).
    pub kappa_prime_measured: f64,
    /// kappa_measured / kappa_bound (0 when nothing was measured).
    pub ratio: f64,
    pub scales: Vec<f64>,
    /// Balls with zero energy but nonzero variance, left out of C_Poin.
    pub excluded_balls: usize,
}

fn ell_for(a: f64) -> u32 {
    a.log2().ceil().max(0.0) as u32
}

/// Largest Λ̂ = E(B)/μ(B) / r^{2α-2} over the given centers and radii.
pub fn morrey_constant(f: &[f64], graph: &MetricMeasureGraph, alpha: f64, centers: &[usize], radii: &[f64]) -> Result<f64> {
    let rep = super::ball_energies(f, graph, radii, centers)?;
    Ok(rep
        .energies
        .iter()
        .map(|b| b.normalized / b.radius.powf(2.0 * alpha - 2.0))
        .fold(0.0, f64::max))
}

struct CenterResult {
    v: f64,
    c: f64,
    excluded: usize,
    osc: f64,
}

pub fn chaining_modulus(f: &[f64], graph: &MetricMeasureGraph, params: &ChainingParams) -> Result<ChainingReport> {
    let ChainingParams {
        alpha,
        lambda,
        eta,
        a_dilation: a,
        ..
    } = *params;
    if !(alpha > 0.0 && alpha <= 1.0) || !(lambda >= 0.0) || !(eta > 0.0) || !(a >= 1.0) {
        return Err(Error::InvalidInput("chaining needs alpha in (0,1], Lambda >= 0, eta > 0, A >= 1".into()));
    }
    if f.len() != graph.len() || params.centers.is_empty() {
        return Err(Error::InvalidInput("field length mismatch or no centers".into()));
    }
    let ell = ell_for(a);
    let h = graph.min_edge_length();
    let top = eta / (2.0 * a);
    let scales: Vec<f64> = match &params.scales {
        Some(s) => s.clone(),
        None => std::iter::successors(Some(top * 0.5), |r| Some(r * 0.5)).take_while(|&r| r >= h).collect(),
    };
    if scales.iter().any(|&r| !(r > 0.0) || r >= top) {
        return Err(Error::InvalidInput(format!("test radii must lie in (0, eta/(2A)) = (0, {top})")));
    }
    let rho_max = scales.iter().copied().fold(0.0, f64::max);
    let cutoff = (2f64.powi(ell as i32) * rho_max).max(a * rho_max) * (1.0 + 1e-9);

    let stats: Vec<BallStats> = par::map_slice(&params.centers, |&c| BallStats::new(graph, f, c, cutoff));
    let per_center: Vec<Result<CenterResult>> = par::map_slice(&stats, |st| {
        let mut violation: Option<(f64, f64)> = None;
        let mut out = CenterResult {
            v: 1.0,
            c: 0.0,
            excluded: 0,
            osc: 0.0,
        };
        for &rho in &scales {
            let q0 = st.query(rho);
            out.osc = out.osc.max((st.f_center - q0.mean).abs() / rho.powf(alpha));
            let mut r = rho * 0.5;
            loop {
                // Step B(p, r) → B(p, 2r): Morrey at 2Ar, Poincaré on 2r,
                // doubling from r up to 2^{ℓ+1} r.
                let big = 2.0 * a * r;
                let qb = st.query(big);
                let bound = lambda * big.powf(2.0 * alpha - 2.0) * qb.measure;
                if qb.energy > bound * (1.0 + 1e-12) && violation.is_none_or(|(rv, _)| big < rv) {
                    violation = Some((big, qb.energy / bound.max(f64::MIN_POSITIVE)));
                }
                let mut rr = r;
                for _ in 0..=ell {
                    let ratio = st.query(2.0 * rr).measure / st.query(rr).measure;
                    out.v = out.v.max(ratio);
                    rr *= 2.0;
                }
                let q2 = st.query(2.0 * r);
                if q2.variance_sum > 0.0 {
                    if qb.energy > 0.0 {
                        out.c = out.c.max(q2.variance_sum / ((2.0 * r).powi(2) * qb.energy));
                    } else {
                        out.excluded += 1;
                    }
                }
                if st.count(r) <= 1 {
                    break;
                }
                r *= 0.5;
            }
        }
        match violation {
            Some(v) => Err(v),
            None => Ok(out),
        }
    })
    .into_iter()
    .zip(&params.centers)
    .map(|(res, &center)| res.map_err(|(radius, ratio): (f64, f64)| Error::MorreyViolation { center, radius, ratio }))
    .collect();

    // Report the smallest violating scale across centers.
    let mut worst: Option<Error> = None;
    let mut results = Vec::new();
    for r in per_center {
        match r {
            Ok(c) => results.push(c),
            Err(e @ Error::MorreyViolation { radius, .. }) => {
                let replace = match &worst {
                    Some(Error::MorreyViolation { radius: rw, .. }) => radius < *rw,
                    _ => true,
                };
                if replace {
                    worst = Some(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = worst {
        return Err(e);
    }
    let v_est = results.iter().map(|c| c.v).fold(1.0, f64::max);
    let c_poin_est = results.iter().map(|c| c.c).fold(0.0, f64::max);
    let excluded_balls = results.iter().map(|c| c.excluded).sum();
    let kappa_measured = results.iter().map(|c| c.osc).fold(0.0, f64::max);
    let kappa_bound = (8.0 * v_est.powi(ell as i32 + 1) * c_poin_est * lambda).sqrt() * (2.0 * a).powf(alpha - 1.0)
        / (2f64.powf(alpha) - 1.0);

    let mut kappa_prime_measured: f64 = 0.0;
    for (i, si) in stats.iter().enumerate() {
        for sj in &stats[i + 1..] {
            let d = graph.distances_from(si.center, rho_max * (1.0 + 1e-9))[sj.center];
            if d.is_finite() && d > 0.0 && d <= rho_max {
                let diff = (si.query(d).mean - sj.query(d).mean).abs();
                kappa_prime_measured = kappa_prime_measured.max(diff / d.powf(alpha));
            }
        }
    }
    let ratio = if kappa_measured == 0.0 { 0.0 } else { kappa_measured / kappa_bound };
    Ok(ChainingReport {
        alpha,
        lambda,
        a_dilation: a,
        ell,
        v_est,
        c_poin_est,
        kappa_bound,
        kappa_measured,
        kappa_prime_measured,
        ratio,
        scales,
        excluded_balls,
    })
}

fn pair_sup(
    f: &[f64],
    graph: &MetricMeasureGraph,
    sources: &[usize],
    max_dist: f64,
    weight: impl Fn(f64) -> f64 + Sync,
) -> Result<f64> {
    if f.len() != graph.len() {
        return Err(Error::InvalidInput("field length does not match graph".into()));
    }
    let per = par::map_slice(sources, |&s| {
        let d = graph.distances_from(s, max_dist);
        d.iter()
            .enumerate()
            .filter(|&(v, &dv)| v != s && dv > 0.0 && dv.is_finite())
            .map(|(v, &dv)| (f[v] - f[s]).abs() / weight(dv))
            .fold(0.0, f64::max)
    });
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// sup |f(x) - f(y)| / d(x,y)^α over x in `sources` and all y.
pub fn holder_seminorm(f: &[f64], graph: &MetricMeasureGraph, alpha: f64, sources: &[usize]) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    pair_sup(f, graph, sources, f64::INFINITY, |d| d.powf(alpha))
}

/// sup |f(x) - f(y)| / (|log d|^γ d) over pairs with d(x,y) ≤ 1/2.
pub fn log_holder_seminorm(f: &[f64], graph: &MetricMeasureGraph, gamma: f64, sources: &[usize]) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
    }
    pair_sup(f, graph, sources, 0.5, |d| (-d.ln()).powf(gamma) * d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub v_est: f64,
    pub c_poin_est: f64,
    pub a_used: f64,
    /// (r, max over centers of μ(B(p,2r))/μ(B(p,r))).
    pub doubling_by_radius: Vec<(f64, f64)>,
    pub excluded_balls: usize,
}

/// Empirical doubling and Poincaré constants over sampled centers and radii.
pub fn doubling_and_poincare_diagnostics(
    graph: &MetricMeasureGraph,
    fields: &[Vec<f64>],
    centers: &[usize],
    radii: &[f64],
    a_dilation: f64,
) -> Result<Diagnostics> {
    if !(a_dilation >= 1.0) || centers.is_empty() || radii.is_empty() {
        return Err(Error::InvalidInput("diagnostics need A >= 1, centers and radii".into()));
    }
    if fields.iter().any(|f| f.len() != graph.len()) {
        return Err(Error::InvalidInput("field length does not match graph".into()));
    }
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let cutoff = a_dilation.max(2.0) * rmax * (1.0 + 1e-9);
    let zero = vec![0.0; graph.len()];
    let doubling: Vec<Vec<f64>> = par::map_slice(centers, |&c| {
        let st = BallStats::new(graph, &zero, c, cutoff);
        radii.iter().map(|&r| st.query(2.0 * r).measure / st.query(r).measure).collect()
    });
    let doubling_by_radius: Vec<(f64, f64)> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| (r, doubling.iter().map(|row| row[k]).fold(0.0, f64::max)))
        .collect();
    let mut c_poin_est: f64 = 0.0;
    let mut excluded_balls = 0;
    for f in fields {
        let per = par::map_slice(centers, |&c| {
            let st = BallStats::new(graph, f, c, cutoff);
            let mut best: f64 = 0.0;
            let mut excl = 0;
            for &r in radii {
                let var = st.query(r).variance_sum;
                let e = st.query(a_dilation * r).energy;
                if var > 0.0 {
                    if e > 0.0 {
                        best = best.max(var / (r * r * e));
                    } else {
                        excl += 1;
                    }
                }
            }
            (best, excl)
        });
        for (b, e) in per {
            c_poin_est = c_poin_est.max(b);
            excluded_balls += e;
        }
    }
    Ok(Diagnostics {
        v_est: doubling_by_radius.iter().map(|p| p.1).fold(1.0, f64::max),
        c_poin_est,
        a_used: a_dilation,
        doubling_by_radius,
        excluded_balls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morrey::{cone_graph, geometric_radii, path_graph, square_grid};

    #[test]
    fn constant_field_has_zero_ratio() {
        let cg = cone_graph(2, 0.05, 1.0).unwrap();
        let f = vec![1.0; cg.graph.len()];
        let p = ChainingParams {
            alpha: 0.5,
            lambda: 1.0,
            eta: 1.0,
            a_dilation: 2.0,
            centers: vec![cg.apex, 5],
            scales: None,
        };
        let r = chaining_modulus(&f, &cg.graph, &p).unwrap();
        assert_eq!((r.kappa_measured, r.ratio), (0.0, 0.0));
    }

    #[test]
    fn half_power_mode_satisfies_bound() {
        let cg = cone_graph(2, 0.02, 1.0).unwrap();
        let f = cg.sample(|r, t| r.sqrt() * (0.5 * t).cos());
        let centers: Vec<usize> = vec![cg.apex, 3, 101, 777];
        let radii = geometric_radii(0.02, 0.5, 12);
        let lambda = morrey_constant(&f, &cg.graph, 0.5, &centers, &radii).unwrap();
        let p = ChainingParams {
            alpha: 0.5,
            lambda: lambda * 1.05,
            eta: 1.0,
            a_dilation: 2.0,
            centers,
            scales: None,
        };
        let r = chaining_modulus(&f, &cg.graph, &p).unwrap();
        assert!(r.kappa_measured > 0.0 && r.ratio <= 1.0, "{r:?}");
    }

    #[test]
    fn jump_violates_morrey_at_smallest_scale() {
        let cg = cone_graph(1, 0.02, 1.0).unwrap();
        let f = cg.sample(|r, t| if r * t.cos() > 0.0 { 1.0 } else { 0.0 });
        let centers = vec![cg.apex];
        // A jump has E(B)/μ(B) ~ 1/r, so any α > 1/2 fails at small scales.
        let lambda = morrey_constant(&f, &cg.graph, 0.8, &centers, &[0.25]).unwrap();
        let p = ChainingParams {
            alpha: 0.8,
            lambda,
            eta: 1.0,
            a_dilation: 2.0,
            centers,
            scales: None,
        };
        match chaining_modulus(&f, &cg.graph, &p) {
            Err(Error::MorreyViolation { radius, ratio, .. }) => {
                assert!(radius < 0.1 && ratio > 1.0, "radius {radius}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn seminorm_of_distance_function_is_one() {
        let g = square_grid(12, 0.1).unwrap();
        let f = g.distances_from(0, f64::INFINITY);
        let s = holder_seminorm(&f, &g, 1.0, &[0, 5, 40]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(log_holder_seminorm(&f, &g, 0.5, &[0]).unwrap().is_finite());
    }

    #[test]
    fn doubling_estimates() {
        let g = path_graph(2001, 1e-3).unwrap();
        let d = doubling_and_poincare_diagnostics(&g, &[], &[1000], &[0.05, 0.1, 0.2], 2.0).unwrap();
        assert!((d.v_est - 2.0).abs() < 0.05, "{d:?}");
        let g = square_grid(201, 0.01).unwrap();
        let center = 100 * 201 + 100;
        let d = doubling_and_poincare_diagnostics(&g, &[], &[center], &[0.1, 0.2, 0.4], 2.0).unwrap();
        assert!(d.v_est <= 4.0 + 0.15, "{d:?}");
    }
}
