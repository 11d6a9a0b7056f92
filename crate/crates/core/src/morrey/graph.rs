//! Metric-measure graphs: vertex measures, edge lengths for the path metric
//! and conductances for the Dirichlet energy Σ c_e (Δf)².

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub length: f64,
    pub conductance: f64,
}

#[derive(Debug, Clone)]
pub struct MetricMeasureGraph {
    measures: Vec<f64>,
    coords: Option<Vec<[f64; 2]>>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    incident: Vec<u32>,
}

#[derive(PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MetricMeasureGraph {
    pub fn new(measures: Vec<f64>, edges: Vec<Edge>, coords: Option<Vec<[f64; 2]>>) -> Result<Self> {
        let nv = measures.len();
        if nv == 0 || nv > u32::MAX as usize {
            return Err(Error::InvalidInput(format!("unsupported vertex count {nv}")));
        }
        if let Some((i, &m)) = measures.iter().enumerate().find(|(_, &m)| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput(format!("vertex {i} has non-positive measure {m}")));
        }
        if coords.as_ref().is_some_and(|c| c.len() != nv) {
            return Err(Error::InvalidInput("coordinate table length mismatch".into()));
        }
        let mut degree = vec![0usize; nv + 1];
        for (k, e) in edges.iter().enumerate() {
            if e.u as usize >= nv || e.v as usize >= nv || e.u == e.v {
                return Err(Error::InvalidInput(format!("edge {k} has invalid endpoints ({}, {})", e.u, e.v)));
            }
            if !(e.length > 0.0) || !e.length.is_finite() || !(e.conductance >= 0.0) || !e.conductance.is_finite() {
                return Err(Error::InvalidInput(format!("edge {k} needs positive length and conductance >= 0")));
            }
            degree[e.u as usize + 1] += 1;
            degree[e.v as usize + 1] += 1;
        }
        for i in 0..nv {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut incident = vec![0u32; offsets[nv]];
        for (k, e) in edges.iter().enumerate() {
            for w in [e.u as usize, e.v as usize] {
                incident[fill[w]] = k as u32;
                fill[w] += 1;
            }
        }
        Ok(Self {
            measures,
            coords,
            edges,
            offsets,
            incident,
        })
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Incident (neighbour, edge index) pairs.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incident[self.offsets[v]..self.offsets[v + 1]].iter().map(move |&k| {
            let e = &self.edges[k as usize];
            let other = if e.u as usize == v { e.v } else { e.u };
            (other as usize, k as usize)
        })
    }

    /// Shortest-path distances from `source`; vertices beyond `cutoff` (or
    /// unreachable) are +∞.
    pub fn distances_from(&self, source: usize, cutoff: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Item(0.0, source as u32));
        while let Some(Item(d, v)) = heap.pop() {
            let v = v as usize;
            if d > dist[v] {
                continue;
            }
            for (w, k) in self.neighbors(v) {
                let nd = d + self.edges[k].length;
                if nd < dist[w] && nd <= cutoff {
                    dist[w] = nd;
                    heap.push(Item(nd, w as u32));
                }
            }
        }
        dist
    }

    /// Dirichlet energy Σ c_e (Δf)² over all edges.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (f[e.u as usize] - f[e.v as usize]).powi(2))
            .sum()
    }

    /// Lengths scaled by s, measures by s^n and conductances by s^{n-2}.
    pub fn scaled(&self, s: f64, n: usize) -> Self {
        let mut g = self.clone();
        let (sm, sc) = (s.powi(n as i32), s.powi(n as i32 - 2));
        g.measures.iter_mut().for_each(|m| *m *= sm);
        for e in &mut g.edges {
            e.length *= s;
            e.conductance *= sc;
        }
        if let Some(c) = &mut g.coords {
            c.iter_mut().for_each(|p| {
                p[0] *= s;
                p[1] *= s;
            });
        }
        g
    }

    /// Read a vertex table (id, measure[, x, y]) and an edge list
    /// (u, v, length, conductance). Ids must be 0..N-1 in any order.
    pub fn from_csv(vertices: &Path, edges: &Path) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(vertices)?;
        let mut rows: Vec<(usize, f64, Option<[f64; 2]>)> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("vertex row missing column {i}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            let id = get(0)? as usize;
            let xy = if rec.len() >= 4 { Some([get(2)?, get(3)?]) } else { None };
            rows.push((id, get(1)?, xy));
        }
        let nv = rows.len();
        let mut measures = vec![f64::NAN; nv];
        let mut coords = vec![[0.0; 2]; nv];
        let with_coords = rows.iter().all(|r| r.2.is_some());
        for (id, m, xy) in rows {
            if id >= nv || !measures[id].is_nan() {
                return Err(Error::Parse(format!("vertex ids must be a permutation of 0..{nv}, saw {id}")));
            }
            measures[id] = m;
            if let Some(xy) = xy {
                coords[id] = xy;
            }
        }
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(edges)?;
        let mut list = Vec::new();
        for rec in rd.deserialize::<Edge>() {
            list.push(rec?);
        }
        Self::new(measures, list, with_coords.then_some(coords))
    }

    pub fn write_csv(&self, vertices: &Path, edges: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(vertices)?;
        match &self.coords {
            Some(c) => {
                w.write_record(["id", "measure", "x", "y"])?;
                for (i, (m, p)) in self.measures.iter().zip(c).enumerate() {
                    w.write_record([i.to_string(), fmt(*m), fmt(p[0]), fmt(p[1])])?;
                }
            }
            None => {
                w.write_record(["id", "measure"])?;
                for (i, m) in self.measures.iter().enumerate() {
                    w.write_record([i.to_string(), fmt(*m)])?;
                }
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(edges)?;
        for e in &self.edges {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

/// Vertex field from a CSV (id, value).
pub fn read_field_csv(path: &Path, len: usize) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut f = vec![f64::NAN; len];
    for rec in rd.deserialize::<(usize, f64)>() {
        let (id, v) = rec?;
        if id >= len {
            return Err(Error::Parse(format!("field id {id} out of range")));
        }
        f[id] = v;
    }
    if let Some(i) = f.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse(format!("field has no value for vertex {i}")));
    }
    Ok(f)
}

pub fn write_field_csv(path: &Path, f: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "value"])?;
    for (i, v) in f.iter().enumerate() {
        w.write_record([i.to_string(), fmt(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Square-lattice model of the cone of total angle 2πβ: β copies of the
/// disk of radius R cut along a ray of irrational slope and glued
/// cyclically, sharing the apex. Axis edges carry conductance 1; diagonal
/// edges (conductance 0) only shorten the path metric.
#[derive(Debug, Clone)]
pub struct ConeGraph {
    pub graph: MetricMeasureGraph,
    /// (r, θ) with θ ∈ [0, 2πβ).
    pub polar: Vec<(f64, f64)>,
    pub apex: usize,
    pub beta: usize,
    pub h: f64,
    pub radius: f64,
}

const CUT_ANGLE: f64 = 1.0;

pub fn cone_graph(beta: usize, h: f64, radius: f64) -> Result<ConeGraph> {
    if beta < 1 || !(h > 0.0) || !(radius > 2.0 * h) {
        return Err(Error::InvalidInput(format!(
            "cone graph needs beta >= 1 and radius > 2h, got beta={beta} h={h} R={radius}"
        )));
    }
    let m = (radius / h + 1e-9).floor() as i64;
    let width = (2 * m + 1) as usize;
    let r2max = (radius / h) * (radius / h) * (1.0 + 1e-12);
    let inside = |i: i64, j: i64| ((i * i + j * j) as f64) <= r2max;
    let mut base = vec![u32::MAX; width * width];
    let key = |i: i64, j: i64| ((i + m) as usize) * width + (j + m) as usize;
    let mut count = 0u32;
    let mut lattice = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            if (i, j) != (0, 0) && inside(i, j) {
                base[key(i, j)] = count;
                count += 1;
                lattice.push((i, j));
            }
        }
    }
    let nv = 1 + count as usize * beta;
    let id = |b: u32, s: usize| 1 + b as usize * beta + s;
    let phi = |i: i64, j: i64| ((j as f64).atan2(i as f64) - CUT_ANGLE).rem_euclid(2.0 * PI);

    let mut measures = vec![h * h; nv];
    measures[0] = beta as f64 * h * h;
    let mut polar = vec![(0.0, 0.0); nv];
    let mut coords = vec![[0.0; 2]; nv];
    for (b, &(i, j)) in lattice.iter().enumerate() {
        let r = h * ((i * i + j * j) as f64).sqrt();
        let p = phi(i, j);
        for s in 0..beta {
            let v = id(b as u32, s);
            let theta = p + 2.0 * PI * s as f64;
            polar[v] = (r, theta);
            coords[v] = [r * theta.cos(), r * theta.sin()];
        }
    }

    let offsets: [(i64, i64, f64, f64); 4] = [(1, 0, h, 1.0), (0, 1, h, 1.0), (1, 1, SQRT_2 * h, 0.0), (1, -1, SQRT_2 * h, 0.0)];
    let mut edges = Vec::with_capacity(nv * 4);
    let mut push = |a: usize, b: usize, length: f64, conductance: f64| {
        edges.push(Edge {
            u: a as u32,
            v: b as u32,
            length,
            conductance,
        })
    };
    let mut points = vec![(0i64, 0i64)];
    points.extend(lattice.iter().copied());
    for &(i, j) in &points {
        for &(di, dj, len, cond) in &offsets {
            let (qi, qj) = (i + di, j + dj);
            if !inside(qi, qj) {
                continue;
            }
            if (i, j) == (0, 0) || (qi, qj) == (0, 0) {
                let other = if (i, j) == (0, 0) { (qi, qj) } else { (i, j) };
                let b = base[key(other.0, other.1)];
                for s in 0..beta {
                    push(0, id(b, s), len, cond);
                }
                continue;
            }
            let (bp, bq) = (base[key(i, j)], base[key(qi, qj)]);
            let (fp, fq) = (phi(i, j), phi(qi, qj));
            let shift: i64 = if fp - fq > PI {
                1
            } else if fq - fp > PI {
                -1
            } else {
                0
            };
            for s in 0..beta {
                let t = (s as i64 + shift).rem_euclid(beta as i64) as usize;
                push(id(bp, s), id(bq, t), len, cond);
            }
        }
    }
    let graph = MetricMeasureGraph::new(measures, edges, Some(coords))?;
    Ok(ConeGraph {
        graph,
        polar,
        apex: 0,
        beta,
        h,
        radius,
    })
}

impl ConeGraph {
    /// Sample f(r, θ) at every vertex.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        crate::par::map_slice(&self.polar, |&(r, t)| f(r, t))
    }
}

/// Axis-aligned m×m square lattice with spacing h and diagonal metric edges.
pub fn square_grid(m: usize, h: f64) -> Result<MetricMeasureGraph> {
    if m < 2 || !(h > 0.0) {
        return Err(Error::InvalidInput("square grid needs m >= 2 and h > 0".into()));
    }
    let idx = |i: usize, j: usize| (i * m + j) as u32;
    let mut edges = Vec::new();
    let mut coords = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            coords.push([i as f64 * h, j as f64 * h]);
            if i + 1 < m {
                edges.push(Edge { u: idx(i, j), v: idx(i + 1, j), length: h, conductance: 1.0 });
            }
            if j + 1 < m {
                edges.push(Edge { u: idx(i, j), v: idx(i, j + 1), length: h, conductance: 1.0 });
            }
            if i + 1 < m && j + 1 < m {
                edges.push(Edge { u: idx(i, j), v: idx(i + 1, j + 1), length: SQRT_2 * h, conductance: 0.0 });
                edges.push(Edge { u: idx(i + 1, j), v: idx(i, j + 1), length: SQRT_2 * h, conductance: 0.0 });
            }
        }
    }
    MetricMeasureGraph::new(vec![h * h; m * m], edges, Some(coords))
}

/// Path 0 - 1 - … - (m-1) with spacing h and length measure.
pub fn path_graph(m: usize, h: f64) -> Result<MetricMeasureGraph> {
    if m < 2 || !(h > 0.0) {
        return Err(Error::InvalidInput("path graph needs m >= 2 and h > 0".into()));
    }
    let edges = (0..m - 1)
        .map(|i| Edge {
            u: i as u32,
            v: (i + 1) as u32,
            length: h,
            conductance: 1.0 / h,
        })
        .collect();
    let coords = (0..m).map(|i| [i as f64 * h, 0.0]).collect();
    MetricMeasureGraph::new(vec![h; m], edges, Some(coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_graph_measure_and_apex_distances() {
        for beta in [1usize, 2, 3] {
            let cg = cone_graph(beta, 0.02, 1.0).unwrap();
            let total = cg.graph.total_measure();
            let exact = beta as f64 * PI;
            assert!((total - exact).abs() / exact < 0.02, "beta={beta}: {total}");
            let d = cg.graph.distances_from(cg.apex, f64::INFINITY);
            for (v, &(r, _)) in cg.polar.iter().enumerate() {
                // Octagonal path metric: between r and (2 - √2)... ≤ 1.09 r.
                assert!(d[v] >= r - 1e-12 && d[v] <= 1.09 * r + 1e-12, "beta={beta} v={v}");
            }
        }
    }

    #[test]
    fn sheets_glue_continuously() {
        // cos(θ/2) on the doubled cone is continuous across the cut, so
        // every edge jump is O(h).
        let cg = cone_graph(2, 0.02, 1.0).unwrap();
        let f = cg.sample(|r, t| r.sqrt() * (0.5 * t).cos());
        let worst = cg
            .graph
            .edges()
            .iter()
            .map(|e| (f[e.u as usize] - f[e.v as usize]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.2, "{worst}");
        let g = cone_graph(2, 0.02, 1.0).unwrap();
        let f = g.sample(|_, t| if t < 2.0 * PI { 0.0 } else { 1.0 });
        let jumps = g.graph.edges().iter().filter(|e| (f[e.u as usize] - f[e.v as usize]).abs() > 0.5).count();
        assert!(jumps > 0);
    }

    #[test]
    fn path_metric_is_a_metric() {
        let g = square_grid(6, 0.5).unwrap();
        let all: Vec<Vec<f64>> = (0..g.len()).map(|s| g.distances_from(s, f64::INFINITY)).collect();
        for a in 0..g.len() {
            for b in 0..g.len() {
                assert_eq!(all[a][b], all[b][a]);
                for c in 0..g.len() {
                    assert!(all[a][c] <= all[a][b] + all[b][c] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = square_grid(4, 0.25).unwrap();
        let (vp, ep) = (dir.path().join("v.csv"), dir.path().join("e.csv"));
        g.write_csv(&vp, &ep).unwrap();
        let back = MetricMeasureGraph::from_csv(&vp, &ep).unwrap();
        assert_eq!(back.measures(), g.measures());
        assert_eq!(back.edges(), g.edges());
        let f: Vec<f64> = (0..g.len()).map(|i| i as f64 * 0.5).collect();
        let fp = dir.path().join("f.csv");
        write_field_csv(&fp, &f).unwrap();
        assert_eq!(read_field_csv(&fp, g.len()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(MetricMeasureGraph::new(vec![1.0, 0.0], vec![], None).is_err());
        let e = Edge { u: 0, v: 2, length: 1.0, conductance: 1.0 };
        assert!(MetricMeasureGraph::new(vec![1.0, 1.0], vec![e], None).is_err());
        assert!(cone_graph(0, 0.1, 1.0).is_err());
    }
}
