//! Weighted Sturm–Liouville operators on (0, π/2):
//!
//!   L f = -f'' - ((k-1) cot ψ - (n-k-1) tan ψ) f' + μ/cos²ψ f + λ/sin²ψ f,
//!
//! self-adjoint in L²(sin^{k-1}ψ cos^{n-k-1}ψ dψ). Discretized by cell-centred
//! finite volumes on a grid that is uniform in t ∈ (0,1) with
//! ψ = π/2 - (π/2)(1-t)^q; q > 1 grades toward π/2 when the endpoint
//! behaviour cos^γ ψ has γ < 1.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pencil_lowest_eigenvalues, SymTridiagonal};

pub const MIN_NODES: usize = 8;
const MAX_GRADING: u32 = 8;
const EIGEN_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleGrid {
    pub nodes: usize,
    /// Sphere factor dimension plus one: weight sin^{k-1}ψ.
    pub k: usize,
    /// Ambient cone dimension: weight cos^{n-k-1}ψ.
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    /// Odd S⁰ mode of a k = 1 suspension: f(0) = 0 instead of no flux.
    #[serde(default)]
    pub dirichlet_at_pole: bool,
}

/// Assembled pencil: stiffness plus potential against the diagonal mass.
#[derive(Debug, Clone)]
pub struct SturmLiouvilleSystem {
    pub psi: Vec<f64>,
    pub stiffness: SymTridiagonal,
    pub mass: Vec<f64>,
}

impl SturmLiouvilleGrid {
    pub fn new(nodes: usize, k: usize, n: usize, mu: f64, lambda: f64) -> Result<Self> {
        let grid = Self {
            nodes,
            k,
            n,
            mu,
            lambda,
            dirichlet_at_pole: false,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_dirichlet_at_pole(mut self, on: bool) -> Self {
        self.dirichlet_at_pole = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "Sturm-Liouville grid needs at least {MIN_NODES} nodes, got {}",
                self.nodes
            )));
        }
        if self.k < 1 || self.n < self.k + 1 {
            return Err(Error::InvalidInput(format!(
                "weight exponents need 1 <= k <= n-1, got k={} n={}",
                self.k, self.n
            )));
        }
        if !(self.mu >= 0.0 && self.lambda >= 0.0) || !self.mu.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "potential parameters must be finite and >= 0, got mu={} lambda={}",
                self.mu, self.lambda
            )));
        }
        if self.dirichlet_at_pole && self.k != 1 {
            return Err(Error::InvalidInput("dirichlet_at_pole only applies to k = 1".into()));
        }
        Ok(())
    }

    fn sin_exp(&self) -> i32 {
        self.k as i32 - 1
    }

    fn cos_exp(&self) -> i32 {
        (self.n - self.k - 1) as i32
    }

    /// Growth exponent γ of cos^γ ψ at ψ = π/2: γ(γ + b - 1) = μ.
    pub fn equator_exponent(&self) -> f64 {
        let b1 = self.cos_exp() as f64 - 1.0;
        0.5 * (-b1 + (b1 * b1 + 4.0 * self.mu).sqrt())
    }

    /// Grading power q used for the map toward π/2.
    pub fn grading(&self) -> u32 {
        let g = self.equator_exponent();
        if g <= 0.0 || g >= 1.0 {
            1
        } else {
            ((1.0 / g - 1e-9).ceil() as u32).clamp(1, MAX_GRADING)
        }
    }

    /// Cell-centre ψ nodes, strictly increasing in (0, π/2).
    pub fn psi_nodes(&self) -> Vec<f64> {
        let q = self.grading();
        let h = 1.0 / self.nodes as f64;
        (0..self.nodes)
            .map(|i| FRAC_PI_2 - comp(((i as f64) + 0.5) * h, q))
            .collect()
    }

    pub fn assemble(&self) -> Result<SturmLiouvilleSystem> {
        self.validate()?;
        let q = self.grading();
        let nn = self.nodes;
        let h = 1.0 / nn as f64;
        let (a, b) = (self.sin_exp(), self.cos_exp());
        // Weight written through the complementary angle so cos ψ keeps full
        // relative precision next to π/2.
        let weight = |t: f64| {
            let c = comp(t, q);
            (FRAC_PI_2 - c).sin().powi(a) * c.sin().powi(b)
        };
        let face = |t: f64| weight(t) / dpsi(t, q);

        let mut psi = Vec::with_capacity(nn);
        let mut mass = Vec::with_capacity(nn);
        let mut diag = vec![0.0; nn];
        for i in 0..nn {
            let t = (i as f64 + 0.5) * h;
            let c = comp(t, q);
            let p = FRAC_PI_2 - c;
            let m = weight(t) * dpsi(t, q) * h;
            psi.push(p);
            mass.push(m);
            let sp = p.sin();
            let sc = c.sin();
            diag[i] += (self.mu / (sc * sc) + self.lambda / (sp * sp)) * m;
        }
        let mut off = Vec::with_capacity(nn - 1);
        for f in 1..nn {
            let c = face(f as f64 * h) / h;
            diag[f - 1] += c;
            diag[f] += c;
            off.push(-c);
        }
        if self.dirichlet_at_pole {
            diag[0] += 2.0 * face(0.0) / h;
        }
        if self.lambda > 0.0 {
            let m0 = self.pole_exponent();
            if psi[0] * (1.0 + m0) > 0.5 {
                return Err(Error::UnderResolvedPole {
                    first_node: psi[0],
                    lambda: self.lambda,
                });
            }
        }
        Ok(SturmLiouvilleSystem {
            psi,
            stiffness: SymTridiagonal::new(diag, off)?,
            mass,
        })
    }

    /// Growth exponent m of sin^m ψ at the pole: m(m + a - 1) = λ.
    fn pole_exponent(&self) -> f64 {
        let a1 = self.sin_exp() as f64 - 1.0;
        0.5 * (-a1 + (a1 * a1 + 4.0 * self.lambda).sqrt())
    }
}

fn comp(t: f64, q: u32) -> f64 {
    FRAC_PI_2 * (1.0 - t).powi(q as i32)
}

fn dpsi(t: f64, q: u32) -> f64 {
    FRAC_PI_2 * q as f64 * (1.0 - t).powi(q as i32 - 1)
}

/// Lowest `count` eigenvalues of the discretized L_{μ,λ}.
pub fn suspension_operator_spectrum(grid: &SturmLiouvilleGrid, count: usize) -> Result<Vec<f64>> {
    let sys = grid.assemble()?;
    pencil_lowest_eigenvalues(&sys.stiffness, &sys.mass, count, EIGEN_REL_TOL)
}

/// All eigenvalues of the discretized L_{μ,λ} strictly below `ceiling`.
pub fn suspension_operator_spectrum_below(grid: &SturmLiouvilleGrid, ceiling: f64) -> Result<Vec<f64>> {
    let sys = grid.assemble()?;
    let count = crate::linalg::pencil_count_below(&sys.stiffness, &sys.mass, ceiling);
    pencil_lowest_eigenvalues(&sys.stiffness, &sys.mass, count, EIGEN_REL_TOL)
}

/// Exact spectrum of L_{μ,λ} for λ = m(m+k-2): (2j+m+γ)(2j+m+γ+n-2), j ≥ 0.
pub fn closed_form_eigenvalue(k: usize, n: usize, mu: f64, degree: usize, j: usize) -> f64 {
    let b1 = (n - k - 1) as f64 - 1.0;
    let gamma = 0.5 * (-b1 + (b1 * b1 + 4.0 * mu).sqrt());
    let s = 2.0 * j as f64 + degree as f64 + gamma;
    s * (s + n as f64 - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lowest(nodes: usize, k: usize, n: usize, mu: f64, lambda: f64, dir: bool, count: usize) -> Vec<f64> {
        let g = SturmLiouvilleGrid::new(nodes, k, n, mu, lambda)
            .unwrap()
            .with_dirichlet_at_pole(dir);
        suspension_operator_spectrum(&g, count).unwrap()
    }

    #[test]
    fn assembly_is_symmetric_with_positive_mass() {
        let g = SturmLiouvilleGrid::new(50, 2, 5, 0.3, 2.0).unwrap();
        let sys = g.assemble().unwrap();
        let dense = sys.stiffness.to_dense();
        assert_eq!(dense, dense.transpose());
        assert!(sys.mass.iter().all(|&m| m > 0.0));
        assert!(sys.psi.windows(2).all(|w| w[0] < w[1]));
        assert!(sys.psi[0] > 0.0 && *sys.psi.last().unwrap() < FRAC_PI_2);
    }

    #[test]
    fn constant_mode_is_exactly_null() {
        let ev = lowest(64, 2, 4, 0.0, 0.0, false, 1);
        assert!(ev[0].abs() < 1e-12);
    }

    #[test]
    fn quoted_eigenfunctions_converge_at_second_order() {
        // (k, n, μ, λ, dirichlet, index, exact)
        let cases = [
            (1usize, 3usize, 0.0, 0.0, false, 1usize, 6.0),
            (1, 3, 0.0, 0.0, true, 0, 2.0),
            (1, 3, 0.25, 0.0, false, 0, 0.75),
            (2, 4, 0.0, 1.0, false, 0, 3.0),
            (2, 5, 0.0, 0.0, false, 1, 10.0),
        ];
        for &(k, n, mu, lambda, dir, idx, exact) in &cases {
            let e1 = (lowest(200, k, n, mu, lambda, dir, idx + 1)[idx] - exact).abs();
            let e2 = (lowest(400, k, n, mu, lambda, dir, idx + 1)[idx] - exact).abs();
            assert!(e2 < 5e-4, "k={k} n={n} mu={mu}: {e2}");
            assert!(e1 / e2 > 3.5, "k={k} n={n} mu={mu}: ratio {}", e1 / e2);
        }
    }

    #[test]
    fn full_discrete_spectrum_tracks_jacobi_formula() {
        let mu = 0.1875; // γ = 0.25 for b = 1
        let ev = lowest(800, 2, 4, mu, 0.0, false, 4);
        for (j, &v) in ev.iter().enumerate() {
            let exact = closed_form_eigenvalue(2, 4, mu, 0, j);
            assert!((v - exact).abs() / exact < 2e-4, "j={j}: {v} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SturmLiouvilleGrid::new(4, 1, 3, 0.0, 0.0).is_err());
        assert!(SturmLiouvilleGrid::new(40, 0, 3, 0.0, 0.0).is_err());
        assert!(SturmLiouvilleGrid::new(40, 1, 3, -1.0, 0.0).is_err());
        let coarse = SturmLiouvilleGrid::new(8, 3, 6, 0.0, 30.0).unwrap();
        assert!(matches!(coarse.assemble(), Err(Error::UnderResolvedPole { .. })));
    }
}
