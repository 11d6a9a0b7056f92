use serde::{Deserialize, Serialize};

use super::{ConeGrid, Field};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SymTridiagonal};
use crate::links::Spectrum;
use crate::par;

const RESIDUAL_TOL: f64 = 1e-10;

/// Model DtN eigenvalues ν_j/ρ in mode order.
pub fn dtn_model_spectrum(spectrum: &Spectrum, rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    Ok(spectrum.nus.iter().map(|nu| nu / rho).collect())
}

/// Interior block (nodes 0..N-1) of a per-mode form.
fn interior(op: &SymTridiagonal) -> SymTridiagonal {
    let n = op.len() - 1;
    SymTridiagonal {
        diag: op.diag[..n].to_vec(),
        off: op.off[..n - 1].to_vec(),
    }
}

/// Minimizer of the mode form with boundary value `trace` at node N.
fn solve_mode(grid: &ConeGrid, mode: usize, trace: f64) -> Result<Vec<f64>> {
    let op = grid.operator(mode);
    let inner = interior(op);
    if let Err((_, pivot)) = inner.ldl_positive_pivots() {
        return Err(Error::CoercivityFailure { mode, pivot });
    }
    let n = inner.len();
    let mut u = vec![0.0; n + 1];
    u[n] = trace;
    if trace == 0.0 {
        return Ok(u);
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = -op.off[n - 1] * trace;
    let x = inner.solve(&rhs)?;
    let ax = inner.apply(&x);
    let num: f64 = ax.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let residual = num / den;
    if residual > RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge { residual });
    }
    u[..n].copy_from_slice(&x);
    Ok(u)
}

/// Discrete solution of (Δ_g + V)u = 0 with the given trace coefficients.
pub fn solve_schrodinger(grid: &ConeGrid, trace: &[f64]) -> Result<Field> {
    if trace.len() > grid.modes() {
        return Err(Error::TooManyModes {
            requested: trace.len(),
            available: grid.modes(),
        });
    }
    let cols = par::try_map_range(grid.modes(), |j| solve_mode(grid, j, trace.get(j).copied().unwrap_or(0.0)))?;
    let values = (0..grid.radii.len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect();
    Ok(Field::spectral(values))
}

/// Full quadratic form Q(u, v) = Σ_j u_jᵀ K_j v_j.
pub fn bilinear_form(grid: &ConeGrid, u: &Field, v: &Field) -> f64 {
    (0..grid.modes())
        .map(|j| grid.operator(j).bilinear(&u.mode_column(j), &v.mode_column(j)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnReport {
    /// B(v_i, v_j) for the L²(dσ_g)-normalized trace basis.
    pub matrix: Vec<Vec<f64>>,
    /// Ascending eigenvalues μ_0 ≤ μ_1 ≤ ….
    pub eigenvalues: Vec<f64>,
    /// Ascending model values ν_j/ρ.
    pub model: Vec<f64>,
    /// ‖N - Nᵀ‖ / ‖N‖ (Frobenius).
    pub symmetry_defect: f64,
}

/// DtN matrix of the discrete form on the first `grid.modes()` trace modes.
pub fn dtn_perturbed(grid: &ConeGrid) -> Result<DtnReport> {
    let m = grid.modes();
    let scale = 1.0 / grid.boundary_measure().sqrt();
    let ext = par::try_map_range(m, |j| {
        let mut trace = vec![0.0; j + 1];
        trace[j] = scale;
        solve_schrodinger(grid, &trace)
    })?;
    // Mode columns per extension; identically zero columns add nothing to the form.
    let cols: Vec<Vec<Option<Vec<f64>>>> = par::map_slice(&ext, |u| {
        (0..m)
            .map(|k| Some(u.mode_column(k)).filter(|c| c.iter().any(|&x| x != 0.0)))
            .collect()
    });
    let matrix: Vec<Vec<f64>> = par::map_range(m, |i| {
        (0..m)
            .map(|j| {
                (0..m)
                    .filter_map(|k| match (&cols[i][k], &cols[j][k]) {
                        (Some(a), Some(b)) => Some(grid.operator(k).bilinear(a, b)),
                        _ => None,
                    })
                    .sum()
            })
            .collect()
    });
    let dense = nalgebra::DMatrix::from_fn(m, m, |i, j| matrix[i][j]);
    let norm = dense.norm();
    let symmetry_defect = if norm > 0.0 { (&dense - dense.transpose()).norm() / norm } else { 0.0 };
    let sym = (&dense + dense.transpose()) * 0.5;
    let (eigenvalues, _) = symmetric_eigen(&sym)?;
    let mut model = dtn_model_spectrum(&grid.spectrum, grid.rho)?;
    model.sort_by(f64::total_cmp);
    Ok(DtnReport {
        matrix,
        eigenvalues,
        model,
        symmetry_defect,
    })
}
