//! Small linear-algebra kernels: symmetric tridiagonal pencils (Sturm counts,
//! bisection, LDLᵀ solves) and a dense symmetric eigen wrapper.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVMIN: f64 = 1e-290;

/// Symmetric tridiagonal matrix stored as diagonal plus first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidInput(format!(
                "tridiagonal shape mismatch: diag {} off {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// x^T A y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// Pivots of the LDLᵀ factorization; fails on the first non-positive pivot.
    pub fn ldl_positive_pivots(&self) -> std::result::Result<Vec<f64>, (usize, f64)> {
        let n = self.len();
        let mut piv = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let d = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.off[i - 1] * self.off[i - 1] / prev
            };
            if !(d > 0.0) || !d.is_finite() {
                return Err((i, d));
            }
            piv.push(d);
            prev = d;
        }
        Ok(piv)
    }

    /// Solve A x = b with the Thomas algorithm (fixed elimination order).
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem { row: 0 });
        }
        if n > 1 {
            c[0] = self.off[0] / denom;
        }
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            if i + 1 < n {
                c[i] = self.off[i] / denom;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// Number of eigenvalues of the pencil (A, diag(mass)) strictly below `sigma`,
/// by Sylvester inertia of A - sigma M.
pub fn pencil_count_below(a: &SymTridiagonal, mass: &[f64], sigma: f64) -> usize {
    let mut count = 0;
    let mut q = 0.0;
    for i in 0..a.len() {
        let shifted = a.diag[i] - sigma * mass[i];
        q = if i == 0 {
            shifted
        } else {
            shifted - a.off[i - 1] * a.off[i - 1] / q
        };
        if q.abs() < PIVMIN {
            q = -PIVMIN;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of the symmetric-definite tridiagonal pencil
/// (A, diag(mass)), each bisected to relative width `rel_tol`.
pub fn pencil_lowest_eigenvalues(
    a: &SymTridiagonal,
    mass: &[f64],
    count: usize,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    if mass.len() != a.len() {
        return Err(Error::InvalidInput("mass length mismatch".into()));
    }
    for (index, &value) in mass.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::SingularMass { index, value });
        }
    }
    if count > a.len() {
        return Err(Error::TooManyModes {
            requested: count,
            available: a.len(),
        });
    }
    let mut lo = -1.0;
    while pencil_count_below(a, mass, lo) > 0 {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(Error::EigenNotConverged { residual: f64::INFINITY });
        }
    }
    let mut hi = 1.0;
    while pencil_count_below(a, mass, hi) < count {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::EigenNotConverged { residual: f64::INFINITY });
        }
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // k-th eigenvalue: smallest x with count_below(x) > k
        let mut l = out.last().copied().unwrap_or(lo).min(hi);
        if pencil_count_below(a, mass, l) > k {
            l = lo;
        }
        let mut h = hi;
        for _ in 0..400 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if (h - l) <= rel_tol * mid.abs().max(1e-300) {
                break;
            }
            if pencil_count_below(a, mass, mid) > k {
                h = mid;
            } else {
                l = mid;
            }
        }
        out.push(0.5 * (l + h));
    }
    Ok(out)
}

/// Eigen-decomposition of a dense symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-14, 10_000).ok_or_else(|| {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].powi(2))
            .sum::<f64>()
            .sqrt();
        Error::EigenNotConverged { residual: off }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn bisection_matches_closed_form_dirichlet_laplacian() {
        let n = 50;
        let a = laplacian(n);
        let ev = pencil_lowest_eigenvalues(&a, &vec![1.0; n], 5, 1e-15).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn bisection_agrees_with_dense_solver_on_weighted_pencil() {
        let n = 30;
        let a = SymTridiagonal::new(
            (0..n).map(|i| 3.0 + (i as f64).sin()).collect(),
            (0..n - 1).map(|i| -0.5 - 0.1 * (i as f64).cos()).collect(),
        )
        .unwrap();
        let mass: Vec<f64> = (0..n).map(|i| 0.5 + (i as f64) / n as f64).collect();
        let ev = pencil_lowest_eigenvalues(&a, &mass, n, 1e-15).unwrap();
        let mut dense = a.to_dense();
        for i in 0..n {
            for j in 0..n {
                dense[(i, j)] /= (mass[i] * mass[j]).sqrt();
            }
        }
        let (dv, _) = symmetric_eigen(&dense).unwrap();
        for (x, y) in ev.iter().zip(&dv) {
            assert!((x - y).abs() < 1e-11 * y.abs().max(1.0));
        }
    }

    #[test]
    fn thomas_solve_roundtrip_and_pivots() {
        let a = laplacian(20);
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos()).collect();
        let b = a.apply(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!(a.ldl_positive_pivots().is_ok());
        let indefinite = SymTridiagonal::new(vec![1.0, -1.0], vec![0.0]).unwrap();
        assert_eq!(indefinite.ldl_positive_pivots().unwrap_err().0, 1);
    }

    #[test]
    fn rejects_bad_mass_and_counts() {
        let a = laplacian(4);
        assert!(matches!(
            pencil_lowest_eigenvalues(&a, &[1.0, 0.0, 1.0, 1.0], 2, 1e-12),
            Err(Error::SingularMass { index: 1, .. })
        ));
        assert!(matches!(
            pencil_lowest_eigenvalues(&a, &[1.0; 4], 5, 1e-12),
            Err(Error::TooManyModes { .. })
        ));
    }
}
