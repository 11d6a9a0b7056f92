use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConeGrid;
use crate::error::{Error, Result};
use crate::links::LinkModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// values[i][j]: coefficient of link mode j at radial node i.
    Spectral,
    /// values[i][q]: value at radial node i and equispaced link point q.
    Nodal,
}

/// Exact separable component coeff·(r/ρ)^exponent·φ_mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerMode {
    pub mode: usize,
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub representation: Representation,
    pub values: Vec<Vec<f64>>,
    /// Present when the field is a finite sum of exact power modes.
    #[serde(default)]
    pub exact: Option<Vec<PowerMode>>,
}

/// Orthonormal Fourier basis on a circle of length L: 1/√L, then cos/sin
/// pairs √(2/L) cos(2πmθ/L), √(2/L) sin(2πmθ/L).
pub fn circle_basis(circumference: f64, mode: usize, theta: f64) -> f64 {
    if mode == 0 {
        return 1.0 / circumference.sqrt();
    }
    let m = mode.div_ceil(2) as f64;
    let arg = 2.0 * PI * m * theta / circumference;
    let s = (2.0 / circumference).sqrt();
    if mode % 2 == 1 {
        s * arg.cos()
    } else {
        s * arg.sin()
    }
}

fn circumference(grid: &ConeGrid) -> Result<f64> {
    match grid.link {
        LinkModel::Circle { circumference } => Ok(circumference),
        _ => Err(Error::InvalidInput("nodal representation is available for circle links only".into())),
    }
}

/// Model harmonic extension Σ c_j (r/ρ)^{ν_j} φ_j.
pub fn harmonic_extension_model(trace: &[f64], grid: &ConeGrid) -> Result<Field> {
    if trace.len() > grid.modes() {
        return Err(Error::TooManyModes {
            requested: trace.len(),
            available: grid.modes(),
        });
    }
    let exact: Vec<PowerMode> = trace
        .iter()
        .enumerate()
        .map(|(mode, &coeff)| PowerMode {
            mode,
            coeff,
            exponent: grid.nu(mode),
        })
        .collect();
    Ok(Field::from_power_modes(grid, exact))
}

impl Field {
    pub fn spectral(values: Vec<Vec<f64>>) -> Self {
        Self {
            representation: Representation::Spectral,
            values,
            exact: None,
        }
    }

    /// Sample exact power modes on the grid.
    pub fn from_power_modes(grid: &ConeGrid, modes: Vec<PowerMode>) -> Self {
        let values = grid
            .radii
            .iter()
            .map(|&r| {
                let mut row = vec![0.0; grid.modes()];
                for m in &modes {
                    row[m.mode] += m.coeff * (r / grid.rho).powf(m.exponent);
                }
                row
            })
            .collect();
        Self {
            representation: Representation::Spectral,
            values,
            exact: Some(modes),
        }
    }

    pub fn check_shape(&self, grid: &ConeGrid) -> Result<()> {
        if self.representation != Representation::Spectral {
            return Err(Error::InvalidInput("operation needs a spectral field".into()));
        }
        if self.values.len() != grid.radii.len() || self.values.iter().any(|row| row.len() != grid.modes()) {
            return Err(Error::InvalidInput(format!(
                "field shape does not match grid ({} radial nodes x {} modes)",
                grid.radii.len(),
                grid.modes()
            )));
        }
        Ok(())
    }

    /// Radial profile of one spectral mode.
    pub fn mode_column(&self, mode: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[mode]).collect()
    }

    /// Boundary row.
    pub fn trace(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Spectral to nodal on `points` equispaced circle points.
    pub fn to_nodal(&self, grid: &ConeGrid, points: usize) -> Result<Self> {
        self.check_shape(grid)?;
        let l = circumference(grid)?;
        let highest = (grid.modes() - 1).div_ceil(2);
        if points <= 2 * highest {
            return Err(Error::InvalidInput(format!(
                "{points} link points cannot resolve frequency {highest}"
            )));
        }
        let basis = basis_table(l, grid.modes(), points);
        let values = self
            .values
            .iter()
            .map(|row| {
                (0..points)
                    .map(|q| row.iter().zip(&basis[q]).map(|(c, b)| c * b).sum())
                    .collect()
            })
            .collect();
        Ok(Self {
            representation: Representation::Nodal,
            values,
            exact: self.exact.clone(),
        })
    }

    /// Nodal to spectral by trapezoidal projection onto the link eigenbasis.
    pub fn to_spectral(&self, grid: &ConeGrid) -> Result<Self> {
        if self.representation != Representation::Nodal {
            return Err(Error::InvalidInput("field is already spectral".into()));
        }
        let l = circumference(grid)?;
        let points = self.values.first().map_or(0, Vec::len);
        if points == 0 {
            return Err(Error::InvalidInput("empty nodal field".into()));
        }
        let basis = basis_table(l, grid.modes(), points);
        let w = l / points as f64;
        let values = self
            .values
            .iter()
            .map(|row| {
                (0..grid.modes())
                    .map(|j| w * row.iter().enumerate().map(|(q, v)| v * basis[q][j]).sum::<f64>())
                    .collect()
            })
            .collect();
        Ok(Self {
            representation: Representation::Spectral,
            values,
            exact: self.exact.clone(),
        })
    }

    /// Coefficient of link mode `mode` at radius r in [0, ρ].
    pub fn mode_value(&self, grid: &ConeGrid, mode: usize, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r <= grid.rho * (1.0 + 1e-12)) {
            return Err(Error::RadiusOutOfRange {
                radius: r,
                min: 0.0,
                max: grid.rho,
            });
        }
        if let Some(exact) = &self.exact {
            return Ok(exact
                .iter()
                .filter(|m| m.mode == mode)
                .map(|m| m.coeff * (r / grid.rho).powf(m.exponent))
                .sum());
        }
        let a = grid.cap_exponent(mode)?;
        let radii = &grid.radii;
        if r <= radii[0] {
            return Ok(self.values[0][mode] * (r / radii[0]).powf(a));
        }
        let i = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1) - 1;
        // Linear in ln r after factoring out the apex power.
        let (r0, r1) = (radii[i], radii[i + 1]);
        let w0 = self.values[i][mode] / r0.powf(a);
        let w1 = self.values[i + 1][mode] / r1.powf(a);
        let s = (r / r0).ln() / (r1 / r0).ln();
        Ok(((1.0 - s) * w0 + s * w1) * r.powf(a))
    }

    /// Point value at (r, θ) for circle links.
    pub fn evaluate(&self, grid: &ConeGrid, r: f64, theta: f64) -> Result<f64> {
        let l = circumference(grid)?;
        let mut acc = 0.0;
        for j in 0..grid.modes() {
            acc += self.mode_value(grid, j, r)? * circle_basis(l, j, theta);
        }
        Ok(acc)
    }

    /// CSV rows (r, mode, value), or (r, point, value) for nodal fields.
    pub fn write_csv(&self, grid: &ConeGrid, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let col = match self.representation {
            Representation::Spectral => "mode",
            Representation::Nodal => "point",
        };
        w.write_record(["r", col, "value"])?;
        for (r, row) in grid.radii.iter().zip(&self.values) {
            for (j, v) in row.iter().enumerate() {
                w.write_record([format!("{r:.17e}"), j.to_string(), format!("{v:.17e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn basis_table(l: f64, modes: usize, points: usize) -> Vec<Vec<f64>> {
    (0..points)
        .map(|q| {
            let theta = l * q as f64 / points as f64;
            (0..modes).map(|j| circle_basis(l, j, theta)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeConfig;

    fn grid(l: f64) -> ConeGrid {
        let mut cfg = ConeConfig::new(LinkModel::circle(l), 2, 1.0);
        cfg.radial_nodes = 64;
        cfg.modes = 9;
        cfg.build().unwrap()
    }

    #[test]
    fn harmonic_extension_examples() {
        let g = grid(2.0 * PI);
        let c = harmonic_extension_model(&[1.0], &g).unwrap();
        assert!(c.values.iter().all(|row| row[0] == 1.0));
        let lin = harmonic_extension_model(&[0.0, 1.0], &g).unwrap();
        let v = lin.evaluate(&g, 0.3, 0.0).unwrap();
        assert!((v - 0.3 / PI.sqrt()).abs() < 1e-14);

        let g = grid(4.0 * PI);
        let f = harmonic_extension_model(&[0.0, 1.0], &g).unwrap();
        assert!((f.mode_value(&g, 1, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(harmonic_extension_model(&[1.0; 10], &g).is_err());
    }

    #[test]
    fn nodal_round_trip() {
        let g = grid(4.0 * PI);
        let values: Vec<Vec<f64>> = (0..g.radii.len())
            .map(|i| (0..g.modes()).map(|j| ((i * 7 + j * 3) % 11) as f64 - 5.0).collect())
            .collect();
        let f = Field::spectral(values);
        let back = f.to_nodal(&g, 24).unwrap().to_spectral(&g).unwrap();
        for (a, b) in f.values.iter().flatten().zip(back.values.iter().flatten()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(f.to_nodal(&g, 8).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_apex_powers() {
        let g = grid(4.0 * PI);
        let exact = harmonic_extension_model(&[0.3, 1.0, 0.0, 2.0], &g).unwrap();
        let sampled = Field::spectral(exact.values.clone());
        for r in [1e-5, 3e-3, 0.0123, 0.5, 0.999] {
            for j in [0usize, 1, 3] {
                let a = exact.mode_value(&g, j, r).unwrap();
                let b = sampled.mode_value(&g, j, r).unwrap();
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "r={r} j={j}");
            }
        }
    }
}
