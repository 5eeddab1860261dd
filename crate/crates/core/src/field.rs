//! Cell-averaged solution arrays.

use crate::error::{Result, SolverError};
use crate::grid::{Grid1D, Grid2D};
use crate::isotherm::IsothermSpec;

/// Values below zero but above this are treated as round-off and clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

/// Cell averages `U` and the paired `Q = F(U)`, ghosts included.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub u: Vec<f64>,
    pub q: Vec<f64>,
}

impl Field {
    /// Builds a field from padded `u` values, filling `q = F(u)`.
    pub fn from_u(u: Vec<f64>, iso: &IsothermSpec) -> Self {
        let q = u.iter().map(|&v| iso.f_ext(v)).collect();
        Self { u, q }
    }

    /// Samples `init` at 1D cell centers (ghosts included).
    pub fn sample_1d(grid: &Grid1D, iso: &IsothermSpec, init: impl Fn(f64) -> f64) -> Self {
        let u = (0..grid.padded_len()).map(|k| init(grid.center(k))).collect();
        Self::from_u(u, iso)
    }

    /// Cell averages of `init` over each 1D cell (ghosts included).
    pub fn average_1d(grid: &Grid1D, iso: &IsothermSpec, init: impl Fn(f64) -> f64) -> Self {
        let u = (0..grid.padded_len())
            .map(|k| {
                let (a, b) = grid.cell_bounds(k);
                crate::quadrature::gauss_legendre(&init, a, b)
            })
            .collect();
        Self::from_u(u, iso)
    }

    /// Samples `init` at 2D cell centers (ghosts included).
    pub fn sample_2d(grid: &Grid2D, iso: &IsothermSpec, init: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.side();
        let mut u = Vec::with_capacity(grid.padded_len());
        for ky in 0..n {
            for kx in 0..n {
                u.push(init(grid.center(kx), grid.center(ky)));
            }
        }
        Self::from_u(u, iso)
    }

    pub fn constant(len: usize, value: f64, iso: &IsothermSpec) -> Self {
        Self::from_u(vec![value; len], iso)
    }

    /// Interior `u` values of a 1D field.
    pub fn interior_1d<'a>(&'a self, grid: &Grid1D) -> &'a [f64] {
        &self.u[grid.interior()]
    }

    /// Interior `u` values of a 2D field, row-major by `y` then `x`.
    pub fn interior_2d(&self, grid: &Grid2D) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.cells * grid.cells);
        for ky in grid.interior() {
            for kx in grid.interior() {
                out.push(self.u[grid.idx(kx, ky)]);
            }
        }
        out
    }

    /// Sum of `h·Q` over interior 1D cells.
    pub fn mass_1d(&self, grid: &Grid1D) -> f64 {
        grid.h * self.q[grid.interior()].iter().sum::<f64>()
    }

    /// Sum of `h²·Q` over interior 2D cells.
    pub fn mass_2d(&self, grid: &Grid2D) -> f64 {
        let mut s = 0.0;
        for ky in grid.interior() {
            for kx in grid.interior() {
                s += self.q[grid.idx(kx, ky)];
            }
        }
        grid.h * grid.h * s
    }
}

/// Outcome of [`clamp_roundoff`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClampReport {
    pub clamped: usize,
    /// Change of `ΣQ` caused by clamping.
    pub q_adjustment: f64,
    /// Number of values below `-CLAMP_TOLERANCE` (left untouched).
    pub violations: usize,
    pub min_value: f64,
}

/// Clamps `-CLAMP_TOLERANCE < u < 0` to zero over the given indices and
/// counts values below that as range violations.
pub fn clamp_roundoff(
    field: &mut Field,
    indices: impl Iterator<Item = usize>,
    iso: &IsothermSpec,
) -> ClampReport {
    let mut rep = ClampReport {
        min_value: f64::INFINITY,
        ..Default::default()
    };
    for k in indices {
        let u = field.u[k];
        rep.min_value = rep.min_value.min(u);
        if u < 0.0 {
            if u > -CLAMP_TOLERANCE {
                let q_new = iso.f_ext(0.0);
                rep.q_adjustment += q_new - field.q[k];
                field.u[k] = 0.0;
                field.q[k] = q_new;
                rep.clamped += 1;
            } else {
                rep.violations += 1;
            }
        }
    }
    rep
}

/// Ensures two fields share a layout.
pub fn check_same_len(a: &Field, b: &Field) -> Result<()> {
    if a.u.len() != b.u.len() {
        return Err(SolverError::GridMismatch(format!(
            "field lengths differ: {} vs {}",
            a.u.len(),
            b.u.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_policy() {
        let iso = IsothermSpec::freundlich(0.5).unwrap();
        let mut f = Field::from_u(vec![0.3, -1e-12, -1e-3, 0.0], &iso);
        let rep = clamp_roundoff(&mut f, 0..4, &iso);
        assert_eq!(rep.clamped, 1);
        assert_eq!(rep.violations, 1);
        assert_eq!(f.u[1], 0.0);
        assert_eq!(f.u[2], -1e-3);
        assert!((rep.q_adjustment - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn q_pairs_with_u() {
        let iso = IsothermSpec::freundlich(3.0).unwrap();
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        let f = Field::sample_1d(&g, &iso, |_| 0.5);
        assert!(f.q.iter().all(|&q| (q - 0.625).abs() < 1e-15));
    }
}
