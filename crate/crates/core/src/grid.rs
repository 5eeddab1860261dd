//! Uniform finite-volume meshes with a two-cell ghost frame.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Ghost depth on every side; the second-order stencil reaches `i ± 2`.
pub const GHOST: usize = 2;

/// Uniform 1D mesh of `cells` finite volumes on `[x_left, x_right]`.
///
/// Storage uses padded indices `k = 0 .. cells + 4`; interior cell `i`
/// (0-based) lives at `k = i + GHOST`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_left: f64,
    pub x_right: f64,
    pub cells: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, cells: usize) -> Result<Self> {
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "grid requires x_right > x_left, got [{x_left}, {x_right}]"
            )));
        }
        if cells < 4 {
            return Err(SolverError::InvalidParameter(format!(
                "grid requires at least 4 cells, got {cells}"
            )));
        }
        Ok(Self {
            x_left,
            x_right,
            cells,
            h: (x_right - x_left) / cells as f64,
        })
    }

    /// Number of stored values including ghosts.
    #[inline]
    pub fn padded_len(&self) -> usize {
        self.cells + 2 * GHOST
    }

    /// Center of the padded cell `k` (ghosts included).
    #[inline]
    pub fn center(&self, k: usize) -> f64 {
        self.x_left + (k as f64 - GHOST as f64 + 0.5) * self.h
    }

    /// Left and right edge of the padded cell `k`.
    #[inline]
    pub fn cell_bounds(&self, k: usize) -> (f64, f64) {
        let lo = self.x_left + (k as f64 - GHOST as f64) * self.h;
        (lo, lo + self.h)
    }

    /// Position of interior edge `e = 0 ..= cells` (`e = 0` is `x_left`).
    #[inline]
    pub fn edge(&self, e: usize) -> f64 {
        self.x_left + e as f64 * self.h
    }

    /// Padded indices of the interior cells.
    pub fn interior(&self) -> std::ops::Range<usize> {
        GHOST..GHOST + self.cells
    }
}

/// Uniform square 2D mesh with `cells × cells` volumes on `[x_left, x_right]²`.
///
/// Values are stored row-major by `y` then `x` over the padded
/// `(cells + 4)²` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_left: f64,
    pub x_right: f64,
    pub cells: usize,
    pub h: f64,
}

impl Grid2D {
    pub fn new(x_left: f64, x_right: f64, cells: usize) -> Result<Self> {
        let g = Grid1D::new(x_left, x_right, cells)?;
        Ok(Self {
            x_left,
            x_right,
            cells,
            h: g.h,
        })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.cells + 2 * GHOST
    }

    #[inline]
    pub fn padded_len(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn idx(&self, kx: usize, ky: usize) -> usize {
        ky * self.side() + kx
    }

    #[inline]
    pub fn center(&self, k: usize) -> f64 {
        self.x_left + (k as f64 - GHOST as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn edge(&self, e: usize) -> f64 {
        self.x_left + e as f64 * self.h
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        GHOST..GHOST + self.cells
    }

    /// The 1D mesh along either axis.
    pub fn axis(&self) -> Grid1D {
        Grid1D {
            x_left: self.x_left,
            x_right: self.x_right,
            cells: self.cells,
            h: self.h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let g = Grid1D::new(0.0, 5.0, 320).unwrap();
        assert_eq!(g.h, 5.0 / 320.0);
        assert_eq!(g.padded_len(), 324);
        assert!((g.center(GHOST) - 0.5 * g.h).abs() < 1e-15);
        assert_eq!(g.edge(320), 5.0);
        assert_eq!(g.cell_bounds(GHOST).0, 0.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 3).is_err());
        assert!(Grid2D::new(0.0, -1.0, 10).is_err());
    }
}
