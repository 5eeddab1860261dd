//! Ghost-cell policies.

use std::fmt;
use std::sync::Arc;

use crate::field::Field;
use crate::grid::{Grid1D, Grid2D, GHOST};
use crate::isotherm::IsothermSpec;

/// Cell average of a prescribed solution over `[x_lo, x_hi]` at time `t`.
pub type GhostFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    /// Constant value replicated into both ghost cells.
    Dirichlet(f64),
    /// Copy of the adjacent interior cell.
    Outflow,
    /// Ghost cells filled from a known solution.
    Function(GhostFn),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirichlet(v) => write!(f, "Dirichlet({v})"),
            Self::Outflow => write!(f, "Outflow"),
            Self::Function(_) => write!(f, "Function"),
        }
    }
}

impl Boundary {
    pub fn is_outflow(&self) -> bool {
        matches!(self, Self::Outflow)
    }
}

/// Fills the four 1D ghost cells of `u` for time `t`.
pub fn fill_ghosts_1d(u: &mut [f64], grid: &Grid1D, left: &Boundary, right: &Boundary, t: f64) {
    let first = GHOST;
    let last = GHOST + grid.cells - 1;
    for k in 0..GHOST {
        u[k] = ghost_value(left, grid, k, u[first], t);
    }
    for k in last + 1..grid.padded_len() {
        u[k] = ghost_value(right, grid, k, u[last], t);
    }
}

fn ghost_value(bc: &Boundary, grid: &Grid1D, k: usize, adjacent: f64, t: f64) -> f64 {
    match bc {
        Boundary::Dirichlet(v) => *v,
        Boundary::Outflow => adjacent,
        Boundary::Function(f) => {
            let (a, b) = grid.cell_bounds(k);
            f(a, b, t)
        }
    }
}

/// Refreshes `q = F(u)` on the 1D ghost cells.
pub fn sync_ghost_q_1d(field: &mut Field, grid: &Grid1D, iso: &IsothermSpec) {
    let n = grid.padded_len();
    for k in (0..GHOST).chain(n - GHOST..n) {
        field.q[k] = iso.f_ext(field.u[k]);
    }
}

/// Dirichlet or outflow values for the four sides of a square mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary2D {
    Dirichlet(f64),
    Outflow,
}

/// Sides in the order left, right, bottom, top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundaries2D {
    pub left: Boundary2D,
    pub right: Boundary2D,
    pub bottom: Boundary2D,
    pub top: Boundary2D,
}

impl Boundaries2D {
    pub fn zero() -> Self {
        let z = Boundary2D::Dirichlet(0.0);
        Self {
            left: z,
            right: z,
            bottom: z,
            top: z,
        }
    }

    pub fn has_outflow(&self) -> bool {
        [self.left, self.right, self.bottom, self.top]
            .iter()
            .any(|b| matches!(b, Boundary2D::Outflow))
    }
}

/// Fills the ghost frame of a padded 2D array.
pub fn fill_ghosts_2d(u: &mut [f64], grid: &Grid2D, bc: &Boundaries2D) {
    let m = grid.cells;
    let first = GHOST;
    let last = GHOST + m - 1;
    for ky in grid.interior() {
        for g in 0..GHOST {
            u[grid.idx(g, ky)] = side_value(bc.left, u[grid.idx(first, ky)]);
            u[grid.idx(last + 1 + g, ky)] = side_value(bc.right, u[grid.idx(last, ky)]);
        }
    }
    for kx in grid.interior() {
        for g in 0..GHOST {
            u[grid.idx(kx, g)] = side_value(bc.bottom, u[grid.idx(kx, first)]);
            u[grid.idx(kx, last + 1 + g)] = side_value(bc.top, u[grid.idx(kx, last)]);
        }
    }
}

#[inline]
fn side_value(bc: Boundary2D, adjacent: f64) -> f64 {
    match bc {
        Boundary2D::Dirichlet(v) => v,
        Boundary2D::Outflow => adjacent,
    }
}
