//! Velocity fields evaluated on cell edges and split by sign.

use std::fmt;
use std::sync::Arc;

use crate::grid::{Grid1D, Grid2D};

/// User-supplied 2D velocity `(x, y) -> (v, w)`.
pub type VelocityFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum VelocityField {
    /// Constant `(v, w)`; 1D uses `v` only.
    Constant { v: f64, w: f64 },
    /// `v(x) = cos(x)`.
    Cosine,
    /// Solid-body rotation `(−2πy, 2πx)`.
    Rotation2D,
    /// Piecewise-linear interpolation of tabulated `(x, v)` pairs, 1D only.
    /// Values outside the table are held constant.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
    Custom(VelocityFn),
}

impl fmt::Debug for VelocityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { v, w } => write!(f, "Constant({v}, {w})"),
            Self::Cosine => write!(f, "Cosine"),
            Self::Rotation2D => write!(f, "Rotation2D"),
            Self::Tabulated { x, .. } => write!(f, "Tabulated({} points)", x.len()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `(v⁺, v⁻) = (max(0, v), min(0, v))`.
#[inline]
pub fn split(v: f64) -> (f64, f64) {
    (v.max(0.0), v.min(0.0))
}

impl VelocityField {
    pub fn constant(v: f64) -> Self {
        Self::Constant { v, w: 0.0 }
    }

    /// 1D velocity at `x`.
    pub fn eval_1d(&self, x: f64) -> f64 {
        match self {
            Self::Constant { v, .. } => *v,
            Self::Cosine => x.cos(),
            Self::Rotation2D => 0.0,
            Self::Tabulated { x: xs, v: vs } => interpolate(xs, vs, x),
            Self::Custom(f) => f(x, 0.0).0,
        }
    }

    /// 2D velocity `(v, w)` at `(x, y)`.
    pub fn eval_2d(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            Self::Constant { v, w } => (*v, *w),
            Self::Cosine => (x.cos(), 0.0),
            Self::Rotation2D => {
                let two_pi = 2.0 * std::f64::consts::PI;
                (-two_pi * y, two_pi * x)
            }
            Self::Tabulated { x: xs, v: vs } => (interpolate(xs, vs, x), 0.0),
            Self::Custom(f) => f(x, y),
        }
    }
}

fn interpolate(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => vs[0],
        _ => {
            if x <= xs[0] {
                return vs[0];
            }
            let last = xs.len() - 1;
            if x >= xs[last] {
                return vs[last];
            }
            let j = xs.partition_point(|&t| t <= x).max(1);
            let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            vs[j - 1] + t * (vs[j] - vs[j - 1])
        }
    }
}

/// Split edge velocities of a 1D mesh; entry `e` is the edge at `x_left + e·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVelocity1D {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl EdgeVelocity1D {
    pub fn new(grid: &Grid1D, vel: &VelocityField) -> Self {
        let (plus, minus) = (0..=grid.cells)
            .map(|e| split(vel.eval_1d(grid.edge(e))))
            .unzip();
        Self { plus, minus }
    }

    pub fn all_nonnegative(&self) -> bool {
        self.minus.iter().all(|&m| m == 0.0)
    }

    pub fn all_nonpositive(&self) -> bool {
        self.plus.iter().all(|&p| p == 0.0)
    }

    /// Full edge velocity `v⁺ + v⁻`.
    pub fn value(&self, e: usize) -> f64 {
        self.plus[e] + self.minus[e]
    }
}

/// Split edge velocities of a 2D mesh.
///
/// `x`-edges carry `v(x_{e}, y_j)` at index `j·(M+1) + e`; `y`-edges carry
/// `w(x_i, y_{e})` at index `i·(M+1) + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVelocity2D {
    pub cells: usize,
    pub vx_plus: Vec<f64>,
    pub vx_minus: Vec<f64>,
    pub wy_plus: Vec<f64>,
    pub wy_minus: Vec<f64>,
}

impl EdgeVelocity2D {
    pub fn new(grid: &Grid2D, vel: &VelocityField) -> Self {
        let m = grid.cells;
        let n = (m + 1) * m;
        let mut out = Self {
            cells: m,
            vx_plus: Vec::with_capacity(n),
            vx_minus: Vec::with_capacity(n),
            wy_plus: Vec::with_capacity(n),
            wy_minus: Vec::with_capacity(n),
        };
        let ax = grid.axis();
        for j in 0..m {
            let yc = ax.center(j + crate::grid::GHOST);
            for e in 0..=m {
                let (v, _) = vel.eval_2d(grid.edge(e), yc);
                let (p, mi) = split(v);
                out.vx_plus.push(p);
                out.vx_minus.push(mi);
            }
        }
        for i in 0..m {
            let xc = ax.center(i + crate::grid::GHOST);
            for e in 0..=m {
                let (_, w) = vel.eval_2d(xc, grid.edge(e));
                let (p, mi) = split(w);
                out.wy_plus.push(p);
                out.wy_minus.push(mi);
            }
        }
        out
    }

    /// x-edge velocity at interior row `j`, edge `e`.
    #[inline]
    pub fn vx(&self, j: usize, e: usize) -> (f64, f64) {
        let k = j * (self.cells + 1) + e;
        (self.vx_plus[k], self.vx_minus[k])
    }

    /// y-edge velocity at interior column `i`, edge `e`.
    #[inline]
    pub fn wy(&self, i: usize, e: usize) -> (f64, f64) {
        let k = i * (self.cells + 1) + e;
        (self.wy_plus[k], self.wy_minus[k])
    }

    /// Edge divergence `(v_R − v_L) + (w_T − w_B)` of interior cell `(i, j)`.
    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        let (rp, rm) = self.vx(j, i + 1);
        let (lp, lm) = self.vx(j, i);
        let (tp, tm) = self.wy(i, j + 1);
        let (bp, bm) = self.wy(i, j);
        ((rp + rm) - (lp + lm)) + ((tp + tm) - (bp + bm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn split_is_exact(v in -1e6f64..1e6) {
            let (p, m) = split(v);
            prop_assert_eq!(p + m, v);
            prop_assert_eq!(p * m, 0.0);
            prop_assert!(p >= 0.0 && m <= 0.0);
        }
    }

    #[test]
    fn rotation_is_divergence_free() {
        let g = Grid2D::new(-1.0, 1.0, 40).unwrap();
        let ev = EdgeVelocity2D::new(&g, &VelocityField::Rotation2D);
        for j in 0..40 {
            for i in 0..40 {
                assert!(ev.divergence(i, j).abs() <= 1e-13 * 2.0 * std::f64::consts::PI);
            }
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let vel = VelocityField::Tabulated {
            x: vec![0.0, 1.0, 2.0],
            v: vec![1.0, -1.0, 3.0],
        };
        assert_eq!(vel.eval_1d(-5.0), 1.0);
        assert_eq!(vel.eval_1d(0.5), 0.0);
        assert_eq!(vel.eval_1d(1.5), 1.0);
        assert_eq!(vel.eval_1d(9.0), 3.0);
    }

    #[test]
    fn sign_detection() {
        let g = Grid1D::new(-4.0, 11.0, 160).unwrap();
        let ev = EdgeVelocity1D::new(&g, &VelocityField::Cosine);
        assert!(!ev.all_nonnegative() && !ev.all_nonpositive());
        let ev = EdgeVelocity1D::new(&g, &VelocityField::constant(1.0));
        assert!(ev.all_nonnegative());
    }
}
