//! WENO weights `ω` and limiter values `l` of the compact implicit scheme.
//!
//! For an upwind cell with neighbours `(U_{k−1}, U_k, U_{k+1})` along the
//! flow, the space–time interface value is
//!
//! ```text
//! U_{k+1/2} = U_k^{n+1} − l/2 · [ω (U_{k−1}^{n+1} − U_k^n) + (1 − ω)(U_k^{n+1} − U_{k+1}^n)].
//! ```
//!
//! `ω` blends the two candidate stencils by smoothness: each candidate gets
//! a weight proportional to `1/β²` of its own side, with
//! `β = (difference)² + ε` taken from the predictor. `l` is the largest
//! value in `[0, 1]` keeping the interface value inside the min–max
//! envelope of the four values its formula reads.

use crate::error::Result;
use crate::isotherm::{IsothermSpec, NewtonConfig};

/// Per-cell `ω` and `l` of a 1D step, indexed by padded cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterState {
    pub omega_plus: Vec<f64>,
    pub omega_minus: Vec<f64>,
    pub l_plus: Vec<f64>,
    pub l_minus: Vec<f64>,
}

impl LimiterState {
    /// `l ≡ 0`: the first-order upwind scheme.
    pub fn first_order(len: usize) -> Self {
        Self::uniform(len, 0.5, 0.0)
    }

    /// Constant `ω` and `l` in every cell.
    pub fn uniform(len: usize, omega: f64, l: f64) -> Self {
        Self {
            omega_plus: vec![omega; len],
            omega_minus: vec![omega; len],
            l_plus: vec![l; len],
            l_minus: vec![l; len],
        }
    }

    pub fn len(&self) -> usize {
        self.l_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l_plus.is_empty()
    }

    /// All entries lie in `[0, 1]`.
    pub fn in_unit_range(&self) -> bool {
        [
            &self.omega_plus,
            &self.omega_minus,
            &self.l_plus,
            &self.l_minus,
        ]
        .iter()
        .all(|v| v.iter().all(|&x| (0.0..=1.0).contains(&x)))
    }

    pub fn zero_limiters(&mut self) {
        self.l_plus.iter_mut().for_each(|l| *l = 0.0);
        self.l_minus.iter_mut().for_each(|l| *l = 0.0);
    }
}

/// Per-cell limiter families of a 2D step (`x` and `y` directions).
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterState2D {
    pub x: LimiterState,
    pub y: LimiterState,
}

impl LimiterState2D {
    pub fn first_order(len: usize) -> Self {
        Self {
            x: LimiterState::first_order(len),
            y: LimiterState::first_order(len),
        }
    }

    pub fn in_unit_range(&self) -> bool {
        self.x.in_unit_range() && self.y.in_unit_range()
    }

    pub fn zero_limiters(&mut self) {
        self.x.zero_limiters();
        self.y.zero_limiters();
    }
}

/// Weight of the upwind candidate given smoothness indicators of the
/// upwind side (`beta_up`) and the downwind side (`beta_down`).
#[inline]
pub fn weno_omega(beta_up: f64, beta_down: f64) -> f64 {
    let a_up = 1.0 / (beta_up * beta_up);
    let a_down = 1.0 / (beta_down * beta_down);
    a_up / (a_up + a_down)
}

/// The upwind-weighted correction `ω (U_{up}^{n+1} − U^n) + (1 − ω)(U^{n+1} − U_{down}^n)`.
#[inline]
pub fn correction(omega: f64, up_new: f64, center_new: f64, center_old: f64, down_old: f64) -> f64 {
    omega * (up_new - center_old) + (1.0 - omega) * (center_new - down_old)
}

/// Largest `l ∈ [0, 1]` with `center_new − l·d/2` inside `[lo, hi]`.
///
/// `center_new` itself must lie in `[lo, hi]`.
#[inline]
pub fn limit(center_new: f64, d: f64, lo: f64, hi: f64) -> f64 {
    let full = center_new - 0.5 * d;
    if full >= lo && full <= hi {
        return 1.0;
    }
    let l = if d > 0.0 {
        2.0 * (center_new - lo) / d
    } else {
        2.0 * (center_new - hi) / d
    };
    l.clamp(0.0, 1.0)
}

/// `ω` and `l` for one upwind cell, from the predictor values along the flow
/// (`up`, `center`, `down`) and the old values (`center_old`, `down_old`).
#[inline]
pub fn cell_limiter(
    up: f64,
    center: f64,
    down: f64,
    center_old: f64,
    down_old: f64,
    eps: f64,
) -> (f64, f64) {
    let beta_up = (center - up) * (center - up) + eps;
    let beta_down = (down - center) * (down - center) + eps;
    let omega = weno_omega(beta_up, beta_down);
    let d = correction(omega, up, center, center_old, down_old);
    let lo = up.min(center).min(center_old).min(down_old);
    let hi = up.max(center).max(center_old).max(down_old);
    (omega, limit(center, d, lo, hi))
}

/// Distance of `center − l·d/2` outside the envelope of its stencil.
#[inline]
pub fn envelope_excess(
    omega: f64,
    l: f64,
    up: f64,
    center: f64,
    center_old: f64,
    down_old: f64,
) -> f64 {
    let value = center - 0.5 * l * correction(omega, up, center, center_old, down_old);
    let lo = up.min(center).min(center_old).min(down_old);
    let hi = up.max(center).max(center_old).max(down_old);
    (lo - value).max(value - hi).max(0.0)
}

/// Computes the 1D limiter state from old values `uo` and predictor `up`
/// (both padded). Cells at the outer ghost layer keep `l = 0`.
pub fn compute_1d(uo: &[f64], pred: &[f64], eps: f64) -> LimiterState {
    let n = uo.len();
    let mut st = LimiterState::first_order(n);
    for k in 1..n - 1 {
        let (wp, lp) = cell_limiter(pred[k - 1], pred[k], pred[k + 1], uo[k], uo[k + 1], eps);
        let (wm, lm) = cell_limiter(pred[k + 1], pred[k], pred[k - 1], uo[k], uo[k - 1], eps);
        st.omega_plus[k] = wp;
        st.l_plus[k] = lp;
        st.omega_minus[k] = wm;
        st.l_minus[k] = lm;
    }
    st
}

/// One outflow reconstruction of a cell during a corrector sweep: the cell
/// sends `speed · U_{k±1/2}` through one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub speed: f64,
    pub omega: f64,
    pub l: f64,
    /// Current new-level value of the upwind neighbour.
    pub up: f64,
    /// Old value of the downwind neighbour.
    pub down_old: f64,
}

impl Branch {
    fn active(&self) -> bool {
        self.speed > 0.0 && self.l > 0.0
    }

    /// Coefficient of the cell value in the interface value.
    fn slope(&self) -> f64 {
        1.0 - 0.5 * self.l * (1.0 - self.omega)
    }

    /// Part of the interface value not multiplying the cell value.
    fn offset(&self, center_old: f64) -> f64 {
        -0.5 * self.l * (self.omega * (self.up - center_old) - (1.0 - self.omega) * self.down_old)
    }
}

/// Cell data of a limited corrector solve. The cell equation is
///
/// ```text
/// F(U) + λ Σ speed·U_{k±1/2}(U) = q_old + λ·inflow
/// ```
///
/// with `inflow` the (known) upwind contributions and `[lo, hi]` the range
/// of the values that produced it together with the old cell value.
#[derive(Debug, Clone, Copy)]
pub struct CellData {
    pub inflow: f64,
    pub lo: f64,
    pub hi: f64,
    pub center_old: f64,
    pub q_old: f64,
    pub lambda: f64,
}

/// Reductions of `l` tried before a cell falls back to first order.
const MAX_REDUCTIONS: usize = 4;
const ENVELOPE_TOL: f64 = 1e-12;

/// Largest `θ ∈ [0, 1]` such that scaling every `l` by `θ` turns the cell
/// equation into `F(U) + λcU = q_old + λcZ` with `Z` inside the local range.
/// When the first-order `Z` already leaves the range (compressive
/// velocity) the range is widened to include it.
pub fn bound_scale(branches: &[Branch], cell: &CellData) -> f64 {
    let (mut c0, mut c1, mut s1) = (0.0, 0.0, 0.0);
    let mut lo = cell.lo.min(cell.center_old);
    let mut hi = cell.hi.max(cell.center_old);
    for b in branches.iter().filter(|b| b.speed > 0.0) {
        c0 += b.speed;
        if b.l > 0.0 {
            c1 += b.speed * (1.0 - b.slope());
            s1 -= b.speed * b.offset(cell.center_old);
            lo = lo.min(b.up).min(b.down_old);
            hi = hi.max(b.up).max(b.down_old);
        }
    }
    if c0 <= 0.0 {
        return 1.0;
    }
    let s0 = cell.inflow;
    let z0 = s0 / c0;
    let (lo, hi) = (lo.min(z0), hi.max(z0));
    // s0 + θ s1 ≥ lo (c0 − θ c1)  and  s0 + θ s1 ≤ hi (c0 − θ c1)
    let mut theta: f64 = 1.0;
    let gl = (s0 - lo * c0, s1 + lo * c1);
    let gh = (hi * c0 - s0, -hi * c1 - s1);
    for (g0, g1) in [gl, gh] {
        if g1 < 0.0 {
            theta = theta.min(g0.max(0.0) / -g1);
        }
    }
    theta.clamp(0.0, 1.0)
}

/// Solves one cell with the limiters in `branches` treated as upper bounds.
/// `l` is scaled by [`bound_scale`], then each interface value is checked
/// against its stencil envelope with the solved cell value and `l` reduced
/// where needed. After a few reductions the cell falls back to first order.
/// Returns the cell value and the Newton iterations spent.
pub fn solve_limited(
    branches: &mut [Branch],
    cell: &CellData,
    guess: f64,
    iso: &IsothermSpec,
    newton: &NewtonConfig,
) -> Result<(f64, usize)> {
    let mut iters = 0;
    let mut guess = guess;
    for b in branches.iter_mut().filter(|b| b.speed <= 0.0) {
        b.l = 0.0;
    }
    for attempt in 0..=MAX_REDUCTIONS {
        if attempt == MAX_REDUCTIONS {
            branches.iter_mut().for_each(|b| b.l = 0.0);
        }
        let theta = bound_scale(branches, cell);
        let (mut c, mut extra) = (0.0, 0.0);
        for b in branches.iter_mut() {
            b.l *= theta;
            if b.speed > 0.0 {
                c += b.speed * b.slope();
                extra -= b.speed * b.offset(cell.center_old);
            }
        }
        let s = iso.solve(
            cell.lambda * c,
            cell.q_old + cell.lambda * (cell.inflow + extra),
            guess,
            newton,
        )?;
        iters += s.iterations;
        guess = s.value;
        let mut ok = true;
        for b in branches.iter_mut().filter(|b| b.active()) {
            let d = correction(b.omega, b.up, s.value, cell.center_old, b.down_old);
            let value = s.value - 0.5 * b.l * d;
            let lo = b.up.min(s.value).min(cell.center_old).min(b.down_old);
            let hi = b.up.max(s.value).max(cell.center_old).max(b.down_old);
            if value < lo - ENVELOPE_TOL || value > hi + ENVELOPE_TOL {
                b.l = b.l.min(limit(s.value, d, lo, hi));
                ok = false;
            }
        }
        if ok {
            return Ok((s.value, iters));
        }
    }
    unreachable!("first-order fallback has no active branch")
}
