//! One-dimensional schemes for `∂t F(u) + ∂x(v u) = 0`.
//!
//! Every scheme shares the conservative update
//!
//! ```text
//! Q_i^{n+1} − Q_i^n + τ/h (v_{i+1/2} U_{i+1/2} − v_{i−1/2} U_{i−1/2}) = 0
//! ```
//!
//! and differs only in how the interface values `U_{i±1/2}` are formed.
//! The implicit variants reduce, cell by cell, to `F(U_i) + c·U_i = r`
//! where `c ≥ 0` and `r` depend on already known neighbours; fast sweeping
//! visits the cells in alternating orders until the field stops changing.

use std::time::Instant;

use crate::boundary::{fill_ghosts_1d, Boundary};
use crate::error::{Result, SolverError};
use crate::field::{check_same_len, clamp_roundoff, Field};
use crate::grid::{Grid1D, GHOST};
use crate::isotherm::{IsothermSpec, NewtonConfig};
use crate::limiter::{self, LimiterState};
use crate::scheme::{
    ConservationLedger, LimiterMode, RunResult, Scheme, SchemeConfig, StepDiagnostics,
};
use crate::velocity::{EdgeVelocity1D, VelocityField};

/// Mesh, isotherm, velocity and boundary policy of a 1D problem.
#[derive(Debug, Clone)]
pub struct Problem1D {
    pub grid: Grid1D,
    pub iso: IsothermSpec,
    pub velocity: VelocityField,
    pub edges: EdgeVelocity1D,
    pub left: Boundary,
    pub right: Boundary,
}

impl Problem1D {
    pub fn new(
        grid: Grid1D,
        iso: IsothermSpec,
        velocity: VelocityField,
        left: Boundary,
        right: Boundary,
    ) -> Self {
        let edges = EdgeVelocity1D::new(&grid, &velocity);
        Self {
            grid,
            iso,
            velocity,
            edges,
            left,
            right,
        }
    }

    /// Populates ghost cells (`u` and `q`) of `field` for time `t`.
    pub fn fill_ghosts(&self, field: &mut Field, t: f64) {
        fill_ghosts_1d(&mut field.u, &self.grid, &self.left, &self.right, t);
        crate::boundary::sync_ghost_q_1d(field, &self.grid, &self.iso);
    }
}

/// Maximum Courant number `(τ/h)·max_i max(|v_{i−1/2}|, |v_{i+1/2}|)`.
pub fn courant_max_1d(grid: &Grid1D, vel: &VelocityField, tau: f64) -> f64 {
    let vmax = (0..=grid.cells)
        .map(|e| vel.eval_1d(grid.edge(e)).abs())
        .fold(0.0, f64::max);
    tau / grid.h * vmax
}

/// Sweeps whose update is below this stop adapting the limiter; the
/// remaining sweeps converge the scheme with the limiter held fixed, since
/// limiter decisions flipping on round-off would otherwise stall the
/// iteration.
pub(crate) const ADAPT_STOP: f64 = 1e-7;

/// Whether sweep `s` (after an update of `last`) still adapts the limiter.
pub(crate) fn adapting(s: usize, last: f64, cfg: &SchemeConfig) -> bool {
    s < cfg.max_sweeps / 2 && last >= ADAPT_STOP
}

pub(crate) struct Kernel<'a> {
    pub(crate) grid: &'a Grid1D,
    pub(crate) iso: &'a IsothermSpec,
    pub(crate) edges: &'a EdgeVelocity1D,
    pub(crate) left_outflow: bool,
    pub(crate) right_outflow: bool,
    pub(crate) lambda: f64,
    pub(crate) newton: &'a NewtonConfig,
}

impl<'a> Kernel<'a> {
    fn new(p: &'a Problem1D, tau: f64, newton: &'a NewtonConfig) -> Self {
        Self {
            grid: &p.grid,
            iso: &p.iso,
            edges: &p.edges,
            left_outflow: p.left.is_outflow(),
            right_outflow: p.right.is_outflow(),
            lambda: tau / p.grid.h,
            newton,
        }
    }

    /// Interface value at the right edge of upwind cell `k` (positive branch).
    #[inline]
    pub(crate) fn recon_pos(k: usize, un: &[f64], uo: &[f64], lim: &LimiterState) -> f64 {
        un[k]
            - 0.5
                * lim.l_plus[k]
                * limiter::correction(lim.omega_plus[k], un[k - 1], un[k], uo[k], uo[k + 1])
    }

    /// Interface value at the left edge of upwind cell `k` (negative branch).
    #[inline]
    pub(crate) fn recon_neg(k: usize, un: &[f64], uo: &[f64], lim: &LimiterState) -> f64 {
        un[k]
            - 0.5
                * lim.l_minus[k]
                * limiter::correction(lim.omega_minus[k], un[k + 1], un[k], uo[k], uo[k - 1])
    }

    /// `v⁺ U⁺ + v⁻ U⁻` at interior edge `e` (between padded cells `e+1`, `e+2`).
    #[inline]
    pub(crate) fn edge_flux(&self, e: usize, un: &[f64], uo: &[f64], lim: &LimiterState) -> f64 {
        let vp = self.edges.plus[e];
        let vm = self.edges.minus[e];
        let mut f = 0.0;
        if vp != 0.0 {
            f += vp * Self::recon_pos(e + 1, un, uo, lim);
        }
        if vm != 0.0 {
            f += vm * Self::recon_neg(e + 2, un, uo, lim);
        }
        f
    }

    /// Solves the scalar equation of padded cell `k` in place; returns the
    /// absolute change and Newton iterations. With `caps`, the limiter
    /// values of `caps` are upper bounds and the values used are written
    /// back to `lim`.
    #[inline]
    fn solve_cell(
        &self,
        k: usize,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState,
        caps: Option<&LimiterState>,
    ) -> Result<(f64, usize)> {
        let e_left = k - GHOST;
        let e_right = e_left + 1;
        let (vp_r, vm_r) = (self.edges.plus[e_right], self.edges.minus[e_right]);
        let (vp_l, vm_l) = (self.edges.plus[e_left], self.edges.minus[e_left]);

        if let Some(caps) = caps {
            let mut cell = limiter::CellData {
                inflow: 0.0,
                lo: uo[k],
                hi: uo[k],
                center_old: uo[k],
                q_old: qo[k],
                lambda: self.lambda,
            };
            // the inflow values lie in the envelopes of their own stencils
            let mut take = |speed: f64, w: f64, stencil: [f64; 4]| {
                cell.inflow += speed * w;
                for x in stencil.into_iter().chain([w]) {
                    cell.lo = cell.lo.min(x);
                    cell.hi = cell.hi.max(x);
                }
            };
            if vp_l != 0.0 {
                let w = Self::recon_pos(k - 1, un, uo, lim);
                take(vp_l, w, [un[k - 2], un[k - 1], uo[k - 1], uo[k]]);
            }
            if vm_r != 0.0 {
                let w = Self::recon_neg(k + 1, un, uo, lim);
                take(-vm_r, w, [un[k + 2], un[k + 1], uo[k + 1], uo[k]]);
            }
            let mut br = [
                limiter::Branch {
                    speed: vp_r,
                    omega: caps.omega_plus[k],
                    l: caps.l_plus[k],
                    up: un[k - 1],
                    down_old: uo[k + 1],
                },
                limiter::Branch {
                    speed: -vm_l,
                    omega: caps.omega_minus[k],
                    l: caps.l_minus[k],
                    up: un[k + 1],
                    down_old: uo[k - 1],
                },
            ];
            let (value, it) = limiter::solve_limited(&mut br, &cell, un[k], self.iso, self.newton)?;
            lim.l_plus[k] = br[0].l;
            lim.l_minus[k] = br[1].l;
            let delta = (value - un[k]).abs();
            un[k] = value;
            return Ok((delta, it));
        }

        let mut c = 0.0;
        let mut rest = 0.0;
        if vp_r != 0.0 {
            let (w, l) = (lim.omega_plus[k], lim.l_plus[k]);
            let a = 1.0 - 0.5 * l * (1.0 - w);
            let b = -0.5 * l * (w * (un[k - 1] - uo[k]) - (1.0 - w) * uo[k + 1]);
            c += vp_r * a;
            rest += vp_r * b;
        }
        if vm_r != 0.0 {
            rest += vm_r * Self::recon_neg(k + 1, un, uo, lim);
        }
        if vp_l != 0.0 {
            rest -= vp_l * Self::recon_pos(k - 1, un, uo, lim);
        }
        if vm_l != 0.0 {
            let (w, l) = (lim.omega_minus[k], lim.l_minus[k]);
            let a = 1.0 - 0.5 * l * (1.0 - w);
            let b = -0.5 * l * (w * (un[k + 1] - uo[k]) - (1.0 - w) * uo[k - 1]);
            c -= vm_l * a;
            rest -= vm_l * b;
        }
        let c = self.lambda * c;
        let r = qo[k] - self.lambda * rest;
        let s = self.iso.solve(c, r, un[k], self.newton)?;
        let delta = (s.value - un[k]).abs();
        un[k] = s.value;
        Ok((delta, s.iterations))
    }

    #[inline]
    fn refresh_outflow(&self, k: usize, un: &mut [f64]) {
        let first = GHOST;
        let last = GHOST + self.grid.cells - 1;
        if k == first && self.left_outflow {
            un[0] = un[first];
            un[1] = un[first];
        }
        if k == last && self.right_outflow {
            un[last + 1] = un[last];
            un[last + 2] = un[last];
        }
    }

    fn sweep(
        &self,
        forward: bool,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState,
        caps: Option<&LimiterState>,
    ) -> Result<(f64, usize)> {
        let mut max_delta = 0.0_f64;
        let mut iters = 0;
        let range = self.grid.interior();
        let mut visit = |k: usize, un: &mut [f64]| -> Result<()> {
            let (d, it) = self.solve_cell(k, un, uo, qo, lim, caps)?;
            max_delta = max_delta.max(d);
            iters += it;
            self.refresh_outflow(k, un);
            Ok(())
        };
        if forward {
            for k in range {
                visit(k, un)?;
            }
        } else {
            for k in range.rev() {
                visit(k, un)?;
            }
        }
        Ok((max_delta, iters))
    }

    /// Fast sweeping: Gauss–Seidel passes in alternating directions until
    /// the max-norm change of a pass drops below `sweep_tol`. With a
    /// one-signed velocity every pass runs with the flow.
    pub(crate) fn sweep_solve(
        &self,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState,
        caps: Option<&LimiterState>,
        cfg: &SchemeConfig,
    ) -> Result<(usize, usize)> {
        let only_forward = self.edges.all_nonnegative();
        let only_backward = !only_forward && self.edges.all_nonpositive();
        let mut iters = 0;
        let mut last = f64::INFINITY;
        for s in 0..cfg.max_sweeps {
            let forward = if only_forward {
                true
            } else if only_backward {
                false
            } else {
                s % 2 == 0
            };
            let adapt = caps.filter(|_| adapting(s, last, cfg));
            let (delta, it) = self.sweep(forward, un, uo, qo, lim, adapt)?;
            iters += it;
            last = delta;
            if delta < cfg.sweep_tol {
                return Ok((s + 1, iters));
            }
        }
        Err(SolverError::SweepNonConvergence {
            max_sweeps: cfg.max_sweeps,
            last_update: last,
        })
    }

    /// `(τ v U)` at the two domain edges.
    fn boundary_fluxes(&self, un: &[f64], uo: &[f64], lim: &LimiterState) -> (f64, f64) {
        let tau = self.lambda * self.grid.h;
        (
            tau * self.edge_flux(0, un, uo, lim),
            tau * self.edge_flux(self.grid.cells, un, uo, lim),
        )
    }
}

fn finish_step(
    p: &Problem1D,
    old: &Field,
    mut new: Field,
    flux_left: f64,
    flux_right: f64,
    mut diag: StepDiagnostics,
    started: Instant,
) -> (Field, StepDiagnostics) {
    let g = &p.grid;
    let mass_new: f64 = new.q[g.interior()].iter().sum();
    let mass_old: f64 = old.q[g.interior()].iter().sum();
    diag.flux_left = flux_left;
    diag.flux_right = flux_right;
    diag.mass_defect = g.h * (mass_new - mass_old) + flux_right - flux_left;
    diag.clamp = clamp_roundoff(&mut new, g.interior(), &p.iso);
    let (mn, mx) = new.u[g.interior()]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &u| {
            (a.min(u), b.max(u))
        });
    diag.min_u = mn;
    diag.max_u = mx;
    diag.wall_time = started.elapsed().as_secs_f64();
    (new, diag)
}

fn prepare(p: &Problem1D, field: &Field, tau: f64, cfg: &SchemeConfig) -> Result<()> {
    cfg.validate()?;
    if !(tau > 0.0) {
        return Err(SolverError::InvalidParameter(format!(
            "time step must be > 0, got {tau}"
        )));
    }
    if field.u.len() != p.grid.padded_len() || field.q.len() != p.grid.padded_len() {
        return Err(SolverError::GridMismatch(format!(
            "field has {} values, grid expects {}",
            field.u.len(),
            p.grid.padded_len()
        )));
    }
    Ok(())
}

/// New-level guess: old values with ghost cells at `t + τ`.
fn initial_guess(p: &Problem1D, field: &Field, t_new: f64) -> Vec<f64> {
    let mut un = field.u.clone();
    fill_ghosts_1d(&mut un, &p.grid, &p.left, &p.right, t_new);
    un
}

fn build_field(p: &Problem1D, u: Vec<f64>) -> Field {
    Field::from_u(u, &p.iso)
}

/// First-order explicit upwind step from time `t` (ghosts of `field` must
/// hold values at `t`).
pub fn step_explicit1(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let k = Kernel::new(p, tau, &cfg.newton);
    let lim = LimiterState::first_order(p.grid.padded_len());
    let uo = &field.u;
    let fluxes: Vec<f64> = (0..=p.grid.cells)
        .map(|e| k.edge_flux(e, uo, uo, &lim))
        .collect();
    let qn: Vec<f64> = p
        .grid
        .interior()
        .map(|c| field.q[c] - k.lambda * (fluxes[c - GHOST + 1] - fluxes[c - GHOST]))
        .collect();
    explicit_finish(p, field, t, tau, cfg, qn, fluxes[0] * tau, fluxes[p.grid.cells] * tau, started)
}

#[allow(clippy::too_many_arguments)]
fn explicit_finish(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
    qn: Vec<f64>,
    flux_left: f64,
    flux_right: f64,
    started: Instant,
) -> Result<(Field, StepDiagnostics)> {
    if qn.iter().any(|q| !q.is_finite()) {
        let max_abs = field.u.iter().fold(0.0_f64, |m, &u| m.max(u.abs()));
        return Err(SolverError::Unstable { step: 0, max_abs });
    }
    let mut diag = StepDiagnostics::default();
    let mut new = field.clone();
    for (i, &q) in qn.iter().enumerate() {
        let c = i + GHOST;
        let s = p.iso.solve(0.0, q, field.u[c], &cfg.newton)?;
        diag.newton_iters_total += s.iterations;
        new.u[c] = s.value;
        new.q[c] = q;
    }
    p.fill_ghosts(&mut new, t + tau);
    Ok(finish_step(p, field, new, flux_left, flux_right, diag, started))
}

#[inline]
fn van_leer(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

fn muscl_fluxes(p: &Problem1D, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut slope = vec![0.0; n];
    for k in 1..n - 1 {
        slope[k] = van_leer(u[k] - u[k - 1], u[k + 1] - u[k]);
    }
    (0..=p.grid.cells)
        .map(|e| {
            let left = u[e + 1] + 0.5 * slope[e + 1];
            let right = u[e + 2] - 0.5 * slope[e + 2];
            p.edges.plus[e] * left + p.edges.minus[e] * right
        })
        .collect()
}

/// Second-order explicit step: van Leer limited MUSCL reconstruction with
/// two Heun stages, each followed by a cell-wise isotherm inversion.
pub fn step_explicit2(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let lambda = tau / p.grid.h;
    let m = p.grid.cells;
    let f0 = muscl_fluxes(p, &field.u);
    let q_stage: Vec<f64> = p
        .grid
        .interior()
        .map(|c| field.q[c] - lambda * (f0[c - GHOST + 1] - f0[c - GHOST]))
        .collect();
    let (stage, d1) = explicit_finish(p, field, t, tau, cfg, q_stage, 0.0, 0.0, started)?;
    // stage values count as provisional; only the final update is conservative
    let f1 = muscl_fluxes(p, &stage.u);
    let qn: Vec<f64> = p
        .grid
        .interior()
        .map(|c| {
            let e = c - GHOST;
            0.5 * field.q[c] + 0.5 * (stage.q[c] - lambda * (f1[e + 1] - f1[e]))
        })
        .collect();
    let fl = 0.5 * tau * (f0[0] + f1[0]);
    let fr = 0.5 * tau * (f0[m] + f1[m]);
    let (new, mut diag) = explicit_finish(p, field, t, tau, cfg, qn, fl, fr, started)?;
    diag.newton_iters_total += d1.newton_iters_total;
    Ok((new, diag))
}

/// First-order implicit upwind step, solved by fast sweeping.
pub fn step_implicit1(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, StepDiagnostics)> {
    let lim = LimiterState::first_order(p.grid.padded_len());
    solve_with_limiter(p, field, t, tau, cfg, &lim, None)
}

/// Compact implicit second-order step with fixed `ω` and `l ≡ 1`
/// (`l ≡ 0` when `cfg.force_first_order`).
pub fn step_compact2(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, StepDiagnostics)> {
    let omega = match cfg.scheme {
        Scheme::Compact2 { omega } => omega,
        _ => 0.5,
    };
    let l = if cfg.force_first_order { 0.0 } else { 1.0 };
    let lim = LimiterState::uniform(p.grid.padded_len(), omega, l);
    solve_with_limiter(p, field, t, tau, cfg, &lim, None)
}

fn solve_with_limiter(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
    lim: &LimiterState,
    guess: Option<Vec<f64>>,
) -> Result<(Field, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let k = Kernel::new(p, tau, &cfg.newton);
    let mut un = guess.unwrap_or_else(|| initial_guess(p, field, t + tau));
    let mut lim = lim.clone();
    let (sweeps, iters) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, None, cfg)?;
    let (fl, fr) = k.boundary_fluxes(&un, &field.u, &lim);
    let diag = StepDiagnostics {
        sweeps_used: sweeps,
        newton_iters_total: iters,
        ..Default::default()
    };
    Ok(finish_step(p, field, build_field(p, un), fl, fr, diag, started))
}

/// High-resolution step: a first-order implicit predictor fixes `ω` and
/// `l`, then the limited compact scheme is solved with `ω` frozen. In
/// [`LimiterMode::Local`] the predictor `l` is only an upper bound that each
/// cell solve may reduce.
pub fn step_hires_weno(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, LimiterState, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let k = Kernel::new(p, tau, &cfg.newton);
    let mut lim = LimiterState::first_order(p.grid.padded_len());
    let mut un = initial_guess(p, field, t + tau);
    let (mut sweeps, mut iters) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, None, cfg)?;

    let mut excess = 0.0_f64;
    for pass in 0..cfg.corrector_passes {
        let mut caps = limiter::compute_1d(&field.u, &un, cfg.weno_eps);
        if cfg.force_first_order {
            caps.zero_limiters();
        }
        let local = cfg.limiter_mode == LimiterMode::Local;
        if pass == 0 && !local {
            excess = envelope_excess_1d(&field.u, &un, &caps);
        }
        lim = caps.clone();
        let caps = local.then_some(&caps);
        let (s, it) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, caps, cfg)?;
        sweeps += s;
        iters += it;
        if local {
            excess = excess.max(envelope_excess_1d(&field.u, &un, &lim));
        }
    }
    let (fl, fr) = k.boundary_fluxes(&un, &field.u, &lim);
    let diag = StepDiagnostics {
        sweeps_used: sweeps,
        newton_iters_total: iters,
        envelope_excess: excess,
        ..Default::default()
    };
    let (new, diag) = finish_step(p, field, build_field(p, un), fl, fr, diag, started);
    Ok((new, lim, diag))
}

/// Largest excursion of any reconstructed interface value (built from
/// `pred`) outside its stencil envelope, over both velocity branches.
pub fn envelope_excess_1d(uo: &[f64], pred: &[f64], lim: &LimiterState) -> f64 {
    let mut worst = 0.0_f64;
    for k in 1..uo.len() - 1 {
        worst = worst.max(limiter::envelope_excess(
            lim.omega_plus[k],
            lim.l_plus[k],
            pred[k - 1],
            pred[k],
            uo[k],
            uo[k + 1],
        ));
        worst = worst.max(limiter::envelope_excess(
            lim.omega_minus[k],
            lim.l_minus[k],
            pred[k + 1],
            pred[k],
            uo[k],
            uo[k - 1],
        ));
    }
    worst
}

/// Any scheme, returning the limiter state when there is one.
pub fn step(
    p: &Problem1D,
    field: &Field,
    t: f64,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, Option<LimiterState>, StepDiagnostics)> {
    match cfg.scheme {
        Scheme::Explicit1 => step_explicit1(p, field, t, tau, cfg).map(|(f, d)| (f, None, d)),
        Scheme::Explicit2 => step_explicit2(p, field, t, tau, cfg).map(|(f, d)| (f, None, d)),
        Scheme::Implicit1 => step_implicit1(p, field, t, tau, cfg).map(|(f, d)| (f, None, d)),
        Scheme::Compact2 { .. } => step_compact2(p, field, t, tau, cfg).map(|(f, d)| (f, None, d)),
        Scheme::HiresWeno => {
            step_hires_weno(p, field, t, tau, cfg).map(|(f, l, d)| (f, Some(l), d))
        }
    }
}

/// Time loop description for [`run_1d`].
#[derive(Debug, Clone)]
pub struct Run1D {
    pub problem: Problem1D,
    pub scheme: SchemeConfig,
    pub t0: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Run1D {
    pub fn tau(&self) -> f64 {
        (self.t_end - self.t0) / self.steps as f64
    }

    pub fn courant_max(&self) -> f64 {
        courant_max_1d(&self.problem.grid, &self.problem.velocity, self.tau())
    }
}

/// Applies the selected step `steps` times with `τ = (t_end − t0)/steps`.
pub fn run_1d(run: &Run1D, initial: &Field) -> Result<RunResult<LimiterState>> {
    run_1d_observed(run, initial, |_, _, _| {})
}

/// As [`run_1d`], calling `observe(step_index, new_field, diagnostics)`
/// after every step.
pub fn run_1d_observed(
    run: &Run1D,
    initial: &Field,
    mut observe: impl FnMut(usize, &Field, &StepDiagnostics),
) -> Result<RunResult<LimiterState>> {
    let p = &run.problem;
    run.scheme.validate()?;
    let mut field = initial.clone();
    check_same_len(&field, &Field::constant(p.grid.padded_len(), 0.0, &p.iso))?;
    let mass0 = field.mass_1d(&p.grid);
    let mut ledger = ConservationLedger {
        mass_initial: mass0,
        mass_final: mass0,
        ..Default::default()
    };
    if run.steps == 0 {
        return Ok(RunResult {
            field,
            steps: Vec::new(),
            ledger,
            limiter: None,
            wall_time: 0.0,
        });
    }
    if !(run.t_end > run.t0) {
        return Err(SolverError::InvalidParameter(format!(
            "t_end must exceed t0, got [{}, {}]",
            run.t0, run.t_end
        )));
    }
    let started = Instant::now();
    p.fill_ghosts(&mut field, run.t0);
    let tau = run.tau();
    let mut diags = Vec::with_capacity(run.steps);
    let mut last_lim = None;
    for n in 0..run.steps {
        let t = run.t0 + n as f64 * tau;
        let (new, lim, d) = step(p, &field, t, tau, &run.scheme).map_err(|e| match e {
            SolverError::Unstable { max_abs, .. } => SolverError::Unstable { step: n + 1, max_abs },
            other => other,
        })?;
        ledger.net_boundary_flux += d.flux_right - d.flux_left;
        ledger.clamp_adjustment += p.grid.h * d.clamp.q_adjustment;
        ledger.max_step_defect = ledger.max_step_defect.max(d.mass_defect.abs());
        field = new;
        observe(n + 1, &field, &d);
        diags.push(d);
        last_lim = lim;
    }
    ledger.mass_final = field.mass_1d(&p.grid);
    Ok(RunResult {
        field,
        steps: diags,
        ledger,
        limiter: last_lim,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
