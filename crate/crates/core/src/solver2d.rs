//! Two-dimensional schemes on a square mesh for
//! `∂t F(u) + ∂x(v u) + ∂y(w u) = 0`.
//!
//! Interface values are the 1D ones applied along each axis. The cell
//! equations are solved by Gauss–Seidel sweeps from the four corners.

use std::time::Instant;

use crate::boundary::{fill_ghosts_2d, Boundaries2D};
use crate::error::{Result, SolverError};
use crate::field::{clamp_roundoff, Field};
use crate::grid::{Grid2D, GHOST};
use crate::isotherm::IsothermSpec;
use crate::limiter::{self, LimiterState, LimiterState2D};
use crate::scheme::{ConservationLedger, LimiterMode, RunResult, Scheme, SchemeConfig, StepDiagnostics};
use crate::solver1d::adapting;
use crate::velocity::{EdgeVelocity2D, VelocityField};

#[derive(Debug, Clone)]
pub struct Problem2D {
    pub grid: Grid2D,
    pub iso: IsothermSpec,
    pub velocity: VelocityField,
    pub edges: EdgeVelocity2D,
    pub bc: Boundaries2D,
}

impl Problem2D {
    pub fn new(grid: Grid2D, iso: IsothermSpec, velocity: VelocityField, bc: Boundaries2D) -> Self {
        let edges = EdgeVelocity2D::new(&grid, &velocity);
        Self {
            grid,
            iso,
            velocity,
            edges,
            bc,
        }
    }

    pub fn fill_ghosts(&self, field: &mut Field) {
        fill_ghosts_2d(&mut field.u, &self.grid, &self.bc);
        for (u, q) in field.u.iter().zip(field.q.iter_mut()) {
            *q = self.iso.f_ext(*u);
        }
    }
}

/// `(C^x_max, C^y_max)` over all edges of the mesh.
pub fn courant_max_2d(grid: &Grid2D, vel: &VelocityField, tau: f64) -> (f64, f64) {
    let ev = EdgeVelocity2D::new(grid, vel);
    let mx = ev
        .vx_plus
        .iter()
        .zip(&ev.vx_minus)
        .map(|(p, m)| (p + m).abs())
        .fold(0.0, f64::max);
    let my = ev
        .wy_plus
        .iter()
        .zip(&ev.wy_minus)
        .map(|(p, m)| (p + m).abs())
        .fold(0.0, f64::max);
    (tau / grid.h * mx, tau / grid.h * my)
}

#[inline]
fn recon_pos(i: usize, s: usize, un: &[f64], uo: &[f64], lim: &LimiterState) -> f64 {
    un[i] - 0.5 * lim.l_plus[i] * limiter::correction(lim.omega_plus[i], un[i - s], un[i], uo[i], uo[i + s])
}

#[inline]
fn recon_neg(i: usize, s: usize, un: &[f64], uo: &[f64], lim: &LimiterState) -> f64 {
    un[i] - 0.5 * lim.l_minus[i] * limiter::correction(lim.omega_minus[i], un[i + s], un[i], uo[i], uo[i - s])
}

/// Accumulates the contribution of one axis to `(c, rest)` of the cell
/// equation at padded index `i`; `s` is the stride along the axis.
#[inline]
#[allow(clippy::too_many_arguments)]
fn axis_terms(
    i: usize,
    s: usize,
    (vp_r, vm_r): (f64, f64),
    (vp_l, vm_l): (f64, f64),
    un: &[f64],
    uo: &[f64],
    lim: &LimiterState,
    c: &mut f64,
    rest: &mut f64,
) {
    if vp_r != 0.0 {
        let (w, l) = (lim.omega_plus[i], lim.l_plus[i]);
        *c += vp_r * (1.0 - 0.5 * l * (1.0 - w));
        *rest += vp_r * (-0.5 * l * (w * (un[i - s] - uo[i]) - (1.0 - w) * uo[i + s]));
    }
    if vm_r != 0.0 {
        *rest += vm_r * recon_neg(i + s, s, un, uo, lim);
    }
    if vp_l != 0.0 {
        *rest -= vp_l * recon_pos(i - s, s, un, uo, lim);
    }
    if vm_l != 0.0 {
        let (w, l) = (lim.omega_minus[i], lim.l_minus[i]);
        *c -= vm_l * (1.0 - 0.5 * l * (1.0 - w));
        *rest -= vm_l * (-0.5 * l * (w * (un[i + s] - uo[i]) - (1.0 - w) * uo[i - s]));
    }
}

/// Inflow and outflow branches of one axis for the locally limited solve.
#[inline]
#[allow(clippy::too_many_arguments)]
fn axis_branches(
    i: usize,
    s: usize,
    (vp_r, vm_r): (f64, f64),
    (vp_l, vm_l): (f64, f64),
    un: &[f64],
    uo: &[f64],
    lim: &LimiterState,
    caps: &LimiterState,
    cell: &mut limiter::CellData,
) -> [limiter::Branch; 2] {
    let mut take = |speed: f64, w: f64, stencil: [f64; 4]| {
        cell.inflow += speed * w;
        for x in stencil.into_iter().chain([w]) {
            cell.lo = cell.lo.min(x);
            cell.hi = cell.hi.max(x);
        }
    };
    if vp_l != 0.0 {
        let w = recon_pos(i - s, s, un, uo, lim);
        take(vp_l, w, [un[i - 2 * s], un[i - s], uo[i - s], uo[i]]);
    }
    if vm_r != 0.0 {
        let w = recon_neg(i + s, s, un, uo, lim);
        take(-vm_r, w, [un[i + 2 * s], un[i + s], uo[i + s], uo[i]]);
    }
    [
        limiter::Branch {
            speed: vp_r,
            omega: caps.omega_plus[i],
            l: caps.l_plus[i],
            up: un[i - s],
            down_old: uo[i + s],
        },
        limiter::Branch {
            speed: -vm_l,
            omega: caps.omega_minus[i],
            l: caps.l_minus[i],
            up: un[i + s],
            down_old: uo[i - s],
        },
    ]
}

struct Kernel2D<'a> {
    p: &'a Problem2D,
    lambda: f64,
    cfg: &'a SchemeConfig,
}

impl<'a> Kernel2D<'a> {
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn solve_cell(
        &self,
        kx: usize,
        ky: usize,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState2D,
        caps: Option<&LimiterState2D>,
    ) -> Result<(f64, usize)> {
        let g = &self.p.grid;
        let ev = &self.p.edges;
        let side = g.side();
        let idx = g.idx(kx, ky);
        let (i, j) = (kx - GHOST, ky - GHOST);
        if let Some(caps) = caps {
            let mut cell = limiter::CellData {
                inflow: 0.0,
                lo: uo[idx],
                hi: uo[idx],
                center_old: uo[idx],
                q_old: qo[idx],
                lambda: self.lambda,
            };
            let [xp, xm] = axis_branches(idx, 1, ev.vx(j, i + 1), ev.vx(j, i), un, uo, &lim.x, &caps.x, &mut cell);
            let [yp, ym] = axis_branches(idx, side, ev.wy(i, j + 1), ev.wy(i, j), un, uo, &lim.y, &caps.y, &mut cell);
            let mut br = [xp, xm, yp, ym];
            let (value, it) = limiter::solve_limited(&mut br, &cell, un[idx], &self.p.iso, &self.cfg.newton)?;
            lim.x.l_plus[idx] = br[0].l;
            lim.x.l_minus[idx] = br[1].l;
            lim.y.l_plus[idx] = br[2].l;
            lim.y.l_minus[idx] = br[3].l;
            let d = (value - un[idx]).abs();
            un[idx] = value;
            return Ok((d, it));
        }
        let mut c = 0.0;
        let mut rest = 0.0;
        axis_terms(idx, 1, ev.vx(j, i + 1), ev.vx(j, i), un, uo, &lim.x, &mut c, &mut rest);
        axis_terms(idx, side, ev.wy(i, j + 1), ev.wy(i, j), un, uo, &lim.y, &mut c, &mut rest);
        let c = self.lambda * c;
        let r = qo[idx] - self.lambda * rest;
        let s = self.p.iso.solve(c, r, un[idx], &self.cfg.newton)?;
        let d = (s.value - un[idx]).abs();
        un[idx] = s.value;
        Ok((d, s.iterations))
    }

    /// One round of the four corner orderings.
    fn round(
        &self,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState2D,
        caps: Option<&LimiterState2D>,
    ) -> Result<(f64, usize)> {
        let m = self.p.grid.cells;
        let mut max_delta = 0.0_f64;
        let mut iters = 0;
        // (i ascending, j ascending) for each of the four sweeps
        const ORDERS: [(bool, bool); 4] = [(true, true), (false, true), (false, false), (true, false)];
        for (i_up, j_up) in ORDERS {
            for jj in 0..m {
                let j = if j_up { jj } else { m - 1 - jj };
                for ii in 0..m {
                    let i = if i_up { ii } else { m - 1 - ii };
                    let (d, it) = self.solve_cell(i + GHOST, j + GHOST, un, uo, qo, lim, caps)?;
                    max_delta = max_delta.max(d);
                    iters += it;
                }
            }
            if self.p.bc.has_outflow() {
                fill_ghosts_2d(un, &self.p.grid, &self.p.bc);
            }
        }
        Ok((max_delta, iters))
    }

    /// Rounds until the max-norm change drops below the sweep tolerance.
    /// With `caps` the limiter adapts while the updates are large.
    fn sweep_solve(
        &self,
        un: &mut [f64],
        uo: &[f64],
        qo: &[f64],
        lim: &mut LimiterState2D,
        caps: Option<&LimiterState2D>,
    ) -> Result<(usize, usize)> {
        let mut iters = 0;
        let mut last = f64::INFINITY;
        for r in 0..self.cfg.max_sweeps {
            let adapt = caps.filter(|_| adapting(r, last, self.cfg));
            let (d, it) = self.round(un, uo, qo, lim, adapt)?;
            iters += it;
            last = d;
            if d < self.cfg.sweep_tol {
                return Ok((r + 1, iters));
            }
        }
        Err(SolverError::SweepNonConvergence {
            max_sweeps: self.cfg.max_sweeps,
            last_update: last,
        })
    }

    /// `τ h Σ v U` over the left+bottom and right+top sides.
    fn boundary_fluxes(&self, un: &[f64], uo: &[f64], lim: &LimiterState2D) -> (f64, f64) {
        let g = &self.p.grid;
        let ev = &self.p.edges;
        let m = g.cells;
        let side = g.side();
        let edge_x = |j: usize, e: usize| {
            let (vp, vm) = ev.vx(j, e);
            let ky = j + GHOST;
            vp * recon_pos(g.idx(e + 1, ky), 1, un, uo, &lim.x) + vm * recon_neg(g.idx(e + 2, ky), 1, un, uo, &lim.x)
        };
        let edge_y = |i: usize, e: usize| {
            let (wp, wm) = ev.wy(i, e);
            let kx = i + GHOST;
            wp * recon_pos(g.idx(kx, e + 1), side, un, uo, &lim.y) + wm * recon_neg(g.idx(kx, e + 2), side, un, uo, &lim.y)
        };
        let mut inflow = 0.0;
        let mut outflow = 0.0;
        for t in 0..m {
            inflow += edge_x(t, 0) + edge_y(t, 0);
            outflow += edge_x(t, m) + edge_y(t, m);
        }
        let scale = self.lambda * g.h * g.h;
        (scale * inflow, scale * outflow)
    }
}

/// 2D limiter state from old values and a predictor, axis by axis.
pub fn compute_limiter_2d(grid: &Grid2D, uo: &[f64], pred: &[f64], eps: f64) -> LimiterState2D {
    let side = grid.side();
    let mut st = LimiterState2D::first_order(grid.padded_len());
    for ky in 0..side {
        for kx in 0..side {
            let i = grid.idx(kx, ky);
            let interior_row = grid.interior().contains(&ky);
            let interior_col = grid.interior().contains(&kx);
            if interior_row && kx >= 1 && kx + 1 < side {
                let (wp, lp) = limiter::cell_limiter(pred[i - 1], pred[i], pred[i + 1], uo[i], uo[i + 1], eps);
                let (wm, lm) = limiter::cell_limiter(pred[i + 1], pred[i], pred[i - 1], uo[i], uo[i - 1], eps);
                st.x.omega_plus[i] = wp;
                st.x.l_plus[i] = lp;
                st.x.omega_minus[i] = wm;
                st.x.l_minus[i] = lm;
            }
            if interior_col && ky >= 1 && ky + 1 < side {
                let (s, n) = (i - side, i + side);
                let (wp, lp) = limiter::cell_limiter(pred[s], pred[i], pred[n], uo[i], uo[n], eps);
                let (wm, lm) = limiter::cell_limiter(pred[n], pred[i], pred[s], uo[i], uo[s], eps);
                st.y.omega_plus[i] = wp;
                st.y.l_plus[i] = lp;
                st.y.omega_minus[i] = wm;
                st.y.l_minus[i] = lm;
            }
        }
    }
    st
}

/// Largest envelope excursion of the 2D reconstructions built from `pred`.
pub fn envelope_excess_2d(grid: &Grid2D, uo: &[f64], pred: &[f64], lim: &LimiterState2D) -> f64 {
    let side = grid.side();
    let mut worst = 0.0_f64;
    for ky in 1..side - 1 {
        for kx in 1..side - 1 {
            let i = grid.idx(kx, ky);
            for (s, l) in [(1, &lim.x), (side, &lim.y)] {
                worst = worst
                    .max(limiter::envelope_excess(l.omega_plus[i], l.l_plus[i], pred[i - s], pred[i], uo[i], uo[i + s]))
                    .max(limiter::envelope_excess(l.omega_minus[i], l.l_minus[i], pred[i + s], pred[i], uo[i], uo[i - s]));
            }
        }
    }
    worst
}

fn prepare(p: &Problem2D, field: &Field, tau: f64, cfg: &SchemeConfig) -> Result<()> {
    cfg.validate()?;
    if !(tau > 0.0) {
        return Err(SolverError::InvalidParameter(format!("time step must be > 0, got {tau}")));
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

fn finish(
    p: &Problem2D,
    old: &Field,
    un: Vec<f64>,
    fluxes: (f64, f64),
    mut diag: StepDiagnostics,
    started: Instant,
) -> (Field, StepDiagnostics) {
    let g = &p.grid;
    let mut new = Field::from_u(un, &p.iso);
    diag.flux_left = fluxes.0;
    diag.flux_right = fluxes.1;
    diag.mass_defect = new.mass_2d(g) - old.mass_2d(g) + fluxes.1 - fluxes.0;
    let side = g.side();
    let interior: Vec<usize> = g
        .interior()
        .flat_map(|ky| g.interior().map(move |kx| ky * side + kx))
        .collect();
    diag.clamp = clamp_roundoff(&mut new, interior.iter().copied(), &p.iso);
    diag.min_u = interior.iter().map(|&i| new.u[i]).fold(f64::INFINITY, f64::min);
    diag.max_u = interior.iter().map(|&i| new.u[i]).fold(f64::NEG_INFINITY, f64::max);
    diag.wall_time = started.elapsed().as_secs_f64();
    (new, diag)
}

/// First-order implicit upwind step solved by four-corner fast sweeping.
pub fn step_implicit1_2d(
    p: &Problem2D,
    field: &Field,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let k = Kernel2D {
        p,
        lambda: tau / p.grid.h,
        cfg,
    };
    let mut lim = LimiterState2D::first_order(p.grid.padded_len());
    let mut un = field.u.clone();
    let (sweeps, iters) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, None)?;
    let fl = k.boundary_fluxes(&un, &field.u, &lim);
    let diag = StepDiagnostics {
        sweeps_used: sweeps,
        newton_iters_total: iters,
        ..Default::default()
    };
    Ok(finish(p, field, un, fl, diag, started))
}

/// High-resolution step: first-order predictor, then the limited compact
/// scheme with `ω` frozen per axis and velocity sign. `l` is frozen too, or
/// an upper bound in [`LimiterMode::Local`].
pub fn step_hires_weno_2d(
    p: &Problem2D,
    field: &Field,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<(Field, LimiterState2D, StepDiagnostics)> {
    prepare(p, field, tau, cfg)?;
    let started = Instant::now();
    let k = Kernel2D {
        p,
        lambda: tau / p.grid.h,
        cfg,
    };
    let mut lim = LimiterState2D::first_order(p.grid.padded_len());
    let mut un = field.u.clone();
    let (mut sweeps, mut iters) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, None)?;
    let local = cfg.limiter_mode == LimiterMode::Local;
    let mut excess = 0.0_f64;
    for pass in 0..cfg.corrector_passes {
        let mut caps = compute_limiter_2d(&p.grid, &field.u, &un, cfg.weno_eps);
        if cfg.force_first_order {
            caps.zero_limiters();
        }
        if pass == 0 && !local {
            excess = envelope_excess_2d(&p.grid, &field.u, &un, &caps);
        }
        lim = caps.clone();
        let caps = local.then_some(&caps);
        let (s, it) = k.sweep_solve(&mut un, &field.u, &field.q, &mut lim, caps)?;
        sweeps += s;
        iters += it;
        if local {
            excess = excess.max(envelope_excess_2d(&p.grid, &field.u, &un, &lim));
        }
    }
    let fl = k.boundary_fluxes(&un, &field.u, &lim);
    let diag = StepDiagnostics {
        sweeps_used: sweeps,
        newton_iters_total: iters,
        envelope_excess: excess,
        ..Default::default()
    };
    let (new, diag) = finish(p, field, un, fl, diag, started);
    Ok((new, lim, diag))
}

#[derive(Debug, Clone)]
pub struct Run2D {
    pub problem: Problem2D,
    pub scheme: SchemeConfig,
    pub t0: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Run2D {
    pub fn tau(&self) -> f64 {
        (self.t_end - self.t0) / self.steps as f64
    }
}

/// Time loop for the 2D implicit schemes (`implicit1` or `hires_weno`).
pub fn run_2d(run: &Run2D, initial: &Field) -> Result<RunResult<LimiterState2D>> {
    let p = &run.problem;
    run.scheme.validate()?;
    let mut field = initial.clone();
    let mass0 = field.mass_2d(&p.grid);
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
    let started = Instant::now();
    p.fill_ghosts(&mut field);
    let tau = run.tau();
    let mut diags = Vec::with_capacity(run.steps);
    let mut last = None;
    for _ in 0..run.steps {
        let (new, lim, d) = match run.scheme.scheme {
            Scheme::Implicit1 => {
                let (f, d) = step_implicit1_2d(p, &field, tau, &run.scheme)?;
                (f, None, d)
            }
            Scheme::HiresWeno => {
                let (f, l, d) = step_hires_weno_2d(p, &field, tau, &run.scheme)?;
                (f, Some(l), d)
            }
            other => {
                return Err(SolverError::InvalidParameter(format!(
                    "scheme {} is not available in 2D",
                    other.name()
                )))
            }
        };
        ledger.net_boundary_flux += d.flux_right - d.flux_left;
        ledger.clamp_adjustment += p.grid.h * p.grid.h * d.clamp.q_adjustment;
        ledger.max_step_defect = ledger.max_step_defect.max(d.mass_defect.abs());
        field = new;
        diags.push(d);
        last = lim;
    }
    ledger.mass_final = field.mass_2d(&p.grid);
    Ok(RunResult {
        field,
        steps: diags,
        ledger,
        limiter: last,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
