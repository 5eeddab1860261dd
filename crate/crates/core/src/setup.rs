//! Resolution-independent run descriptions.
//!
//! A [`RunSpec`] fixes the domain, time interval, isotherm, velocity,
//! initial and boundary data and the scheme; [`RunSpec::execute`] runs it
//! on a given `(M, N)`.

use std::sync::Arc;

use crate::boundary::{Boundaries2D, Boundary, Boundary2D};
use crate::error::{Result, SolverError};
use crate::exact::StepRiemannSolution;
use crate::field::Field;
use crate::grid::{Grid1D, Grid2D};
use crate::isotherm::IsothermSpec;
use crate::scheme::{ConservationLedger, Scheme, SchemeConfig};
use crate::solver1d::{courant_max_1d, run_1d, Problem1D, Run1D};
use crate::solver2d::{courant_max_2d, run_2d, Problem2D, Run2D};
use crate::velocity::VelocityField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `u = 1` on `(0, 1)`, else 0, sampled at cell centers.
    Step,
    /// Cell averages of the exact step solution at `t0`.
    ExactStep,
    /// Four Gaussians on the line.
    Gauss4,
    /// Four Gaussians centered at `(±0.5, ±0.5)`.
    Gauss4Planar,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Dirichlet(f64),
    Outflow,
    /// Ghosts hold cell averages of the exact step solution.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    OneD {
        left: BoundaryKind,
        right: BoundaryKind,
    },
    TwoD {
        left: BoundaryKind,
        right: BoundaryKind,
        bottom: BoundaryKind,
        top: BoundaryKind,
    },
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub dimension: Dimension,
    /// `[left, right]` (1D) or `[left, right]²` (2D).
    pub domain: (f64, f64),
    pub t0: f64,
    pub t_end: f64,
    pub iso: IsothermSpec,
    pub velocity: VelocityField,
    pub ic: InitialCondition,
    pub bc: BoundarySpec,
    pub scheme: SchemeConfig,
}

/// `u = 1` on `(0, 1)`, else 0.
pub fn step_profile(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        1.0
    } else {
        0.0
    }
}

pub fn gauss4_1d(x: f64) -> f64 {
    use std::f64::consts::PI;
    (-10.0 * (x + PI / 2.0).powi(2)).exp()
        + 0.5 * (-2.0 * (x - PI / 2.0).powi(2)).exp()
        + (-10.0 * (x - 2.0 * PI).powi(2)).exp()
        + (-10.0 * (x - 3.0 * PI).powi(2)).exp()
}

pub fn gauss4_2d(x: f64, y: f64) -> f64 {
    let g = |cx: f64, cy: f64| (-50.0 * ((x - cx).powi(2) + (y - cy).powi(2))).exp();
    g(0.5, -0.5) + g(0.5, 0.5) + g(-0.5, -0.5) + g(-0.5, 0.5)
}

/// Step initial data sampled at cell centers.
pub fn ic_step_1d(grid: &Grid1D, iso: &IsothermSpec) -> Field {
    Field::sample_1d(grid, iso, step_profile)
}

pub fn ic_gauss4_1d(grid: &Grid1D, iso: &IsothermSpec) -> Field {
    Field::sample_1d(grid, iso, gauss4_1d)
}

pub fn ic_gauss4_2d(grid: &Grid2D, iso: &IsothermSpec) -> Field {
    Field::sample_2d(grid, iso, gauss4_2d)
}

/// A prepared run at a fixed resolution.
#[derive(Debug, Clone)]
pub enum Built {
    OneD(Run1D, Field),
    TwoD(Run2D, Field),
}

/// Final state of a run in plain arrays.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    OneD {
        x: Vec<f64>,
        u: Vec<f64>,
        q: Vec<f64>,
    },
    /// `u`, `q` row-major by `y` then `x`; `x`, `y` are the axis centers.
    TwoD {
        x: Vec<f64>,
        y: Vec<f64>,
        u: Vec<f64>,
        q: Vec<f64>,
    },
}

impl Profile {
    pub fn u(&self) -> &[f64] {
        match self {
            Self::OneD { u, .. } | Self::TwoD { u, .. } => u,
        }
    }

    pub fn len(&self) -> usize {
        self.u().len()
    }

    pub fn is_empty(&self) -> bool {
        self.u().is_empty()
    }
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub cells: usize,
    pub steps: usize,
    pub tau: f64,
    pub h: f64,
    /// Largest Courant number over the axes.
    pub courant: f64,
    pub profile: Profile,
    pub ledger: ConservationLedger,
    /// Extremes of interior `u` over all steps.
    pub min_u: f64,
    pub max_u: f64,
    /// Largest per-step mass identity residual divided by the cell volume,
    /// i.e. in units of `ΣQ`.
    pub max_defect_q: f64,
    pub max_envelope_excess: f64,
    pub max_sweeps: usize,
    pub total_newton_iters: usize,
    pub clamp_violations: usize,
    pub cpu_seconds: f64,
}

impl RunSpec {
    /// Exact step solution when the run is the step problem with `v ≡ 1`.
    pub fn step_solution(&self) -> Option<StepRiemannSolution> {
        match (&self.velocity, self.dimension) {
            (VelocityField::Constant { v, .. }, Dimension::One) if *v == 1.0 => {
                Some(StepRiemannSolution::new(self.iso))
            }
            _ => None,
        }
    }

    fn uses_exact(&self) -> bool {
        let b = |k: &BoundaryKind| matches!(k, BoundaryKind::Exact);
        let bc = match &self.bc {
            BoundarySpec::OneD { left, right } => b(left) || b(right),
            BoundarySpec::TwoD {
                left,
                right,
                bottom,
                top,
            } => b(left) || b(right) || b(bottom) || b(top),
        };
        bc || self.ic == InitialCondition::ExactStep
    }

    /// All constraint violations; empty when the spec is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.domain.1 > self.domain.0) {
            out.push(format!(
                "domain: right end {} must exceed left end {}",
                self.domain.1, self.domain.0
            ));
        }
        if !self.t0.is_finite() || !self.t_end.is_finite() || !(self.t_end > self.t0) {
            out.push(format!("T ({}) must exceed t0 ({})", self.t_end, self.t0));
        }
        for iso in [
            IsothermSpec { a: self.iso.a, p: 1.0 },
            IsothermSpec { a: 1.0, p: self.iso.p },
        ] {
            if let Err(SolverError::InvalidParameter(m)) = iso.validate() {
                out.push(m);
            }
        }
        out.extend(self.scheme.violations());
        match (self.dimension, &self.bc) {
            (Dimension::One, BoundarySpec::TwoD { .. }) => {
                out.push("bc: 1D runs take left/right boundaries only".into())
            }
            (Dimension::Two, BoundarySpec::OneD { .. }) => {
                out.push("bc: 2D runs need left, right, bottom and top".into())
            }
            _ => {}
        }
        if self.dimension == Dimension::Two {
            if self.scheme.scheme != Scheme::Implicit1 && self.scheme.scheme != Scheme::HiresWeno {
                out.push(format!(
                    "scheme.name: {} is not available in 2D",
                    self.scheme.scheme.name()
                ));
            }
            if let BoundarySpec::TwoD {
                left,
                right,
                bottom,
                top,
            } = &self.bc
            {
                if [left, right, bottom, top]
                    .iter()
                    .any(|k| matches!(k, BoundaryKind::Exact))
                {
                    out.push("bc: exact boundaries exist for the 1D step problem only".into());
                }
            }
            if matches!(
                self.ic,
                InitialCondition::Step | InitialCondition::ExactStep | InitialCondition::Gauss4
            ) {
                out.push("ic.kind: 1D initial condition in a 2D run".into());
            }
        } else if self.ic == InitialCondition::Gauss4Planar {
            out.push("ic.kind: 2D initial condition in a 1D run".into());
        }
        if let VelocityField::Tabulated { x, v } = &self.velocity {
            if x.len() != v.len() || x.is_empty() {
                out.push("velocity: tabulated x and values must have equal, nonzero length".into());
            } else if x.windows(2).any(|w| !(w[1] > w[0])) {
                out.push("velocity: tabulated x must be strictly increasing".into());
            }
        }
        if self.uses_exact() {
            match self.step_solution() {
                None => out.push(
                    "exact step data requires a 1D run with constant velocity 1".into(),
                ),
                Some(s) => {
                    if self.t_end >= s.t_interact || self.t0 < 0.0 {
                        out.push(format!(
                            "exact step data is valid on [0, {}), run covers [{}, {}]",
                            s.t_interact, self.t0, self.t_end
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SolverError::InvalidParameter(v.join("; ")))
        }
    }

    fn boundary_1d(&self, k: BoundaryKind) -> Boundary {
        match k {
            BoundaryKind::Dirichlet(v) => Boundary::Dirichlet(v),
            BoundaryKind::Outflow => Boundary::Outflow,
            BoundaryKind::Exact => {
                let sol = StepRiemannSolution::new(self.iso);
                Boundary::Function(Arc::new(move |a, b, t| sol.cell_average(a, b, t).unwrap_or(0.0)))
            }
        }
    }

    fn boundary_2d(k: BoundaryKind) -> Boundary2D {
        match k {
            BoundaryKind::Dirichlet(v) => Boundary2D::Dirichlet(v),
            _ => Boundary2D::Outflow,
        }
    }

    /// Same run with another scheme.
    pub fn with_scheme(&self, scheme: SchemeConfig) -> Self {
        Self {
            scheme,
            ..self.clone()
        }
    }

    /// Run and initial field at `M` cells (per axis) and `N` steps.
    pub fn build(&self, cells: usize, steps: usize) -> Result<Built> {
        self.validate()?;
        match self.dimension {
            Dimension::One => {
                let grid = Grid1D::new(self.domain.0, self.domain.1, cells)?;
                let (left, right) = match self.bc {
                    BoundarySpec::OneD { left, right } => (left, right),
                    BoundarySpec::TwoD { .. } => unreachable!("checked by validate"),
                };
                let problem = Problem1D::new(
                    grid,
                    self.iso,
                    self.velocity.clone(),
                    self.boundary_1d(left),
                    self.boundary_1d(right),
                );
                let g = &problem.grid;
                let mut field = match self.ic {
                    InitialCondition::Step => ic_step_1d(g, &self.iso),
                    InitialCondition::ExactStep => {
                        let sol = StepRiemannSolution::new(self.iso);
                        let t0 = self.t0;
                        let u = (0..g.padded_len())
                            .map(|k| {
                                let (a, b) = g.cell_bounds(k);
                                sol.cell_average(a, b, t0)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Field::from_u(u, &self.iso)
                    }
                    InitialCondition::Gauss4 => ic_gauss4_1d(g, &self.iso),
                    InitialCondition::Constant(c) => Field::constant(g.padded_len(), c, &self.iso),
                    InitialCondition::Gauss4Planar => unreachable!("checked by validate"),
                };
                problem.fill_ghosts(&mut field, self.t0);
                Ok(Built::OneD(
                    Run1D {
                        problem,
                        scheme: self.scheme,
                        t0: self.t0,
                        t_end: self.t_end,
                        steps,
                    },
                    field,
                ))
            }
            Dimension::Two => {
                let grid = Grid2D::new(self.domain.0, self.domain.1, cells)?;
                let bc = match self.bc {
                    BoundarySpec::TwoD {
                        left,
                        right,
                        bottom,
                        top,
                    } => Boundaries2D {
                        left: Self::boundary_2d(left),
                        right: Self::boundary_2d(right),
                        bottom: Self::boundary_2d(bottom),
                        top: Self::boundary_2d(top),
                    },
                    BoundarySpec::OneD { .. } => unreachable!("checked by validate"),
                };
                let problem = Problem2D::new(grid, self.iso, self.velocity.clone(), bc);
                let g = &problem.grid;
                let mut field = match self.ic {
                    InitialCondition::Gauss4Planar => ic_gauss4_2d(g, &self.iso),
                    InitialCondition::Constant(c) => Field::constant(g.padded_len(), c, &self.iso),
                    _ => unreachable!("checked by validate"),
                };
                problem.fill_ghosts(&mut field);
                Ok(Built::TwoD(
                    Run2D {
                        problem,
                        scheme: self.scheme,
                        t0: self.t0,
                        t_end: self.t_end,
                        steps,
                    },
                    field,
                ))
            }
        }
    }

    /// Largest Courant number at `M` cells and `N` steps.
    pub fn courant(&self, cells: usize, steps: usize) -> Result<f64> {
        let tau = (self.t_end - self.t0) / steps as f64;
        Ok(match self.dimension {
            Dimension::One => {
                courant_max_1d(&Grid1D::new(self.domain.0, self.domain.1, cells)?, &self.velocity, tau)
            }
            Dimension::Two => {
                let (cx, cy) =
                    courant_max_2d(&Grid2D::new(self.domain.0, self.domain.1, cells)?, &self.velocity, tau);
                cx.max(cy)
            }
        })
    }

    /// Initial state at `M` cells as a profile.
    pub fn initial_profile(&self, cells: usize) -> Result<Profile> {
        Ok(match self.build(cells, 1)? {
            Built::OneD(run, field) => profile_1d(&run.problem.grid, &field),
            Built::TwoD(run, field) => profile_2d(&run.problem.grid, &field),
        })
    }

    /// Runs at `M` cells (per axis) and `N` steps.
    pub fn execute(&self, cells: usize, steps: usize) -> Result<RunOutcome> {
        if steps == 0 {
            return Err(SolverError::InvalidParameter("N must be at least 1".into()));
        }
        match self.build(cells, steps)? {
            Built::OneD(run, field) => {
                let g = run.problem.grid;
                let res = run_1d(&run, &field)?;
                Ok(RunOutcome {
                    cells,
                    steps,
                    tau: run.tau(),
                    h: g.h,
                    courant: courant_max_1d(&g, &self.velocity, run.tau()),
                    profile: profile_1d(&g, &res.field),
                    max_defect_q: res.steps.iter().map(|d| d.mass_defect.abs()).fold(0.0, f64::max) / g.h,
                    max_envelope_excess: res.steps.iter().map(|d| d.envelope_excess).fold(0.0, f64::max),
                    max_sweeps: res.steps.iter().map(|d| d.sweeps_used).max().unwrap_or(0),
                    total_newton_iters: res.total_newton_iters(),
                    clamp_violations: res.steps.iter().map(|d| d.clamp.violations).sum(),
                    min_u: res.min_u(),
                    max_u: res.max_u(),
                    ledger: res.ledger,
                    cpu_seconds: res.wall_time,
                })
            }
            Built::TwoD(run, field) => {
                let g = run.problem.grid;
                let res = run_2d(&run, &field)?;
                let (cx, cy) = courant_max_2d(&g, &self.velocity, run.tau());
                let vol = g.h * g.h;
                Ok(RunOutcome {
                    cells,
                    steps,
                    tau: run.tau(),
                    h: g.h,
                    courant: cx.max(cy),
                    profile: profile_2d(&g, &res.field),
                    max_defect_q: res.steps.iter().map(|d| d.mass_defect.abs()).fold(0.0, f64::max) / vol,
                    max_envelope_excess: res.steps.iter().map(|d| d.envelope_excess).fold(0.0, f64::max),
                    max_sweeps: res.steps.iter().map(|d| d.sweeps_used).max().unwrap_or(0),
                    total_newton_iters: res.total_newton_iters(),
                    clamp_violations: res.steps.iter().map(|d| d.clamp.violations).sum(),
                    min_u: res.min_u(),
                    max_u: res.max_u(),
                    ledger: res.ledger,
                    cpu_seconds: res.wall_time,
                })
            }
        }
    }
}

pub fn profile_1d(grid: &Grid1D, field: &Field) -> Profile {
    let r = grid.interior();
    Profile::OneD {
        x: r.clone().map(|k| grid.center(k)).collect(),
        u: field.u[r.clone()].to_vec(),
        q: field.q[r].to_vec(),
    }
}

pub fn profile_2d(grid: &Grid2D, field: &Field) -> Profile {
    let axis: Vec<f64> = grid.interior().map(|k| grid.center(k)).collect();
    let side = grid.side();
    let mut u = Vec::with_capacity(grid.cells * grid.cells);
    let mut q = Vec::with_capacity(grid.cells * grid.cells);
    for ky in grid.interior() {
        for kx in grid.interior() {
            u.push(field.u[ky * side + kx]);
            q.push(field.q[ky * side + kx]);
        }
    }
    Profile::TwoD {
        x: axis.clone(),
        y: axis,
        u,
        q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_conditions() {
        let iso = IsothermSpec::freundlich(0.5).unwrap();
        assert_eq!(step_profile(0.5), 1.0);
        assert_eq!(step_profile(3.0), 0.0);
        let g = Grid1D::new(0.0, 5.0, 320).unwrap();
        let f = ic_step_1d(&g, &iso);
        assert!((f.interior_1d(&g).iter().sum::<f64>() * g.h - 1.0).abs() < 1e-12);

        use std::f64::consts::PI;
        assert!((gauss4_1d(-PI / 2.0) - 1.0).abs() < 1e-6);
        assert!((gauss4_1d(PI / 2.0) - 0.5).abs() < 1e-6);
        assert!(gauss4_1d(-4.0) < 1e-5);

        assert!((gauss4_2d(0.5, 0.5) - 1.0).abs() < 1e-10);
        assert!((gauss4_2d(0.0, 0.0) - 4.0 * (-25.0f64).exp()).abs() < 1e-20);
        let g2 = Grid2D::new(-1.0, 1.0, 16).unwrap();
        let f = ic_gauss4_2d(&g2, &iso);
        for ky in g2.interior() {
            for kx in g2.interior() {
                // rotation by 90 degrees maps (kx, ky) to (mirror ky, kx)
                let rx = g2.side() - 1 - ky;
                assert!((f.u[g2.idx(kx, ky)] - f.u[g2.idx(rx, kx)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn violations_are_enumerated() {
        let mut spec = RunSpec {
            dimension: Dimension::One,
            domain: (1.0, 0.0),
            t0: 0.0,
            t_end: 3.0,
            iso: IsothermSpec { a: 1.0, p: -1.0 },
            velocity: VelocityField::Cosine,
            ic: InitialCondition::ExactStep,
            bc: BoundarySpec::OneD {
                left: BoundaryKind::Dirichlet(0.0),
                right: BoundaryKind::Outflow,
            },
            scheme: SchemeConfig::new(Scheme::HiresWeno),
        };
        let v = spec.violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("isotherm.p")));
        spec.domain = (0.0, 5.0);
        spec.iso = IsothermSpec::freundlich(0.5).unwrap();
        spec.velocity = VelocityField::constant(1.0);
        assert!(spec.violations().is_empty());
        spec.t_end = 7.0;
        assert_eq!(spec.violations().len(), 1);
    }
}
