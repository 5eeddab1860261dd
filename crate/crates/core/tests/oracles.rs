//! Solver output against independently computed references.

mod common;

use std::sync::Arc;

use common::{implicit_upwind_1d, implicit_upwind_2d, l1, max_diff};
use sorption_fv::experiments::{
    cosine_spec, exact_reference, fine_grid_oracle, run_study, smooth_window_spec, step_spec, Expectation,
    Reference, Study,
};
use sorption_fv::scheme::{Scheme, SchemeConfig};
use sorption_fv::setup::{BoundaryKind, BoundarySpec, Dimension, InitialCondition, RunSpec};
use sorption_fv::velocity::VelocityField;

#[test]
fn sweeping_matches_fixed_point_on_cosine_velocity() {
    for p in [0.25, 0.5, 4.0] {
        let spec = cosine_spec(p, SchemeConfig::new(Scheme::Implicit1));
        let (m, n) = (160, 2);
        let u0 = spec.initial_profile(m).unwrap().u().to_vec();
        let oracle = implicit_upwind_1d(spec.domain, &u0, (1.0, p), f64::cos, (spec.t_end - spec.t0, n));
        let out = spec.execute(m, n).unwrap();
        let d = max_diff(out.profile.u(), &oracle);
        assert!(d <= 1e-8, "p = {p}: max difference {d:e}");
    }
}

fn quadrant_velocity() -> VelocityField {
    use std::f64::consts::PI;
    // v > 0, w < 0 in the first quadrant; signs alternate between quadrants
    VelocityField::Custom(Arc::new(|x, y| (2.0 * (PI * y).sin(), -2.0 * (PI * x).sin())))
}

fn quadrant_spec(p: f64, scheme: Scheme) -> RunSpec {
    let z = BoundaryKind::Dirichlet(0.0);
    RunSpec {
        dimension: Dimension::Two,
        domain: (-1.0, 1.0),
        t0: 0.0,
        t_end: 0.25,
        iso: sorption_fv::isotherm::IsothermSpec { a: 1.0, p },
        velocity: quadrant_velocity(),
        ic: InitialCondition::Gauss4Planar,
        bc: BoundarySpec::TwoD {
            left: z,
            right: z,
            bottom: z,
            top: z,
        },
        scheme: SchemeConfig::new(scheme),
    }
}

#[test]
fn four_corner_sweeping_matches_fixed_point_on_quadrant_velocity() {
    use std::f64::consts::PI;
    for p in [0.5, 3.0] {
        let spec = quadrant_spec(p, Scheme::Implicit1);
        let (m, n) = (40, 4);
        let u0 = spec.initial_profile(m).unwrap().u().to_vec();
        let vel = |x: f64, y: f64| (2.0 * (PI * y).sin(), -2.0 * (PI * x).sin());
        let oracle = implicit_upwind_2d(spec.domain, &u0, (1.0, p), vel, (0.25, n));
        let out = spec.execute(m, n).unwrap();
        assert!(out.courant > 2.0);
        let d = max_diff(out.profile.u(), &oracle);
        assert!(d <= 1e-8, "p = {p}: max difference {d:e}");
    }
}

#[test]
fn hires_on_quadrant_velocity_is_bounded_and_conservative() {
    let spec = quadrant_spec(0.5, Scheme::HiresWeno);
    let out = spec.execute(40, 4).unwrap();
    assert!(out.min_u >= -1e-3 && out.max_u <= 1.0 + 1e-3, "[{}, {}]", out.min_u, out.max_u);
    assert!(out.ledger.relative_drift() < 1e-7);
    assert!(out.max_envelope_excess <= spec.scheme.sweep_tol);
}

#[test]
fn oracle_is_self_consistent_on_cosine_velocity() {
    for p in [0.25, 4.0] {
        let spec = cosine_spec(p, SchemeConfig::new(Scheme::Implicit1));
        let (m, n) = (320, 4);
        let h = (spec.domain.1 - spec.domain.0) / m as f64;
        let r4 = fine_grid_oracle(&spec, m, n, 4).unwrap();
        let r8 = fine_grid_oracle(&spec, m, n, 8).unwrap();
        let coarse = spec.execute(m, n).unwrap();
        let gap = l1(&r4, &r8, h);
        let err = l1(coarse.profile.u(), &r8, h);
        assert!(gap < 0.5 * err, "p = {p}: oracle gap {gap:e}, coarse error {err:e}");
    }
}

#[test]
fn oracle_refinement_approaches_the_shifted_step() {
    let spec = step_spec(1.0, SchemeConfig::new(Scheme::Implicit1));
    let (m, n) = (80, 8);
    let h = 5.0 / m as f64;
    let exact = exact_reference(&spec, m).unwrap();
    let d4 = l1(&fine_grid_oracle(&spec, m, n, 4).unwrap(), &exact, h);
    let d8 = l1(&fine_grid_oracle(&spec, m, n, 8).unwrap(), &exact, h);
    let coarse = l1(spec.execute(m, n).unwrap().profile.u(), &exact, h);
    assert!(d8 < d4, "{d8:e} !< {d4:e}");
    assert!(d4 < 0.5 * coarse, "{d4:e} vs coarse {coarse:e}");
}

#[test]
fn oracle_and_exact_references_agree_on_smooth_window_orders() {
    let base = Study {
        label: "implicit1".into(),
        spec: smooth_window_spec(0.5, SchemeConfig::new(Scheme::Implicit1)),
        ladder: vec![(320, 640), (640, 1280)],
        reference: Reference::Exact,
        targets: None,
        expect: Expectation::Converge,
        nominal_courant: None,
        mesh_unit: Some(2.0),
    };
    let oracle = Study {
        reference: Reference::Oracle { refine: 4 },
        ..base.clone()
    };
    let eoc = |s: &Study| run_study(s, None).rows[1].eoc.expect("two rungs");
    let (e_exact, e_oracle) = (eoc(&base), eoc(&oracle));
    assert!((e_exact - e_oracle).abs() <= 0.05, "{e_exact} vs {e_oracle}");
}

#[test]
fn linear_isotherm_translates_mass_at_half_speed() {
    // with F(u) = 2u the first moment of q moves at v/2
    let mut spec = cosine_spec(1.0, SchemeConfig::new(Scheme::Implicit1));
    spec.velocity = VelocityField::constant(1.0);
    spec.bc = BoundarySpec::OneD {
        left: BoundaryKind::Dirichlet(0.0),
        right: BoundaryKind::Outflow,
    };
    spec.t_end = 1.0;
    spec.domain = (-4.0, 14.0);
    let moment = |u: &[f64], m: usize| {
        let h = 18.0 / m as f64;
        let x = |i: usize| -4.0 + (i as f64 + 0.5) * h;
        let mass: f64 = u.iter().sum();
        u.iter().enumerate().map(|(i, v)| x(i) * v).sum::<f64>() / mass
    };
    for scheme in [Scheme::Implicit1, Scheme::Compact2 { omega: 0.5 }, Scheme::HiresWeno] {
        let s = spec.with_scheme(SchemeConfig::new(scheme));
        let m = 720;
        let out = s.execute(m, 40).unwrap();
        let start = moment(s.initial_profile(m).unwrap().u(), m);
        let shift = moment(out.profile.u(), m) - start;
        let tol = if scheme == Scheme::Implicit1 { 1e-9 } else { 1e-3 };
        assert!((shift - 0.5).abs() < tol, "{scheme:?}: shift {shift}");
    }
}

#[test]
fn linear_isotherm_compact_scheme_self_converges_at_second_order() {
    let mut spec = cosine_spec(1.0, SchemeConfig::new(Scheme::Compact2 { omega: 0.5 }));
    spec.velocity = VelocityField::constant(1.0);
    spec.bc = BoundarySpec::OneD {
        left: BoundaryKind::Dirichlet(0.0),
        right: BoundaryKind::Outflow,
    };
    spec.t_end = 1.0;
    let run = |m: usize| spec.execute(m, m / 10).unwrap().profile.u().to_vec();
    let restrict = |fine: &[f64], r: usize| sorption_fv::experiments::restrict_1d(fine, r);
    let reference = run(6400);
    let err = |m: usize| {
        let h = 15.0 / m as f64;
        l1(&run(m), &restrict(&reference, 6400 / m), h)
    };
    let (e1, e2) = (err(400), err(800));
    let order = (e1 / e2).log2();
    assert!(order >= 1.9, "order {order:.3} ({e1:e}, {e2:e})");
}
