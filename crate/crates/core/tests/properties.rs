//! Randomized invariants.

mod common;

use proptest::prelude::*;

use sorption_fv::config::parse_config;
use sorption_fv::exact::StepRiemannSolution;
use sorption_fv::experiments::{cosine_spec, rotation_spec, step_spec};
use sorption_fv::isotherm::{IsothermSpec, NewtonConfig};
use sorption_fv::limiter::{self, cell_limiter, envelope_excess, weno_omega};
use sorption_fv::scheme::{Scheme, SchemeConfig};
use sorption_fv::setup::InitialCondition;

fn implicit_scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![
        Just(Scheme::Implicit1),
        (0.0..=1.0f64).prop_map(|omega| Scheme::Compact2 { omega }),
        Just(Scheme::HiresWeno),
    ]
}

fn any_scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Explicit1), Just(Scheme::Explicit2), implicit_scheme()]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn cell_solve_agrees_with_bisection(p in 0.1..5.0f64, a in 0.1..3.0f64, c in 0.0..50.0f64, r in -2.0..20.0f64) {
        let iso = IsothermSpec { a, p };
        let cfg = NewtonConfig::default();
        let s = iso.solve(c, r, 0.5, &cfg).unwrap();
        let root = common::bisect_cell(a, p, c, r);
        prop_assert!((s.value - root).abs() <= 1e-10 * (1.0 + root.abs()), "{} vs {root}", s.value);
        let residual = iso.f_ext(s.value) + c * s.value - r;
        prop_assert!(residual.abs() <= cfg.abs_tol * r.abs().max(1.0) * 10.0);
    }

    #[test]
    fn weno_weight_is_a_convex_weight(b1 in 1e-12..10.0f64, b2 in 1e-12..10.0f64) {
        let w = weno_omega(b1, b2);
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!((w + weno_omega(b2, b1) - 1.0).abs() < 1e-12);
        // the smoother side gets the larger weight
        if b1 < b2 { prop_assert!(w >= 0.5); }
    }

    #[test]
    fn limited_interface_value_lies_in_its_envelope(
        up in -2.0..2.0f64, center in -2.0..2.0f64, down in -2.0..2.0f64,
        center_old in -2.0..2.0f64, down_old in -2.0..2.0f64,
    ) {
        let (omega, l) = cell_limiter(up, center, down, center_old, down_old, 1e-6);
        prop_assert!((0.0..=1.0).contains(&omega) && (0.0..=1.0).contains(&l));
        prop_assert!(envelope_excess(omega, l, up, center, center_old, down_old) <= 1e-14);
        let d = limiter::correction(omega, up, center, center_old, down_old);
        let lo = up.min(center).min(center_old).min(down_old);
        let hi = up.max(center).max(center_old).max(down_old);
        if (lo..=hi).contains(&(center - 0.5 * d)) { prop_assert_eq!(l, 1.0); }
    }

    #[test]
    fn step_runs_conserve_mass(p in 0.2..4.0f64, scheme in implicit_scheme(), m in 20usize..120, ratio in 1usize..20) {
        let spec = step_spec(p, SchemeConfig::new(scheme));
        let n = (m / ratio).max(1);
        let out = spec.execute(m, n).unwrap();
        let abs_tol = spec.scheme.newton.abs_tol;
        prop_assert!(out.max_defect_q <= m as f64 * abs_tol * 10.0, "defect {:e}", out.max_defect_q);
        prop_assert!(out.ledger.relative_drift() < 1e-7);
    }

    #[test]
    fn implicit_step_runs_stay_in_the_unit_interval(p in 0.2..4.0f64, scheme in implicit_scheme(), m in 20usize..160, ratio in 1usize..25) {
        let spec = step_spec(p, SchemeConfig::new(scheme));
        let out = spec.execute(m, (m / ratio).max(1)).unwrap();
        let (lo, hi) = match scheme {
            // the unlimited compact scheme may oscillate
            Scheme::Compact2 { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (-1e-3, 1.0 + 1e-3),
        };
        prop_assert!(out.min_u >= lo && out.max_u <= hi, "[{}, {}]", out.min_u, out.max_u);
        if scheme == Scheme::HiresWeno {
            prop_assert!(out.max_envelope_excess <= spec.scheme.sweep_tol, "{:e}", out.max_envelope_excess);
        }
    }

    #[test]
    fn explicit_upwind_below_half_courant_is_bounded(p in 0.25..4.0f64, m in 20usize..200) {
        // C_max = 3·M/(5·N) ≤ 0.5
        let n = (6 * m).div_ceil(5);
        let out = step_spec(p, SchemeConfig::new(Scheme::Explicit1)).execute(m, n).unwrap();
        prop_assert!(out.courant <= 0.5 + 1e-12);
        prop_assert!(out.min_u >= -1e-9 && out.max_u <= 1.0 + 1e-9, "[{}, {}]", out.min_u, out.max_u);
    }

    #[test]
    fn constant_states_are_preserved(c in 0.0..2.0f64, p in 0.2..4.0f64, scheme in any_scheme(), v in prop_oneof![Just(-1.0), Just(0.5), Just(2.0)]) {
        let mut spec = step_spec(p, SchemeConfig::new(scheme));
        spec.ic = InitialCondition::Constant(c);
        spec.velocity = sorption_fv::velocity::VelocityField::constant(v);
        spec.bc = sorption_fv::setup::BoundarySpec::OneD {
            left: sorption_fv::setup::BoundaryKind::Dirichlet(c),
            right: sorption_fv::setup::BoundaryKind::Dirichlet(c),
        };
        let n = if matches!(scheme, Scheme::Explicit1 | Scheme::Explicit2) { 200 } else { 10 };
        let out = spec.execute(50, n).unwrap();
        let d = out.profile.u().iter().map(|u| (u - c).abs()).fold(0.0, f64::max);
        prop_assert!(d <= 1e-9 * (1.0 + c), "{d:e}");
    }

    #[test]
    fn exact_step_solution_is_bounded_and_unimodal(p in 0.1..5.0f64, t in 0.05..3.0f64) {
        prop_assume!((p - 1.0).abs() > 1e-3);
        let sol = StepRiemannSolution::new(IsothermSpec { a: 1.0, p });
        let xs: Vec<f64> = (0..=600).map(|i| -0.5 + 5.0 * i as f64 / 600.0).collect();
        let us: Vec<f64> = xs.iter().map(|&x| sol.u(x, t).unwrap()).collect();
        prop_assert!(us.iter().all(|u| (0.0..=1.0).contains(u)));
        let top = us.iter().cloned().fold(0.0, f64::max);
        prop_assert!((top - 1.0).abs() < 1e-12, "plateau lost before interaction");
        let peak = us.iter().position(|&u| u == top).unwrap();
        prop_assert!(us[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(us[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn config_round_trips(
        p in 0.1..5.0f64, a in 0.1..3.0f64, m in 1usize..5000, n in 1usize..5000,
        scheme in prop::sample::select(vec!["explicit1", "explicit2", "implicit1", "compact2", "hires_weno"]),
        tol in 1e-14..1e-6f64,
    ) {
        let text = format!(r#"
dimension = 1
domain = [0.0, 5.0]
M = {m}
N = {n}
t0 = 0.0
T = 3.0
[isotherm]
a = {a}
p = {p}
[scheme]
name = "{scheme}"
[scheme.sweep]
tol = {tol}
[velocity]
kind = "constant"
value = 1.0
[ic]
kind = "step"
[bc]
left = {{ kind = "dirichlet", value = 0.0 }}
right = {{ kind = "outflow" }}
"#);
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&cfg, &again);
        let plan = again.plan().unwrap();
        prop_assert_eq!(plan.spec.iso.p, p);
        prop_assert_eq!(plan.spec.scheme.sweep_tol, tol);
    }
}

#[test]
fn smooth_field_keeps_full_order_away_from_extrema() {
    let n = 204;
    let h = 1.0 / 200.0;
    // a monotone stretch of a sine, predictor shifted slightly from the old field
    let uo: Vec<f64> = (0..n).map(|k| (0.2 + k as f64 * h).sin()).collect();
    let pred: Vec<f64> = (0..n).map(|k| (0.2 + k as f64 * h - 0.3 * h).sin()).collect();
    let st = limiter::compute_1d(&uo, &pred, 1e-6);
    for k in 2..n - 2 {
        assert_eq!(st.l_plus[k], 1.0, "cell {k}");
        assert!((0.4..=0.6).contains(&st.omega_plus[k]), "cell {k}: {}", st.omega_plus[k]);
    }
}

#[test]
fn cosine_and_rotation_runs_conserve_mass() {
    for scheme in [Scheme::Implicit1, Scheme::HiresWeno] {
        let out = cosine_spec(0.5, SchemeConfig::new(scheme)).execute(160, 2).unwrap();
        assert!(out.max_defect_q <= 160.0 * 1e-12 * 10.0, "{:e}", out.max_defect_q);
        assert!(out.ledger.relative_drift() < 1e-7);
        let out = rotation_spec(3.0, SchemeConfig::new(scheme)).execute(40, 4).unwrap();
        assert!(out.max_defect_q <= 1600.0 * 1e-12 * 10.0, "{:e}", out.max_defect_q);
        assert!(out.ledger.relative_drift() < 1e-7);
    }
}
