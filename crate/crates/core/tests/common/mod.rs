//! Helpers shared by the integration tests.
//!
//! The fixed-point oracles do not touch the solver kernels: they assemble
//! the implicit upwind system from scratch and solve it by damped Jacobi
//! iteration with bisection for the scalar cell equations.

#![allow(dead_code)]

/// `u + a·u^p` for `u ≥ 0`, extended linearly below zero.
pub fn freundlich(a: f64, p: f64, u: f64) -> f64 {
    if u > 0.0 {
        u + a * u.powf(p)
    } else {
        u
    }
}

/// Root of `F(u) + c·u = r` by bisection to the last bit.
pub fn bisect_cell(a: f64, p: f64, c: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return r / (1.0 + c);
    }
    let (mut lo, mut hi) = (0.0_f64, r / (1.0 + c));
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if freundlich(a, p, mid) + c * mid > r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

const DAMPING: f64 = 0.7;
const TOL: f64 = 1e-14;
const MAX_ITERS: usize = 200_000;

/// Implicit upwind on `[x0, x1]` with zero inflow data on both sides.
/// `v` is sampled at the edges; returns the interior values after `steps`.
pub fn implicit_upwind_1d(
    (x0, x1): (f64, f64),
    u0: &[f64],
    (a, p): (f64, f64),
    v: impl Fn(f64) -> f64,
    (t_span, steps): (f64, usize),
) -> Vec<f64> {
    let m = u0.len();
    let h = (x1 - x0) / m as f64;
    let lambda = t_span / steps as f64 / h;
    let ve: Vec<f64> = (0..=m).map(|e| v(x0 + e as f64 * h)).collect();
    let mut u = u0.to_vec();
    for _ in 0..steps {
        let q: Vec<f64> = u.iter().map(|&x| freundlich(a, p, x)).collect();
        let at = |w: &[f64], i: isize| if i < 0 || i >= m as isize { 0.0 } else { w[i as usize] };
        let mut converged = false;
        for _ in 0..MAX_ITERS {
            let mut change = 0.0_f64;
            let next: Vec<f64> = (0..m)
                .map(|i| {
                    let (vl, vr) = (ve[i], ve[i + 1]);
                    let c = lambda * (vr.max(0.0) - vl.min(0.0));
                    let inflow = vl.max(0.0) * at(&u, i as isize - 1) - vr.min(0.0) * at(&u, i as isize + 1);
                    let target = bisect_cell(a, p, c, q[i] + lambda * inflow);
                    let new = (1.0 - DAMPING) * u[i] + DAMPING * target;
                    change = change.max((new - u[i]).abs());
                    new
                })
                .collect();
            u = next;
            if change < TOL {
                converged = true;
                break;
            }
        }
        assert!(converged, "oracle iteration did not converge");
    }
    u
}

/// 2D implicit upwind on `[x0, x1]²` with zero inflow data, cell values
/// row-major by `y` then `x`.
pub fn implicit_upwind_2d(
    (x0, x1): (f64, f64),
    u0: &[f64],
    (a, p): (f64, f64),
    vel: impl Fn(f64, f64) -> (f64, f64),
    (t_span, steps): (f64, usize),
) -> Vec<f64> {
    let m = (u0.len() as f64).sqrt().round() as usize;
    assert_eq!(m * m, u0.len());
    let h = (x1 - x0) / m as f64;
    let lambda = t_span / steps as f64 / h;
    let edge = |e: usize| x0 + e as f64 * h;
    let center = |i: usize| x0 + (i as f64 + 0.5) * h;
    // vx[j][e]: x-edge e of row j; wy[i][e]: y-edge e of column i
    let vx: Vec<Vec<f64>> = (0..m).map(|j| (0..=m).map(|e| vel(edge(e), center(j)).0).collect()).collect();
    let wy: Vec<Vec<f64>> = (0..m).map(|i| (0..=m).map(|e| vel(center(i), edge(e)).1).collect()).collect();
    let mut u = u0.to_vec();
    for _ in 0..steps {
        let q: Vec<f64> = u.iter().map(|&x| freundlich(a, p, x)).collect();
        let at = |w: &[f64], i: isize, j: isize| {
            if i < 0 || j < 0 || i >= m as isize || j >= m as isize {
                0.0
            } else {
                w[j as usize * m + i as usize]
            }
        };
        let mut converged = false;
        for _ in 0..MAX_ITERS {
            let mut change = 0.0_f64;
            let mut next = vec![0.0; m * m];
            for j in 0..m {
                for i in 0..m {
                    let (vl, vr) = (vx[j][i], vx[j][i + 1]);
                    let (wb, wt) = (wy[i][j], wy[i][j + 1]);
                    let c = lambda * (vr.max(0.0) - vl.min(0.0) + wt.max(0.0) - wb.min(0.0));
                    let (ii, jj) = (i as isize, j as isize);
                    let inflow = vl.max(0.0) * at(&u, ii - 1, jj) - vr.min(0.0) * at(&u, ii + 1, jj)
                        + wb.max(0.0) * at(&u, ii, jj - 1)
                        - wt.min(0.0) * at(&u, ii, jj + 1);
                    let k = j * m + i;
                    let target = bisect_cell(a, p, c, q[k] + lambda * inflow);
                    next[k] = (1.0 - DAMPING) * u[k] + DAMPING * target;
                    change = change.max((next[k] - u[k]).abs());
                }
            }
            u = next;
            if change < TOL {
                converged = true;
                break;
            }
        }
        assert!(converged, "oracle iteration did not converge");
    }
    u
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l1(a: &[f64], b: &[f64], vol: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * vol
}

pub mod degeneration {
    //! Largest per-cell gap between a second-order step with every limiter
    //! value forced to zero and the first-order implicit step, on random
    //! smooth fields.

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use sorption_fv::experiments::{cosine_spec, rotation_spec};
    use sorption_fv::field::Field;
    use sorption_fv::scheme::{Scheme, SchemeConfig};
    use sorption_fv::setup::Built;
    use sorption_fv::{solver1d, solver2d};

    /// A few random Fourier modes kept inside `(0, 1)`.
    fn smooth_field(rng: &mut ChaCha8Rng) -> impl Fn(f64, f64) -> f64 {
        let modes: Vec<(f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(0.02..0.12),
                    rng.gen_range(0.3..2.5),
                    rng.gen_range(0.3..2.5),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        move |x, y| 0.5 + modes.iter().map(|(a, kx, ky, ph)| a * (kx * x + ky * y + ph).sin()).sum::<f64>()
    }

    fn zeroed(scheme: Scheme) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(scheme);
        cfg.force_first_order = true;
        cfg
    }

    fn gap(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    const EXPONENTS: [f64; 5] = [0.25, 0.5, 2.0, 4.0, 0.75];

    /// `(hires gap, compact gap)` per field, on the sign-changing cosine velocity.
    pub fn gaps_1d(seed: u64, fields: usize) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..fields)
            .map(|i| {
                let p = EXPONENTS[i % EXPONENTS.len()];
                let Ok(Built::OneD(run, _)) = cosine_spec(p, SchemeConfig::new(Scheme::Implicit1)).build(200, 4)
                else {
                    unreachable!("1D spec")
                };
                let pr = &run.problem;
                let f = smooth_field(&mut rng);
                let mut field = Field::sample_1d(&pr.grid, &pr.iso, |x| f(x, 0.0));
                pr.fill_ghosts(&mut field, 0.0);
                let tau = run.tau();
                let base = solver1d::step_implicit1(pr, &field, 0.0, tau, &SchemeConfig::new(Scheme::Implicit1))
                    .unwrap()
                    .0;
                let (hires, lim, _) =
                    solver1d::step_hires_weno(pr, &field, 0.0, tau, &zeroed(Scheme::HiresWeno)).unwrap();
                assert!(lim.l_plus.iter().chain(&lim.l_minus).all(|&l| l == 0.0));
                let compact =
                    solver1d::step_compact2(pr, &field, 0.0, tau, &zeroed(Scheme::Compact2 { omega: 0.3 }))
                        .unwrap()
                        .0;
                (gap(&base.u, &hires.u), gap(&base.u, &compact.u))
            })
            .collect()
    }

    /// Hires gap per field under solid-body rotation.
    pub fn gaps_2d(seed: u64, fields: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..fields)
            .map(|i| {
                let p = EXPONENTS[i % EXPONENTS.len()];
                let Ok(Built::TwoD(run, _)) = rotation_spec(p, SchemeConfig::new(Scheme::Implicit1)).build(24, 3)
                else {
                    unreachable!("2D spec")
                };
                let pr = &run.problem;
                let f = smooth_field(&mut rng);
                let mut field = Field::sample_2d(&pr.grid, &pr.iso, f);
                pr.fill_ghosts(&mut field);
                let tau = run.tau();
                let base = solver2d::step_implicit1_2d(pr, &field, tau, &SchemeConfig::new(Scheme::Implicit1))
                    .unwrap()
                    .0;
                let hires = solver2d::step_hires_weno_2d(pr, &field, tau, &zeroed(Scheme::HiresWeno)).unwrap().0;
                gap(&base.u, &hires.u)
            })
            .collect()
    }
}
