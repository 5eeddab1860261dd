//! Freundlich isotherm `F(u) = u + a·u^p` and the scalar Newton kernel.
//!
//! Every scheme eventually reduces to scalar equations of the form
//!
//! ```text
//! F(u) + c·u = r,    c ≥ 0,
//! ```
//!
//! one per finite volume. Because `F` is strictly increasing the root is
//! unique, and a safeguarded Newton iteration (bisection fallback on a
//! bracket) always finds it.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Parameters `(a, p)` of the Freundlich isotherm `Ψ(u) = a·u^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsothermSpec {
    pub a: f64,
    pub p: f64,
}

/// Tolerances of the scalar Newton solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// Residual tolerance on `|F(u) + c·u − r|`, scaled by `max(1, |r|)`.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Floor applied to `u` inside derivative evaluations.
    pub reg_floor: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 50,
            reg_floor: 1e-6,
        }
    }
}

impl NewtonConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.abs_tol > 0.0) {
            out.push(format!("scheme.newton.abs_tol must be > 0, got {}", self.abs_tol));
        }
        if self.max_iter < 1 {
            out.push("scheme.newton.max_iter must be >= 1".into());
        }
        if !(self.reg_floor > 0.0) {
            out.push(format!(
                "scheme.newton.reg_floor must be > 0, got {}",
                self.reg_floor
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(SolverError::InvalidParameter(m)),
            None => Ok(()),
        }
    }
}

/// Result of a scalar solve: root and the Newton iterations spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolve {
    pub value: f64,
    pub iterations: usize,
}

impl IsothermSpec {
    pub fn new(a: f64, p: f64) -> Result<Self> {
        let s = Self { a, p };
        s.validate()?;
        Ok(s)
    }

    /// The `a = 1` Freundlich isotherm used throughout the experiments.
    pub fn freundlich(p: f64) -> Result<Self> {
        Self::new(1.0, p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(SolverError::InvalidParameter(format!(
                "isotherm.a must be > 0, got {}",
                self.a
            )));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(SolverError::InvalidParameter(format!(
                "isotherm.p must be > 0, got {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `F(u) = u + a·u^p` for `u ≥ 0`.
    pub fn f(&self, u: f64) -> Result<f64> {
        if u < 0.0 || u.is_nan() {
            return Err(SolverError::Domain(format!(
                "isotherm evaluated at negative concentration u = {u}"
            )));
        }
        Ok(self.f_ext(u))
    }

    /// `F` continued linearly (`F(u) = u`) to negative arguments.
    ///
    /// Undershoots produced by second-order reconstructions are then still
    /// well defined and the scalar equations stay monotone.
    #[inline]
    pub fn f_ext(&self, u: f64) -> f64 {
        if u > 0.0 {
            u + self.a * u.powf(self.p)
        } else {
            u
        }
    }

    /// Retardation factor `F'(u) = 1 + p·a·ũ^(p−1)` with `ũ = max(u, reg_floor)`.
    #[inline]
    pub fn df(&self, u: f64, cfg: &NewtonConfig) -> f64 {
        let ur = u.max(cfg.reg_floor);
        1.0 + self.p * self.a * ur.powf(self.p - 1.0)
    }

    /// Inverse `u = F⁻¹(q)` for `q ≥ 0`.
    pub fn invert(&self, q: f64, cfg: &NewtonConfig) -> Result<f64> {
        if q < 0.0 || q.is_nan() {
            return Err(SolverError::Domain(format!(
                "isotherm inverse evaluated at negative q = {q}"
            )));
        }
        self.solve(0.0, q, q, cfg).map(|s| s.value)
    }

    /// Solves `F(u) + c·u = r` for `u`, starting from `guess`.
    ///
    /// `F` is extended linearly below zero, so `r ≤ 0` has the closed-form
    /// root `r / (1 + c)`. Otherwise the root lies in
    /// `[0, min(r / (1 + c), (r / a)^(1/p))]` and Newton steps leaving that
    /// bracket are replaced by bisection.
    pub fn solve(&self, c: f64, r: f64, guess: f64, cfg: &NewtonConfig) -> Result<ScalarSolve> {
        debug_assert!(c >= 0.0);
        if !r.is_finite() {
            return Err(SolverError::NewtonNonConvergence {
                iterations: 0,
                last: guess,
                residual: r,
            });
        }
        if r <= 0.0 {
            return Ok(ScalarSolve {
                value: r / (1.0 + c),
                iterations: 0,
            });
        }

        let mut lo = 0.0_f64;
        let mut hi = r / (1.0 + c);
        let power_bound = (r / self.a).powf(1.0 / self.p);
        if power_bound.is_finite() && power_bound < hi {
            hi = power_bound;
        }

        let mut x = if guess.is_finite() {
            guess.clamp(lo, hi)
        } else {
            hi
        };
        let tol = cfg.abs_tol * r.max(1.0);
        let mut iterations = 0;
        // length of the step before last; Newton must at least halve it
        let mut step_old = hi - lo;
        let mut step = step_old;
        loop {
            let g = self.f_ext(x) + c * x - r;
            if g.abs() <= tol {
                return Ok(ScalarSolve {
                    value: x,
                    iterations,
                });
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            // bracket collapsed to round-off: the root is pinned
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(ScalarSolve {
                    value: x,
                    iterations,
                });
            }
            if iterations >= cfg.max_iter {
                return Err(SolverError::NewtonNonConvergence {
                    iterations,
                    last: x,
                    residual: g,
                });
            }
            iterations += 1;
            let slope = self.df(x, cfg) + c;
            let newton = x - g / slope;
            let slow = 2.0 * (newton - x).abs() > step_old;
            step_old = step;
            if newton > lo && newton < hi && !slow {
                step = (newton - x).abs();
                x = newton;
            } else {
                step = 0.5 * (hi - lo);
                x = lo + step;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(p: f64) -> IsothermSpec {
        IsothermSpec::freundlich(p).unwrap()
    }

    #[test]
    fn f_examples() {
        assert_eq!(iso(0.5).f(0.0).unwrap(), 0.0);
        assert_eq!(iso(0.5).f(1.0).unwrap(), 2.0);
        assert!((iso(3.0).f(0.5).unwrap() - 0.625).abs() < 1e-15);
        assert!(matches!(iso(0.5).f(-0.1), Err(SolverError::Domain(_))));
    }

    #[test]
    fn df_examples() {
        let cfg = NewtonConfig::default();
        assert_eq!(iso(2.0).df(0.5, &cfg), 2.0);
        assert!((iso(0.5).df(0.0, &cfg) - 501.0).abs() < 1e-9);
        assert_eq!(iso(1.0).df(7.0, &cfg), 2.0);
    }

    #[test]
    fn invert_examples() {
        let cfg = NewtonConfig::default();
        assert_eq!(iso(0.5).invert(0.0, &cfg).unwrap(), 0.0);
        assert!((iso(0.5).invert(2.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!((iso(3.0).invert(0.625, &cfg).unwrap() - 0.5).abs() < 1e-12);
        assert!(iso(0.5).invert(-1.0, &cfg).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(IsothermSpec::new(0.0, 1.0).is_err());
        assert!(IsothermSpec::new(1.0, -1.0).is_err());
        let cfg = NewtonConfig {
            abs_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tiny_rhs_small_p_converges() {
        let cfg = NewtonConfig::default();
        for &r in &[1e-300, 1e-40, 1e-12, 1e-3] {
            let s = iso(0.25).solve(20.0, r, 0.7, &cfg).unwrap();
            let g = iso(0.25).f_ext(s.value) + 20.0 * s.value - r;
            assert!(g.abs() <= 1e-12, "r={r} g={g}");
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = NewtonConfig {
            max_iter: 1,
            ..Default::default()
        };
        let err = iso(0.25).solve(0.0, 5.0, 1e-9, &cfg).unwrap_err();
        assert!(matches!(err, SolverError::NewtonNonConvergence { .. }));
    }

    #[test]
    fn negative_rhs_uses_linear_branch() {
        let cfg = NewtonConfig::default();
        let s = iso(0.5).solve(3.0, -0.4, 0.2, &cfg).unwrap();
        assert_eq!(s.value, -0.1);
    }
}
