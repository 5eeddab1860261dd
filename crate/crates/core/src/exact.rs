//! Entropy solution of the step problem
//!
//! ```text
//! u(x, 0) = 1 on (0, 1), 0 elsewhere,   v ≡ 1,
//! ```
//!
//! built from characteristics of the transformed equation
//! `∂t q + ∂x F⁻¹(q) = 0`. A state `u` travels with speed `1/F'(u)` and a
//! jump between `0` and `1` with the Rankine–Hugoniot speed `1/F(1)`.
//!
//! * `p < 1`: the left edge opens a rarefaction fan from `x = 0`, the right
//!   edge is a shock starting at `x = 1`.
//! * `p > 1`: the left edge is a shock starting at `x = 0`, the right edge a
//!   rarefaction fan from `x = 1`.
//! * `p = 1`: the step translates with speed `1/(1 + a)`.
//!
//! The construction holds until the fan meets the shock.

use crate::error::{Result, SolverError};
use crate::isotherm::IsothermSpec;
use crate::quadrature::piecewise_average;

/// Exponents within this distance of one use the translation branch.
const LINEAR_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveStructure {
    /// `p < 1`: rarefaction at `x = 0`, shock at `x = 1`.
    FanLeftShockRight,
    /// `p > 1`: shock at `x = 0`, rarefaction at `x = 1`.
    ShockLeftFanRight,
    Translation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRiemannSolution {
    pub iso: IsothermSpec,
    pub structure: WaveStructure,
    /// First time at which the fan reaches the shock.
    pub t_interact: f64,
}

impl StepRiemannSolution {
    pub fn new(iso: IsothermSpec) -> Self {
        let (a, p) = (iso.a, iso.p);
        let (structure, t_interact) = if (p - 1.0).abs() < LINEAR_BAND {
            (WaveStructure::Translation, f64::INFINITY)
        } else if p < 1.0 {
            (
                WaveStructure::FanLeftShockRight,
                (1.0 + p * a) * (1.0 + a) / (a * (1.0 - p)),
            )
        } else {
            (
                WaveStructure::ShockLeftFanRight,
                (1.0 + p * a) * (1.0 + a) / (a * (p - 1.0)),
            )
        };
        Self {
            iso,
            structure,
            t_interact,
        }
    }

    /// Rankine–Hugoniot speed `[u]/[F(u)] = 1/F(1)` of the jump between 0 and 1.
    pub fn shock_speed(&self) -> f64 {
        1.0 / (1.0 + self.iso.a)
    }

    /// Speed `1/F'(1)` of the state `u = 1`.
    fn speed_of_one(&self) -> f64 {
        1.0 / (1.0 + self.iso.p * self.iso.a)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(SolverError::OutOfValidity(format!("negative time {t}")));
        }
        if t >= self.t_interact {
            return Err(SolverError::OutOfValidity(format!(
                "t = {t} is at or beyond the wave interaction time {}",
                self.t_interact
            )));
        }
        Ok(())
    }

    /// Shock location at time `t` (the trailing edge of the translated step
    /// for `p = 1` is reported as the leading one, `1 + t/F(1)`).
    pub fn shock_position(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.structure {
            WaveStructure::FanLeftShockRight | WaveStructure::Translation => {
                1.0 + t * self.shock_speed()
            }
            WaveStructure::ShockLeftFanRight => t * self.shock_speed(),
        })
    }

    /// `(tail, head)` of the rarefaction fan at time `t`, if there is one.
    pub fn fan_bounds(&self, t: f64) -> Result<Option<(f64, f64)>> {
        self.check_time(t)?;
        Ok(match self.structure {
            WaveStructure::FanLeftShockRight => Some((0.0, t * self.speed_of_one())),
            WaveStructure::ShockLeftFanRight => Some((1.0 + t * self.speed_of_one(), 1.0 + t)),
            WaveStructure::Translation => None,
        })
    }

    /// Points where the solution has a jump or a kink.
    pub fn breakpoints(&self, t: f64) -> Result<Vec<f64>> {
        let mut pts = vec![self.shock_position(t)?];
        match self.fan_bounds(t)? {
            Some((a, b)) => {
                pts.push(a);
                pts.push(b);
            }
            None => pts.push(t * self.shock_speed()),
        }
        Ok(pts)
    }

    /// Fan value where `F'(u) = t/ξ`, `ξ` measured from the fan origin.
    fn fan_value(&self, xi: f64, t: f64) -> f64 {
        let (a, p) = (self.iso.a, self.iso.p);
        let u = ((t / xi - 1.0) / (a * p)).powf(1.0 / (p - 1.0));
        u.clamp(0.0, 1.0)
    }

    /// Solution `u(x, t)`.
    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if t == 0.0 {
            return Ok(if x > 0.0 && x < 1.0 { 1.0 } else { 0.0 });
        }
        let s = self.shock_speed();
        let one = self.speed_of_one();
        Ok(match self.structure {
            WaveStructure::Translation => {
                if x > t * s && x < 1.0 + t * s {
                    1.0
                } else {
                    0.0
                }
            }
            WaveStructure::FanLeftShockRight => {
                let shock = 1.0 + t * s;
                let head = t * one;
                if x <= 0.0 || x >= shock {
                    0.0
                } else if x >= head {
                    1.0
                } else {
                    self.fan_value(x, t)
                }
            }
            WaveStructure::ShockLeftFanRight => {
                let shock = t * s;
                let tail = 1.0 + t * one;
                let head = 1.0 + t;
                if x <= shock || x >= head {
                    0.0
                } else if x <= tail {
                    1.0
                } else {
                    self.fan_value(x - 1.0, t)
                }
            }
        })
    }

    /// `(u, q)` with `q = F(u)`.
    pub fn value(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let u = self.u(x, t)?;
        Ok((u, self.iso.f(u)?))
    }

    /// Average of `u` over `[x_lo, x_hi]` at time `t`.
    pub fn cell_average(&self, x_lo: f64, x_hi: f64, t: f64) -> Result<f64> {
        let breaks = if t > 0.0 {
            self.breakpoints(t)?
        } else {
            vec![0.0, 1.0]
        };
        self.check_time(t)?;
        Ok(piecewise_average(
            |x| self.u(x, t).unwrap_or(0.0),
            x_lo,
            x_hi,
            &breaks,
        ))
    }
}

/// `(u, q)` of the step problem's entropy solution with `a = 1`.
pub fn exact_step_solution(p: f64, x: f64, t: f64) -> Result<(f64, f64)> {
    StepRiemannSolution::new(IsothermSpec::freundlich(p)?).value(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(p: f64) -> StepRiemannSolution {
        StepRiemannSolution::new(IsothermSpec::freundlich(p).unwrap())
    }

    #[test]
    fn linear_translation() {
        let t = 1.3;
        let d = 1e-9;
        assert_eq!(exact_step_solution(1.0, 1.0 + t / 2.0 - d, t).unwrap().0, 1.0);
        assert_eq!(exact_step_solution(1.0, 1.0 + t / 2.0 + d, t).unwrap().0, 0.0);
    }

    #[test]
    fn half_power_shock_and_interaction() {
        let s = sol(0.5);
        assert!((s.shock_position(3.0).unwrap() - 2.5).abs() < 1e-15);
        assert!((s.t_interact - 6.0).abs() < 1e-12);
        assert!(matches!(s.u(1.0, 6.0), Err(SolverError::OutOfValidity(_))));
    }

    #[test]
    fn all_study_exponents_are_pre_interaction_at_t3() {
        for p in [0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0, 3.0, 4.0] {
            assert!(sol(p).t_interact > 3.0, "p={p}");
        }
    }

    #[test]
    fn fan_is_monotone_and_continuous() {
        for p in [0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0, 3.0, 4.0] {
            let s = sol(p);
            let (a, b) = s.fan_bounds(3.0).unwrap().unwrap();
            let n = 2000;
            let mut prev = None;
            for i in 0..=n {
                let x = a + (b - a) * i as f64 / n as f64;
                let u = s.u(x, 3.0).unwrap();
                if let Some(pv) = prev {
                    if p < 1.0 {
                        assert!(u >= pv);
                    } else {
                        assert!(u <= pv);
                    }
                }
                prev = Some(u);
            }
            // junction with the plateau u = 1 and with u = 0
            let (lo, hi) = if p < 1.0 { (a, b) } else { (b, a) };
            let eps = 1e-12;
            let at_one = s.fan_value(if p < 1.0 { hi } else { hi - 1.0 }, 3.0);
            assert!((at_one - 1.0).abs() <= 1e-10, "p={p} {at_one}");
            let near_zero = s.u(if p < 1.0 { lo + eps } else { lo - eps }, 3.0).unwrap();
            assert!(near_zero <= 1e-3, "p={p} {near_zero}");
        }
    }

    #[test]
    fn q_is_isotherm_of_u() {
        let s = sol(0.5);
        for i in 0..50 {
            let x = 0.1 * i as f64;
            let (u, q) = s.value(x, 3.0).unwrap();
            assert_eq!(q, s.iso.f(u).unwrap());
        }
    }

    #[test]
    fn mass_is_conserved() {
        // ∫ F(u) dx = F(1) at all times
        for p in [0.5, 3.0] {
            let s = sol(p);
            let n = 20000;
            let h = 6.0 / n as f64;
            let mass: f64 = (0..n)
                .map(|i| {
                    let x = i as f64 * h;
                    let u = s.cell_average(x, x + h, 2.5).unwrap();
                    // average of F(u) ≈ F(average of u) except in a few cells
                    h * s.iso.f(u).unwrap()
                })
                .sum();
            assert!((mass - 2.0).abs() < 2e-3, "p={p} mass={mass}");
        }
    }
}
