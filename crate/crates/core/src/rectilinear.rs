//! Rectilinear two-body free fall parametrised by the eccentric anomaly,
//! its behaviour at the collision and the linearised motion about it.
//!
//! Time is counted from the apocentre where the two points are at rest at
//! separation `2a`. The anomaly `u` runs from 0 (rest) to π (collision) and
//! regularises the fall: `dt = √(a/μ)·r du` stays finite at the collision.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrator::dop853::{Dop853, System};
use crate::roots::newton_bracketed;

/// `(9/2)^{1/3}`.
pub const NEAR_COLLISION_COEFF: f64 = 1.650_963_624_447_314;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectilinearSolution {
    /// Semi-major axis, half the initial separation.
    pub a: f64,
    pub mu: f64,
    /// Time scale `√(a³/μ)`.
    pub n_time: f64,
}

/// Position, velocity and time at one anomaly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectilinearPoint {
    pub r: f64,
    /// `None` at the collision itself.
    pub v: Option<f64>,
    pub t: f64,
    pub collision: bool,
}

impl RectilinearSolution {
    /// Fall from rest at separation `r0`.
    pub fn from_rest(r0: f64, mu: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Domain { what: "r0", value: r0 });
        }
        if !(mu > 0.0) {
            return Err(Error::Domain { what: "mu", value: mu });
        }
        let a = 0.5 * r0;
        Ok(Self { a, mu, n_time: (a * a * a / mu).sqrt() })
    }

    pub fn collapse_time(&self) -> f64 {
        PI * self.n_time
    }

    pub fn eval(&self, u: f64) -> Result<RectilinearPoint> {
        if !(0.0..=PI).contains(&u) {
            return Err(Error::Domain { what: "eccentric anomaly", value: u });
        }
        let half = 0.5 * u;
        let c = half.cos();
        let r = 2.0 * self.a * c * c;
        let t = self.n_time * (u + u.sin());
        if u == PI {
            return Ok(RectilinearPoint { r: 0.0, v: None, t: self.collapse_time(), collision: true });
        }
        let v = -(self.mu / self.a).sqrt() * half.tan();
        Ok(RectilinearPoint { r, v: Some(v), t, collision: false })
    }

    /// Inverse of the time relation `t = n(u + sin u)` on `[0, π]`.
    pub fn anomaly_from_time(&self, t: f64) -> Result<f64> {
        let tc = self.collapse_time();
        if !(0.0..=tc).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        let tau = t / self.n_time;
        if tau <= 0.5 * PI {
            // u + sin u is well conditioned away from π
            return newton_bracketed(
                |u| (u + u.sin() - tau, 1.0 + u.cos()),
                0.0,
                0.5 * PI + 1.0,
                0.5 * tau,
                1e-16,
                200,
            );
        }
        // near the collision solve for ε = π − u from ε − sin ε = π − τ,
        // whose derivative 1 − cos ε vanishes only at the endpoint
        let d = (tc - t) / self.n_time;
        if d == 0.0 {
            return Ok(PI);
        }
        let eps = newton_bracketed(
            |e| (eps_minus_sin(e) - d, 2.0 * (0.5 * e).sin().powi(2)),
            0.0,
            PI,
            (6.0 * d).cbrt().min(PI),
            1e-16,
            200,
        )?;
        Ok(PI - eps)
    }
}

/// `ε − sin ε` without cancellation for small ε.
pub fn eps_minus_sin(e: f64) -> f64 {
    if e.abs() < 0.25 {
        let e2 = e * e;
        // ε³/6 − ε⁵/120 + ε⁷/5040 − ε⁹/362880 + ε¹¹/39916800
        e * e2 / 6.0 * (1.0 - e2 / 20.0 * (1.0 - e2 / 42.0 * (1.0 - e2 / 72.0 * (1.0 - e2 / 110.0))))
    } else {
        e - e.sin()
    }
}

/// Time from rest at separation `r0` to the collision, `π√(a³/μ)` with
/// `a = r0/2`.
pub fn collapse_time(r0: f64, mu: f64) -> Result<f64> {
    Ok(RectilinearSolution::from_rest(r0, mu)?.collapse_time())
}

/// Leading terms of separation and speed a time `dt` before the collision:
/// `r = (9/2)^{1/3} μ^{1/3} dt^{2/3}` and `v = μ^{1/3} dt^{-1/3}`.
///
/// The speed term keeps the unit coefficient of the classical estimate, so
/// `r·v²` from this pair is `1.65096 μ`; the exact solution gives `2μ`.
pub fn near_collision(mu: f64, dt: f64) -> Result<(f64, f64)> {
    if !(dt > 0.0) {
        return Err(Error::Domain { what: "time to collision", value: dt });
    }
    let m3 = mu.cbrt();
    Ok((NEAR_COLLISION_COEFF * m3 * dt.powf(2.0 / 3.0), m3 / dt.cbrt()))
}

/// Deviations from the rectilinear fall in the anomaly variable: `x1` along
/// the line of fall, `y1` across it, with their `u`-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalState {
    pub u: f64,
    pub x1: f64,
    pub y1: f64,
    pub dx1: f64,
    pub dy1: f64,
}

impl VariationalState {
    fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.dx1, self.dy1]
    }

    fn from_array(u: f64, a: [f64; 4]) -> Self {
        Self { u, x1: a[0], y1: a[1], dx1: a[2], dy1: a[3] }
    }
}

struct Linearized;

impl System<4> for Linearized {
    fn rhs(&self, u: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let half = 0.5 * u;
        let tn = half.tan();
        let c2 = half.cos().powi(2);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -tn * y[2] + y[0] / c2;
        dy[3] = -tn * y[3] - y[1] / (2.0 * c2);
    }
}

/// Propagate the linearised equations
/// `x'' + tan(u/2) x' − x/cos²(u/2) = 0`, `y'' + tan(u/2) y' + y/(2cos²(u/2)) = 0`
/// from `init.u` to `u_end`.
pub fn integrate_variational(init: VariationalState, u_end: f64, tol: f64) -> Result<VariationalState> {
    for u in [init.u, u_end] {
        if !(u.abs() < PI) {
            return Err(Error::Domain { what: "eccentric anomaly", value: u });
        }
    }
    if u_end == init.u {
        return Ok(init);
    }
    let dir = (u_end - init.u).signum();
    // integrate in s = dir·u so the step is always positive
    let sys = |s: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        Linearized.rhs(dir * s, y, dy);
        if dir < 0.0 {
            dy.iter_mut().for_each(|v| *v = -*v);
        }
    };
    let mut st = Dop853::<4>::new(tol, tol);
    let mut s = dir * init.u;
    let s_end = dir * u_end;
    let mut y = init.to_array();
    let mut f = [0.0; 4];
    sys.rhs(s, &y, &mut f);
    let mut h = st.initial_step(&sys, s, &y, &f);
    while s < s_end {
        let hh = h.min(s_end - s);
        let (step, next) = st.step(&sys, s, &y, &f, hh).map_err(|e| match e {
            Error::StepCollapse { t } => Error::Domain { what: "anomaly approaching ±π", value: dir * t },
            other => other,
        })?;
        s = if hh == s_end - s { s_end } else { step.x1() };
        y = step.y1;
        f = step.f1;
        h = next;
    }
    Ok(VariationalState::from_array(u_end, y))
}

/// Fundamental solutions of the linearised equations at one anomaly, each
/// as `(value, derivative)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalSolutions {
    pub e1y: (f64, f64),
    pub e2y: (f64, f64),
    pub e1x: (f64, f64),
    /// Second solution of the along-track equation, normalised by
    /// `e2x(0) = 1`, `e2x'(0) = 0` and obtained numerically.
    pub e2x: (f64, f64),
}

pub fn variational_fundamental(u: f64) -> Result<FundamentalSolutions> {
    if !(u.abs() < PI) {
        return Err(Error::Domain { what: "eccentric anomaly", value: u });
    }
    let half = 0.5 * u;
    let c = half.cos();
    let e2x = integrate_variational(
        VariationalState { u: 0.0, x1: 1.0, y1: 0.0, dx1: 0.0, dy1: 0.0 },
        u,
        1e-13,
    )?;
    Ok(FundamentalSolutions {
        e1y: (u.sin(), u.cos()),
        e2y: (0.5 * (1.0 + u.cos()), -0.5 * u.sin()),
        e1x: (2.0 * half.tan(), 1.0 / (c * c)),
        e2x: (e2x.x1, e2x.dx1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_endpoints() {
        let s = RectilinearSolution::from_rest(2.0, 1.0).unwrap();
        let p = s.eval(0.0).unwrap();
        assert_eq!((p.r, p.v, p.t, p.collision), (2.0, Some(-0.0), 0.0, false));
        let p = s.eval(PI).unwrap();
        assert!(p.collision && p.r == 0.0 && p.v.is_none());
        assert_relative_eq!(p.t, PI, epsilon = 1e-15);
    }

    #[test]
    fn eval_quarter() {
        let s = RectilinearSolution::from_rest(2.0, 1.0).unwrap();
        let p = s.eval(PI / 2.0).unwrap();
        assert_relative_eq!(p.r, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.v.unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(p.t, PI / 2.0 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let s = RectilinearSolution::from_rest(2.0, 1.0).unwrap();
        assert!(s.eval(-0.1).is_err());
        assert!(s.eval(3.2).is_err());
        assert!(s.anomaly_from_time(-1.0).is_err());
        assert!(s.anomaly_from_time(PI + 1e-9).is_err());
    }

    #[test]
    fn anomaly_inversion_anchors() {
        let s = RectilinearSolution::from_rest(2.0, 1.0).unwrap();
        assert_eq!(s.anomaly_from_time(0.0).unwrap(), 0.0);
        assert_eq!(s.anomaly_from_time(PI).unwrap(), PI);
        assert_relative_eq!(s.anomaly_from_time(PI / 2.0 + 1.0).unwrap(), PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn collapse_time_values() {
        assert_relative_eq!(collapse_time(2.0, 1.0).unwrap(), PI, epsilon = 1e-15);
        assert!((collapse_time(3f64.sqrt(), 1.0).unwrap() - 2.531895753).abs() < 1e-9);
        assert_relative_eq!(collapse_time(1.0, 2.0).unwrap(), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn near_collision_scaling() {
        let (r1, _) = near_collision(1.0, 1.0).unwrap();
        assert!((r1 - 1.65096).abs() < 1e-5);
        let (r8, _) = near_collision(1.0, 8.0).unwrap();
        assert_relative_eq!(r8, 4.0 * r1, max_relative = 1e-14);
        assert!(near_collision(1.0, 0.0).is_err());
    }

    #[test]
    fn fundamental_initial_values() {
        let f = variational_fundamental(0.0).unwrap();
        assert_eq!(f.e1y, (0.0, 1.0));
        assert_eq!(f.e2y, (1.0, -0.0));
        assert_eq!(f.e1x, (0.0, 1.0));
        assert_eq!(f.e2x, (1.0, 0.0));
        assert!(variational_fundamental(PI).is_err());
    }

    #[test]
    fn zero_deviation_stays_zero() {
        let z = VariationalState { u: 0.0, x1: 0.0, y1: 0.0, dx1: 0.0, dy1: 0.0 };
        let out = integrate_variational(z, 2.0, 1e-12).unwrap();
        assert_eq!(out.to_array(), [0.0; 4]);
    }

    #[test]
    fn integrated_deviation_matches_sine() {
        let init = VariationalState { u: 0.0, x1: 0.0, y1: 0.0, dx1: 0.0, dy1: 1.0 };
        let out = integrate_variational(init, 1.0, 1e-12).unwrap();
        assert!((out.y1 - 1f64.sin()).abs() < 1e-11);
        assert!((out.dy1 - 1f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn backward_integration_matches_tangent() {
        let init = VariationalState { u: 0.0, x1: 0.0, y1: 0.0, dx1: 1.0, dy1: 0.0 };
        let out = integrate_variational(init, -2.0, 1e-12).unwrap();
        assert_relative_eq!(out.x1, 2.0 * (-1f64).tan(), max_relative = 1e-10);
    }
}
