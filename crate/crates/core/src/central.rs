//! Central configurations released from rest: the equilateral (Lagrange)
//! triangle and the collinear (Euler) line, and their homothetic collapse.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{accelerations, com_state, signed_area, Body, PlanarState, Vec2};
use crate::rectilinear;
use crate::roots::newton_bracketed;

/// Residual (relative to the coefficient scale) above which a collinear
/// configuration is rejected.
const QUINTIC_RESIDUAL: f64 = 1e-8;

/// Relative spread of `λ_i` in `r̈_i = −λ_i r_i` tolerated by the central
/// certificate.
const CENTRAL_SPREAD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilateralConfig {
    pub masses: [f64; 3],
    pub side: f64,
    /// Angle of body 1 measured from the +y axis, radians.
    pub orientation: f64,
}

impl EquilateralConfig {
    pub fn new(masses: [f64; 3], side: f64) -> Result<Self> {
        check_masses(masses)?;
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Domain { what: "side", value: side });
        }
        Ok(Self { masses, side, orientation: 0.0 })
    }
}

/// Equilateral triangle at rest with its centre of mass at the origin.
/// Body `k` sits at angle `π/2 + orientation + 2πk/3` on the circumcircle.
pub fn equilateral_state(cfg: &EquilateralConfig, g: f64) -> Result<PlanarState> {
    check_masses(cfg.masses)?;
    let radius = cfg.side / 3f64.sqrt();
    let mut bodies = [Body::at_rest(1.0, 0.0, 0.0)?; 3];
    for (k, b) in bodies.iter_mut().enumerate() {
        let a = PI / 2.0 + cfg.orientation + 2.0 * PI * k as f64 / 3.0;
        *b = Body::at_rest(cfg.masses[k], radius * a.cos(), radius * a.sin())?;
    }
    Ok(PlanarState::new(bodies).with_g(g).recentered())
}

/// Effective mass `(m_j² + m_k² + m_j m_k)^{3/2} / M²` so that body `i`
/// falls towards the centre of mass of an equilateral configuration like a
/// test particle around a point mass `G·M_i`. Returns `G·M_i`.
pub fn mu_particle(masses: [f64; 3], i: usize, g: f64) -> Result<f64> {
    check_masses(masses)?;
    if i > 2 {
        return Err(Error::InvalidConfig(format!("body index {i}")));
    }
    let (mj, mk) = (masses[(i + 1) % 3], masses[(i + 2) % 3]);
    let total: f64 = masses.iter().sum();
    Ok(g * (mj * mj + mk * mk + mj * mk).powf(1.5) / (total * total))
}

fn quintic_coefficients(m: [f64; 3]) -> [f64; 6] {
    let [m1, m2, m3] = m;
    // highest degree first
    [
        m1 + m2,
        3.0 * m1 + 2.0 * m2,
        3.0 * m1 + m2,
        -(m2 + 3.0 * m3),
        -(2.0 * m2 + 3.0 * m3),
        -(m2 + m3),
    ]
}

fn quintic(m: [f64; 3], n: f64) -> (f64, f64) {
    let c = quintic_coefficients(m);
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in &c {
        dp = dp * n + p;
        p = p * n + a;
    }
    (p, dp)
}

/// Relative residual of the Euler quintic at `n`.
pub fn quintic_residual(masses: [f64; 3], n: f64) -> f64 {
    let c = quintic_coefficients(masses);
    let scale: f64 = c.iter().enumerate().map(|(k, a)| a.abs() * n.powi(5 - k as i32)).sum();
    quintic(masses, n).0.abs() / scale
}

/// Unique positive root `n = r_23 / r_12` of Euler's quintic for bodies
/// lying on a line in the order 1, 2, 3.
pub fn euler_quintic_root(masses: [f64; 3]) -> Result<f64> {
    check_masses(masses)?;
    let mut hi = 1.0;
    while quintic(masses, hi).0 <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence("quintic bracket".into()));
        }
    }
    let mut lo = 1.0;
    while quintic(masses, lo).0 >= 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::NoConvergence("quintic bracket".into()));
        }
    }
    newton_bracketed(|n| quintic(masses, n), lo, hi, 0.5 * (lo + hi), 1e-16, 200)
}

/// `G·M·(2 + 1/(1+n)² − 1/n²)`, the collinear parameter written in terms of
/// the total mass. It coincides with [`relative_mu_collinear`] for three equal
/// masses when `M` is read as the common body mass.
pub fn mu_eq_collinear(masses: [f64; 3], n: f64, g: f64) -> f64 {
    let total: f64 = masses.iter().sum();
    g * total * (2.0 + 1.0 / (1.0 + n).powi(2) - 1.0 / (n * n))
}

/// Parameter `μ` with `ẍ = −μ/x²` for the separation `x = r_12` of a collinear
/// central configuration.
pub fn relative_mu_collinear(masses: [f64; 3], n: f64, g: f64) -> f64 {
    let [m1, m2, m3] = masses;
    g * (m1 + m2 + m3 * (1.0 / (1.0 + n).powi(2) - 1.0 / (n * n)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollinearConfig {
    /// Masses in line order.
    pub masses: [f64; 3],
    /// Separation of the first two bodies.
    pub x: f64,
    /// `r_23 / r_12`.
    pub n: f64,
}

impl CollinearConfig {
    /// Configuration with the ratio taken from the quintic.
    pub fn new(masses: [f64; 3], x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain { what: "x", value: x });
        }
        let n = euler_quintic_root(masses)?;
        Ok(Self { masses, x, n })
    }

    pub fn relative_mu(&self, g: f64) -> f64 {
        relative_mu_collinear(self.masses, self.n, g)
    }
}

/// Bodies at rest on the x axis, centre of mass at the origin.
pub fn collinear_state(cfg: &CollinearConfig, g: f64) -> Result<PlanarState> {
    check_masses(cfg.masses)?;
    if !(cfg.n > 0.0) {
        return Err(Error::Domain { what: "n", value: cfg.n });
    }
    let res = quintic_residual(cfg.masses, cfg.n);
    if !(res <= QUINTIC_RESIDUAL) {
        return Err(Error::InvalidConfig(format!(
            "n = {} is not a root of the quintic (residual {res:e})",
            cfg.n
        )));
    }
    let [m1, m2, m3] = cfg.masses;
    let (x, n) = (cfg.x, cfg.n);
    let total = m1 + m2 + m3;
    let xi = [
        -x * (m2 + m3 * (1.0 + n)) / total,
        x * (m1 - m3 * n) / total,
        x * (n * m2 + m1 * (1.0 + n)) / total,
    ];
    let bodies = [
        Body::at_rest(m1, xi[0], 0.0)?,
        Body::at_rest(m2, xi[1], 0.0)?,
        Body::at_rest(m3, xi[2], 0.0)?,
    ];
    Ok(PlanarState::new(bodies).with_g(g))
}

/// Common factor `λ` with `r̈_i = −λ (r_i − c)` for every body, or
/// [`Error::NotCentral`] carrying the observed relative spread.
pub fn central_certificate(state: &PlanarState) -> Result<f64> {
    state.check_nonsingular()?;
    let (c, _) = com_state(state);
    let acc = accelerations(state);
    let scale = state.perimeter();
    let amax = acc.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut lambdas = Vec::with_capacity(3);
    for (b, a) in state.bodies.iter().zip(&acc) {
        let r: Vec2 = b.position - c;
        if r.norm() < 1e-12 * scale {
            // a body sitting at the centre of mass must feel no force
            if a.norm() > 1e-9 * amax {
                return Err(Error::NotCentral(a.norm() / amax));
            }
            continue;
        }
        let lambda = -a.dot(&r) / r.norm_squared();
        let off = (a + r * lambda).norm() / a.norm().max(f64::MIN_POSITIVE);
        if off > CENTRAL_SPREAD {
            return Err(Error::NotCentral(off));
        }
        lambdas.push(lambda);
    }
    let hi = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi.abs();
    if !(lo > 0.0) || spread > CENTRAL_SPREAD {
        return Err(Error::NotCentral(spread));
    }
    Ok(0.5 * (hi + lo))
}

/// Homothetic collapse time of a central configuration released from rest.
///
/// Equilateral triangles use the side with `μ = GM`, collinear lines the
/// outer-pair separation with the relative parameter; both agree with
/// `π / √(8λ)`.
pub fn collapse_time_config(state: &PlanarState) -> Result<f64> {
    let lambda = central_certificate(state)?;
    let vmax = state.bodies.iter().map(|b| b.velocity.norm()).fold(0.0, f64::max);
    if vmax > 0.0 {
        return Err(Error::InvalidConfig("configuration is not at rest".into()));
    }
    let sides = state.sides();
    let smax = sides.iter().cloned().fold(0.0, f64::max);
    let smin = sides.iter().cloned().fold(f64::INFINITY, f64::min);
    let area = signed_area(state).abs();
    if (smax - smin) / smax < 1e-8 {
        return rectilinear::collapse_time(smax, state.g * state.total_mass());
    }
    if area < 1e-8 * smax * smax {
        let (order, x, n) = line_order(state);
        let masses = order.map(|k| state.bodies[k].mass);
        let mu = relative_mu_collinear(masses, n, state.g);
        return rectilinear::collapse_time(x, mu);
    }
    // no other central configurations exist for three bodies
    Ok(PI / (8.0 * lambda).sqrt())
}

/// Line order of a collinear state, the separation of the first two bodies
/// and the ratio of the last separation to it.
fn line_order(state: &PlanarState) -> ([usize; 3], f64, f64) {
    let (i, j) = {
        let s = state.sides();
        // the longest side joins the two outer bodies
        let k = (0..3).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        crate::model::OPPOSITE_PAIRS[k]
    };
    let mid = 3 - i - j;
    let x = state.distance(i, mid);
    let n = state.distance(mid, j) / x;
    ([i, mid, j], x, n)
}

fn check_masses(masses: [f64; 3]) -> Result<()> {
    for m in masses {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Domain { what: "mass", value: m });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::potential_energy;
    use approx::assert_relative_eq;

    #[test]
    fn equilateral_anchor_collapse_time() {
        let cfg = EquilateralConfig::new([1.0 / 3.0; 3], 3f64.sqrt()).unwrap();
        let s = equilateral_state(&cfg, 1.0).unwrap();
        assert_relative_eq!(potential_energy(&s), -1.0 / (3.0 * 3f64.sqrt()), epsilon = 1e-14);
        let t = collapse_time_config(&s).unwrap();
        assert!((t - 2.531_895_753).abs() < 1e-8, "{t}");
        let lambda = central_certificate(&s).unwrap();
        assert_relative_eq!(PI / (8.0 * lambda).sqrt(), t, epsilon = 1e-12);
    }

    #[test]
    fn particle_mass_reproduces_radial_acceleration() {
        let masses = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0];
        let cfg = EquilateralConfig::new(masses, 1.3).unwrap();
        let s = equilateral_state(&cfg, 1.0).unwrap();
        let acc = accelerations(&s);
        for i in 0..3 {
            let r = s.bodies[i].position.norm();
            let mu = mu_particle(masses, i, 1.0).unwrap();
            assert_relative_eq!(acc[i].norm(), mu / (r * r), epsilon = 1e-12);
        }
        assert!((mu_particle(masses, 0, 1.0).unwrap() - 0.38348).abs() < 1e-3);
    }

    #[test]
    fn quintic_root_matches_force_balance_bisection() {
        for masses in [[1.0 / 6.0, 0.5, 1.0 / 3.0], [1.0 / 3.0; 3], [0.7, 0.01, 0.29]] {
            let n = euler_quintic_root(masses).unwrap();
            // independent check: relative accelerations of the two gaps scale
            // with their lengths
            let [m1, m2, m3] = masses;
            let imbalance = |n: f64| {
                let a1 = m2 + m3 / (1.0 + n).powi(2);
                let a2 = -m1 + m3 / (n * n);
                let a3 = -(m1 / (1.0 + n).powi(2) + m2 / (n * n));
                (a3 - a2) - n * (a2 - a1)
            };
            let mut lo: f64 = 1e-6;
            let mut hi = 1e6;
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if imbalance(mid).signum() == imbalance(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_relative_eq!(n, lo, max_relative = 1e-12);
        }
    }

    #[test]
    fn quintic_reference_roots() {
        let n = euler_quintic_root([1.0 / 6.0, 0.5, 1.0 / 3.0]).unwrap();
        assert!((n - 1.1212).abs() < 1e-4, "{n}");
        assert_relative_eq!(euler_quintic_root([1.0; 3]).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn equal_mass_mu_eq_value() {
        assert_relative_eq!(mu_eq_collinear([1.0 / 3.0; 3], 1.0, 1.0), 1.25, epsilon = 1e-15);
        assert_relative_eq!(relative_mu_collinear([1.0; 3], 1.0, 1.0), 1.25, epsilon = 1e-15);
    }

    #[test]
    fn collinear_state_is_central_with_consistent_time() {
        let cfg = CollinearConfig::new([1.0 / 6.0, 0.5, 1.0 / 3.0], 1.0).unwrap();
        let s = collinear_state(&cfg, 1.0).unwrap();
        let (c, _) = com_state(&s);
        assert!(c.norm() < 1e-15);
        let lambda = central_certificate(&s).unwrap();
        let t = collapse_time_config(&s).unwrap();
        assert_relative_eq!(t, PI / (8.0 * lambda).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            t,
            rectilinear::collapse_time(1.0, cfg.relative_mu(1.0)).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_non_root_ratio() {
        let mut cfg = CollinearConfig::new([1.0 / 3.0; 3], 1.0).unwrap();
        cfg.n = 1.01;
        assert!(matches!(collinear_state(&cfg, 1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn generic_triangle_is_not_central() {
        let s = PlanarState::new([
            Body::at_rest(1.0, 0.0, 0.0).unwrap(),
            Body::at_rest(1.0, 1.0, 0.0).unwrap(),
            Body::at_rest(1.0, 0.2, 0.7).unwrap(),
        ]);
        assert!(matches!(collapse_time_config(&s), Err(Error::NotCentral(_))));
    }
}
