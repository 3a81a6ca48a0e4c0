//! State types, conserved quantities and triangle geometry of the planar
//! three-body problem.
//!
//! Units follow the usual celestial-mechanics convention: `G = 1` and, for
//! most canned setups, total mass 1. The gravitational constant is still
//! carried on every state so other unit systems work unchanged.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Pairs in the order used for sides: `(1,2)`, `(2,0)`, `(0,1)` so that side
/// `k` is the one opposite body `k`.
pub const OPPOSITE_PAIRS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// The three unordered pairs in lexicographic order.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Relative pairwise distance below which the potential is treated as
/// divergent.
pub const SINGULAR_RATIO: f64 = 1e-13;

/// Planar cross product `a × b` (z component).
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// One point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Body {
    pub mass: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl Body {
    pub fn new(mass: f64, position: Vec2, velocity: Vec2) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Domain { what: "mass", value: mass });
        }
        Ok(Self { mass, position, velocity })
    }

    /// A body starting at rest.
    pub fn at_rest(mass: f64, x: f64, y: f64) -> Result<Self> {
        Self::new(mass, Vec2::new(x, y), Vec2::zeros())
    }
}

/// Time, three bodies and the gravitational constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarState {
    pub t: f64,
    pub bodies: [Body; 3],
    pub g: f64,
}

impl PlanarState {
    pub fn new(bodies: [Body; 3]) -> Self {
        Self { t: 0.0, bodies, g: 1.0 }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.bodies[0].mass, self.bodies[1].mass, self.bodies[2].mass]
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.bodies[i].position - self.bodies[j].position).norm()
    }

    /// Sides `{r_23, r_31, r_12}`, side `k` opposite body `k`.
    pub fn sides(&self) -> [f64; 3] {
        OPPOSITE_PAIRS.map(|(i, j)| self.distance(i, j))
    }

    pub fn perimeter(&self) -> f64 {
        self.sides().iter().sum()
    }

    /// Index pair and value of the smallest separation.
    pub fn min_separation(&self) -> ((usize, usize), f64) {
        PAIRS
            .iter()
            .map(|&(i, j)| ((i, j), self.distance(i, j)))
            .fold(((0, 1), f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    /// Copy shifted and boosted so that the centre of mass is at rest at the
    /// origin.
    pub fn recentered(&self) -> Self {
        let (c, w) = com_state(self);
        let mut out = *self;
        for b in out.bodies.iter_mut() {
            b.position -= c;
            b.velocity -= w;
        }
        out
    }

    /// Copy with every velocity negated.
    pub fn reversed(&self) -> Self {
        let mut out = *self;
        for b in out.bodies.iter_mut() {
            b.velocity = -b.velocity;
        }
        out
    }

    /// Error if some pair is closer than [`SINGULAR_RATIO`] times the
    /// perimeter.
    pub fn check_nonsingular(&self) -> Result<()> {
        let scale = self.perimeter();
        for &(i, j) in &PAIRS {
            let d = self.distance(i, j);
            if !(d > SINGULAR_RATIO * scale) {
                return Err(Error::Singular(i, j, d));
            }
        }
        Ok(())
    }
}

/// Mass-weighted mean position and velocity.
pub fn com_state(state: &PlanarState) -> (Vec2, Vec2) {
    let m = state.total_mass();
    let mut p = Vec2::zeros();
    let mut v = Vec2::zeros();
    for b in &state.bodies {
        p += b.mass * b.position;
        v += b.mass * b.velocity;
    }
    (p / m, v / m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedSet {
    pub energy: f64,
    pub angular_momentum_z: f64,
    /// `Σ m_i |r_i|²` about the coordinate origin.
    pub moment_of_inertia: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub virial_ratio: f64,
}

impl ConservedSet {
    /// `√(J_z / M)`.
    pub fn radius_of_gyration(&self, total_mass: f64) -> f64 {
        (self.moment_of_inertia / total_mass).sqrt()
    }
}

pub fn kinetic_energy(state: &PlanarState) -> f64 {
    state.bodies.iter().map(|b| 0.5 * b.mass * b.velocity.norm_squared()).sum()
}

pub fn potential_energy(state: &PlanarState) -> f64 {
    -PAIRS
        .iter()
        .map(|&(i, j)| state.g * state.bodies[i].mass * state.bodies[j].mass / state.distance(i, j))
        .sum::<f64>()
}

pub fn angular_momentum(state: &PlanarState) -> f64 {
    state
        .bodies
        .iter()
        .map(|b| b.mass * cross(&b.position, &b.velocity))
        .sum()
}

pub fn conserved(state: &PlanarState) -> Result<ConservedSet> {
    state.check_nonsingular()?;
    let kinetic = kinetic_energy(state);
    let potential = potential_energy(state);
    let moment_of_inertia = state
        .bodies
        .iter()
        .map(|b| b.mass * b.position.norm_squared())
        .sum();
    Ok(ConservedSet {
        energy: kinetic + potential,
        angular_momentum_z: angular_momentum(state),
        moment_of_inertia,
        kinetic,
        potential,
        virial_ratio: kinetic / potential.abs(),
    })
}

/// Newtonian accelerations. No singularity check; see
/// [`PlanarState::check_nonsingular`].
pub fn accelerations(state: &PlanarState) -> [Vec2; 3] {
    let mut a = [Vec2::zeros(); 3];
    for &(i, j) in &PAIRS {
        let d = state.bodies[j].position - state.bodies[i].position;
        let r2 = d.norm_squared();
        let f = state.g / (r2 * r2.sqrt());
        a[i] += d * (f * state.bodies[j].mass);
        a[j] -= d * (f * state.bodies[i].mass);
    }
    a
}

/// Moment of inertia about the centre of mass from the sides alone,
/// `Σ_{i<j} m_i m_j r_ij² / M`.
pub fn pairwise_inertia(state: &PlanarState) -> f64 {
    let m = state.total_mass();
    PAIRS
        .iter()
        .map(|&(i, j)| {
            state.bodies[i].mass * state.bodies[j].mass * state.distance(i, j).powi(2) / m
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleGeometry {
    /// `{r_23, r_31, r_12}`.
    pub sides: [f64; 3],
    /// Distances of each body to the centre of mass.
    pub com_radii: [f64; 3],
    /// Half the cross product `(r_2 − r_1) × (r_3 − r_1)`.
    pub signed_area: f64,
}

pub fn signed_area(state: &PlanarState) -> f64 {
    let [a, b, c] = state.bodies.map(|b| b.position);
    0.5 * cross(&(b - a), &(c - a))
}

pub fn triangle_geometry(state: &PlanarState) -> TriangleGeometry {
    let (c, _) = com_state(state);
    TriangleGeometry {
        sides: state.sides(),
        com_radii: state.bodies.map(|b| (b.position - c).norm()),
        signed_area: signed_area(state),
    }
}

/// Mass matrix mapping squared sides `{r_23², r_31², r_12²}` to squared
/// distances from the centre of mass, scaled by `M²`.
fn side_to_radius_matrix(m: [f64; 3]) -> Matrix3<f64> {
    let [m1, m2, m3] = m;
    Matrix3::new(
        -m2 * m3,
        (m2 + m3) * m3,
        (m2 + m3) * m2,
        (m3 + m1) * m3,
        -m3 * m1,
        (m3 + m1) * m1,
        (m1 + m2) * m2,
        (m1 + m2) * m1,
        -m1 * m2,
    )
}

/// Squared CoM radii `r_i²` from squared sides.
pub fn com_radii_sq_from_sides(masses: [f64; 3], sides_sq: [f64; 3]) -> [f64; 3] {
    let total: f64 = masses.iter().sum();
    let r = side_to_radius_matrix(masses) * Vector3::from(sides_sq) / (total * total);
    [r[0], r[1], r[2]]
}

/// Inverse of [`com_radii_sq_from_sides`], by solving the linear system.
pub fn sides_sq_from_com_radii(masses: [f64; 3], radii_sq: [f64; 3]) -> Result<[f64; 3]> {
    let total: f64 = masses.iter().sum();
    let lu = side_to_radius_matrix(masses).lu();
    let s = lu
        .solve(&(Vector3::from(radii_sq) * total * total))
        .ok_or_else(|| Error::InvalidConfig("singular mass matrix".into()))?;
    Ok([s[0], s[1], s[2]])
}

/// `T/|V|` for every sample.
pub fn virial_ratio_trace<'a, I>(samples: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a PlanarState>,
{
    samples
        .into_iter()
        .map(|s| kinetic_energy(s) / potential_energy(s).abs())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn equilateral_unit_circle(masses: [f64; 3]) -> PlanarState {
        let bodies = [0, 1, 2].map(|k| {
            let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
            Body::at_rest(masses[k], a.cos(), a.sin()).unwrap()
        });
        PlanarState::new(bodies)
    }

    #[test]
    fn com_of_symmetric_triangle_is_origin() {
        let s = equilateral_unit_circle([1.0 / 3.0; 3]);
        let (p, v) = com_state(&s);
        assert!(p.norm() < 1e-15 && v.norm() == 0.0);
    }

    #[test]
    fn com_shifts_linearly() {
        let mut s = equilateral_unit_circle([1.0 / 3.0; 3]);
        s.bodies[0].position.x += 0.3;
        let (p, _) = com_state(&s);
        assert_relative_eq!(p.x, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn equilateral_energy_anchor() {
        let s = equilateral_unit_circle([1.0 / 3.0; 3]);
        let c = conserved(&s).unwrap();
        // -1/(3 sqrt 3)
        assert_relative_eq!(c.energy, -1.0 / (3.0 * 3f64.sqrt()), epsilon = 1e-14);
        assert_eq!(c.kinetic, 0.0);
        assert_eq!(c.angular_momentum_z, 0.0);
        assert_relative_eq!(c.moment_of_inertia, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.radius_of_gyration(1.0), 1.0, epsilon = 1e-14);
        assert_eq!(c.virial_ratio, 0.0);
    }

    #[test]
    fn singular_state_is_rejected() {
        let b = [
            Body::at_rest(1.0, 0.0, 0.0).unwrap(),
            Body::at_rest(1.0, 0.0, 0.0).unwrap(),
            Body::at_rest(1.0, 1.0, 0.0).unwrap(),
        ];
        assert!(matches!(conserved(&PlanarState::new(b)), Err(Error::Singular(0, 1, _))));
    }

    #[test]
    fn nonpositive_mass_is_rejected() {
        assert!(Body::at_rest(0.0, 0.0, 0.0).is_err());
        assert!(Body::at_rest(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn equilateral_radii_follow_mass_formula() {
        let m = [0.01, 0.09, 0.9];
        let r = 1.7;
        let radii = com_radii_sq_from_sides(m, [r * r; 3]);
        for i in 0..3 {
            let (j, k) = OPPOSITE_PAIRS[i];
            let expect = (m[j] * m[j] + m[k] * m[k] + m[j] * m[k]) * r * r;
            assert_relative_eq!(radii[i], expect, max_relative = 1e-14);
        }
        let eq = com_radii_sq_from_sides([1.0 / 3.0; 3], [r * r; 3]);
        for v in eq {
            assert_relative_eq!(v, r * r / 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn inverse_mass_relation_recovers_sides() {
        let m = [0.2, 0.3, 0.5];
        let sides_sq = [1.3, 0.7, 1.1];
        let radii = com_radii_sq_from_sides(m, sides_sq);
        let back = sides_sq_from_com_radii(m, radii).unwrap();
        for k in 0..3 {
            assert_relative_eq!(back[k], sides_sq[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn free_fall_virial_trace_starts_at_zero() {
        let s = equilateral_unit_circle([0.2, 0.3, 0.5]);
        assert_eq!(virial_ratio_trace([&s]), vec![0.0]);
    }

    #[test]
    fn signed_area_flips_with_orientation() {
        let s = equilateral_unit_circle([1.0; 3]);
        let mut t = s;
        t.bodies.swap(1, 2);
        assert!(signed_area(&s) > 0.0);
        assert_relative_eq!(signed_area(&t), -signed_area(&s), epsilon = 1e-15);
    }
}
