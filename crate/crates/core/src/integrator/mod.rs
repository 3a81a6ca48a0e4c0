//! Propagation of the planar three-body problem in a regularizing
//! independent variable `u` with `dt/du = s·L^p`, where `L` is the harmonic
//! mean length `(Σ 1/r_ij)^{-1}`. Close approaches and total collapses are
//! resolved by shrinking physical-time steps while the steps in `u` stay of
//! order one.

pub mod dop853;
mod events;
mod tableau;

use serde::Serialize;

pub use dop853::Stats;
pub use events::{middle_body, EventKind, EventMask, EventRecord, Subject};

use crate::central::euler_quintic_root;
use crate::error::{Error, Result};
use crate::model::{self, kinetic_energy, potential_energy, PlanarState, Vec2};
use crate::roots::find_root;
use dop853::{Dense, Dop853, System};
use events::{collinear_subject, detectors, event_function, event_payload, Detector, RestThresholds};

const DIM: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Exponent `p` of the time transform.
    pub time_transform_exponent: f64,
    pub max_steps: usize,
    /// Pair distance at which a binary collision is declared.
    pub collision_radius: f64,
    /// Radius of gyration below which a total collapse is examined.
    pub tc_radius: f64,
    /// Continue through central total collapses by time reversal.
    pub bounce: bool,
    /// Largest change of the normalized side lengths along an approach that
    /// still counts as a homothetic (central) collapse.
    pub central_shape_tol: f64,
    /// Rest events need speeds below this fraction of `√(2|E|/M)`.
    pub rest_fraction: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            time_transform_exponent: 1.0,
            max_steps: 5_000_000,
            collision_radius: 1e-10,
            tc_radius: 1e-4,
            bounce: true,
            central_shape_tol: 1e-8,
            rest_fraction: 0.05,
        }
    }
}

impl IntegratorSettings {
    /// Defaults with both radii scaled by the initial perimeter.
    pub fn for_state(state: &PlanarState) -> Self {
        let p = state.perimeter();
        let d = Self::default();
        Self { collision_radius: d.collision_radius * p, tc_radius: d.tc_radius * p, ..d }
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("integrator settings: {what}")));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.tc_radius > 0.0 && self.collision_radius > 0.0) {
            return bad("collision and collapse radii must be positive");
        }
        if !(0.0..=2.0).contains(&self.time_transform_exponent) {
            return bad("time transform exponent outside [0, 2]");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    BinaryCollision { pair: (usize, usize) },
    TripleCollision { central: bool },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Drift {
    /// `max |E − E0| / |E0|`.
    pub energy_rel: f64,
    /// `max |H − H0|`.
    pub angular_abs: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<PlanarState>,
    pub events: Vec<EventRecord>,
    pub conserved_drift: Drift,
    pub termination: Termination,
    /// Times of central total collapses continued by time reversal.
    pub bounces: Vec<f64>,
    pub stats: Stats,
    /// Events that could not be localized.
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    fn new(first: PlanarState) -> Self {
        Self {
            samples: vec![first],
            events: Vec::new(),
            conserved_drift: Drift::default(),
            termination: Termination::Completed,
            bounces: Vec::new(),
            stats: Stats::default(),
            diagnostics: Vec::new(),
        }
    }

    pub fn last(&self) -> &PlanarState {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &EventRecord> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

/// Newtonian accelerations of a nonsingular state.
pub fn accelerations(state: &PlanarState) -> Result<[Vec2; 3]> {
    state.check_nonsingular()?;
    Ok(model::accelerations(state))
}

/// Radius of gyration `√(J/M)` about the centre of mass and its rate.
pub fn gyration(state: &PlanarState) -> (f64, f64) {
    let s = state.recentered();
    let m = s.total_mass();
    let j: f64 = s.bodies.iter().map(|b| b.mass * b.position.norm_squared()).sum();
    let dj: f64 = s.bodies.iter().map(|b| b.mass * b.position.dot(&b.velocity)).sum();
    let rg = (j / m).sqrt();
    (rg, dj / (m * rg))
}

/// Jacobi coordinates for the inner pair `(i, j)`: `r = r_j − r_i`,
/// `R = r_k − c_ij` and their rates, plus `t`. The barycentre moves uniformly
/// and is kept aside, so a tight pair is stored with full relative precision.
#[derive(Clone, Copy, Debug)]
struct Jacobi {
    inner: (usize, usize),
    outer: usize,
    masses: [f64; 3],
    g: f64,
    com: Vec2,
    com_vel: Vec2,
    t0: f64,
}

impl Jacobi {
    fn new(state: &PlanarState, inner: (usize, usize)) -> Self {
        let (com, com_vel) = model::com_state(state);
        Self {
            inner,
            outer: 3 - inner.0 - inner.1,
            masses: state.masses(),
            g: state.g,
            com,
            com_vel,
            t0: state.t,
        }
    }

    /// Frame whose inner pair is the closest one.
    fn closest(state: &PlanarState) -> Self {
        Self::new(state, state.min_separation().0)
    }

    fn split_masses(&self) -> (f64, f64, f64) {
        let (i, j) = self.inner;
        (self.masses[i], self.masses[j], self.masses[self.outer])
    }

    fn pack(&self, s: &PlanarState) -> [f64; DIM] {
        let (i, j) = self.inner;
        let (mi, mj, _) = self.split_masses();
        let mij = mi + mj;
        let (a, b, c) = (&s.bodies[i], &s.bodies[j], &s.bodies[self.outer]);
        let r = b.position - a.position;
        let v = b.velocity - a.velocity;
        let big_r = c.position - (a.position * mi + b.position * mj) / mij;
        let big_v = c.velocity - (a.velocity * mi + b.velocity * mj) / mij;
        [r.x, r.y, big_r.x, big_r.y, v.x, v.y, big_v.x, big_v.y, s.t]
    }

    fn unpack(&self, y: &[f64; DIM], template: &PlanarState) -> PlanarState {
        let (i, j) = self.inner;
        let (mi, mj, mk) = self.split_masses();
        let mij = mi + mj;
        let total = mij + mk;
        let t = y[8];
        let c = self.com + self.com_vel * (t - self.t0);
        let r = Vec2::new(y[0], y[1]);
        let big_r = Vec2::new(y[2], y[3]);
        let v = Vec2::new(y[4], y[5]);
        let big_v = Vec2::new(y[6], y[7]);
        let q = c - big_r * (mk / total);
        let qv = self.com_vel - big_v * (mk / total);
        let mut s = *template;
        s.t = t;
        s.bodies[i].position = q - r * (mj / mij);
        s.bodies[j].position = q + r * (mi / mij);
        s.bodies[self.outer].position = c + big_r * (mij / total);
        s.bodies[i].velocity = qv - v * (mj / mij);
        s.bodies[j].velocity = qv + v * (mi / mij);
        s.bodies[self.outer].velocity = self.com_vel + big_v * (mij / total);
        s
    }

    /// `r_j − r_i`, `r_k − r_i`, `r_k − r_j` from the relative vectors only.
    fn pair_vectors(&self, y: &[f64; DIM]) -> [Vec2; 3] {
        let (mi, mj, _) = self.split_masses();
        let mij = mi + mj;
        let r = Vec2::new(y[0], y[1]);
        let big_r = Vec2::new(y[2], y[3]);
        [r, big_r + r * (mj / mij), big_r - r * (mi / mij)]
    }

    fn energy(&self, y: &[f64; DIM]) -> f64 {
        let (mi, mj, mk) = self.split_masses();
        let mij = mi + mj;
        let total = mij + mk;
        let [dij, dik, djk] = self.pair_vectors(y);
        let v2 = y[4] * y[4] + y[5] * y[5];
        let big_v2 = y[6] * y[6] + y[7] * y[7];
        let kinetic = 0.5 * (mi * mj / mij) * v2
            + 0.5 * (mij * mk / total) * big_v2
            + 0.5 * total * self.com_vel.norm_squared();
        kinetic - self.g * (mi * mj / dij.norm() + mi * mk / dik.norm() + mj * mk / djk.norm())
    }

    fn angular_momentum(&self, y: &[f64; DIM]) -> f64 {
        let (mi, mj, mk) = self.split_masses();
        let mij = mi + mj;
        let total = mij + mk;
        let c = self.com + self.com_vel * (y[8] - self.t0);
        (mi * mj / mij) * (y[0] * y[5] - y[1] * y[4])
            + (mij * mk / total) * (y[2] * y[7] - y[3] * y[6])
            + total * model::cross(&c, &self.com_vel)
    }
}

struct Regularized {
    frame: Jacobi,
    scale: f64,
    exponent: f64,
}

fn harmonic_length(d: &[Vec2; 3]) -> f64 {
    1.0 / d.iter().map(|v| 1.0 / v.norm()).sum::<f64>()
}

/// Scale `s` making `dt/du` equal to `r_min^p` at the start.
fn transform_scale(state: &PlanarState, exponent: f64) -> f64 {
    let b = &state.bodies;
    let d = [
        b[1].position - b[0].position,
        b[2].position - b[0].position,
        b[2].position - b[1].position,
    ];
    let (_, rmin) = state.min_separation();
    (rmin / harmonic_length(&d)).powf(exponent)
}

impl System<DIM> for Regularized {
    fn rhs(&self, _u: f64, y: &[f64; DIM], dy: &mut [f64; DIM]) {
        let (mi, mj, mk) = self.frame.split_masses();
        let mij = mi + mj;
        let total = mij + mk;
        let g = self.frame.g;
        let d = self.frame.pair_vectors(y);
        let [qij, qik, qjk] = d.map(|v| {
            let r2 = v.norm_squared();
            v / (r2 * r2.sqrt())
        });
        let acc_r = (qij * -mij + (qjk - qik) * mk) * g;
        let acc_big = (qik * mi + qjk * mj) * (-g * total / mij);
        let w = self.scale * harmonic_length(&d).powf(self.exponent);
        for n in 0..4 {
            dy[n] = w * y[4 + n];
        }
        dy[4] = w * acc_r.x;
        dy[5] = w * acc_r.y;
        dy[6] = w * acc_big.x;
        dy[7] = w * acc_big.y;
        dy[8] = w;
    }

    fn error_scale(&self, y0: &[f64; DIM], y1: &[f64; DIM], rtol: f64, atol: f64) -> [f64; DIM] {
        let size = |a: usize| y0[a].hypot(y0[a + 1]).max(y1[a].hypot(y1[a + 1]));
        // each relative vector is controlled against its own length; the
        // velocities share one scale
        let inner = atol + rtol * size(0);
        let outer = atol + rtol * size(2);
        let vel = atol + rtol * size(4).max(size(6));
        let time = atol + rtol * y0[8].abs().max(y1[8].abs());
        [inner, inner, outer, outer, vel, vel, vel, vel, time]
    }
}

fn normalized_sides(s: &PlanarState) -> [f64; 3] {
    let sides = s.sides();
    let p: f64 = sides.iter().sum();
    sides.map(|x| x / p)
}

/// Whether the shape is close to one of the central configurations.
fn near_central_shape(s: &PlanarState, tol: f64) -> bool {
    let sides = s.sides();
    let smax = sides.iter().cloned().fold(0.0, f64::max);
    let smin = sides.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax / smin - 1.0 < tol {
        return true;
    }
    let area = model::signed_area(s).abs();
    if area > tol * smax * smax {
        return false;
    }
    let mid = middle_body(s);
    let (i, j) = model::OPPOSITE_PAIRS[mid];
    let masses = [s.bodies[i].mass, s.bodies[mid].mass, s.bodies[j].mass];
    match euler_quintic_root(masses) {
        Ok(n) => ((s.distance(mid, j) / s.distance(i, mid)) / n - 1.0).abs() < tol,
        Err(_) => false,
    }
}

/// Continue a certified central collapse by time reversal. `approach` holds
/// the samples leading to the collapse, the last one closest to it. Returns
/// the extrapolated collapse time and the state mirrored about it: same
/// positions, reversed velocities, time `2·T_c − t`.
pub fn bounce_continue(reference: &PlanarState, approach: &[PlanarState], shape_tol: f64) -> Result<(f64, PlanarState)> {
    let last = approach.last().ok_or_else(|| Error::InvalidConfig("empty approach".into()))?;
    let reference = normalized_sides(reference);
    for s in approach {
        let dev = normalized_sides(s)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > shape_tol {
            return Err(Error::NonCentralCollapse);
        }
    }
    let t_c = collapse_extrapolation(last)?;
    Ok((t_c, mirror(&approach[0], t_c)))
}

/// The state reached at `2 t_c − t` by time reversal about a collapse at `t_c`.
pub fn mirror(s: &PlanarState, t_c: f64) -> PlanarState {
    let mut out = s.reversed();
    out.t = 2.0 * t_c - s.t;
    out
}

/// Whether an event is still an event of the same kind after time reversal.
fn reversible(kind: EventKind) -> bool {
    !matches!(
        kind,
        EventKind::BindingBelowTotal | EventKind::PairEnergyPositive | EventKind::TripleCollision | EventKind::BinaryCollision
    )
}

/// `t + (2/3) r_g / |ṙ_g|`, from `r_g ∝ (T_c − t)^{2/3}`.
fn collapse_extrapolation(s: &PlanarState) -> Result<f64> {
    let (rg, drg) = gyration(s);
    if !(drg < 0.0) {
        return Err(Error::InvalidConfig("not approaching a collapse".into()));
    }
    Ok(s.t + 2.0 / 3.0 * rg / drg.abs())
}

/// Integrate to `t_end`. Errors abort without a trajectory; see
/// [`propagate`] for the partial result.
pub fn integrate(state: &PlanarState, t_end: f64, settings: &IntegratorSettings, mask: EventMask) -> Result<Trajectory> {
    let (traj, err) = propagate(state, t_end, settings, mask);
    match err {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Integrate to `t_end`, returning whatever was computed together with the
/// error that stopped the run, if any.
pub fn propagate(
    state: &PlanarState,
    t_end: f64,
    settings: &IntegratorSettings,
    mask: EventMask,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::new(*state);
    let err = Runner::new(state, t_end, settings, mask).and_then(|mut r| r.run(&mut traj));
    (traj, err.err())
}

struct Runner<'a> {
    settings: &'a IntegratorSettings,
    mask: EventMask,
    t_end: f64,
    template: PlanarState,
    scale: f64,
    dop: Dop853<DIM>,
    dets: Vec<Detector>,
    energy0: f64,
    angular0: f64,
    rest: RestThresholds,
    /// Normalized sides of the initial state, the reference for central collapses.
    shape_ref: [f64; 3],
}

impl<'a> Runner<'a> {
    fn new(state: &PlanarState, t_end: f64, settings: &'a IntegratorSettings, mask: EventMask) -> Result<Self> {
        settings.validate()?;
        state.check_nonsingular()?;
        if !(t_end > state.t) || !t_end.is_finite() {
            return Err(Error::InvalidConfig(format!("t_end = {t_end} must exceed t = {}", state.t)));
        }
        let energy0 = kinetic_energy(state) + potential_energy(state);
        let m = state.total_mass();
        let vchar = (2.0 * energy0.abs() / m).sqrt();
        let speed = settings.rest_fraction * vchar;
        Ok(Self {
            settings,
            mask,
            t_end,
            template: *state,
            scale: transform_scale(state, settings.time_transform_exponent),
            dop: Dop853::new(settings.rel_tol, settings.abs_tol),
            dets: detectors(mask),
            energy0,
            angular0: {
                let frame = Jacobi::closest(state);
                frame.angular_momentum(&frame.pack(state))
            },
            rest: RestThresholds { speed, kinetic: 0.5 * m * speed * speed },
            shape_ref: normalized_sides(state),
        })
    }

    fn event_values(&self, s: &PlanarState) -> Vec<f64> {
        let b = s.recentered();
        self.dets.iter().map(|d| event_function(d, &b, self.energy0)).collect()
    }

    /// Drift measured on the internal relative coordinates, which carry more
    /// precision than the reconstructed positions during close approaches.
    fn record_drift(&self, traj: &mut Trajectory, frame: &Jacobi, y: &[f64; DIM]) {
        let e = frame.energy(y);
        let de = (e - self.energy0).abs() / self.energy0.abs().max(f64::MIN_POSITIVE);
        let dh = (frame.angular_momentum(y) - self.angular0).abs();
        let d = &mut traj.conserved_drift;
        d.energy_rel = d.energy_rel.max(de);
        d.angular_abs = d.angular_abs.max(dh);
    }

    fn run(&mut self, traj: &mut Trajectory) -> Result<()> {
        let mut start = self.template;
        let mut steps = 0usize;
        let result = loop {
            match self.leg(&start, traj, &mut steps) {
                Ok(Some(next)) => start = next,
                Ok(None) => break Ok(()),
                Err(e) => break Err(e),
            }
        };
        traj.stats = self.dop.stats;
        result
    }

    /// Integrate from `start` until the end, a terminal event or a central
    /// collapse. Returns the restart state after a bounce.
    fn leg(&mut self, start: &PlanarState, traj: &mut Trajectory, steps: &mut usize) -> Result<Option<PlanarState>> {
        let mut sys = Regularized {
            frame: Jacobi::closest(start),
            scale: self.scale,
            exponent: self.settings.time_transform_exponent,
        };
        let mut y = sys.frame.pack(start);
        let mut u = 0.0;
        let mut f = [0.0; DIM];
        sys.rhs(u, &y, &mut f);
        self.dop.reset();
        // a small fraction of the local dynamical time, expressed in u
        let l = harmonic_length(&sys.frame.pair_vectors(&y));
        let t_dyn = (l.powi(3) / (start.g * start.total_mass())).sqrt();
        let mut h = 1e-3 * t_dyn / f[8];
        let mut g_prev = self.event_values(start);
        let shape_ref = self.shape_ref;
        let leg_events = traj.events.len();
        let mut shape_dev: f64 = 0.0;
        let mut leg_samples = vec![*start];
        loop {
            *steps += 1;
            if *steps > self.settings.max_steps {
                return Err(Error::MaxSteps { steps: self.settings.max_steps, t: y[8] });
            }
            let (mut step, h_next) = self.dop.step(&sys, u, &y, &f, h)?;
            let mut last = false;
            if step.y1[8] >= self.t_end {
                let dense = self.dop.dense(&sys, &step);
                let t_end = self.t_end;
                let us = find_root(|x| dense.eval(x)[8] - t_end, step.x0, step.x1(), 1e-15 * step.h.abs(), 200)?;
                step = self.dop.fixed_step(&sys, step.x0, &step.y0, &step.f0, us - step.x0);
                step.y1[8] = self.t_end;
                last = true;
            }
            let frame = sys.frame;
            let s1 = frame.unpack(&step.y1, &self.template);
            let g1 = self.event_values(&s1);
            let dense = if self.dets.is_empty() && !self.near_binary(&s1) {
                None
            } else {
                Some(self.dop.dense(&sys, &step))
            };
            let mut found = match &dense {
                Some(d) => self.locate_events(&frame, d, &g_prev, &g1, step.y0[8], step.y1[8], traj),
                None => Vec::new(),
            };

            if let Some(d) = &dense {
                if let Some((t_bc, pair, s_bc, y_bc)) = self.binary_collision(&frame, d)? {
                    found.retain(|e| e.t <= t_bc);
                    traj.events.extend(found);
                    if self.mask.contains(EventKind::BinaryCollision) {
                        let e_rel = crate::split::binding_energy(&s_bc, pair.0, pair.1);
                        traj.events.push(EventRecord {
                            t: t_bc,
                            kind: EventKind::BinaryCollision,
                            subject: Subject::Pair(pair.0, pair.1),
                            value: e_rel,
                        });
                    }
                    if s_bc.t > traj.last().t {
                        traj.samples.push(s_bc);
                    }
                    self.record_drift(traj, &frame, &y_bc);
                    traj.termination = Termination::BinaryCollision { pair };
                    return Ok(None);
                }
            }

            traj.events.extend(found);
            traj.samples.push(s1);
            leg_samples.push(s1);
            self.record_drift(traj, &frame, &step.y1);
            let dev = normalized_sides(&s1)
                .iter()
                .zip(&shape_ref)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            shape_dev = shape_dev.max(dev);

            let (rg, drg) = gyration(&s1);
            if rg < self.settings.tc_radius && drg < 0.0 && !last {
                let virial = kinetic_energy(&s1) / potential_energy(&s1).abs();
                if (virial - 1.0).abs() < 1e-3 && near_central_shape(&s1, 1e-2) {
                    let central = shape_dev <= self.settings.central_shape_tol;
                    if central && self.settings.bounce {
                        let (t_c, next) =
                            bounce_continue(&self.template, &leg_samples, self.settings.central_shape_tol)?;
                        // the outgoing branch is the incoming one reflected in time;
                        // integrating it instead would amplify the shape error
                        let mirrored: Vec<EventRecord> = traj.events[leg_events..]
                            .iter()
                            .rev()
                            .filter(|e| reversible(e.kind) && 2.0 * t_c - e.t <= self.t_end)
                            .map(|e| EventRecord { t: 2.0 * t_c - e.t, ..*e })
                            .collect();
                        self.push_tc(traj, t_c, rg);
                        traj.bounces.push(t_c);
                        traj.events.extend(mirrored);
                        traj.samples.extend(
                            leg_samples.iter().rev().map(|p| mirror(p, t_c)).filter(|p| p.t <= self.t_end),
                        );
                        if next.t >= self.t_end {
                            traj.termination = Termination::Completed;
                            return Ok(None);
                        }
                        return Ok(Some(next));
                    }
                    let t_c = collapse_extrapolation(&s1)?;
                    self.push_tc(traj, t_c, rg);
                    traj.termination = Termination::TripleCollision { central };
                    return Ok(None);
                }
            }
            if last {
                traj.termination = Termination::Completed;
                return Ok(None);
            }
            g_prev = g1;
            u = step.x1();
            h = h_next;
            let (closest, dmin) = s1.min_separation();
            if closest != frame.inner && dmin < 0.5 * s1.distance(frame.inner.0, frame.inner.1) {
                // re-root the Jacobi tree on the new close pair
                sys.frame = Jacobi::new(&s1, closest);
                y = sys.frame.pack(&s1);
                sys.rhs(u, &y, &mut f);
                self.dop.reset();
            } else {
                y = step.y1;
                f = step.f1;
            }
        }
    }

    fn push_tc(&self, traj: &mut Trajectory, t_c: f64, rg: f64) {
        if self.mask.contains(EventKind::TripleCollision) {
            traj.events.push(EventRecord { t: t_c, kind: EventKind::TripleCollision, subject: Subject::System, value: rg });
        }
    }

    fn near_binary(&self, s: &PlanarState) -> bool {
        s.min_separation().1 < 1e3 * self.settings.collision_radius
    }

    /// Localize sign changes of the event functions inside one step. The step
    /// is split into a few sub-intervals so that double crossings inside a
    /// long step are not lost.
    fn locate_events(
        &self,
        frame: &Jacobi,
        dense: &Dense<DIM>,
        g0: &[f64],
        g1: &[f64],
        t0: f64,
        t1: f64,
        traj: &mut Trajectory,
    ) -> Vec<EventRecord> {
        const PARTS: usize = 4;
        let mut out = Vec::new();
        if self.dets.is_empty() {
            return out;
        }
        let nodes: Vec<f64> = (0..=PARTS).map(|k| dense.x0 + dense.h * k as f64 / PARTS as f64).collect();
        let mut values = vec![g0.to_vec()];
        for &x in &nodes[1..PARTS] {
            values.push(self.event_values(&frame.unpack(&dense.eval(x), &self.template)));
        }
        values.push(g1.to_vec());
        let xtol = 1e-12 * (dense.h / (t1 - t0)).abs();
        for (k, det) in self.dets.iter().enumerate() {
            for p in 0..PARTS {
                let (a, b) = (values[p][k], values[p + 1][k]);
                if !det.crossing.matches(a, b) || a.abs().max(b.abs()) < events::NOISE_FLOOR {
                    continue;
                }
                let func = |x: f64| {
                    let s = frame.unpack(&dense.eval(x), &self.template).recentered();
                    event_function(det, &s, self.energy0)
                };
                let root = find_root(func, nodes[p], nodes[p + 1], xtol.max(4.0 * f64::EPSILON * nodes[p + 1].abs()), 200);
                let x = match root {
                    Ok(x) => x,
                    Err(e) => {
                        traj.diagnostics.push(format!("{} {}: {e}", det.kind, det.subject));
                        continue;
                    }
                };
                let s = frame.unpack(&dense.eval(x), &self.template);
                let bary = s.recentered();
                if let Some(value) = event_payload(det, &bary, &self.rest) {
                    let subject = if det.kind == EventKind::CollinearConfiguration {
                        collinear_subject(&bary)
                    } else {
                        det.subject
                    };
                    out.push(EventRecord { t: s.t, kind: det.kind, subject, value });
                }
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
        out
    }

    /// First time inside the step at which a pair, clearly separated from the
    /// third body, comes closer than the collision radius.
    #[allow(clippy::type_complexity)]
    fn binary_collision(
        &self,
        frame: &Jacobi,
        dense: &Dense<DIM>,
    ) -> Result<Option<(f64, (usize, usize), PlanarState, [f64; DIM])>> {
        let radius = self.settings.collision_radius;
        const PARTS: usize = 8;
        let at = |x: f64| frame.unpack(&dense.eval(x), &self.template);
        let mut prev = dense.x0;
        for k in 1..=PARTS {
            let x = dense.x0 + dense.h * k as f64 / PARTS as f64;
            let s = at(x);
            let ((i, j), d) = s.min_separation();
            let far = s.sides().iter().cloned().fold(0.0, f64::max);
            if d < radius && far > 10.0 * d {
                let root = find_root(|z| at(z).distance(i, j) - radius, prev, x, 1e-14 * dense.h.abs(), 200)
                    .unwrap_or(x);
                let yc = dense.eval(root);
                let sc = frame.unpack(&yc, &self.template);
                return Ok(Some((sc.t, (i, j), sc, yc)));
            }
            prev = x;
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::central::{equilateral_state, EquilateralConfig};
    use crate::model::Body;
    use approx::assert_relative_eq;

    fn burrau() -> PlanarState {
        PlanarState::new([
            Body::at_rest(3.0, 1.0, 3.0).unwrap(),
            Body::at_rest(4.0, -2.0, -1.0).unwrap(),
            Body::at_rest(5.0, 1.0, -1.0).unwrap(),
        ])
    }

    #[test]
    fn burrau_acceleration_of_lightest_body() {
        let s = burrau();
        let a = accelerations(&s).unwrap();
        // hand evaluation: ρ = (r_j − r_3)/r³ towards 4 (distance 5) and 5 (distance 4)
        let rho4 = Vec2::new(-3.0, -4.0) / 125.0;
        let rho5 = Vec2::new(0.0, -4.0) / 64.0;
        let expected = rho4 * 4.0 + rho5 * 5.0;
        assert_relative_eq!(a[0].x, expected.x, epsilon = 1e-15);
        assert_relative_eq!(a[0].y, expected.y, epsilon = 1e-15);
        let total: Vec2 = s.bodies.iter().zip(&a).map(|(b, a)| a * b.mass).sum();
        assert!(total.norm() < 1e-14);
    }

    #[test]
    fn symmetric_middle_body_feels_nothing() {
        let s = PlanarState::new([
            Body::at_rest(0.4, -1.0, 0.0).unwrap(),
            Body::at_rest(0.7, 0.0, 0.0).unwrap(),
            Body::at_rest(0.4, 1.0, 0.0).unwrap(),
        ]);
        assert_eq!(accelerations(&s).unwrap()[1], Vec2::zeros());
    }

    #[test]
    fn singular_state_rejected() {
        let s = PlanarState::new([
            Body::at_rest(1.0, 0.0, 0.0).unwrap(),
            Body::at_rest(1.0, 0.0, 0.0).unwrap(),
            Body::at_rest(1.0, 1.0, 0.0).unwrap(),
        ]);
        assert!(matches!(accelerations(&s), Err(Error::Singular(..))));
    }

    #[test]
    fn settings_invariants() {
        assert!(IntegratorSettings::default().validate().is_ok());
        let s = IntegratorSettings { tc_radius: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
        let s = IntegratorSettings { rel_tol: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn equilateral_collapse_time_and_no_collinear_event() {
        let cfg = EquilateralConfig::new([1.0 / 3.0; 3], 3f64.sqrt()).unwrap();
        let s = equilateral_state(&cfg, 1.0).unwrap();
        let settings = IntegratorSettings { bounce: false, ..IntegratorSettings::for_state(&s) };
        let traj = integrate(&s, 3.0, &settings, EventMask::all()).unwrap();
        let tc: Vec<_> = traj.events_of(EventKind::TripleCollision).collect();
        assert_eq!(tc.len(), 1);
        assert!((tc[0].t - 2.531_895_753).abs() < 1e-6, "{}", tc[0].t);
        assert_eq!(traj.events_of(EventKind::CollinearConfiguration).count(), 0);
        assert_eq!(traj.termination, Termination::TripleCollision { central: true });
    }

    #[test]
    fn time_reversal_round_trip() {
        let s = burrau();
        let settings = IntegratorSettings::for_state(&s).with_tol(1e-13);
        let fwd = integrate(&s, 1.0, &settings, EventMask::none()).unwrap();
        let mut back = fwd.last().reversed();
        back.t = 0.0;
        let ret = integrate(&back, 1.0, &settings, EventMask::none()).unwrap();
        let end = ret.last();
        for (a, b) in end.bodies.iter().zip(&s.bodies) {
            assert!((a.position - b.position).norm() < 1e-10);
            assert!((a.velocity + b.velocity).norm() < 1e-10);
        }
    }

    #[test]
    fn lands_on_end_time() {
        let s = burrau();
        let traj = integrate(&s, 0.75, &IntegratorSettings::for_state(&s), EventMask::none()).unwrap();
        assert_eq!(traj.last().t, 0.75);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }
}
