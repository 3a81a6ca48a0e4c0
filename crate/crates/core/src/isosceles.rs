//! Equal-mass isosceles subproblem.
//!
//! The vertex body sits on the symmetry axis at `(2x/3, 0)` and the base pair
//! at `(-x/3, ±y)`, so the centre of mass stays at the origin. Base-pair
//! collisions are regularized with `y = w²`, `dt = y dτ`, which turns every
//! binary collision into a smooth passage of `w` through zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::dop853::{Dense, Dop853, System};
use crate::model::{Body, PlanarState, Vec2};
use crate::roots::find_root;

const DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoscelesState {
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub m: f64,
    pub g: f64,
    pub t: f64,
}

impl IsoscelesState {
    pub fn new(x: f64, y: f64, xdot: f64, ydot: f64, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Domain { what: "mass", value: m });
        }
        for (what, v) in [("x", x), ("y", y), ("xdot", xdot), ("ydot", ydot)] {
            if !v.is_finite() {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(Self { x, y, xdot, ydot, m, g: 1.0, t: 0.0 })
    }

    /// Free fall from rest with vertex angle `alpha_deg` and the given base length.
    pub fn from_vertex_angle(alpha_deg: f64, base: f64, m: f64) -> Result<Self> {
        if !(alpha_deg > 0.0 && alpha_deg < 180.0) {
            return Err(Error::Domain { what: "vertex angle", value: alpha_deg });
        }
        if !(base > 0.0) {
            return Err(Error::Domain { what: "base length", value: base });
        }
        let y = 0.5 * base;
        let x = y / (0.5 * alpha_deg.to_radians()).tan();
        Self::new(x, y, 0.0, 0.0, m)
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn mu(&self) -> f64 {
        self.g * self.m
    }

    /// Distance from the vertex to either base body.
    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Apex angle in degrees; exceeds 180 once the vertex has passed the base line.
    pub fn vertex_angle(&self) -> f64 {
        2.0 * self.y.abs().atan2(self.x).to_degrees()
    }

    /// Embed as a planar state: bodies 0 and 1 form the base, body 2 is the vertex.
    pub fn to_planar(&self) -> Result<PlanarState> {
        let b0 = Body::new(self.m, Vec2::new(-self.x / 3.0, self.y), Vec2::new(-self.xdot / 3.0, self.ydot))?;
        let b1 = Body::new(self.m, Vec2::new(-self.x / 3.0, -self.y), Vec2::new(-self.xdot / 3.0, -self.ydot))?;
        let b2 = Body::new(self.m, Vec2::new(2.0 * self.x / 3.0, 0.0), Vec2::new(2.0 * self.xdot / 3.0, 0.0))?;
        let mut s = PlanarState::new([b0, b1, b2]).with_g(self.g);
        s.t = self.t;
        Ok(s)
    }
}

pub fn reduced_accel(s: &IsoscelesState) -> Result<(f64, f64)> {
    if !(s.y > 0.0) {
        return Err(Error::Singular(0, 1, s.y));
    }
    let mu = s.mu();
    let rho3 = s.rho().powi(3);
    Ok((-3.0 * mu * s.x / rho3, -mu / (4.0 * s.y * s.y) - mu * s.y / rho3))
}

pub fn reduced_energy(s: &IsoscelesState) -> Result<f64> {
    if s.y == 0.0 {
        return Err(Error::Singular(0, 1, 0.0));
    }
    let mu = s.mu();
    Ok(s.m * (s.xdot * s.xdot / 3.0 + s.ydot * s.ydot - mu / (2.0 * s.y.abs()) - 2.0 * mu / s.rho()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeCoords {
    pub r_g: f64,
    pub theta_c: f64,
    pub r_g_dot: f64,
    pub theta_c_dot: f64,
}

pub fn shape_coords(s: &IsoscelesState) -> Result<ShapeCoords> {
    let big_x = s.x / 3f64.sqrt();
    let big_xd = s.xdot / 3f64.sqrt();
    let r2 = big_x * big_x + s.y * s.y;
    if !(r2 > 0.0) {
        return Err(Error::Domain { what: "radius of gyration", value: 0.0 });
    }
    let r = r2.sqrt();
    let k = (2.0f64 / 3.0).sqrt();
    let rd = (big_x * big_xd + s.y * s.ydot) / r;
    let thd = (big_xd * s.y - big_x * s.ydot) / r2;
    Ok(ShapeCoords { r_g: k * r, theta_c: big_x.atan2(s.y), r_g_dot: k * rd, theta_c_dot: thd })
}

/// Kinetic energy per unit mass from shape coordinates.
pub fn shape_kinetic(c: &ShapeCoords) -> f64 {
    1.5 * (c.r_g_dot * c.r_g_dot + c.r_g * c.r_g * c.theta_c_dot * c.theta_c_dot)
}

/// Potential energy per unit mass from shape coordinates.
pub fn shape_potential_energy(c: &ShapeCoords, mu: f64) -> Result<f64> {
    Ok(-mu * shape_potential(c.theta_c)? / (6f64.sqrt() * c.r_g))
}

pub fn shape_potential(theta_c: f64) -> Result<f64> {
    let c = theta_c.cos();
    if !(theta_c.abs() < std::f64::consts::FRAC_PI_2) || c <= 0.0 {
        return Err(Error::Domain { what: "shape angle", value: theta_c });
    }
    let s = theta_c.sin();
    Ok(1.0 / c + 4.0 / (1.0 + 2.0 * s * s).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SingularityKind {
    /// Base pair collision; carries the finite remainder of the energy.
    Binary { regular_energy: f64 },
    Triple,
    Undecided,
}

/// Relative guards used by [`classify_singularity`].
pub const TC_GUARD: f64 = 1e-8;
pub const BC_GUARD: f64 = 1e-8;

/// Classify a state close to a singularity. `scale` is a reference length of the
/// motion, e.g. the initial radius of gyration.
pub fn classify_singularity(s: &IsoscelesState, scale: f64) -> Result<SingularityKind> {
    let c = shape_coords(s).map_err(|_| Error::Domain { what: "radius of gyration", value: 0.0 })?;
    if c.r_g < TC_GUARD * scale {
        return Ok(SingularityKind::Triple);
    }
    if s.y.abs() < BC_GUARD * s.x.abs() && s.x.abs() > TC_GUARD * scale {
        let mu = s.mu();
        let regular = s.m * (s.xdot * s.xdot / 3.0 - 2.0 * mu / s.x.abs());
        return Ok(SingularityKind::Binary { regular_energy: regular });
    }
    if s.y.abs() < BC_GUARD * scale {
        return Ok(SingularityKind::Undecided);
    }
    Err(Error::Domain { what: "distance to singularity", value: c.r_g })
}

/// Regularized reduced equations in `[x, xdot, w, p, h, t]` with `y = w²`,
/// `p = w ẏ`, `h = ẏ² − μ/(2y)` and `dt/dτ = w²`.
struct Reduced {
    mu: f64,
}

impl System<DIM> for Reduced {
    fn rhs(&self, _tau: f64, y: &[f64; DIM], dy: &mut [f64; DIM]) {
        let [x, xd, w, p, h, _] = *y;
        let w2 = w * w;
        let rho2 = x * x + w2 * w2;
        let inv_rho3 = 1.0 / (rho2 * rho2.sqrt());
        dy[0] = w2 * xd;
        dy[1] = -3.0 * self.mu * x * w2 * inv_rho3;
        dy[2] = 0.5 * p;
        dy[3] = 0.5 * w * h - self.mu * w2 * w2 * w * inv_rho3;
        dy[4] = -2.0 * self.mu * p * w2 * w * inv_rho3;
        dy[5] = w2;
    }

    fn error_scale(&self, y0: &[f64; DIM], y1: &[f64; DIM], rtol: f64, atol: f64) -> [f64; DIM] {
        let big = |n: usize| y0[n].abs().max(y1[n].abs());
        let len = big(0).max(y0[2] * y0[2]).max(y1[2] * y1[2]).max(f64::MIN_POSITIVE);
        let vel = (self.mu / len).sqrt();
        [
            atol + rtol * len,
            atol + rtol * big(1).max(vel),
            atol + rtol * len.sqrt(),
            atol + rtol * big(3).max(self.mu.sqrt()),
            atol + rtol * big(4).max(self.mu / len),
            atol + rtol * big(5),
        ]
    }
}

fn pack(s: &IsoscelesState) -> [f64; DIM] {
    let w = s.y.sqrt();
    [s.x, s.xdot, w, w * s.ydot, s.ydot * s.ydot - s.mu() / (2.0 * s.y), s.t]
}

fn unpack(y: &[f64; DIM], m: f64, g: f64) -> IsoscelesState {
    let w = y[2];
    IsoscelesState { x: y[0], y: w * w, xdot: y[1], ydot: y[3] / w, m, g, t: y[5] }
}

/// Energy from regularized variables, well defined through binary collisions.
fn packed_energy(y: &[f64; DIM], m: f64, mu: f64) -> f64 {
    let w2 = y[2] * y[2];
    let rho = y[0].hypot(w2);
    m * (y[1] * y[1] / 3.0 + y[4] - 2.0 * mu / rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoEventKind {
    BinaryCollision,
    /// The vertex passes through the line of the base pair.
    AxisCrossing,
    /// The vertex velocity changes sign.
    VertexReversal,
    /// The base pair momentarily stops separating or approaching.
    BaseTurn,
    TripleCollision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoEvent {
    pub t: f64,
    pub kind: IsoEventKind,
    pub x: f64,
    pub xdot: f64,
    pub y: f64,
    /// Base speed; unbounded at a binary collision.
    pub ydot: f64,
    pub r_g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoTermination {
    Completed,
    TripleCollision,
    /// Stopped on request after the given number of binary collisions.
    BinaryCollisionLimit,
}

#[derive(Clone, Debug)]
pub struct IsoSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Triple collision is declared when `r_g` falls below this fraction of its initial value.
    pub tc_fraction: f64,
    pub stop_after_bc: Option<usize>,
    pub keep_samples: bool,
}

impl Default for IsoSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_steps: 2_000_000,
            tc_fraction: 1e-9,
            stop_after_bc: None,
            keep_samples: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsoTrajectory {
    pub samples: Vec<IsoscelesState>,
    pub events: Vec<IsoEvent>,
    pub termination: IsoTermination,
    /// Largest relative energy error seen along the run.
    pub energy_drift: f64,
    /// Largest relative energy jump across a single binary collision.
    pub bc_energy_jump: f64,
    pub last: IsoscelesState,
}

impl IsoTrajectory {
    pub fn events_of(&self, kind: IsoEventKind) -> impl Iterator<Item = &IsoEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

fn event_at(dense: &Dense<DIM>, tau: f64, kind: IsoEventKind) -> IsoEvent {
    let y = dense.eval(tau);
    let w2 = y[2] * y[2];
    let rg = (2.0f64 / 3.0).sqrt() * (y[0] * y[0] / 3.0 + w2 * w2).sqrt();
    IsoEvent { t: y[5], kind, x: y[0], xdot: y[1], y: w2, ydot: y[3] / y[2], r_g: rg }
}

/// Propagate the reduced equations to `t_end`, passing through binary
/// collisions and stopping at a triple collision.
pub fn integrate_isosceles(s: &IsoscelesState, t_end: f64, settings: &IsoSettings) -> Result<IsoTrajectory> {
    if !(s.y > 0.0) {
        return Err(Error::Domain { what: "initial base half-width", value: s.y });
    }
    if !(settings.rel_tol > 0.0) || !(settings.tc_fraction > 0.0) {
        return Err(Error::InvalidConfig("isosceles tolerances must be positive".into()));
    }
    let (m, g, mu) = (s.m, s.g, s.mu());
    let sys = Reduced { mu };
    let mut dop = Dop853::<DIM>::new(settings.rel_tol, settings.abs_tol);
    let mut y = pack(s);
    let mut f = [0.0; DIM];
    sys.rhs(0.0, &y, &mut f);
    let e0 = packed_energy(&y, m, mu);
    let escale = e0.abs().max(m * mu / s.rho());
    let rg0 = shape_coords(s)?.r_g;
    let tc_radius = settings.tc_fraction * rg0;
    let t_dyn = (s.rho().powi(3) / mu).sqrt();
    let mut h = 1e-3 * t_dyn / s.y;
    let mut tau = 0.0;
    let mut samples = Vec::new();
    if settings.keep_samples {
        samples.push(*s);
    }
    let mut events = Vec::new();
    let mut drift: f64 = 0.0;
    let mut bc_jump: f64 = 0.0;
    let mut n_bc = 0usize;
    let mut termination = IsoTermination::Completed;
    let mut steps = 0usize;
    let rg_of = |y: &[f64; DIM]| {
        let w2 = y[2] * y[2];
        (2.0f64 / 3.0).sqrt() * (y[0] * y[0] / 3.0 + w2 * w2).sqrt()
    };
    let mut last = *s;
    if t_end <= s.t {
        return Ok(IsoTrajectory {
            samples,
            events,
            termination,
            energy_drift: 0.0,
            bc_energy_jump: 0.0,
            last,
        });
    }

    'outer: loop {
        steps += 1;
        if steps > settings.max_steps {
            return Err(Error::MaxSteps { steps: settings.max_steps, t: y[5] });
        }
        let stepped = dop.step(&sys, tau, &y, &f, h);
        let (mut step, h_next) = match stepped {
            Ok(v) => v,
            Err(Error::StepCollapse { .. }) if rg_of(&y) < 1e-6 * rg0 => {
                // the step size only collapses this close to the origin on a triple collision
                let dense_free = unpack(&y, m, g);
                events.push(IsoEvent {
                    t: y[5],
                    kind: IsoEventKind::TripleCollision,
                    x: y[0],
                    xdot: y[1],
                    y: dense_free.y,
                    ydot: dense_free.ydot,
                    r_g: rg_of(&y),
                });
                termination = IsoTermination::TripleCollision;
                last = dense_free;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut finished = false;
        if step.y1[5] >= t_end {
            let dense = dop.dense(&sys, &step);
            let us = find_root(|u| dense.eval(u)[5] - t_end, step.x0, step.x1(), 1e-15 * step.h.abs(), 200)?;
            step = dop.fixed_step(&sys, step.x0, &step.y0, &step.f0, us - step.x0);
            step.y1[5] = t_end;
            finished = true;
        }
        let dense = dop.dense(&sys, &step);
        const PARTS: usize = 4;
        let nodes: Vec<f64> = (0..=PARTS).map(|k| step.x0 + step.h * k as f64 / PARTS as f64).collect();
        let vals: Vec<[f64; DIM]> = nodes.iter().map(|&u| dense.eval(u)).collect();
        let mut found: Vec<(f64, IsoEventKind)> = Vec::new();
        for p in 0..PARTS {
            let (a, b) = (&vals[p], &vals[p + 1]);
            let (u0, u1) = (nodes[p], nodes[p + 1]);
            let xtol = 1e-15 * step.h.abs().max(f64::MIN_POSITIVE) + 4.0 * f64::EPSILON * u1.abs();
            for (idx, kind) in [
                (2usize, IsoEventKind::BinaryCollision),
                (0, IsoEventKind::AxisCrossing),
                (1, IsoEventKind::VertexReversal),
                (3, IsoEventKind::BaseTurn),
            ] {
                if a[idx] != 0.0 && a[idx].signum() != b[idx].signum() {
                    let root = find_root(|u| dense.eval(u)[idx], u0, u1, xtol, 200)?;
                    found.push((root, kind));
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        let e1 = packed_energy(&step.y1, m, mu);
        let err = (e1 - e0).abs() / escale;
        drift = drift.max(err);
        let mut truncate_at = None;
        for (u, kind) in found {
            let ev = event_at(&dense, u, kind);
            if kind == IsoEventKind::BinaryCollision {
                let before = packed_energy(&step.y0, m, mu);
                bc_jump = bc_jump.max((e1 - before).abs() / escale);
                n_bc += 1;
            }
            events.push(ev);
            if kind == IsoEventKind::BinaryCollision && settings.stop_after_bc == Some(n_bc) {
                truncate_at = Some(u);
                break;
            }
        }
        if let Some(u) = truncate_at {
            let yu = dense.eval(u);
            // w is zero at the stop, so keep the state just short of it
            let mut st = unpack(&yu, m, g);
            if !st.ydot.is_finite() {
                st.ydot = 0.0;
            }
            last = st;
            termination = IsoTermination::BinaryCollisionLimit;
            break 'outer;
        }
        y = step.y1;
        f = step.f1;
        tau = step.x1();
        h = h_next;
        let st = unpack(&y, m, g);
        last = st;
        if settings.keep_samples {
            samples.push(st);
        }
        let rg = rg_of(&y);
        let rg_rate = (y[0] * y[1] / 3.0 + st.y * st.ydot) / rg;
        if rg < tc_radius && rg_rate < 0.0 {
            events.push(IsoEvent { t: y[5], kind: IsoEventKind::TripleCollision, x: y[0], xdot: y[1], y: st.y, ydot: st.ydot, r_g: rg });
            termination = IsoTermination::TripleCollision;
            break;
        }
        if finished {
            break;
        }
    }
    Ok(IsoTrajectory {
        samples,
        events,
        termination,
        energy_drift: drift,
        bc_energy_jump: bc_jump,
        last,
    })
}

/// Which return of the base pair should coincide with the triple collision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TcCase {
    /// Triple collision at the base encounter following `n` binary collisions.
    AfterBinaryCollisions(usize),
    /// Triple collision at the first base encounter after the vertex first reverses.
    AfterVertexReversal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcSolution {
    pub alpha: f64,
    pub evaluations: usize,
    /// Time of the collision on the final probe.
    pub tc_time: f64,
}

/// Signed vertex coordinate at the targeted base encounter, zero on a triple
/// collision. Also returns the encounter time.
fn shoot(s: &IsoscelesState, case: TcCase, settings: &IsoSettings) -> Result<(f64, f64)> {
    let t_max = 1e3 * (s.rho().powi(3) / s.mu()).sqrt();
    let mut st = settings.clone();
    st.keep_samples = false;
    st.stop_after_bc = match case {
        TcCase::AfterBinaryCollisions(n) => Some(n + 1),
        TcCase::AfterVertexReversal => None,
    };
    if let TcCase::AfterBinaryCollisions(n) = case {
        let traj = integrate_isosceles(s, s.t + t_max, &st)?;
        return match traj.termination {
            IsoTermination::TripleCollision => Ok((0.0, traj.last.t)),
            IsoTermination::BinaryCollisionLimit => {
                let ev = traj.events_of(IsoEventKind::BinaryCollision).nth(n).copied();
                let ev = ev.ok_or_else(|| Error::NoConvergence("missing base encounter".into()))?;
                Ok((ev.x, ev.t))
            }
            IsoTermination::Completed => Err(Error::NoConvergence("no base encounter within the time limit".into())),
        };
    }
    // reversal case: integrate in chunks until the event pattern appears
    let mut limit = 2usize;
    loop {
        st.stop_after_bc = Some(limit);
        let traj = integrate_isosceles(s, s.t + t_max, &st)?;
        let reversal = traj.events_of(IsoEventKind::VertexReversal).next().map(|e| e.t);
        if let Some(tr) = reversal {
            if let Some(ev) = traj.events_of(IsoEventKind::BinaryCollision).find(|e| e.t > tr) {
                return Ok((ev.x, ev.t));
            }
        }
        match traj.termination {
            IsoTermination::TripleCollision => return Ok((0.0, traj.last.t)),
            IsoTermination::Completed => {
                return Err(Error::NoConvergence("no base encounter after the vertex reversal".into()))
            }
            IsoTermination::BinaryCollisionLimit => limit *= 2,
        }
        if limit > 1 << 16 {
            return Err(Error::NoConvergence("no base encounter after the vertex reversal".into()));
        }
    }
}

fn bisect_shot<F>(mut eval: F, a: f64, b: f64, xtol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (fa, _) = eval(a)?;
    let (fb, _) = eval(b)?;
    let mut n = 2;
    if fa == 0.0 {
        return Ok((a, eval(a)?.1, n));
    }
    if fb == 0.0 {
        return Ok((b, eval(b)?.1, n));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange(format!("shooting functional on [{a}, {b}]")));
    }
    let (mut lo, mut hi, mut flo) = (a, b, fa);
    let mut t_last = f64::NAN;
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        let (fm, tm) = eval(mid)?;
        n += 1;
        t_last = tm;
        if fm == 0.0 {
            return Ok((mid, tm, n));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if n > 200 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    if t_last.is_nan() {
        t_last = eval(mid)?.1;
    }
    Ok((mid, t_last, n))
}

/// Locate the vertex angle (degrees) whose free fall from rest ends in a
/// triple collision of the requested kind.
pub fn tc_angle_search(case: TcCase, bracket: (f64, f64), tol_deg: f64, settings: &IsoSettings) -> Result<TcSolution> {
    let (a, b) = bracket;
    for v in [a, b] {
        if !(v > 0.0 && v < 180.0) {
            return Err(Error::Domain { what: "vertex angle", value: v });
        }
    }
    if let TcCase::AfterBinaryCollisions(0) = case {
        return Err(Error::InvalidConfig("at least one binary collision is required".into()));
    }
    let eval = |alpha: f64| -> Result<(f64, f64)> {
        let s = IsoscelesState::from_vertex_angle(alpha, 2.0, 1.0)?;
        shoot(&s, case, settings)
    };
    let (alpha, tc_time, evaluations) = bisect_shot(eval, a, b, tol_deg)?;
    Ok(TcSolution { alpha, evaluations, tc_time })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub alpha: f64,
    /// Outward speed of each base body.
    pub v_y: f64,
    pub tc_time: f64,
    pub evaluations: usize,
}

/// Outward base speed that turns the first base encounter of a start with the
/// vertex at rest into a triple collision.
pub fn family_velocity_for_tc(
    alpha_deg: f64,
    height: f64,
    m: f64,
    bracket: (f64, f64),
    settings: &IsoSettings,
) -> Result<FamilyMember> {
    if !(alpha_deg > 0.0 && alpha_deg < 180.0) {
        return Err(Error::Domain { what: "vertex angle", value: alpha_deg });
    }
    if !(height > 0.0) {
        return Err(Error::Domain { what: "height", value: height });
    }
    let y0 = height * (0.5 * alpha_deg.to_radians()).tan();
    let eval = |v: f64| -> Result<(f64, f64)> {
        let s = IsoscelesState::new(height, y0, 0.0, v, m)?;
        shoot(&s, TcCase::AfterBinaryCollisions(0), settings)
    };
    let scale = bracket.0.abs().max(bracket.1.abs()).max(1e-300);
    let (v_y, tc_time, evaluations) = bisect_shot(eval, bracket.0, bracket.1, 1e-9 * scale)?;
    Ok(FamilyMember { alpha: alpha_deg, v_y, tc_time, evaluations })
}
