//! Event kinds and the scalar event functions whose sign changes mark them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{accelerations, cross, kinetic_energy, PlanarState, PAIRS};
use crate::split::{binding_energy, outer_binding_energy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    BinaryMinDistance,
    BinaryCollision,
    CollinearConfiguration,
    MinMomentOfInertia,
    BodyAtRest,
    AllAtRest,
    BindingEnergyZero,
    BindingBelowTotal,
    PairEnergyPositive,
    AngularMomentumZeroOfBody,
    TripleCollision,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::BinaryMinDistance,
        EventKind::BinaryCollision,
        EventKind::CollinearConfiguration,
        EventKind::MinMomentOfInertia,
        EventKind::BodyAtRest,
        EventKind::AllAtRest,
        EventKind::BindingEnergyZero,
        EventKind::BindingBelowTotal,
        EventKind::PairEnergyPositive,
        EventKind::AngularMomentumZeroOfBody,
        EventKind::TripleCollision,
    ];

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What an event refers to. Indices are zero based internally and printed
/// one based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    System,
    Body(usize),
    Pair(usize, usize),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::System => write!(f, "all"),
            Subject::Body(i) => write!(f, "{}", i + 1),
            Subject::Pair(i, j) => write!(f, "{}-{}", i + 1, j + 1),
        }
    }
}

impl std::str::FromStr for Subject {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        let bad = || crate::error::Error::Parse(format!("subject {s:?}"));
        let idx = |p: &str| -> crate::error::Result<usize> {
            let k: usize = p.trim().parse().map_err(|_| bad())?;
            if (1..=3).contains(&k) {
                Ok(k - 1)
            } else {
                Err(bad())
            }
        };
        if s == "all" {
            return Ok(Subject::System);
        }
        match s.split_once('-') {
            Some((a, b)) => Ok(Subject::Pair(idx(a)?, idx(b)?)),
            None => Ok(Subject::Body(idx(s)?)),
        }
    }
}

impl Serialize for Subject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Subject {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    pub subject: Subject,
    pub value: f64,
}

/// Set of event kinds to detect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventMask(u16);

impl EventMask {
    pub fn all() -> Self {
        Self(EventKind::ALL.iter().fold(0, |m, k| m | k.bit()))
    }

    /// Only the terminal events (collisions).
    pub fn none() -> Self {
        Self(EventKind::BinaryCollision.bit() | EventKind::TripleCollision.bit())
    }

    pub fn with(self, kind: EventKind) -> Self {
        Self(self.0 | kind.bit())
    }

    pub fn without(self, kind: EventKind) -> Self {
        Self(self.0 & !kind.bit())
    }

    pub fn contains(self, kind: EventKind) -> bool {
        self.0 & kind.bit() != 0
    }
}

impl Default for EventMask {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Crossing {
    Rising,
    Falling,
    Both,
}

impl Crossing {
    pub(crate) fn matches(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after > 0.0 || before < 0.0 && after == 0.0;
        let falling = before > 0.0 && after < 0.0 || before > 0.0 && after == 0.0;
        match self {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Both => rising || falling,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Detector {
    pub kind: EventKind,
    pub subject: Subject,
    pub crossing: Crossing,
}

/// Fixed list of event functions in evaluation order.
pub(crate) fn detectors(mask: EventMask) -> Vec<Detector> {
    let mut out = Vec::new();
    let mut push = |kind, subject, crossing| {
        if mask.contains(kind) {
            out.push(Detector { kind, subject, crossing });
        }
    };
    push(EventKind::CollinearConfiguration, Subject::System, Crossing::Both);
    push(EventKind::MinMomentOfInertia, Subject::System, Crossing::Rising);
    for (i, j) in PAIRS {
        push(EventKind::BinaryMinDistance, Subject::Pair(i, j), Crossing::Rising);
    }
    for i in 0..3 {
        push(EventKind::BodyAtRest, Subject::Body(i), Crossing::Rising);
    }
    push(EventKind::AllAtRest, Subject::System, Crossing::Rising);
    for (i, j) in PAIRS {
        push(EventKind::BindingEnergyZero, Subject::Pair(i, j), Crossing::Both);
    }
    for (i, j) in PAIRS {
        push(EventKind::BindingBelowTotal, Subject::Pair(i, j), Crossing::Falling);
    }
    for (i, j) in PAIRS {
        push(EventKind::PairEnergyPositive, Subject::Pair(i, j), Crossing::Rising);
    }
    for i in 0..3 {
        push(EventKind::AngularMomentumZeroOfBody, Subject::Body(i), Crossing::Both);
    }
    out
}

/// Value of the event function of `d` on a barycentric state, divided by a
/// positive scale so that values are dimensionless and rounding noise can be
/// told apart from genuine sign changes.
pub(crate) fn event_function(d: &Detector, s: &PlanarState, energy: f64) -> f64 {
    let b = &s.bodies;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    match (d.kind, d.subject) {
        (EventKind::CollinearConfiguration, _) => {
            let smax = s.sides().iter().cloned().fold(0.0, f64::max);
            ratio(crate::model::signed_area(s), smax * smax)
        }
        (EventKind::MinMomentOfInertia, _) => ratio(
            b.iter().map(|x| x.mass * x.position.dot(&x.velocity)).sum(),
            b.iter().map(|x| x.mass * x.position.norm() * x.velocity.norm()).sum(),
        ),
        (EventKind::BinaryMinDistance, Subject::Pair(i, j)) => {
            let (dr, dv) = (b[j].position - b[i].position, b[j].velocity - b[i].velocity);
            ratio(dr.dot(&dv), dr.norm() * dv.norm())
        }
        (EventKind::BodyAtRest, Subject::Body(i)) => {
            let a = accelerations(s)[i];
            ratio(b[i].velocity.dot(&a), b[i].velocity.norm() * a.norm())
        }
        (EventKind::AllAtRest, _) => {
            let a = accelerations(s);
            ratio(
                b.iter().zip(&a).map(|(x, a)| x.mass * x.velocity.dot(a)).sum(),
                b.iter().zip(&a).map(|(x, a)| x.mass * x.velocity.norm() * a.norm()).sum(),
            )
        }
        (EventKind::BindingEnergyZero, Subject::Pair(i, j)) => {
            let (e, scale) = pair_energy_scale(s, i, j);
            ratio(e, scale)
        }
        (EventKind::BindingBelowTotal, Subject::Pair(i, j)) => {
            let (e, scale) = pair_energy_scale(s, i, j);
            ratio(e - energy, scale + energy.abs())
        }
        (EventKind::PairEnergyPositive, Subject::Pair(i, j)) => {
            let k = 3 - i - j;
            let e = outer_binding_energy(s, i, j);
            let m12 = b[i].mass + b[j].mass;
            let r = (b[k].position - (b[i].position * b[i].mass + b[j].position * b[j].mass) / m12).norm();
            let u = s.g * m12 * b[k].mass / r;
            ratio(e, (e + u).abs() + u)
        }
        (EventKind::AngularMomentumZeroOfBody, Subject::Body(i)) => ratio(
            cross(&b[i].position, &b[i].velocity),
            b[i].position.norm() * b[i].velocity.norm(),
        ),
        _ => 0.0,
    }
}

/// Sign changes whose larger endpoint magnitude stays below this are taken
/// as rounding noise.
pub(crate) const NOISE_FLOOR: f64 = 1e-10;

fn pair_energy_scale(s: &PlanarState, i: usize, j: usize) -> (f64, f64) {
    let e = binding_energy(s, i, j);
    let u = s.g * s.bodies[i].mass * s.bodies[j].mass / s.distance(i, j);
    (e, (e + u).abs() + u)
}

/// Payload reported with an event and whether it is kept.
pub(crate) fn event_payload(d: &Detector, s: &PlanarState, thresholds: &RestThresholds) -> Option<f64> {
    let b = &s.bodies;
    match (d.kind, d.subject) {
        (EventKind::CollinearConfiguration, _) => Some(s.sides().iter().cloned().fold(0.0, f64::max)),
        (EventKind::MinMomentOfInertia, _) => Some(b.iter().map(|x| x.mass * x.position.norm_squared()).sum()),
        (EventKind::BinaryMinDistance, Subject::Pair(i, j)) => Some(s.distance(i, j)),
        (EventKind::BodyAtRest, Subject::Body(i)) => {
            let v = b[i].velocity.norm();
            (v < thresholds.speed).then_some(v)
        }
        (EventKind::AllAtRest, _) => {
            let t = kinetic_energy(s);
            (t < thresholds.kinetic).then_some(t)
        }
        (EventKind::BindingEnergyZero, Subject::Pair(i, j)) | (EventKind::BindingBelowTotal, Subject::Pair(i, j)) => {
            Some(binding_energy(s, i, j))
        }
        (EventKind::PairEnergyPositive, Subject::Pair(i, j)) => Some(outer_binding_energy(s, i, j)),
        (EventKind::AngularMomentumZeroOfBody, Subject::Body(i)) => Some(b[i].velocity.norm()),
        _ => Some(0.0),
    }
}

/// Index of the body whose position projects between the other two on the
/// line through the longest side.
pub fn middle_body(s: &PlanarState) -> usize {
    let sides = s.sides();
    (0..3).max_by(|&a, &b| sides[a].total_cmp(&sides[b])).unwrap()
}

/// Event subject for a collinear crossing: the middle body.
pub(crate) fn collinear_subject(s: &PlanarState) -> Subject {
    Subject::Body(middle_body(s))
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct RestThresholds {
    pub speed: f64,
    pub kinetic: f64,
}
