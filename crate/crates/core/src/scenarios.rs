//! Canned initial conditions and a single entry point that integrates and
//! classifies them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::central::{collapse_time_config, collinear_state, equilateral_state, CollinearConfig, EquilateralConfig};
use crate::error::{Error, Result};
use crate::integrator::{
    propagate, Drift, EventKind, EventMask, EventRecord, IntegratorSettings, Subject, Termination, Trajectory,
};
use crate::isosceles::{
    integrate_isosceles, tc_angle_search, IsoEventKind, IsoSettings, IsoscelesState, TcCase,
};
use crate::model::{conserved, Body, PlanarState, Vec2};
use crate::split::{classify_outcome, EscapeGate, OutcomeClass};

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// Masses 3, 4, 5 at rest on a 3-4-5 right triangle.
    Burrau,
    /// Unit-circumradius equilateral triangle with two vertices nudged sideways.
    NearEquilateral { delta: f64, masses: [f64; 3] },
    /// Burrau's masses on sides 3 and `long_leg` enclosing `angle_deg`.
    Standish { angle_deg: f64, long_leg: f64 },
    Equilateral { masses: [f64; 3], side: f64 },
    /// Euler configuration with masses in line order and first separation `x`.
    Collinear { masses: [f64; 3], x: f64 },
    /// Equal-mass isosceles fall; with `tc_case` set, the angle is first refined
    /// to the nearby triple-collision solution.
    Isosceles { alpha_deg: f64, base: f64, mass: f64, tc_case: Option<TcCase> },
    Custom { state: PlanarState },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Burrau => "burrau",
            Scenario::NearEquilateral { .. } => "near-equilateral",
            Scenario::Standish { .. } => "standish",
            Scenario::Equilateral { .. } => "equilateral",
            Scenario::Collinear { .. } => "collinear",
            Scenario::Isosceles { .. } => "isosceles",
            Scenario::Custom { .. } => "custom",
        }
    }

    pub fn near_equilateral_default() -> Self {
        Scenario::NearEquilateral { delta: 0.01, masses: [1.0 / 3.0; 3] }
    }

    pub fn standish_default() -> Self {
        Scenario::Standish { angle_deg: 91.061, long_leg: 4.689 }
    }

    pub fn equilateral_default() -> Self {
        Scenario::Equilateral { masses: [1.0 / 3.0; 3], side: 3f64.sqrt() }
    }

    pub fn collinear_default() -> Self {
        Scenario::Collinear { masses: [1.0 / 6.0, 1.0 / 2.0, 1.0 / 3.0], x: 1.0 }
    }

    pub fn isosceles_default() -> Self {
        Scenario::Isosceles { alpha_deg: 25.3663, base: 2.0, mass: 1.0, tc_case: Some(TcCase::AfterBinaryCollisions(1)) }
    }

    /// Default scenario for a name.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "burrau" => Scenario::Burrau,
            "near-equilateral" => Self::near_equilateral_default(),
            "standish" => Self::standish_default(),
            "equilateral" => Self::equilateral_default(),
            "collinear" => Self::collinear_default(),
            "isosceles" => Self::isosceles_default(),
            other => return Err(Error::InvalidConfig(format!("unknown scenario '{other}'"))),
        })
    }

    pub fn initial_state(&self) -> Result<PlanarState> {
        match self {
            Scenario::Burrau => burrau(),
            Scenario::NearEquilateral { delta, masses } => near_equilateral(*delta, *masses),
            Scenario::Standish { angle_deg, long_leg } => standish(*angle_deg, *long_leg),
            Scenario::Equilateral { masses, side } => equilateral_state(&EquilateralConfig::new(*masses, *side)?, 1.0),
            Scenario::Collinear { masses, x } => collinear_state(&CollinearConfig::new(*masses, *x)?, 1.0),
            Scenario::Isosceles { alpha_deg, base, mass, .. } => {
                IsoscelesState::from_vertex_angle(*alpha_deg, *base, *mass)?.to_planar()
            }
            Scenario::Custom { state } => Ok(*state),
        }
    }

    /// End time used when none is given.
    pub fn default_t_end(&self) -> Result<f64> {
        Ok(match self {
            Scenario::Burrau => 70.0,
            Scenario::NearEquilateral { .. } => 6.0,
            Scenario::Standish { .. } => 20.0,
            Scenario::Equilateral { .. } | Scenario::Collinear { .. } => {
                6.0 * collapse_time_config(&self.initial_state()?)?
            }
            Scenario::Isosceles { .. } | Scenario::Custom { .. } => {
                let s = self.initial_state()?;
                let m = s.total_mass();
                let l = s.perimeter() / 3.0;
                50.0 * (l.powi(3) / (s.g * m)).sqrt()
            }
        })
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            Scenario::Isosceles { .. } => 1e-14,
            _ => 1e-13,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn burrau() -> Result<PlanarState> {
    Ok(PlanarState::new([
        Body::at_rest(3.0, 1.0, 3.0)?,
        Body::at_rest(4.0, -2.0, -1.0)?,
        Body::at_rest(5.0, 1.0, -1.0)?,
    ])
    .recentered())
}

/// Body 1 at the right vertex, body 2 lower left shifted inwards, body 3 upper
/// left shifted outwards.
fn near_equilateral(delta: f64, masses: [f64; 3]) -> Result<PlanarState> {
    if !delta.is_finite() || delta.abs() >= 0.5 {
        return Err(Error::Domain { what: "delta", value: delta });
    }
    let h = 3f64.sqrt() / 2.0;
    Ok(PlanarState::new([
        Body::at_rest(masses[0], 1.0, 0.0)?,
        Body::at_rest(masses[1], -0.5 + delta, -h)?,
        Body::at_rest(masses[2], -0.5 - delta, h)?,
    ])
    .recentered())
}

/// Burrau's layout with the right angle at mass 5 opened to `angle_deg`.
fn standish(angle_deg: f64, long_leg: f64) -> Result<PlanarState> {
    if !(angle_deg > 0.0 && angle_deg < 180.0) {
        return Err(Error::Domain { what: "angle", value: angle_deg });
    }
    if !(long_leg > 0.0) {
        return Err(Error::Domain { what: "leg", value: long_leg });
    }
    let dir = std::f64::consts::PI - angle_deg.to_radians();
    Ok(PlanarState::new([
        Body::at_rest(3.0, long_leg * dir.cos(), long_leg * dir.sin())?,
        Body::at_rest(4.0, -3.0, 0.0)?,
        Body::at_rest(5.0, 0.0, 0.0)?,
    ])
    .recentered())
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub t_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub events: EventMask,
    pub gate: EscapeGate,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub masses: [f64; 3],
    pub t_end: f64,
    pub rel_tol: f64,
    pub initial_energy: f64,
    pub events: Vec<EventRecord>,
    pub outcome: OutcomeClass,
    pub drift: Drift,
    pub termination: Termination,
    /// Refined vertex angle for isosceles runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<String>,
}

/// Integrate and classify a scenario. Numerical failures part way through are
/// recorded in the report together with the partial trajectory.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<(RunReport, Trajectory)> {
    let t_end = match opts.t_end {
        Some(t) => t,
        None => scenario.default_t_end()?,
    };
    let rel_tol = opts.rel_tol.unwrap_or_else(|| scenario.default_tol());
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {rel_tol}")));
    }
    let (traj, error, vertex_angle) = match scenario {
        Scenario::Isosceles { alpha_deg, base, mass, tc_case } => {
            let (traj, alpha) = run_isosceles(*alpha_deg, *base, *mass, *tc_case, t_end, rel_tol)?;
            (traj, None, Some(alpha))
        }
        _ => {
            let state = scenario.initial_state()?;
            state
                .check_nonsingular()
                .map_err(|e| Error::InvalidConfig(format!("initial state is singular: {e}")))?;
            let settings = IntegratorSettings::for_state(&state).with_tol(rel_tol);
            let (traj, err) = propagate(&state, t_end, &settings, opts.events);
            (traj, err.map(|e| e.to_string()), None)
        }
    };
    let first = traj.samples.first().ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
    let report = RunReport {
        scenario: scenario.name().to_string(),
        masses: first.masses(),
        t_end,
        rel_tol,
        initial_energy: conserved(first)?.energy,
        events: traj.events.clone(),
        outcome: classify_outcome(&traj, &opts.gate),
        drift: traj.conserved_drift,
        termination: traj.termination,
        vertex_angle,
        error,
        outputs: Vec::new(),
    };
    Ok((report, traj))
}

fn run_isosceles(
    alpha: f64,
    base: f64,
    mass: f64,
    tc_case: Option<TcCase>,
    t_end: f64,
    rel_tol: f64,
) -> Result<(Trajectory, f64)> {
    // Probes stop deep in the collapse; the reported run stops at the same
    // radius as the full integrator so conservation stays meaningful.
    let search = IsoSettings::default();
    let settings = IsoSettings { rel_tol, tc_fraction: 1e-4, ..Default::default() };
    let alpha = match tc_case {
        Some(case) => {
            let lo = (alpha - 0.05).max(1e-6);
            let hi = (alpha + 0.05).min(180.0 - 1e-6);
            tc_angle_search(case, (lo, hi), 1e-9, &search)?.alpha
        }
        None => alpha,
    };
    let s = IsoscelesState::from_vertex_angle(alpha, base, mass)?;
    let iso = integrate_isosceles(&s, t_end, &settings)?;
    let samples = iso.samples.iter().map(|p| p.to_planar()).collect::<Result<Vec<_>>>()?;
    let events = iso
        .events
        .iter()
        .filter_map(|e| match e.kind {
            IsoEventKind::BinaryCollision => Some(EventRecord {
                t: e.t,
                kind: EventKind::BinaryCollision,
                subject: Subject::Pair(0, 1),
                value: e.x,
            }),
            IsoEventKind::TripleCollision => Some(EventRecord {
                t: e.t,
                kind: EventKind::TripleCollision,
                subject: Subject::System,
                value: e.r_g,
            }),
            _ => None,
        })
        .collect();
    let termination = match iso.termination {
        crate::isosceles::IsoTermination::TripleCollision => {
            // homothetic only when released from a central configuration
            let start = s.to_planar()?;
            Termination::TripleCollision { central: crate::central::central_certificate(&start).is_ok() }
        }
        _ => Termination::Completed,
    };
    let traj = Trajectory {
        samples,
        events,
        conserved_drift: Drift { energy_rel: iso.energy_drift, angular_abs: 0.0 },
        termination,
        bounces: Vec::new(),
        stats: Default::default(),
        diagnostics: Vec::new(),
    };
    Ok((traj, alpha))
}

/// Parse a flat `key=value` description. Blank lines and `#` comments are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key '{k}'", n + 1)));
        }
    }
    Ok(out)
}

fn numbers(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{key}: '{p}' is not a number"))))
        .collect()
}

fn triple(key: &str, v: &str) -> Result<[f64; 3]> {
    let n = numbers(key, v)?;
    n.try_into().map_err(|_| Error::Parse(format!("{key}: expected 3 values")))
}

fn number(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    cfg.get(key)
        .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("{key}: '{v}' is not a number"))))
        .transpose()
}

impl FromStr for TcCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "reversal" {
            return Ok(TcCase::AfterVertexReversal);
        }
        s.strip_prefix("bc")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| *n > 0)
            .map(TcCase::AfterBinaryCollisions)
            .ok_or_else(|| Error::Parse(format!("tc case '{s}': expected bcN or reversal")))
    }
}

/// Build a scenario and run options from a parsed configuration.
pub fn scenario_from_config(cfg: &BTreeMap<String, String>) -> Result<(Scenario, RunOptions)> {
    const KNOWN: [&str; 14] = [
        "scenario", "masses", "positions", "velocities", "g", "tol", "t_end", "delta", "angle", "leg", "side", "x",
        "alpha", "base",
    ];
    for k in cfg.keys() {
        if !KNOWN.contains(&k.as_str()) && k != "mass" && k != "tc_case" {
            return Err(Error::Parse(format!("unknown key '{k}'")));
        }
    }
    let name = cfg.get("scenario").map(String::as_str).unwrap_or("custom");
    let masses = cfg.get("masses").map(|v| triple("masses", v)).transpose()?;
    let mut scenario = match name {
        "custom" => {
            let masses = masses.ok_or_else(|| Error::Parse("custom scenario needs masses".into()))?;
            let pos = numbers("positions", cfg.get("positions").ok_or_else(|| Error::Parse("missing positions".into()))?)?;
            let vel = match cfg.get("velocities") {
                Some(v) => numbers("velocities", v)?,
                None => vec![0.0; 6],
            };
            if pos.len() != 6 || vel.len() != 6 {
                return Err(Error::Parse("positions and velocities need 6 values each".into()));
            }
            let mut bodies = [Body::at_rest(1.0, 0.0, 0.0)?; 3];
            for i in 0..3 {
                bodies[i] = Body::new(
                    masses[i],
                    Vec2::new(pos[2 * i], pos[2 * i + 1]),
                    Vec2::new(vel[2 * i], vel[2 * i + 1]),
                )?;
            }
            let g = number(cfg, "g")?.unwrap_or(1.0);
            Scenario::Custom { state: PlanarState::new(bodies).with_g(g).recentered() }
        }
        other => Scenario::by_name(other)?,
    };
    match &mut scenario {
        Scenario::NearEquilateral { delta, masses: m } => {
            if let Some(d) = number(cfg, "delta")? {
                *delta = d;
            }
            if let Some(ms) = masses {
                *m = ms;
            }
        }
        Scenario::Standish { angle_deg, long_leg } => {
            if let Some(a) = number(cfg, "angle")? {
                *angle_deg = a;
            }
            if let Some(l) = number(cfg, "leg")? {
                *long_leg = l;
            }
        }
        Scenario::Equilateral { masses: m, side } => {
            if let Some(ms) = masses {
                *m = ms;
            }
            if let Some(s) = number(cfg, "side")? {
                *side = s;
            }
        }
        Scenario::Collinear { masses: m, x } => {
            if let Some(ms) = masses {
                *m = ms;
            }
            if let Some(v) = number(cfg, "x")? {
                *x = v;
            }
        }
        Scenario::Isosceles { alpha_deg, base, mass, tc_case } => {
            if let Some(a) = number(cfg, "alpha")? {
                *alpha_deg = a;
                *tc_case = None;
            }
            if let Some(b) = number(cfg, "base")? {
                *base = b;
            }
            if let Some(m) = number(cfg, "mass")? {
                *mass = m;
            }
            if let Some(c) = cfg.get("tc_case") {
                *tc_case = if c == "none" { None } else { Some(c.parse()?) };
            }
        }
        Scenario::Burrau | Scenario::Custom { .. } => {}
    }
    let opts = RunOptions { t_end: number(cfg, "t_end")?, rel_tol: number(cfg, "tol")?, ..Default::default() };
    Ok((scenario, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{angular_momentum, com_state};

    #[test]
    fn coincident_start_is_bad_input() {
        let cfg = parse_config("scenario=custom\nmasses=1,1,1\npositions=0,0,0,0,1,1").unwrap();
        let (sc, opts) = scenario_from_config(&cfg).unwrap();
        let e = run(&sc, &opts).unwrap_err();
        assert!(matches!(e, Error::InvalidConfig(_)), "{e}");
    }

    #[test]
    fn burrau_geometry() {
        let s = burrau().unwrap();
        assert!((s.distance(1, 2) - 3.0).abs() < 1e-14);
        assert!((s.distance(0, 2) - 4.0).abs() < 1e-14);
        assert!((s.distance(0, 1) - 5.0).abs() < 1e-14);
        let e = conserved(&s).unwrap().energy;
        assert!((e + 769.0 / 60.0).abs() < 1e-12);
        assert_eq!(angular_momentum(&s), 0.0);
        let (c, v) = com_state(&s);
        assert!(c.norm() < 1e-15 && v.norm() == 0.0);
    }

    #[test]
    fn standish_geometry() {
        let s = standish(91.061, 4.689).unwrap();
        let (a, b, c) = (s.distance(1, 2), s.distance(0, 2), s.distance(0, 1));
        assert!((a - 3.0).abs() < 1e-13 && (b - 4.689).abs() < 1e-13);
        assert!((c - 5.614).abs() < 2e-3);
        let cos = (a * a + b * b - c * c) / (2.0 * a * b);
        assert!((cos.acos().to_degrees() - 91.061).abs() < 1e-9);
    }

    #[test]
    fn near_equilateral_zero_delta_is_central() {
        let s = near_equilateral(0.0, [1.0 / 3.0; 3]).unwrap();
        let sides = s.sides();
        for d in sides {
            assert!((d - 3f64.sqrt()).abs() < 1e-14);
        }
        assert!(crate::central::central_certificate(&s).is_ok());
    }

    #[test]
    fn determinism() {
        for name in ["burrau", "near-equilateral", "standish", "equilateral", "collinear", "isosceles"] {
            let a = Scenario::by_name(name).unwrap().initial_state().unwrap();
            let b = Scenario::by_name(name).unwrap().initial_state().unwrap();
            assert_eq!(a, b);
        }
        assert!(Scenario::by_name("pythagoras").is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = "# sample\nscenario = near-equilateral\ndelta=0.02\nmasses=0.1,0.2,0.7\ntol=1e-12\nt_end=4\n";
        let cfg = parse_config(text).unwrap();
        let (s, o) = scenario_from_config(&cfg).unwrap();
        assert_eq!(s, Scenario::NearEquilateral { delta: 0.02, masses: [0.1, 0.2, 0.7] });
        assert_eq!(o.t_end, Some(4.0));
        assert_eq!(o.rel_tol, Some(1e-12));
    }

    #[test]
    fn custom_config() {
        let text = "masses=1,1,1\npositions=0,0,1,0,0,1\n";
        let (s, _) = scenario_from_config(&parse_config(text).unwrap()).unwrap();
        let st = s.initial_state().unwrap();
        assert!(com_state(&st).0.norm() < 1e-15);
    }

    #[test]
    fn config_errors() {
        assert!(parse_config("scenario burrau").is_err());
        assert!(parse_config("a=1\na=2").is_err());
        assert!(scenario_from_config(&parse_config("colour=red").unwrap()).is_err());
        assert!(scenario_from_config(&parse_config("masses=1,2").unwrap()).is_err());
        assert!(scenario_from_config(&parse_config("scenario=standish\nangle=abc").unwrap()).is_err());
        assert!("bc0".parse::<TcCase>().is_err());
        assert_eq!("bc2".parse::<TcCase>().unwrap(), TcCase::AfterBinaryCollisions(2));
    }

    #[test]
    fn equilateral_run_is_periodic() {
        let (report, traj) = run(&Scenario::equilateral_default(), &RunOptions::default()).unwrap();
        assert_eq!(report.outcome.kind, crate::split::OutcomeKind::PeriodicCandidate);
        assert!(traj.bounces.len() >= 2);
        let tc = 2.531895753;
        for (k, t) in traj.bounces.iter().enumerate() {
            assert!((t - (2 * k + 1) as f64 * tc).abs() < 1e-6, "{t}");
        }
    }
}
