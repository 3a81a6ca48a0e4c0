//! Trajectory CSV, JSON event logs and SVG plots.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so output is reproducible and lossless.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrator::{EventRecord, Subject, Trajectory};
use crate::model::{conserved, Body, PlanarState, Vec2};
use crate::scenarios::RunReport;
use crate::split::{binding_energy, choose_pair, decompose};

pub const CSV_HEADER: [&str; 18] = [
    "t", "x1", "y1", "vx1", "vy1", "x2", "y2", "vx2", "vy2", "x3", "y3", "vx3", "vy3", "E", "Hz", "Jz", "Eb_pair",
    "Delta",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Parse a comma separated list such as `csv,json`.
pub fn parse_formats(s: &str) -> Result<Vec<Format>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let f: Format = part.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty format list".into()));
    }
    Ok(out)
}

/// The pair whose binding energy and split term fill the last two columns.
pub fn csv_pair(report: Option<&RunReport>, samples: &[PlanarState]) -> (usize, usize) {
    report
        .and_then(|r| r.outcome.pair)
        .or_else(|| samples.last().map(choose_pair))
        .unwrap_or((0, 1))
}

fn row(s: &PlanarState, pair: (usize, usize)) -> Vec<String> {
    let mut v = Vec::with_capacity(CSV_HEADER.len());
    v.push(s.t.to_string());
    for b in &s.bodies {
        for x in [b.position.x, b.position.y, b.velocity.x, b.velocity.y] {
            v.push(x.to_string());
        }
    }
    let (e, hz, jz) = match conserved(s) {
        Ok(c) => (c.energy, c.angular_momentum_z, c.moment_of_inertia),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    };
    let delta = decompose(s, pair).map(|d| d.delta).unwrap_or(f64::NAN);
    for x in [e, hz, jz, binding_energy(s, pair.0, pair.1), delta] {
        v.push(x.to_string());
    }
    v
}

pub fn write_csv<W: Write>(w: W, samples: &[PlanarState], pair: (usize, usize)) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for s in samples {
        wr.write_record(row(s, pair))?;
    }
    wr.flush()?;
    Ok(())
}

/// Read states back from a trajectory CSV. Masses are not stored in the file
/// and must be supplied.
pub fn read_csv<R: Read>(r: R, masses: [f64; 3], g: f64) -> Result<Vec<PlanarState>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let mut idx = [0usize; 13];
    for (k, name) in CSV_HEADER[..13].iter().enumerate() {
        idx[k] = col(name)?;
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let mut x = [0.0; 13];
        for (k, &c) in idx.iter().enumerate() {
            let field = rec.get(c).unwrap_or("");
            x[k] = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", line + 1)))?;
        }
        let body = |i: usize| {
            let o = 1 + 4 * i;
            Body::new(masses[i], Vec2::new(x[o], x[o + 1]), Vec2::new(x[o + 2], x[o + 3]))
        };
        let mut s = PlanarState::new([body(0)?, body(1)?, body(2)?]).with_g(g);
        s.t = x[0];
        out.push(s);
    }
    Ok(out)
}

pub fn events_json(events: &[EventRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(events)?)
}

pub fn read_events_json(text: &str) -> Result<Vec<EventRecord>> {
    Ok(serde_json::from_str(text)?)
}

const COLORS: [&str; 3] = ["#d62728", "#1f77b4", "#2ca02c"];
const SIZE: f64 = 800.0;
const PAD: f64 = 20.0;

fn nearest(samples: &[PlanarState], t: f64) -> Option<&PlanarState> {
    let k = samples.partition_point(|s| s.t < t);
    let a = k.checked_sub(1).and_then(|i| samples.get(i));
    let b = samples.get(k);
    match (a, b) {
        (Some(a), Some(b)) => Some(if (t - a.t).abs() <= (b.t - t).abs() { a } else { b }),
        (a, b) => a.or(b),
    }
}

fn event_point(s: &PlanarState, subject: Subject) -> Vec2 {
    match subject {
        Subject::Body(i) => s.bodies[i].position,
        Subject::Pair(i, j) => (s.bodies[i].position + s.bodies[j].position) * 0.5,
        Subject::System => crate::model::com_state(s).0,
    }
}

/// One polyline per body and a small circle per event, in a square frame
/// fitted to the data. `y` points up.
pub fn svg(samples: &[PlanarState], events: &[EventRecord]) -> String {
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for s in samples {
        for b in &s.bodies {
            lo = lo.inf(&b.position);
            hi = hi.sup(&b.position);
        }
    }
    if samples.is_empty() {
        lo = Vec2::repeat(-1.0);
        hi = Vec2::repeat(1.0);
    }
    let span = (hi - lo).max().max(1e-12);
    let scale = (SIZE - 2.0 * PAD) / span;
    let map = |p: Vec2| (PAD + (p.x - lo.x) * scale, SIZE - PAD - (p.y - lo.y) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, color) in COLORS.iter().enumerate() {
        let _ = write!(out, r#"<polyline id="body{}" fill="none" stroke="{color}" stroke-width="1" points=""#, i + 1);
        for s in samples {
            let (x, y) = map(s.bodies[i].position);
            let _ = write!(out, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(out, r#""/>"#);
    }
    for e in events {
        if let Some(s) = nearest(samples, e.t) {
            let (x, y) = map(event_point(s, e.subject));
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="none" stroke="black"><title>{} {} t={}</title></circle>"#,
                e.kind, e.subject, e.t
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Write the requested files as `<stem>.csv`, `<stem>.events.json` (plus
/// `<stem>.report.json`) and `<stem>.svg` under `dir`.
pub fn emit(report: &RunReport, traj: &Trajectory, formats: &[Format], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                let p = dir.join(format!("{stem}.csv"));
                let file = fs::File::create(&p)?;
                write_csv(std::io::BufWriter::new(file), &traj.samples, csv_pair(Some(report), &traj.samples))?;
                written.push(p);
            }
            Format::Json => {
                let p = dir.join(format!("{stem}.events.json"));
                fs::write(&p, events_json(&traj.events)?)?;
                written.push(p);
                let p = dir.join(format!("{stem}.report.json"));
                fs::write(&p, serde_json::to_string_pretty(report)?)?;
                written.push(p);
            }
            Format::Svg => {
                let p = dir.join(format!("{stem}.svg"));
                fs::write(&p, svg(&traj.samples, &traj.events))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::EventKind;
    use crate::scenarios::Scenario;

    fn burrau() -> PlanarState {
        Scenario::by_name("burrau").unwrap().initial_state().unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = burrau();
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&s), (1, 2)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let back = read_csv(&buf[..], s.masses(), s.g).unwrap();
        assert_eq!(back.len(), 1);
        for (a, b) in back[0].bodies.iter().zip(&s.bodies) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.velocity, b.velocity);
        }
        let e: f64 = text.lines().nth(1).unwrap().split(',').nth(13).unwrap().parse().unwrap();
        assert!((e + 769.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn csv_rejects_garbage() {
        let text = format!("{}\n1,2,x\n", CSV_HEADER.join(","));
        assert!(read_csv(text.as_bytes(), [1.0; 3], 1.0).is_err());
        assert!(read_csv("t,x1\n0,0\n".as_bytes(), [1.0; 3], 1.0).is_err());
    }

    #[test]
    fn events_round_trip() {
        let ev = vec![
            EventRecord { t: 1.5, kind: EventKind::BinaryMinDistance, subject: Subject::Pair(0, 1), value: 0.25 },
            EventRecord { t: 2.0, kind: EventKind::TripleCollision, subject: Subject::System, value: 0.0 },
        ];
        let text = events_json(&ev).unwrap();
        assert!(text.contains("\"subject\": \"1-2\""));
        assert_eq!(read_events_json(&text).unwrap(), ev);
    }

    #[test]
    fn svg_has_three_polylines_and_markers() {
        let s = burrau();
        let ev = [EventRecord { t: 0.0, kind: EventKind::AllAtRest, subject: Subject::System, value: 0.0 }];
        let text = svg(&[s], &ev);
        assert_eq!(text.matches("<polyline").count(), 3);
        assert_eq!(text.matches("<circle").count(), 1);
        assert!(text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn formats_parse() {
        assert_eq!(parse_formats("csv, svg,csv").unwrap(), vec![Format::Csv, Format::Svg]);
        assert!(parse_formats("png").is_err());
        assert!(parse_formats("").is_err());
    }
}
