use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use freefall::central::{
    collapse_time_config, collinear_state, equilateral_state, euler_quintic_root, mu_eq_collinear, mu_particle,
    quintic_residual, CollinearConfig, EquilateralConfig,
};
use freefall::integrator::{Drift, Termination, Trajectory};
use freefall::isosceles::{family_velocity_for_tc, tc_angle_search, IsoSettings, TcCase};
use freefall::model::{conserved, Body, PlanarState, Vec2};
use freefall::output;
use freefall::scenarios::{parse_config, run, scenario_from_config, RunOptions, RunReport, Scenario};
use freefall::split::{classify_outcome, EscapeGate};
use freefall::{Error, Result};

#[derive(Parser)]
#[command(name = "freefall", version, about = "Planar three-body free-fall laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Central-configuration data: Euler quintic root, mu values, collapse times.
    Cc(CcArgs),
    /// Integrate a named scenario or a key=value config file and write outputs.
    Simulate(SimulateArgs),
    /// Shooting searches for isosceles triple collisions.
    TcSearch(TcSearchArgs),
    /// Parameter scans and seeded random free falls, run in parallel.
    Sweep(SweepArgs),
    /// Classify an existing trajectory CSV.
    Analyze(AnalyzeArgs),
    /// Render a trajectory CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct CcArgs {
    /// Masses in line order for the collinear case.
    #[arg(long, default_value = "0.16666666666666666,0.5,0.3333333333333333")]
    masses: String,
    /// Side of the equilateral triangle.
    #[arg(long, default_value_t = 3f64.sqrt())]
    side: f64,
    /// Separation of the first two bodies on the line.
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

#[derive(Args, Clone)]
struct Common {
    /// Relative integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// End time.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Comma separated subset of csv,json,svg.
    #[arg(long, default_value = "csv,json,svg")]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario name (burrau, near-equilateral, standish, equilateral,
    /// collinear, isosceles) or path to a config file.
    target: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TcSearchArgs {
    /// bcN (triple collision after N binary collisions), reversal, or family.
    #[arg(long, default_value = "bc1")]
    case: String,
    /// Search interval: vertex angles in degrees, or base speeds for family.
    #[arg(long)]
    bracket: Option<String>,
    /// Angle tolerance in degrees.
    #[arg(long, default_value_t = 1e-7)]
    tol_deg: f64,
    /// Relative tolerance of each probe.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Family: vertex angle of the start.
    #[arg(long, default_value_t = 90.0)]
    alpha: f64,
    /// Family: height of the vertex above the base.
    #[arg(long, default_value_t = 1.5)]
    height: f64,
    /// Family: mass of each body.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    mass: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario to vary.
    #[arg(long, default_value = "near-equilateral")]
    scenario: String,
    /// Config key to vary, e.g. delta, angle, alpha, side.
    #[arg(long)]
    param: Option<String>,
    /// Values as `start:stop:count` or a comma separated list.
    #[arg(long)]
    values: Option<String>,
    /// Instead of a scan, run this many random free falls.
    #[arg(long)]
    random: Option<usize>,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AnalyzeArgs {
    csv: PathBuf,
    /// Masses of bodies 1, 2, 3; the CSV does not store them.
    #[arg(long)]
    masses: String,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    /// Event log to draw as markers.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Only samples with t <= t_max.
    #[arg(long)]
    t_max: Option<f64>,
    /// Output file; defaults to the CSV path with an .svg extension.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Cc(a) => cc(&a),
        Command::Simulate(a) => simulate(&a),
        Command::TcSearch(a) => tc_search(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Plot(a) => plot(&a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn exit_for(e: &Error) -> ExitCode {
    if e.is_numerical() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn triple(s: &str) -> Result<[f64; 3]> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    v.try_into().map_err(|_| Error::Parse(format!("expected three values, got {s:?}")))
}

fn pair(s: &str) -> Result<(f64, f64)> {
    match s.split_once(',') {
        Some((a, b)) => {
            let p = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x:?}")));
            Ok((p(a)?, p(b)?))
        }
        None => Err(Error::Parse(format!("expected lo,hi, got {s:?}"))),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    print_text(&serde_json::to_string_pretty(v)?);
    Ok(())
}

/// A closed pipe on stdout is not an error of the run.
fn print_text(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn cc(a: &CcArgs) -> Result<ExitCode> {
    let masses = triple(&a.masses)?;
    let n = euler_quintic_root(masses)?;
    let line = CollinearConfig::new(masses, a.x)?;
    let tri = EquilateralConfig::new(masses, a.side)?;
    let tc_line = collapse_time_config(&collinear_state(&line, a.g)?)?;
    let tc_tri = collapse_time_config(&equilateral_state(&tri, a.g)?)?;
    let mu_bodies = (0..3).map(|i| mu_particle(masses, i, a.g)).collect::<Result<Vec<_>>>()?;
    print_json(&json!({
        "masses": masses,
        "g": a.g,
        "collinear": {
            "n": n,
            "quintic_residual": quintic_residual(masses, n),
            "x": a.x,
            "mu_relative": line.relative_mu(a.g),
            "mu_eq": mu_eq_collinear(masses, n, a.g),
            "collapse_time": tc_line,
        },
        "equilateral": {
            "side": a.side,
            "mu_bodies": mu_bodies,
            "collapse_time": tc_tri,
        },
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn load_target(target: &str) -> Result<(Scenario, RunOptions)> {
    let path = Path::new(target);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        scenario_from_config(&parse_config(&text)?)
    } else {
        Ok((Scenario::by_name(target)?, RunOptions::default()))
    }
}

fn apply(opts: &mut RunOptions, c: &Common) {
    if c.tol.is_some() {
        opts.rel_tol = c.tol;
    }
    if c.t_end.is_some() {
        opts.t_end = c.t_end;
    }
}

/// Status of a finished run: a numerical failure recorded in the report maps
/// to exit code 1.
fn run_status(report: &RunReport) -> ExitCode {
    if report.error.is_some() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let formats = output::parse_formats(&a.common.format)?;
    let (scenario, mut opts) = load_target(&a.target)?;
    apply(&mut opts, &a.common);
    let (mut report, traj) = run(&scenario, &opts)?;
    let stem = Path::new(&a.target)
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|_| Path::new(&a.target).is_file())
        .unwrap_or(scenario.name())
        .to_string();
    let written = output::emit(&report, &traj, &formats, &a.common.out_dir, &stem)?;
    report.outputs = written.iter().map(|p| p.display().to_string()).collect();
    let summary = json!({
        "scenario": report.scenario,
        "t_end": report.t_end,
        "rel_tol": report.rel_tol,
        "initial_energy": report.initial_energy,
        "outcome": report.outcome,
        "drift": report.drift,
        "termination": report.termination,
        "vertex_angle": report.vertex_angle,
        "events": report.events.len(),
        "error": report.error,
        "outputs": report.outputs,
    });
    print_json(&summary)?;
    Ok(run_status(&report))
}

fn tc_search(a: &TcSearchArgs) -> Result<ExitCode> {
    let settings = IsoSettings { rel_tol: a.tol, ..Default::default() };
    let bracket = a.bracket.as_deref().map(pair).transpose()?;
    if a.case == "family" {
        let br = bracket.unwrap_or((-0.3, -0.2));
        let m = family_velocity_for_tc(a.alpha, a.height, a.mass, br, &settings)?;
        print_json(&json!({ "case": "family", "height": a.height, "mass": a.mass, "result": m }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let case: TcCase = a.case.parse()?;
    let br = match (bracket, case) {
        (Some(b), _) => b,
        (None, TcCase::AfterBinaryCollisions(1)) => (20.0, 30.0),
        (None, TcCase::AfterBinaryCollisions(2)) => (14.0, 20.0),
        (None, TcCase::AfterVertexReversal) => (130.0, 150.0),
        (None, _) => return Err(Error::InvalidConfig(format!("no default bracket for {}; pass --bracket", a.case))),
    };
    let sol = tc_angle_search(case, br, a.tol_deg, &settings)?;
    print_json(&json!({ "case": a.case, "bracket": [br.0, br.1], "result": sol }))?;
    Ok(ExitCode::SUCCESS)
}

fn scan_values(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x:?}")));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| Error::Parse(format!("bad count {:?}", parts[2])))?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    s.split(',').map(num).collect()
}

/// Free fall from a random triangle: masses in [0.1, 1], positions in the
/// unit square, normalized to total mass 1.
fn random_state(rng: &mut ChaCha8Rng) -> Result<PlanarState> {
    let mut m = [0.0; 3];
    for x in &mut m {
        *x = rng.random_range(0.1..1.0);
    }
    let total: f64 = m.iter().sum();
    let mut bodies = Vec::with_capacity(3);
    for mi in m {
        let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        bodies.push(Body::new(mi / total, p, Vec2::zeros())?);
    }
    let b: [Body; 3] = bodies.try_into().expect("three bodies");
    let s = PlanarState::new(b).recentered();
    s.check_nonsingular()?;
    Ok(s)
}

fn sweep(a: &SweepArgs) -> Result<ExitCode> {
    let mut jobs: Vec<(serde_json::Value, Scenario, RunOptions)> = Vec::new();
    if let Some(n) = a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for k in 0..n {
            let state = random_state(&mut rng)?;
            let mut opts = RunOptions::default();
            apply(&mut opts, &a.common);
            jobs.push((json!({ "index": k, "seed": a.seed }), Scenario::Custom { state }, opts));
        }
    } else {
        let (param, values) = match (&a.param, &a.values) {
            (Some(p), Some(v)) => (p.clone(), scan_values(v)?),
            _ => return Err(Error::InvalidConfig("sweep needs --param and --values, or --random".into())),
        };
        for v in values {
            let mut cfg = BTreeMap::new();
            cfg.insert("scenario".to_string(), a.scenario.clone());
            cfg.insert(param.clone(), v.to_string());
            let (scenario, mut opts) = scenario_from_config(&cfg)?;
            apply(&mut opts, &a.common);
            jobs.push((json!({ param.clone(): v }), scenario, opts));
        }
    }
    // each job is independent and deterministic; collect keeps input order
    let results: Vec<serde_json::Value> = jobs
        .par_iter()
        .map(|(key, scenario, opts)| match run(scenario, opts) {
            Ok((r, _)) => json!({
                "key": key,
                "outcome": r.outcome,
                "drift": r.drift,
                "termination": r.termination,
                "vertex_angle": r.vertex_angle,
                "initial_energy": r.initial_energy,
                "error": r.error,
            }),
            Err(e) => json!({ "key": key, "error": e.to_string() }),
        })
        .collect();
    let text = serde_json::to_string_pretty(&results)?;
    if a.common.format.split(',').any(|f| f.trim() == "json") {
        fs::create_dir_all(&a.common.out_dir)?;
        fs::write(a.common.out_dir.join("sweep.json"), &text)?;
    }
    print_text(&text);
    let failed = results.iter().any(|r| !r["error"].is_null());
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn trajectory_from(samples: Vec<PlanarState>) -> Result<Trajectory> {
    let first = samples.first().ok_or_else(|| Error::Parse("trajectory CSV has no rows".into()))?;
    let c0 = conserved(first)?;
    let mut drift = Drift::default();
    for s in &samples {
        if let Ok(c) = conserved(s) {
            drift.energy_rel = drift.energy_rel.max((c.energy - c0.energy).abs() / c0.energy.abs());
            drift.angular_abs = drift.angular_abs.max((c.angular_momentum_z - c0.angular_momentum_z).abs());
        }
    }
    Ok(Trajectory {
        samples,
        events: Vec::new(),
        conserved_drift: drift,
        termination: Termination::Completed,
        bounces: Vec::new(),
        stats: Default::default(),
        diagnostics: Vec::new(),
    })
}

fn analyze(a: &AnalyzeArgs) -> Result<ExitCode> {
    let masses = triple(&a.masses)?;
    let samples = output::read_csv(fs::File::open(&a.csv)?, masses, a.g)?;
    let traj = trajectory_from(samples)?;
    let outcome = classify_outcome(&traj, &EscapeGate::default());
    print_json(&json!({
        "samples": traj.samples.len(),
        "t_end": traj.samples.last().map(|s| s.t),
        "drift": traj.conserved_drift,
        "outcome": outcome,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn plot(a: &PlotArgs) -> Result<ExitCode> {
    // positions only; masses do not affect the picture
    let mut samples = output::read_csv(fs::File::open(&a.csv)?, [1.0; 3], 1.0)?;
    let mut events = match &a.events {
        Some(p) => output::read_events_json(&fs::read_to_string(p)?)?,
        None => Vec::new(),
    };
    if let Some(t) = a.t_max {
        samples.retain(|s| s.t <= t);
        events.retain(|e| e.t <= t);
    }
    let out = a.output.clone().unwrap_or_else(|| a.csv.with_extension("svg"));
    fs::write(&out, output::svg(&samples, &events))?;
    print_text(&out.display().to_string());
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_ranges_and_lists() {
        assert_eq!(scan_values("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(scan_values("2:9:1").unwrap(), vec![2.0]);
        assert_eq!(scan_values("0.5, 0.25").unwrap(), vec![0.5, 0.25]);
        assert!(scan_values("a:b:c").is_err());
    }

    #[test]
    fn number_tuples() {
        assert_eq!(triple("1, 2,3").unwrap(), [1.0, 2.0, 3.0]);
        assert!(triple("1,2").is_err());
        assert_eq!(pair("20,30").unwrap(), (20.0, 30.0));
        assert!(pair("20").is_err());
    }

    #[test]
    fn random_states_are_seeded() {
        let a = random_state(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_state(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!((a.total_mass() - 1.0).abs() < 1e-15);
    }
}
