//! Command-line front end for the equal-angle billiard laboratory.
//!
//! Every subcommand loads a body or curve description (a JSON file path or
//! an inline JSON string), runs one experiment from the library, and emits
//! a deterministic report: JSON with the resolved config, seed, and tool
//! version embedded, or CSV with the same provenance in `#` comment lines.
//! Identical config and seed give byte-identical output. Exit codes: 0 on
//! success, 2 when an assertion-mode check fails (the report is still
//! written, with pass = false), 1 on config or IO errors.

use clap::{ArgGroup, Parser, Subcommand};
use gutkin_lab::billiard::{sigma_orbit, symplectic_jacobian, write_orbit_csv, PhasePoint2D};
use gutkin_lab::geodesics::{integrate_geodesic, write_geodesic_csv};
use gutkin_lab::gutkin::{
    defect_scan, defect_scan_curve, fitted_slope, perturbation_scaling,
    sphere_characterization_experiment, solve_gutkin_delta, write_scaling_csv,
};
use gutkin_lab::lemmas::run_lemma_suite;
use gutkin_lab::sampling::{boundary_tangent_samples, kronecker_points};
use gutkin_lab::{BodySpec, ConvexBodyND, CurveSpec, SupportCurve2D};
use nalgebra::DVector;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "gutkin-lab", version, about = "Numerical laboratory for equal-angle billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve tan(n delta) = n tan(delta) on (0, pi/2)
    SolveDelta(SolveDeltaArgs),
    /// Scan equal-angle defects over a body or curve boundary
    Defect(DefectArgs),
    /// Run the constant-width lemma suite on a planar curve
    Lemmas(LemmasArgs),
    /// Chain equal-angle chords from one start and export the orbit
    Orbit(OrbitArgs),
    /// Defect growth versus perturbation size for harmonic probe curves
    Scaling(ScalingArgs),
    /// Billiard-map Jacobian determinants at seeded phase points
    Symplectic(SymplecticArgs),
    /// Integrate a surface geodesic and export curvature and torsion
    Geodesic(GeodesicArgs),
    /// Defect table for a body family against the sphere baseline
    Characterize(CharacterizeArgs),
}

#[derive(clap::Args)]
struct SolveDeltaArgs {
    /// Harmonic order, at least 4
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("target").required(true).args(["body", "curve"])))]
struct DefectArgs {
    /// Body spec: JSON file path or inline JSON
    #[arg(long)]
    body: Option<String>,
    /// Planar curve spec: JSON file path or inline JSON
    #[arg(long)]
    curve: Option<String>,
    /// Chord angle in radians (degrees with --degrees)
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = 10000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct LemmasArgs {
    /// Constant-width curve spec: JSON file path or inline JSON
    #[arg(long)]
    curve: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    degrees: bool,
    /// Number of base points per check
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct OrbitArgs {
    /// Body spec: JSON file path or inline JSON
    #[arg(long)]
    body: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Start foot as comma-separated coordinates; seeded boundary sample
    /// when omitted
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Start tangent as comma-separated coordinates; requires --start
    #[arg(long, allow_hyphen_values = true, requires = "start")]
    tangent: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("angle").required(true).args(["delta", "at_root"])))]
struct ScalingArgs {
    /// Harmonic order of the probe family h = 1 + eps cos(n theta)
    #[arg(long, default_value_t = 5)]
    n: u32,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    degrees: bool,
    /// Use the smallest admissible angle for n instead of --delta
    #[arg(long)]
    at_root: bool,
    /// Perturbation sizes, comma-separated
    #[arg(long, default_value = "1e-3,2e-3,4e-3,8e-3")]
    eps: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct SymplecticArgs {
    /// Planar curve spec: JSON file path or inline JSON
    #[arg(long)]
    curve: String,
    /// Number of phase points, sampled away from tangency (|p| <= 0.9)
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct GeodesicArgs {
    /// Body spec: JSON file path or inline JSON (sphere or ellipsoid)
    #[arg(long)]
    body: String,
    /// Start point on the boundary as comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    /// Launch direction as comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    dir: String,
    /// Arc length to integrate
    #[arg(long)]
    length: f64,
    /// Step size; defaults to 1e-3 times the body diameter
    #[arg(long)]
    step: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct CharacterizeArgs {
    /// JSON array of body specs: file path or inline JSON
    #[arg(long)]
    bodies: String,
    /// Angle grid, comma-separated; default ten points 0.3 to 1.2
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Report file; stdout when omitted
    #[arg(long)]
    out: Option<String>,
    /// json or csv; each command has a natural default
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Config or IO problem; the message names the offending flag, field, or
/// file, and JSON parse errors keep serde's line and column.
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A finished report: the full output text and whether assertion-mode
/// checks passed (false maps to exit code 2, the report is still written).
struct Report {
    text: String,
    pass: bool,
    out: Option<String>,
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            if let Err(e) = emit(&report) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Honors GUTKIN_LAB_THREADS as a cap on the rayon worker count.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GUTKIN_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| CliError(format!("GUTKIN_LAB_THREADS: expected a positive integer, got {raw:?}")))?;
    if threads == 0 {
        return Err(CliError("GUTKIN_LAB_THREADS: must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError(format!("GUTKIN_LAB_THREADS: {e}")))
}

fn run(command: Command) -> Result<Report, CliError> {
    match command {
        Command::SolveDelta(args) => run_solve_delta(args),
        Command::Defect(args) => run_defect(args),
        Command::Lemmas(args) => run_lemmas(args),
        Command::Orbit(args) => run_orbit(args),
        Command::Scaling(args) => run_scaling(args),
        Command::Symplectic(args) => run_symplectic(args),
        Command::Geodesic(args) => run_geodesic(args),
        Command::Characterize(args) => run_characterize(args),
    }
}

fn run_solve_delta(args: SolveDeltaArgs) -> Result<Report, CliError> {
    if args.n < 4 {
        return Err(CliError(format!("--n: equal-angle equation needs n >= 4, got {}", args.n)));
    }
    let roots = solve_gutkin_delta(args.n);
    let config = json!({ "command": "solve-delta", "n": args.n, "seed": null });
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_report(&args.output, config, json!(roots), true),
        Format::Csv => {
            let mut body = String::from("n,delta,residual\n");
            for r in &roots {
                body.push_str(&format!("{},{:.17e},{:.17e}\n", r.n, r.delta, r.residual));
            }
            csv_report(&args.output, config, body, true)
        }
    }
}

fn run_defect(args: DefectArgs) -> Result<Report, CliError> {
    let delta = resolve_angle(args.delta, args.degrees);
    validate_delta("--delta", delta)?;
    let report = if let Some(spec) = &args.body {
        let body = load_body(spec)?;
        defect_scan(&body, delta, args.samples, args.seed)
    } else {
        let curve = load_curve(args.curve.as_deref().unwrap())?;
        defect_scan_curve(&curve, delta, args.samples, args.seed)
    }
    .map_err(lib_err)?;
    let config = json!({
        "command": "defect",
        "target": report.body.clone(),
        "delta": delta,
        "samples": args.samples,
        "seed": args.seed,
    });
    let value = serde_json::to_value(&report).expect("report serializes");
    require_json(&args.output, "defect")?;
    json_report(&args.output, config, value, true)
}

fn run_lemmas(args: LemmasArgs) -> Result<Report, CliError> {
    let delta = resolve_angle(args.delta, args.degrees);
    validate_delta("--delta", delta)?;
    let curve = load_curve(&args.curve)?;
    let reports = run_lemma_suite(&curve, delta, args.grid).map_err(lib_err)?;
    let pass = reports.iter().all(|r| r.pass);
    let config = json!({
        "command": "lemmas",
        "curve": curve.to_spec(),
        "delta": delta,
        "grid": args.grid,
        "seed": null,
    });
    require_json(&args.output, "lemmas")?;
    json_report(&args.output, config, json!(reports), pass)
}

fn run_orbit(args: OrbitArgs) -> Result<Report, CliError> {
    let delta = resolve_angle(args.delta, args.degrees);
    validate_delta("--delta", delta)?;
    let body = load_body(&args.body)?;
    let (foot, tangent) = match (&args.start, &args.tangent) {
        (Some(start), Some(tangent)) => (
            DVector::from_vec(parse_list("--start", start)?),
            DVector::from_vec(parse_list("--tangent", tangent)?),
        ),
        (Some(_), None) => {
            return Err(CliError("--tangent: required when --start is given".into()));
        }
        _ => boundary_tangent_samples(&body, 1, args.seed)
            .into_iter()
            .next()
            .expect("one sample requested"),
    };
    let records = sigma_orbit(&body, &foot, &tangent, delta, args.steps).map_err(lib_err)?;
    let config = json!({
        "command": "orbit",
        "body": body.to_spec(),
        "delta": delta,
        "steps": args.steps,
        "start": foot.as_slice(),
        "tangent": tangent.as_slice(),
        "seed": args.seed,
    });
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => json_report(&args.output, config, json!(records), true),
        Format::Csv => {
            let mut buf = Vec::new();
            write_orbit_csv(&records, &mut buf).expect("write to memory");
            csv_report(&args.output, config, String::from_utf8(buf).unwrap(), true)
        }
    }
}

fn run_scaling(args: ScalingArgs) -> Result<Report, CliError> {
    if args.n < 4 {
        return Err(CliError(format!("--n: equal-angle equation needs n >= 4, got {}", args.n)));
    }
    let delta = if args.at_root {
        solve_gutkin_delta(args.n)
            .first()
            .map(|r| r.delta)
            .ok_or_else(|| CliError(format!("--at-root: no admissible angle exists for n = {}", args.n)))?
    } else {
        let d = resolve_angle(args.delta.unwrap(), args.degrees);
        validate_delta("--delta", d)?;
        d
    };
    let eps = parse_list("--eps", &args.eps)?;
    let points =
        perturbation_scaling(args.n, delta, &eps, args.samples, args.seed).map_err(lib_err)?;
    let config = json!({
        "command": "scaling",
        "n": args.n,
        "delta": delta,
        "at_root": args.at_root,
        "eps": eps,
        "samples": args.samples,
        "seed": args.seed,
    });
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let report = json!({
                "points": points.iter().map(|&(e, r)| json!([e, r])).collect::<Vec<_>>(),
                "fitted_slope": fitted_slope(&points),
            });
            json_report(&args.output, config, report, true)
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_scaling_csv(&points, &mut buf).expect("write to memory");
            csv_report(&args.output, config, String::from_utf8(buf).unwrap(), true)
        }
    }
}

fn run_symplectic(args: SymplecticArgs) -> Result<Report, CliError> {
    let curve = load_curve(&args.curve)?;
    if args.points == 0 {
        return Err(CliError("--points: must be at least 1".into()));
    }
    let perimeter = curve.perimeter();
    let mut max_err = 0.0f64;
    let mut worst = PhasePoint2D { s: 0.0, p: 0.0 };
    let mut worst_det = 1.0f64;
    for uv in kronecker_points(2, args.points, args.seed) {
        let phase = PhasePoint2D { s: uv[0] * perimeter, p: 1.8 * uv[1] - 0.9 };
        let det = symplectic_jacobian(&curve, phase).map_err(lib_err)?;
        let err = (det - 1.0).abs();
        if err > max_err {
            max_err = err;
            worst = phase;
            worst_det = det;
        }
    }
    let config = json!({
        "command": "symplectic",
        "curve": curve.to_spec(),
        "points": args.points,
        "seed": args.seed,
    });
    let report = json!({
        "max_abs_det_error": max_err,
        "worst": { "s": worst.s, "p": worst.p, "det": worst_det },
    });
    require_json(&args.output, "symplectic")?;
    json_report(&args.output, config, report, true)
}

fn run_geodesic(args: GeodesicArgs) -> Result<Report, CliError> {
    let body = load_body(&args.body)?;
    let step = args.step.unwrap_or(1e-3 * body.diameter());
    let start = DVector::from_vec(parse_list("--start", &args.start)?);
    let dir = DVector::from_vec(parse_list("--dir", &args.dir)?);
    let samples = integrate_geodesic(&body, &start, &dir, args.length, step).map_err(lib_err)?;
    let config = json!({
        "command": "geodesic",
        "body": body.to_spec(),
        "start": start.as_slice(),
        "dir": dir.as_slice(),
        "length": args.length,
        "step": step,
        "seed": null,
    });
    if args.output.format == Some(Format::Json) {
        return Err(CliError("--format: geodesic reports are csv only".into()));
    }
    let mut buf = Vec::new();
    write_geodesic_csv(&samples, &mut buf).expect("write to memory");
    csv_report(&args.output, config, String::from_utf8(buf).unwrap(), true)
}

fn run_characterize(args: CharacterizeArgs) -> Result<Report, CliError> {
    let family = load_family(&args.bodies)?;
    // The built-in default grid is already in radians; --degrees only
    // applies to user-supplied values.
    let grid: Vec<f64> = match &args.delta_grid {
        Some(text) => parse_list("--delta-grid", text)?
            .into_iter()
            .map(|d| resolve_angle(d, args.degrees))
            .collect(),
        None => (0..10).map(|i| 0.3 + 0.1 * i as f64).collect(),
    };
    for &d in &grid {
        validate_delta("--delta-grid", d)?;
    }
    let table = sphere_characterization_experiment(&family, &grid, args.samples, args.seed)
        .map_err(lib_err)?;
    let pass = table.pass;
    let config = json!({
        "command": "characterize",
        "bodies": family.iter().map(|b| json!(b.to_spec())).collect::<Vec<_>>(),
        "delta_grid": grid,
        "samples": args.samples,
        "seed": args.seed,
    });
    require_json(&args.output, "characterize")?;
    json_report(&args.output, config, serde_json::to_value(&table).unwrap(), pass)
}

/// Rejects chord angles outside (0, pi/2), naming the offending flag.
fn validate_delta(flag: &str, delta: f64) -> Result<(), CliError> {
    if !(delta > 0.0 && delta < std::f64::consts::FRAC_PI_2) {
        return Err(CliError(format!(
            "{flag}: must lie in (0, pi/2) radians after conversion, got {delta}"
        )));
    }
    Ok(())
}

/// Parses a comma-separated list of floats, naming the flag on failure.
fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError(format!("{flag}: expected a number, got {piece:?}")))
        })
        .collect()
}

fn resolve_angle(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

fn lib_err(e: gutkin_lab::Error) -> CliError {
    CliError(e.to_string())
}

/// Reads an argument that is either a JSON file path or inline JSON (the
/// latter recognized by a leading brace or bracket).
fn spec_text(flag: &str, arg: &str) -> Result<(String, String), CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok((arg.to_string(), format!("{flag} (inline)")))
    } else {
        let text = fs::read_to_string(arg)
            .map_err(|e| CliError(format!("{flag}: cannot read {arg}: {e}")))?;
        Ok((text, format!("{flag} ({arg})")))
    }
}

fn load_body(arg: &str) -> Result<ConvexBodyND, CliError> {
    let (text, origin) = spec_text("--body", arg)?;
    let spec: BodySpec =
        serde_json::from_str(&text).map_err(|e| CliError(format!("{origin}: {e}")))?;
    ConvexBodyND::try_from(spec).map_err(|e| CliError(format!("{origin}: {e}")))
}

fn load_curve(arg: &str) -> Result<SupportCurve2D, CliError> {
    let (text, origin) = spec_text("--curve", arg)?;
    let spec: CurveSpec =
        serde_json::from_str(&text).map_err(|e| CliError(format!("{origin}: {e}")))?;
    SupportCurve2D::try_from(spec).map_err(|e| CliError(format!("{origin}: {e}")))
}

fn load_family(arg: &str) -> Result<Vec<ConvexBodyND>, CliError> {
    let (text, origin) = spec_text("--bodies", arg)?;
    let specs: Vec<BodySpec> =
        serde_json::from_str(&text).map_err(|e| CliError(format!("{origin}: {e}")))?;
    specs
        .into_iter()
        .map(|s| ConvexBodyND::try_from(s).map_err(|e| CliError(format!("{origin}: {e}"))))
        .collect()
}

fn require_json(output: &OutputArgs, command: &str) -> Result<(), CliError> {
    if output.format == Some(Format::Csv) {
        return Err(CliError(format!("--format: {command} reports are json only")));
    }
    Ok(())
}

fn json_report(
    output: &OutputArgs,
    config: Value,
    report: Value,
    pass: bool,
) -> Result<Report, CliError> {
    let envelope = json!({ "config": config, "report": report, "version": VERSION });
    let text = serde_json::to_string_pretty(&envelope).expect("report serializes") + "\n";
    Ok(Report { text, pass, out: output.out.clone() })
}

fn csv_report(
    output: &OutputArgs,
    config: Value,
    body: String,
    pass: bool,
) -> Result<Report, CliError> {
    let text = format!(
        "# version: {VERSION}\n# config: {}\n{body}",
        serde_json::to_string(&config).expect("config serializes")
    );
    Ok(Report { text, pass, out: output.out.clone() })
}

fn emit(report: &Report) -> Result<(), CliError> {
    match &report.out {
        Some(path) => fs::write(path, &report.text)
            .map_err(|e| CliError(format!("--out: cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.text.as_bytes())
                .map_err(|e| CliError(format!("stdout: {e}")))
        }
    }
}
