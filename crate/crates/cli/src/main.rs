//! `cone-deform`: parameter derivations, the Koebe construction, the triangle
//! family, the cone deformation, limit sets and frame sequences.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cone_deform::acceptance::{run_acceptance, AcceptanceOptions};
use cone_deform::deform::{self, fraction_grid, jprime_trace_limits, renormalize_marked, sample_path, validate};
use cone_deform::json::{parse_complex, SCHEMA_VERSION};
use cone_deform::koebe::koebe_report;
use cone_deform::limitset::{isometric_circle_overlay, limit_set, ExplorationPolicy};
use cone_deform::moebius::Complex;
use cone_deform::render::{self, render_frames, render_image, render_svg, write_png, write_svg, Overlay, ViewSpec};
use cone_deform::triangle::{angle_discrepancies, quadrilateral, triangle_config};
use cone_deform::varieties::{
    build_cb_generators, build_f_generators, build_g_generators, derive_f_params, derive_g_params, Branch, GPoint,
};
use cone_deform::{Error, Result};

const COMPLEX_SYNTAX: &str = "\
Complex numbers are written without spaces:
  complex  = real | imag | real sign imag
  real     = decimal
  imag     = [decimal] ('i' | 'j')
  sign     = '+' | '-'
  decimal  = ['-'] digits ['.' digits] [('e' | 'E') ['-' | '+'] digits]
Examples: 3, -2i, 2.5+0.2i, 0.09+0.85i, 1e-3-4i

Grids are written k1..k2/n for the angles k*pi/n with k1 <= k <= k2;
k1 > k2 gives the empty grid.

--config FILE reads a JSON object {\"schema\": 1, \"<flag>\": value, ...}
whose entries override the flags given on the command line. Booleans set or
omit a switch; arrays are joined with commas.

Exit status: 0 when every check passed, 1 when a check or the run failed,
2 on a usage error. CONE_DEFORM_THREADS caps the worker threads.";

#[derive(Parser, Debug)]
#[command(name = "cone-deform", version, about, after_help = COMPLEX_SYNTAX, args_override_self = true)]
struct Cli {
    /// JSON file whose entries override command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived parameters and generators of a point of G, CB or F.
    Params(ParamsArgs),
    /// Assembles the Koebe group, its normalizer and its parameters.
    Koebe(ReportArgs),
    /// The triangle-group family: configuration, diagram and angle report.
    Triangle(TriangleArgs),
    /// Deformation states, validity reports and renormalized tuples.
    Deform(DeformArgs),
    /// Limit-set point cloud and image.
    Limitset(LimitsetArgs),
    /// Runs the acceptance suite and prints its JSON report.
    Verify(VerifyArgs),
    /// Renders a frame sequence along the deformation.
    Animate(AnimateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Slice {
    G,
    Cb,
    F,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Principal,
    Negated,
}

fn complex_arg(s: &str) -> std::result::Result<Complex, String> {
    parse_complex(s)
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    #[arg(long, value_enum, default_value = "g")]
    slice: Slice,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    alpha: Complex,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    beta: Option<Complex>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    sigma: Option<Complex>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    lambda: Option<Complex>,
    /// Branch of the square root of kappa (G only).
    #[arg(long, value_enum, default_value = "principal")]
    branch: BranchArg,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Args, Debug)]
struct TriangleArgs {
    /// Family parameter t > 0.
    #[arg(long, conflicts_with = "zeta")]
    t: Option<f64>,
    /// Half-angle zeta in [0, pi]; solved for t.
    #[arg(long)]
    zeta: Option<f64>,
    /// Diagram of the circles and the quadrilateral.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Values of t for the printed-angle comparison.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.5,2,5,10")]
    discrepancy: Vec<f64>,
    #[command(flatten)]
    view: ViewArgs,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Args, Debug)]
struct DeformArgs {
    /// A single angle.
    #[arg(long, conflicts_with = "grid")]
    theta: Option<f64>,
    /// Angles k*pi/n written k1..k2/n.
    #[arg(long)]
    grid: Option<String>,
    /// Render the grid (or the single angle) into this directory.
    #[arg(long, value_name = "DIR")]
    frames: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    view: ViewArgs,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Args, Debug)]
struct LimitsetArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "2.5+0.2i")]
    alpha: Complex,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.5+4.2i")]
    beta: Complex,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.09+0.85i")]
    lambda: Complex,
    /// Use the deformation group at this angle instead of the CB group.
    #[arg(long)]
    theta: Option<f64>,
    /// Image path; `.svg` writes a vector image, anything else PNG.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Binary point file (16-byte little-endian records).
    #[arg(long, value_name = "FILE")]
    points: Option<PathBuf>,
    /// Word length of the isometric-circle overlay; 0 for none.
    #[arg(long, default_value_t = 1)]
    overlay: usize,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    view: ViewArgs,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Directory for the images produced by the figure checks.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FrameSet {
    /// k = 1..12 over 24.
    First,
    /// k = 13..24 over 24.
    Second,
    /// k = 1..24 over 24.
    All,
}

#[derive(Args, Debug)]
struct AnimateArgs {
    #[arg(long, value_enum, default_value = "all", conflicts_with = "grid")]
    set: FrameSet,
    /// Angles k*pi/n written k1..k2/n.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_name = "DIR", default_value = "frames")]
    out: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    view: ViewArgs,
}

#[derive(Args, Debug)]
struct PolicyArgs {
    /// Maximum word length.
    #[arg(long)]
    depth: Option<usize>,
    /// Pruning radius epsilon.
    #[arg(long)]
    eps: Option<f64>,
    /// Point cap per first-letter subtree.
    #[arg(long)]
    max_points: Option<usize>,
}

impl PolicyArgs {
    fn resolve(&self, base: ExplorationPolicy) -> ExplorationPolicy {
        ExplorationPolicy {
            max_word_length: self.depth.unwrap_or(base.max_word_length),
            prune_radius: self.eps.unwrap_or(base.prune_radius),
            max_points: self.max_points.unwrap_or(base.max_points),
            ..base
        }
    }
}

#[derive(Args, Debug)]
struct ViewArgs {
    /// xmin,xmax,ymin,ymax
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Point radius in pixels.
    #[arg(long)]
    point_size: Option<u32>,
}

impl ViewArgs {
    fn resolve(&self, base: ViewSpec) -> Result<ViewSpec> {
        let mut v = base;
        if let Some(b) = &self.bbox {
            v.bbox = [b[0], b[1], b[2], b[3]];
        }
        v.width = self.width.unwrap_or(v.width);
        v.height = self.height.unwrap_or(v.height);
        v.point_size = self.point_size.unwrap_or(v.point_size);
        v.validate()?;
        Ok(v)
    }
}

/// What a subcommand produced: its report and whether all checks passed.
struct Outcome {
    report: Value,
    passed: bool,
}

fn ok(report: Value) -> Outcome {
    Outcome { report, passed: true }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

/// `[re, im]`, the JSON form of a complex number.
fn cx(z: Complex) -> Value {
    json!([z.re, z.im])
}

fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn missing(flag: &str) -> Error {
    Error::InvalidParameter(format!("--{flag} is required for this slice"))
}

fn params(a: &ParamsArgs) -> Result<Outcome> {
    match a.slice {
        Slice::G => {
            let (beta, sigma, lambda) = (
                a.beta.ok_or_else(|| missing("beta"))?,
                a.sigma.ok_or_else(|| missing("sigma"))?,
                a.lambda.ok_or_else(|| missing("lambda"))?,
            );
            let branch = match a.branch {
                BranchArg::Principal => Branch::Principal,
                BranchArg::Negated => Branch::Negated,
            };
            let p = GPoint::new(a.alpha, beta, sigma, lambda).with_branch(branch);
            let derived = derive_g_params(&p)?;
            let tuple = build_g_generators(&p)?;
            let defects = tuple.defects();
            Ok(Outcome {
                passed: defects.max_g() <= 1e-8,
                report: json!({
                    "schema": SCHEMA_VERSION,
                    "slice": "G",
                    "point": to_value(&p)?,
                    "derived": {
                        "kappa": cx(derived.kappa),
                        "xi": cx(derived.xi),
                        "zeta_aux": cx(derived.zeta),
                        "sqrt_kappa": cx(derived.sqrt_kappa),
                        "rho": cx(derived.rho),
                        "r": cx(derived.r),
                        "b": cx(derived.b),
                        "s": cx(derived.s),
                    },
                    "generators": to_value(&tuple)?,
                    "defects": to_value(&defects)?,
                }),
            })
        }
        Slice::Cb => {
            let (beta, lambda) = (
                a.beta.ok_or_else(|| missing("beta"))?,
                a.lambda.ok_or_else(|| missing("lambda"))?,
            );
            let gens = build_cb_generators(a.alpha, beta, lambda)?;
            Ok(ok(json!({
                "schema": SCHEMA_VERSION,
                "slice": "CB",
                "alpha": cx(a.alpha),
                "beta": cx(beta),
                "lambda": cx(lambda),
                "generators": { "P": to_value(&gens[0])?, "Q": to_value(&gens[1])?, "M": to_value(&gens[2])? },
            })))
        }
        Slice::F => {
            let (beta, sigma) = (
                a.beta.ok_or_else(|| missing("beta"))?,
                a.sigma.ok_or_else(|| missing("sigma"))?,
            );
            let derived = derive_f_params(a.alpha, sigma)?;
            let tuple = build_f_generators(a.alpha, beta, sigma)?;
            let defects = tuple.defects();
            Ok(Outcome {
                passed: defects.max_g() <= 1e-8 && defects.trace_n <= 1e-8,
                report: json!({
                    "schema": SCHEMA_VERSION,
                    "slice": "F",
                    "derived": {
                        "rho": cx(derived.rho),
                        "lambda": cx(derived.lambda),
                        "r": cx(derived.r),
                        "b": cx(derived.b),
                        "s": cx(derived.s),
                    },
                    "generators": to_value(&tuple)?,
                    "defects": to_value(&defects)?,
                }),
            })
        }
    }
}

fn koebe() -> Result<Outcome> {
    let r = koebe_report()?;
    let passed = r.normalizer.residual <= 1e-10 && r.parameters.residual <= 1e-10;
    Ok(Outcome {
        report: to_value(&r)?,
        passed,
    })
}

fn triangle(a: &TriangleArgs) -> Result<Outcome> {
    let t = match (a.t, a.zeta) {
        (Some(t), _) => t,
        (None, Some(z)) => cone_deform::triangle::t_for_zeta(z)?,
        (None, None) => 1.0,
    };
    let config = if t.is_finite() { Some(triangle_config(t)?) } else { None };
    let quad = match config.as_ref().and_then(|c| c.angle) {
        Some(angle) => Some(quadrilateral(angle.zeta())?),
        None => a.zeta.map(quadrilateral).transpose()?,
    };
    let rows = angle_discrepancies(&a.discrepancy)?;
    if let Some(path) = &a.svg {
        let view = a.view.resolve(ViewSpec {
            width: 600,
            height: 600,
            ..ViewSpec::default()
        })?;
        let mut overlays = Vec::new();
        if let Some(c) = &config {
            overlays.extend([c.ct, c.ct_dagger, c.left, c.right].map(Overlay::Circle));
        }
        if let Some(q) = &quad {
            let y_max = view.bbox[3];
            overlays.extend(q.sides.iter().map(|s| Overlay::Polyline(s.sample(200, y_max))));
        }
        write_svg(&render_svg(&[], &overlays, &view)?, path)?;
    }
    Ok(ok(json!({
        "schema": SCHEMA_VERSION,
        "t": if t.is_finite() { json!(t) } else { json!("inf") },
        "config": to_value(&config)?,
        "quadrilateral": to_value(&quad)?,
        "angle_discrepancies": rows.iter().map(|r| json!({
            "t": r.t,
            "two_zeta": r.two_zeta,
            "cos_geometric": r.cos_geometric,
            "cos_printed": r.cos_printed,
            "printed_is_wrong": r.printed_is_wrong(),
        })).collect::<Vec<_>>(),
    })))
}

/// Parses `k1..k2/n` into the angles `kπ/n`; `k1 > k2` is the empty grid.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("cannot parse grid {s:?}; expected k1..k2/n"));
    let (range, n) = s.split_once('/').ok_or_else(bad)?;
    let (k1, k2) = range.split_once("..").ok_or_else(bad)?;
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|_| bad());
    let (k1, k2, n) = (parse(k1)?, parse(k2)?, parse(n)?);
    if n == 0 {
        return Err(bad());
    }
    Ok(fraction_grid(k1..=k2, n))
}

fn deform_cmd(a: &DeformArgs) -> Result<Outcome> {
    let grid = match (&a.grid, a.theta) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(t)) => vec![t],
        (None, None) => vec![std::f64::consts::FRAC_PI_8],
    };
    let path = sample_path(&grid);
    let mut passed = true;
    let mut states = Vec::new();
    for e in &path.entries {
        match &e.state {
            Some(s) => {
                let report = validate(s);
                passed &= report.passed;
                let renorm = renormalize_marked(s).map_err(|e| e.to_string());
                states.push(json!({
                    "theta": e.theta,
                    "state": to_value(s)?,
                    "validity": to_value(&report)?,
                    "renormalized": match renorm {
                        Ok(r) => to_value(&r)?,
                        Err(msg) => json!({ "error": msg }),
                    },
                }));
            }
            None => {
                passed = false;
                states.push(json!({ "theta": e.theta, "error": e.error }));
            }
        }
    }
    let limits = jprime_trace_limits(1e-7)?;
    let mut report = json!({
        "schema": SCHEMA_VERSION,
        "states": states,
        "continuity": to_value(&path.continuity)?,
        "jprime_trace_limits": to_value(&limits)?,
        "rho_zero": deform::rho_zero(),
    });
    if let Some(dir) = &a.frames {
        let view = a.view.resolve(ViewSpec {
            width: 400,
            height: 400,
            ..ViewSpec::default()
        })?;
        let manifest = render_frames(&grid, &a.policy.resolve(render::frame_policy()), &view, dir)?;
        passed &= manifest.failed().count() == 0;
        report["frames"] = to_value(&manifest)?;
    }
    Ok(Outcome { report, passed })
}

fn limitset_cmd(a: &LimitsetArgs) -> Result<Outcome> {
    let (group, base) = match a.theta {
        Some(theta) => (deform::state(theta)?.group()?, render::frame_policy()),
        None => (
            cone_deform::varieties::cb_group(a.alpha, a.beta, a.lambda)?,
            ExplorationPolicy::new(60, 1e-3),
        ),
    };
    let policy = a.policy.resolve(base);
    let cloud = limit_set(&group, &policy)?;
    let view = a.view.resolve(ViewSpec::default())?;
    let overlays: Vec<Overlay> = if a.overlay > 0 {
        isometric_circle_overlay(&group, a.overlay)?
            .into_iter()
            .map(Overlay::Circle)
            .collect()
    } else {
        Vec::new()
    };
    if let Some(path) = &a.out {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) {
            write_svg(&render_svg(&cloud.points, &overlays, &view)?, path)?;
        } else {
            write_png(&render_image(&cloud.points, &overlays, &view)?, path)?;
        }
    }
    if let Some(path) = &a.points {
        cloud.write_binary(path)?;
    }
    Ok(ok(json!({
        "schema": SCHEMA_VERSION,
        "points": cloud.len(),
        "points_in_view": cloud.count_in_box(view.bbox),
        "policy": to_value(&policy)?,
        "stats": to_value(&cloud.stats)?,
        "overlay_circles": overlays.len(),
    })))
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let out_dir = a
        .out_dir
        .clone()
        .unwrap_or_else(|| std::env::temp_dir().join(format!("cone-deform-verify-{}", std::process::id())));
    let report = run_acceptance(&AcceptanceOptions { out_dir });
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    Ok(Outcome {
        passed: report.passed,
        report: to_value(&report)?,
    })
}

fn animate(a: &AnimateArgs) -> Result<Outcome> {
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => match a.set {
            FrameSet::First => fraction_grid(1..=12, 24),
            FrameSet::Second => fraction_grid(13..=24, 24),
            FrameSet::All => fraction_grid(1..=24, 24),
        },
    };
    let view = a.view.resolve(ViewSpec {
        width: 400,
        height: 400,
        ..ViewSpec::default()
    })?;
    let manifest = render_frames(&grid, &a.policy.resolve(render::frame_policy()), &view, &a.out)?;
    let failed = manifest.failed().count();
    Ok(Outcome {
        passed: failed == 0,
        report: json!({
            "schema": SCHEMA_VERSION,
            "frames": manifest.frames.len(),
            "failed": failed,
            "manifest": a.out.join("manifest.json"),
        }),
    })
}

fn report_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Params(a) => a.out.report.as_deref(),
        Command::Koebe(a) => a.report.as_deref(),
        Command::Triangle(a) => a.out.report.as_deref(),
        Command::Deform(a) => a.out.report.as_deref(),
        Command::Limitset(a) => a.report.report.as_deref(),
        Command::Verify(a) => a.out.report.as_deref(),
        Command::Animate(_) => None,
    }
}

/// Turns a config object into trailing flags, so its entries win.
fn config_flags(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let value: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = value else {
        return Err(Error::InvalidParameter(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    match map.get("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "{}: expected \"schema\": {SCHEMA_VERSION}, got {}",
                path.display(),
                other.map_or("nothing".to_string(), Value::to_string)
            )))
        }
    }
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::InvalidParameter(format!("unsupported config value {other}"))),
        }
    };
    let mut flags = Vec::new();
    for (key, v) in map.iter().filter(|(k, _)| k.as_str() != "schema") {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                flags.push(format!("{flag}={}", parts.join(",")));
            }
            other => flags.push(format!("{flag}={}", scalar(other)?)),
        }
    }
    Ok(flags)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Params(a) => params(a),
        Command::Koebe(_) => koebe(),
        Command::Triangle(a) => triangle(a),
        Command::Deform(a) => deform_cmd(a),
        Command::Limitset(a) => limitset_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Animate(a) => animate(a),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let mut cli = Cli::parse_from(&args);
    if let Some(path) = cli.config.clone() {
        match config_flags(&path) {
            Ok(extra) => cli = Cli::parse_from(args.iter().cloned().chain(extra)),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(n) = render::thread_cap() {
        // only fails if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli).and_then(|o| emit(&o.report, report_path(&cli.command)).map(|_| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
