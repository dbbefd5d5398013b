//! Command-line front end: density profiles, global-balance checks,
//! coefficient tables, cutoff studies and the point-like-limit study, all
//! rendered as CSV or JSON artifacts.
//!
//! Exit statuses form a stable contract for CI use: 0 when every requested
//! check passes, 1 when a check fails numerically, 2 on invalid input, 3 on
//! numerical non-convergence.

mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::extsource::{
    self, extended_density, extended_global_energy, ExtendedSource, FormFactor, Polarizability,
    PolarizabilityKind,
};
use crate::pointlike::{self, Component, CutoffParams, UnitsConvention};
use crate::quadrature::QuadratureConfig;

use output::{Document, Value};

/// Process exit status plus a one-line reason for the failing ones.
type CmdResult = std::result::Result<i32, (i32, String)>;

const EXIT_PASS: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_INVALID_INPUT: i32 = 2;
const EXIT_NON_CONVERGED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "vacuum-energy",
    version,
    about = "Renormalized vacuum energy densities around polarizable sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the energy densities over a radial grid
    Profile(ProfileArgs),
    /// Check the integrated electric/magnetic energy balance
    CheckGlobal(CheckGlobalArgs),
    /// Print the exact coefficient tables of the origin expansion
    CheckCoefficients(CheckCoefficientsArgs),
    /// Cutoff study of the electric/magnetic cancellation and its scaling
    Singular(SingularArgs),
    /// Shrinking-source study of the point-like limit
    Limit(LimitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Absolute quadrature tolerance
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Evaluation budget per integration axis
    #[arg(long = "max-evals")]
    max_evals: Option<u64>,
    /// key=value file with tolerance defaults; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Source profile: point, gaussian:<a> or lorentzian2:<a>
    #[arg(long, default_value = "point")]
    source: String,
    /// Polarizability: static:<a0> or rational:<a0>:<k0>
    #[arg(long, default_value = "static:1")]
    alpha: String,
    /// Radial grid <min>:<max>:<points>:<linear|log>
    #[arg(long)]
    grid: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CheckGlobalArgs {
    /// Source profile: point, gaussian:<a> or lorentzian2:<a>
    #[arg(long, default_value = "point")]
    source: String,
    /// Polarizability: static:<a0> or rational:<a0>:<k0>
    #[arg(long, default_value = "static:1")]
    alpha: String,
    /// Lower cutoff of the point-source global integrals
    #[arg(long = "eta-m")]
    eta_m: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CheckCoefficientsArgs {
    /// Restrict the tables to one component: electric or magnetic
    #[arg(long)]
    component: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SingularArgs {
    /// Cutoff sequence, comma separated
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LimitArgs {
    /// Field distance of the study
    #[arg(long = "R", default_value_t = 1.0)]
    big_r: f64,
    /// Source sizes, comma separated, strictly decreasing
    #[arg(long = "a", value_delimiter = ',', required = true)]
    a: Vec<f64>,
    /// electric, magnetic or total
    #[arg(long, default_value = "electric")]
    component: String,
    /// Static response strength: static:<a0>
    #[arg(long, default_value = "static:1")]
    alpha: String,
    #[command(flatten)]
    common: CommonArgs,
}

/// Parse the command line, run the requested command, and return the
/// process exit status.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                EXIT_PASS
            } else {
                EXIT_INVALID_INPUT
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Profile(args) => cmd_profile(args),
        Command::CheckGlobal(args) => cmd_check_global(args),
        Command::CheckCoefficients(args) => cmd_check_coefficients(args),
        Command::Singular(args) => cmd_singular(args),
        Command::Limit(args) => cmd_limit(args),
    };
    match outcome {
        Ok(code) => code,
        Err((code, reason)) => {
            eprintln!("error: {reason}");
            code
        }
    }
}

fn exit_code_of(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::InvalidInput(_) | Error::Inadmissible(_) => EXIT_INVALID_INPUT,
        Error::NonConverged { .. } | Error::Extrapolation(_) => EXIT_NON_CONVERGED,
    }
}

fn lift(err: Error) -> (i32, String) {
    (exit_code_of(&err), err.to_string())
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

fn parse_f64(name: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("{name} is not a number: '{s}'")))
}

fn parse_form_factor(s: &str) -> Result<FormFactor> {
    if s == "point" {
        return Ok(FormFactor::point());
    }
    if let Some(v) = s.strip_prefix("gaussian:") {
        return FormFactor::gaussian(parse_f64("gaussian size", v)?);
    }
    if let Some(v) = s.strip_prefix("lorentzian2:") {
        return FormFactor::lorentzian_squared(parse_f64("lorentzian2 size", v)?);
    }
    Err(Error::InvalidInput(format!(
        "unrecognized source '{s}'; expected point, gaussian:<a> or lorentzian2:<a>"
    )))
}

fn parse_polarizability(s: &str) -> Result<Polarizability> {
    if let Some(v) = s.strip_prefix("static:") {
        return Polarizability::constant(parse_f64("alpha0", v)?);
    }
    if let Some(v) = s.strip_prefix("rational:") {
        let Some((a0, k0)) = v.split_once(':') else {
            return Err(Error::InvalidInput(format!(
                "rational polarizability needs two parameters, got '{s}'; expected \
                 rational:<a0>:<k0>"
            )));
        };
        return Polarizability::rational(parse_f64("alpha0", a0)?, parse_f64("k0", k0)?);
    }
    Err(Error::InvalidInput(format!(
        "unrecognized polarizability '{s}'; expected static:<a0> or rational:<a0>:<k0>"
    )))
}

fn parse_component(s: &str) -> Result<Component> {
    s.parse::<Component>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    min: f64,
    max: f64,
    points: usize,
    spacing: Spacing,
}

fn parse_grid(s: &str) -> Result<Grid> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "grid must be <min>:<max>:<points>:<linear|log>, got '{s}'"
        )));
    }
    let min = parse_f64("grid lower bound", parts[0])?;
    let max = parse_f64("grid upper bound", parts[1])?;
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("grid point count is not an integer: '{}'", parts[2])))?;
    let spacing = match parts[3].trim() {
        "linear" => Spacing::Linear,
        "log" => Spacing::Log,
        other => {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be linear or log, got '{other}'"
            )))
        }
    };
    if points < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points".into()));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::InvalidInput(format!(
            "grid lower bound must be below the upper bound, got {min} and {max}"
        )));
    }
    Ok(Grid {
        min,
        max,
        points,
        spacing,
    })
}

fn validate_grid_for_source(grid: &Grid, ff: &FormFactor) -> Result<()> {
    if ff.kind == extsource::FormFactorKind::Point && grid.min <= 0.0 {
        return Err(Error::InvalidInput(
            "grid lower bound must be positive for point source".into(),
        ));
    }
    if grid.min < 0.0 {
        return Err(Error::InvalidInput(
            "grid bounds must be non-negative".into(),
        ));
    }
    if grid.spacing == Spacing::Log && grid.min <= 0.0 {
        return Err(Error::InvalidInput(
            "grid lower bound must be positive for log spacing".into(),
        ));
    }
    Ok(())
}

fn grid_values(grid: &Grid) -> Vec<f64> {
    let n = grid.points;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let r = match grid.spacing {
            Spacing::Linear => grid.min + (grid.max - grid.min) * t,
            Spacing::Log => grid.min * (grid.max / grid.min).powf(t),
        };
        values.push(r);
    }
    // pin the endpoints against rounding so echoed grids are exact
    values[0] = grid.min;
    values[n - 1] = grid.max;
    values
}

fn resolve_config(common: &CommonArgs) -> std::result::Result<QuadratureConfig, (i32, String)> {
    let mut cfg = QuadratureConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            (
                EXIT_INVALID_INPUT,
                format!("cannot read config file {}: {e}", path.display()),
            )
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err((
                    EXIT_INVALID_INPUT,
                    format!("config line {} is not key=value: '{line}'", idx + 1),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "abs-tol" => cfg.abs_tol = parse_f64("abs-tol", value).map_err(lift)?,
                "rel-tol" => cfg.rel_tol = parse_f64("rel-tol", value).map_err(lift)?,
                "max-evals" => {
                    cfg.max_evaluations = value.parse().map_err(|_| {
                        (
                            EXIT_INVALID_INPUT,
                            format!("max-evals is not an integer: '{value}'"),
                        )
                    })?
                }
                other => {
                    return Err((
                        EXIT_INVALID_INPUT,
                        format!("unknown config key '{other}'"),
                    ))
                }
            }
        }
    }
    if let Some(v) = common.abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = common.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = common.max_evals {
        cfg.max_evaluations = v;
    }
    cfg.validate().map_err(lift)?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Output assembly
// ---------------------------------------------------------------------------

fn base_metadata(command: &str, cfg: &QuadratureConfig) -> Vec<(String, String)> {
    vec![
        ("tool".into(), format!("vacuum-energy {}", env!("CARGO_PKG_VERSION"))),
        ("command".into(), command.into()),
        ("units".into(), UnitsConvention::DESCRIPTION.into()),
        ("abs-tol".into(), format!("{:e}", cfg.abs_tol)),
        ("rel-tol".into(), format!("{:e}", cfg.rel_tol)),
        ("max-evals".into(), cfg.max_evaluations.to_string()),
    ]
}

fn emit(doc: &Document, common: &CommonArgs) -> std::result::Result<(), (i32, String)> {
    let content = match common.format {
        OutputFormat::Csv => output::render_csv(doc),
        OutputFormat::Json => output::render_json(doc),
    };
    output::write_output(&content, common.out.as_deref()).map_err(lift)
}

fn status_text(passed: bool) -> String {
    if passed { "PASS".into() } else { "FAIL".into() }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_profile(args: ProfileArgs) -> CmdResult {
    let cfg = resolve_config(&args.common)?;
    let ff = parse_form_factor(&args.source).map_err(lift)?;
    let pol = parse_polarizability(&args.alpha).map_err(lift)?;
    let grid = parse_grid(&args.grid).map_err(lift)?;
    validate_grid_for_source(&grid, &ff).map_err(lift)?;
    let source = ExtendedSource::new(ff, pol).map_err(lift)?;

    let mut rows = Vec::with_capacity(grid.points);
    let mut all_converged = true;
    for r in grid_values(&grid) {
        let e = extended_density(&source, r, Component::Electric, &cfg).map_err(lift)?;
        let m = extended_density(&source, r, Component::Magnetic, &cfg).map_err(lift)?;
        all_converged &= e.converged && m.converged;
        let r7 = r.powi(7);
        rows.push(vec![
            Value::Number(r),
            Value::Number(e.value),
            Value::Number(m.value),
            Value::Number(e.value + m.value),
            Value::Number(e.value * r7),
            Value::Number(m.value * r7),
        ]);
    }

    let mut metadata = base_metadata("profile", &cfg);
    metadata.push(("source".into(), source.form_factor.to_string()));
    metadata.push(("alpha".into(), source.polarizability.to_string()));
    metadata.push(("grid".into(), args.grid.clone()));
    let doc = Document {
        metadata,
        columns: vec![
            "r",
            "u_electric",
            "u_magnetic",
            "u_total",
            "u_electric_r7",
            "u_magnetic_r7",
        ],
        rows,
    };
    emit(&doc, &args.common)?;
    if all_converged {
        Ok(EXIT_PASS)
    } else {
        Err((
            EXIT_NON_CONVERGED,
            "one or more grid points did not reach the requested tolerance".into(),
        ))
    }
}

fn cmd_check_global(args: CheckGlobalArgs) -> CmdResult {
    let cfg = resolve_config(&args.common)?;
    let ff = parse_form_factor(&args.source).map_err(lift)?;
    let pol = parse_polarizability(&args.alpha).map_err(lift)?;
    let source = ExtendedSource::new(ff, pol).map_err(lift)?;

    if ff.kind == extsource::FormFactorKind::Point {
        let eta_m = args.eta_m.unwrap_or(1.0);
        if !(eta_m.is_finite() && eta_m > 0.0) {
            return Err((EXIT_INVALID_INPUT, "regulator must be positive".into()));
        }
        let alpha0 = pol.alpha0;
        let closed = pointlike::global_energy(&CutoffParams::new(0.0, eta_m).map_err(lift)?)
            .map_err(lift)?;
        let q_el =
            pointlike::global_energy_quadrature(Component::Electric, eta_m, &cfg).map_err(lift)?;
        let q_mag =
            pointlike::global_energy_quadrature(Component::Magnetic, eta_m, &cfg).map_err(lift)?;
        let converged = q_el.converged && q_mag.converged;
        let el_closed = alpha0 * closed.electric_total;
        let mag_closed = alpha0 * closed.magnetic_total;
        let el_quad = alpha0 * q_el.value;
        let mag_quad = alpha0 * q_mag.value;
        let total_quad = el_quad + mag_quad;
        let el_dev = ((el_quad - el_closed) / el_closed).abs();
        let mag_dev = ((mag_quad - mag_closed) / mag_closed).abs();
        let total_scale = el_closed.abs().max(1.0);
        let passed =
            converged && el_dev <= 1e-8 && mag_dev <= 1e-8 && total_quad.abs() <= 1e-8 * total_scale;

        let mut metadata = base_metadata("check-global", &cfg);
        metadata.push(("source".into(), source.form_factor.to_string()));
        metadata.push(("alpha".into(), source.polarizability.to_string()));
        metadata.push(("eta-m".into(), format!("{eta_m}")));
        metadata.push(("status".into(), status_text(passed)));
        let row = |name: &str, v: f64| vec![Value::Text(name.into()), Value::Number(v)];
        let doc = Document {
            metadata,
            columns: vec!["quantity", "value"],
            rows: vec![
                row("electric_total", el_closed),
                row("magnetic_total", mag_closed),
                row("total", el_closed + mag_closed),
                row("electric_quadrature", el_quad),
                row("magnetic_quadrature", mag_quad),
                row("total_quadrature", total_quad),
                row("electric_rel_deviation", el_dev),
                row("magnetic_rel_deviation", mag_dev),
            ],
        };
        emit(&doc, &args.common)?;
        if !converged {
            return Err((
                EXIT_NON_CONVERGED,
                "global quadrature did not reach the requested tolerance".into(),
            ));
        }
        return Ok(if passed { EXIT_PASS } else { EXIT_CHECK_FAILED });
    }

    if args.eta_m.is_some() {
        return Err((
            EXIT_INVALID_INPUT,
            "--eta-m applies to the point source only; extended sources need no regulator".into(),
        ));
    }
    let r_max = extsource::default_r_max(&ff);
    let report =
        extended_global_energy(&source, &cfg, r_max, &extsource::DEFAULT_GLOBAL_EPSILONS)
            .map_err(lift)?;
    let scale = report.electric_total.abs().max(report.magnetic_total.abs());
    let passed = report.total.abs() <= 1e-6 * scale;

    let mut metadata = base_metadata("check-global", &cfg);
    metadata.push(("source".into(), source.form_factor.to_string()));
    metadata.push(("alpha".into(), source.polarizability.to_string()));
    metadata.push(("r-max".into(), format!("{r_max}")));
    metadata.push((
        "epsilons".into(),
        extsource::DEFAULT_GLOBAL_EPSILONS
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(","),
    ));
    metadata.push(("status".into(), status_text(passed)));
    let row = |name: &str, v: f64| vec![Value::Text(name.into()), Value::Number(v)];
    let doc = Document {
        metadata,
        columns: vec!["quantity", "value"],
        rows: vec![
            row("electric_total", report.electric_total),
            row("magnetic_total", report.magnetic_total),
            row("total", report.total),
            row("electric_error", report.electric_error),
            row("magnetic_error", report.magnetic_error),
            row("total_error", report.total_error),
            row("cancellation_ratio", report.total.abs() / scale),
        ],
    };
    emit(&doc, &args.common)?;
    if !report.converged {
        return Err((
            EXIT_NON_CONVERGED,
            "density quadrature under the global integral did not reach tolerance".into(),
        ));
    }
    Ok(if passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_check_coefficients(args: CheckCoefficientsArgs) -> CmdResult {
    let cfg = resolve_config(&args.common)?;
    let components = match &args.component {
        Some(s) => vec![parse_component(s).map_err(lift)?],
        None => vec![Component::Electric, Component::Magnetic],
    };
    let mut rows = Vec::new();
    for component in &components {
        let expansion = pointlike::singular_expansion(*component).map_err(lift)?;
        rows.push(vec![
            Value::Text(component.to_string()),
            Value::Text("regular".into()),
            Value::Empty,
            Value::Integer(7),
            Value::Integer(expansion.regular.num),
            Value::Integer(expansion.regular.den),
        ]);
        for term in &expansion.delta_terms {
            rows.push(vec![
                Value::Text(component.to_string()),
                Value::Text("delta".into()),
                Value::Integer(term.derivative_order as i64),
                Value::Integer(term.inverse_power as i64),
                Value::Integer(term.coefficient.num),
                Value::Integer(term.coefficient.den),
            ]);
        }
    }
    let mut metadata = base_metadata("check-coefficients", &cfg);
    metadata.push((
        "scale".into(),
        "all coefficients carry a common factor 1/(16*pi^2)".into(),
    ));
    metadata.push((
        "exponent".into(),
        "regular rows: inverse power of r; delta rows: inverse power of the cutoff".into(),
    ));
    let doc = Document {
        metadata,
        columns: vec![
            "component",
            "term",
            "derivative_order",
            "inverse_power",
            "coefficient_num",
            "coefficient_den",
        ],
        rows,
    };
    emit(&doc, &args.common)?;
    Ok(EXIT_PASS)
}

fn cmd_singular(args: SingularArgs) -> CmdResult {
    let cfg = resolve_config(&args.common)?;
    let gammas = args
        .gamma
        .unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]);
    for &gamma in &gammas {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err((EXIT_INVALID_INPUT, "regulator must be positive".into()));
        }
    }
    let report = pointlike::verify_singular_cancellation(&gammas, &cfg).map_err(lift)?;

    let mut metadata = base_metadata("singular", &cfg);
    metadata.push((
        "gamma".into(),
        gammas
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(","),
    ));
    for component in [Component::Electric, Component::Magnetic] {
        let expansion = pointlike::singular_expansion(component).map_err(lift)?;
        metadata.push((
            format!("{component}-regular"),
            expansion.regular.to_string(),
        ));
        metadata.push((
            format!("{component}-delta"),
            expansion
                .delta_terms
                .iter()
                .map(|t| {
                    format!(
                        "({},{},{})",
                        t.derivative_order, t.inverse_power, t.coefficient
                    )
                })
                .collect::<Vec<_>>()
                .join(";"),
        ));
    }
    metadata.push((
        "max-scaling-deviation".into(),
        format!("{:e}", report.max_scaling_deviation),
    ));
    metadata.push(("status".into(), status_text(report.passed)));

    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                Value::Number(r.gamma),
                Value::Number(r.electric),
                Value::Number(r.magnetic),
                Value::Number(r.total),
                Value::Number(r.electric_times_gamma4),
                Value::Number(r.total_error_estimate),
                Value::Flag(r.converged),
                Value::Flag(r.passed),
            ]
        })
        .collect();
    let doc = Document {
        metadata,
        columns: vec![
            "gamma",
            "electric",
            "magnetic",
            "total",
            "electric_gamma4",
            "total_error",
            "converged",
            "passed",
        ],
        rows,
    };
    emit(&doc, &args.common)?;
    if report.rows.iter().any(|r| !r.converged) {
        return Err((
            EXIT_NON_CONVERGED,
            "one or more cutoff values did not reach the requested tolerance".into(),
        ));
    }
    Ok(if report.passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_limit(args: LimitArgs) -> CmdResult {
    let cfg = resolve_config(&args.common)?;
    let component = parse_component(&args.component).map_err(lift)?;
    let pol = parse_polarizability(&args.alpha).map_err(lift)?;
    if pol.kind != PolarizabilityKind::Static {
        return Err((
            EXIT_INVALID_INPUT,
            "the point-like limit compares against the static response; pass --alpha static:<a0>"
                .into(),
        ));
    }
    let report = extsource::point_limit_study(&args.a, args.big_r, component, pol.alpha0, &cfg)
        .map_err(lift)?;
    let passed = report.deviation <= 1e-4;

    let mut metadata = base_metadata("limit", &cfg);
    metadata.push(("R".into(), format!("{}", args.big_r)));
    metadata.push(("component".into(), component.to_string()));
    metadata.push(("alpha".into(), pol.to_string()));
    metadata.push(("extrapolated".into(), format!("{:.16e}", report.extrapolated)));
    metadata.push((
        "extrapolation-error".into(),
        format!("{:e}", report.extrapolation_error),
    ));
    metadata.push(("point-value".into(), format!("{:.16e}", report.point_value)));
    metadata.push(("deviation".into(), format!("{:e}", report.deviation)));
    metadata.push(("status".into(), status_text(passed)));

    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                Value::Number(r.a),
                Value::Number(r.density),
                Value::Number(r.error_estimate),
                Value::Flag(r.converged),
            ]
        })
        .collect();
    let doc = Document {
        metadata,
        columns: vec!["a", "density", "error_estimate", "converged"],
        rows,
    };
    emit(&doc, &args.common)?;
    if report.rows.iter().any(|r| !r.converged) {
        return Err((
            EXIT_NON_CONVERGED,
            "one or more source sizes did not reach the requested tolerance".into(),
        ));
    }
    Ok(if passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}
