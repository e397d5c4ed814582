//! Command-line front end: JSON field specifications in, structured
//! verification reports out.
//!
//! Subcommands: `verify`, `params`, `twist`, `fixed-points`, `normal-form`,
//! `first-variation`, `energy`, `catalog`.  Common flags: `--spec PATH`,
//! `--p X`, `--q X`, `--samples N`, `--seed N`, `--tol X`,
//! `--format json|text`, and `--target j|anti|j-anti` for `twist`.  The
//! seed falls back from `--seed` to the spec file to the `HARMFIELD_SEED`
//! environment variable.  Reports are deterministic for a fixed spec and
//! seed (no timestamps, fixed field order); exit codes are `0` when every
//! verdict passes, `1` on a verification failure or domain error, and `2`
//! on input errors.

use crate::cgmetric::{energy_density, vertical_energy_density, MetricParams};
use crate::error::Error;
use crate::fields::{j_twist, AmbientPolyField, ConformalGradientField, KillingField, VectorField};
use crate::harmonic::{
    classify_cgf, first_variation, is_pq_harmonic, killing_harmonic_condition_2d,
    preharmonic_lambda, solve_metric_params, weitzenbock_residual, BumpSpec, ExactPreharmonicData,
    PatchSpec, CLOSED_FORM_TOL, DEFAULT_SAMPLES, DEFAULT_SEED, GENERIC_TOL,
};
use crate::poly::Poly;
use crate::pseudolin::{AmbientVector, Matrix};
use crate::quadric::{canonical_anti_isometry, PointSampler, Quadric, QuadricKind};
use crate::rational::Rational;
use crate::surfaces2d::{
    fixed_points, harmonic_killing_catalog, normal_form, FixedPointCategory, Killing2D,
};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Field specification schema.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpecFile {
    pub quadric: QuadricSpec,
    pub field: FieldDef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variation: Option<VariationSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadricSpec {
    pub kind: String,
    pub n: usize,
    pub v: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDef {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polys: Option<Vec<Vec<PolyTerm>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coeff: f64,
    pub exponents: Vec<u16>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationSpec {
    pub rho: FieldDef,
    pub patch: PatchSpecDef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpecDef {
    pub solve_coord: usize,
    pub branch: f64,
    pub intervals: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

// ---------------------------------------------------------------------------
// Report schema.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub quadric: Option<QuadricSpec>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parameter_sets: Vec<RationalPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<serde_json::Value>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub max_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalPair {
    pub p: RationalJson,
    pub q: RationalJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl RationalJson {
    fn from(r: &Rational) -> Self {
        RationalJson {
            num: r.num() as i64,
            den: r.den() as i64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples: usize,
    pub harmonic_tol: f64,
    pub identity_tol: f64,
    pub version: String,
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch.
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Input problems: bad flags, unreadable files, schema violations.
    Input(String),
    /// Valid input that the library rejects (domain errors).
    Domain(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("spec parse error: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Text,
}

struct Options {
    command: String,
    spec: Option<String>,
    p: Option<f64>,
    q: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    format: OutputFormat,
    target: Option<String>,
}

fn parse_options(args: &[String]) -> Result<Options, CliError> {
    if args.is_empty() {
        return Err(CliError::Input(USAGE.to_string()));
    }
    let mut opts = Options {
        command: args[0].clone(),
        spec: None,
        p: None,
        q: None,
        samples: None,
        seed: None,
        tol: None,
        format: OutputFormat::Json,
        target: None,
    };
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let mut take = |name: &str| -> Result<String, CliError> {
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| CliError::Input(format!("missing value for {name}")))
        };
        match flag {
            "--spec" => opts.spec = Some(take("--spec")?),
            "--p" => {
                opts.p = Some(
                    take("--p")?
                        .parse()
                        .map_err(|_| CliError::Input("--p expects a real number".to_string()))?,
                )
            }
            "--q" => {
                opts.q = Some(
                    take("--q")?
                        .parse()
                        .map_err(|_| CliError::Input("--q expects a real number".to_string()))?,
                )
            }
            "--samples" => {
                opts.samples = Some(
                    take("--samples")?
                        .parse()
                        .map_err(|_| CliError::Input("--samples expects an integer".to_string()))?,
                )
            }
            "--seed" => {
                opts.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|_| CliError::Input("--seed expects an integer".to_string()))?,
                )
            }
            "--tol" => {
                opts.tol = Some(
                    take("--tol")?
                        .parse()
                        .map_err(|_| CliError::Input("--tol expects a real number".to_string()))?,
                )
            }
            "--format" => {
                opts.format = match take("--format")?.as_str() {
                    "json" => OutputFormat::Json,
                    "text" => OutputFormat::Text,
                    other => {
                        return Err(CliError::Input(format!(
                            "unknown format '{other}' (expected json or text)"
                        )))
                    }
                }
            }
            "--target" => opts.target = Some(take("--target")?),
            other => return Err(CliError::Input(format!("unknown flag '{other}'"))),
        }
        i += 1;
    }
    Ok(opts)
}

const USAGE: &str = "usage: harmfield <verify|params|twist|fixed-points|normal-form|first-variation|energy|catalog> \
[--spec PATH] [--p X] [--q X] [--samples N] [--seed N] [--tol X] [--format json|text] [--target j|anti|j-anti]";

/// Entry point: returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    if args.first().map(String::as_str) == Some("help")
        || args.iter().any(|a| a == "--help" || a == "-h")
    {
        println!("{USAGE}");
        return 0;
    }
    match dispatch(args) {
        Ok((report, all_pass, format)) => {
            print_report(&report, &format);
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn print_report(report: &Report, format: &OutputFormat) {
    match format {
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(report).expect("report serialises")
            );
        }
        OutputFormat::Text => {
            println!("command: {}", report.command);
            if let Some(q) = &report.quadric {
                println!("quadric: {} n={} v={}", q.kind, q.n, q.v);
            }
            for v in &report.verdicts {
                println!(
                    "check {}: {} max_residual={:.16e} samples={}",
                    v.check,
                    if v.pass { "PASS" } else { "FAIL" },
                    v.max_residual,
                    v.samples
                );
            }
            for pair in &report.parameter_sets {
                println!(
                    "parameters: p = {}/{}, q = {}/{}",
                    pair.p.num, pair.p.den, pair.q.num, pair.q.den
                );
            }
            if let Some(out) = &report.output {
                println!("output: {out}");
            }
            println!(
                "provenance: seed={} samples={} harmonic_tol={:.16e} identity_tol={:.16e} version={}",
                report.provenance.seed,
                report.provenance.samples,
                report.provenance.harmonic_tol,
                report.provenance.identity_tol,
                report.provenance.version
            );
        }
    }
}

/// Parses a field specification document (the same JSON schema the CLI
/// consumes from files) and builds the described field.  Exposed for
/// embedders such as the C ABI layer.
pub fn parse_field_spec(text: &str) -> std::result::Result<(FieldSpecFile, VectorField), String> {
    let file: FieldSpecFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let quadric = parse_quadric(&file.quadric).map_err(|e| match e {
        CliError::Input(m) | CliError::Domain(m) => m,
    })?;
    let field = build_field(&quadric, &file.field).map_err(|e| match e {
        CliError::Input(m) | CliError::Domain(m) => m,
    })?;
    Ok((file, field))
}

struct LoadedSpec {
    file: FieldSpecFile,
    quadric: Quadric,
    field: VectorField,
    params: MetricParams,
    samples: usize,
    seed: u64,
    harmonic_tol: f64,
    identity_tol: f64,
}

fn dispatch(args: &[String]) -> Result<(Report, bool, OutputFormat), CliError> {
    let opts = parse_options(args)?;
    let format = opts.format.clone();
    let (report, all_pass) = match opts.command.as_str() {
        "verify" => cmd_verify(&opts)?,
        "params" => cmd_params(&opts)?,
        "twist" => cmd_twist(&opts)?,
        "fixed-points" => cmd_fixed_points(&opts)?,
        "normal-form" => cmd_normal_form(&opts)?,
        "first-variation" => cmd_first_variation(&opts)?,
        "energy" => cmd_energy(&opts)?,
        "catalog" => cmd_catalog(&opts)?,
        other => {
            return Err(CliError::Input(format!(
                "unknown command '{other}'\n{USAGE}"
            )))
        }
    };
    Ok((report, all_pass, format))
}

// ---------------------------------------------------------------------------
// Spec loading and field construction.
// ---------------------------------------------------------------------------

fn parse_quadric(spec: &QuadricSpec) -> Result<Quadric, CliError> {
    if spec.n < 2 {
        return Err(CliError::Input("quadric dimension n must be >= 2".into()));
    }
    if spec.v > spec.n {
        return Err(CliError::Input(
            "quadric index v must satisfy v <= n".into(),
        ));
    }
    match spec.kind.as_str() {
        "sphere" => Ok(Quadric::sphere(spec.n, spec.v)),
        "hyperbolic" => Ok(Quadric::hyperbolic(spec.n, spec.v)),
        other => Err(CliError::Input(format!(
            "unknown quadric kind '{other}' (expected sphere or hyperbolic)"
        ))),
    }
}

fn build_field(quadric: &Quadric, def: &FieldDef) -> Result<VectorField, CliError> {
    let dim = quadric.dim() + 1;
    match def.kind.as_str() {
        "cgf" => {
            let pole = def
                .pole
                .as_ref()
                .ok_or_else(|| CliError::Input("cgf field needs a pole".into()))?;
            if pole.len() != dim {
                return Err(CliError::Input(format!("pole must have {dim} coordinates")));
            }
            let f = ConformalGradientField::new(quadric.clone(), AmbientVector(pole.clone()))
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(VectorField::ConformalGradient(f))
        }
        "killing" => {
            let rows = def
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::Input("killing field needs a matrix".into()))?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::Input(format!("matrix must be {dim}x{dim}")));
            }
            let m = Matrix::from_rows(rows);
            let f = KillingField::new(quadric.clone(), m, 1e-10).map_err(|e| {
                CliError::Input(format!("matrix is not skew for the quadric signature: {e}"))
            })?;
            Ok(VectorField::Killing(f))
        }
        "poly" => {
            let comps = def
                .polys
                .as_ref()
                .ok_or_else(|| CliError::Input("poly field needs components".into()))?;
            if comps.len() != dim {
                return Err(CliError::Input(format!(
                    "poly field needs {dim} components"
                )));
            }
            let components: Vec<Poly> = comps
                .iter()
                .map(|terms| {
                    let pairs: Vec<(f64, Vec<u16>)> = terms
                        .iter()
                        .map(|t| (t.coeff, t.exponents.clone()))
                        .collect();
                    for (_, e) in &pairs {
                        if e.len() != dim {
                            return Err(CliError::Input(format!(
                                "every exponent vector needs {dim} entries"
                            )));
                        }
                    }
                    Ok(Poly::from_terms(dim, &pairs))
                })
                .collect::<Result<_, _>>()?;
            let f = AmbientPolyField::new(quadric.clone(), components)
                .map_err(|e| CliError::Input(format!("poly field rejected: {e}")))?;
            Ok(VectorField::Polynomial(f))
        }
        other => Err(CliError::Input(format!(
            "unknown field type '{other}' (expected cgf, killing or poly)"
        ))),
    }
}

/// Renders a field back in spec-file form.
fn echo_field(field: &VectorField) -> FieldDef {
    match field {
        VectorField::ConformalGradient(f) => FieldDef {
            kind: "cgf".into(),
            pole: Some(f.pole().0.clone()),
            matrix: None,
            polys: None,
        },
        VectorField::Killing(f) => {
            let m = f.matrix().entries();
            let rows = (0..m.n_rows())
                .map(|i| (0..m.n_cols()).map(|j| m.get(i, j)).collect())
                .collect();
            FieldDef {
                kind: "killing".into(),
                pole: None,
                matrix: Some(rows),
                polys: None,
            }
        }
        VectorField::Polynomial(f) => {
            let polys = f
                .components()
                .iter()
                .map(|p| {
                    p.terms()
                        .map(|(e, c)| PolyTerm {
                            coeff: *c,
                            exponents: e.clone(),
                        })
                        .collect()
                })
                .collect();
            FieldDef {
                kind: "poly".into(),
                pole: None,
                matrix: None,
                polys: Some(polys),
            }
        }
    }
}

fn load_spec(opts: &Options) -> Result<LoadedSpec, CliError> {
    let path = opts
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Input("--spec PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read spec file '{path}': {e}")))?;
    let file: FieldSpecFile = serde_json::from_str(&text)?;
    let quadric = parse_quadric(&file.quadric)?;
    let field = build_field(&quadric, &file.field)?;

    let params = match (opts.p, opts.q, &file.params) {
        (Some(p), Some(q), _) => MetricParams::new(p, q),
        (p_flag, q_flag, Some(ps)) => {
            MetricParams::new(p_flag.unwrap_or(ps.p), q_flag.unwrap_or(ps.q))
        }
        (Some(_), None, None) | (None, Some(_), None) => {
            return Err(CliError::Input(
                "both --p and --q are needed when the spec has no params".into(),
            ))
        }
        (None, None, None) => MetricParams::new(3.0, -0.5),
    };

    let sampling = file.sampling.as_ref();
    let samples = opts
        .samples
        .or(sampling.and_then(|s| s.count))
        .unwrap_or(DEFAULT_SAMPLES);
    let seed = opts
        .seed
        .or(sampling.and_then(|s| s.seed))
        .or_else(|| {
            std::env::var("HARMFIELD_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED);

    let default_harmonic = match field {
        VectorField::Polynomial(_) => GENERIC_TOL,
        _ => CLOSED_FORM_TOL,
    };
    let tolerances = file.tolerances.as_ref();
    let harmonic_tol = opts
        .tol
        .or(tolerances.and_then(|t| t.harmonic))
        .unwrap_or(default_harmonic);
    let identity_tol = tolerances.and_then(|t| t.identity).unwrap_or(1e-8);

    Ok(LoadedSpec {
        file,
        quadric,
        field,
        params,
        samples,
        seed,
        harmonic_tol,
        identity_tol,
    })
}

fn provenance(spec: &LoadedSpec) -> Provenance {
    Provenance {
        seed: spec.seed,
        samples: spec.samples,
        harmonic_tol: spec.harmonic_tol,
        identity_tol: spec.identity_tol,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

fn harmonicity_verdict(
    label: &str,
    field: &VectorField,
    params: MetricParams,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Verdict, CliError> {
    let check = is_pq_harmonic(field, params, samples, seed, tol)?;
    Ok(Verdict {
        check: format!("{label} harmonicity(p={}, q={})", params.p, params.q),
        pass: check.passes,
        max_residual: check.max_residual,
        samples: check.samples,
    })
}

fn cmd_verify(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let mut verdicts = vec![harmonicity_verdict(
        "field",
        &spec.field,
        spec.params,
        spec.samples,
        spec.seed,
        spec.harmonic_tol,
    )?];

    // Identity residuals over a smaller panel of points.
    let identity_samples = spec.samples.clamp(1, 50);
    let mut sampler = PointSampler::new(spec.quadric.clone(), spec.seed ^ 0x1DE57);
    let mut worst = 0.0f64;
    for _ in 0..identity_samples {
        let x = sampler.next_point();
        worst = worst.max(weitzenbock_residual(&spec.field, &x)?);
    }
    verdicts.push(Verdict {
        check: "weitzenbock identity".into(),
        pass: worst <= spec.identity_tol,
        max_residual: worst,
        samples: identity_samples,
    });

    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok((
        Report {
            command: "verify".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts,
            parameter_sets: vec![],
            output: None,
            provenance: provenance(&spec),
        },
        all_pass,
    ))
}

fn rationalize(value: f64, what: &str) -> Result<Rational, CliError> {
    Rational::approximate(value, 1_000_000, 1e-9).ok_or_else(|| {
        CliError::Domain(format!(
            "{what} = {value} is not recognisably rational; exact parameter solving unavailable"
        ))
    })
}

fn cmd_params(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let n = spec.quadric.dim();
    let eps = spec.quadric.epsilon() as i64;
    let solutions = match &spec.field {
        VectorField::ConformalGradient(f) => {
            let mu = rationalize(f.mu(), "pole pseudo-length")?;
            let solved = solve_metric_params(&ExactPreharmonicData::cgf(n, eps, mu))?;
            let closed = classify_cgf(n, mu);
            if solved != closed {
                return Err(CliError::Domain(
                    "solver and closed-form classification disagree".into(),
                ));
            }
            solved
        }
        VectorField::Killing(k) => {
            let lambda = preharmonic_lambda(k, 1e-9)
                .ok_or_else(|| CliError::Domain("Killing field is not preharmonic".into()))?;
            let lambda_r = rationalize(lambda, "lambda")?;
            let norm_r = rationalize(k.extension_norm(), "extension norm")?;
            let solved =
                solve_metric_params(&ExactPreharmonicData::killing(n, eps, lambda_r, norm_r))?;
            if n == 2 {
                // Cross-check against the surface rule.
                let rule = killing_harmonic_condition_2d(eps as i8, lambda, 1e-9);
                let expected: std::collections::BTreeSet<_> = rule
                    .map(|_| (Rational::from_int(3), Rational::new(-1, 2)))
                    .into_iter()
                    .collect();
                if solved != expected {
                    return Err(CliError::Domain(
                        "solver disagrees with the surface lambda rule".into(),
                    ));
                }
            }
            solved
        }
        VectorField::Polynomial(_) => {
            return Err(CliError::Domain(
                "parameter solving needs a cgf or preharmonic Killing field".into(),
            ))
        }
    };

    let parameter_sets: Vec<RationalPair> = solutions
        .iter()
        .map(|(p, q)| RationalPair {
            p: RationalJson::from(p),
            q: RationalJson::from(q),
        })
        .collect();
    Ok((
        Report {
            command: "params".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts: vec![],
            parameter_sets,
            output: None,
            provenance: provenance(&spec),
        },
        true,
    ))
}

fn anti_isometry_for(quadric: &Quadric) -> Result<Matrix, CliError> {
    match quadric.kind() {
        QuadricKind::Hyperbolic => Ok(canonical_anti_isometry(quadric.dim(), quadric.index())),
        QuadricKind::Sphere => {
            canonical_anti_isometry(quadric.dim(), quadric.dim() - quadric.index())
                .inverse()
                .map_err(|e| CliError::Domain(e.to_string()))
        }
    }
}

fn cmd_twist(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let target = opts.target.clone().unwrap_or_else(|| "j-anti".into());
    let mut verdicts = vec![harmonicity_verdict(
        "before",
        &spec.field,
        spec.params,
        spec.samples,
        spec.seed,
        spec.harmonic_tol,
    )?];

    let mut field = spec.field.clone();
    if target == "j" || target == "j-anti" {
        field = j_twist(&field)?;
    }
    if target == "anti" || target == "j-anti" {
        let p = anti_isometry_for(field.quadric())?;
        // Name the target explicitly: on the definite quadrics the
        // canonical anti-isometry is the identity, which would otherwise
        // read as an isometry onto the source itself.
        let partner = field.quadric().anti_partner();
        field = field.push_forward_to(&p, &partner)?;
    }
    if !["j", "anti", "j-anti"].contains(&target.as_str()) {
        return Err(CliError::Input(format!(
            "unknown twist target '{target}' (expected j, anti or j-anti)"
        )));
    }

    // Twisting routes through the polynomial engine, so verify the
    // transformed field at the generic tolerance.
    let after_tol = spec.harmonic_tol.max(GENERIC_TOL);
    verdicts.push(harmonicity_verdict(
        "after",
        &field,
        spec.params,
        spec.samples,
        spec.seed,
        after_tol,
    )?);

    let target_quadric = field.quadric();
    let output = serde_json::json!({
        "target": target,
        "transformed": FieldSpecFile {
            quadric: QuadricSpec {
                kind: match target_quadric.kind() {
                    QuadricKind::Sphere => "sphere".into(),
                    QuadricKind::Hyperbolic => "hyperbolic".into(),
                },
                n: target_quadric.dim(),
                v: target_quadric.index(),
            },
            field: echo_field(&field),
            params: spec.file.params,
            tolerances: spec.file.tolerances,
            sampling: spec.file.sampling,
            variation: None,
        },
    });

    Ok((
        Report {
            command: "twist".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts,
            parameter_sets: vec![],
            output: Some(output),
            provenance: provenance(&spec),
        },
        true,
    ))
}

fn killing2d_of(spec: &LoadedSpec) -> Result<Killing2D, CliError> {
    match &spec.field {
        VectorField::Killing(k) if spec.quadric.dim() == 2 => {
            Killing2D::from_matrix(spec.quadric.clone(), k.matrix().entries(), 1e-10)
                .map_err(|e| CliError::Domain(e.to_string()))
        }
        _ => Err(CliError::Input(
            "this command needs a killing field on a quadric surface".into(),
        )),
    }
}

fn cmd_fixed_points(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let k = killing2d_of(&spec)?;
    let report = fixed_points(&k)?;
    let category = match report.category {
        FixedPointCategory::NoFixedPoints => "no-fixed-points",
        FixedPointCategory::TwoIdeal => "two-ideal",
        FixedPointCategory::TwoFixed => "two-fixed",
    };
    let points: Vec<Vec<f64>> = report.points.iter().map(|p| p.0.clone()).collect();
    let output = serde_json::json!({
        "lambda": k.lambda(),
        "category": category,
        "points": points,
    });
    Ok((
        Report {
            command: "fixed-points".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts: vec![],
            parameter_sets: vec![],
            output: Some(output),
            provenance: provenance(&spec),
        },
        true,
    ))
}

fn cmd_normal_form(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let k = killing2d_of(&spec)?;
    let result = normal_form(&k)?;
    let to_rows = |m: &Matrix| -> Vec<Vec<f64>> {
        (0..m.n_rows())
            .map(|i| (0..m.n_cols()).map(|j| m.get(i, j)).collect())
            .collect()
    };
    let output = serde_json::json!({
        "lambda": k.lambda(),
        "normal_form": to_rows(&result.normal),
        "conjugator": to_rows(&result.conjugator),
        "residual": result.residual,
    });
    let pass = result.residual <= 1e-10;
    let verdicts = vec![Verdict {
        check: "conjugation residual".into(),
        pass,
        max_residual: result.residual,
        samples: 1,
    }];
    Ok((
        Report {
            command: "normal-form".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts,
            parameter_sets: vec![],
            output: Some(output),
            provenance: provenance(&spec),
        },
        pass,
    ))
}

fn cmd_first_variation(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let variation = spec
        .file
        .variation
        .as_ref()
        .ok_or_else(|| CliError::Input("first-variation needs a 'variation' section".into()))?;
    let rho_field = build_field(&spec.quadric, &variation.rho)?;
    let rho = rho_field.to_poly();
    let patch = PatchSpec {
        solve_coord: variation.patch.solve_coord,
        branch: variation.patch.branch,
        free_coords: (0..spec.quadric.dim() + 1)
            .filter(|&i| i != variation.patch.solve_coord)
            .collect(),
        intervals: variation
            .patch
            .intervals
            .iter()
            .map(|i| (i[0], i[1]))
            .collect(),
        quad_order: variation.patch.order.unwrap_or(24),
    };
    if patch.solve_coord > spec.quadric.dim() {
        return Err(CliError::Input("solve_coord out of range".into()));
    }
    if patch.intervals.len() != spec.quadric.dim() {
        return Err(CliError::Input(format!(
            "patch needs {} intervals",
            spec.quadric.dim()
        )));
    }
    let bump = BumpSpec {
        order: variation.bump_order.unwrap_or(2),
    };
    let dt = variation.dt.unwrap_or(1e-4);
    let check = first_variation(&spec.field, &rho, &bump, &patch, spec.params, dt)?;
    let abs_error = (check.numeric - check.analytic).abs();
    let rel_error = abs_error / check.analytic.abs().max(1e-12);
    let output = serde_json::json!({
        "numeric": check.numeric,
        "analytic": check.analytic,
        "abs_error": abs_error,
        "rel_error": rel_error,
        "dt": dt,
    });
    Ok((
        Report {
            command: "first-variation".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts: vec![],
            parameter_sets: vec![],
            output: Some(output),
            provenance: provenance(&spec),
        },
        true,
    ))
}

fn cmd_energy(opts: &Options) -> Result<(Report, bool), CliError> {
    let spec = load_spec(opts)?;
    let mut sampler = PointSampler::new(spec.quadric.clone(), spec.seed);
    let mut total = Vec::new();
    let mut vertical = Vec::new();
    let mut singular = 0usize;
    for _ in 0..spec.samples {
        let x = sampler.next_point();
        match (
            energy_density(&spec.field, &x, spec.params),
            vertical_energy_density(&spec.field, &x, spec.params),
        ) {
            (Ok(e), Ok(ev)) => {
                total.push(e);
                vertical.push(ev);
            }
            (Err(Error::Singular { .. }), _) | (_, Err(Error::Singular { .. })) => singular += 1,
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    let stats = |v: &[f64]| -> serde_json::Value {
        if v.is_empty() {
            return serde_json::json!(null);
        }
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        serde_json::json!({"min": min, "max": max, "mean": mean})
    };
    let output = serde_json::json!({
        "total_energy_density": stats(&total),
        "vertical_energy_density": stats(&vertical),
        "evaluated_points": total.len(),
        "singular_points": singular,
    });
    Ok((
        Report {
            command: "energy".into(),
            quadric: Some(spec.file.quadric.clone()),
            verdicts: vec![],
            parameter_sets: vec![],
            output: Some(output),
            provenance: provenance(&spec),
        },
        true,
    ))
}

fn cmd_catalog(opts: &Options) -> Result<(Report, bool), CliError> {
    // Catalog over the six quadric surfaces, or only the spec's quadric.
    let surfaces: Vec<Quadric> = if opts.spec.is_some() {
        let spec = load_spec(opts)?;
        if spec.quadric.dim() != 2 {
            return Err(CliError::Input(
                "catalog covers quadric surfaces (n = 2)".into(),
            ));
        }
        vec![spec.quadric]
    } else {
        vec![
            Quadric::sphere(2, 0),
            Quadric::sphere(2, 1),
            Quadric::sphere(2, 2),
            Quadric::hyperbolic(2, 0),
            Quadric::hyperbolic(2, 1),
            Quadric::hyperbolic(2, 2),
        ]
    };
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = opts.tol.unwrap_or(CLOSED_FORM_TOL);
    let mut entries = Vec::new();
    let mut all_pass = true;
    let mut verdicts = Vec::new();
    for q in surfaces {
        let kind = match q.kind() {
            QuadricKind::Sphere => "sphere",
            QuadricKind::Hyperbolic => "hyperbolic",
        };
        match harmonic_killing_catalog(&q) {
            Some(k) => {
                let check = is_pq_harmonic(
                    &VectorField::Killing(k.to_field()),
                    MetricParams::new(3.0, -0.5),
                    samples,
                    seed,
                    tol,
                )?;
                all_pass &= check.passes;
                verdicts.push(Verdict {
                    check: format!("{kind} v={} representative at (3, -1/2)", q.index()),
                    pass: check.passes,
                    max_residual: check.max_residual,
                    samples: check.samples,
                });
                entries.push(serde_json::json!({
                    "quadric": {"kind": kind, "n": 2, "v": q.index()},
                    "representative": {"a": k.a, "b": k.b, "c": k.c},
                    "lambda": k.lambda(),
                }));
            }
            None => {
                entries.push(serde_json::json!({
                    "quadric": {"kind": kind, "n": 2, "v": q.index()},
                    "representative": null,
                }));
            }
        }
    }
    Ok((
        Report {
            command: "catalog".into(),
            quadric: None,
            verdicts,
            parameter_sets: vec![],
            output: Some(serde_json::json!({ "entries": entries })),
            provenance: Provenance {
                seed,
                samples,
                harmonic_tol: tol,
                identity_tol: 1e-8,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        },
        all_pass,
    ))
}
