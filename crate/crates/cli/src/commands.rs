use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use reebforge_core::certificate::{certify, CertificateBundle, CertificateOptions};
use reebforge_core::graph_model::{check_embedding_conditions, EmbeddedGraphDescription, GraphSpec, Violation};
use reebforge_core::layout::{build_arrangement, CircleArrangement, LayoutError};
use reebforge_core::poly::{
    expand, nonsingular_extension, synthesize_from, Expansion, FactoredPolynomial, PolyError, Synthesis, SynthesisError,
    DEFAULT_MONOMIAL_GUARD,
};
use reebforge_core::sweep::sweep_reeb;
use reebforge_core::{validate, ValidatedSpec, DEFAULT_PRECISION_BITS};

use crate::svg::{render_svg, PlotOptions};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PACKING: i32 = 3;
pub const EXIT_CERTIFICATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "reebforge", version, about = "Synthesize and certify real algebraic maps with prescribed Reeb graphs")]
pub struct Cli {
    /// Interval working precision in bits; falls back to the spec's value, then 128
    #[arg(long, global = true, env = "REEBFORGE_PRECISION")]
    pub precision_bits: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the arrangement and polynomial for a spec and certify them.
    Synthesize(SynthesizeArgs),
    /// Re-run every certificate on existing model and arrangement files.
    Verify(VerifyArgs),
    /// Draw an arrangement and its Reeb graph as SVG.
    Plot(PlotArgs),
    /// Write the polynomial as JSON or plain text.
    Export(ExportArgs),
    /// Write the region description whose boundary is the model.
    Extend(ExtendArgs),
    /// Check an embedded graph for the degree, injectivity and interiority conditions.
    CheckGraph(CheckGraphArgs),
}

#[derive(Debug, Args)]
pub struct SpecSource {
    /// Spec JSON file.
    #[arg(long, conflicts_with = "inline")]
    pub spec: Option<PathBuf>,
    /// Spec JSON given on the command line.
    #[arg(long)]
    pub inline: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleRes(pub Option<(usize, usize)>);

impl std::str::FromStr for OracleRes {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "none" {
            return Ok(OracleRes(None));
        }
        let (r, a) = s.split_once('x').ok_or_else(|| format!("expected RxA or none, got {s:?}"))?;
        let r = r.parse().map_err(|_| format!("bad radial resolution {r:?}"))?;
        let a = a.parse().map_err(|_| format!("bad angular resolution {a:?}"))?;
        Ok(OracleRes(Some((r, a))))
    }
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Raster oracle resolution as RADIALxANGULAR, or `none`.
    #[arg(long, default_value = "2048x512")]
    pub oracle_res: OracleRes,
    /// Seed for the zero-set sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Quasi-random planar points for the region identity check.
    #[arg(long, default_value_t = 100_000)]
    pub region_points: usize,
    /// Zero-set points for the regularity check.
    #[arg(long, default_value_t = 1_000)]
    pub regularity_points: usize,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub source: SpecSource,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub certify: CertifyArgs,
    /// Also store the monomial expansion in model.json.
    #[arg(long)]
    pub expand: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub arrangement: PathBuf,
    /// Output directory for certificate.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub certify: CertifyArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub arrangement: PathBuf,
    /// SVG file to write.
    #[arg(long, default_value = "arrangement.svg")]
    pub out: PathBuf,
    /// Side length of each panel in pixels.
    #[arg(long, default_value_t = 600)]
    pub size: u32,
    /// Label circles and vertices.
    #[arg(long)]
    pub labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest number of monomials to expand.
    #[arg(long, default_value_t = DEFAULT_MONOMIAL_GUARD)]
    pub guard: usize,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "extension.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckGraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Settings recorded in every model so runs can be reproduced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub seed: u64,
    pub oracle_res: Option<[usize; 2]>,
    pub region_points: usize,
    pub staged_points: usize,
    pub regularity_points: usize,
    pub band: f64,
    pub margin_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSummary {
    pub channel: [u32; 2],
    pub word: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub config: RunConfig,
    pub spec: GraphSpec,
    pub degree: u32,
    pub expected_degree: u32,
    pub n_vars: usize,
    pub polynomial: FactoredPolynomial,
    pub fibers: Vec<FiberSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Expansion>,
}

const MODEL_FORMAT: &str = "reebforge-model/1";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let prec = cli.precision_bits;
    match cli.command {
        Command::Synthesize(a) => cmd_synthesize(&a, prec).map(|_| ()),
        Command::Verify(a) => cmd_verify(&a, prec).map(|_| ()),
        Command::Plot(a) => cmd_plot(&a, prec),
        Command::Export(a) => cmd_export(&a, prec),
        Command::Extend(a) => cmd_extend(&a),
        Command::CheckGraph(a) => cmd_check_graph(&a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, body).map_err(|e| io_err(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(body).map_err(|e| CliError::new(EXIT_VALIDATION, format!("malformed {what}: {e}")))
}

fn violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("{x:?}: {x}")).collect::<Vec<_>>().join("; ")
}

fn load_spec(src: &SpecSource) -> Result<GraphSpec, CliError> {
    let body = match (&src.spec, &src.inline) {
        (Some(p), _) => read(p)?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(CliError::new(EXIT_VALIDATION, "one of --spec or --inline is required")),
    };
    parse_json(&body, "spec")
}

/// Flag or environment first, then the spec's own setting, then the default.
fn effective_precision(flag: Option<u32>, spec: &GraphSpec) -> Result<u32, CliError> {
    let p = flag.or(spec.precision_bits).unwrap_or(DEFAULT_PRECISION_BITS);
    if p < 32 {
        return Err(CliError::new(EXIT_VALIDATION, format!("{:?}", Violation::PrecisionTooLow(p))));
    }
    Ok(p)
}

fn options(args: &CertifyArgs, prec: u32) -> CertificateOptions {
    CertificateOptions {
        precision_bits: prec,
        seed: args.seed,
        oracle: args.oracle_res.0,
        region_points: args.region_points,
        regularity_points: args.regularity_points,
        ..CertificateOptions::default()
    }
}

fn record(opts: &CertificateOptions) -> RunConfig {
    RunConfig {
        precision_bits: opts.precision_bits,
        seed: opts.seed,
        oracle_res: opts.oracle.map(|(r, a)| [r, a]),
        region_points: opts.region_points,
        staged_points: opts.staged_points,
        regularity_points: opts.regularity_points,
        band: opts.band,
        margin_threshold: opts.margin_threshold,
    }
}

fn layout_error(e: LayoutError) -> CliError {
    match e {
        LayoutError::PackingFailure(_) => CliError::new(EXIT_PACKING, e.to_string()),
        LayoutError::MarginViolation { .. } => CliError::new(EXIT_CERTIFICATION, e.to_string()),
    }
}

fn synthesis_error(e: SynthesisError) -> CliError {
    match e {
        SynthesisError::Layout(l) => layout_error(l),
        SynthesisError::Poly(p @ PolyError::NoFactors) => CliError::new(EXIT_FAILURE, p.to_string()),
        SynthesisError::Poly(p) => CliError::new(EXIT_CERTIFICATION, p.to_string()),
    }
}

fn validated(spec: &GraphSpec) -> Result<ValidatedSpec, CliError> {
    validate(spec).map_err(|v| CliError::new(EXIT_VALIDATION, violations(&v)))
}

fn fiber_summary(syn: &Synthesis, prec: u32) -> Vec<FiberSummary> {
    sweep_reeb(&syn.arrangement, prec)
        .map(|g| g.edges.iter().map(|e| FiberSummary { channel: e.channel, word: e.fiber.clone() }).collect())
        .unwrap_or_default()
}

fn certification_result(bundle: &CertificateBundle) -> Result<(), CliError> {
    if bundle.pass {
        Ok(())
    } else {
        Err(CliError::new(EXIT_CERTIFICATION, format!("certification failed: {}", bundle.failures.join("; "))))
    }
}

/// Writes model.json, arrangement.json and certificate.json into `out`.
pub fn cmd_synthesize(args: &SynthesizeArgs, flag_prec: Option<u32>) -> Result<CertificateBundle, CliError> {
    let spec = load_spec(&args.source)?;
    let prec = effective_precision(flag_prec, &spec)?;
    let v = validated(&spec)?;
    let arr = build_arrangement(&v, prec).map_err(layout_error)?;
    let syn = synthesize_from(&v, arr, prec).map_err(synthesis_error)?;
    let opts = options(&args.certify, prec);
    let bundle = certify(&v, &syn, &opts);
    let expansion = if args.expand {
        Some(expand(&syn.polynomial, prec, DEFAULT_MONOMIAL_GUARD).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?)
    } else {
        None
    };
    let model = ModelFile {
        format: MODEL_FORMAT.into(),
        config: record(&opts),
        spec: spec.clone(),
        degree: syn.degree,
        expected_degree: syn.expected_degree,
        n_vars: syn.polynomial.n_vars,
        fibers: fiber_summary(&syn, prec),
        polynomial: syn.polynomial.clone(),
        expansion,
    };
    write(&args.out.join("model.json"), &to_json(&model))?;
    write(&args.out.join("arrangement.json"), &to_json(&syn.arrangement))?;
    write(&args.out.join("certificate.json"), &to_json(&bundle))?;
    certification_result(&bundle)?;
    Ok(bundle)
}

fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let m: ModelFile = parse_json(&read(path)?, "model")?;
    if m.format != MODEL_FORMAT {
        return Err(CliError::new(EXIT_VALIDATION, format!("unknown model format {:?}", m.format)));
    }
    Ok(m)
}

/// Differences between a stored arrangement and the one the spec rebuilds to.
fn arrangement_mismatches(spec: &GraphSpec, stored: &CircleArrangement, rebuilt: &CircleArrangement) -> Vec<String> {
    let mut out = Vec::new();
    if stored.mode != spec.mode || stored.k != spec.vertices {
        out.push("arrangement mode or vertex count differs from the spec".to_string());
    }
    if stored.multiplicities != spec.multiplicities {
        out.push(format!("arrangement multiplicities {:?} differ from the spec's {:?}", stored.multiplicities, spec.multiplicities));
    }
    if stored.dimension != spec.dimension || stored.handles != spec.handles {
        out.push("arrangement dimension or handles differ from the spec".to_string());
    }
    if stored.circles != rebuilt.circles || stored.a != rebuilt.a || stored.ellipse != rebuilt.ellipse {
        out.push("arrangement geometry differs from the layout of the spec".to_string());
    }
    out
}

pub fn cmd_verify(args: &VerifyArgs, flag_prec: Option<u32>) -> Result<CertificateBundle, CliError> {
    let model = load_model(&args.model)?;
    let stored: CircleArrangement = parse_json(&read(&args.arrangement)?, "arrangement")?;
    let prec = effective_precision(flag_prec, &model.spec)?;
    let v = validated(&model.spec)?;
    let rebuilt = build_arrangement(&v, prec).map_err(layout_error)?;
    let mismatches = arrangement_mismatches(&model.spec, &stored, &rebuilt);
    let syn =
        Synthesis { arrangement: stored, polynomial: model.polynomial.clone(), degree: model.degree, expected_degree: v.expected_degree() };
    let mut bundle = certify(&v, &syn, &options(&args.certify, prec));
    if syn.polynomial.planar != reebforge_core::poly::region_polynomial(&syn.arrangement).planar {
        bundle.failures.push("polynomial factors do not match the arrangement".into());
    }
    bundle.failures.extend(mismatches);
    bundle.pass = bundle.failures.is_empty();
    write(&args.out.join("certificate.json"), &to_json(&bundle))?;
    certification_result(&bundle)?;
    Ok(bundle)
}

pub fn cmd_plot(args: &PlotArgs, flag_prec: Option<u32>) -> Result<(), CliError> {
    let arr: CircleArrangement = parse_json(&read(&args.arrangement)?, "arrangement")?;
    let prec = flag_prec.unwrap_or(DEFAULT_PRECISION_BITS);
    let graph = sweep_reeb(&arr, prec).ok();
    let svg = render_svg(&arr, graph.as_ref(), &PlotOptions { size: args.size, labels: args.labels }, prec);
    write(&args.out, &svg)
}

#[derive(Serialize)]
struct ExportJson<'a> {
    n_vars: usize,
    degree: u32,
    polynomial: &'a FactoredPolynomial,
    expansion: &'a Expansion,
}

pub fn cmd_export(args: &ExportArgs, flag_prec: Option<u32>) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let prec = effective_precision(flag_prec, &model.spec)?;
    let e = expand(&model.polynomial, prec, args.guard).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    let body = match args.format {
        Format::Json => to_json(&ExportJson { n_vars: model.n_vars, degree: model.degree, polynomial: &model.polynomial, expansion: &e }),
        Format::Text => {
            let vars: Vec<String> = (1..=model.n_vars).map(|i| format!("x{i}")).collect();
            format!("P({}) = {}\n", vars.join(","), e.to_text())
        }
    };
    match &args.out {
        Some(p) => write(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn cmd_extend(args: &ExtendArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let ext = nonsingular_extension(&model.polynomial, model.spec.mode).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    write(&args.out, &to_json(&ext))
}

pub fn cmd_check_graph(args: &CheckGraphArgs) -> Result<(), CliError> {
    let g: EmbeddedGraphDescription = parse_json(&read(&args.graph)?, "graph")?;
    g.check_references().map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    let report = check_embedding_conditions(&g);
    let body = match args.format {
        Format::Json => to_json(&report),
        Format::Text => {
            let line = |name: &str, c: &reebforge_core::graph_model::ConditionOutcome| {
                format!("{name}: {} {:?}\n", if c.pass { "pass" } else { "fail" }, c.offenders)
            };
            let mut s = String::new();
            s += &line("degrees one or three", &report.degrees_one_or_three);
            s += &line("vertex angles injective", &report.vertex_angles_injective);
            s += &line("trivalent vertices interior", &report.trivalent_vertices_interior);
            s += &format!("overall: {}\n", if report.pass { "pass" } else { "fail" });
            s
        }
    };
    match &args.out {
        Some(p) => write(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
