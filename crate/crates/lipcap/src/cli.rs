use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipcap_core::content::{ball_bracket, dyadic_content, gauge_content, lower_content_estimate, ContentKind, Gauge};
use lipcap_core::geom::{rasterize, Complement, ObstacleKind, ParametricDomain, RasterMode, RasterSet, Scene};
use lipcap_core::math::dyadic_side;
use lipcap_core::measures::{frostman, frostman_lower, DiscreteMeasure, growth_check, GrowthReport, SamplingSpec};
use lipcap_core::partition::{build_partition, DEFAULT_POINTS_PER_SIDE};
use lipcap_core::smoothfn::SmoothProfile;
use lipcap_core::transforms::{cauchy_eval_pairing, cauchy_transform, ts_norm_estimate, CutoffKernel, PoissonGridSpec};
use lipcap_core::wiener::{classify, series_terms, SeriesContent, SeriesSpec, TailModel, Verdict};
use lipcap_core::Point;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Config, GridConfig, OutputFormat};
use crate::error::CliError;
use crate::formats::{read_measure, read_scene, GridFile};
use crate::output::{fmt17, write_json};
use crate::verify::{self, Context};

#[derive(Debug, Parser)]
#[command(name = "lipcap", version, about = "Hausdorff contents and Wiener-type series for planar sets")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Seed for randomized corpora.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest raster depth any command may use (at most 16).
    #[arg(long, global = true)]
    pub depth_cap: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Content of a scene's outer raster.
    Content(ContentArgs),
    /// Wiener series and verdict at a boundary point.
    Classify(ClassifyArgs),
    /// Verdicts of a parametric family over a range of s.
    Sweep(SweepArgs),
    /// Frostman measure of a scene's raster.
    Frostman(FrostmanArgs),
    /// Grid estimate of the negative Lipschitz norm of a measure.
    PoissonNorm(PoissonArgs),
    /// Cauchy transform of a measure at a point.
    Cauchy(CauchyArgs),
    /// Partition of unity subordinate to the maximal blocks of a raster.
    Partition(PartitionArgs),
    /// Runs the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeArg {
    Power,
    Ladder { eta: f64, j: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderArg {
    pub eta: f64,
    pub len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamArg {
    pub kind: ObstacleKind,
    pub a0: f64,
    pub q: f64,
    pub c0: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl RangeArg {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Args)]
pub struct ContentArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// `power` or `ladder:eta=E,j=J`.
    #[arg(long, value_parser = parse_gauge, default_value = "power")]
    pub gauge: GaugeArg,
    /// Also report the ball-content bracket.
    #[arg(long)]
    pub bracket: bool,
    /// Lower-content ladder `eta=E,len=L` instead of the plain content.
    #[arg(long, value_parser = parse_ladder, conflicts_with_all = ["gauge", "bracket"])]
    pub lower: Option<LadderArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContentChoice {
    Upper,
    Lower,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, required_unless_present = "param", conflicts_with = "param")]
    pub scene: Option<PathBuf>,
    /// `slit:a0=A,q=Q,c0=C,p=P` or `roadrunner:...`.
    #[arg(long, value_parser = parse_param)]
    pub param: Option<ParamArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = ContentChoice::Upper)]
    pub content: ContentChoice,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, default_value_t = 2)]
    pub ladder_len: u32,
    #[arg(long, default_value_t = 8)]
    pub nmax: u32,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Boundary point for scenes, `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub at: Option<Point>,
    /// Rasterize a parametric family instead of using its closed form.
    #[arg(long)]
    pub raster: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_param)]
    pub param: ParamArg,
    /// `start:end:step`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub s_range: RangeArg,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
}

#[derive(Debug, Args)]
pub struct FrostmanArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    /// Attach a growth report.
    #[arg(long)]
    pub check: bool,
    /// Use the ladder gauge `eta=E,len=J` (the measure for level J).
    #[arg(long, value_parser = parse_ladder)]
    pub ladder: Option<LadderArg>,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    /// Grid overrides `z=N,t=N,tmin=T,tmax=T`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Args)]
pub struct CauchyArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub at: Point,
    /// Skip atoms closer than this.
    #[arg(long, default_value_t = 0.0)]
    pub exclusion: f64,
    /// Also evaluate through the cutoff-kernel pairing.
    #[arg(long)]
    pub pairing: bool,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub depth: u32,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long, default_value_t = DEFAULT_POINTS_PER_SIDE)]
    pub points_per_side: f64,
    /// Write the sampled sum of the partition as a grid file.
    #[arg(long)]
    pub sum_field: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated criterion numbers; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

fn key_values(s: &str) -> Result<Vec<(&str, &str)>, String> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| p.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| format!("expected key=value, got {p:?}")))
        .collect()
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("bad value for {key}: {v:?}"))
}

pub fn parse_param(s: &str) -> Result<ParamArg, String> {
    let (kind, rest) = s.split_once(':').ok_or("expected KIND:a0=..,q=..,c0=..,p=..")?;
    let kind = match kind {
        "slit" => ObstacleKind::Slit,
        "roadrunner" | "road-runner" => ObstacleKind::RoadRunner,
        other => return Err(format!("unknown family {other:?}")),
    };
    let (mut a0, mut q, mut c0, mut p) = (None, None, None, None);
    for (k, v) in key_values(rest)? {
        let slot = match k {
            "a0" => &mut a0,
            "q" => &mut q,
            "c0" => &mut c0,
            "p" => &mut p,
            other => return Err(format!("unknown parameter {other:?}")),
        };
        *slot = Some(number(k, v)?);
    }
    match (a0, q, c0, p) {
        (Some(a0), Some(q), Some(c0), Some(p)) => Ok(ParamArg { kind, a0, q, c0, p }),
        _ => Err("a0, q, c0 and p are all required".into()),
    }
}

pub fn parse_gauge(s: &str) -> Result<GaugeArg, String> {
    if s == "power" {
        return Ok(GaugeArg::Power);
    }
    let rest = s.strip_prefix("ladder:").ok_or("expected power or ladder:eta=..,j=..")?;
    let (mut eta, mut j) = (None, None);
    for (k, v) in key_values(rest)? {
        match k {
            "eta" => eta = Some(number(k, v)?),
            "j" => j = Some(number(k, v)?),
            other => return Err(format!("unknown parameter {other:?}")),
        }
    }
    match (eta, j) {
        (Some(eta), Some(j)) => Ok(GaugeArg::Ladder { eta, j }),
        _ => Err("ladder needs eta and j".into()),
    }
}

pub fn parse_ladder(s: &str) -> Result<LadderArg, String> {
    let (mut eta, mut len) = (None, None);
    for (k, v) in key_values(s)? {
        match k {
            "eta" => eta = Some(number(k, v)?),
            "len" | "j" => len = Some(number(k, v)?),
            other => return Err(format!("unknown parameter {other:?}")),
        }
    }
    match (eta, len) {
        (Some(eta), Some(len)) => Ok(LadderArg { eta, len }),
        _ => Err("expected eta=..,len=..".into()),
    }
}

pub fn parse_range(s: &str) -> Result<RangeArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err("expected start:end:step".into());
    };
    let r = RangeArg { start: number("start", a)?, end: number("end", b)?, step: number("step", step)? };
    if !(r.step > 0.0 && r.end >= r.start && r.start.is_finite() && r.end.is_finite()) {
        return Err("need step > 0 and end >= start".into());
    }
    Ok(r)
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    Ok(Point::new(number("x", x.trim())?, number("y", y.trim())?))
}

pub fn parse_grid(s: &str) -> Result<GridConfig, String> {
    let mut g = GridConfig::default();
    for (k, v) in key_values(s)? {
        match k {
            "z" => g.z_count = Some(number(k, v)?),
            "t" => g.t_count = Some(number(k, v)?),
            "tmin" => g.t_min = Some(number(k, v)?),
            "tmax" => g.t_max = Some(number(k, v)?),
            other => return Err(format!("unknown grid key {other:?}")),
        }
    }
    Ok(g)
}

impl ParamArg {
    pub fn domain(&self) -> Result<ParametricDomain, CliError> {
        Ok(ParametricDomain::new(self.kind, self.a0, self.q, self.c0, self.p)?)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status: 0 on success, 1 on computation errors and failed
/// verification, 2 on usage errors.
pub fn run<I, T>(args: I, env_cap: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match configure(&cli, env_cap) {
        Ok(c) => c,
        Err(e) => return report_error(out, &e),
    };
    if config.format == OutputFormat::Csv && !matches!(cli.command, Command::Sweep(_)) {
        let _ = writeln!(err, "error: csv output is only available for sweep");
        return 2;
    }
    match execute(&cli.command, &config, out) {
        Ok(status) => status,
        Err(e) => report_error(out, &e),
    }
}

fn report_error(out: &mut dyn Write, e: &CliError) -> i32 {
    let report = ErrorReport { error: ErrorBody { kind: e.kind(), message: e.to_string() } };
    let _ = write_json(out, &report);
    1
}

fn configure(cli: &Cli, env_cap: Option<&str>) -> Result<Config, CliError> {
    let mut config = Config::load(cli.config.as_deref(), env_cap)?;
    if let Some(cap) = cli.depth_cap {
        config.depth_cap = cap;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: &Command, config: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Content(a) => write_json(out, &content(a, config)?)?,
        Command::Classify(a) => write_json(out, &classify_cmd(a, config)?)?,
        Command::Sweep(a) => sweep(a, config, out)?,
        Command::Frostman(a) => write_json(out, &frostman_cmd(a, config)?)?,
        Command::PoissonNorm(a) => {
            let mu = read_measure(&a.measure)?;
            let grid = config.grid.merged(&a.grid.unwrap_or_default()).apply(PoissonGridSpec::default_for(&mu));
            write_json(out, &ts_norm_estimate(&mu, a.s, &grid)?)?
        }
        Command::Cauchy(a) => write_json(out, &cauchy_cmd(a, config)?)?,
        Command::Partition(a) => write_json(out, &partition_cmd(a, config)?)?,
        Command::Verify(a) => {
            let outcomes = verify::run(&Context::from_config(config), &a.only);
            for o in &outcomes {
                writeln!(out, "{o}")?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            writeln!(out, "{} passed, {failed} failed", outcomes.len() - failed)?;
            return Ok(if failed == 0 { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Scenes that carry only a parametric description get their obstacles
/// materialized down to the leaf size of `depth`.
fn scene_raster(scene: &Scene, depth: u32, cap: u32) -> Result<RasterSet, CliError> {
    let materialized;
    let scene = match &scene.parametric {
        Some(d) if scene.shapes.is_empty() => {
            materialized = lipcap_core::wiener::parametric_scene(d, dyadic_side(depth as i64));
            &materialized
        }
        _ => scene,
    };
    Ok(rasterize(scene, depth, cap, RasterMode::Outer)?)
}

#[derive(Debug, Serialize)]
struct ContentReport {
    value: f64,
    kind: &'static str,
    depth: u32,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<Vec<f64>>,
}

fn content(a: &ContentArgs, config: &Config) -> Result<ContentReport, CliError> {
    let scene = read_scene(&a.scene)?;
    if let Some(l) = a.lower {
        let r = lower_content_estimate(&scene, a.beta, l.eta, l.len, config.depth_cap)?;
        let ladder = match r.kind {
            ContentKind::LadderSequence(v) => Some(v),
            _ => None,
        };
        return Ok(ContentReport {
            value: r.value,
            kind: "lowerLadder",
            depth: config.depth_cap,
            truncated: r.truncated,
            lower: None,
            upper: None,
            ladder,
        });
    }
    let raster = scene_raster(&scene, a.depth, config.depth_cap)?;
    let (value, kind) = match a.gauge {
        GaugeArg::Power => (dyadic_content(&raster, a.beta)?.value, "dyadic"),
        GaugeArg::Ladder { eta, j } => (gauge_content(&raster, &Gauge::Ladder { beta: a.beta, eta, j })?.value, "gauge"),
    };
    let (mut lower, mut upper) = (None, None);
    if a.bracket {
        if let ContentKind::BallBracket { lower: l, upper: u } = ball_bracket(&raster, a.beta)?.kind {
            (lower, upper) = (Some(l), Some(u));
        }
    }
    Ok(ContentReport { value, kind, depth: a.depth, truncated: false, lower, upper, ladder: None })
}

fn classify_cmd(a: &ClassifyArgs, config: &Config) -> Result<lipcap_core::wiener::SeriesReport, CliError> {
    let mut spec = SeriesSpec::new(a.s, a.k)?;
    if a.content == ContentChoice::Lower {
        spec = spec.with_content(SeriesContent::Lower { eta: a.eta, ladder_len: a.ladder_len });
    }
    let domain = match (&a.param, &a.scene) {
        (Some(p), _) => Complement::Parametric(p.domain()?),
        (None, Some(path)) => {
            let scene = read_scene(path)?;
            match (scene.parametric, a.raster) {
                (Some(d), true) => Complement::Parametric(d),
                _ => Complement::Scene(scene),
            }
        }
        (None, None) => unreachable!("clap requires one of --scene and --param"),
    };
    if let Some(b) = a.at {
        spec = spec.at(b);
    }
    if a.raster {
        return Ok(series_terms(&domain, &spec, a.nmax, a.depth, config.depth_cap)?);
    }
    Ok(classify(&domain, &spec, a.nmax, a.depth, config.depth_cap)?)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    s: f64,
    verdict: Verdict,
    sum: f64,
}

fn sweep(a: &SweepArgs, config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let domain = a.param.domain()?;
    let mut rows = Vec::new();
    for s in a.s_range.values() {
        let r = classify(&Complement::Parametric(domain), &SeriesSpec::new(s, a.k)?, 0, 0, config.depth_cap)?;
        let sum = match r.tail_model {
            Some(TailModel::Geometric { exact_sum: Some(sum), .. }) => sum,
            _ => f64::INFINITY,
        };
        rows.push(SweepRow { s, verdict: r.verdict, sum });
    }
    match config.format {
        OutputFormat::Json => write_json(out, &rows)?,
        OutputFormat::Csv => {
            writeln!(out, "s,verdict,sum")?;
            for r in &rows {
                writeln!(out, "{},{:?},{}", fmt17(r.s), r.verdict, fmt17(r.sum))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FrostmanReport {
    #[serde(flatten)]
    measure: DiscreteMeasure,
    total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth: Option<GrowthReport>,
}

fn frostman_cmd(a: &FrostmanArgs, config: &Config) -> Result<FrostmanReport, CliError> {
    let scene = read_scene(&a.scene)?;
    let raster = scene_raster(&scene, a.depth, config.depth_cap)?;
    let mu = match a.ladder {
        Some(l) => frostman_lower(&raster, a.beta, l.eta, l.len)?,
        None => frostman(&raster, a.beta)?,
    };
    let growth = if a.check {
        let sampling = SamplingSpec::standard(&mu, raster.root().rect(), raster.leaf_side(), 16);
        Some(growth_check(&mu, a.beta, &sampling)?)
    } else {
        None
    };
    Ok(FrostmanReport { measure: mu.clone(), total: mu.total(), growth })
}

#[derive(Debug, Serialize)]
struct CauchyReport {
    value: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<[f64; 2]>,
}

fn cauchy_cmd(a: &CauchyArgs, config: &Config) -> Result<CauchyReport, CliError> {
    let mu = read_measure(&a.measure)?;
    let v = cauchy_transform(&mu, a.at, a.exclusion)?;
    let pairing = if a.pairing {
        let chi = CutoffKernel::for_measure(&mu, a.at).ok_or(lipcap_core::Error::BInSupport { b: a.at })?;
        let p = cauchy_eval_pairing(&mu, a.at, &chi, config.tolerances.chi)?;
        Some([p.re, p.im])
    } else {
        None
    };
    Ok(CauchyReport { value: [v.re, v.im], pairing })
}

fn partition_cmd(a: &PartitionArgs, config: &Config) -> Result<Value, CliError> {
    let scene = read_scene(&a.scene)?;
    let e = scene_raster(&scene, a.depth, config.depth_cap)?;
    let r = build_partition(&e.maximal_blocks(), &e, a.k, SmoothProfile::default(), a.points_per_side)?;
    if let Some(path) = &a.sum_field {
        let text = crate::output::to_json(&GridFile::from_grid(&r.sum_field))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    }
    let mut map = Map::new();
    let mut put = |k: String, v: Value| {
        map.insert(k, v);
    };
    put("atomCount".into(), r.atoms.len().into());
    put(format!("maxN{}", a.k), r.max_nk().into());
    put("sumErrorMax".into(), r.sum_error_max.into());
    put("supportViolations".into(), r.support_violations.into());
    put("squaresKept".into(), r.squares_kept.into());
    put("squaresPruned".into(), r.squares_pruned.into());
    put("withinTolerance".into(), (r.sum_error_max <= config.tolerances.partition_sum).into());
    put("generations".into(), serde_json::to_value(&r.generations).map_err(std::io::Error::other)?);
    Ok(Value::Object(map))
}
