//! Project configuration files.
//!
//! Configs are TOML. Vertices are numbered from 1 in the file and from 0
//! once loaded. See `configs/README.md` for the full grammar.

use std::fs;
use std::path::{Path, PathBuf};

use gdfif_core::{DataSet, IntervalAssignment, Point, WidthCheckMode, WiringPlan};
use serde::Deserialize;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 200;
pub const DEFAULT_GENERATIONS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: cannot read: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub resolution: usize,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorSettings {
    pub generations: usize,
    /// `None` means half a pixel of the plot, worked out at run time.
    pub dedup: Option<f64>,
    pub max_points: usize,
    pub chaos_points: usize,
    pub burn_in: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSettings {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub point_radius: f64,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

/// Output file names, relative to `dir`. `None` disables a file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub function_csv: Option<String>,
    pub attractor_csv: Option<String>,
    pub chaos_csv: Option<String>,
    pub function_svg: Option<String>,
    pub attractor_svg: Option<String>,
    pub attractor_pgm: Option<String>,
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectConfig {
    pub name: String,
    pub datasets: Vec<DataSet>,
    pub plan: WiringPlan,
    pub width_check: WidthCheckMode,
    pub solver: SolverSettings,
    pub attractor: AttractorSettings,
    pub plot: PlotSettings,
    pub output: OutputSettings,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    width_check: Option<String>,
    #[serde(default)]
    dataset: Vec<RawDataSet>,
    #[serde(default)]
    wiring: Vec<RawWiring>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    attractor: RawAttractor,
    #[serde(default)]
    plot: RawPlot,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataSet {
    points: Option<Vec<[f64; 2]>>,
    file: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWiring {
    intervals: Option<Vec<RawInterval>>,
    blocks: Option<Vec<RawBlock>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    source: usize,
    d: Scalar,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    source: usize,
    count: usize,
    d: Scalar,
}

/// A real written either as a TOML number or as a `"p/q"` string.
#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    resolution: Option<usize>,
    tol: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAttractor {
    generations: Option<usize>,
    dedup: Option<f64>,
    max_points: Option<usize>,
    chaos_points: Option<usize>,
    burn_in: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPlot {
    width: Option<u32>,
    height: Option<u32>,
    margin: Option<u32>,
    point_radius: Option<f64>,
    x_range: Option<[f64; 2]>,
    y_range: Option<[f64; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    function_csv: Option<String>,
    attractor_csv: Option<String>,
    chaos_csv: Option<String>,
    function_svg: Option<String>,
    attractor_svg: Option<String>,
    attractor_pgm: Option<String>,
    summary: Option<String>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

fn parse_scalar(s: &Scalar) -> Result<f64, String> {
    match s {
        Scalar::Number(v) => Ok(*v),
        Scalar::Text(t) => {
            let t = t.trim();
            let parsed = match t.split_once('/') {
                Some((p, q)) => p
                    .trim()
                    .parse::<f64>()
                    .and_then(|p| q.trim().parse::<f64>().map(|q| p / q)),
                None => t.parse::<f64>(),
            };
            parsed.map_err(|_| format!("cannot read {t:?} as a number or fraction"))
        }
    }
}

/// Reads `x,y` rows. Blank lines, lines starting with `#`, and a first line
/// that does not parse as numbers (a header) are skipped.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => points.push(Point::new(x, y)),
            None if points.is_empty() && n == 0 => continue,
            None => {
                return Err(ConfigError::Parse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    column: 1,
                    message: format!("expected `x,y`, found {line:?}"),
                })
            }
        }
    }
    Ok(points)
}

/// Parses a config from text. `path` is used in messages and as the base
/// for relative data-set files.
pub fn parse_config(text: &str, path: &Path) -> Result<ProjectConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let invalid = |message: String| ConfigError::Invalid {
        path: path.to_path_buf(),
        message,
    };
    let base = path.parent().unwrap_or(Path::new("."));

    if raw.dataset.is_empty() {
        return Err(invalid("at least one [[dataset]] is required".into()));
    }
    if raw.wiring.len() != raw.dataset.len() {
        return Err(invalid(format!(
            "{} [[wiring]] tables for {} data sets; give one per data set, in the same order",
            raw.wiring.len(),
            raw.dataset.len()
        )));
    }

    let mut datasets = Vec::with_capacity(raw.dataset.len());
    for (k, ds) in raw.dataset.iter().enumerate() {
        let points = match (&ds.points, &ds.file) {
            (Some(pts), None) => pts.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            (None, Some(file)) => read_points_csv(&base.join(file))?,
            _ => {
                return Err(invalid(format!(
                    "data set {} needs exactly one of `points` or `file`",
                    k + 1
                )))
            }
        };
        datasets.push(DataSet::new(points));
    }

    let mut rows = Vec::with_capacity(raw.wiring.len());
    for (k, w) in raw.wiring.iter().enumerate() {
        let vertex = k + 1;
        let source = |s: usize| {
            s.checked_sub(1)
                .ok_or_else(|| invalid(format!("wiring of vertex {vertex}: sources are numbered from 1")))
        };
        let scalar = |d: &Scalar| parse_scalar(d).map_err(|m| invalid(format!("wiring of vertex {vertex}: {m}")));
        let row = match (&w.intervals, &w.blocks) {
            (Some(list), None) => list
                .iter()
                .map(|i| Ok(IntervalAssignment::new(source(i.source)?, scalar(&i.d)?)))
                .collect::<Result<Vec<_>, ConfigError>>()?,
            (None, Some(blocks)) => {
                let mut row = Vec::new();
                for b in blocks {
                    let a = IntervalAssignment::new(source(b.source)?, scalar(&b.d)?);
                    row.extend(std::iter::repeat_n(a, b.count));
                }
                row
            }
            _ => {
                return Err(invalid(format!(
                    "wiring of vertex {vertex} needs exactly one of `intervals` or `blocks`"
                )))
            }
        };
        rows.push(row);
    }

    let width_check = match raw.width_check.as_deref() {
        None => WidthCheckMode::default(),
        Some(s) => WidthCheckMode::parse(s)
            .ok_or_else(|| invalid(format!("width_check must be \"all-pairs\" or \"used-edges\", got {s:?}")))?,
    };

    let range = |r: Option<[f64; 2]>, what: &str| -> Result<Option<(f64, f64)>, ConfigError> {
        match r {
            Some([lo, hi]) if !(lo < hi) => Err(invalid(format!("plot.{what} must be increasing"))),
            Some([lo, hi]) => Ok(Some((lo, hi))),
            None => Ok(None),
        }
    };
    let plot = PlotSettings {
        width: raw.plot.width.unwrap_or(480),
        height: raw.plot.height.unwrap_or(360),
        margin: raw.plot.margin.unwrap_or(30),
        point_radius: raw.plot.point_radius.unwrap_or(3.0),
        x_range: range(raw.plot.x_range, "x_range")?,
        y_range: range(raw.plot.y_range, "y_range")?,
    };

    let name = raw.name.unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "project".to_string(), |s| s.to_string_lossy().into_owned())
    });
    let file = |v: Option<String>, default: &str| match v {
        Some(s) if s.is_empty() => None,
        Some(s) => Some(s),
        None => Some(default.to_string()),
    };
    let o = raw.output;
    let output = OutputSettings {
        dir: PathBuf::from(o.dir.unwrap_or_else(|| format!("out/{name}"))),
        function_csv: file(o.function_csv, "function.csv"),
        attractor_csv: file(o.attractor_csv, "attractor.csv"),
        chaos_csv: file(o.chaos_csv, "chaos.csv"),
        function_svg: file(o.function_svg, "function.svg"),
        attractor_svg: file(o.attractor_svg, "attractor.svg"),
        attractor_pgm: file(o.attractor_pgm, "attractor.pgm"),
        summary: file(o.summary, "summary.json"),
    };

    Ok(ProjectConfig {
        name,
        datasets,
        plan: WiringPlan::new(rows),
        width_check,
        solver: SolverSettings {
            resolution: raw.solver.resolution.unwrap_or(DEFAULT_RESOLUTION),
            tol: raw.solver.tol.unwrap_or(DEFAULT_TOL),
            max_iters: raw.solver.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
        },
        attractor: AttractorSettings {
            generations: raw.attractor.generations.unwrap_or(DEFAULT_GENERATIONS),
            dedup: raw.attractor.dedup,
            max_points: raw.attractor.max_points.unwrap_or(gdfif_core::DEFAULT_MAX_POINTS),
            chaos_points: raw.attractor.chaos_points.unwrap_or(0),
            burn_in: raw.attractor.burn_in.unwrap_or(100),
            seed: raw.attractor.seed.unwrap_or(0),
        },
        plot,
        output,
    })
}

pub fn load_config(path: &Path) -> Result<ProjectConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}
