//! The `validate`, `run`, `eval` and `render` commands.
//!
//! Each command returns an exit code and a JSON document. Exit codes:
//! 0 success, 1 failed validation, 2 structural, parse, IO or argument
//! errors, 3 solver non-convergence.

use std::path::{Path, PathBuf};

use gdfif_core::{
    build_system, chaos_game, edge_counts, evaluate_exact, family_distance, fixed_point, graph_hausdorff,
    hausdorff_distance, apply_t, initial_family, interpolation_residual, iterate_attractor, validate,
    AttractorCloud, FixedPoint, FuncSpaceError, GifsSystem, ValidationReport, WidthCheckMode,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_config, ProjectConfig};
use crate::render::{export_csv, render_pgm, render_svg, PlotData, PlotSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_STRUCTURAL: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub code: i32,
    pub json: Value,
}

impl CommandOutput {
    fn ok(json: Value) -> Self {
        CommandOutput { code: EXIT_OK, json }
    }

    fn error(code: i32, kind: &str, message: impl ToString) -> Self {
        CommandOutput {
            code,
            json: json!({ "error": kind, "message": message.to_string() }),
        }
    }
}

/// Values that replace config settings when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub generations: Option<usize>,
    pub dedup: Option<f64>,
    pub chaos_points: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub width_check: Option<WidthCheckMode>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ProjectConfig) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        set(&mut cfg.solver.resolution, &self.resolution);
        set(&mut cfg.solver.tol, &self.tol);
        set(&mut cfg.solver.max_iters, &self.max_iters);
        set(&mut cfg.attractor.generations, &self.generations);
        set(&mut cfg.attractor.chaos_points, &self.chaos_points);
        set(&mut cfg.attractor.burn_in, &self.burn_in);
        set(&mut cfg.attractor.seed, &self.seed);
        set(&mut cfg.width_check, &self.width_check);
        set(&mut cfg.output.dir, &self.out_dir);
        if self.dedup.is_some() {
            cfg.attractor.dedup = self.dedup;
        }
    }
}

pub fn plot_spec(cfg: &ProjectConfig) -> PlotSpec {
    PlotSpec {
        width: cfg.plot.width,
        height: cfg.plot.height,
        margin: cfg.plot.margin,
        x_range: cfg.plot.x_range,
        y_range: cfg.plot.y_range,
        point_radius: cfg.plot.point_radius,
        styles: Vec::new(),
    }
}

/// Dedup cell size: the configured value, or half a plot pixel of the
/// narrowest data set.
pub fn dedup_tolerance(cfg: &ProjectConfig) -> f64 {
    cfg.attractor.dedup.unwrap_or_else(|| {
        let inner = cfg.plot.width.saturating_sub(2 * cfg.plot.margin).max(1) as f64;
        cfg.datasets
            .iter()
            .map(|d| d.span() / inner / 2.0)
            .filter(|t| *t > 0.0 && t.is_finite())
            .fold(f64::INFINITY, f64::min)
            .min(1.0)
    })
}

/// JSON form of a validation report, with 1-based vertex, point and
/// interval numbers.
pub fn report_json(report: &ValidationReport, cfg: &ProjectConfig) -> Value {
    let point_codes = ["too_few_points", "non_finite", "non_increasing_abscissa"];
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            let mut obj = json!({
                "code": v.code.as_str(),
                "message": v.message,
                "vertex": v.vertex + 1,
            });
            if let Some(o) = v.other {
                obj["other_vertex"] = json!(o + 1);
            }
            if let Some(i) = v.index {
                if point_codes.contains(&v.code.as_str()) {
                    obj["point"] = json!(i);
                } else {
                    obj["interval"] = json!(i + 1);
                }
            }
            obj
        })
        .collect();
    json!({
        "ok": report.ok(),
        "width_check_mode": report.mode.as_str(),
        "strongly_connected": report.strongly_connected,
        "edge_counts": edge_counts(&cfg.plan),
        "violations": violations,
    })
}

fn load(path: &Path, overrides: &Overrides) -> Result<ProjectConfig, CommandOutput> {
    let mut cfg = load_config(path).map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "config", e))?;
    overrides.apply(&mut cfg);
    Ok(cfg)
}

fn checked(cfg: &ProjectConfig) -> Result<ValidationReport, CommandOutput> {
    validate(&cfg.datasets, &cfg.plan, cfg.width_check)
        .map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "structure", e))
}

fn build(cfg: &ProjectConfig) -> Result<GifsSystem, CommandOutput> {
    let report = checked(cfg)?;
    if !report.ok() {
        return Err(CommandOutput {
            code: EXIT_INVALID,
            json: report_json(&report, cfg),
        });
    }
    build_system(&cfg.datasets, &cfg.plan, cfg.width_check).map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "build", e))
}

fn solve(sys: &GifsSystem, cfg: &ProjectConfig) -> Result<FixedPoint, CommandOutput> {
    fixed_point(sys, cfg.solver.resolution, cfg.solver.tol, cfg.solver.max_iters).map_err(|e| match e {
        FuncSpaceError::NotConverged { iterations, final_delta } => CommandOutput {
            code: EXIT_NOT_CONVERGED,
            json: json!({
                "error": "not_converged",
                "message": e.to_string(),
                "r": sys.r(),
                "iterations": iterations,
                "final_delta": final_delta,
                "tol": cfg.solver.tol,
            }),
        },
        other => CommandOutput::error(EXIT_STRUCTURAL, "solver", other),
    })
}

fn attractor(sys: &GifsSystem, cfg: &ProjectConfig, dedup: f64) -> Result<Vec<AttractorCloud>, CommandOutput> {
    iterate_attractor(sys, cfg.attractor.generations, dedup, cfg.attractor.max_points)
        .map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "attractor", e))
}

fn output_path(cfg: &ProjectConfig, name: &Option<String>) -> Option<PathBuf> {
    name.as_ref().map(|n| cfg.output.dir.join(n))
}

fn written(path: &Path) -> Value {
    json!(path.to_string_lossy())
}

pub fn cmd_validate(path: &Path, overrides: &Overrides) -> CommandOutput {
    let cfg = match load(path, overrides) {
        Ok(cfg) => cfg,
        Err(out) => return out,
    };
    match checked(&cfg) {
        Ok(report) => CommandOutput {
            code: if report.ok() { EXIT_OK } else { EXIT_INVALID },
            json: report_json(&report, &cfg),
        },
        Err(out) => out,
    }
}

#[derive(Serialize)]
struct VertexSummary {
    vertex: usize,
    knots: usize,
    samples: usize,
    attractor_points: usize,
    hausdorff: f64,
    interpolation_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    chaos_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chaos_hausdorff: Option<f64>,
}

#[derive(Serialize)]
struct RunSummary {
    r: f64,
    iterations: usize,
    final_delta: f64,
    interpolation_residual: f64,
    hausdorff: f64,
    per_vertex: Vec<VertexSummary>,
    error_bound: f64,
    resolution: usize,
    generations: usize,
    dedup: f64,
    width_check_mode: &'static str,
}

fn run_inner(cfg: &ProjectConfig) -> Result<Value, CommandOutput> {
    let sys = build(cfg)?;
    let fp = solve(&sys, cfg)?;
    let dedup = dedup_tolerance(cfg);
    let clouds = attractor(&sys, cfg, dedup)?;
    let chaos = if cfg.attractor.chaos_points > 0 {
        Some(
            chaos_game(&sys, cfg.attractor.chaos_points, cfg.attractor.burn_in, cfg.attractor.seed)
                .map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "chaos_game", e))?,
        )
    } else {
        None
    };

    let mut per_vertex = Vec::with_capacity(sys.n());
    for (alpha, (f, cloud)) in fp.family.members().iter().zip(&clouds).enumerate() {
        let ds = sys.dataset(alpha);
        let residual = ds.points().iter().map(|p| (f.eval(p.x) - p.y).abs()).fold(0.0, f64::max);
        let hd = graph_hausdorff(f, cloud).map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "hausdorff", e))?;
        let chaos_cloud = chaos.as_ref().map(|c| &c[alpha]);
        let chaos_hd = match chaos_cloud {
            Some(c) if !c.points.is_empty() => Some(
                hausdorff_distance(&c.points, &cloud.points)
                    .map_err(|e| CommandOutput::error(EXIT_STRUCTURAL, "hausdorff", e))?,
            ),
            _ => None,
        };
        per_vertex.push(VertexSummary {
            vertex: alpha + 1,
            knots: ds.len(),
            samples: f.len(),
            attractor_points: cloud.len(),
            hausdorff: hd,
            interpolation_residual: residual,
            chaos_points: chaos_cloud.map(AttractorCloud::len),
            chaos_hausdorff: chaos_hd,
        });
    }

    let spec = plot_spec(cfg);
    let mut outputs = Vec::new();
    let io = |e: crate::render::RenderError| CommandOutput::error(EXIT_STRUCTURAL, "io", e);
    let o = &cfg.output;
    if let Some(p) = output_path(cfg, &o.function_csv) {
        export_csv(PlotData::Family(&fp.family), &p).map_err(io)?;
        outputs.push(p);
    }
    if let Some(p) = output_path(cfg, &o.attractor_csv) {
        export_csv(PlotData::Clouds(&clouds), &p).map_err(io)?;
        outputs.push(p);
    }
    if let (Some(p), Some(chaos)) = (output_path(cfg, &o.chaos_csv), &chaos) {
        export_csv(PlotData::Clouds(chaos), &p).map_err(io)?;
        outputs.push(p);
    }
    outputs.extend(write_plots(cfg, &sys, &fp, &clouds, &spec)?);

    let summary = RunSummary {
        r: sys.r(),
        iterations: fp.iterations,
        final_delta: fp.final_delta,
        interpolation_residual: interpolation_residual(&sys, &fp.family),
        hausdorff: per_vertex.iter().map(|v| v.hausdorff).fold(0.0, f64::max),
        per_vertex,
        error_bound: fp.error_bound,
        resolution: cfg.solver.resolution,
        generations: cfg.attractor.generations,
        dedup,
        width_check_mode: cfg.width_check.as_str(),
    };
    let mut value = serde_json::to_value(&summary).expect("summary serializes");
    if let Some(p) = output_path(cfg, &o.summary) {
        let mut text = serde_json::to_string_pretty(&value).expect("summary serializes");
        text.push('\n');
        crate::render::write_text(&p, &text).map_err(io)?;
        outputs.push(p);
    }
    value["outputs"] = Value::Array(outputs.iter().map(|p| written(p)).collect());
    Ok(value)
}

fn write_plots(
    cfg: &ProjectConfig,
    sys: &GifsSystem,
    fp: &FixedPoint,
    clouds: &[AttractorCloud],
    spec: &PlotSpec,
) -> Result<Vec<PathBuf>, CommandOutput> {
    let io = |e: crate::render::RenderError| CommandOutput::error(EXIT_STRUCTURAL, "render", e);
    let o = &cfg.output;
    let mut outputs = Vec::new();
    if let Some(p) = output_path(cfg, &o.function_svg) {
        render_svg(PlotData::Family(&fp.family), sys.datasets(), spec, &p).map_err(io)?;
        outputs.push(p);
    }
    if let Some(p) = output_path(cfg, &o.attractor_svg) {
        render_svg(PlotData::Clouds(clouds), sys.datasets(), spec, &p).map_err(io)?;
        outputs.push(p);
    }
    if let Some(p) = output_path(cfg, &o.attractor_pgm) {
        render_pgm(clouds, spec, &p).map_err(io)?;
        outputs.push(p);
    }
    Ok(outputs)
}

/// Builds the system, solves it, iterates the attractor and writes every
/// configured output plus the JSON summary.
pub fn cmd_run(path: &Path, overrides: &Overrides) -> CommandOutput {
    match load(path, overrides).and_then(|cfg| run_inner(&cfg)) {
        Ok(v) => CommandOutput::ok(v),
        Err(out) => out,
    }
}

/// Writes only the SVG and PGM outputs.
pub fn cmd_render(path: &Path, overrides: &Overrides) -> CommandOutput {
    let result = load(path, overrides).and_then(|cfg| {
        let sys = build(&cfg)?;
        let fp = solve(&sys, &cfg)?;
        let clouds = attractor(&sys, &cfg, dedup_tolerance(&cfg))?;
        let outputs = write_plots(&cfg, &sys, &fp, &clouds, &plot_spec(&cfg))?;
        Ok(json!({ "outputs": outputs.iter().map(|p| written(p)).collect::<Vec<_>>() }))
    });
    match result {
        Ok(v) => CommandOutput::ok(v),
        Err(out) => out,
    }
}

/// Evaluates the interpolant of `vertex` (numbered from 1) at `x` by
/// recursing `depth` levels. The reported bound is `r^depth / (1 - r) · D`
/// with `D` the distance between the chords and their image, measured on
/// the solver grid.
pub fn cmd_eval(path: &Path, overrides: &Overrides, vertex: usize, x: f64, depth: usize) -> CommandOutput {
    let result = load(path, overrides).and_then(|cfg| {
        let sys = build(&cfg)?;
        let arg = |e: FuncSpaceError| CommandOutput::error(EXIT_STRUCTURAL, "argument", e);
        if vertex == 0 || vertex > sys.n() {
            return Err(arg(FuncSpaceError::NoSuchVertex(vertex)));
        }
        let y = evaluate_exact(&sys, vertex - 1, x, depth).map_err(arg)?;
        let chords = initial_family(&sys, cfg.solver.resolution).map_err(arg)?;
        let image = apply_t(&sys, &chords, cfg.solver.resolution).map_err(arg)?;
        let d = family_distance(&image, &chords).map_err(arg)?;
        let r = sys.r();
        Ok(json!({
            "vertex": vertex,
            "x": x,
            "depth": depth,
            "y": y,
            "error_bound": r.powi(depth as i32) / (1.0 - r) * d,
        }))
    });
    match result {
        Ok(v) => CommandOutput::ok(v),
        Err(out) => out,
    }
}
