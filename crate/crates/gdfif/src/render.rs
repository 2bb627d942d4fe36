//! CSV, SVG and PGM output.
//!
//! Every vertex gets its own panel of `width × height` pixels; panels sit
//! side by side in vertex order. Data stays in math coordinates until the
//! final pixel mapping, where the y axis is flipped.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gdfif_core::{AttractorCloud, DataSet, FunctionFamily, Point};

const PALETTE: [&str; 6] = ["#1f4e9c", "#b8322a", "#2a7d3b", "#7a3f9d", "#b06f00", "#006d77"];

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid plot spec: {0}")]
    Spec(String),
    #[error("{path}:{line}: {message}")]
    Csv { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// Panel size in pixels.
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    /// `None` fits the range to the panel's data with 5% padding.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub point_radius: f64,
    /// Stroke colours by vertex; missing entries fall back to a palette.
    pub styles: Vec<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width: 480,
            height: 360,
            margin: 30,
            x_range: None,
            y_range: None,
            point_radius: 3.0,
            styles: Vec::new(),
        }
    }
}

impl PlotSpec {
    pub fn check(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::Spec("width and height must be positive".into()));
        }
        if 2 * self.margin >= self.width.min(self.height) {
            return Err(RenderError::Spec("margins leave no room for the plot".into()));
        }
        for (name, r) in [("x", self.x_range), ("y", self.y_range)] {
            if let Some((lo, hi)) = r {
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return Err(RenderError::Spec(format!("{name} range must be finite and increasing")));
                }
            }
        }
        if !(self.point_radius >= 0.0 && self.point_radius.is_finite()) {
            return Err(RenderError::Spec("point radius must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn inner_width(&self) -> u32 {
        self.width - 2 * self.margin
    }

    pub fn inner_height(&self) -> u32 {
        self.height - 2 * self.margin
    }

    fn style(&self, vertex: usize) -> &str {
        self.styles
            .get(vertex)
            .map_or(PALETTE[vertex % PALETTE.len()], String::as_str)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    Family(&'a FunctionFamily),
    Clouds(&'a [AttractorCloud]),
}

impl PlotData<'_> {
    fn panels(&self) -> Vec<Vec<Point>> {
        match self {
            PlotData::Family(fam) => fam.members().iter().map(|f| f.samples().collect()).collect(),
            PlotData::Clouds(clouds) => clouds.iter().map(|c| c.points.clone()).collect(),
        }
    }
}

/// Maps math coordinates of one panel to pixel coordinates.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(spec: &PlotSpec, panel: usize, pts: &[Point], data: &[Point]) -> Frame {
        let fit = |get: fn(&Point) -> f64| {
            let (lo, hi) = pts
                .iter()
                .chain(data)
                .map(get)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if !(lo <= hi) {
                (-1.0, 1.0)
            } else if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
                (lo - 1.0, hi + 1.0)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = spec.x_range.unwrap_or_else(|| fit(|p| p.x));
        let (y0, y1) = spec.y_range.unwrap_or_else(|| fit(|p| p.y));
        Frame {
            x0,
            x1,
            y0,
            y1,
            left: (panel as u32 * spec.width + spec.margin) as f64,
            top: spec.margin as f64,
            w: spec.inner_width() as f64,
            h: spec.inner_height() as f64,
        }
    }

    fn contains(&self, p: Point) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    fn to_screen(&self, p: Point) -> (f64, f64) {
        (
            self.left + (p.x - self.x0) / (self.x1 - self.x0) * self.w,
            self.top + (self.y1 - p.y) / (self.y1 - self.y0) * self.h,
        )
    }

    /// Pixel cell of `p` inside the panel, or `None` if it falls outside.
    fn pixel(&self, p: Point) -> Option<(u32, u32)> {
        if !self.contains(p) {
            return None;
        }
        let u = ((p.x - self.x0) / (self.x1 - self.x0) * self.w).floor().min(self.w - 1.0);
        let v = ((self.y1 - p.y) / (self.y1 - self.y0) * self.h).floor().min(self.h - 1.0);
        Some(((self.left + u) as u32, (self.top + v) as u32))
    }
}

fn data_points(datasets: &[DataSet], vertex: usize) -> &[Point] {
    datasets.get(vertex).map_or(&[], DataSet::points)
}

/// SVG document for `data`, with the points of `datasets` marked as circles.
pub fn svg_string(data: PlotData<'_>, datasets: &[DataSet], spec: &PlotSpec) -> Result<String, RenderError> {
    spec.check()?;
    let panels = data.panels();
    let total_w = spec.width as usize * panels.len().max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{h}" viewBox="0 0 {total_w} {h}">"#,
        h = spec.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{total_w}" height="{}" fill="white"/>"#, spec.height);
    for (k, pts) in panels.iter().enumerate() {
        let marks = data_points(datasets, k);
        let frame = Frame::new(spec, k, pts, marks);
        let colour = spec.style(k);
        let _ = writeln!(
            out,
            r#"<clipPath id="panel{k}"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath>"#,
            frame.left, frame.top, frame.w, frame.h
        );
        let _ = writeln!(
            out,
            r#"<g class="panel" data-vertex="{}" clip-path="url(#panel{k})">"#,
            k + 1
        );
        let _ = writeln!(
            out,
            r##"<rect class="frame" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999999"/>"##,
            frame.left, frame.top, frame.w, frame.h
        );
        match data {
            PlotData::Family(_) => {
                let mut coords = String::new();
                for (i, p) in pts.iter().enumerate() {
                    let (sx, sy) = frame.to_screen(*p);
                    if i > 0 {
                        coords.push(' ');
                    }
                    let _ = write!(coords, "{sx:.2},{sy:.2}");
                }
                let _ = writeln!(
                    out,
                    r#"<polyline class="curve" fill="none" stroke="{colour}" stroke-width="1" points="{coords}"/>"#
                );
            }
            PlotData::Clouds(_) => {
                let cells: BTreeSet<(u32, u32)> = pts.iter().filter_map(|p| frame.pixel(*p)).collect();
                let mut d = String::new();
                for (px, py) in cells {
                    let _ = write!(d, "M{px} {py}h1v1h-1z");
                }
                let _ = writeln!(out, r#"<path class="cloud" fill="{colour}" d="{d}"/>"#);
            }
        }
        for p in marks.iter().filter(|p| frame.contains(**p)) {
            let (sx, sy) = frame.to_screen(*p);
            let _ = writeln!(
                out,
                r#"<circle class="data" cx="{sx:.2}" cy="{sy:.2}" r="{:.2}" fill="white" stroke="black"/>"#,
                spec.point_radius
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Binary PGM (P5) with one black pixel per occupied cell on white.
pub fn pgm_bytes(clouds: &[AttractorCloud], spec: &PlotSpec) -> Result<Vec<u8>, RenderError> {
    spec.check()?;
    let total_w = spec.width as usize * clouds.len().max(1);
    let h = spec.height as usize;
    let mut pixels = vec![255u8; total_w * h];
    for (k, cloud) in clouds.iter().enumerate() {
        let frame = Frame::new(spec, k, &cloud.points, &[]);
        for p in &cloud.points {
            if let Some((px, py)) = frame.pixel(*p) {
                pixels[py as usize * total_w + px as usize] = 0;
            }
        }
    }
    let mut out = format!("P5\n{total_w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

/// Formats `v` with 17 significant digits, positionally when the decimal
/// exponent is in `-5..17` and in scientific notation otherwise.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return format!("{:.16}", 0.0);
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        format!("{v:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

fn csv_rows(rows: &mut [(usize, Point)]) -> String {
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.x.total_cmp(&b.1.x)).then(a.1.y.total_cmp(&b.1.y)));
    let mut out = String::from("vertex,x,y\n");
    for (v, p) in rows.iter() {
        let _ = writeln!(out, "{},{},{}", v + 1, format_number(p.x), format_number(p.y));
    }
    out
}

/// CSV text for `data`: header `vertex,x,y`, vertices numbered from 1, rows
/// sorted by vertex, then x, then y.
pub fn csv_string(data: PlotData<'_>) -> String {
    let mut rows: Vec<(usize, Point)> = data
        .panels()
        .into_iter()
        .enumerate()
        .flat_map(|(k, pts)| pts.into_iter().map(move |p| (k, p)))
        .collect();
    csv_rows(&mut rows)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RenderError> {
    let io = |source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), RenderError> {
    write_file(path, text.as_bytes())
}

pub fn export_csv(data: PlotData<'_>, path: &Path) -> Result<(), RenderError> {
    write_file(path, csv_string(data).as_bytes())
}

pub fn render_svg(data: PlotData<'_>, datasets: &[DataSet], spec: &PlotSpec, path: &Path) -> Result<(), RenderError> {
    write_file(path, svg_string(data, datasets, spec)?.as_bytes())
}

pub fn render_pgm(clouds: &[AttractorCloud], spec: &PlotSpec, path: &Path) -> Result<(), RenderError> {
    write_file(path, &pgm_bytes(clouds, spec)?)
}

/// Reads a file written by [`export_csv`] back into per-vertex point lists,
/// indexed from 0.
pub fn import_csv(path: &Path) -> Result<Vec<Vec<Point>>, RenderError> {
    let text = fs::read_to_string(path).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, message: String| RenderError::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "vertex,x,y")) => {}
        _ => return Err(bad(1, "expected header `vertex,x,y`".into())),
    }
    let mut out: Vec<Vec<Point>> = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = match fields.as_slice() {
            [v, x, y] => v
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .zip(x.parse::<f64>().ok())
                .zip(y.parse::<f64>().ok()),
            _ => None,
        };
        let ((v, x), y) = parsed.ok_or_else(|| bad(n + 1, format!("malformed row {line:?}")))?;
        if out.len() < v {
            out.resize_with(v, Vec::new);
        }
        out[v - 1].push(Point::new(x, y));
    }
    Ok(out)
}
