//! Affine maps of the graph-directed system and their construction from the
//! endpoint constraints.

use alloc::vec::Vec;

use crate::geom::Point;
use crate::model::{validate, DataSet, StructuralError, ValidationReport, WidthCheckMode, WiringPlan};

/// `(x, y) ↦ (a·x + e, c·x + d·y + f)`, taking the graph over the source
/// data set onto the graph over one interval of the target data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub source: usize,
    pub target: usize,
    /// Zero-based interval of the target data set.
    pub interval: usize,
}

impl AffineMap {
    /// Identity on the plane, attached to vertex 0.
    pub const fn identity() -> Self {
        AffineMap { a: 1.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0, source: 0, target: 0, interval: 0 }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        Point::new(self.a * p.x + self.e, self.c * p.x + self.d * p.y + self.f)
    }

    /// Horizontal part only: `x ↦ a·x + e`.
    #[inline]
    pub fn forward_x(&self, x: f64) -> f64 {
        self.a * x + self.e
    }

    /// Inverse of the horizontal part.
    #[inline]
    pub fn inverse_x(&self, x: f64) -> f64 {
        (x - self.e) / self.a
    }

    /// Vertical part given a pulled-back abscissa `t` and the source value
    /// there.
    #[inline]
    pub fn lift(&self, t: f64, y: f64) -> f64 {
        self.c * t + self.d * y + self.f
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.a, self.c, self.d, self.e, self.f]
    }
}

pub fn apply_map(m: &AffineMap, p: Point) -> Point {
    m.apply(p)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("input failed validation with {} violation(s)", .0.violations.len())]
    Invalid(ValidationReport),
}

/// A validated set of data sets with one affine map per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GifsSystem {
    datasets: Vec<DataSet>,
    plan: WiringPlan,
    maps: Vec<Vec<AffineMap>>,
    r: f64,
}

impl GifsSystem {
    pub fn datasets(&self) -> &[DataSet] {
        &self.datasets
    }

    pub fn dataset(&self, alpha: usize) -> &DataSet {
        &self.datasets[alpha]
    }

    pub fn plan(&self) -> &WiringPlan {
        &self.plan
    }

    /// Maps whose target is `alpha`, in interval order.
    pub fn maps(&self, alpha: usize) -> &[AffineMap] {
        &self.maps[alpha]
    }

    pub fn all_maps(&self) -> impl Iterator<Item = &AffineMap> {
        self.maps.iter().flatten()
    }

    pub fn n(&self) -> usize {
        self.datasets.len()
    }

    /// Contraction factor of the function-space operator: the largest `|d|`.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Largest `|d|` among maps from `beta` into `alpha`, or `None` if the
    /// pair is not wired.
    pub fn pair_factor(&self, alpha: usize, beta: usize) -> Option<f64> {
        self.maps[alpha]
            .iter()
            .filter(|m| m.source == beta)
            .map(|m| m.d.abs())
            .reduce(f64::max)
    }

    /// Largest horizontal contraction `a` over all maps.
    pub fn max_a(&self) -> f64 {
        self.all_maps().fold(0.0, |m, w| m.max(w.a))
    }
}

/// Solves the endpoint constraints of every interval in closed form.
///
/// For interval `i` of target `α` with source `β`, the map sends the first
/// and last point of `D^β` to the left and right endpoint of the interval.
/// Fails if the input does not pass [`validate`] under `mode`.
pub fn build_system(
    datasets: &[DataSet],
    plan: &WiringPlan,
    mode: WidthCheckMode,
) -> Result<GifsSystem, BuildError> {
    let report = validate(datasets, plan, mode)?;
    if !report.ok() {
        return Err(BuildError::Invalid(report));
    }

    let maps = plan
        .assignments()
        .iter()
        .enumerate()
        .map(|(alpha, row)| {
            row.iter()
                .enumerate()
                .map(|(i, asg)| {
                    let src = &datasets[asg.source];
                    let (start, end) = datasets[alpha].interval(i);
                    solve_map(src.first(), src.last(), start, end, asg.d, asg.source, alpha, i)
                })
                .collect()
        })
        .collect();

    Ok(GifsSystem {
        datasets: datasets.to_vec(),
        plan: plan.clone(),
        maps,
        r: plan.max_abs_d(),
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_map(
    u0: Point,
    us: Point,
    p: Point,
    q: Point,
    d: f64,
    source: usize,
    target: usize,
    interval: usize,
) -> AffineMap {
    let w = us.x - u0.x;
    AffineMap {
        a: (q.x - p.x) / w,
        e: (us.x * p.x - u0.x * q.x) / w,
        c: (q.y - p.y) / w - d * (us.y - u0.y) / w,
        f: (us.x * p.y - u0.x * q.y) / w - d * (us.x * u0.y - u0.x * us.y) / w,
        d,
        source,
        target,
        interval,
    }
}

/// Largest coordinate error of any map at either source endpoint.
pub fn endpoint_residuals(sys: &GifsSystem) -> f64 {
    let mut worst: f64 = 0.0;
    for m in sys.all_maps() {
        let src = sys.dataset(m.source);
        let (p, q) = sys.dataset(m.target).interval(m.interval);
        for (from, to) in [(src.first(), p), (src.last(), q)] {
            let img = m.apply(from);
            worst = worst.max((img.x - to.x).abs()).max((img.y - to.y).abs());
        }
    }
    worst
}
