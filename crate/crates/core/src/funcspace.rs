//! Sampled interpolants and the fixed-point operator on the product of
//! function spaces.
//!
//! A candidate interpolant for vertex `α` is a continuous function on
//! `[x_0^α, x_N^α]` pinned to the data at both ends. It is stored as a
//! piecewise-linear function through samples on a grid that contains every
//! knot. The operator `T` rebuilds each function interval by interval from
//! the source function of that interval:
//!
//! ```text
//! T(F)[α](x) = c·t + d·F[β](t) + f,   t = (x - e) / a
//! ```
//!
//! and is a contraction with factor `r = max |d|` in the sup metric. The
//! output grid never changes between iterations, so distances between
//! iterates are exact maxima over sample values.

use alloc::vec::Vec;

use crate::geom::Point;
use crate::maps::{AffineMap, GifsSystem};
use crate::model::DataSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuncSpaceError {
    #[error("functions belong to different vertices ({left} and {right})")]
    VertexMismatch { left: usize, right: usize },
    #[error("family has {got} members, expected {expected}")]
    FamilySize { expected: usize, got: usize },
    #[error("resolution must be at least 2 samples per interval, got {0}")]
    Resolution(usize),
    #[error("grid and values must have equal length >= 2 with strictly increasing abscissas")]
    BadGrid,
    #[error("member for vertex {vertex} does not start and end at the data endpoints")]
    NotAdmissible { vertex: usize },
    #[error("tolerance must be positive and finite")]
    Tolerance,
    #[error("no convergence after {iterations} iterations (last delta {final_delta:e})")]
    NotConverged { iterations: usize, final_delta: f64 },
    #[error("x = {x} lies outside [{lo}, {hi}] for vertex {vertex}")]
    OutOfDomain { vertex: usize, x: f64, lo: f64, hi: f64 },
    #[error("no vertex {0}")]
    NoSuchVertex(usize),
    #[error("recursion depth must be at least 1")]
    Depth,
}

/// Piecewise-linear function through `(grid[k], values[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    vertex: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(vertex: usize, grid: Vec<f64>, values: Vec<f64>) -> Result<Self, FuncSpaceError> {
        if grid.len() < 2 || grid.len() != values.len() || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FuncSpaceError::BadGrid);
        }
        Ok(SampledFunction { vertex, grid, values })
    }

    /// The chord through the first and last data point, sampled on `grid`.
    pub fn chord(vertex: usize, ds: &DataSet, grid: Vec<f64>) -> Self {
        let (first, last) = (ds.first(), ds.last());
        let n = grid.len();
        let values = grid
            .iter()
            .enumerate()
            .map(|(k, &x)| match k {
                0 => first.y,
                _ if k == n - 1 => last.y,
                _ => ds.chord(x),
            })
            .collect();
        SampledFunction { vertex, grid, values }
    }

    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = Point> + '_ {
        self.grid.iter().zip(&self.values).map(|(&x, &y)| Point::new(x, y))
    }

    /// Linear interpolation between samples; clamps outside the domain.
    /// Returns the stored value exactly at a grid abscissa.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.values[0];
        }
        if x >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let k = self.grid.partition_point(|&g| g < x);
        if self.grid[k] == x {
            return self.values[k];
        }
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        let s = (x - x0) / (x1 - x0);
        y0 + s * (y1 - y0)
    }

    fn is_admissible(&self, ds: &DataSet) -> bool {
        let (first, last) = (ds.first(), ds.last());
        let scale = 1.0 + first.y.abs().max(last.y.abs());
        let tol = 1e-9 * scale;
        self.grid[0] == first.x
            && self.grid[self.grid.len() - 1] == last.x
            && (self.values[0] - first.y).abs() <= tol
            && (self.values[self.values.len() - 1] - last.y).abs() <= tol
    }
}

/// One sampled function per vertex, in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    members: Vec<SampledFunction>,
}

impl FunctionFamily {
    pub fn new(members: Vec<SampledFunction>) -> Result<Self, FuncSpaceError> {
        for (i, m) in members.iter().enumerate() {
            if m.vertex != i {
                return Err(FuncSpaceError::VertexMismatch { left: i, right: m.vertex });
            }
        }
        Ok(FunctionFamily { members })
    }

    pub fn members(&self) -> &[SampledFunction] {
        &self.members
    }

    pub fn get(&self, alpha: usize) -> Option<&SampledFunction> {
        self.members.get(alpha)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl core::ops::Index<usize> for FunctionFamily {
    type Output = SampledFunction;

    fn index(&self, alpha: usize) -> &SampledFunction {
        &self.members[alpha]
    }
}

/// Sup distance between two piecewise-linear functions of the same vertex.
/// Exact: the difference is linear between consecutive points of the union
/// grid, so its maximum sits on that grid.
pub fn sup_distance(u: &SampledFunction, v: &SampledFunction) -> Result<f64, FuncSpaceError> {
    if u.vertex != v.vertex {
        return Err(FuncSpaceError::VertexMismatch { left: u.vertex, right: v.vertex });
    }
    let mut worst: f64 = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < u.len() || j < v.len() {
        let x = match (u.grid.get(i), v.grid.get(j)) {
            (Some(&a), Some(&b)) if a == b => {
                i += 1;
                j += 1;
                a
            }
            (Some(&a), Some(&b)) if a < b => {
                i += 1;
                a
            }
            (Some(&a), None) => {
                i += 1;
                a
            }
            (_, Some(&b)) => {
                j += 1;
                b
            }
            (None, None) => unreachable!(),
        };
        worst = worst.max((u.eval(x) - v.eval(x)).abs());
    }
    Ok(worst)
}

/// Max over vertices of [`sup_distance`].
pub fn family_distance(a: &FunctionFamily, b: &FunctionFamily) -> Result<f64, FuncSpaceError> {
    if a.len() != b.len() {
        return Err(FuncSpaceError::FamilySize { expected: a.len(), got: b.len() });
    }
    a.members
        .iter()
        .zip(&b.members)
        .try_fold(0.0f64, |m, (u, v)| Ok(m.max(sup_distance(u, v)?)))
}

/// Output grid of vertex `alpha`: `resolution` equally spaced samples per
/// interval, sharing the knots between neighbouring intervals.
pub fn sample_grid(ds: &DataSet, resolution: usize) -> Vec<f64> {
    let steps = resolution - 1;
    let mut grid = Vec::with_capacity(ds.interval_count() * steps + 1);
    for i in 0..ds.interval_count() {
        let (p, q) = ds.interval(i);
        grid.push(p.x);
        for k in 1..steps {
            grid.push(p.x + (q.x - p.x) * (k as f64) / (steps as f64));
        }
    }
    grid.push(ds.last().x);
    grid
}

/// Chords between each data set's endpoints on the standard grids.
pub fn initial_family(sys: &GifsSystem, resolution: usize) -> Result<FunctionFamily, FuncSpaceError> {
    if resolution < 2 {
        return Err(FuncSpaceError::Resolution(resolution));
    }
    Ok(FunctionFamily {
        members: sys
            .datasets()
            .iter()
            .enumerate()
            .map(|(alpha, ds)| SampledFunction::chord(alpha, ds, sample_grid(ds, resolution)))
            .collect(),
    })
}

/// Abscissa in the source domain that `m` sends to `x`. Interval endpoints
/// pull back to the source endpoints exactly.
fn pull_back(m: &AffineMap, x: f64, p: f64, q: f64, u0: f64, us: f64) -> f64 {
    if x == p {
        u0
    } else if x == q {
        us
    } else {
        m.inverse_x(x).clamp(u0, us)
    }
}

/// One application of the operator, resampled onto the standard grid at
/// `resolution` samples per interval.
pub fn apply_t(
    sys: &GifsSystem,
    fam: &FunctionFamily,
    resolution: usize,
) -> Result<FunctionFamily, FuncSpaceError> {
    if resolution < 2 {
        return Err(FuncSpaceError::Resolution(resolution));
    }
    if fam.len() != sys.n() {
        return Err(FuncSpaceError::FamilySize { expected: sys.n(), got: fam.len() });
    }
    for (alpha, member) in fam.members.iter().enumerate() {
        if member.vertex != alpha {
            return Err(FuncSpaceError::VertexMismatch { left: alpha, right: member.vertex });
        }
        if !member.is_admissible(sys.dataset(alpha)) {
            return Err(FuncSpaceError::NotAdmissible { vertex: alpha });
        }
    }

    let steps = resolution - 1;
    let mut members = Vec::with_capacity(sys.n());
    for (alpha, ds) in sys.datasets().iter().enumerate() {
        let grid = sample_grid(ds, resolution);
        let mut values = Vec::with_capacity(grid.len());
        for (i, m) in sys.maps(alpha).iter().enumerate() {
            let src = sys.dataset(m.source);
            let (u0, us) = (src.first().x, src.last().x);
            let (p, q) = ds.interval(i);
            let last = if i + 1 == ds.interval_count() { steps } else { steps - 1 };
            for k in 0..=last {
                let x = grid[i * steps + k];
                let t = pull_back(m, x, p.x, q.x, u0, us);
                let y = m.lift(t, fam[m.source].eval(t));
                if k == 0 || k == steps {
                    let knot = if k == 0 { p.y } else { q.y };
                    debug_assert!(
                        (y - knot).abs() <= 1e-8 * (1.0 + knot.abs()),
                        "knot value {y} drifted from data ordinate {knot}"
                    );
                }
                values.push(y);
            }
        }
        members.push(SampledFunction { vertex: alpha, grid, values });
    }
    Ok(FunctionFamily { members })
}

/// Result of [`fixed_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub family: FunctionFamily,
    pub iterations: usize,
    /// Distance between the last two iterates.
    pub final_delta: f64,
    /// `final_delta · r / (1 - r)`: bound on the distance from the returned
    /// family to the fixed point of the sampled operator.
    pub error_bound: f64,
    /// Successive-iterate distances, `deltas[k]` = d(F_{k+1}, F_k).
    pub deltas: Vec<f64>,
}

impl FixedPoint {
    /// Distance between the initial chords and their image.
    pub fn initial_delta(&self) -> f64 {
        self.deltas.first().copied().unwrap_or(0.0)
    }
}

/// Iterates the operator from the chord family until two successive
/// iterates are within `tol`.
pub fn fixed_point(
    sys: &GifsSystem,
    resolution: usize,
    tol: f64,
    max_iters: usize,
) -> Result<FixedPoint, FuncSpaceError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(FuncSpaceError::Tolerance);
    }
    let r = sys.r();
    let mut current = initial_family(sys, resolution)?;
    let mut deltas = Vec::new();
    for it in 1..=max_iters {
        let next = apply_t(sys, &current, resolution)?;
        let delta = family_distance(&next, &current)?;
        deltas.push(delta);
        current = next;
        if delta <= tol {
            return Ok(FixedPoint {
                family: current,
                iterations: it,
                final_delta: delta,
                error_bound: delta * r / (1.0 - r),
                deltas,
            });
        }
    }
    Err(FuncSpaceError::NotConverged {
        iterations: max_iters,
        final_delta: deltas.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Largest deviation from the data ordinate at any knot of any vertex.
pub fn interpolation_residual(sys: &GifsSystem, fam: &FunctionFamily) -> f64 {
    let mut worst: f64 = 0.0;
    for (ds, f) in sys.datasets().iter().zip(&fam.members) {
        for p in ds.points() {
            worst = worst.max((f.eval(p.x) - p.y).abs());
        }
    }
    worst
}

/// Evaluates the interpolant of vertex `alpha` at `x` by following the map
/// that covers `x` back to its source `depth` times, evaluating the chord
/// there and pushing the value forward again. The error is at most
/// `r^depth / (1 - r)` times the distance between the chords and their
/// image under the operator.
pub fn evaluate_exact(sys: &GifsSystem, alpha: usize, x: f64, depth: usize) -> Result<f64, FuncSpaceError> {
    if alpha >= sys.n() {
        return Err(FuncSpaceError::NoSuchVertex(alpha));
    }
    if depth == 0 {
        return Err(FuncSpaceError::Depth);
    }
    let ds = sys.dataset(alpha);
    let (lo, hi) = (ds.first().x, ds.last().x);
    if !(x >= lo && x <= hi) {
        return Err(FuncSpaceError::OutOfDomain { vertex: alpha, x, lo, hi });
    }

    let mut chain: Vec<(&AffineMap, f64)> = Vec::with_capacity(depth);
    let (mut vertex, mut cur) = (alpha, x);
    for _ in 0..depth {
        let ds = sys.dataset(vertex);
        let cur_clamped = cur.clamp(ds.first().x, ds.last().x);
        let i = ds.locate(cur_clamped).ok_or(FuncSpaceError::OutOfDomain {
            vertex,
            x: cur,
            lo: ds.first().x,
            hi: ds.last().x,
        })?;
        let m = &sys.maps(vertex)[i];
        let (p, q) = ds.interval(i);
        let src = sys.dataset(m.source);
        let t = pull_back(m, cur_clamped, p.x, q.x, src.first().x, src.last().x);
        chain.push((m, t));
        vertex = m.source;
        cur = t;
    }
    let base = sys.dataset(vertex);
    let mut y = if cur == base.first().x {
        base.first().y
    } else if cur == base.last().x {
        base.last().y
    } else {
        base.chord(cur)
    };
    for (m, t) in chain.into_iter().rev() {
        y = m.lift(t, y);
    }
    Ok(y)
}
