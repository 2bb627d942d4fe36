//! Data sets, the interval wiring between them, and the hypothesis checks
//! that must hold before a system can be built.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::Point;

/// One ordered set of interpolation points `(x_j, F_j)`.
///
/// Construction does not check anything; [`validate`] reports every
/// problem at once instead of failing on the first.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: Vec<Point>,
}

impl DataSet {
    pub fn new(points: Vec<Point>) -> Self {
        DataSet { points }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        DataSet {
            points: pairs.iter().map(|&p| Point::from(p)).collect(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of intervals `N = len - 1`.
    pub fn interval_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// # Panics
    /// If the data set is empty.
    pub fn first(&self) -> Point {
        self.points[0]
    }

    /// # Panics
    /// If the data set is empty.
    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    /// `x_N - x_0`.
    pub fn span(&self) -> f64 {
        self.last().x - self.first().x
    }

    /// Endpoints `(x_{i}, x_{i+1})` of the zero-based interval `i`.
    pub fn interval(&self, i: usize) -> (Point, Point) {
        (self.points[i], self.points[i + 1])
    }

    pub fn abscissas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.x)
    }

    /// The straight line through the first and last point, evaluated at `x`.
    pub fn chord(&self, x: f64) -> f64 {
        let (p, q) = (self.first(), self.last());
        let s = (x - p.x) / (q.x - p.x);
        p.y + s * (q.y - p.y)
    }

    /// Zero-based interval containing `x`: a knot `x_i` (i ≥ 1) belongs to
    /// the interval that ends at it, and `x_0` belongs to the first interval.
    /// Returns `None` outside `[x_0, x_N]`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let n = self.interval_count();
        if n == 0 || !(x >= self.first().x && x <= self.last().x) {
            return None;
        }
        let k = self.points.partition_point(|p| p.x < x);
        Some(k.saturating_sub(1).min(n - 1))
    }
}

/// Source vertex and vertical scaling factor for one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalAssignment {
    pub source: usize,
    pub d: f64,
}

impl IntervalAssignment {
    pub const fn new(source: usize, d: f64) -> Self {
        IntervalAssignment { source, d }
    }
}

/// Per-vertex, per-interval choice of source vertex and scaling factor.
///
/// `assignments[α][i]` describes interval `i` of data set `α`. The number of
/// intervals of `α` wired to `β` is the edge count `K[α][β]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WiringPlan {
    assignments: Vec<Vec<IntervalAssignment>>,
}

impl WiringPlan {
    pub fn new(assignments: Vec<Vec<IntervalAssignment>>) -> Self {
        WiringPlan { assignments }
    }

    /// Expands contiguous `(source, count, d)` blocks per vertex.
    pub fn from_blocks(blocks: &[&[(usize, usize, f64)]]) -> Self {
        let assignments = blocks
            .iter()
            .map(|row| {
                row.iter()
                    .flat_map(|&(source, count, d)| {
                        core::iter::repeat_n(IntervalAssignment::new(source, d), count)
                    })
                    .collect()
            })
            .collect();
        WiringPlan { assignments }
    }

    /// Every interval of every vertex sourced from its own vertex; with one
    /// data set this is a classic fractal interpolation system.
    pub fn self_sourced(factors: &[&[f64]]) -> Self {
        let assignments = factors
            .iter()
            .enumerate()
            .map(|(v, ds)| ds.iter().map(|&d| IntervalAssignment::new(v, d)).collect())
            .collect();
        WiringPlan { assignments }
    }

    /// Vertex count `n`.
    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn vertex(&self, alpha: usize) -> &[IntervalAssignment] {
        &self.assignments[alpha]
    }

    pub fn assignments(&self) -> &[Vec<IntervalAssignment>] {
        &self.assignments
    }

    /// Largest `|d|` in the plan.
    pub fn max_abs_d(&self) -> f64 {
        self.assignments
            .iter()
            .flatten()
            .fold(0.0, |m: f64, a| m.max(a.d.abs()))
    }
}

/// Which ordered vertex pairs must satisfy the cross-data-set width ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthCheckMode {
    /// Every ordered pair of distinct vertices, wired or not.
    #[default]
    AllPairs,
    /// Only pairs where some interval of the target is wired to the source.
    UsedEdges,
}

impl WidthCheckMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WidthCheckMode::AllPairs => "all-pairs",
            WidthCheckMode::UsedEdges => "used-edges",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "all-pairs" => Some(WidthCheckMode::AllPairs),
            "used-edges" => Some(WidthCheckMode::UsedEdges),
            _ => None,
        }
    }
}

impl fmt::Display for WidthCheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationCode {
    TooFewPoints,
    NonFinite,
    NonIncreasingAbscissa,
    IntervalCount,
    SourceOutOfRange,
    ScalingFactor,
    /// An interval of one data set is at least as wide as the whole span of
    /// another data set, so the horizontal map between them would not shrink.
    WidthRatio,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::TooFewPoints => "too_few_points",
            ViolationCode::NonFinite => "non_finite",
            ViolationCode::NonIncreasingAbscissa => "non_increasing_abscissa",
            ViolationCode::IntervalCount => "interval_count",
            ViolationCode::SourceOutOfRange => "source_out_of_range",
            ViolationCode::ScalingFactor => "scaling_factor",
            ViolationCode::WidthRatio => "width_ratio",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed hypothesis.
///
/// `vertex` is the data set at fault. `other` is the second vertex involved
/// (the source for wiring problems, the vertex whose span was exceeded for
/// [`ViolationCode::WidthRatio`]). `index` is a point index for data
/// problems and an interval index otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    pub vertex: usize,
    pub other: Option<usize>,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub strongly_connected: bool,
    pub mode: WidthCheckMode,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructuralError {
    #[error("no data sets given")]
    NoDataSets,
    #[error("wiring plan has {plan} vertices but {datasets} data sets were given")]
    VertexCountMismatch { plan: usize, datasets: usize },
}

/// Checks every hypothesis needed to build a system from `datasets` wired by
/// `plan`. Problems are collected in the report; only a plan/data shape
/// mismatch is an error.
pub fn validate(
    datasets: &[DataSet],
    plan: &WiringPlan,
    mode: WidthCheckMode,
) -> Result<ValidationReport, StructuralError> {
    if datasets.is_empty() {
        return Err(StructuralError::NoDataSets);
    }
    if plan.n() != datasets.len() {
        return Err(StructuralError::VertexCountMismatch {
            plan: plan.n(),
            datasets: datasets.len(),
        });
    }
    let n = datasets.len();
    let mut violations = Vec::new();
    let mut usable = vec![true; n];

    for (alpha, ds) in datasets.iter().enumerate() {
        if ds.len() < 3 {
            usable[alpha] = false;
            violations.push(Violation {
                code: ViolationCode::TooFewPoints,
                message: format!(
                    "data set {} has {} points, at least 3 are required",
                    alpha + 1,
                    ds.len()
                ),
                vertex: alpha,
                other: None,
                index: None,
            });
        }
        for (j, p) in ds.points().iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                usable[alpha] = false;
                violations.push(Violation {
                    code: ViolationCode::NonFinite,
                    message: format!("data set {} point {} is not finite: {}", alpha + 1, j, p),
                    vertex: alpha,
                    other: None,
                    index: Some(j),
                });
            }
        }
        for j in 1..ds.len() {
            let (prev, cur) = (ds.points()[j - 1].x, ds.points()[j].x);
            if !(cur > prev) && prev.is_finite() && cur.is_finite() {
                usable[alpha] = false;
                violations.push(Violation {
                    code: ViolationCode::NonIncreasingAbscissa,
                    message: format!(
                        "data set {}: x_{} = {} does not exceed x_{} = {}",
                        alpha + 1,
                        j,
                        cur,
                        j - 1,
                        prev
                    ),
                    vertex: alpha,
                    other: None,
                    index: Some(j),
                });
            }
        }
    }

    for (alpha, row) in plan.assignments().iter().enumerate() {
        let expected = datasets[alpha].interval_count();
        if row.len() != expected {
            violations.push(Violation {
                code: ViolationCode::IntervalCount,
                message: format!(
                    "vertex {} wires {} intervals but its data set has {}",
                    alpha + 1,
                    row.len(),
                    expected
                ),
                vertex: alpha,
                other: None,
                index: None,
            });
        }
        for (i, a) in row.iter().enumerate() {
            if a.source >= n {
                violations.push(Violation {
                    code: ViolationCode::SourceOutOfRange,
                    message: format!(
                        "vertex {} interval {} names source {} but there are {} vertices",
                        alpha + 1,
                        i + 1,
                        a.source + 1,
                        n
                    ),
                    vertex: alpha,
                    other: Some(a.source),
                    index: Some(i),
                });
            }
            if !(a.d.abs() < 1.0) {
                violations.push(Violation {
                    code: ViolationCode::ScalingFactor,
                    message: format!(
                        "vertex {} interval {}: |d| = {} is not below 1",
                        alpha + 1,
                        i + 1,
                        a.d.abs()
                    ),
                    vertex: alpha,
                    other: Some(a.source),
                    index: Some(i),
                });
            }
        }
    }

    let wired = wired_pairs(plan);
    for alpha in 0..n {
        for beta in 0..n {
            if alpha == beta || !usable[alpha] || !usable[beta] {
                continue;
            }
            if mode == WidthCheckMode::UsedEdges && !wired[alpha][beta] {
                continue;
            }
            let span = datasets[beta].span();
            for i in 0..datasets[alpha].interval_count() {
                let (p, q) = datasets[alpha].interval(i);
                let ratio = (q.x - p.x) / span;
                if !(ratio < 1.0) {
                    violations.push(Violation {
                        code: ViolationCode::WidthRatio,
                        message: format!(
                            "interval {} of data set {} has width {} but data set {} spans only {} (ratio {})",
                            i + 1,
                            alpha + 1,
                            q.x - p.x,
                            beta + 1,
                            span,
                            ratio
                        ),
                        vertex: alpha,
                        other: Some(beta),
                        index: Some(i),
                    });
                }
            }
        }
    }

    Ok(ValidationReport {
        violations,
        strongly_connected: strongly_connected(&wired),
        mode,
    })
}

/// `K[α][β]`: how many intervals of vertex `α` are wired to source `β`.
/// Out-of-range sources are not counted.
pub fn edge_counts(plan: &WiringPlan) -> Vec<Vec<usize>> {
    let n = plan.n();
    let mut k = vec![vec![0usize; n]; n];
    for (alpha, row) in plan.assignments().iter().enumerate() {
        for a in row {
            if a.source < n {
                k[alpha][a.source] += 1;
            }
        }
    }
    k
}

fn wired_pairs(plan: &WiringPlan) -> Vec<Vec<bool>> {
    edge_counts(plan)
        .into_iter()
        .map(|row| row.into_iter().map(|c| c > 0).collect())
        .collect()
}

fn strongly_connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let reach_all = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let edge = if forward { adj[u][v] } else { adj[v][u] };
                if edge && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    n > 0 && reach_all(true) && reach_all(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2() -> (Vec<DataSet>, WiringPlan) {
        let d1 = DataSet::from_pairs(&[(0., 5.), (1., 4.), (2., 1.), (3., 1.), (4., 4.), (5., 5.)]);
        let d2 = DataSet::from_pairs(&[(0., 1.), (1., 2.), (2., 3.), (3., 2.), (4., 1.)]);
        let third = 1.0 / 3.0;
        let plan = WiringPlan::from_blocks(&[
            &[(0, 3, third), (1, 2, third)],
            &[(0, 1, third), (1, 3, third)],
        ]);
        (vec![d1, d2], plan)
    }

    fn flat() -> (Vec<DataSet>, WiringPlan) {
        (
            vec![DataSet::from_pairs(&[(0., 0.), (1., 0.), (2., 0.)])],
            WiringPlan::self_sourced(&[&[0.0, 0.0]]),
        )
    }

    #[test]
    fn example2_is_valid_and_strongly_connected() {
        let (ds, plan) = example2();
        for mode in [WidthCheckMode::AllPairs, WidthCheckMode::UsedEdges] {
            let report = validate(&ds, &plan, mode).unwrap();
            assert!(report.ok(), "{:?}", report.violations);
            assert!(report.strongly_connected);
        }
    }

    #[test]
    fn single_flat_set_is_valid() {
        let (ds, plan) = flat();
        let report = validate(&ds, &plan, WidthCheckMode::AllPairs).unwrap();
        assert!(report.ok());
        assert!(report.strongly_connected);
    }

    #[test]
    fn wide_interval_violates_width_ratio() {
        let d1 = DataSet::from_pairs(&[(0., 0.), (0.5, 1.), (1., 0.)]);
        let d2 = DataSet::from_pairs(&[(0., 0.), (2., 1.), (2.5, 0.)]);
        let plan = WiringPlan::new(vec![
            vec![IntervalAssignment::new(0, 0.2); 2],
            vec![IntervalAssignment::new(0, 0.2), IntervalAssignment::new(1, 0.2)],
        ]);
        for mode in [WidthCheckMode::AllPairs, WidthCheckMode::UsedEdges] {
            let report = validate(&[d1.clone(), d2.clone()], &plan, mode).unwrap();
            assert!(!report.ok());
            let v: Vec<_> = report
                .violations
                .iter()
                .filter(|v| v.code == ViolationCode::WidthRatio)
                .collect();
            assert_eq!(v.len(), 1);
            assert_eq!((v[0].vertex, v[0].other, v[0].index), (1, Some(0), Some(0)));
        }
    }

    #[test]
    fn unwired_pair_only_fails_all_pairs_mode() {
        let d1 = DataSet::from_pairs(&[(0., 0.), (0.5, 1.), (1., 0.)]);
        let d2 = DataSet::from_pairs(&[(0., 0.), (2., 1.), (2.5, 0.)]);
        let plan = WiringPlan::self_sourced(&[&[0.1, 0.1], &[0.1, 0.1]]);
        let ds = [d1, d2];
        let strict = validate(&ds, &plan, WidthCheckMode::AllPairs).unwrap();
        let loose = validate(&ds, &plan, WidthCheckMode::UsedEdges).unwrap();
        assert!(strict.has(ViolationCode::WidthRatio));
        assert!(loose.ok());
        assert!(!loose.strongly_connected);
    }

    #[test]
    fn data_problems_are_all_reported() {
        let bad = DataSet::from_pairs(&[(0., 0.), (1., f64::NAN), (1., 0.)]);
        let plan = WiringPlan::self_sourced(&[&[0.5, 1.0, 0.1]]);
        let report = validate(&[bad], &plan, WidthCheckMode::AllPairs).unwrap();
        assert!(report.has(ViolationCode::NonFinite));
        assert!(report.has(ViolationCode::NonIncreasingAbscissa));
        assert!(report.has(ViolationCode::IntervalCount));
        assert!(report.has(ViolationCode::ScalingFactor));
    }

    #[test]
    fn duplicate_abscissa_rejected_without_tolerance() {
        let ds = DataSet::from_pairs(&[(0., 0.), (1., 1.), (1., 2.), (2., 0.)]);
        let plan = WiringPlan::self_sourced(&[&[0.1; 3]]);
        let report = validate(&[ds], &plan, WidthCheckMode::AllPairs).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, Some(2));
    }

    #[test]
    fn two_points_are_too_few() {
        let ds = DataSet::from_pairs(&[(0., 0.), (1., 1.)]);
        let plan = WiringPlan::self_sourced(&[&[0.1]]);
        let report = validate(&[ds], &plan, WidthCheckMode::AllPairs).unwrap();
        assert!(report.has(ViolationCode::TooFewPoints));
    }

    #[test]
    fn bad_source_reported() {
        let (ds, _) = flat();
        let plan = WiringPlan::new(vec![vec![IntervalAssignment::new(0, 0.0), IntervalAssignment::new(3, 0.0)]]);
        let report = validate(&ds, &plan, WidthCheckMode::AllPairs).unwrap();
        assert!(report.has(ViolationCode::SourceOutOfRange));
    }

    #[test]
    fn structural_errors() {
        let (ds, _) = flat();
        let plan = WiringPlan::self_sourced(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(
            validate(&ds, &plan, WidthCheckMode::AllPairs),
            Err(StructuralError::VertexCountMismatch { plan: 2, datasets: 1 })
        );
        assert_eq!(
            validate(&[], &WiringPlan::new(vec![]), WidthCheckMode::AllPairs),
            Err(StructuralError::NoDataSets)
        );
    }

    #[test]
    fn edge_count_matrices() {
        let (_, plan) = example2();
        assert_eq!(edge_counts(&plan), vec![vec![3, 2], vec![1, 3]]);
        let single = WiringPlan::self_sourced(&[&[0.1, 0.2, 0.3]]);
        assert_eq!(edge_counts(&single), vec![vec![3]]);
        let alternating = WiringPlan::new(vec![
            [1, 0, 1, 0].iter().map(|&s| IntervalAssignment::new(s, 0.1)).collect(),
            vec![IntervalAssignment::new(1, 0.1); 2],
        ]);
        assert_eq!(edge_counts(&alternating)[0], vec![2, 2]);
    }

    #[test]
    fn locate_uses_interval_ending_at_knot() {
        let ds = DataSet::from_pairs(&[(0., 0.), (3., 5.), (6., 4.), (10., 1.)]);
        assert_eq!(ds.locate(0.0), Some(0));
        assert_eq!(ds.locate(1.0), Some(0));
        assert_eq!(ds.locate(3.0), Some(0));
        assert_eq!(ds.locate(3.5), Some(1));
        assert_eq!(ds.locate(6.0), Some(1));
        assert_eq!(ds.locate(10.0), Some(2));
        assert_eq!(ds.locate(10.5), None);
        assert_eq!(ds.locate(-0.1), None);
        assert_eq!(ds.locate(f64::NAN), None);
    }
}
