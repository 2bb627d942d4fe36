//! Attractors of the graph-directed system as finite point clouds.
//!
//! [`iterate_attractor`] applies the set-valued operator
//! `A^α ← ⋃_i ω_i(A^{source(i)})` from the data points, which already lie on
//! the attractors. [`chaos_game`] is a random walk over the same maps and is
//! checked against the deterministic clouds.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::funcspace::SampledFunction;
use crate::geom::Point;
use crate::hausdorff::{directed_hausdorff, HausdorffError};
use crate::maps::{AffineMap, GifsSystem};

/// Default limit on the number of images a single step may produce.
pub const DEFAULT_MAX_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttractorError {
    #[error("expected {expected} clouds, got {got}")]
    CloudCount { expected: usize, got: usize },
    #[error("generation {generation} would produce {count} points, above the limit of {cap}")]
    TooManyPoints { generation: usize, count: usize, cap: usize },
    #[error("generations must be at least 1")]
    Generations,
    #[error("total points ({total}) must exceed burn-in ({burn_in})")]
    BurnIn { total: usize, burn_in: usize },
    #[error("dedup tolerance must be finite and non-negative")]
    DedupTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCloud {
    pub vertex: usize,
    pub points: Vec<Point>,
    pub generation: usize,
}

impl AttractorCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Image of `p` under `m`, with the abscissa clamped into the target
/// interval `[lo, hi]` to absorb round-off.
#[inline]
fn push_forward(m: &AffineMap, p: Point, lo: f64, hi: f64) -> Point {
    let img = m.apply(p);
    Point::new(img.x.clamp(lo, hi), img.y)
}

fn step_count(sys: &GifsSystem, clouds: &[AttractorCloud]) -> usize {
    sys.all_maps().map(|m| clouds[m.source].points.len()).sum()
}

/// One application of the set-valued operator to every vertex.
pub fn hutchinson_step(sys: &GifsSystem, clouds: &[AttractorCloud]) -> Result<Vec<AttractorCloud>, AttractorError> {
    if clouds.len() != sys.n() {
        return Err(AttractorError::CloudCount { expected: sys.n(), got: clouds.len() });
    }
    Ok((0..sys.n())
        .map(|alpha| {
            let ds = sys.dataset(alpha);
            let mut points = Vec::with_capacity(sys.maps(alpha).iter().map(|m| clouds[m.source].len()).sum());
            for m in sys.maps(alpha) {
                let (p, q) = ds.interval(m.interval);
                points.extend(clouds[m.source].points.iter().map(|&pt| push_forward(m, pt, p.x, q.x)));
            }
            AttractorCloud {
                vertex: alpha,
                points,
                generation: clouds[alpha].generation + 1,
            }
        })
        .collect())
}

/// Keeps the first point of every `tol`-sized cell.
fn dedup(points: Vec<Point>, tol: f64) -> Vec<Point> {
    if tol == 0.0 {
        return points;
    }
    let mut seen = BTreeSet::new();
    points
        .into_iter()
        .filter(|p| seen.insert((libm::floor(p.x / tol) as i64, libm::floor(p.y / tol) as i64)))
        .collect()
}

/// Runs `generations` set-valued steps starting from the data points,
/// thinning each cloud to one point per `dedup_tolerance` cell. A step that
/// would create more than `max_points` images is refused.
pub fn iterate_attractor(
    sys: &GifsSystem,
    generations: usize,
    dedup_tolerance: f64,
    max_points: usize,
) -> Result<Vec<AttractorCloud>, AttractorError> {
    if generations == 0 {
        return Err(AttractorError::Generations);
    }
    if !(dedup_tolerance >= 0.0 && dedup_tolerance.is_finite()) {
        return Err(AttractorError::DedupTolerance);
    }
    let mut clouds: Vec<AttractorCloud> = sys
        .datasets()
        .iter()
        .enumerate()
        .map(|(alpha, ds)| AttractorCloud {
            vertex: alpha,
            points: ds.points().to_vec(),
            generation: 0,
        })
        .collect();
    for generation in 1..=generations {
        let count = step_count(sys, &clouds);
        if count > max_points {
            return Err(AttractorError::TooManyPoints { generation, count, cap: max_points });
        }
        clouds = hutchinson_step(sys, &clouds)?;
        for c in &mut clouds {
            c.points = dedup(core::mem::take(&mut c.points), dedup_tolerance);
        }
    }
    Ok(clouds)
}

/// Random iteration: pick a vertex uniformly, then one of its maps
/// uniformly, and replace that vertex's current point by the image of the
/// source vertex's current point. The first `burn_in` emissions of each
/// vertex are dropped. Deterministic for a given seed.
pub fn chaos_game(
    sys: &GifsSystem,
    total_points: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<AttractorCloud>, AttractorError> {
    if total_points <= burn_in {
        return Err(AttractorError::BurnIn { total: total_points, burn_in });
    }
    let n = sys.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: Vec<Point> = sys.datasets().iter().map(|d| d.first()).collect();
    let mut emitted = alloc::vec![0usize; n];
    let mut clouds: Vec<AttractorCloud> = (0..n)
        .map(|vertex| AttractorCloud { vertex, points: Vec::new(), generation: 0 })
        .collect();
    for _ in 0..total_points {
        let alpha = rng.gen_range(0..n);
        let maps = sys.maps(alpha);
        let m = &maps[rng.gen_range(0..maps.len())];
        let (p, q) = sys.dataset(alpha).interval(m.interval);
        let img = push_forward(m, current[m.source], p.x, q.x);
        current[alpha] = img;
        emitted[alpha] += 1;
        if emitted[alpha] > burn_in {
            clouds[alpha].points.push(img);
        }
        clouds[alpha].generation = emitted[alpha];
    }
    Ok(clouds)
}

/// Max-norm distance from `p` to the segment `[a, b]`.
fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (ux, uy) = (b.x - a.x, b.y - a.y);
    let (wx, wy) = (a.x - p.x, a.y - p.y);
    let at = |s: f64| {
        let s = s.clamp(0.0, 1.0);
        (wx + s * ux).abs().max((wy + s * uy).abs())
    };
    // max(|dx(s)|, |dy(s)|) is convex and piecewise linear in s; its minimum
    // is at an end or where one of dx, dy, dx - dy, dx + dy vanishes.
    let mut best = at(0.0).min(at(1.0));
    for (num, den) in [(wx, ux), (wy, uy), (wx - wy, ux - uy), (wx + wy, ux + uy)] {
        if den != 0.0 {
            best = best.min(at(-num / den));
        }
    }
    best
}

/// Distance from `p` to the polyline through the samples of `f`.
fn polyline_distance(f: &SampledFunction, p: Point) -> f64 {
    let grid = f.grid();
    let vals = f.values();
    let seg = |k: usize| (Point::new(grid[k], vals[k]), Point::new(grid[k + 1], vals[k + 1]));
    let last = grid.len() - 2;
    let k0 = grid.partition_point(|&g| g <= p.x).saturating_sub(1).min(last);
    let (a, b) = seg(k0);
    let mut best = segment_distance(p, a, b);
    let mut k = k0;
    while k > 0 && p.x - grid[k] < best {
        k -= 1;
        let (a, b) = seg(k);
        best = best.min(segment_distance(p, a, b));
    }
    let mut k = k0;
    while k < last && grid[k + 1] - p.x < best {
        k += 1;
        let (a, b) = seg(k);
        best = best.min(segment_distance(p, a, b));
    }
    best
}

/// Max-norm Hausdorff distance between a cloud and the graph of a sampled
/// function, taken as the polyline through its samples.
///
/// The cloud-to-graph side is exact. The graph-to-cloud side walks every
/// segment in steps no longer than a quarter of the smallest grid spacing,
/// so it can undershoot the true value by at most an eighth of that spacing.
pub fn graph_hausdorff(f: &SampledFunction, cloud: &AttractorCloud) -> Result<f64, HausdorffError> {
    if cloud.points.is_empty() {
        return Err(HausdorffError::Empty);
    }
    let to_graph = cloud.points.iter().fold(0.0, |m: f64, &p| m.max(polyline_distance(f, p)));

    let grid = f.grid();
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min) / 4.0;
    let mut walk = Vec::new();
    let samples: Vec<Point> = f.samples().collect();
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = libm::ceil(a.max_dist(b) / step).max(1.0) as usize;
        for j in 0..pieces {
            let s = j as f64 / pieces as f64;
            walk.push(Point::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)));
        }
    }
    walk.push(samples[samples.len() - 1]);
    let from_graph = directed_hausdorff(&walk, &cloud.points)?;
    Ok(to_graph.max(from_graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hausdorff::hausdorff_distance;
    use crate::maps::build_system;
    use crate::model::{DataSet, WidthCheckMode, WiringPlan};

    fn example1() -> GifsSystem {
        let ds = DataSet::from_pairs(&[(0., 0.), (3., 5.), (6., 4.), (10., 1.)]);
        let plan = WiringPlan::self_sourced(&[&[0.25, 0.5, 0.25]]);
        build_system(&[ds], &plan, WidthCheckMode::AllPairs).unwrap()
    }

    fn example2() -> GifsSystem {
        let d1 = DataSet::from_pairs(&[(0., 5.), (1., 4.), (2., 1.), (3., 1.), (4., 4.), (5., 5.)]);
        let d2 = DataSet::from_pairs(&[(0., 1.), (1., 2.), (2., 3.), (3., 2.), (4., 1.)]);
        let third = 1.0 / 3.0;
        let plan = WiringPlan::from_blocks(&[
            &[(0, 3, third), (1, 2, third)],
            &[(0, 1, third), (1, 3, third)],
        ]);
        build_system(&[d1, d2], &plan, WidthCheckMode::AllPairs).unwrap()
    }

    fn flat() -> GifsSystem {
        let ds = DataSet::from_pairs(&[(0., 0.), (1., 0.), (2., 0.)]);
        build_system(&[ds], &WiringPlan::self_sourced(&[&[0.0, 0.0]]), WidthCheckMode::AllPairs).unwrap()
    }

    #[test]
    fn endpoints_map_to_knots() {
        let sys = example1();
        let start = [AttractorCloud {
            vertex: 0,
            points: alloc::vec![Point::new(0.0, 0.0), Point::new(10.0, 1.0)],
            generation: 0,
        }];
        let next = hutchinson_step(&sys, &start).unwrap();
        assert_eq!(next[0].len(), 6);
        assert_eq!(next[0].generation, 1);
        for knot in [Point::new(3.0, 5.0), Point::new(6.0, 4.0)] {
            assert!(next[0].points.iter().any(|p| p.max_dist(knot) < 1e-12));
        }
        assert!(hutchinson_step(&sys, &[]).is_err());
    }

    #[test]
    fn first_generation_count_bound() {
        let sys = example2();
        let clouds = iterate_attractor(&sys, 1, 0.0, DEFAULT_MAX_POINTS).unwrap();
        let sizes: Vec<usize> = sys.datasets().iter().map(|d| d.len()).collect();
        for (alpha, c) in clouds.iter().enumerate() {
            let sources: usize = sys.maps(alpha).iter().map(|m| sizes[m.source]).sum();
            assert_eq!(c.len(), sources);
            assert!(c.len() <= sys.dataset(alpha).interval_count() * sizes.iter().sum::<usize>());
        }
    }

    #[test]
    fn clouds_stay_in_domain_and_hit_knots() {
        let sys = example2();
        let clouds = iterate_attractor(&sys, 4, 1e-4, DEFAULT_MAX_POINTS).unwrap();
        for (c, ds) in clouds.iter().zip(sys.datasets()) {
            assert_eq!(c.generation, 4);
            assert!(c.points.iter().all(|p| p.x >= ds.first().x && p.x <= ds.last().x));
            for k in ds.points() {
                assert!(c.points.iter().any(|p| p.max_dist(*k) < 1e-9));
            }
        }
    }

    #[test]
    fn flat_clouds_lie_on_axis() {
        let sys = flat();
        for c in iterate_attractor(&sys, 6, 0.0, DEFAULT_MAX_POINTS).unwrap() {
            assert!(c.points.iter().all(|p| p.y == 0.0));
        }
        for c in chaos_game(&sys, 500, 10, 3).unwrap() {
            assert!(c.points.iter().all(|p| p.y == 0.0));
        }
    }

    #[test]
    fn memory_guard() {
        let sys = example2();
        match iterate_attractor(&sys, 12, 0.0, 10_000) {
            Err(AttractorError::TooManyPoints { cap, .. }) => assert_eq!(cap, 10_000),
            other => panic!("expected guard, got {other:?}"),
        }
        assert_eq!(iterate_attractor(&sys, 0, 0.0, 10), Err(AttractorError::Generations));
        assert_eq!(iterate_attractor(&sys, 1, f64::NAN, 10), Err(AttractorError::DedupTolerance));
    }

    #[test]
    fn chaos_game_is_seeded() {
        let sys = example2();
        let a = chaos_game(&sys, 5_000, 20, 7).unwrap();
        let b = chaos_game(&sys, 5_000, 20, 7).unwrap();
        let c = chaos_game(&sys, 5_000, 20, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let emitted: usize = a.iter().map(|c| c.len()).sum();
        assert_eq!(emitted, 5_000 - 2 * 20);
        assert!(chaos_game(&sys, 10, 10, 0).is_err());
    }

    #[test]
    fn dedup_keeps_one_per_cell() {
        let pts = alloc::vec![Point::new(0.01, 0.01), Point::new(0.02, 0.03), Point::new(0.2, 0.0)];
        let kept = dedup(pts, 0.1);
        assert_eq!(kept, alloc::vec![Point::new(0.01, 0.01), Point::new(0.2, 0.0)]);
    }

    #[test]
    fn converged_cloud_is_nearly_invariant() {
        let sys = example1();
        let clouds = iterate_attractor(&sys, 9, 1e-3, DEFAULT_MAX_POINTS).unwrap();
        let next = hutchinson_step(&sys, &clouds).unwrap();
        let moved = hausdorff_distance(&clouds[0].points, &next[0].points).unwrap();
        assert!(moved < 1e-2, "moved {moved}");
    }
}
