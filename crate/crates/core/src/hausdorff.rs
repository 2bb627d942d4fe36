//! Hausdorff distance between finite point sets in the max norm.
//!
//! Nearest-neighbour queries go through a column index: points are bucketed
//! into vertical strips and sorted by `y` inside each strip, so a query only
//! scans a square window that doubles until it is guaranteed to contain the
//! nearest point.

use alloc::vec::Vec;

use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum HausdorffError {
    #[error("point set is empty")]
    Empty,
}

struct ColumnIndex {
    origin: f64,
    width: f64,
    /// `(column, start, end)` into `points`, sorted by column.
    columns: Vec<(i64, usize, usize)>,
    points: Vec<Point>,
}

impl ColumnIndex {
    fn new(pts: &[Point]) -> Self {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        let extent = (xmax - xmin).max(ymax - ymin);
        let width = if extent > 0.0 {
            extent / libm::sqrt(pts.len() as f64).max(1.0)
        } else {
            1.0
        };
        let col = |x: f64| libm::floor((x - xmin) / width) as i64;

        let mut keyed: Vec<(i64, Point)> = pts.iter().map(|&p| (col(p.x), p)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.y.total_cmp(&b.1.y)));

        let mut columns = Vec::new();
        let mut start = 0;
        for k in 1..=keyed.len() {
            if k == keyed.len() || keyed[k].0 != keyed[start].0 {
                columns.push((keyed[start].0, start, k));
                start = k;
            }
        }
        ColumnIndex {
            origin: xmin,
            width,
            columns,
            points: keyed.into_iter().map(|(_, p)| p).collect(),
        }
    }

    fn column_of(&self, x: f64) -> i64 {
        libm::floor((x - self.origin) / self.width) as i64
    }

    /// Smallest distance to a point within the window of half-size `r`
    /// around `q`, or infinity.
    fn search(&self, q: Point, r: f64) -> f64 {
        let (lo, hi) = (self.column_of(q.x - r), self.column_of(q.x + r));
        let first = self.columns.partition_point(|c| c.0 < lo);
        let mut best = f64::INFINITY;
        for &(c, start, end) in &self.columns[first..] {
            if c > hi {
                break;
            }
            let strip = &self.points[start..end];
            let from = strip.partition_point(|p| p.y < q.y - r);
            for p in &strip[from..] {
                if p.y > q.y + r {
                    break;
                }
                best = best.min(q.max_dist(*p));
            }
        }
        best
    }

    fn nearest(&self, q: Point) -> f64 {
        let mut r = self.width;
        loop {
            let best = self.search(q, r);
            if best <= r {
                return best;
            }
            r *= 2.0;
        }
    }
}

/// `max_{p ∈ from} min_{q ∈ to} |p - q|_∞`.
pub fn directed_hausdorff(from: &[Point], to: &[Point]) -> Result<f64, HausdorffError> {
    if from.is_empty() || to.is_empty() {
        return Err(HausdorffError::Empty);
    }
    let index = ColumnIndex::new(to);
    Ok(from.iter().fold(0.0, |m, &p| m.max(index.nearest(p))))
}

/// Symmetric Hausdorff distance in the max norm.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<f64, HausdorffError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}
