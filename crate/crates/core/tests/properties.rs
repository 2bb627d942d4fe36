use gdfif_core::*;
use proptest::prelude::*;

/// Random data set with `len` points, widths in [0.2, 1.0] and ordinates in
/// [-5, 5], starting somewhere in [-5, 5].
fn dataset(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DataSet> {
    len.prop_flat_map(|n| {
        (
            -5.0..5.0f64,
            prop::collection::vec(0.2..1.0f64, n - 1),
            prop::collection::vec(-5.0..5.0f64, n),
        )
    })
    .prop_map(|(x0, widths, ys)| {
        let mut x = x0;
        let mut pts = vec![Point::new(x, ys[0])];
        for (w, y) in widths.iter().zip(&ys[1..]) {
            x += w;
            pts.push(Point::new(x, *y));
        }
        DataSet::new(pts)
    })
}

/// Valid system over `vertices` random data sets with random wiring and
/// `d` in (-0.9, 0.9).
fn system(vertices: usize) -> impl Strategy<Value = GifsSystem> {
    system_with(vertices, 0.9)
}

fn system_with(vertices: usize, dmax: f64) -> impl Strategy<Value = GifsSystem> {
    prop::collection::vec(dataset(3..=8), vertices)
        .prop_flat_map(move |sets| {
            let rows: Vec<_> = sets
                .iter()
                .map(|ds| prop::collection::vec((0..vertices, -dmax..dmax), ds.interval_count()))
                .collect();
            (Just(sets), rows)
        })
        .prop_filter_map("width ratio", |(sets, rows)| {
            let plan = WiringPlan::new(
                rows.into_iter()
                    .map(|r| r.into_iter().map(|(s, d)| IntervalAssignment::new(s, d)).collect())
                    .collect(),
            );
            build_system(&sets, &plan, WidthCheckMode::AllPairs).ok()
        })
}

/// Like [`system`], but every map has `|d| < a`. Pulling back a point divides
/// its round-off by `a` while the value it feeds is damped by `d`, so only
/// these systems can be evaluated at a float abscissa to near machine
/// precision; with `|d| > a` the interpolant is rough enough that ulps in `x`
/// move the value by ~1e-6.
fn smooth_system(vertices: usize) -> impl Strategy<Value = GifsSystem> {
    system_with(vertices, 0.95).prop_map(|sys| {
        let plan = WiringPlan::new(
            (0..sys.n())
                .map(|alpha| {
                    sys.maps(alpha)
                        .iter()
                        .map(|m| IntervalAssignment::new(m.source, m.d / 0.95 * m.a))
                        .collect()
                })
                .collect(),
        );
        build_system(sys.datasets(), &plan, WidthCheckMode::AllPairs).unwrap()
    })
}

/// Depth at which `r^depth` drops below 1e-12.
fn depth_for(sys: &GifsSystem) -> usize {
    if sys.r() == 0.0 {
        1
    } else {
        ((1e-12f64).ln() / sys.r().ln()).ceil().max(1.0) as usize
    }
}

/// Admissible family on the standard grids with random interior values.
fn perturbed(sys: &GifsSystem, resolution: usize, seed: &[f64]) -> FunctionFamily {
    let base = initial_family(sys, resolution).unwrap();
    let mut k = 0;
    let members = base
        .members()
        .iter()
        .map(|m| {
            let n = m.len();
            let values = m
                .values()
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    if i == 0 || i == n - 1 {
                        y
                    } else {
                        k += 1;
                        y + 4.0 * seed[k % seed.len()] * ((k as f64) * 0.37).sin()
                    }
                })
                .collect();
            SampledFunction::new(m.vertex(), m.grid().to_vec(), values).unwrap()
        })
        .collect();
    FunctionFamily::new(members).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn endpoints_and_joins(sys in system(2)) {
        prop_assert!(endpoint_residuals(&sys) <= 1e-9);
        for alpha in 0..sys.n() {
            let maps = sys.maps(alpha);
            for pair in maps.windows(2) {
                let left = pair[0].apply(sys.dataset(pair[0].source).last());
                let right = pair[1].apply(sys.dataset(pair[1].source).first());
                let knot = sys.dataset(alpha).interval(pair[0].interval).1;
                prop_assert!(left.max_dist(knot) <= 1e-9);
                prop_assert!(right.max_dist(knot) <= 1e-9);
            }
            for m in maps {
                prop_assert!(m.a > 0.0 && m.a < 1.0);
            }
        }
    }

    #[test]
    fn row_sums_match_interval_counts(sys in system(3)) {
        let k = edge_counts(sys.plan());
        for (alpha, row) in k.iter().enumerate() {
            prop_assert_eq!(row.iter().sum::<usize>(), sys.dataset(alpha).interval_count());
        }
    }

    #[test]
    fn validation_is_pure_and_modes_are_ordered(
        sets in prop::collection::vec(dataset(3..=6), 2),
        sources in prop::collection::vec(0..2usize, 10),
    ) {
        let plan = WiringPlan::new(
            sets.iter()
                .enumerate()
                .map(|(v, ds)| (0..ds.interval_count()).map(|i| IntervalAssignment::new(sources[(v * 5 + i) % 10], 0.3)).collect())
                .collect(),
        );
        let strict = validate(&sets, &plan, WidthCheckMode::AllPairs).unwrap();
        prop_assert_eq!(&strict, &validate(&sets, &plan, WidthCheckMode::AllPairs).unwrap());
        let loose = validate(&sets, &plan, WidthCheckMode::UsedEdges).unwrap();
        prop_assert!(!strict.ok() || loose.ok());
        prop_assert_eq!(strict.strongly_connected, loose.strongly_connected);
    }

    #[test]
    fn operator_contracts(sys in system(2), seed_a in prop::collection::vec(-1.0..1.0f64, 7), seed_b in prop::collection::vec(-1.0..1.0f64, 5)) {
        let a = perturbed(&sys, 32, &seed_a);
        let b = perturbed(&sys, 32, &seed_b);
        let before = family_distance(&a, &b).unwrap();
        let after = family_distance(&apply_t(&sys, &a, 32).unwrap(), &apply_t(&sys, &b, 32).unwrap()).unwrap();
        prop_assert!(after <= sys.r() * before + 1e-12, "{after} > {} * {before}", sys.r());
    }

    #[test]
    fn knots_stay_exact(sys in system(2), seed in prop::collection::vec(-1.0..1.0f64, 4)) {
        let mut fam = perturbed(&sys, 16, &seed);
        for _ in 0..5 {
            fam = apply_t(&sys, &fam, 16).unwrap();
            prop_assert!(interpolation_residual(&sys, &fam) <= 1e-9);
            for (m, ds) in fam.members().iter().zip(sys.datasets()) {
                prop_assert_eq!(m.grid()[0], ds.first().x);
                prop_assert_eq!(*m.grid().last().unwrap(), ds.last().x);
            }
        }
    }

    #[test]
    fn exact_evaluation_is_self_referential(sys in smooth_system(2), s in 0.0..1.0f64) {
        // f_α(a·t + e) = c·t + d·f_β(t) + f for every map.
        let depth = depth_for(&sys);
        for m in sys.all_maps() {
            let src = sys.dataset(m.source);
            let t = src.first().x + s * src.span();
            let lhs = evaluate_exact(&sys, m.target, m.forward_x(t).clamp(sys.dataset(m.target).first().x, sys.dataset(m.target).last().x), depth + 1).unwrap();
            let rhs = m.lift(t, evaluate_exact(&sys, m.source, t, depth).unwrap());
            let scale = 1.0 + lhs.abs();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn cloud_points_lie_on_interpolant(sys in smooth_system(2)) {
        let clouds = iterate_attractor(&sys, 3, 0.0, DEFAULT_MAX_POINTS).unwrap();
        let depth = depth_for(&sys);
        for c in &clouds {
            let ds = sys.dataset(c.vertex);
            for p in &c.points {
                prop_assert!(p.x >= ds.first().x && p.x <= ds.last().x);
                let y = evaluate_exact(&sys, c.vertex, p.x, depth).unwrap();
                prop_assert!((y - p.y).abs() <= 1e-9 * (1.0 + y.abs()), "{} vs {} at x={}", y, p.y, p.x);
            }
        }
    }
}

/// Classic single-data-set construction, written out from the textbook
/// coefficient formulas and iterated on its own grid representation.
mod classic {
    pub struct Map {
        pub a: f64,
        pub c: f64,
        pub d: f64,
        pub e: f64,
        pub f: f64,
    }

    pub fn coefficients(pts: &[(f64, f64)], ds: &[f64]) -> Vec<Map> {
        let (x0, f0) = pts[0];
        let (xn, fn_) = pts[pts.len() - 1];
        let l = xn - x0;
        (1..pts.len())
            .map(|i| {
                let (xp, fp) = pts[i - 1];
                let (xi, fi) = pts[i];
                let d = ds[i - 1];
                Map {
                    a: (xi - xp) / l,
                    e: (xn * xp - x0 * xi) / l,
                    c: (fi - fp) / l - d * (fn_ - f0) / l,
                    f: (xn * fp - x0 * fi) / l - d * (xn * f0 - x0 * fn_) / l,
                    d,
                }
            })
            .collect()
    }

    fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let k = xs.iter().position(|&g| g >= x).unwrap_or(xs.len() - 1).max(1);
        let s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        ys[k - 1] + s * (ys[k] - ys[k - 1])
    }

    /// Fixed point of the classic operator sampled at `res` points per
    /// interval, starting from the chord.
    pub fn fixed_point(pts: &[(f64, f64)], maps: &[Map], res: usize, tol: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        for i in 1..pts.len() {
            for k in 0..res - 1 {
                xs.push(pts[i - 1].0 + (pts[i].0 - pts[i - 1].0) * k as f64 / (res - 1) as f64);
            }
        }
        xs.push(pts[pts.len() - 1].0);
        let (x0, f0) = pts[0];
        let (xn, fn_) = pts[pts.len() - 1];
        let mut ys: Vec<f64> = xs.iter().map(|&x| f0 + (x - x0) / (xn - x0) * (fn_ - f0)).collect();
        loop {
            let next: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let i = (j / (res - 1)).min(maps.len() - 1);
                    let m = &maps[i];
                    let t = ((x - m.e) / m.a).clamp(x0, xn);
                    m.c * t + m.d * interp(&xs, &ys, t) + m.f
                })
                .collect();
            let delta = next.iter().zip(&ys).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ys = next;
            if delta <= tol {
                return (xs, ys);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_set_matches_classic_construction(ds in dataset(3..=7), factors in prop::collection::vec(-0.9..0.9f64, 6)) {
        let n = ds.interval_count();
        let plan = WiringPlan::self_sourced(&[&factors[..n]]);
        let sys = build_system(std::slice::from_ref(&ds), &plan, WidthCheckMode::AllPairs).unwrap();
        let pairs: Vec<(f64, f64)> = ds.points().iter().map(|&p| p.into()).collect();
        let classic = classic::coefficients(&pairs, &factors[..n]);
        for (m, c) in sys.maps(0).iter().zip(&classic) {
            for (got, want) in m.coefficients().iter().zip([c.a, c.c, c.d, c.e, c.f]) {
                prop_assert!((got - want).abs() <= 1e-12);
            }
        }
        let fp = fixed_point(&sys, 24, 1e-13, 2000).unwrap();
        let (xs, ys) = classic::fixed_point(&pairs, &classic, 24, 1e-13);
        prop_assert_eq!(fp.family[0].grid(), &xs[..]);
        let gap = fp.family[0].values().iter().zip(&ys).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-8, "gap {gap}");
    }
}
