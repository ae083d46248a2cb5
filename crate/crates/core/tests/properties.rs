use std::collections::BTreeMap;
use std::f64::consts::TAU;

use geoscale_core::fractal::{
    box_count, koch_curve, rasterized_area, yardstick_walk, KochSpec, ScaleSeries,
};
use geoscale_core::geometry::{polygon_area, polyline_length};
use geoscale_core::maup::{aggregate_rates, scale_effect_table, CountGrid, Zoning};
use geoscale_core::scaling::{head_tail_breaks, DEFAULT_HEAD_LIMIT};
use geoscale_core::street::{
    border_numbers, build_arrangement, connectivity_graph, default_snap_tolerance,
    deflection_angle, extract_blocks, natural_cities, trace_natural_streets, JoinStrategy,
    PlanarArrangement, StreetSegment,
};
use geoscale_core::terrain::{coarsen, slope_grid, slope_histogram, synthetic_fractal_surface, SurfaceSpec};
use geoscale_core::{Geometry, Point, Polygon, Polyline, RasterGrid, ValueSeries};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y)| Point::new(x, y))
}

fn polyline() -> impl Strategy<Value = Polyline> {
    prop::collection::vec(point(), 2..12).prop_filter_map("degenerate", |v| Polyline::new(v).ok())
}

/// Star-shaped simple polygon: sorted angles with random radii.
fn star_polygon() -> impl Strategy<Value = Polygon> {
    (point(), prop::collection::vec((0.0..1.0f64, 1.0..10.0f64), 3..16)).prop_filter_map(
        "degenerate",
        |(c, mut spokes)| {
            spokes.sort_by(|a, b| a.0.total_cmp(&b.0));
            spokes.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
            let ring = spokes
                .iter()
                .map(|&(t, r)| c + Point::new(r * (t * TAU).cos(), r * (t * TAU).sin()))
                .collect();
            Polygon::new(ring, vec![]).ok()
        },
    )
}

fn values() -> impl Strategy<Value = ValueSeries> {
    prop::collection::vec(1e-3..1e3f64, 1..200).prop_map(|v| ValueSeries::new(v).unwrap())
}

fn halving(start: f64, n: usize) -> ScaleSeries {
    ScaleSeries::new((0..n).map(|k| start / 2f64.powi(k as i32)).collect()).unwrap()
}

proptest! {
    #[test]
    fn length_invariant_under_rigid_motion(p in polyline(), d in point(), theta in 0.0..TAU) {
        let moved = p.map_points(|q| q.rotate(theta) + d).unwrap();
        let (a, b) = (polyline_length(&p), polyline_length(&moved));
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn area_invariant_and_positive(poly in star_polygon(), d in point()) {
        let moved = poly.map_points(|q| q + d).unwrap();
        let a = polygon_area(&poly);
        prop_assert!(a > 0.0);
        prop_assert!((a - polygon_area(&moved)).abs() <= 1e-9 * a);
        let mut reversed = poly.exterior().to_vec();
        reversed.reverse();
        let flipped = Polygon::new(reversed, vec![]).unwrap();
        prop_assert!((polygon_area(&flipped) - a).abs() <= 1e-9 * a);
    }

    #[test]
    fn head_tail_scale_invariant(s in values(), c in prop::sample::select(vec![0.001, 7.0, 1e6])) {
        let a = head_tail_breaks(&s, DEFAULT_HEAD_LIMIT).unwrap();
        let b = head_tail_breaks(&s.scaled(c).unwrap(), DEFAULT_HEAD_LIMIT).unwrap();
        prop_assert_eq!(&a.class_assignment, &b.class_assignment);
        prop_assert_eq!(a.head_sizes(), b.head_sizes());
        prop_assert_eq!(a.ht_index, b.ht_index);
    }

    #[test]
    fn head_tail_partition(s in values()) {
        let p = head_tail_breaks(&s, DEFAULT_HEAD_LIMIT).unwrap();
        prop_assert_eq!(p.class_assignment.len(), s.len());
        prop_assert_eq!(p.levels[0].count(), s.len());
        for w in p.levels.windows(2) {
            prop_assert!(w[0].accepted);
            prop_assert_eq!(w[0].head_count, w[1].count());
            prop_assert!(w[0].head_fraction <= DEFAULT_HEAD_LIMIT);
        }
        for k in 0..p.levels.len() {
            let entering = p.class_assignment.iter().filter(|&&c| c >= k).count();
            prop_assert_eq!(entering, p.levels[k].count());
            // heads are nested and strictly above their level's mean
            for i in p.head_members(k) {
                prop_assert!(s.values()[i] > p.levels[k].mean || k + 1 == p.levels.len());
            }
        }
        prop_assert_eq!(p.ht_index, p.levels.len());
    }

    #[test]
    fn ht_index_one_iff_constant(v in 1e-3..1e3f64, n in 1usize..50, bump in 1e-3..1.0f64) {
        let flat = ValueSeries::new(vec![v; n]).unwrap();
        prop_assert_eq!(head_tail_breaks(&flat, DEFAULT_HEAD_LIMIT).unwrap().ht_index, 1);
        let mut vals = vec![v; n.max(3)];
        vals[0] = v + bump * v;
        let one_big = ValueSeries::new(vals).unwrap();
        prop_assert!(head_tail_breaks(&one_big, DEFAULT_HEAD_LIMIT).unwrap().ht_index >= 2);
    }

    #[test]
    fn walk_bounded_by_length_plus_yardstick(p in polyline(), frac in 0.001..2.0f64) {
        let len = p.length();
        let eps = frac * len;
        let w = yardstick_walk(&p, eps).unwrap();
        prop_assert!(w.measured_length <= len + eps + 1e-9 * len);
    }

    #[test]
    fn walk_exact_on_straight_lines(
        a in point(),
        theta in 0.0..TAU,
        mut steps in prop::collection::vec(0.1..20.0f64, 1..8),
        frac in 0.001..1.5f64,
    ) {
        let dir = Point::new(theta.cos(), theta.sin());
        let mut pts = vec![a];
        let mut t = 0.0;
        for s in steps.drain(..) {
            t += s;
            pts.push(a + dir * t);
        }
        let line = Polyline::new(pts).unwrap();
        let len = line.length();
        let w = yardstick_walk(&line, frac * len).unwrap();
        prop_assert!((w.measured_length - len).abs() <= 1e-9 * len);
    }

    #[test]
    fn box_count_monotone(p in polyline()) {
        let counts = box_count(&Geometry::Line(p.clone()), &halving(p.bbox().diagonal(), 6), Point::default());
        for w in counts.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
        prop_assert!(counts.iter().all(|c| c.1 >= 1));
    }

    #[test]
    fn raster_area_covers_and_decreases(poly in star_polygon(), ox in 0.0..1.0f64, oy in 0.0..1.0f64) {
        let d = poly.bbox().diagonal();
        let sizes = halving(d / 4.0, 5);
        let offset = Point::new(ox * d / 4.0, oy * d / 4.0);
        let areas = rasterized_area(&poly, &sizes, offset);
        let truth = poly.area();
        for w in areas.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
        prop_assert!(areas.iter().all(|a| a.1 >= truth * (1.0 - 1e-12)));
    }

    #[test]
    fn koch_self_similar(n in 1u32..7) {
        let fine = koch_curve(&KochSpec::new(n)).unwrap();
        let coarse = koch_curve(&KochSpec::new(n - 1)).unwrap();
        let head = &fine.vertices()[..=4usize.pow(n - 1)];
        prop_assert_eq!(head.len(), coarse.vertices().len());
        for (a, b) in head.iter().zip(coarse.vertices()) {
            prop_assert!((*a * 3.0).distance(*b) < 1e-9);
        }
    }
}

fn plane(n: usize, cell: f64, f: impl Fn(Point) -> f64) -> RasterGrid {
    RasterGrid::from_fn(n, n, Point::new(0.0, 0.0), cell, f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slope_ignores_constant_offset(seed in any::<u64>(), c in -1e3..1e3f64) {
        let dem = synthetic_fractal_surface(&SurfaceSpec::new(4, 0.5, seed)).unwrap();
        let mut shifted = dem.clone();
        for v in shifted.values.iter_mut() {
            *v += c;
        }
        let (a, b) = (slope_grid(&dem).unwrap(), slope_grid(&shifted).unwrap());
        for (x, y) in a.grid.values.iter().zip(&b.grid.values) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_slope_resolution_invariant(a in -3.0..3.0f64, b in -3.0..3.0f64, f in 2usize..5) {
        let dem = plane(24, 1.5, |p| a * p.x + b * p.y + 7.0);
        let fine = slope_grid(&dem).unwrap();
        let want = fine.grid.get(1, 1);
        let coarse = slope_grid(&coarsen(&dem, f).unwrap().grid).unwrap();
        for v in coarse.grid.valid_values() {
            prop_assert!((v - want).abs() < 1e-9);
        }
        prop_assert!(coarse.grid.valid_count() > 0);
    }

    #[test]
    fn histogram_conserves_area(seed in any::<u64>(), width in 0.1..10.0f64) {
        let s = slope_grid(&synthetic_fractal_surface(&SurfaceSpec::new(5, 0.6, seed)).unwrap()).unwrap();
        let h = slope_histogram(&s, width).unwrap();
        let cell = s.grid.cell_size * s.grid.cell_size;
        prop_assert!((h.total_area() - s.grid.valid_count() as f64 * cell).abs() < 1e-9);
        prop_assert!(h.bins.iter().all(|b| b.1 >= 0.0));
    }

    #[test]
    fn coarsening_contracts_slope_range(seed in any::<u64>()) {
        let dem = synthetic_fractal_surface(&SurfaceSpec::new(7, 0.5, seed)).unwrap();
        let mut last: Option<(f64, f64)> = None;
        for f in [1usize, 2, 4, 8] {
            let g = if f == 1 { dem.clone() } else { coarsen(&dem, f).unwrap().grid };
            let s = slope_grid(&g).unwrap();
            let now = (s.max().unwrap(), s.range_width().unwrap());
            if let Some(prev) = last {
                prop_assert!(now.0 <= prev.0 && now.1 <= prev.1, "factor {}: {:?} after {:?}", f, now, prev);
            }
            last = Some(now);
        }
    }
}

fn count_grid() -> impl Strategy<Value = CountGrid> {
    prop::collection::vec((0u64..50, 0u64..50), 16).prop_map(|v| {
        let cells = v.into_iter().map(|(n, extra)| (n, n + extra)).collect();
        CountGrid::new(4, 4, cells).unwrap()
    })
}

fn labels(k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, 16)
}

fn zoning_of(name: &str, labels: &[usize]) -> Zoning {
    Zoning::from_fn(name, 4, 4, |c, r| format!("z{}", labels[r * 4 + c]))
}

proptest! {
    #[test]
    fn zoning_conserves_mass(g in count_grid(), l in labels(5)) {
        let z = zoning_of("random", &l);
        let rates = aggregate_rates(&g, &z).unwrap();
        let (n, d) = rates.values().fold((0, 0), |acc, r| (acc.0 + r.numerator, acc.1 + r.denominator));
        prop_assert_eq!((n, d), g.totals());
        let whole = aggregate_rates(&g, &Zoning::whole("all", 4, 4)).unwrap();
        prop_assert_eq!(whole["all"].rate, g.global_rate());
    }

    #[test]
    fn zone_rates_within_member_bounds(g in count_grid(), l in labels(4)) {
        let z = zoning_of("random", &l);
        for (zone, r) in aggregate_rates(&g, &z).unwrap() {
            let Some(rate) = r.rate else { continue };
            let member: Vec<f64> = z
                .members(&zone)
                .into_iter()
                .filter_map(|(c, row)| {
                    let (n, d) = g.cell(c, row);
                    (d > 0).then(|| 100.0 * n as f64 / d as f64)
                })
                .collect();
            let lo = member.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = member.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(rate >= lo - 1e-9 && rate <= hi + 1e-9);
        }
    }

    #[test]
    fn uniform_rate_is_zoning_neutral(dens in prop::collection::vec(1u64..100, 16), l in labels(6)) {
        let cells = dens.iter().map(|&d| (d, 10 * d)).collect();
        let g = CountGrid::new(4, 4, cells).unwrap();
        for r in aggregate_rates(&g, &zoning_of("random", &l)).unwrap().values() {
            prop_assert!((r.rate.unwrap() - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_widens_interval(g in count_grid(), l in labels(6), merge in prop::collection::vec(0usize..3, 6)) {
        let fine = zoning_of("fine", &l);
        let merged: Vec<usize> = l.iter().map(|&z| merge[z]).collect();
        let coarse = zoning_of("coarse", &merged);
        let t = scale_effect_table(&g, &[Zoning::cells("cells", 4, 4), fine, coarse, Zoning::whole("all", 4, 4)]).unwrap();
        for w in t.windows(2) {
            if let (Some(a), Some(b), Some(c), Some(d)) = (w[0].min_rate, w[0].max_rate, w[1].min_rate, w[1].max_rate) {
                prop_assert!(a <= c + 1e-9 && d <= b + 1e-9);
            }
        }
        let global = t[0].global_rate;
        prop_assert!(t.iter().all(|s| s.global_rate == global));
    }
}

fn segment(id: usize, a: Point, b: Point) -> StreetSegment {
    StreetSegment::new(id, Polyline::new(vec![a, b]).unwrap())
}

/// Grid of full-length streets at the given x and y positions plus one
/// diagonal street across the whole grid.
fn irregular_grid(xs: &[f64], ys: &[f64]) -> Vec<StreetSegment> {
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    let (y0, y1) = (ys[0], *ys.last().unwrap());
    let mut out = Vec::new();
    for &x in xs {
        out.push(segment(out.len(), Point::new(x, y0), Point::new(x, y1)));
    }
    for &y in ys {
        out.push(segment(out.len(), Point::new(x0, y), Point::new(x1, y)));
    }
    out.push(segment(out.len(), Point::new(x0, y0), Point::new(x1, y1)));
    out
}

fn positions(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5..5.0f64, n).prop_map(|gaps| {
        let mut acc = vec![0.0];
        for g in gaps {
            acc.push(acc.last().unwrap() + g);
        }
        acc
    })
}

fn transform(segs: &[StreetSegment], f: impl Fn(Point) -> Point + Copy) -> Vec<StreetSegment> {
    segs.iter()
        .map(|s| StreetSegment { id: s.id, name: s.name.clone(), geometry: s.geometry.map_points(f).unwrap() })
        .collect()
}

type Summary = (Vec<Vec<usize>>, Vec<Vec<usize>>, BTreeMap<usize, u32>, Vec<Vec<usize>>);

fn summarize(segs: &[StreetSegment]) -> Summary {
    let arr = build_arrangement(segs, default_snap_tolerance(segs)).unwrap();
    let streets = trace_natural_streets(&arr, JoinStrategy::EveryBestFit, 45.0).unwrap();
    let blocks = extract_blocks(&arr);
    let border = border_numbers(&blocks).unwrap();
    let cities = natural_cities(&blocks).unwrap();
    (
        streets.into_iter().map(|s| s.edges).collect(),
        blocks.into_iter().map(|b| b.neighbors).collect(),
        border,
        cities.into_iter().map(|c| c.blocks).collect(),
    )
}

fn euler_holds(arr: &PlanarArrangement) -> bool {
    (0..arr.component_count).all(|c| arr.euler_characteristic(c) == 2)
}

fn random_soup() -> impl Strategy<Value = Vec<StreetSegment>> {
    let coord = || (0i32..12, 0i32..12).prop_map(|(x, y)| Point::new(x as f64, y as f64));
    prop::collection::vec((coord(), coord()), 1..25).prop_map(|pairs| {
        pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .enumerate()
            .map(|(i, (a, b))| segment(i, a, b))
            .collect::<Vec<_>>()
    })
    .prop_filter("empty", |v| !v.is_empty())
}

fn check_streets(arr: &PlanarArrangement, strategy: JoinStrategy, theta: f64) -> Result<(), TestCaseError> {
    let streets = trace_natural_streets(arr, strategy, theta).unwrap();
    let mut seen = vec![0usize; arr.edges.len()];
    for s in &streets {
        for &e in &s.edges {
            seen[e] += 1;
        }
        for w in s.edges.windows(2) {
            let (e1, e2) = (&arr.edges[w[0]], &arr.edges[w[1]]);
            if e1.from == e1.to || e2.from == e2.to {
                continue;
            }
            let shared: Vec<usize> = [e1.from, e1.to].into_iter().filter(|v| *v == e2.from || *v == e2.to).collect();
            prop_assert!(!shared.is_empty());
            let end = |e: usize, v: usize| if arr.edges[e].from == v { 2 * e } else { 2 * e + 1 };
            let ok = shared
                .iter()
                .any(|&v| deflection_angle(arr, end(w[0], v), end(w[1], v)) <= theta + 1e-6);
            prop_assert!(ok);
        }
    }
    prop_assert!(seen.iter().all(|&c| c == 1));
    connectivity_graph(arr, &streets).unwrap();
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soup_arrangements_satisfy_euler(segs in random_soup()) {
        let arr = build_arrangement(&segs, default_snap_tolerance(&segs)).unwrap();
        prop_assert!(euler_holds(&arr));
        for s in [JoinStrategy::EveryBestFit, JoinStrategy::SelfBestFit, JoinStrategy::SameName] {
            check_streets(&arr, s, 45.0)?;
        }
        check_streets(&arr, JoinStrategy::EveryBestFit, 10.0)?;
        let blocks = extract_blocks(&arr);
        if !blocks.is_empty() {
            let border = border_numbers(&blocks).unwrap();
            prop_assert_eq!(*border.values().min().unwrap(), 1);
            for b in &blocks {
                for nb in &b.neighbors {
                    prop_assert!(border[&b.id].abs_diff(border[nb]) <= 1);
                }
            }
        }
    }

    #[test]
    fn polyline_soups_node_cleanly(lines in prop::collection::vec(prop::collection::vec((0i32..6, 0i32..6), 2..6), 1..8)) {
        let segs: Vec<StreetSegment> = lines
            .into_iter()
            .filter_map(|l| Polyline::new(l.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect()).ok())
            .enumerate()
            .map(|(i, g)| StreetSegment::new(i, g))
            .collect();
        prop_assume!(!segs.is_empty());
        let arr = build_arrangement(&segs, default_snap_tolerance(&segs)).unwrap();
        prop_assert!(euler_holds(&arr));
        check_streets(&arr, JoinStrategy::SelfBestFit, 45.0)?;
    }

    #[test]
    fn grid_blocks_tile_the_hull(xs in positions(1..6), ys in positions(1..6)) {
        let segs = irregular_grid(&xs, &ys);
        let arr = build_arrangement(&segs, default_snap_tolerance(&segs)).unwrap();
        prop_assert!(euler_holds(&arr));
        let total: f64 = extract_blocks(&arr).iter().map(|b| b.area).sum();
        let hull = (xs.last().unwrap() - xs[0]) * (ys.last().unwrap() - ys[0]);
        prop_assert!((total - hull).abs() <= 1e-9 * hull);
    }

    #[test]
    fn street_outputs_rotation_and_scale_invariant(
        xs in positions(2..6),
        ys in positions(2..6),
        theta in 0.0..TAU,
        c in 0.01..100.0f64,
    ) {
        let segs = irregular_grid(&xs, &ys);
        let base = summarize(&segs);
        prop_assert_eq!(&base, &summarize(&transform(&segs, |p| p.rotate(theta))));
        prop_assert_eq!(&base, &summarize(&transform(&segs, |p| p * c)));
    }
}
