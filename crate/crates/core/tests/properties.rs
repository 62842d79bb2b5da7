//! Randomized checks of geometry, labeling, metric and frequency
//! invariants, against the independent oracles where one exists.

use mapforge::eval::{
    label_frame, label_frame_proximity, label_frame_visibility, mean_accuracy, mean_accuracy_column_normalized,
    mean_accuracy_exact, ChangeAnnotation, ChangeClass, ChangeDirection, ChangeGeometry, ConfusionMatrix2, EvalMode,
    Label, DEFAULT_FOV_DEG,
};
use mapforge::freq::{encounter_probability, extrapolate_encounters, per_tile_change_probability, TileId, TileVisitLog};
use mapforge::geometry::{
    interpolate_polyline, normal_at_waypoint, point_to_polygon_distance, polygon_iou, waypoint_tangent, Point2,
    Point3, Polygon2, Polyline3, SE3Pose,
};
use mapforge_oracles::{convex_iou, point_in_polygon};
use proptest::prelude::*;

fn polyline_strategy() -> impl Strategy<Value = Polyline3> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, -2.0..2.0f64), 2..8).prop_filter_map("repeated points", |v| {
        Polyline3::new(v.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect()).ok()
    })
}

/// Star-shaped simple polygon around the origin.
fn star_strategy() -> impl Strategy<Value = Polygon2> {
    prop::collection::vec((0.0..1.0f64, 1.0..10.0f64), 3..10).prop_filter_map("degenerate", |v| {
        let n = v.len() as f64;
        let pts = v
            .iter()
            .enumerate()
            .map(|(i, (jitter, r))| {
                let a = std::f64::consts::TAU * (i as f64 + 0.8 * jitter) / n;
                Point2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        Polygon2::new(pts).ok()
    })
}

fn rotated_rect(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Polygon2 {
    let (s, c) = theta.sin_cos();
    let corner = |dx: f64, dy: f64| Point2::new(cx + c * dx - s * dy, cy + s * dx + c * dy);
    Polygon2::new(vec![corner(-w, -h), corner(w, -h), corner(w, h), corner(-w, h)]).unwrap()
}

fn coords(p: &Polygon2) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v.x, v.y]).collect()
}

fn square(cx: f64, cy: f64, half: f64) -> Polygon2 {
    rotated_rect(cx, cy, half, half, 0.0)
}

fn annotation(poly: Polygon2) -> ChangeAnnotation {
    ChangeAnnotation {
        geometry: ChangeGeometry::Polygon(poly),
        class: ChangeClass::LaneGeometry,
        direction: ChangeDirection::Deletion,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn waypoints_are_equally_spaced_along_the_line(line in polyline_strategy(), n in 2usize..60) {
        let wps = interpolate_polyline(&line, n).unwrap();
        prop_assert_eq!(wps.len(), n);
        // arc-length position of each waypoint, found by walking the segments forward
        let pts = line.points();
        let (mut seg, mut base) = (0usize, 0.0f64);
        let mut arc = Vec::with_capacity(n);
        for w in &wps {
            loop {
                let (a, b) = (pts[seg], pts[seg + 1]);
                let len = a.distance(b);
                let along = a.distance(*w);
                let off = (along + w.distance(b) - len).abs();
                if off < 1e-9 * len.max(1.0) || seg + 2 == pts.len() {
                    arc.push(base + along);
                    break;
                }
                base += len;
                seg += 1;
            }
        }
        let total = line.length();
        for k in 1..n {
            let gap = arc[k] - arc[k - 1];
            let want = total / (n - 1) as f64;
            prop_assert!((gap - want).abs() <= 1e-9 * total, "gap {} vs {} (total {})", gap, want, total);
        }
    }

    #[test]
    fn normals_are_orthogonal_to_tangents(line in polyline_strategy(), n in 2usize..40, pick in 0.0..1.0f64) {
        let idx = ((n - 1) as f64 * pick) as usize;
        let wps = interpolate_polyline(&line, n).unwrap();
        if let (Ok(t), Ok(nrm)) = (waypoint_tangent(&wps, idx), normal_at_waypoint(&line, idx, n)) {
            prop_assert!(t.dot(nrm).abs() < 1e-9);
            prop_assert!((nrm.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn iou_is_symmetric_and_matches_convex_oracle(
        a in (-5.0..5.0f64, -5.0..5.0f64, 0.5..4.0f64, 0.5..4.0f64, -3.2..3.2f64),
        b in (-5.0..5.0f64, -5.0..5.0f64, 0.5..4.0f64, 0.5..4.0f64, -3.2..3.2f64),
    ) {
        let pa = rotated_rect(a.0, a.1, a.2, a.3, a.4);
        let pb = rotated_rect(b.0, b.1, b.2, b.3, b.4);
        let ab = polygon_iou(&pa, &pb);
        prop_assert!((ab - polygon_iou(&pb, &pa)).abs() < 1e-12);
        prop_assert!((polygon_iou(&pa, &pa) - 1.0).abs() < 1e-12);
        let want = convex_iou(&coords(&pa), &coords(&pb));
        prop_assert!((ab - want).abs() < 1e-9, "iou {} vs oracle {}", ab, want);
    }

    #[test]
    fn iou_shrinks_as_squares_slide_apart(d0 in 0.0..2.0f64, extra in 0.01..1.0f64, dir in -3.2..3.2f64) {
        let a = square(0.0, 0.0, 1.0);
        let slide = |d: f64| square(d * dir.cos(), d * dir.sin(), 1.0);
        let near = polygon_iou(&a, &slide(d0));
        let far = polygon_iou(&a, &slide(d0 + extra));
        prop_assert!(far <= near + 1e-12, "{} then {}", near, far);
    }

    #[test]
    fn zero_distance_iff_oracle_says_inside(poly in star_strategy(), x in -12.0..12.0f64, y in -12.0..12.0f64) {
        let q = Point2::new(x, y);
        let ring = coords(&poly);
        // stay clear of the boundary where either side may round differently
        if poly.boundary_distance(q) > 1e-6 {
            let d = point_to_polygon_distance(q, &poly);
            prop_assert_eq!(d == 0.0, point_in_polygon([x, y], &ring));
        }
        for v in poly.vertices() {
            prop_assert_eq!(point_to_polygon_distance(*v, &poly), 0.0);
        }
    }

    #[test]
    fn visibility_implies_proximity(
        ex in -30.0..30.0f64, ey in -30.0..30.0f64, yaw in -3.2..3.2f64,
        boxes in prop::collection::vec((-60.0..60.0f64, -60.0..60.0f64, 0.1..5.0f64), 1..4),
        range in 5.0..40.0f64,
    ) {
        let ego = SE3Pose::from_yaw(Point3::new(ex, ey, 0.0), yaw);
        let anns: Vec<_> = boxes.iter().map(|(x, y, h)| annotation(square(*x, *y, *h))).collect();
        let vis = label_frame_visibility(&ego, &anns, DEFAULT_FOV_DEG, range);
        let prox = label_frame_proximity(&ego, &anns, range);
        if vis == Label::Changed {
            prop_assert_eq!(prox, Label::Changed);
        }
        for mode in [EvalMode::Proximity, EvalMode::Visibility] {
            prop_assert_eq!(label_frame(&ego, &anns, mode, range), label_frame(&ego, &anns, mode, range));
        }
    }

    #[test]
    fn mean_accuracy_ignores_class_imbalance(
        cc in 0u64..500, uc in 0u64..500, cu in 0u64..500, uu in 0u64..500, k in 1u64..20,
    ) {
        prop_assume!(cc + uc > 0 && cu + uu > 0);
        let build = |scale: u64| {
            let mut m = ConfusionMatrix2::default();
            m.add(Label::Changed, Label::Changed, cc);
            m.add(Label::Unchanged, Label::Changed, uc);
            m.add(Label::Changed, Label::Unchanged, cu * scale);
            m.add(Label::Unchanged, Label::Unchanged, uu * scale);
            m
        };
        let (m, dup) = (build(1), build(k));
        prop_assert_eq!(mean_accuracy_exact(&m).unwrap(), mean_accuracy_exact(&dup).unwrap());
        let direct = mean_accuracy(&m).unwrap();
        prop_assert!((direct - mean_accuracy_column_normalized(&m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn frequency_estimators_are_scale_free(
        tiles in prop::collection::vec((1u64..50, any::<bool>()), 1..30), k in 2u64..6, min_visits in 1u32..10,
    ) {
        let entries: Vec<(TileId, bool)> = tiles
            .iter()
            .enumerate()
            .flat_map(|(i, (v, c))| std::iter::repeat_n((TileId { ix: i as i64, iy: 0 }, *c), *v as usize))
            .collect();
        let dup: Vec<_> = entries.iter().cycle().take(entries.len() * k as usize).copied().collect();
        prop_assert!((encounter_probability(&entries).unwrap() - encounter_probability(&dup).unwrap()).abs() < 1e-12);

        let mut log = TileVisitLog::default();
        let mut twice = TileVisitLog::default();
        for (i, (v, c)) in tiles.iter().enumerate() {
            log.record(TileId { ix: i as i64, iy: 0 }, *v, *c);
            for copy in 0..k as i64 {
                twice.record(TileId { ix: i as i64, iy: 1 + copy }, *v, *c);
            }
        }
        prop_assert!((log.encounter_probability().unwrap() - encounter_probability(&entries).unwrap()).abs() < 1e-12);
        match (per_tile_change_probability(&log, min_visits), per_tile_change_probability(&twice, min_visits)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn lowering_min_visits_over_unchanged_tiles_cannot_raise_the_estimate(
        tiles in prop::collection::vec((5u64..50, any::<bool>()), 1..20),
        sparse in prop::collection::vec(1u64..5, 0..20),
    ) {
        let mut log = TileVisitLog::default();
        for (i, (v, c)) in tiles.iter().enumerate() {
            log.record(TileId { ix: i as i64, iy: 0 }, *v, *c);
        }
        for (i, v) in sparse.iter().enumerate() {
            log.record(TileId { ix: i as i64, iy: 1 }, *v, false);
        }
        let strict = per_tile_change_probability(&log, 5).unwrap();
        let loose = per_tile_change_probability(&log, 1).unwrap();
        prop_assert!(loose <= strict + 1e-15);
    }

    #[test]
    fn extrapolation_is_linear(miles in 1.0..1e13f64, p in 0.0..1.0f64, s in 0.01..100.0f64) {
        let base = extrapolate_encounters(miles, p);
        let tol = 1e-12 * base.abs().max(1.0) * s;
        prop_assert!((extrapolate_encounters(miles * s, p) - s * base).abs() <= tol);
        prop_assert!((extrapolate_encounters(miles, p * s) - s * base).abs() <= tol);
    }
}
