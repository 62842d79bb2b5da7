use proptest::prelude::*;

use super::*;
use crate::fixtures::{crosswalk_across_y, flat_ground, straight_lane, Paint, DOUBLE_YELLOW, IMPLICIT, SOLID_WHITE};
use crate::geometry::{Point3, Polygon2};
use crate::map::{DrivableArea, LaneSegment, PedestrianCrossing};

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon2 {
    Polygon2::new(vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)]).unwrap()
}

fn build(lanes: Vec<LaneSegment>, crossings: Vec<PedestrianCrossing>, areas: Vec<Polygon2>) -> VectorMap {
    let ground = flat_ground(Aabb2::around(p(0.0, 0.0), 30.0), 5.0);
    VectorMap::new(
        lanes,
        crossings,
        areas.into_iter().map(|polygon| DrivableArea { polygon }).collect(),
        ground,
    )
    .unwrap()
}

fn origin() -> SE3Pose {
    SE3Pose::identity()
}

#[test]
fn ppm_round_trip_and_errors() {
    let mut img = RasterImage::new(3, 2);
    img.set(2, 1, Rgb([1, 2, 3]));
    img.set(0, 0, Rgb::YELLOW);
    let mut buf = Vec::new();
    img.write_ppm(&mut buf).unwrap();
    assert!(buf.starts_with(b"P6\n3 2\n255\n"));
    assert_eq!(buf.len(), 11 + 18);
    let back = RasterImage::read_ppm(&buf[..]).unwrap();
    assert_eq!(back.as_bytes(), img.as_bytes());

    let mut commented = b"P6\n# made by hand\n3 2\n255\n".to_vec();
    commented.extend_from_slice(img.as_bytes());
    assert_eq!(RasterImage::read_ppm(&commented[..]).unwrap().get(2, 1), Rgb([1, 2, 3]));

    assert!(matches!(RasterImage::read_ppm(&b"P3\n1 1\n255\n"[..]), Err(Error::Format { .. })));
    assert!(matches!(RasterImage::read_ppm(&b"P6\n2 2\n255\n\x00\x00"[..]), Err(Error::Format { .. })));
    assert!(matches!(RasterImage::read_ppm(&b"P6\n2 2\n65535\n"[..]), Err(Error::Format { .. })));
}

#[test]
fn file_names() {
    assert_eq!(image_file_name("log7", 1234, ImageKind::SensorBev, "ppm"), "log7_1234_sensor_bev.ppm");
    assert_eq!(image_file_name("a", 0, ImageKind::MapEgo, "png"), "a_0_map_ego.png");
    assert_eq!(ImageKind::MapBev.as_str(), "map_bev");
}

#[test]
fn scanline_covers_pixel_centers_once() {
    let mut hits = [0u8; 16];
    scan_polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]], 4, 4, |c, r| hits[r * 4 + c] += 1);
    scan_polygon(&[[2.0, 0.0], [4.0, 0.0], [4.0, 2.0], [2.0, 2.0]], 4, 4, |c, r| hits[r * 4 + c] += 1);
    assert_eq!(&hits[..8], &[1; 8]);
    assert_eq!(&hits[8..], &[0; 8]);

    // a diagonal split of a square covers each center exactly once
    let mut hits = vec![0u8; 100];
    for tri in [[[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]], [[0.0, 0.0], [10.0, 10.0], [0.0, 10.0]]] {
        scan_polygon(&tri, 10, 10, |c, r| hits[r * 10 + c] += 1);
    }
    assert!(hits.iter().all(|h| *h == 1), "{hits:?}");

    // centers on the left edge are in, on the right edge out
    let mut n = 0;
    scan_polygon(&[[0.5, 0.0], [1.5, 0.0], [1.5, 1.0], [0.5, 1.0]], 4, 1, |c, _| {
        assert_eq!(c, 0);
        n += 1;
    });
    assert_eq!(n, 1);
}

#[test]
fn default_palette() {
    let s = RenderStyle::default();
    assert_eq!(s.drivable_area, Rgb([64, 64, 64]));
    assert_eq!(s.lane_interior, Rgb([128, 128, 128]));
    assert_eq!(s.implicit_boundary, Rgb([255, 0, 0]));
    assert_eq!(s.stripe_dark, Rgb([160, 160, 160]));
    assert_eq!((s.dash_on, s.dash_off, s.stripe_width, s.line_width), (1.5, 1.0, 0.3, 0.1));
}

#[test]
fn empty_map_renders_black() {
    let map = build(vec![], vec![], vec![]);
    let img = render_map_bev(&map, &origin(), 100, 0.1, &RenderStyle::default()).unwrap();
    assert_eq!(img.count(Rgb::BLACK), 100 * 100);
    let g = img.georef.unwrap();
    assert_eq!(g.origin, p(-5.0, 5.0));
    assert_eq!(g.pixel_center(0, 0), p(-4.95, 4.95));
}

#[test]
fn ego_outside_ground_is_an_error() {
    let map = build(vec![], vec![], vec![]);
    let far = SE3Pose::from_translation(Point3::new(500.0, 0.0, 0.0));
    assert!(matches!(
        render_map_bev(&map, &far, 10, 0.1, &RenderStyle::default()),
        Err(Error::OutsideGrid { .. })
    ));
}

#[test]
fn crosswalk_is_on_top() {
    let lane = straight_lane(1, p(-10.0, 0.0), p(10.0, 0.0), 4.0, SOLID_WHITE, SOLID_WHITE);
    let cw = crosswalk_across_y(0.0, 3.0, -2.0, 2.0);
    let map = build(vec![lane], vec![cw], vec![rect(-10.0, -5.0, 10.0, 5.0)]);
    let style = RenderStyle::default();
    let img = render_map_bev(&map, &origin(), 400, 0.05, &style).unwrap();
    let geo = img.georef.unwrap();
    let at = |x: f64, y: f64| {
        let [c, r] = geo.to_pixel(p(x, y));
        img.get(c as usize, r as usize)
    };
    // crosswalk over lane over drivable area; first stripe starts at edge1's start
    let c = at(0.0, 0.0);
    assert!(c == style.stripe_light || c == style.stripe_dark);
    assert_eq!(at(5.0, 0.5), style.lane_interior);
    assert_eq!(at(5.0, 4.0), style.drivable_area);
    assert_eq!(at(5.0, 2.0), style.white_paint);
    assert_eq!(at(0.0, 7.0), Rgb::BLACK);
    // stripes alternate every 0.3 m along y
    assert_eq!(at(0.0, -1.85), style.stripe_light);
    assert_eq!(at(0.0, -1.55), style.stripe_dark);
    assert_eq!(at(0.0, -1.25), style.stripe_light);
}

#[test]
fn implicit_boundary_is_red_and_paint_patterns_show() {
    let lane = straight_lane(1, p(-10.0, 0.0), p(10.0, 0.0), 4.0, DOUBLE_YELLOW, IMPLICIT);
    let map = build(vec![lane], vec![], vec![]);
    let style = RenderStyle::default();
    let img = render_map_bev(&map, &origin(), 400, 0.02, &style).unwrap();
    let geo = img.georef.unwrap();
    let at = |x: f64, y: f64| {
        let [c, r] = geo.to_pixel(p(x, y));
        img.get(c as usize, r as usize)
    };
    assert_eq!(at(1.0, -2.0), Rgb::RED);
    assert_eq!(at(1.0, 2.1), Rgb::YELLOW);
    assert_eq!(at(1.0, 1.9), Rgb::YELLOW);
    // gap between the two yellow lines
    assert_eq!(at(1.0, 2.0), style.lane_interior);
}

#[test]
fn dashed_line_has_gaps() {
    let dashed: Paint = (crate::map::LaneMarkType::Dashed, crate::map::LaneMarkColor::White);
    let lane = straight_lane(1, p(-10.0, 0.0), p(10.0, 0.0), 4.0, dashed, SOLID_WHITE);
    let map = build(vec![lane], vec![], vec![]);
    let img = render_map_bev(&map, &origin(), 1000, 0.02, &RenderStyle::default()).unwrap();
    let geo = img.georef.unwrap();
    let row = geo.to_pixel(p(0.0, 2.0))[1] as usize;
    let white = (0..1000).filter(|&c| img.get(c, row) == Rgb::WHITE).count();
    // lane starts at x=-10; within [-10,10] dashes are at -10+2.5k .. +1.5 (+0.05 caps)
    // visible window is [-10, 10): 8 dashes of 1.6 m = 12.8 m = 640 px
    assert!((white as i64 - 640).abs() <= 8, "{white}");
}

#[test]
fn bev_is_deterministic() {
    let lane = straight_lane(1, p(-10.0, 0.3), p(10.0, -2.0), 3.5, DOUBLE_YELLOW, IMPLICIT);
    let map = build(vec![lane], vec![crosswalk_across_y(1.0, 2.5, -4.0, 3.0)], vec![rect(-9.0, -6.0, 8.0, 6.0)]);
    let a = render_map_bev(&map, &origin(), 300, 0.05, &RenderStyle::default()).unwrap();
    let b = render_map_bev(&map, &origin(), 300, 0.05, &RenderStyle::default()).unwrap();
    assert_eq!(a.as_bytes(), b.as_bytes());
}

fn inside_by(poly: &Polygon2, q: Point2, margin: f64) -> bool {
    poly.contains(q) && poly.boundary_distance(q) > margin
}

fn outside_by(poly: &Polygon2, q: Point2, margin: f64) -> bool {
    !poly.contains(q) && poly.boundary_distance(q) > margin
}

/// Expected color at a pixel center from the layer order alone; `None`
/// where the pixel is too close to an edge to decide.
fn expected_color(map: &VectorMap, style: &RenderStyle, q: Point2, margin: f64) -> Option<Rgb> {
    let near_line = |l: &crate::geometry::Polyline3| {
        crate::geometry::point_to_polyline_distance(q, l) <= style.line_width + style.double_line_offset + margin
    };
    for c in &map.crossings {
        let poly = c.polygon().unwrap();
        if inside_by(&poly, q, margin) {
            return Some(Rgb([1, 1, 1]));
        }
        if !outside_by(&poly, q, margin) {
            return None;
        }
    }
    for lane in map.lanes.values() {
        if near_line(&lane.left.polyline) || near_line(&lane.right.polyline) {
            return None;
        }
        let poly = lane_polygon(lane).unwrap();
        if inside_by(&poly, q, margin) {
            return Some(style.lane_interior);
        }
        if !outside_by(&poly, q, margin) {
            return None;
        }
    }
    for a in &map.drivable_areas {
        if inside_by(&a.polygon, q, margin) {
            return Some(style.drivable_area);
        }
        if !outside_by(&a.polygon, q, margin) {
            return None;
        }
    }
    Some(Rgb::BLACK)
}

pub(crate) fn check_precedence(map: &VectorMap, size: usize, res: f64) -> std::result::Result<(), String> {
    let style = RenderStyle::default();
    let img = render_map_bev(map, &origin(), size, res, &style).map_err(|e| e.to_string())?;
    let geo = img.georef.unwrap();
    for r in 0..size {
        for c in 0..size {
            let q = geo.pixel_center(c, r);
            let got = img.get(c, r);
            match expected_color(map, &style, q, 1.5 * res) {
                None => {}
                Some(Rgb([1, 1, 1])) => {
                    if got != style.stripe_light && got != style.stripe_dark {
                        return Err(format!("pixel ({c},{r}) at {q:?}: {got:?}, expected a stripe color"));
                    }
                }
                Some(e) if e != got => return Err(format!("pixel ({c},{r}) at {q:?}: {got:?}, expected {e:?}")),
                Some(_) => {}
            }
        }
    }
    // every pixel center on an implicit boundary outside crosswalks is red
    for lane in map.lanes.values() {
        for b in [&lane.left, &lane.right] {
            if b.is_painted() {
                continue;
            }
            for r in 0..size {
                for c in 0..size {
                    let q = geo.pixel_center(c, r);
                    let on_line = crate::geometry::point_to_polyline_distance(q, &b.polyline) < 0.3 * style.line_width;
                    let in_crossing = map.crossings.iter().any(|x| !outside_by(&x.polygon().unwrap(), q, res));
                    let on_painted = map.lanes.values().flat_map(|l| [&l.left, &l.right]).any(|o| {
                        o.is_painted()
                            && crate::geometry::point_to_polyline_distance(q, &o.polyline)
                                <= style.line_width + style.double_line_offset + res
                    });
                    if on_line && !in_crossing && !on_painted && img.get(c, r) != Rgb::RED {
                        return Err(format!("implicit boundary pixel ({c},{r}) is {:?}", img.get(c, r)));
                    }
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn random_layers(
    area: (f64, f64, f64, f64),
    lane: (f64, f64, f64, f64),
    cw: (f64, f64, f64),
    paints: (usize, usize),
) -> VectorMap {
    let palette = [SOLID_WHITE, IMPLICIT, DOUBLE_YELLOW];
    let (ax, ay, aw, ah) = area;
    let (lx0, ly, llen, lw) = lane;
    let (cx, cwid, clen) = cw;
    let l = straight_lane(1, p(lx0, ly), p(lx0 + llen, ly), lw, palette[paints.0], palette[paints.1]);
    let c = crosswalk_across_y(cx, cwid, ly - clen / 2.0, ly + clen / 2.0);
    build(vec![l], vec![c], vec![rect(ax, ay, ax + aw, ay + ah)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn topmost_layer_wins(
        area in (-6.0..0.0f64, -6.0..0.0f64, 2.0..8.0f64, 2.0..8.0f64),
        lane in (-6.0..0.0f64, -3.0..3.0f64, 2.0..8.0f64, 1.0..4.0f64),
        cw in (-3.0..3.0f64, 0.5..3.0f64, 1.0..6.0f64),
        paints in (0usize..3, 0usize..3),
    ) {
        let map = random_layers(area, lane, cw, paints);
        prop_assert_eq!(check_precedence(&map, 160, 0.05), Ok(()));
    }

    #[test]
    fn bev_translation_equivariance(tx in -200i32..200, ty in -200i32..200, yl in -2.0..2.0f64, xc in -2.0..2.0f64) {
        let make = |dx: f64, dy: f64| {
            let lane = straight_lane(1, p(-8.0 + dx, yl + dy), p(8.0 + dx, yl + 1.0 + dy), 3.0, DOUBLE_YELLOW, IMPLICIT);
            let cw = crosswalk_across_y(xc + dx, 2.0, -3.0 + dy, 3.0 + dy);
            let ground = flat_ground(Aabb2::around(p(dx, dy), 30.0), 5.0);
            let m = VectorMap::new(vec![lane], vec![cw], vec![DrivableArea { polygon: rect(-5.0 + dx, -5.0 + dy, 5.0 + dx, 5.0 + dy) }], ground).unwrap();
            let ego = SE3Pose::from_translation(Point3::new(dx, dy, 0.0));
            render_map_bev(&m, &ego, 128, 0.0625, &RenderStyle::default()).unwrap()
        };
        let a = make(0.0, 0.0);
        let b = make(tx as f64 * 0.5, ty as f64 * 0.5);
        let diff = a.as_bytes().chunks(3).zip(b.as_bytes().chunks(3)).filter(|(x, y)| x != y).count();
        prop_assert_eq!(diff, 0);
    }
}

fn test_camera() -> CameraModel {
    CameraModel::mounted(64, 48, 32.0, Point3::new(0.0, 0.0, 1.6), 0.0, 0.0).unwrap()
}

#[test]
fn mounted_camera_axes() {
    let cam = test_camera();
    let ego = origin();
    let from_city = cam.camera_from_city(&ego);
    // a point 10 m ahead on the ground projects below the image center
    let q = from_city.transform_point(Point3::new(10.0, 0.0, 0.0));
    assert!((q.z - 10.0).abs() < 1e-12 && q.x.abs() < 1e-12 && (q.y - 1.6).abs() < 1e-12);
    let uv = cam.project(q).unwrap();
    assert!((uv[0] - 32.0).abs() < 1e-9 && (uv[1] - (24.0 + 32.0 * 0.16)).abs() < 1e-9);
    // left of the vehicle is left in the image
    let q = from_city.transform_point(Point3::new(10.0, 2.0, 1.6));
    assert!(cam.project(q).unwrap()[0] < 32.0);
    assert!(cam.project(Point3::new(0.0, 0.0, -1.0)).is_none());
    assert!(CameraModel::new(-1.0, 1.0, 0.0, 0.0, 4, 4, SE3Pose::identity()).is_err());
    assert!(CameraModel::new(1.0, 1.0, 9.0, 0.0, 4, 4, SE3Pose::identity()).is_err());
}

#[test]
fn depth_from_three_equal_points() {
    let cam = test_camera();
    let d = interpolate_depth_map(&[[10.0, 10.0, 7.0], [50.0, 12.0, 7.0], [30.0, 40.0, 7.0]], &cam);
    assert!(d.finite_count() > 300);
    for r in 0..48 {
        for c in 0..64 {
            let v = d.get(c, r);
            assert!((v - 7.0).abs() < 1e-12 || v.is_infinite());
        }
    }
    assert!(d.get(0, 0).is_infinite());
    assert!((d.get(30, 20) - 7.0).abs() < 1e-12);
}

#[test]
fn depth_recovers_a_plane() {
    let cam = test_camera();
    let plane = |u: f64, v: f64| 3.0 + 0.25 * u - 0.1 * v;
    let mut pts = Vec::new();
    let mut s = 12345u64;
    for _ in 0..60 {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = (s >> 11) as f64 / (1u64 << 53) as f64 * 64.0;
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let v = (s >> 11) as f64 / (1u64 << 53) as f64 * 48.0;
        pts.push([u, v, plane(u, v)]);
    }
    let d = interpolate_depth_map(&pts, &cam);
    assert!(d.finite_count() > 1000);
    for r in 0..48 {
        for c in 0..64 {
            let v = d.get(c, r);
            if v.is_finite() {
                assert!((v - plane(c as f64 + 0.5, r as f64 + 0.5)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn degenerate_depth_input_is_all_infinite() {
    let cam = test_camera();
    assert_eq!(interpolate_depth_map(&[], &cam).finite_count(), 0);
    assert_eq!(interpolate_depth_map(&[[1.0, 1.0, 2.0], [5.0, 5.0, 2.0]], &cam).finite_count(), 0);
    let collinear = [[1.0, 1.0, 2.0], [5.0, 5.0, 2.0], [9.0, 9.0, 2.0], [20.0, 20.0, 1.0]];
    assert_eq!(interpolate_depth_map(&collinear, &cam).finite_count(), 0);
}

#[test]
fn occlusion_tolerance() {
    let cam = test_camera();
    let ego = origin();
    let wall = DepthMap::constant(64, 48, 5.0);
    let at = |depth: f64| Point3::new(depth, 0.0, 1.6);
    let pts = [at(10.0), at(5.3), at(5.49), at(5.51), at(4.0), at(-3.0)];
    assert_eq!(occlusion_filter(&pts, &cam, &ego, &wall), vec![false, true, true, false, true, false]);
    let open = DepthMap::infinite(64, 48);
    let off_image = Point3::new(1.0, 30.0, 1.6);
    assert_eq!(
        occlusion_filter(&[at(10.0), at(1000.0), off_image], &cam, &ego, &open),
        vec![true, true, false]
    );
}

fn stripe_pixels(img: &RasterImage) -> usize {
    let s = RenderStyle::default();
    img.count(s.stripe_light) + img.count(s.stripe_dark)
}

#[test]
fn egoview_lane_ahead() {
    let lane = straight_lane(1, p(-10.0, 0.0), p(50.0, 0.0), 3.5, SOLID_WHITE, SOLID_WHITE);
    let map = build(vec![lane], vec![], vec![]);
    let cam = test_camera();
    let img = render_map_egoview(&map, &cam, &origin(), &DepthMap::infinite(64, 48), &RenderStyle::default());
    for r in 25..48 {
        assert_ne!(img.get(32, r), Rgb::BLACK, "row {r}");
    }
    for r in 0..24 {
        assert_eq!(img.get(32, r), Rgb::BLACK, "row {r}");
    }
    assert!(img.count(Rgb::WHITE) > 0);
}

#[test]
fn egoview_occluded_crosswalk() {
    let cw = crosswalk_across_y(10.0, 3.0, -5.0, 5.0);
    let map = build(vec![], vec![cw], vec![]);
    let cam = test_camera();
    let style = RenderStyle::default();
    let hidden = render_map_egoview(&map, &cam, &origin(), &DepthMap::constant(64, 48, 5.0), &style);
    assert_eq!(stripe_pixels(&hidden), 0);
    let open = render_map_egoview(&map, &cam, &origin(), &DepthMap::infinite(64, 48), &style);
    assert!(stripe_pixels(&open) > 20);
    // looking backwards sees nothing
    let back = SE3Pose::from_yaw(Point3::new(0.0, 0.0, 0.0), std::f64::consts::PI);
    let none = render_map_egoview(&map, &cam, &back, &DepthMap::infinite(64, 48), &style);
    assert_eq!(none.count(Rgb::BLACK), 64 * 48);
}

#[test]
fn egoview_is_deterministic() {
    let lane = straight_lane(1, p(-10.0, 0.0), p(50.0, 3.0), 3.5, DOUBLE_YELLOW, IMPLICIT);
    let map = build(vec![lane], vec![crosswalk_across_y(12.0, 3.0, -3.0, 4.0)], vec![rect(-10.0, -8.0, 29.0, 8.0)]);
    let cam = test_camera();
    let d = DepthMap::infinite(64, 48);
    let a = render_map_egoview(&map, &cam, &origin(), &d, &RenderStyle::default());
    let b = render_map_egoview(&map, &cam, &origin(), &d, &RenderStyle::default());
    assert_eq!(a.as_bytes(), b.as_bytes());
}
