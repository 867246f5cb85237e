//! Synthesis of parametric roundabout and rural road maps.

use std::f64::consts::TAU;

use super::shapes::{Polygon, Polyline, Vec2};
use super::{Boundary, BoundaryKind, GeomError, Lane, LimitClass, RoadMap};

/// Geometric queries sample polylines at most this far apart (metres).
pub const SAMPLE_SPACING: f64 = 0.5;

/// Parameters of a synthetic single-lane roundabout.
#[derive(Debug, Clone)]
pub struct RoundaboutParams {
    pub ring_radius: f64,
    pub arm_count: usize,
    pub arm_length: f64,
    pub lane_width: f64,
    /// Heading of each arm as seen from the ring centre; length must equal `arm_count`.
    pub arm_headings: Vec<f64>,
}

impl RoundaboutParams {
    pub fn symmetric(arm_count: usize, ring_radius: f64, arm_length: f64, lane_width: f64) -> Self {
        let arm_headings = (0..arm_count)
            .map(|i| i as f64 * TAU / arm_count as f64)
            .collect();
        RoundaboutParams {
            ring_radius,
            arm_count,
            arm_length,
            lane_width,
            arm_headings,
        }
    }

    fn validate(&self) -> Result<(), GeomError> {
        if !(3..=4).contains(&self.arm_count) {
            return Err(GeomError::InvalidParams(format!(
                "arm_count must be 3 or 4, got {}",
                self.arm_count
            )));
        }
        if self.ring_radius <= self.lane_width {
            return Err(GeomError::InvalidParams(
                "ring_radius must exceed lane_width".into(),
            ));
        }
        if self.arm_headings.len() != self.arm_count {
            return Err(GeomError::InvalidParams(
                "arm_headings length must equal arm_count".into(),
            ));
        }
        if self.arm_length <= 2.0 * self.ring_radius {
            return Err(GeomError::InvalidParams(
                "arm_length must exceed ring diameter".into(),
            ));
        }
        if self.lane_width <= 0.0 {
            return Err(GeomError::InvalidParams("lane_width must be positive".into()));
        }
        Ok(())
    }
}

/// Build a single-lane roundabout: one circulating ring lane plus an entry and
/// an exit lane per arm. Entry lanes yield to the ring. Deterministic for
/// equal params.
pub fn synthesize_roundabout(params: &RoundaboutParams) -> Result<RoadMap, GeomError> {
    params.validate()?;
    let r = params.ring_radius;
    let w = params.lane_width;
    let half = w / 2.0;

    // Circulating lane, counterclockwise, closed (last point = first point).
    // s = 0 at angle 0.
    let ring_samples = ((TAU * r) / SAMPLE_SPACING).ceil() as usize;
    let ring_pts: Vec<Vec2> = (0..=ring_samples)
        .map(|i| {
            let a = i as f64 / ring_samples as f64 * TAU;
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    let ring = Lane {
        id: "ring".into(),
        centreline: Polyline::new(ring_pts),
        width: w,
        successors: vec!["ring".into()],
        yield_to: vec![],
        limit_class: LimitClass::Low,
        closed_loop: true,
    };

    let mut lanes = vec![ring];
    let mut boundaries = Vec::new();
    let mut drivable = Vec::new();

    // Ring band as drivable surface; the central island is not drivable.
    let ring_outer = r + half;
    let ring_inner = (r - half).max(0.5);
    // slit at an off-grid angle so only measure-zero points touch it
    let slit_angle = params.arm_headings[0] + 0.373;
    drivable.push(annulus_polygon(ring_outer, ring_inner, ring_samples, slit_angle));
    // Central island boundary (solid).
    boundaries.push(Boundary {
        kind: BoundaryKind::Solid,
        line: circle_polyline(ring_inner, ring_samples),
    });

    for (i, &heading) in params.arm_headings.iter().enumerate() {
        let dir = Vec2::from_heading(heading);
        let side = dir.perp_left();
        // Arm runs from the ring edge outward to arm_length from centre.
        // Right-hand traffic into a counterclockwise ring: the entering driver
        // keeps right of the arm axis (the +side half-plane); the exit lane
        // takes the other half. Near the ring both lanes bend into blend
        // curves that meet the circulating lane tangentially.
        let blend_start_r = r + BLEND_LENGTH;
        let outer = params.arm_length;

        // merge point a little counterclockwise of the arm, branch point a
        // little clockwise, so entry and exit do not fight over one spot
        let merge_angle = heading + (half + 0.05) / r + BLEND_SWEEP;
        let branch_angle = heading - (half + 0.05) / r - BLEND_SWEEP;

        let entry_offset = side * (half + 0.05);
        let entry_straight_from = dir * outer + entry_offset;
        let entry_straight_to = dir * blend_start_r + entry_offset;
        let merge_point = Vec2::from_heading(merge_angle) * r;
        let merge_tangent = Vec2::from_heading(merge_angle).perp_left(); // ccw flow
        let entry_blend = blend_curve(
            entry_straight_to,
            -dir,
            merge_point,
            merge_tangent,
        );
        let mut entry_pts = line_samples(entry_straight_from, entry_straight_to);
        entry_pts.extend(entry_blend.iter().skip(1));
        let entry = Lane {
            id: format!("entry{i}"),
            centreline: Polyline::new(entry_pts).resampled(SAMPLE_SPACING),
            width: w,
            successors: vec!["ring".into()],
            yield_to: vec!["ring".into()],
            limit_class: LimitClass::Mid,
            closed_loop: false,
        };

        let exit_offset = side * (-half - 0.05);
        let exit_straight_from = dir * blend_start_r + exit_offset;
        let exit_straight_to = dir * outer + exit_offset;
        let branch_point = Vec2::from_heading(branch_angle) * r;
        let branch_tangent = Vec2::from_heading(branch_angle).perp_left();
        let exit_blend = blend_curve(branch_point, branch_tangent, exit_straight_from, dir);
        let mut exit_pts = exit_blend;
        exit_pts.extend(line_samples(exit_straight_from, exit_straight_to).into_iter().skip(1));
        let exit = Lane {
            id: format!("exit{i}"),
            centreline: Polyline::new(exit_pts).resampled(SAMPLE_SPACING),
            width: w,
            successors: vec![],
            yield_to: vec![],
            limit_class: LimitClass::Mid,
            closed_loop: false,
        };

        // Drivable coverage: the straight strip plus ribbons around both
        // blend curves, all overlapping the ring band.
        drivable.push(strip_polygon(
            dir * (r - 1.0),
            dir * (outer + 0.5),
            2.0 * w + 0.2,
        ));
        drivable.push(ribbon_polygon(&entry.centreline, w / 2.0 + 0.6));
        drivable.push(ribbon_polygon(&exit.centreline, w / 2.0 + 0.6));

        lanes.push(entry);
        lanes.push(exit);

        // Arm boundaries: solid outer edges, broken centre line.
        let a0 = dir * blend_start_r;
        let a1 = dir * outer;
        let b_left = Polyline::new(vec![a0 + side * (w + 0.1), a1 + side * (w + 0.1)]);
        let b_right = Polyline::new(vec![a0 - side * (w + 0.1), a1 - side * (w + 0.1)]);
        let b_centre = Polyline::new(vec![a0, a1]);
        boundaries.push(Boundary {
            kind: BoundaryKind::Solid,
            line: b_left,
        });
        boundaries.push(Boundary {
            kind: BoundaryKind::Solid,
            line: b_right,
        });
        boundaries.push(Boundary {
            kind: BoundaryKind::Broken,
            line: b_centre,
        });
    }

    // Ring successors: each entry joins the ring; the ring connects to every exit.
    let exit_ids: Vec<String> = (0..params.arm_count).map(|i| format!("exit{i}")).collect();
    lanes[0].successors.extend(exit_ids);

    // Speed zones: low near the ring, mid on the outer arms.
    let near_r = r + 0.35 * (params.arm_length - r);
    let (lo, hi) = map_extent(params);
    let speed_zones = vec![
        (disc_polygon(near_r, ring_samples), LimitClass::Low),
        (
            Polygon::new(vec![
                Vec2::new(lo.x, lo.y),
                Vec2::new(hi.x, lo.y),
                Vec2::new(hi.x, hi.y),
                Vec2::new(lo.x, hi.y),
            ]),
            LimitClass::Mid,
        ),
    ];

    let id = format!(
        "roundabout-a{}-r{:.1}-l{:.1}-w{:.1}",
        params.arm_count, params.ring_radius, params.arm_length, params.lane_width
    );
    Ok(RoadMap::new(id, lanes, boundaries, drivable, speed_zones))
}

fn map_extent(params: &RoundaboutParams) -> (Vec2, Vec2) {
    let e = params.arm_length + 2.0 * params.lane_width;
    (Vec2::new(-e, -e), Vec2::new(e, e))
}

/// Radial length of the blend curve region in front of the ring.
const BLEND_LENGTH: f64 = 7.0;
/// Extra ring angle the merge/branch points sit away from the arm axis.
const BLEND_SWEEP: f64 = 0.30;

fn line_samples(from: Vec2, to: Vec2) -> Vec<Vec2> {
    let n = (from.dist(to) / SAMPLE_SPACING).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| from + (to - from) * (i as f64 / n as f64))
        .collect()
}

/// Quadratic Bezier that leaves `p0` along `t0` and arrives at `p2` along
/// `t2` (unit tangents). The control point is the intersection of the two
/// tangent lines, with a midpoint fallback for near-parallel tangents.
fn blend_curve(p0: Vec2, t0: Vec2, p2: Vec2, t2: Vec2) -> Vec<Vec2> {
    let control = line_intersection(p0, t0, p2, t2).unwrap_or((p0 + p2) * 0.5);
    let n = ((p0.dist(control) + control.dist(p2)) / SAMPLE_SPACING).ceil().max(4.0) as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let u = 1.0 - t;
            p0 * (u * u) + control * (2.0 * u * t) + p2 * (t * t)
        })
        .collect()
}

fn line_intersection(p: Vec2, d1: Vec2, q: Vec2, d2: Vec2) -> Option<Vec2> {
    let denom = d1.cross(d2);
    if denom.abs() < 1e-9 {
        return None;
    }
    let t = (q - p).cross(d2) / denom;
    Some(p + d1 * t)
}

/// Drivable ribbon around a polyline.
fn ribbon_polygon(line: &Polyline, half_width: f64) -> Polygon {
    let left = line.offset(half_width);
    let right = line.offset(-half_width);
    let mut verts = left.points().to_vec();
    let mut right_rev = right.points().to_vec();
    right_rev.reverse();
    verts.extend(right_rev);
    Polygon::new(verts)
}

fn circle_polyline(radius: f64, samples: usize) -> Polyline {
    let pts = (0..=samples)
        .map(|i| {
            let a = i as f64 / samples as f64 * TAU;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    Polyline::new(pts)
}

fn disc_polygon(radius: f64, samples: usize) -> Polygon {
    let pts = (0..samples)
        .map(|i| {
            let a = i as f64 / samples as f64 * TAU;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    Polygon::new(pts)
}

/// Annulus as a keyhole polygon: outer circle counterclockwise, a radial slit
/// at `slit_angle`, inner circle clockwise. Even-odd containment then treats
/// the island as outside; the coincident slit edges cancel in parity.
fn annulus_polygon(outer: f64, inner: f64, samples: usize, slit_angle: f64) -> Polygon {
    let mut pts = Vec::with_capacity(2 * samples + 2);
    for i in 0..=samples {
        let a = slit_angle + i as f64 / samples as f64 * TAU;
        pts.push(Vec2::new(outer * a.cos(), outer * a.sin()));
    }
    for i in 0..=samples {
        let a = slit_angle + TAU - i as f64 / samples as f64 * TAU;
        pts.push(Vec2::new(inner * a.cos(), inner * a.sin()));
    }
    Polygon::new(pts)
}

fn strip_polygon(a: Vec2, b: Vec2, width: f64) -> Polygon {
    let side = (b - a).normalized().perp_left() * (width / 2.0);
    Polygon::new(vec![a + side, b + side, b - side, a - side])
}

/// Build a bidirectional rural road from a curvature profile.
///
/// The profile lists curvature values (1/m) at equally spaced stations along
/// the road; headings are integrated from them. Solid outer boundaries,
/// broken centre line, high speed limit.
pub fn synthesize_rural_road(length: f64, curvature_profile: &[f64]) -> Result<RoadMap, GeomError> {
    if length <= 0.0 {
        return Err(GeomError::InvalidParams("length must be positive".into()));
    }
    let w = 3.5;
    let half = w / 2.0;
    let n = (length / SAMPLE_SPACING).ceil() as usize;
    let step = length / n as f64;

    // integrate the curvature profile along the reference line
    let mut centre_pts = Vec::with_capacity(n + 1);
    let mut pos = Vec2::ZERO;
    let mut heading = 0.0_f64;
    centre_pts.push(pos);
    for i in 0..n {
        let s = (i as f64 + 0.5) * step;
        let kappa = sample_profile(curvature_profile, s / length);
        heading += kappa * step;
        pos = pos + Vec2::from_heading(heading) * step;
        centre_pts.push(pos);
    }
    let centre = Polyline::new(centre_pts);

    let fwd_cl = centre.offset(-half);
    let bwd_cl = centre.offset(half).reversed();
    let lanes = vec![
        Lane {
            id: "fwd".into(),
            centreline: fwd_cl,
            width: w,
            successors: vec![],
            yield_to: vec![],
            limit_class: LimitClass::High,
            closed_loop: false,
        },
        Lane {
            id: "bwd".into(),
            centreline: bwd_cl,
            width: w,
            successors: vec![],
            yield_to: vec![],
            limit_class: LimitClass::High,
            closed_loop: false,
        },
    ];

    let boundaries = vec![
        Boundary {
            kind: BoundaryKind::Solid,
            line: centre.offset(w + 0.1),
        },
        Boundary {
            kind: BoundaryKind::Solid,
            line: centre.offset(-w - 0.1),
        },
        Boundary {
            kind: BoundaryKind::Broken,
            line: centre.clone(),
        },
    ];

    // drivable ribbon around the centre line
    let left = centre.offset(w);
    let right = centre.offset(-w);
    let mut verts = left.points().to_vec();
    let mut right_rev = right.points().to_vec();
    right_rev.reverse();
    verts.extend(right_rev);
    let ribbon = Polygon::new(verts);
    let (lo, hi) = ribbon.bbox();
    let speed_zones = vec![(
        Polygon::new(vec![
            Vec2::new(lo.x - 5.0, lo.y - 5.0),
            Vec2::new(hi.x + 5.0, lo.y - 5.0),
            Vec2::new(hi.x + 5.0, hi.y + 5.0),
            Vec2::new(lo.x - 5.0, hi.y + 5.0),
        ]),
        LimitClass::High,
    )];

    let id = format!("rural-{length:.0}");
    Ok(RoadMap::new(
        id,
        lanes,
        boundaries,
        vec![ribbon],
        speed_zones,
    ))
}

fn sample_profile(profile: &[f64], frac: f64) -> f64 {
    if profile.is_empty() {
        return 0.0;
    }
    if profile.len() == 1 {
        return profile[0];
    }
    let x = frac.clamp(0.0, 1.0) * (profile.len() - 1) as f64;
    let i = (x.floor() as usize).min(profile.len() - 2);
    let t = x - i as f64;
    profile[i] * (1.0 - t) + profile[i + 1] * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn four_arm_roundabout_structure() {
        let p = RoundaboutParams::symmetric(4, 15.0, 60.0, 3.5);
        let map = synthesize_roundabout(&p).unwrap();
        let entries: Vec<_> = map.lanes.iter().filter(|l| l.id.starts_with("entry")).collect();
        let exits: Vec<_> = map.lanes.iter().filter(|l| l.id.starts_with("exit")).collect();
        assert_eq!(entries.len(), 4);
        assert_eq!(exits.len(), 4);
        assert_eq!(map.lanes.iter().filter(|l| l.id == "ring").count(), 1);
        for e in &entries {
            assert_eq!(e.yield_to, vec!["ring".to_string()]);
        }
    }

    #[test]
    fn three_arm_yield_graph() {
        let p = RoundaboutParams::symmetric(3, 14.0, 50.0, 3.5);
        let map = synthesize_roundabout(&p).unwrap();
        let yield_edges: usize = map.lanes.iter().map(|l| l.yield_to.len()).sum();
        assert_eq!(yield_edges, 3);
    }

    #[test]
    fn centreline_points_inside_drivable() {
        let p = RoundaboutParams::symmetric(4, 15.0, 60.0, 3.5);
        let map = synthesize_roundabout(&p).unwrap();
        for lane in &map.lanes {
            let cl = &lane.centreline;
            let mut s = 0.0;
            while s <= cl.length() {
                let pt = cl.point_at(s);
                assert!(
                    map.is_drivable(pt),
                    "lane {} point at s={s} ({pt:?}) not drivable",
                    lane.id
                );
                s += 1.0;
            }
        }
    }

    #[test]
    fn rural_straight_road_shape() {
        let map = synthesize_rural_road(500.0, &[0.0]).unwrap();
        assert_eq!(map.lanes.len(), 2);
        assert_eq!(map.boundaries.len(), 3);
        let solid = map
            .boundaries
            .iter()
            .filter(|b| b.kind == BoundaryKind::Solid)
            .count();
        assert_eq!(solid, 2);
        // zero curvature -> collinear centreline
        let lane = map.lane("fwd").unwrap();
        for p in lane.centreline.points() {
            assert!((p.y - lane.centreline.first().y).abs() < 1e-9);
        }
    }

    #[test]
    fn rural_sinusoidal_heading_matches_integral() {
        // heading oracle: numerically integrate the curvature profile
        let profile: Vec<f64> = (0..101)
            .map(|i| 0.004 * (i as f64 / 100.0 * PI * 2.0).sin())
            .collect();
        let length = 400.0;
        let map = synthesize_rural_road(length, &profile).unwrap();
        let lane = map.lane("fwd").unwrap();

        // independent fine integration of the same profile
        let fine_n = 40_000;
        let step = length / fine_n as f64;
        let mut heading = 0.0;
        let mut oracle_heading_at_end = 0.0;
        for i in 0..fine_n {
            let s = (i as f64 + 0.5) * step;
            heading += sample_profile(&profile, s / length) * step;
            if i == fine_n - 1 {
                oracle_heading_at_end = heading;
            }
        }
        let got = lane.centreline.heading_at(lane.centreline.length() - 1.0);
        assert!(
            (got - oracle_heading_at_end).abs() < 0.02,
            "heading mismatch: got {got}, oracle {oracle_heading_at_end}"
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let p = RoundaboutParams::symmetric(5, 15.0, 60.0, 3.5);
        assert!(synthesize_roundabout(&p).is_err());
        let p = RoundaboutParams::symmetric(4, 2.0, 60.0, 3.5);
        assert!(synthesize_roundabout(&p).is_err());
        assert!(synthesize_rural_road(-1.0, &[0.0]).is_err());
    }
}
