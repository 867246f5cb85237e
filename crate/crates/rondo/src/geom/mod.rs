//! Parametric synthetic road maps (roundabouts, rural roads), geometric
//! queries, and route representation.
//!
//! Maps are immutable after construction and safe to share across threads.

mod shapes;
mod synth;

pub mod io;

pub use shapes::{normalize_angle, segment_distance, Polygon, Polyline, Vec2};
pub use synth::{synthesize_roundabout, synthesize_rural_road, RoundaboutParams};

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("invalid map parameters: {0}")]
    InvalidParams(String),
    #[error("unknown lane id `{0}`")]
    UnknownLane(String),
    #[error("route lanes `{0}` and `{1}` are not connected")]
    DisconnectedRoute(String, String),
}

/// Speed-limit class. The absolute values only drive the expert's set speed;
/// the classes are what the raster encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitClass {
    Low,
    Mid,
    High,
}

impl LimitClass {
    /// Set speed for the class in m/s ({30, 50, 70} km/h).
    pub fn speed(self) -> f64 {
        match self {
            LimitClass::Low => 30.0 / 3.6,
            LimitClass::Mid => 50.0 / 3.6,
            LimitClass::High => 70.0 / 3.6,
        }
    }

    pub fn index(self) -> usize {
        match self {
            LimitClass::Low => 0,
            LimitClass::Mid => 1,
            LimitClass::High => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<LimitClass> {
        match i {
            0 => Some(LimitClass::Low),
            1 => Some(LimitClass::Mid),
            2 => Some(LimitClass::High),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Solid,
    Broken,
}

#[derive(Debug, Clone)]
pub struct Boundary {
    pub kind: BoundaryKind,
    pub line: Polyline,
}

#[derive(Debug, Clone)]
pub struct Lane {
    pub id: String,
    pub centreline: Polyline,
    pub width: f64,
    pub successors: Vec<String>,
    /// Conflicting priority lanes this lane must yield to before merging.
    pub yield_to: Vec<String>,
    pub limit_class: LimitClass,
    /// Set for closed circulating lanes whose last point equals the first.
    pub closed_loop: bool,
}

/// A navigation route: ordered lane ids plus the goal arc length on the final lane.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub lane_sequence: Vec<String>,
    pub goal_s: f64,
}

/// The static world: lanes, boundaries, drivable polygons, and speed zones.
#[derive(Debug, Clone)]
pub struct RoadMap {
    pub id: String,
    pub lanes: Vec<Lane>,
    pub boundaries: Vec<Boundary>,
    pub drivable: Vec<Polygon>,
    pub speed_zones: Vec<(Polygon, LimitClass)>,
    lane_index: HashMap<String, usize>,
}

impl RoadMap {
    pub fn new(
        id: String,
        lanes: Vec<Lane>,
        boundaries: Vec<Boundary>,
        drivable: Vec<Polygon>,
        speed_zones: Vec<(Polygon, LimitClass)>,
    ) -> Self {
        let lane_index = lanes
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.clone(), i))
            .collect();
        RoadMap {
            id,
            lanes,
            boundaries,
            drivable,
            speed_zones,
            lane_index,
        }
    }

    pub fn lane(&self, id: &str) -> Option<&Lane> {
        self.lane_index.get(id).map(|&i| &self.lanes[i])
    }

    /// Project a point onto a lane centreline.
    ///
    /// Returns `(s, d)` with `s` clamped to `[0, lane length]` and `d`
    /// positive to the left of the travel direction.
    pub fn project_to_lane(&self, lane_id: &str, p: Vec2) -> Option<(f64, f64)> {
        self.lane(lane_id).map(|l| l.centreline.project(p))
    }

    pub fn is_drivable(&self, p: Vec2) -> bool {
        self.drivable.iter().any(|poly| poly.contains(p))
    }

    /// Euclidean distance to the nearest drivable polygon, 0 inside any.
    pub fn distance_to_drivable(&self, p: Vec2) -> f64 {
        if self.is_drivable(p) {
            return 0.0;
        }
        self.drivable
            .iter()
            .map(|poly| poly.boundary_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn limit_class_at(&self, p: Vec2) -> Option<LimitClass> {
        self.speed_zones
            .iter()
            .find(|(poly, _)| poly.contains(p))
            .map(|&(_, c)| c)
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for poly in &self.drivable {
            let (l, h) = poly.bbox();
            lo.x = lo.x.min(l.x);
            lo.y = lo.y.min(l.y);
            hi.x = hi.x.max(h.x);
            hi.y = hi.y.max(h.y);
        }
        (lo, hi)
    }

    /// Lanes whose ids the given lane must yield to, resolved to indices.
    pub fn yield_targets(&self, lane_id: &str) -> Vec<&Lane> {
        self.lane(lane_id)
            .map(|l| {
                l.yield_to
                    .iter()
                    .filter_map(|id| self.lane(id))
                    .collect::<Vec<_>>()
            })
            .unwrap_or_default()
    }

    /// Build the concatenated centreline path for a route.
    pub fn route_path(&self, route: &Route) -> Result<RoutePath, GeomError> {
        RoutePath::build(self, route, None)
    }

    /// Like [`route_path`](Self::route_path), but when the route starts on a
    /// circulating lane the loop is cut at the agent's spawn position instead
    /// of the lane's seam.
    pub fn route_path_from(
        &self,
        route: &Route,
        spawn_hint: Option<Vec2>,
    ) -> Result<RoutePath, GeomError> {
        RoutePath::build(self, route, spawn_hint)
    }

    /// Check that consecutive route lanes are connected via successors.
    pub fn validate_route(&self, route: &Route) -> Result<(), GeomError> {
        for w in route.lane_sequence.windows(2) {
            let a = self
                .lane(&w[0])
                .ok_or_else(|| GeomError::UnknownLane(w[0].clone()))?;
            if !a.successors.contains(&w[1]) {
                return Err(GeomError::DisconnectedRoute(w[0].clone(), w[1].clone()));
            }
        }
        match route.lane_sequence.last() {
            Some(last) if self.lane(last).is_some() => Ok(()),
            Some(last) => Err(GeomError::UnknownLane(last.clone())),
            None => Err(GeomError::InvalidParams("empty route".into())),
        }
    }
}

/// A route resolved into a single concatenated polyline with per-lane segments.
///
/// Circulating lanes are trimmed between the join point after the predecessor
/// and the join point before the successor (wrapping where needed), so the
/// path is an ordinary open polyline that agents can be projected onto.
#[derive(Debug, Clone)]
pub struct RoutePath {
    path: Polyline,
    /// (lane id, start s on path, end s on path, offset of path-start within the lane)
    segments: Vec<RouteSegment>,
    lane_width: f64,
}

#[derive(Debug, Clone)]
struct RouteSegment {
    lane_id: String,
    path_start: f64,
    path_end: f64,
}

impl RoutePath {
    fn build(
        map: &RoadMap,
        route: &Route,
        spawn_hint: Option<Vec2>,
    ) -> Result<RoutePath, GeomError> {
        map.validate_route(route)?;
        let mut pieces: Vec<(String, Polyline)> = Vec::new();
        let n = route.lane_sequence.len();
        let mut min_width = f64::INFINITY;
        for (k, id) in route.lane_sequence.iter().enumerate() {
            let lane = map
                .lane(id)
                .ok_or_else(|| GeomError::UnknownLane(id.clone()))?;
            min_width = min_width.min(lane.width);
            let cl = &lane.centreline;
            let piece = if lane.closed_loop {
                // trim the loop between the predecessor's end and the successor's start
                let entry_point = if k > 0 {
                    map.lane(&route.lane_sequence[k - 1]).unwrap().centreline.last()
                } else if let Some(hint) = spawn_hint {
                    hint
                } else {
                    cl.first()
                };
                let exit_point = if k + 1 < n {
                    map.lane(&route.lane_sequence[k + 1]).unwrap().centreline.first()
                } else {
                    cl.point_at(route.goal_s)
                };
                let (s_in, _) = cl.project(entry_point);
                let (s_out, _) = cl.project(exit_point);
                if s_out > s_in + 1e-6 {
                    cl.slice(s_in, s_out)
                } else {
                    // wraps past the loop seam
                    let a = cl.slice(s_in, cl.length());
                    let b = cl.slice(0.0, s_out);
                    let mut pts = a.points().to_vec();
                    pts.extend_from_slice(&b.points()[1..]);
                    Polyline::new(pts)
                }
            } else if k + 1 == n {
                cl.slice(0.0, route.goal_s.min(cl.length()))
            } else {
                cl.clone()
            };
            pieces.push((id.clone(), piece));
        }

        let mut pts: Vec<Vec2> = Vec::new();
        let mut segments = Vec::new();
        let mut acc = 0.0;
        for (id, piece) in pieces {
            let start = acc;
            let piece_pts = piece.points();
            let mut skip = 0;
            if let Some(&last) = pts.last() {
                let gap = last.dist(piece_pts[0]);
                if gap < 1e-6 {
                    skip = 1; // coincident join
                } else {
                    // jump discontinuities between lane ends are bridged linearly
                    acc += gap;
                }
            }
            for w in piece_pts.windows(2) {
                acc += w[0].dist(w[1]);
            }
            pts.extend_from_slice(&piece_pts[skip..]);
            segments.push(RouteSegment {
                lane_id: id,
                path_start: start,
                path_end: acc,
            });
        }
        Ok(RoutePath {
            path: Polyline::new(pts),
            segments,
            lane_width: min_width,
        })
    }

    pub fn path(&self) -> &Polyline {
        &self.path
    }

    pub fn length(&self) -> f64 {
        self.path.length()
    }

    pub fn lane_width(&self) -> f64 {
        self.lane_width
    }

    /// Project a point onto the route path: `(s, d)` as for lane projection.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        self.path.project(p)
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        self.path.point_at(s)
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        self.path.heading_at(s)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.path.curvature_at(s)
    }

    /// Lane id at route arc length `s`.
    pub fn lane_at(&self, s: f64) -> &str {
        for seg in &self.segments {
            if s <= seg.path_end {
                return &seg.lane_id;
            }
        }
        &self.segments.last().unwrap().lane_id
    }

    /// Route arc length at which the given lane segment starts/ends.
    pub fn lane_span(&self, lane_id: &str) -> Option<(f64, f64)> {
        self.segments
            .iter()
            .find(|s| s.lane_id == lane_id)
            .map(|s| (s.path_start, s.path_end))
    }
}
