//! The policy abstraction: waypoint plans, the grid-in/plan-out interface,
//! the IDM-driven expert planner, the input history queue with jitter
//! compensation, and the SDV reference-point transform.

use std::collections::VecDeque;

use crate::dynamics::{
    expert_steering, step_bicycle, Agent, NeighborObs, RouteDriver, VehicleDims, VehicleState,
};
use crate::geom::{normalize_angle, RoadMap, Vec2};
use crate::raster::BevGrid;

/// Number of plan waypoints.
pub const PLAN_STEPS: usize = 15;
/// Temporal spacing between waypoints, seconds.
pub const PLAN_DT: f64 = 0.2;
/// Plan horizon, seconds.
pub const PLAN_HORIZON: f64 = PLAN_STEPS as f64 * PLAN_DT;

/// 15 time-equidistant (x, y) points in the SDV frame at planning time.
/// x points forward, y to the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointPlan {
    pub points: [Vec2; PLAN_STEPS],
}

impl WaypointPlan {
    pub fn new(points: [Vec2; PLAN_STEPS]) -> Self {
        WaypointPlan { points }
    }

    pub fn standstill() -> Self {
        WaypointPlan {
            points: [Vec2::ZERO; PLAN_STEPS],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.is_finite())
    }

    /// Gap between consecutive waypoints, with the SDV position as point zero.
    /// Returns `PLAN_STEPS` gaps.
    pub fn gaps(&self) -> [f64; PLAN_STEPS] {
        let mut out = [0.0; PLAN_STEPS];
        let mut prev = Vec2::ZERO;
        for (i, p) in self.points.iter().enumerate() {
            out[i] = p.dist(prev);
            prev = *p;
        }
        out
    }

    /// True when the whole plan stays put (every gap under the threshold).
    pub fn is_full_standstill(&self, threshold: f64) -> bool {
        self.gaps().iter().all(|&g| g < threshold)
    }

    /// Waypoints mapped from the planning SDV frame into the map frame.
    pub fn to_map_frame(&self, sdv: &VehicleState) -> [Vec2; PLAN_STEPS] {
        let mut out = [Vec2::ZERO; PLAN_STEPS];
        for (i, p) in self.points.iter().enumerate() {
            out[i] = sdv.pos() + p.rotated(sdv.heading);
        }
        out
    }
}

/// A timestamped pose observation of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentObs {
    pub id: u32,
    pub state: VehicleState,
    pub dims: VehicleDims,
}

/// One scene observation: every vehicle at a common timestamp. Index 0 is the SDV.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObs {
    pub time: f64,
    pub agents: Vec<AgentObs>,
}

/// Policies that map a BEV grid to a waypoint plan.
pub trait GridPolicy {
    fn act(&mut self, grid: &BevGrid) -> WaypointPlan;
}

/// Test stub: always plans to stand still.
#[derive(Debug, Default, Clone)]
pub struct ConstantStopPolicy;

impl GridPolicy for ConstantStopPolicy {
    fn act(&mut self, _grid: &BevGrid) -> WaypointPlan {
        WaypointPlan::standstill()
    }
}

/// Test stub: straight-ahead plan at a fixed speed, whatever the scene.
#[derive(Debug, Clone)]
pub struct ConstantSpeedPolicy {
    pub speed: f64,
}

impl GridPolicy for ConstantSpeedPolicy {
    fn act(&mut self, _grid: &BevGrid) -> WaypointPlan {
        let mut pts = [Vec2::ZERO; PLAN_STEPS];
        for (i, p) in pts.iter_mut().enumerate() {
            p.x = self.speed * PLAN_DT * (i + 1) as f64;
        }
        WaypointPlan::new(pts)
    }
}

/// Expert plan: a 3 s forward simulation of the SDV under IDM + conflict gate
/// + pure-pursuit steering, with all traffic frozen to constant-velocity
/// predictions, sampled every 0.2 s and expressed in the starting SDV frame.
pub fn expert_plan(
    sdv: &Agent,
    driver: &RouteDriver,
    traffic: &[NeighborObs],
    map: &RoadMap,
) -> WaypointPlan {
    const SUB_DT: f64 = 0.1;
    let start = sdv.state;
    let mut state = sdv.state;
    let mut points = [Vec2::ZERO; PLAN_STEPS];
    let mut rollout = sdv.clone();
    for k in 0..PLAN_STEPS {
        for sub in 0..2 {
            let t = (k * 2 + sub) as f64 * SUB_DT;
            let predicted: Vec<NeighborObs> = traffic
                .iter()
                .map(|o| NeighborObs {
                    pos: o.pos + Vec2::from_heading(o.heading) * (o.speed * t),
                    ..*o
                })
                .collect();
            let (s, _) = driver.path.project(state.pos());
            let accel =
                driver.longitudinal_accel(map, s, state.speed, &sdv.dims, &sdv.idm, &predicted);
            rollout.state = state;
            let steer = expert_steering(&rollout, map, &driver.path);
            state = step_bicycle(&state, accel, steer, &sdv.dims, SUB_DT);
        }
        let rel = (state.pos() - start.pos()).rotated(-start.heading);
        points[k] = rel;
    }
    WaypointPlan::new(points)
}

/// Jitter-compensating queue of scene observations.
///
/// Deployment inputs arrive with timing noise; the policy needs history at
/// exactly {0, -0.2, -0.4} s. Poses are linearly interpolated to those offsets
/// and dims are held at the most recent estimate.
#[derive(Debug, Default, Clone)]
pub struct HistoryQueue {
    entries: VecDeque<SceneObs>,
}

/// History offsets required by the input representation, seconds.
pub const HISTORY_OFFSETS: [f64; 3] = [0.0, -0.2, -0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotReady;

impl HistoryQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, obs: SceneObs) {
        // keep ~1 s of history
        self.entries.push_back(obs);
        while self.entries.len() > 16 {
            self.entries.pop_front();
        }
    }

    pub fn span(&self) -> f64 {
        match (self.entries.front(), self.entries.back()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    /// Observations aligned to `now`, `now - 0.2`, `now - 0.4`, most recent first.
    pub fn resample(&self, now: f64) -> Result<[SceneObs; 3], NotReady> {
        if self.span() + 1e-9 < 0.4 {
            return Err(NotReady);
        }
        let latest = self.entries.back().ok_or(NotReady)?;
        let mut out = Vec::with_capacity(3);
        for off in HISTORY_OFFSETS {
            let t = now + off;
            out.push(self.interpolate_at(t, latest)?);
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    }

    fn interpolate_at(&self, t: f64, latest: &SceneObs) -> Result<SceneObs, NotReady> {
        // bracketing observations
        let mut before: Option<&SceneObs> = None;
        let mut after: Option<&SceneObs> = None;
        for e in &self.entries {
            if e.time <= t + 1e-12 {
                before = Some(e);
            } else {
                after = Some(e);
                break;
            }
        }
        let (a, b) = match (before, after) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, a),
            (None, Some(_)) => return Err(NotReady),
            (None, None) => return Err(NotReady),
        };
        let w = if (b.time - a.time).abs() < 1e-12 {
            0.0
        } else {
            ((t - a.time) / (b.time - a.time)).clamp(0.0, 1.0)
        };
        let mut agents = Vec::with_capacity(a.agents.len());
        for oa in &a.agents {
            let ob = b.agents.iter().find(|o| o.id == oa.id).unwrap_or(oa);
            let latest_dims = latest
                .agents
                .iter()
                .find(|o| o.id == oa.id)
                .map(|o| o.dims)
                .unwrap_or(oa.dims);
            let pos = oa.state.pos() + (ob.state.pos() - oa.state.pos()) * w;
            let dh = normalize_angle(ob.state.heading - oa.state.heading);
            let heading = normalize_angle(oa.state.heading + dh * w);
            let speed = oa.state.speed + (ob.state.speed - oa.state.speed) * w;
            agents.push(AgentObs {
                id: oa.id,
                state: VehicleState::new(pos.x, pos.y, heading, speed),
                dims: latest_dims,
            });
        }
        Ok(SceneObs { time: t, agents })
    }
}

/// SDV reference point: where the pose coordinate sits within the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefPoint {
    /// Training-data convention: geometric centre / centre of gravity.
    CentreOfGravity,
    /// Vehicle convention: centre of the rear axle.
    CentreOfRearAxle,
}

/// Longitudinal offset of the reference point from the rear axle, metres.
/// The CoG-to-rear-axle distance is a config default, not a measured value.
pub const COG_REAR_AXLE_OFFSET: f64 = 1.4;

impl RefPoint {
    fn offset_from_rear_axle(self) -> f64 {
        match self {
            RefPoint::CentreOfGravity => COG_REAR_AXLE_OFFSET,
            RefPoint::CentreOfRearAxle => 0.0,
        }
    }
}

/// Move every waypoint along the arc-length-interpolated plan curve by the
/// reference-point offset. The plan curve is taken through the SDV position
/// (the origin) followed by the 15 waypoints; ends extrapolate along the
/// local tangent.
pub fn transform_reference_point(
    plan: &WaypointPlan,
    from: RefPoint,
    to: RefPoint,
) -> WaypointPlan {
    let delta = to.offset_from_rear_axle() - from.offset_from_rear_axle();
    if delta.abs() < 1e-12 {
        return *plan;
    }
    let mut distinct = 0;
    let mut prev = Vec2::ZERO;
    for p in &plan.points {
        if p.dist(prev) > 1e-9 {
            distinct += 1;
        }
        prev = *p;
    }
    if distinct < 2 {
        return *plan; // degenerate plan, nothing to move along
    }
    // dense Catmull-Rom interpolation of the raw waypoints keeps curved plans
    // on their curve while points slide along it
    let mut knots: Vec<Vec2> = Vec::with_capacity(PLAN_STEPS + 1);
    knots.push(Vec2::ZERO);
    knots.extend_from_slice(&plan.points);
    knots.dedup_by(|a, b| a.dist(*b) < 1e-9);
    if knots.len() < 2 {
        return *plan;
    }
    let mut curve = catmull_rom_dense(&knots, 120);
    curve.dedup_by(|a, b| a.dist(*b) < 1e-9);
    if curve.len() < 2 {
        return *plan;
    }
    let line = crate::geom::Polyline::new(curve);
    let n = line.length();
    let mut out = [Vec2::ZERO; PLAN_STEPS];
    for (i, p) in plan.points.iter().enumerate() {
        let (s, _) = line.project(*p);
        let target = s + delta;
        out[i] = if target < 0.0 {
            line.first() + line.tangent_at(0.0) * target
        } else if target > n {
            line.last() + line.tangent_at(n) * (target - n)
        } else {
            line.point_at(target)
        };
    }
    WaypointPlan::new(out)
}

/// Cubic Hermite interpolation with finite-difference tangents, densely
/// sampled. Unlike the natural spline this has no end-condition distortion,
/// which matters for sliding points along nearly circular plans.
fn catmull_rom_dense(knots: &[Vec2], samples_per_seg: usize) -> Vec<Vec2> {
    let n = knots.len();
    let tangent = |i: usize| -> Vec2 {
        if i == 0 {
            (knots[1] - knots[0]) * 2.0 - (knots[2.min(n - 1)] - knots[0]) * 0.5
        } else if i == n - 1 {
            (knots[n - 1] - knots[n - 2]) * 2.0 - (knots[n - 1] - knots[n.saturating_sub(3)]) * 0.5
        } else {
            (knots[i + 1] - knots[i - 1]) * 0.5
        }
    };
    let mut out = Vec::with_capacity((n - 1) * samples_per_seg + 1);
    for i in 0..n - 1 {
        let (p0, p1) = (knots[i], knots[i + 1]);
        let (m0, m1) = (tangent(i), tangent(i + 1));
        for k in 0..samples_per_seg {
            let t = k as f64 / samples_per_seg as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            out.push(p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11);
        }
    }
    out.push(knots[n - 1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stop_stub_is_all_zero() {
        let mut p = ConstantStopPolicy;
        let grid = BevGrid::empty();
        let plan = p.act(&grid);
        assert!(plan.points.iter().all(|p| *p == Vec2::ZERO));
        assert!(plan.is_full_standstill(0.1));
    }

    #[test]
    fn constant_speed_stub_spacing() {
        let mut p = ConstantSpeedPolicy { speed: 5.0 };
        let plan = p.act(&BevGrid::empty());
        let gaps = plan.gaps();
        for g in gaps {
            assert!((g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn history_on_grid_is_identity() {
        let mut q = HistoryQueue::new();
        for i in 0..6 {
            let t = i as f64 * 0.1;
            q.push(SceneObs {
                time: t,
                agents: vec![AgentObs {
                    id: 0,
                    state: VehicleState::new(2.0 * t, 0.0, 0.0, 2.0),
                    dims: VehicleDims::car(),
                }],
            });
        }
        let [now, h1, h2] = q.resample(0.5).unwrap();
        assert!((now.agents[0].state.x - 1.0).abs() < 1e-12);
        assert!((h1.agents[0].state.x - 0.6).abs() < 1e-12);
        assert!((h2.agents[0].state.x - 0.2).abs() < 1e-12);
        assert!((now.time - h1.time - 0.2).abs() < 1e-12);
        assert!((h1.time - h2.time - 0.2).abs() < 1e-12);
    }

    #[test]
    fn history_jitter_linear_motion_exact() {
        // messages at +-30 ms jitter around the 0.1 s grid; linear motion is
        // recovered exactly by linear interpolation
        let mut q = HistoryQueue::new();
        let jit = [0.03, -0.02, 0.01, -0.03, 0.02, -0.01, 0.0];
        for i in 0..7 {
            let t = i as f64 * 0.1 + jit[i];
            q.push(SceneObs {
                time: t,
                agents: vec![AgentObs {
                    id: 3,
                    state: VehicleState::new(4.0 * t, -1.0 * t, 0.0, 4.0),
                    dims: VehicleDims::car(),
                }],
            });
        }
        let [now, h1, h2] = q.resample(0.55).unwrap();
        for (obs, t) in [(&now, 0.55), (&h1, 0.35), (&h2, 0.15)] {
            assert!((obs.agents[0].state.x - 4.0 * t).abs() < 1e-9);
            assert!((obs.agents[0].state.y + t).abs() < 1e-9);
        }
    }

    #[test]
    fn history_too_short_not_ready() {
        let mut q = HistoryQueue::new();
        for i in 0..4 {
            q.push(SceneObs {
                time: i as f64 * 0.1,
                agents: vec![],
            });
        }
        assert!((q.span() - 0.3).abs() < 1e-9);
        assert!(q.resample(0.3).is_err());
    }

    #[test]
    fn refpoint_identity_and_straight_shift() {
        let mut pts = [Vec2::ZERO; PLAN_STEPS];
        for (i, p) in pts.iter_mut().enumerate() {
            p.x = (i + 1) as f64;
        }
        let plan = WaypointPlan::new(pts);
        let same = transform_reference_point(&plan, RefPoint::CentreOfGravity, RefPoint::CentreOfGravity);
        assert_eq!(same, plan);

        let moved = transform_reference_point(&plan, RefPoint::CentreOfRearAxle, RefPoint::CentreOfGravity);
        for (i, p) in moved.points.iter().enumerate() {
            assert!(
                (p.x - (i + 1) as f64 - COG_REAR_AXLE_OFFSET).abs() < 1e-6,
                "point {i}: {p:?}"
            );
            assert!(p.y.abs() < 1e-9);
        }
    }

    #[test]
    fn refpoint_circular_plan_stays_on_circle() {
        // waypoints on a circle of radius 20 through the origin
        let r = 20.0;
        let centre = Vec2::new(0.0, r);
        let mut pts = [Vec2::ZERO; PLAN_STEPS];
        for (i, p) in pts.iter_mut().enumerate() {
            let arc = 1.2 * (i + 1) as f64 / PLAN_STEPS as f64;
            *p = centre + Vec2::new((arc).sin(), -(arc).cos()) * r;
        }
        let plan = WaypointPlan::new(pts);
        let moved = transform_reference_point(&plan, RefPoint::CentreOfGravity, RefPoint::CentreOfRearAxle);
        for p in &moved.points {
            let rad = (*p - centre).norm();
            assert!((rad - r).abs() < 1e-3, "radius drifted to {rad}");
        }
    }
}
