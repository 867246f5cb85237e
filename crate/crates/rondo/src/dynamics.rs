//! Vehicle kinematics and IDM longitudinal behaviour with roundabout
//! conflict checking.
//!
//! All functions here are pure; episode state is owned by the simulator.

use crate::geom::{normalize_angle, RoadMap, Route, RoutePath, Vec2};

/// Simulation tick, matching the 10 Hz object-list rate.
pub const SIM_DT: f64 = 0.1;

/// Deceleration applied when a gap collapses to zero or below.
pub const EMERGENCY_DECEL: f64 = 6.0;

/// Time-to-conflict threshold of the yield gate, seconds. Our stand-in for
/// the simulator's extended conflict logic; see the run config.
pub const CONFLICT_TIME_GAP: f64 = 3.0;

/// A vehicle pose and speed in the map frame. The position is the geometric
/// centre of the footprint, which is also the motion-model reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Normalized to (-pi, pi].
    pub heading: f64,
    /// m/s, never negative.
    pub speed: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        VehicleState {
            x,
            y,
            heading: normalize_angle(heading),
            speed: speed.max(0.0),
        }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn dir(&self) -> Vec2 {
        Vec2::from_heading(self.heading)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite() && self.speed.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
}

impl VehicleDims {
    pub fn new(length: f64, width: f64) -> Self {
        VehicleDims { length, width }
    }

    /// Default mid-size car.
    pub fn car() -> Self {
        VehicleDims::new(4.5, 1.9)
    }

    pub fn wheelbase(&self) -> f64 {
        0.6 * self.length
    }
}

/// Intelligent Driver Model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    /// Desired speed, m/s.
    pub v0: f64,
    /// Time headway, s.
    pub time_headway: f64,
    /// Maximum acceleration, m/s^2.
    pub a_max: f64,
    /// Comfortable braking deceleration, m/s^2.
    pub b_comf: f64,
    /// Minimum gap, m.
    pub s0: f64,
    /// Free-road exponent.
    pub delta: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        IdmParams {
            v0: 50.0 / 3.6,
            time_headway: 1.5,
            a_max: 2.0,
            b_comf: 3.0,
            s0: 2.0,
            delta: 4.0,
        }
    }
}

impl IdmParams {
    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }

    /// Desired gap behind a leader at the given speeds.
    pub fn desired_gap(&self, v: f64, v_leader: f64) -> f64 {
        let dynamic = v * self.time_headway
            + v * (v - v_leader) / (2.0 * (self.a_max * self.b_comf).sqrt());
        self.s0 + dynamic.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Sdv,
    Traffic,
}

/// Scripted longitudinal behaviour for traffic that does not follow IDM,
/// e.g. the lead vehicle of the drive-off scenario or parked cars.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentScript {
    /// Plain IDM car-following along the route.
    Idm,
    /// Stationary for the whole episode.
    Parked,
    /// Hold still, then advance by a distance, then hold again.
    HoldAdvanceHold { hold_s: f64, advance_m: f64 },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub state: VehicleState,
    pub dims: VehicleDims,
    pub route: Route,
    pub idm: IdmParams,
    pub role: AgentRole,
    pub script: AgentScript,
}

/// Kinematic bicycle step with the wheelbase tied to vehicle length.
///
/// Semi-implicit Euler: speed updates first, then pose. Speed clamps at zero
/// and the heading is renormalized. With zero steer and zero accel this
/// preserves speed exactly and displaces `speed * dt` along the heading.
pub fn step_bicycle(
    state: &VehicleState,
    accel: f64,
    steer: f64,
    dims: &VehicleDims,
    dt: f64,
) -> VehicleState {
    debug_assert!(dt > 0.0 && dt <= 0.5);
    let steer = steer.clamp(-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4);
    let speed = (state.speed + accel * dt).max(0.0);
    let heading = normalize_angle(state.heading + speed / dims.wheelbase() * steer.tan() * dt);
    let x = state.x + speed * heading.cos() * dt;
    let y = state.y + speed * heading.sin() * dt;
    VehicleState {
        x,
        y,
        heading,
        speed,
    }
}

/// IDM acceleration.
///
/// `a_max * [1 - (v/v0)^delta - (s*/s)^2]` with
/// `s* = s0 + max(0, v*T + v*(v - v_leader) / (2*sqrt(a_max*b_comf)))`.
/// Without a leader only the free-road term applies. A non-positive gap is
/// treated as an emergency and returns a constant hard deceleration.
pub fn idm_accel(v: f64, leader: Option<(f64, f64)>, p: &IdmParams) -> f64 {
    let free = 1.0 - (v / p.v0).powf(p.delta);
    match leader {
        None => p.a_max * free,
        Some((gap, _)) if gap <= 0.0 => -EMERGENCY_DECEL,
        Some((gap, v_leader)) => {
            let s_star = p.desired_gap(v, v_leader);
            p.a_max * (free - (s_star / gap).powi(2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    Proceed,
    Yield,
}

/// A view of another vehicle for conflict checking: arc position and speed
/// along the priority lane.
#[derive(Debug, Clone, Copy)]
pub struct PriorityVehicle {
    /// Arc length on the priority lane, metres.
    pub s: f64,
    pub speed: f64,
}

/// Yield gate for an entry lane that merges into a priority lane.
///
/// Yields when any priority vehicle reaches the conflict point within
/// `time_gap` seconds or already occupies the conflict zone. Once the agent
/// has moved past the yield line it is committed and never re-yields.
pub fn conflict_gate(
    agent_s_on_entry: f64,
    entry_length: f64,
    conflict_s_on_priority: f64,
    priority_lane_length: f64,
    priority_closed_loop: bool,
    priority_vehicles: &[PriorityVehicle],
    time_gap: f64,
) -> GateDecision {
    let yield_line = yield_line_s(entry_length);
    if agent_s_on_entry >= yield_line {
        return GateDecision::Proceed; // committed
    }
    // conflict zone: a short stretch of the priority lane around the merge point
    const ZONE_BEHIND: f64 = 3.0;
    const ZONE_AHEAD: f64 = 6.0;
    for v in priority_vehicles {
        let mut ds = conflict_s_on_priority - v.s;
        if priority_closed_loop {
            // distance forward along the loop
            ds = ds.rem_euclid(priority_lane_length);
            // a vehicle just past the point is still in the zone
            if priority_lane_length - ds < ZONE_AHEAD {
                ds -= priority_lane_length;
            }
        }
        if (-ZONE_AHEAD..=ZONE_BEHIND).contains(&ds) {
            return GateDecision::Yield; // occupying the conflict zone
        }
        if ds > 0.0 {
            let ttc = ds / v.speed.max(0.1);
            if ttc <= time_gap {
                return GateDecision::Yield;
            }
        }
    }
    GateDecision::Proceed
}

/// Arc position of the yield line on an entry lane: far enough back that a
/// waiting car stays clear of the circulating lane.
pub fn yield_line_s(entry_length: f64) -> f64 {
    (entry_length - 5.5).max(0.0)
}

/// Pure-pursuit steering toward a lookahead point on the route path.
///
/// Lookahead distance is `clamp(k * speed, min, max)`. Returns 0 when the
/// route is exhausted.
pub fn pure_pursuit_steer(
    state: &VehicleState,
    dims: &VehicleDims,
    path: &RoutePath,
    lookahead_gain: f64,
    lookahead_min: f64,
    lookahead_max: f64,
) -> f64 {
    let (s, _) = path.project(state.pos());
    if s >= path.length() - 1e-6 {
        return 0.0;
    }
    let lookahead = (lookahead_gain * state.speed).clamp(lookahead_min, lookahead_max);
    let target = path.point_at((s + lookahead).min(path.length()));
    let to_target = target - state.pos();
    let dist = to_target.norm();
    if dist < 1e-6 {
        return 0.0;
    }
    let alpha = normalize_angle(to_target.angle() - state.heading);
    (2.0 * dims.wheelbase() * alpha.sin() / dist).atan()
}

/// Default pure-pursuit tuning used by the expert.
pub const LOOKAHEAD_GAIN: f64 = 0.7;
pub const LOOKAHEAD_MIN: f64 = 2.0;
pub const LOOKAHEAD_MAX: f64 = 12.0;

/// Expert steering along the agent's own route.
pub fn expert_steering(agent: &Agent, map: &RoadMap, path: &RoutePath) -> f64 {
    let _ = map;
    pure_pursuit_steer(
        &agent.state,
        &agent.dims,
        path,
        LOOKAHEAD_GAIN,
        LOOKAHEAD_MIN,
        LOOKAHEAD_MAX,
    )
}

/// Comfortable speed cap from path curvature, looking ahead a braking horizon.
///
/// The expert drives at the zone speed limit but slows for curves so the
/// pure-pursuit tracker can hold the lane.
pub fn curvature_speed_cap(path: &RoutePath, s_now: f64, v_now: f64, b_comf: f64) -> f64 {
    const A_LAT_MAX: f64 = 1.5;
    // plan the slowdown with braking headroom below b_comf so the enforcement
    // never has to saturate
    let b_plan = 0.7 * b_comf;
    let horizon = (v_now * v_now / (2.0 * b_plan)).max(5.0) + 10.0;
    let mut cap = f64::INFINITY;
    let mut ds = 0.0;
    while ds <= horizon {
        let s = s_now + ds;
        if s >= path.length() {
            break;
        }
        let kappa = path.curvature_at(s).abs();
        if kappa > 1e-6 {
            let v_curve = (A_LAT_MAX / kappa).sqrt();
            let v_now_max = (v_curve * v_curve + 2.0 * b_plan * ds).sqrt();
            cap = cap.min(v_now_max);
        }
        ds += 1.0;
    }
    cap
}

/// Another vehicle as seen by a longitudinal driver: map pose plus scalar speed.
#[derive(Debug, Clone, Copy)]
pub struct NeighborObs {
    pub pos: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub dims: VehicleDims,
}

/// Conflict bookkeeping for a route that enters a priority lane.
#[derive(Debug, Clone)]
pub struct ConflictZone {
    /// Route arc length of the yield line.
    pub yield_line_path_s: f64,
    /// Id of the priority lane.
    pub priority_lane: String,
    /// Conflict point as arc length on the priority lane.
    pub conflict_s: f64,
    pub priority_length: f64,
    pub priority_closed: bool,
}

/// A route resolved for driving: the concatenated path plus conflict data for
/// the first yielding merge along it.
#[derive(Debug, Clone)]
pub struct RouteDriver {
    pub path: RoutePath,
    pub conflict: Option<ConflictZone>,
}

impl RouteDriver {
    pub fn new(map: &RoadMap, route: &Route, spawn_hint: Option<Vec2>) -> Result<Self, crate::geom::GeomError> {
        let path = map.route_path_from(route, spawn_hint)?;
        let mut conflict = None;
        for lane_id in &route.lane_sequence {
            let lane = map.lane(lane_id).expect("validated");
            if lane.yield_to.is_empty() {
                continue;
            }
            let priority_id = &lane.yield_to[0];
            let priority = match map.lane(priority_id) {
                Some(l) => l,
                None => continue,
            };
            if let Some((span_start, span_end)) = path.lane_span(lane_id) {
                let local_yield = yield_line_s(lane.centreline.length());
                // lane appears untrimmed on the path for non-loop lanes
                let yield_line_path_s = span_start + local_yield.min(span_end - span_start);
                let (conflict_s, _) = priority.centreline.project(lane.centreline.last());
                conflict = Some(ConflictZone {
                    yield_line_path_s,
                    priority_lane: priority_id.clone(),
                    conflict_s,
                    priority_length: priority.centreline.length(),
                    priority_closed: priority.closed_loop,
                });
                break;
            }
        }
        Ok(RouteDriver { path, conflict })
    }

    /// Longitudinal acceleration for an agent at route position `s_self`.
    ///
    /// Combines IDM car-following behind the nearest on-path leader, the yield
    /// gate as a virtual stop at the yield line, a curvature-derived speed cap,
    /// and optionally a stop at the route end.
    pub fn longitudinal_accel(
        &self,
        map: &RoadMap,
        s_self: f64,
        speed: f64,
        dims: &VehicleDims,
        idm: &IdmParams,
        others: &[NeighborObs],
    ) -> f64 {
        let half_len = dims.length / 2.0;
        let cap = curvature_speed_cap(&self.path, s_self, speed, idm.b_comf);
        let idm_eff = IdmParams {
            v0: idm.v0.min(cap).max(0.5),
            ..*idm
        };

        let leader = find_leader(&self.path, s_self, half_len, others);
        let mut accel = idm_accel(speed, leader, &idm_eff);
        // the free-road term relaxes too gently from above the cap; brake
        // firmly toward it so curves are entered at curve speed
        if speed > idm_eff.v0 {
            accel = accel.min(3.0 * (idm_eff.v0 - speed)).max(-idm.b_comf * 1.5);
        }

        if let Some(cz) = &self.conflict {
            // committed once the nose is past the yield line, never re-yields
            if s_self < cz.yield_line_path_s - half_len {
                let priority = map.lane(&cz.priority_lane).expect("priority lane exists");
                let vehicles: Vec<PriorityVehicle> = others
                    .iter()
                    .filter_map(|o| {
                        let (s, d) = priority.centreline.project(o.pos);
                        (d.abs() <= priority.width * 0.5 + 0.3).then_some(PriorityVehicle {
                            s,
                            speed: o.speed,
                        })
                    })
                    .collect();
                // commitment was already ruled out above; express the gate in
                // entry-lane terms with the agent at s = 0 and the yield line
                // at the remaining distance
                let distance_to_line = cz.yield_line_path_s - s_self;
                let decision = conflict_gate(
                    0.0,
                    distance_to_line + 1.0,
                    cz.conflict_s,
                    cz.priority_length,
                    cz.priority_closed,
                    &vehicles,
                    CONFLICT_TIME_GAP,
                );
                if decision == GateDecision::Yield {
                    let gap_to_line = cz.yield_line_path_s - s_self - half_len;
                    accel = accel.min(idm_accel(speed, Some((gap_to_line, 0.0)), &idm_eff));
                }
            }
        }

        accel.clamp(-EMERGENCY_DECEL, idm.a_max)
    }
}

/// Lateral acceptance of the leader search: vehicles further off the path
/// centreline than this do not block it.
pub const LEADER_LATERAL_MAX: f64 = 1.2;

/// Nearest on-path vehicle ahead: returns `(bumper gap m, leader speed)`.
pub fn find_leader(
    path: &RoutePath,
    s_self: f64,
    self_half_len: f64,
    others: &[NeighborObs],
) -> Option<(f64, f64)> {
    const FORWARD_WINDOW: f64 = 80.0;
    let lane_half = (path.lane_width() * 0.5).min(LEADER_LATERAL_MAX);
    let mut best: Option<(f64, f64)> = None;
    for o in others {
        let (s, d) = path.project(o.pos);
        if d.abs() > lane_half {
            continue;
        }
        if s <= s_self || s - s_self > FORWARD_WINDOW {
            continue;
        }
        // ignore spurious projections at the very ends of the path
        if s >= path.length() - 1e-6 && (o.pos - path.point_at(path.length())).norm() > lane_half {
            continue;
        }
        let gap = s - s_self - self_half_len - o.dims.length / 2.0;
        if best.map_or(true, |(g, _)| gap < g) {
            best = Some((gap, o.speed));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_coasting_displaces_exactly() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 10.0);
        let s2 = step_bicycle(&s, 0.0, 0.0, &VehicleDims::car(), 0.1);
        assert!((s2.x - 1.0).abs() < 1e-12);
        assert_eq!(s2.y, 0.0);
        assert_eq!(s2.speed, 10.0);
    }

    #[test]
    fn speed_clamps_at_zero() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 0.0);
        let s2 = step_bicycle(&s, -1.0, 0.0, &VehicleDims::car(), 0.1);
        assert_eq!(s2.speed, 0.0);
        assert_eq!((s2.x, s2.y), (0.0, 0.0));
    }

    #[test]
    fn steady_steer_turn_radius_matches_formula() {
        // fine-step integration oracle: radius of the traced circle must equal
        // wheelbase / tan(steer)
        let dims = VehicleDims::new(5.0, 2.0);
        let steer = 0.2_f64;
        let expected_r = dims.wheelbase() / steer.tan();
        let mut s = VehicleState::new(0.0, 0.0, 0.0, 5.0);
        let dt = 1e-4;
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        let steps = (2.0 * std::f64::consts::PI * expected_r / (5.0 * dt)).ceil() as usize + 10;
        for _ in 0..steps {
            s = step_bicycle(&s, 0.0, steer, &dims, dt);
            min_x = min_x.min(s.x);
            max_x = max_x.max(s.x);
            min_y = min_y.min(s.y);
            max_y = max_y.max(s.y);
        }
        let r_est = 0.25 * ((max_x - min_x) + (max_y - min_y));
        assert!(
            (r_est - expected_r).abs() < 0.01 * expected_r,
            "estimated radius {r_est}, expected {expected_r}"
        );
    }

    #[test]
    fn idm_free_road_terms() {
        let p = IdmParams::default().with_v0(15.0);
        assert!((idm_accel(0.0, None, &p) - p.a_max).abs() < 1e-12);
        assert!(idm_accel(15.0, None, &p).abs() < 1e-12);
    }

    #[test]
    fn idm_matches_closed_form_hand_evaluation() {
        // independent evaluation of the closed form with pinned arguments
        let p = IdmParams {
            v0: 15.0,
            time_headway: 1.5,
            a_max: 2.0,
            b_comf: 3.0,
            s0: 2.0,
            delta: 4.0,
        };
        let v = 10.0;
        let gap = 20.0;
        let v_leader = 10.0;
        let s_star = 2.0 + (10.0 * 1.5 + 10.0 * 0.0 / (2.0 * (2.0_f64 * 3.0).sqrt())).max(0.0);
        let expected = 2.0 * (1.0 - (10.0_f64 / 15.0).powf(4.0) - (s_star / 20.0).powi(2));
        let got = idm_accel(v, Some((gap, v_leader)), &p);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn idm_emergency_on_nonpositive_gap() {
        let p = IdmParams::default();
        assert_eq!(idm_accel(5.0, Some((0.0, 3.0)), &p), -EMERGENCY_DECEL);
        assert_eq!(idm_accel(5.0, Some((-1.0, 3.0)), &p), -EMERGENCY_DECEL);
    }

    #[test]
    fn idm_monotonicity() {
        let p = IdmParams::default().with_v0(15.0);
        // decreasing in v
        let mut prev = f64::INFINITY;
        for i in 0..30 {
            let v = i as f64 * 0.5;
            let a = idm_accel(v, Some((25.0, 8.0)), &p);
            assert!(a < prev);
            prev = a;
        }
        // increasing in gap
        let mut prev = f64::NEG_INFINITY;
        for i in 1..60 {
            let gap = i as f64;
            let a = idm_accel(10.0, Some((gap, 8.0)), &p);
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn idm_equilibrium_is_non_positive_and_vanishes() {
        // with a leader at equal speed and gap s0 + v*T, the interaction term
        // is exactly -a_max and the whole expression reduces to
        // -a_max * (v/v0)^delta
        let p = IdmParams::default().with_v0(15.0);
        for &v in &[0.0, 2.0, 5.0, 10.0] {
            let gap = p.s0 + v * p.time_headway;
            let a = idm_accel(v, Some((gap, v)), &p);
            assert!(a <= 0.0, "a={a} at v={v}");
            assert!(a.abs() < (v / p.v0).powf(p.delta) * p.a_max + 1e-9);
        }
        // a -> 0 as v/v0 -> 0
        let a0 = idm_accel(0.0, Some((p.s0, 0.0)), &p);
        assert!(a0.abs() < 1e-9);
    }

    #[test]
    fn gate_empty_ring_proceeds() {
        let d = conflict_gate(10.0, 50.0, 20.0, 100.0, true, &[], CONFLICT_TIME_GAP);
        assert_eq!(d, GateDecision::Proceed);
    }

    #[test]
    fn gate_yields_below_threshold() {
        // a ring vehicle 1 s from the conflict point
        let v = PriorityVehicle { s: 12.0, speed: 8.0 }; // 8 m short of s=20
        let d = conflict_gate(10.0, 50.0, 20.0, 100.0, true, &[v], 3.0);
        assert_eq!(d, GateDecision::Yield);
    }

    #[test]
    fn gate_commits_past_yield_line() {
        let v = PriorityVehicle { s: 12.0, speed: 8.0 };
        let d = conflict_gate(49.5, 50.0, 20.0, 100.0, true, &[v], 3.0);
        assert_eq!(d, GateDecision::Proceed);
    }

    #[test]
    fn gate_decision_boundary_matches_time_to_conflict() {
        // sweep arrival times; the decision must flip at the configured
        // threshold within one tick's worth of arrival time
        let threshold = 3.0;
        let speed = 10.0;
        let conflict_s = 60.0;
        let mut last_yield = f64::NEG_INFINITY;
        let mut first_proceed = f64::INFINITY;
        let mut t = 0.2;
        while t < 6.0 {
            let s_vehicle = conflict_s - speed * t;
            if s_vehicle >= 0.0 {
                let v = PriorityVehicle { s: s_vehicle, speed };
                let d = conflict_gate(10.0, 50.0, conflict_s, 100.0, false, &[v], threshold);
                match d {
                    GateDecision::Yield => last_yield = last_yield.max(t),
                    GateDecision::Proceed => first_proceed = first_proceed.min(t),
                }
            }
            t += 0.01;
        }
        assert!((last_yield - threshold).abs() <= SIM_DT, "last yield at {last_yield}");
        assert!(first_proceed > threshold, "proceed at {first_proceed}");
    }

    #[test]
    fn pure_pursuit_signs() {
        use crate::geom::{Polyline, Route};
        use crate::geom::{Lane, LimitClass, Polygon, RoadMap};
        let cl = Polyline::new(vec![Vec2::ZERO, Vec2::new(100.0, 0.0)]);
        let lane = Lane {
            id: "a".into(),
            centreline: cl,
            width: 3.5,
            successors: vec![],
            yield_to: vec![],
            limit_class: LimitClass::Mid,
            closed_loop: false,
        };
        let map = RoadMap::new(
            "t".into(),
            vec![lane],
            vec![],
            vec![Polygon::new(vec![
                Vec2::new(0.0, -2.0),
                Vec2::new(100.0, -2.0),
                Vec2::new(100.0, 2.0),
                Vec2::new(0.0, 2.0),
            ])],
            vec![],
        );
        let route = Route {
            lane_sequence: vec!["a".into()],
            goal_s: 100.0,
        };
        let path = map.route_path(&route).unwrap();
        let dims = VehicleDims::car();

        // aligned on the centreline: zero steer
        let s = VehicleState::new(10.0, 0.0, 0.0, 5.0);
        let steer = pure_pursuit_steer(&s, &dims, &path, 1.0, 2.0, 12.0);
        assert!(steer.abs() < 1e-9);

        // offset to the left: steer must be negative (rightward)
        let s = VehicleState::new(10.0, 1.0, 0.0, 5.0);
        let steer = pure_pursuit_steer(&s, &dims, &path, 1.0, 2.0, 12.0);
        assert!(steer < 0.0, "expected rightward steer, got {steer}");
    }
}
