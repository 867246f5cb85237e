//! Deterministic fixed-step closed-loop episode execution with termination
//! detection and full state logging.

use crate::controller::{fit_spline, track, ControllerGains};
use crate::dynamics::{
    idm_accel, step_bicycle, AgentScript, NeighborObs, RouteDriver, VehicleDims,
    VehicleState, SIM_DT,
};
use crate::geom::Vec2;
use crate::metrics::{PlanLog, PlanRecord};
use crate::policy::WaypointPlan;
use crate::scenario::{EpisodeConfig, SuccessCriterion};

/// Off-road distance beyond which the episode terminates.
pub const OFFROAD_TERMINATION_M: f64 = 5.0;
/// Goal tolerance along the route, metres.
pub const GOAL_RADIUS: f64 = 2.5;
/// Speed below which the SDV counts as stopped.
pub const STOP_SPEED: f64 = 0.1;
/// A stop must hold this long before the stop criterion fires, seconds.
pub const STOP_HOLD_S: f64 = 1.0;
/// Minimum speed that counts as "has driven" for stop scenarios.
pub const MOVED_SPEED: f64 = 0.5;
/// The restored gap must hold this long, seconds.
pub const GAP_HOLD_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Success,
    Collision,
    Offroad,
    Timeout,
    /// The policy produced a non-finite plan.
    PolicyFault,
}

/// Per-tick world snapshot handed to hooks and kept in the state log.
#[derive(Debug, Clone)]
pub struct TickRecord {
    pub t: f64,
    pub states: Vec<VehicleState>,
}

/// The outcome and full logs of one episode.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub termination: Termination,
    pub duration: f64,
    /// SDV path length divided by duration.
    pub avg_speed: f64,
    pub collision_count: u32,
    pub offroad_event_count: u32,
    pub state_log: Vec<TickRecord>,
    pub plan_log: PlanLog,
    /// Per-tick bumper gap from the SDV to its route leader, when present.
    pub gap_log: Vec<Option<f64>>,
}

/// Read-only per-tick view for capture hooks.
pub struct TickView<'a> {
    pub t: f64,
    pub states: &'a [VehicleState],
    pub sdv_plan: &'a WaypointPlan,
}

/// Callbacks invoked once per tick with a read-only view of the world.
#[derive(Default)]
pub struct TickHooks<'a> {
    pub on_tick: Option<Box<dyn FnMut(&TickView<'_>) + 'a>>,
}

impl<'a> TickHooks<'a> {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Policies that drive the SDV inside the simulator.
pub trait SdvPolicy {
    fn plan(&mut self, view: &WorldView<'_>) -> WaypointPlan;
}

/// World state as seen by an SDV policy at planning time.
pub struct WorldView<'a> {
    pub t: f64,
    pub states: &'a [VehicleState],
    pub config: &'a EpisodeConfig,
    pub sdv_driver: &'a RouteDriver,
}

impl WorldView<'_> {
    /// Neighbor observations of everything except the SDV.
    pub fn neighbors(&self) -> Vec<NeighborObs> {
        self.states
            .iter()
            .zip(self.config.agents.iter())
            .skip(1)
            .map(|(st, ag)| NeighborObs {
                pos: st.pos(),
                heading: st.heading,
                speed: st.speed,
                dims: ag.dims,
            })
            .collect()
    }
}

/// Oriented-bounding-box overlap via the separating-axis test.
pub fn obb_overlap(
    pos_a: Vec2,
    heading_a: f64,
    dims_a: &VehicleDims,
    pos_b: Vec2,
    heading_b: f64,
    dims_b: &VehicleDims,
) -> bool {
    let axes = [
        Vec2::from_heading(heading_a),
        Vec2::from_heading(heading_a).perp_left(),
        Vec2::from_heading(heading_b),
        Vec2::from_heading(heading_b).perp_left(),
    ];
    let half = |d: &VehicleDims| (d.length / 2.0, d.width / 2.0);
    let (al, aw) = half(dims_a);
    let (bl, bw) = half(dims_b);
    let centre_diff = pos_b - pos_a;
    for axis in axes {
        let ra = al * axis.dot(Vec2::from_heading(heading_a)).abs()
            + aw * axis.dot(Vec2::from_heading(heading_a).perp_left()).abs();
        let rb = bl * axis.dot(Vec2::from_heading(heading_b)).abs()
            + bw * axis.dot(Vec2::from_heading(heading_b).perp_left()).abs();
        if centre_diff.dot(axis).abs() > ra + rb {
            return false;
        }
    }
    true
}

/// OBB collision between two agents' footprints.
pub fn detect_collision(
    state_a: &VehicleState,
    dims_a: &VehicleDims,
    state_b: &VehicleState,
    dims_b: &VehicleDims,
) -> bool {
    obb_overlap(
        state_a.pos(),
        state_a.heading,
        dims_a,
        state_b.pos(),
        state_b.heading,
        dims_b,
    )
}

struct TrafficRuntime {
    driver: Option<RouteDriver>,
    /// Initial route position, for scripted advances.
    initial_s: f64,
}

/// Run one closed-loop episode.
///
/// Fixed 0.1 s steps. Traffic follows IDM plus the conflict gate and
/// pure-pursuit steering; the SDV executes `policy` through the spline
/// controller. Terminates on collision, going more than 5 m off-road,
/// fulfilment of the success criterion, or timeout.
pub fn run_episode(
    config: &EpisodeConfig,
    policy: &mut dyn SdvPolicy,
    hooks: &mut TickHooks<'_>,
) -> EpisodeResult {
    let map = &config.map;
    let sdv_agent = &config.agents[0];
    let sdv_driver = RouteDriver::new(map, &sdv_agent.route, Some(sdv_agent.state.pos()))
        .expect("SDV route must resolve");
    let gains = ControllerGains::default();

    let traffic_rt: Vec<TrafficRuntime> = config
        .agents
        .iter()
        .map(|a| {
            let driver = match a.script {
                AgentScript::Parked => None,
                _ => RouteDriver::new(map, &a.route, Some(a.state.pos())).ok(),
            };
            let initial_s = driver
                .as_ref()
                .map(|d| d.path.project(a.state.pos()).0)
                .unwrap_or(0.0);
            TrafficRuntime { driver, initial_s }
        })
        .collect();

    let mut states: Vec<VehicleState> = config.agents.iter().map(|a| a.state).collect();
    let n_agents = states.len();
    let max_ticks = (config.max_duration / SIM_DT).round() as usize;

    let mut state_log = Vec::with_capacity(max_ticks + 1);
    let mut plan_log = PlanLog::default();
    let mut gap_log = Vec::with_capacity(max_ticks + 1);

    let mut termination = Termination::Timeout;
    let mut duration = config.max_duration;
    let mut collision_count = 0u32;
    let mut offroad_event_count = 0u32;
    let mut was_offroad = false;
    let mut path_length = 0.0;
    let mut max_sdv_speed: f64 = 0.0;
    let mut stop_hold_ticks = 0usize;
    let mut gap_hold_ticks = 0usize;

    // Each iteration logs the current snapshot, checks termination on it,
    // then plans and steps. Post-hoc checks over the logs therefore see
    // exactly the sequence the online checks saw.
    for tick in 0..=max_ticks {
        let t = tick as f64 * SIM_DT;

        state_log.push(TickRecord {
            t,
            states: states.clone(),
        });

        // leader gap bookkeeping for the increase-gap criterion and metrics
        let view = WorldView {
            t,
            states: &states,
            config,
            sdv_driver: &sdv_driver,
        };
        let neighbors = view.neighbors();
        let (sdv_s, sdv_d) = sdv_driver.path.project(states[0].pos());
        let gap = crate::dynamics::find_leader(
            &sdv_driver.path,
            sdv_s,
            sdv_agent.dims.length / 2.0,
            &neighbors,
        )
        .map(|(g, _)| g);
        gap_log.push(gap);
        max_sdv_speed = max_sdv_speed.max(states[0].speed);

        // termination checks on the logged snapshot
        let mut collided = false;
        for i in 1..n_agents {
            if detect_collision(&states[0], &sdv_agent.dims, &states[i], &config.agents[i].dims) {
                collided = true;
            }
        }
        if collided {
            collision_count += 1;
            termination = Termination::Collision;
            duration = t;
            break;
        }

        let off_dist = map.distance_to_drivable(states[0].pos());
        if off_dist > 0.0 && !was_offroad {
            offroad_event_count += 1;
        }
        was_offroad = off_dist > 0.0;
        if off_dist > OFFROAD_TERMINATION_M {
            termination = Termination::Offroad;
            duration = t;
            break;
        }

        let succeeded = match &config.criterion {
            SuccessCriterion::GoToGoal => {
                sdv_s >= sdv_driver.path.length() - GOAL_RADIUS
                    && sdv_d.abs() < sdv_driver.path.lane_width()
            }
            SuccessCriterion::StopInLane => {
                if states[0].speed < STOP_SPEED && max_sdv_speed >= MOVED_SPEED {
                    stop_hold_ticks += 1;
                } else {
                    stop_hold_ticks = 0;
                }
                stop_hold_ticks as f64 * SIM_DT >= STOP_HOLD_S
            }
            SuccessCriterion::IncreaseGapRestored => {
                let safe = match gap {
                    Some(g) => {
                        g >= sdv_agent.idm.desired_gap(states[0].speed, states[0].speed)
                    }
                    None => true, // leader gone entirely counts as restored
                };
                if safe {
                    gap_hold_ticks += 1;
                } else {
                    gap_hold_ticks = 0;
                }
                gap_hold_ticks as f64 * SIM_DT >= GAP_HOLD_S
            }
        };
        if succeeded {
            termination = Termination::Success;
            duration = t;
            break;
        }
        if tick == max_ticks {
            termination = Termination::Timeout;
            duration = config.max_duration;
            break;
        }

        // SDV plan from the current snapshot
        let plan = policy.plan(&view);
        if !plan.is_finite() {
            termination = Termination::PolicyFault;
            duration = t;
            break;
        }
        plan_log.records.push(PlanRecord {
            tau: t,
            plan,
            sdv_pose: states[0],
        });

        if let Some(cb) = hooks.on_tick.as_mut() {
            cb(&TickView {
                t,
                states: &states,
                sdv_plan: &plan,
            });
        }

        // commands for every agent from the same snapshot
        let mut next_states = states.clone();

        // SDV: spline controller on the fresh plan, in the planning frame
        let traj = fit_spline(&plan);
        let plan_frame_state = VehicleState::new(0.0, 0.0, 0.0, states[0].speed);
        let cmd = track(&traj, &plan_frame_state, &gains);
        next_states[0] = step_bicycle(&states[0], cmd.accel, cmd.steer, &sdv_agent.dims, SIM_DT);

        // traffic
        for i in 1..n_agents {
            let agent = &config.agents[i];
            let rt = &traffic_rt[i];
            match &agent.script {
                AgentScript::Parked => {}
                script => {
                    let driver = match rt.driver.as_ref() {
                        Some(d) => d,
                        None => continue,
                    };
                    let (s, _) = driver.path.project(states[i].pos());
                    let others: Vec<NeighborObs> = states
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(j, st)| NeighborObs {
                            pos: st.pos(),
                            heading: st.heading,
                            speed: st.speed,
                            dims: config.agents[j].dims,
                        })
                        .collect();
                    let accel = match script {
                        AgentScript::HoldAdvanceHold { hold_s, advance_m } => {
                            if t < *hold_s {
                                -crate::dynamics::EMERGENCY_DECEL
                            } else {
                                // roll to the scripted stop point, respecting any leader
                                let target_s = rt.initial_s + advance_m;
                                let idm = crate::dynamics::IdmParams {
                                    v0: 3.0,
                                    ..agent.idm
                                };
                                let virtual_gap = (target_s + idm.s0 - s).max(0.001);
                                let a_script = idm_accel(states[i].speed, Some((virtual_gap, 0.0)), &idm);
                                let a_drive = driver.longitudinal_accel(
                                    map,
                                    s,
                                    states[i].speed,
                                    &agent.dims,
                                    &idm,
                                    &others,
                                );
                                a_script.min(a_drive)
                            }
                        }
                        _ => driver.longitudinal_accel(
                            map,
                            s,
                            states[i].speed,
                            &agent.dims,
                            &agent.idm,
                            &others,
                        ),
                    };
                    let steer = crate::dynamics::pure_pursuit_steer(
                        &states[i],
                        &agent.dims,
                        &driver.path,
                        crate::dynamics::LOOKAHEAD_GAIN,
                        crate::dynamics::LOOKAHEAD_MIN,
                        crate::dynamics::LOOKAHEAD_MAX,
                    );
                    next_states[i] = step_bicycle(&states[i], accel, steer, &agent.dims, SIM_DT);
                }
            }
        }

        path_length += next_states[0].pos().dist(states[0].pos());
        states = next_states;
    }

    let avg_speed = if duration > 0.0 { path_length / duration } else { 0.0 };
    EpisodeResult {
        termination,
        duration,
        avg_speed,
        collision_count,
        offroad_event_count,
        state_log,
        plan_log,
        gap_log,
    }
}

/// Expert policy: replans with the IDM/pure-pursuit rollout every tick.
pub struct ExpertSdvPolicy;

impl SdvPolicy for ExpertSdvPolicy {
    fn plan(&mut self, view: &WorldView<'_>) -> WaypointPlan {
        let mut sdv = view.config.agents[0].clone();
        sdv.state = view.states[0];
        let neighbors = view.neighbors();
        crate::policy::expert_plan(&sdv, view.sdv_driver, &neighbors, &view.config.map)
    }
}

/// Adapter running a grid policy inside the simulator: keeps the history
/// queue fed, rasterizes the aligned observations, and forwards the plan.
pub struct GridSdvPolicy<P: crate::policy::GridPolicy> {
    pub inner: P,
    history: crate::policy::HistoryQueue,
    primed: bool,
}

impl<P: crate::policy::GridPolicy> GridSdvPolicy<P> {
    pub fn new(inner: P) -> Self {
        GridSdvPolicy {
            inner,
            history: crate::policy::HistoryQueue::new(),
            primed: false,
        }
    }
}

impl<P: crate::policy::GridPolicy> SdvPolicy for GridSdvPolicy<P> {
    fn plan(&mut self, view: &WorldView<'_>) -> WaypointPlan {
        use crate::policy::{AgentObs, SceneObs};
        let obs = SceneObs {
            time: view.t,
            agents: view
                .states
                .iter()
                .zip(view.config.agents.iter())
                .enumerate()
                .map(|(i, (st, ag))| AgentObs {
                    id: i as u32,
                    state: *st,
                    dims: ag.dims,
                })
                .collect(),
        };
        if !self.primed {
            // back-extrapolate the first observation so the policy can act
            // from the first tick
            for k in (1..=4).rev() {
                let dt = k as f64 * SIM_DT;
                let past = SceneObs {
                    time: view.t - dt,
                    agents: obs
                        .agents
                        .iter()
                        .map(|a| {
                            let back = a.state.pos() - a.state.dir() * (a.state.speed * dt);
                            AgentObs {
                                id: a.id,
                                state: VehicleState::new(
                                    back.x,
                                    back.y,
                                    a.state.heading,
                                    a.state.speed,
                                ),
                                dims: a.dims,
                            }
                        })
                        .collect(),
                };
                self.history.push(past);
            }
            self.primed = true;
        }
        self.history.push(obs);
        let aligned = match self.history.resample(view.t) {
            Ok(a) => a,
            Err(_) => return WaypointPlan::standstill(),
        };
        let grid = rasterize_observations(&aligned, view);
        self.inner.act(&grid)
    }
}

/// Build the raster scene from three aligned observations (now, -0.2, -0.4).
pub fn rasterize_observations(
    aligned: &[crate::policy::SceneObs; 3],
    view: &WorldView<'_>,
) -> crate::raster::BevGrid {
    let sdv_states = [
        aligned[0].agents[0].state,
        aligned[1].agents[0].state,
        aligned[2].agents[0].state,
    ];
    let mut traffic: Vec<([VehicleState; 3], VehicleDims)> = Vec::new();
    for a in aligned[0].agents.iter().skip(1) {
        let find = |obs: &crate::policy::SceneObs| {
            obs.agents
                .iter()
                .find(|o| o.id == a.id)
                .map(|o| o.state)
                .unwrap_or(a.state)
        };
        traffic.push(([a.state, find(&aligned[1]), find(&aligned[2])], a.dims));
    }
    let scene = crate::raster::RasterScene {
        sdv: sdv_states,
        sdv_dims: view.config.agents[0].dims,
        traffic: &traffic,
        route: view.sdv_driver.path.path(),
        route_width: view.sdv_driver.path.lane_width(),
    };
    crate::raster::rasterize(&scene, &view.config.map)
}

/// Episode log as newline-delimited `tick agent_id x y heading speed` records.
pub fn episode_log_lines(result: &EpisodeResult) -> String {
    let mut out = String::new();
    for (tick, rec) in result.state_log.iter().enumerate() {
        for (id, st) in rec.states.iter().enumerate() {
            out.push_str(&format!(
                "{tick} {id} {} {} {} {}\n",
                st.x, st.y, st.heading, st.speed
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obb_identical_poses_collide() {
        let d = VehicleDims::car();
        let s = VehicleState::new(3.0, 1.0, 0.4, 0.0);
        assert!(detect_collision(&s, &d, &s, &d));
    }

    #[test]
    fn obb_far_apart_do_not_collide() {
        let d = VehicleDims::car();
        let a = VehicleState::new(0.0, 0.0, 0.0, 0.0);
        let b = VehicleState::new(100.0, 0.0, 0.0, 0.0);
        assert!(!detect_collision(&a, &d, &b, &d));
    }

    #[test]
    fn obb_agrees_with_containment_oracle_near_touch() {
        // Monte-Carlo oracle: dense point sampling of one box tested against
        // the other box's half-planes
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let da = VehicleDims::new(4.0, 2.0);
        let db = VehicleDims::new(5.0, 2.2);
        let mut checked = 0;
        for _ in 0..4000 {
            let a = VehicleState::new(0.0, 0.0, rng.gen_range(-3.1..3.1), 0.0);
            let b = VehicleState::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-3.1..3.1),
                0.0,
            );
            let got = detect_collision(&a, &da, &b, &db);
            let oracle = oracle_overlap(&a, &da, &b, &db, 60);
            // ignore near-tangent cases where sampling density decides
            if got != oracle {
                let margin = sat_margin(&a, &da, &b, &db);
                assert!(
                    margin.abs() < 0.08,
                    "disagreement with margin {margin}: {a:?} {b:?}"
                );
            } else {
                checked += 1;
            }
        }
        assert!(checked > 3500);
    }

    fn corners(s: &VehicleState, d: &VehicleDims) -> [Vec2; 4] {
        let dir = s.dir();
        let left = dir.perp_left();
        let hl = d.length / 2.0;
        let hw = d.width / 2.0;
        [
            s.pos() + dir * hl + left * hw,
            s.pos() + dir * hl - left * hw,
            s.pos() - dir * hl + left * hw,
            s.pos() - dir * hl - left * hw,
        ]
    }

    fn point_in_obb(p: Vec2, s: &VehicleState, d: &VehicleDims) -> bool {
        let rel = (p - s.pos()).rotated(-s.heading);
        rel.x.abs() <= d.length / 2.0 && rel.y.abs() <= d.width / 2.0
    }

    /// Dense grid sampling of box A, plus corner and edge cross checks.
    fn oracle_overlap(
        a: &VehicleState,
        da: &VehicleDims,
        b: &VehicleState,
        db: &VehicleDims,
        n: usize,
    ) -> bool {
        for i in 0..=n {
            for j in 0..=n {
                let u = (i as f64 / n as f64 - 0.5) * da.length;
                let v = (j as f64 / n as f64 - 0.5) * da.width;
                let p = a.pos() + Vec2::new(u, v).rotated(a.heading);
                if point_in_obb(p, b, db) {
                    return true;
                }
            }
        }
        // also sample box B against A in case B is smaller in projection
        for i in 0..=n {
            for j in 0..=n {
                let u = (i as f64 / n as f64 - 0.5) * db.length;
                let v = (j as f64 / n as f64 - 0.5) * db.width;
                let p = b.pos() + Vec2::new(u, v).rotated(b.heading);
                if point_in_obb(p, a, da) {
                    return true;
                }
            }
        }
        let _ = corners(a, da);
        false
    }

    /// Signed separation margin: max over SAT axes of (distance - radii sum).
    fn sat_margin(a: &VehicleState, da: &VehicleDims, b: &VehicleState, db: &VehicleDims) -> f64 {
        let axes = [
            a.dir(),
            a.dir().perp_left(),
            b.dir(),
            b.dir().perp_left(),
        ];
        let diff = b.pos() - a.pos();
        axes.iter()
            .map(|axis| {
                let ra = da.length / 2.0 * axis.dot(a.dir()).abs()
                    + da.width / 2.0 * axis.dot(a.dir().perp_left()).abs();
                let rb = db.length / 2.0 * axis.dot(b.dir()).abs()
                    + db.width / 2.0 * axis.dot(b.dir().perp_left()).abs();
                diff.dot(*axis).abs() - (ra + rb)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
