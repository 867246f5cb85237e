//! Generators for the targeted training/evaluation scenarios and the
//! closed-loop success criteria.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::ByteWriter;
use crate::dynamics::{Agent, AgentRole, AgentScript, IdmParams, VehicleDims, VehicleState};
use crate::geom::{RoadMap, Route};
use crate::sim::{obb_overlap, EpisodeResult, GOAL_RADIUS, MOVED_SPEED, STOP_SPEED};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario `{kind}` is incompatible with map `{map}`")]
    IncompatibleMap { kind: String, map: String },
    #[error("could not place agents: {0}")]
    SpawnFailure(String),
}

/// The seven data-generation scenarios plus the evaluation-only variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    SlowDownBehind,
    IncreaseGap,
    StopBehind,
    DriveoffStop,
    Yield,
    YieldWithLead,
    RandomTraffic,
    HighSpeedRural,
    RandomWithParkedCars,
    ChallengingStopping,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::SlowDownBehind,
        ScenarioKind::IncreaseGap,
        ScenarioKind::StopBehind,
        ScenarioKind::DriveoffStop,
        ScenarioKind::Yield,
        ScenarioKind::YieldWithLead,
        ScenarioKind::RandomTraffic,
        ScenarioKind::HighSpeedRural,
        ScenarioKind::RandomWithParkedCars,
        ScenarioKind::ChallengingStopping,
    ];

    /// The scenarios used for data generation (the table of seven).
    pub const DATA_GENERATION: [ScenarioKind; 7] = [
        ScenarioKind::SlowDownBehind,
        ScenarioKind::IncreaseGap,
        ScenarioKind::StopBehind,
        ScenarioKind::DriveoffStop,
        ScenarioKind::Yield,
        ScenarioKind::YieldWithLead,
        ScenarioKind::RandomTraffic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::SlowDownBehind => "slow-down-behind",
            ScenarioKind::IncreaseGap => "increase-gap",
            ScenarioKind::StopBehind => "stop-behind",
            ScenarioKind::DriveoffStop => "driveoff-stop",
            ScenarioKind::Yield => "yield",
            ScenarioKind::YieldWithLead => "yield-with-lead",
            ScenarioKind::RandomTraffic => "random-traffic",
            ScenarioKind::HighSpeedRural => "high-speed-rural",
            ScenarioKind::RandomWithParkedCars => "random-with-parked-cars",
            ScenarioKind::ChallengingStopping => "challenging-stopping",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioKind> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }

    pub fn needs_roundabout(&self) -> bool {
        !matches!(self, ScenarioKind::HighSpeedRural)
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What counts as success, per the scenario's expected behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessCriterion {
    /// Navigate the route to the goal without infractions.
    GoToGoal,
    /// Come to a complete stop in-lane.
    StopInLane,
    /// Restore a safe follow distance and hold it.
    IncreaseGapRestored,
}

/// A fully specified episode: map, agents (index 0 is the SDV), criterion.
#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub map: Arc<RoadMap>,
    pub agents: Vec<Agent>,
    pub criterion: SuccessCriterion,
    pub max_duration: f64,
    pub seed: u64,
    pub kind: ScenarioKind,
}

impl EpisodeConfig {
    /// Canonical byte encoding, used by determinism checks.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.magic(b"RONDOEPC");
        w.u64(self.seed);
        w.str(self.kind.name());
        w.str(&self.map.id);
        w.u64(crate::codec::fnv1a(&crate::geom::io::encode_map(&self.map)));
        w.f64(self.max_duration);
        w.u8(match self.criterion {
            SuccessCriterion::GoToGoal => 0,
            SuccessCriterion::StopInLane => 1,
            SuccessCriterion::IncreaseGapRestored => 2,
        });
        w.u32(self.agents.len() as u32);
        for a in &self.agents {
            w.f64(a.state.x);
            w.f64(a.state.y);
            w.f64(a.state.heading);
            w.f64(a.state.speed);
            w.f64(a.dims.length);
            w.f64(a.dims.width);
            w.f64(a.idm.v0);
            w.u32(a.route.lane_sequence.len() as u32);
            for l in &a.route.lane_sequence {
                w.str(l);
            }
            w.f64(a.route.goal_s);
            match &a.script {
                AgentScript::Idm => w.u8(0),
                AgentScript::Parked => w.u8(1),
                AgentScript::HoldAdvanceHold { hold_s, advance_m } => {
                    w.u8(2);
                    w.f64(*hold_s);
                    w.f64(*advance_m);
                }
            }
        }
        w.into_bytes()
    }
}

struct MapView<'a> {
    map: &'a RoadMap,
    entries: Vec<String>,
    exits: Vec<String>,
    has_ring: bool,
}

impl<'a> MapView<'a> {
    fn of(map: &'a RoadMap) -> Self {
        let mut entries: Vec<String> = map
            .lanes
            .iter()
            .filter(|l| l.id.starts_with("entry"))
            .map(|l| l.id.clone())
            .collect();
        entries.sort();
        let mut exits: Vec<String> = map
            .lanes
            .iter()
            .filter(|l| l.id.starts_with("exit"))
            .map(|l| l.id.clone())
            .collect();
        exits.sort();
        MapView {
            map,
            entries,
            exits,
            has_ring: map.lane("ring").is_some(),
        }
    }
}

const SDV_DIMS: VehicleDims = VehicleDims {
    length: 4.5,
    width: 1.9,
};

/// Sample a deterministic episode for the given kind on the given map.
pub fn sample_scenario(
    kind: ScenarioKind,
    map: &Arc<RoadMap>,
    seed: u64,
) -> Result<EpisodeConfig, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ crate::codec::fnv1a(kind.name().as_bytes()));
    let view = MapView::of(map);
    if kind.needs_roundabout() && (!view.has_ring || view.entries.is_empty()) {
        return Err(ScenarioError::IncompatibleMap {
            kind: kind.name().into(),
            map: map.id.clone(),
        });
    }
    if !kind.needs_roundabout() && map.lane("fwd").is_none() {
        return Err(ScenarioError::IncompatibleMap {
            kind: kind.name().into(),
            map: map.id.clone(),
        });
    }

    let mut config = match kind {
        ScenarioKind::SlowDownBehind => lead_follow_scenario(&view, &mut rng, LeadFollowKind::SlowDown),
        ScenarioKind::IncreaseGap => lead_follow_scenario(&view, &mut rng, LeadFollowKind::ShortGap),
        ScenarioKind::StopBehind => stop_scenario(&view, &mut rng, false),
        ScenarioKind::ChallengingStopping => stop_scenario(&view, &mut rng, true),
        ScenarioKind::DriveoffStop => driveoff_scenario(&view, &mut rng),
        ScenarioKind::Yield => yield_scenario(&view, &mut rng, false),
        ScenarioKind::YieldWithLead => yield_scenario(&view, &mut rng, true),
        ScenarioKind::RandomTraffic => random_traffic_scenario(&view, &mut rng, false),
        ScenarioKind::RandomWithParkedCars => random_traffic_scenario(&view, &mut rng, true),
        ScenarioKind::HighSpeedRural => rural_scenario(&view, &mut rng),
    }?;

    // the SDV navigation goal and traffic dimensions vary with the seed;
    // traffic dims are resampled here, scene augmentations may resample again
    for a in config.agents.iter_mut().skip(1) {
        a.dims = VehicleDims::new(rng.gen_range(4.0..=6.0), rng.gen_range(1.0..=3.0));
    }

    resolve_spawn_overlaps(&mut config)?;

    let cfg = EpisodeConfig {
        map: Arc::clone(map),
        seed,
        kind,
        ..config
    };
    Ok(cfg)
}

enum LeadFollowKind {
    SlowDown,
    ShortGap,
}

fn sdv_route(view: &MapView<'_>, rng: &mut ChaCha8Rng) -> Route {
    let entry = view.entries[rng.gen_range(0..view.entries.len())].clone();
    let mut exit = view.exits[rng.gen_range(0..view.exits.len())].clone();
    // avoid the u-turn back onto the same arm
    let arm = entry.trim_start_matches("entry").to_string();
    if exit.trim_start_matches("exit") == arm && view.exits.len() > 1 {
        let alt: Vec<&String> = view
            .exits
            .iter()
            .filter(|e| e.trim_start_matches("exit") != arm)
            .collect();
        exit = alt[rng.gen_range(0..alt.len())].clone();
    }
    let goal_s = view.map.lane(&exit).unwrap().centreline.length();
    Route {
        lane_sequence: vec![entry, "ring".into(), exit],
        goal_s,
    }
}

fn state_on_route(view: &MapView<'_>, route: &Route, s: f64, speed: f64) -> VehicleState {
    let path = view.map.route_path(route).expect("route resolves");
    let pos = path.point_at(s);
    let heading = path.heading_at(s);
    VehicleState::new(pos.x, pos.y, heading, speed)
}

fn sdv_agent(view: &MapView<'_>, route: Route, s: f64, speed: f64) -> Agent {
    let state = state_on_route(view, &route, s, speed);
    Agent {
        state,
        dims: SDV_DIMS,
        route,
        idm: IdmParams::default().with_v0(crate::geom::LimitClass::Mid.speed()),
        role: AgentRole::Sdv,
        script: AgentScript::Idm,
    }
}

fn traffic_idm(view: &MapView<'_>, lane_id: &str, rng: &mut ChaCha8Rng) -> IdmParams {
    let base = view
        .map
        .lane(lane_id)
        .map(|l| l.limit_class.speed())
        .unwrap_or(crate::geom::LimitClass::Mid.speed());
    IdmParams::default().with_v0(base * rng.gen_range(0.75..=1.1))
}

fn partial_config(agents: Vec<Agent>, criterion: SuccessCriterion) -> EpisodeConfig {
    EpisodeConfig {
        map: Arc::new(RoadMap::new(String::new(), vec![], vec![], vec![], vec![])),
        agents,
        criterion,
        max_duration: 60.0,
        seed: 0,
        kind: ScenarioKind::RandomTraffic,
    }
}

fn lead_follow_scenario(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
    kind: LeadFollowKind,
) -> Result<EpisodeConfig, ScenarioError> {
    let route = sdv_route(view, rng);
    let entry_len = view.map.lane(&route.lane_sequence[0]).unwrap().centreline.length();
    let (sdv_speed, gap, lead_speed) = match kind {
        LeadFollowKind::SlowDown => (
            rng.gen_range(10.0..=13.0),
            rng.gen_range(13.0..=16.0),
            rng.gen_range(3.0..=6.0),
        ),
        LeadFollowKind::ShortGap => (
            rng.gen_range(8.0..=11.0),
            rng.gen_range(4.0..=8.0),
            rng.gen_range(5.0..=7.5),
        ),
    };
    let sdv_s = entry_len * 0.08;
    let sdv = sdv_agent(view, route.clone(), sdv_s, sdv_speed);
    let lead_s = sdv_s + gap + SDV_DIMS.length; // centre-to-centre
    let lead_state = state_on_route(view, &route, lead_s, lead_speed);
    let lead = Agent {
        state: lead_state,
        dims: VehicleDims::car(),
        route: route.clone(),
        idm: IdmParams::default().with_v0(lead_speed),
        role: AgentRole::Traffic,
        script: AgentScript::Idm,
    };
    Ok(partial_config(
        vec![sdv, lead],
        SuccessCriterion::IncreaseGapRestored,
    ))
}

fn stop_scenario(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
    challenging: bool,
) -> Result<EpisodeConfig, ScenarioError> {
    let route = sdv_route(view, rng);
    let entry_len = view.map.lane(&route.lane_sequence[0]).unwrap().centreline.length();
    let (sdv_speed, ahead) = if challenging {
        (rng.gen_range(10.5..=13.0), rng.gen_range(18.0..=28.0))
    } else {
        (rng.gen_range(8.0..=12.0), rng.gen_range(25.0..=42.0))
    };
    let sdv_s = entry_len * 0.06;
    let blocker_s = (sdv_s + ahead + SDV_DIMS.length).min(entry_len - 8.0);
    let sdv = sdv_agent(view, route.clone(), sdv_s, sdv_speed);
    let blocker_state = state_on_route(view, &route, blocker_s, 0.0);
    let blocker = Agent {
        state: blocker_state,
        dims: VehicleDims::car(),
        route: route.clone(),
        idm: IdmParams::default().with_v0(0.5),
        role: AgentRole::Traffic,
        script: AgentScript::Parked,
    };
    Ok(partial_config(vec![sdv, blocker], SuccessCriterion::StopInLane))
}

fn driveoff_scenario(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeConfig, ScenarioError> {
    let route = sdv_route(view, rng);
    let entry_len = view.map.lane(&route.lane_sequence[0]).unwrap().centreline.length();
    let sdv_s = entry_len * 0.15;
    let gap = rng.gen_range(2.0..=2.5);
    let lead_s = sdv_s + gap + SDV_DIMS.length;
    let sdv = sdv_agent(view, route.clone(), sdv_s, 0.0);
    let lead_state = state_on_route(view, &route, lead_s, 0.0);
    let lead = Agent {
        state: lead_state,
        dims: VehicleDims::car(),
        route: route.clone(),
        idm: IdmParams::default().with_v0(3.0),
        role: AgentRole::Traffic,
        script: AgentScript::HoldAdvanceHold {
            hold_s: rng.gen_range(3.0..=6.0),
            advance_m: rng.gen_range(3.0..=8.0),
        },
    };
    Ok(partial_config(vec![sdv, lead], SuccessCriterion::StopInLane))
}

fn ring_vehicle(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
    ring_s: f64,
    speed: f64,
) -> Option<Agent> {
    let ring = view.map.lane("ring")?;
    let ring_len = ring.centreline.length();
    let s = ring_s.rem_euclid(ring_len);
    let pos = ring.centreline.point_at(s);
    let heading = ring.centreline.heading_at(s);
    // choose an exit at least a quarter ring ahead so the vehicle stays
    // circulating through the conflict region
    let mut best: Vec<&String> = Vec::new();
    for exit in &view.exits {
        let exit_lane = view.map.lane(exit)?;
        let (exit_s, _) = ring.centreline.project(exit_lane.centreline.first());
        let ahead = (exit_s - s).rem_euclid(ring_len);
        if ahead > ring_len * 0.25 {
            best.push(exit);
        }
    }
    if best.is_empty() {
        best = view.exits.iter().collect();
    }
    let exit = best[rng.gen_range(0..best.len())].clone();
    let goal_s = view.map.lane(&exit).unwrap().centreline.length();
    Some(Agent {
        state: VehicleState::new(pos.x, pos.y, heading, speed),
        dims: VehicleDims::car(),
        route: Route {
            lane_sequence: vec!["ring".into(), exit],
            goal_s,
        },
        idm: traffic_idm(view, "ring", rng),
        role: AgentRole::Traffic,
        script: AgentScript::Idm,
    })
}

fn yield_scenario(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
    with_lead: bool,
) -> Result<EpisodeConfig, ScenarioError> {
    let route = sdv_route(view, rng);
    let entry_id = route.lane_sequence[0].clone();
    let entry = view.map.lane(&entry_id).unwrap();
    let entry_len = entry.centreline.length();
    let sdv_speed = rng.gen_range(7.0..=11.0);
    let sdv_s = entry_len * rng.gen_range(0.15..=0.35);
    let sdv = sdv_agent(view, route.clone(), sdv_s, sdv_speed);
    let mut agents = vec![sdv];

    if with_lead {
        let lead_s = sdv_s + rng.gen_range(12.0..=20.0);
        let lead_state = state_on_route(view, &route, lead_s, rng.gen_range(4.0..=7.0));
        agents.push(Agent {
            state: lead_state,
            dims: VehicleDims::car(),
            route: route.clone(),
            idm: traffic_idm(view, &entry_id, rng),
            role: AgentRole::Traffic,
            script: AgentScript::Idm,
        });
    }

    // crossing traffic timed to reach the conflict point around the SDV's
    // arrival, forcing a genuine yield decision
    let ring = view.map.lane("ring").unwrap();
    let (conflict_s, _) = ring.centreline.project(entry.centreline.last());
    let n_cross = rng.gen_range(1..=3);
    for k in 0..n_cross {
        let speed = rng.gen_range(4.5..=7.0);
        let behind = rng.gen_range(4.0..=16.0) + k as f64 * rng.gen_range(10.0..=18.0);
        if let Some(v) = ring_vehicle(view, rng, conflict_s - behind, speed) {
            agents.push(v);
        }
    }
    Ok(partial_config(agents, SuccessCriterion::GoToGoal))
}

fn random_traffic_scenario(
    view: &MapView<'_>,
    rng: &mut ChaCha8Rng,
    with_parked: bool,
) -> Result<EpisodeConfig, ScenarioError> {
    let route = sdv_route(view, rng);
    let entry_id = route.lane_sequence[0].clone();
    let entry_len = view.map.lane(&entry_id).unwrap().centreline.length();
    let sdv_speed = rng.gen_range(6.0..=12.0);
    let sdv_s = entry_len * rng.gen_range(0.05..=0.3);
    let sdv = sdv_agent(view, route.clone(), sdv_s, sdv_speed);
    let mut agents = vec![sdv];

    let n_vehicles = rng.gen_range(0..=8);
    // bias one vehicle onto the SDV approach so interactions are common
    let lead_on_approach = n_vehicles > 0 && rng.gen_bool(0.7);
    if lead_on_approach {
        let lead_s = sdv_s + rng.gen_range(15.0..=35.0);
        if lead_s < entry_len - 5.0 {
            let lead_state = state_on_route(view, &route, lead_s, rng.gen_range(2.0..=8.0));
            agents.push(Agent {
                state: lead_state,
                dims: VehicleDims::car(),
                route: route.clone(),
                idm: traffic_idm(view, &entry_id, rng),
                role: AgentRole::Traffic,
                script: AgentScript::Idm,
            });
        }
    }

    let remaining = n_vehicles - (agents.len() - 1).min(n_vehicles);
    let ring_len = view.map.lane("ring").unwrap().centreline.length();
    for _ in 0..remaining {
        if rng.gen_bool(0.55) {
            // circulating vehicle
            let s = rng.gen_range(0.0..ring_len);
            let speed = rng.gen_range(3.0..=7.0);
            if let Some(v) = ring_vehicle(view, rng, s, speed) {
                agents.push(v);
            }
        } else {
            // vehicle approaching on a random arm
            let entry = view.entries[rng.gen_range(0..view.entries.len())].clone();
            let lane_len = view.map.lane(&entry).unwrap().centreline.length();
            let exits: Vec<&String> = view.exits.iter().collect();
            let exit = exits[rng.gen_range(0..exits.len())].clone();
            let goal_s = view.map.lane(&exit).unwrap().centreline.length();
            let r = Route {
                lane_sequence: vec![entry.clone(), "ring".into(), exit],
                goal_s,
            };
            let s = rng.gen_range(0.1..=0.75) * lane_len;
            let state = state_on_route(view, &r, s, rng.gen_range(3.0..=10.0));
            agents.push(Agent {
                state,
                dims: VehicleDims::car(),
                route: r,
                idm: traffic_idm(view, &entry, rng),
                role: AgentRole::Traffic,
                script: AgentScript::Idm,
            });
        }
    }

    let mut config = partial_config(agents, SuccessCriterion::GoToGoal);
    if with_parked {
        let count = rng.gen_range(2..=8);
        crate::raster::aug_offroad_vehicles(&mut config, view.map, count, rng);
    }
    Ok(config)
}

fn rural_scenario(view: &MapView<'_>, rng: &mut ChaCha8Rng) -> Result<EpisodeConfig, ScenarioError> {
    let lane = view.map.lane("fwd").unwrap();
    let len = lane.centreline.length();
    let route = Route {
        lane_sequence: vec!["fwd".into()],
        goal_s: len - 5.0,
    };
    let sdv_speed = rng.gen_range(12.0..=18.0);
    let sdv_s = rng.gen_range(5.0..=15.0);
    let mut sdv = sdv_agent(view, route.clone(), sdv_s, sdv_speed);
    sdv.idm.v0 = crate::geom::LimitClass::High.speed();
    let mut agents = vec![sdv];
    if rng.gen_bool(0.5) {
        let ahead = rng.gen_range(40.0..=80.0);
        let speed = rng.gen_range(7.0..=11.0);
        let state = state_on_route(view, &route, (sdv_s + ahead).min(len - 30.0), speed);
        agents.push(Agent {
            state,
            dims: VehicleDims::car(),
            route: route.clone(),
            idm: IdmParams::default().with_v0(speed),
            role: AgentRole::Traffic,
            script: AgentScript::Idm,
        });
    }
    let mut config = partial_config(agents, SuccessCriterion::GoToGoal);
    config.max_duration = 80.0;
    Ok(config)
}

/// Nudge or drop traffic that spawned overlapping; the SDV always stays.
fn resolve_spawn_overlaps(config: &mut EpisodeConfig) -> Result<(), ScenarioError> {
    let mut kept: Vec<Agent> = Vec::with_capacity(config.agents.len());
    for (i, agent) in config.agents.iter().enumerate() {
        let clear = kept.iter().all(|other| {
            !obb_overlap(
                agent.state.pos(),
                agent.state.heading,
                &inflated(&agent.dims),
                other.state.pos(),
                other.state.heading,
                &inflated(&other.dims),
            )
        });
        if clear {
            kept.push(agent.clone());
        } else if i == 0 {
            return Err(ScenarioError::SpawnFailure("SDV spawn overlaps".into()));
        } else {
            log::warn!("dropping overlapping spawn of agent {i}");
        }
    }
    config.agents = kept;
    Ok(())
}

fn inflated(d: &VehicleDims) -> VehicleDims {
    VehicleDims::new(d.length + 1.0, d.width + 0.3)
}

/// Post-hoc success evaluation from the episode logs.
pub fn check_success(config: &EpisodeConfig, result: &EpisodeResult) -> bool {
    match config.criterion {
        SuccessCriterion::GoToGoal => {
            if result.collision_count > 0 || result.offroad_event_count > 0 {
                return false;
            }
            let driver = match crate::dynamics::RouteDriver::new(
                &config.map,
                &config.agents[0].route,
                Some(config.agents[0].state.pos()),
            ) {
                Ok(d) => d,
                Err(_) => return false,
            };
            let last = match result.state_log.last() {
                Some(r) => r,
                None => return false,
            };
            let (s, d) = driver.path.project(last.states[0].pos());
            s >= driver.path.length() - GOAL_RADIUS && d.abs() < driver.path.lane_width()
        }
        SuccessCriterion::StopInLane => {
            if result.collision_count > 0 {
                return false;
            }
            let last = match result.state_log.last() {
                Some(r) => r,
                None => return false,
            };
            let moved = result
                .state_log
                .iter()
                .any(|r| r.states[0].speed >= MOVED_SPEED);
            if !moved || last.states[0].speed >= STOP_SPEED {
                return false;
            }
            let driver = match crate::dynamics::RouteDriver::new(
                &config.map,
                &config.agents[0].route,
                Some(config.agents[0].state.pos()),
            ) {
                Ok(d) => d,
                Err(_) => return false,
            };
            let (_, d) = driver.path.project(last.states[0].pos());
            d.abs() < driver.path.lane_width() / 2.0
        }
        SuccessCriterion::IncreaseGapRestored => {
            if result.collision_count > 0 {
                return false;
            }
            let idm = &config.agents[0].idm;
            let hold_needed = (crate::sim::GAP_HOLD_S / crate::dynamics::SIM_DT).round() as usize;
            let mut hold = 0usize;
            for (rec, gap) in result.state_log.iter().zip(result.gap_log.iter()) {
                let v = rec.states[0].speed;
                let safe = match gap {
                    Some(g) => *g >= idm.desired_gap(v, v),
                    None => true,
                };
                if safe {
                    hold += 1;
                    if hold >= hold_needed {
                        return true;
                    }
                } else {
                    hold = 0;
                }
            }
            false
        }
    }
}

/// Convenience: synthesize the default desk-scale roundabout for a seed.
/// Ring radius and arm geometry vary mildly with the seed.
pub fn default_roundabout(seed: u64) -> Result<Arc<RoadMap>, crate::geom::GeomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arm_count = if rng.gen_bool(0.5) { 3 } else { 4 };
    let ring_radius = rng.gen_range(13.0..=17.0);
    let arm_length = rng.gen_range(55.0..=70.0);
    let mut params =
        crate::geom::RoundaboutParams::symmetric(arm_count, ring_radius, arm_length, 3.5);
    // jitter arm headings a little, keeping them distinct
    for h in params.arm_headings.iter_mut() {
        *h += rng.gen_range(-0.15..=0.15);
    }
    Ok(Arc::new(crate::geom::synthesize_roundabout(&params)?))
}

/// Default desk-scale rural road for a seed.
pub fn default_rural(seed: u64) -> Result<Arc<RoadMap>, crate::geom::GeomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = rng.gen_range(500.0..=700.0);
    let n = 24;
    let profile: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-0.003..=0.003))
        .collect();
    Ok(Arc::new(crate::geom::synthesize_rural_road(length, &profile)?))
}
