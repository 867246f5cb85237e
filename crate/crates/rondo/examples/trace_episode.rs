//! Episode tracer: runs one scenario with the expert and prints a per-second
//! digest of every agent, for debugging simulator behaviour.
//!
//! Usage: cargo run -p rondo --example trace_episode -- <kind> <seed>

use rondo::dynamics::RouteDriver;
use rondo::scenario::{check_success, default_roundabout, default_rural, sample_scenario, ScenarioKind};
use rondo::sim::{run_episode, ExpertSdvPolicy, TickHooks};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = ScenarioKind::parse(args.get(1).map(|s| s.as_str()).unwrap_or("yield"))
        .expect("unknown scenario kind");
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);

    let map = if kind.needs_roundabout() {
        default_roundabout(seed / 7).unwrap()
    } else {
        default_rural(seed / 7).unwrap()
    };
    let config = sample_scenario(kind, &map, seed).unwrap();
    println!("map {} agents {}", map.id, config.agents.len());
    for (i, a) in config.agents.iter().enumerate() {
        println!(
            "  agent {i}: route {:?} pos ({:.1},{:.1}) v {:.1} script {:?}",
            a.route.lane_sequence, a.state.x, a.state.y, a.state.speed, a.script
        );
    }

    let mut policy = ExpertSdvPolicy;
    let result = run_episode(&config, &mut policy, &mut TickHooks::none());

    let drivers: Vec<Option<RouteDriver>> = config
        .agents
        .iter()
        .map(|a| RouteDriver::new(&config.map, &a.route, Some(a.state.pos())).ok())
        .collect();

    for rec in result.state_log.iter().step_by(10) {
        print!("t={:5.1}", rec.t);
        for (i, st) in rec.states.iter().enumerate() {
            let sd = drivers[i]
                .as_ref()
                .map(|d| d.path.project(st.pos()))
                .unwrap_or((0.0, 0.0));
            print!(
                " | {i}: s={:6.1} d={:5.2} v={:4.1}",
                sd.0, sd.1, st.speed
            );
        }
        println!();
    }
    println!(
        "termination {:?} after {:.1}s avg_speed {:.2} collisions {} offroad {} success {}",
        result.termination,
        result.duration,
        result.avg_speed,
        result.collision_count,
        result.offroad_event_count,
        check_success(&config, &result)
    );
    if let Some(last) = result.state_log.last() {
        for i in 0..last.states.len() {
            for j in i + 1..last.states.len() {
                if rondo::sim::detect_collision(
                    &last.states[i],
                    &config.agents[i].dims,
                    &last.states[j],
                    &config.agents[j].dims,
                ) {
                    println!(
                        "overlap between {i} ({:.1},{:.1} h{:.2} v{:.1}) and {j} ({:.1},{:.1} h{:.2} v{:.1})",
                        last.states[i].x, last.states[i].y, last.states[i].heading, last.states[i].speed,
                        last.states[j].x, last.states[j].y, last.states[j].heading, last.states[j].speed,
                    );
                }
            }
        }
    }
}
