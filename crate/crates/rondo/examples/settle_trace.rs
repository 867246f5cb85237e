fn main() {
    use rondo::scenario::{default_roundabout, sample_scenario, ScenarioKind};
    use rondo::sim::{run_episode, ExpertSdvPolicy, TickHooks};
    use rondo::dynamics::RouteDriver;
    let map = default_roundabout(9).unwrap();
    let mut config = sample_scenario(ScenarioKind::RandomTraffic, &map, 777).unwrap();
    config.agents.truncate(1);
    let mut policy = ExpertSdvPolicy;
    let result = run_episode(&config, &mut policy, &mut TickHooks::none());
    let driver = RouteDriver::new(&config.map, &config.agents[0].route, None).unwrap();
    let mut max_d = 0.0f64;
    let mut max_t = 0.0;
    for rec in result.state_log.iter().skip(20) {
        let (s, d) = driver.path.project(rec.states[0].pos());
        if d.abs() > max_d { max_d = d.abs(); max_t = rec.t; }
        if (rec.t * 10.0).round() as i64 % 5 == 0 {
            println!("t={:5.1} s={:6.1} d={:+.2} v={:.1}", rec.t, s, d, rec.states[0].speed);
        }
    }
    println!("termination {:?}; max |d| = {:.2} at t={:.1}", result.termination, max_d, max_t);
}
