//! Open-loop and closed-loop evaluation metrics, atomic snippet extraction,
//! and report generation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{VehicleDims, VehicleState};
use crate::geom::Vec2;
use crate::policy::{WaypointPlan, PLAN_DT, PLAN_STEPS};
use crate::scenario::{check_success, sample_scenario, EpisodeConfig, ScenarioKind};
use crate::sim::{run_episode, SdvPolicy, Termination, TickHooks};

/// Gap threshold of the standstill/stopping classifiers, metres
/// (0.1 m per 0.2 s step = 0.5 m/s).
pub const STANDSTILL_GAP: f64 = 0.1;

/// One planning record: when the plan was made and from which pose.
#[derive(Debug, Clone)]
pub struct PlanRecord {
    pub tau: f64,
    pub plan: WaypointPlan,
    pub sdv_pose: VehicleState,
}

/// Plans logged per tick over an episode or snippet.
#[derive(Debug, Clone, Default)]
pub struct PlanLog {
    pub records: Vec<PlanRecord>,
}

/// Temporal plan instability.
///
/// Compares the endpoint of the plan made at `tau` with the point 0.2 s short
/// of the horizon of the plan made one plan step (0.2 s) later, both expressed
/// in the map frame through the logged SDV poses. Returns per-pair values and
/// the number of skipped pairs.
pub fn temporal_plan_instability(log: &PlanLog) -> (Vec<f64>, usize) {
    let mut values = Vec::new();
    let mut skipped = 0;
    let records = &log.records;
    for i in 0..records.len() {
        let a = &records[i];
        // the next planning tick 0.2 s later
        let target = a.tau + PLAN_DT;
        let b = match records[i..]
            .iter()
            .find(|r| (r.tau - target).abs() < 1e-6)
        {
            Some(b) => b,
            None => {
                if records.last().map(|r| r.tau > target).unwrap_or(false) {
                    skipped += 1;
                }
                continue;
            }
        };
        let end_a = a.sdv_pose.pos() + a.plan.points[PLAN_STEPS - 1].rotated(a.sdv_pose.heading);
        let end_b = b.sdv_pose.pos() + b.plan.points[PLAN_STEPS - 2].rotated(b.sdv_pose.heading);
        values.push(end_a.dist(end_b));
    }
    (values, skipped)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Inverse time-to-collision of a plan against traffic frozen at planning
/// time: 1 / (k * 0.2) for the earliest waypoint k whose SDV footprint
/// overlaps any traffic footprint, 0 when the plan is collision-free.
pub fn waypoints_inverse_ttc(
    plan: &WaypointPlan,
    sdv_dims: &VehicleDims,
    traffic: &[(VehicleState, VehicleDims)],
) -> f64 {
    let mut heading = 0.0;
    let mut prev = Vec2::ZERO;
    for (k, p) in plan.points.iter().enumerate() {
        let step = *p - prev;
        if step.norm() > 1e-3 {
            heading = step.angle();
        }
        prev = *p;
        for (tstate, tdims) in traffic {
            if crate::sim::obb_overlap(*p, heading, sdv_dims, tstate.pos(), tstate.heading, tdims) {
                return 1.0 / ((k + 1) as f64 * PLAN_DT);
            }
        }
    }
    0.0
}

/// Standstill: the first waypoint gap (SDV position to waypoint 1) is under
/// the threshold.
pub fn classify_standstill(plan: &WaypointPlan) -> bool {
    plan.gaps()[0] < STANDSTILL_GAP
}

/// Stopping: the plan starts moving but some later consecutive gap falls
/// under the threshold.
pub fn classify_stopping(plan: &WaypointPlan) -> bool {
    let gaps = plan.gaps();
    gaps[0] >= STANDSTILL_GAP && gaps[1..].iter().any(|&g| g < STANDSTILL_GAP)
}

/// Atomic snippet kinds labelled in expert sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SnippetKind {
    StoppingBehind,
    KeepStanding,
    DriveOff,
    Following,
    Yielding,
}

impl SnippetKind {
    pub fn name(&self) -> &'static str {
        match self {
            SnippetKind::StoppingBehind => "stopping-behind",
            SnippetKind::KeepStanding => "keep-standing",
            SnippetKind::DriveOff => "drive-off",
            SnippetKind::Following => "following",
            SnippetKind::Yielding => "yielding",
        }
    }
}

/// A labelled time window within a source sequence.
#[derive(Debug, Clone)]
pub struct SnippetLabel {
    pub kind: SnippetKind,
    pub sequence: u32,
    /// Frame index range within the sequence, end exclusive.
    pub start: usize,
    pub end: usize,
}

/// Label 1-5 s windows with a specific driving situation, from per-frame
/// SDV speeds and leader gaps of an expert sequence.
pub fn extract_snippets(
    sequence: u32,
    speeds: &[f64],
    gaps: &[Option<f64>],
    yielding_mask: &[bool],
    tick_dt: f64,
) -> Vec<SnippetLabel> {
    let n = speeds.len();
    let min_len = (1.0 / tick_dt) as usize;
    let max_len = (5.0 / tick_dt) as usize;
    let mut out = Vec::new();
    let mut covered = vec![false; n];

    // windows trim to the uncovered part; earlier scans take priority
    let mut mark = |kind: SnippetKind, start: usize, end: usize, covered: &mut Vec<bool>| {
        let end0 = end.min(n);
        let mut s = start;
        while s < end0 && covered[s] {
            s += 1;
        }
        let mut e = s;
        while e < end0 && !covered[e] {
            e += 1;
        }
        if e - s < min_len {
            return;
        }
        let e = s + (e - s).min(max_len);
        for c in covered[s..e].iter_mut() {
            *c = true;
        }
        out.push(SnippetLabel {
            kind,
            sequence,
            start: s,
            end: e,
        });
    };

    // stopping-behind: decelerating from driving to standing with a leader
    let mut i = 0;
    while i < n {
        if speeds[i] > 2.0 && matches!(gaps[i], Some(g) if g < 45.0) {
            let horizon = (i + max_len).min(n);
            if let Some(stop) = (i..horizon).find(|&j| speeds[j] < 0.15) {
                mark(SnippetKind::StoppingBehind, i, stop + min_len / 2, &mut covered);
                i = stop + 1;
                continue;
            }
        }
        i += 1;
    }

    // drive-off: standing to driving
    let mut i = 1;
    while i < n {
        if speeds[i - 1] < 0.15 && speeds[i] >= 0.15 {
            if let Some(fast) = (i..(i + max_len).min(n)).find(|&j| speeds[j] > 1.5) {
                mark(SnippetKind::DriveOff, i, fast + 2, &mut covered);
                i = fast + 1;
                continue;
            }
        }
        i += 1;
    }

    // keep-standing: standing throughout with a close leader
    let mut i = 0;
    while i < n {
        if speeds[i] < 0.15 && matches!(gaps[i], Some(g) if g < 12.0) {
            let start = i;
            while i < n && speeds[i] < 0.15 {
                i += 1;
            }
            mark(SnippetKind::KeepStanding, start, i, &mut covered);
        } else {
            i += 1;
        }
    }

    // yielding: flagged by the generator-side gate state
    let mut i = 0;
    while i < n {
        if yielding_mask.get(i).copied().unwrap_or(false) {
            let start = i;
            while i < n && yielding_mask[i] {
                i += 1;
            }
            mark(SnippetKind::Yielding, start, i + min_len / 2, &mut covered);
        } else {
            i += 1;
        }
    }

    // following: steady driving behind a leader
    let mut i = 0;
    while i < n {
        if speeds[i] > 1.0 && matches!(gaps[i], Some(g) if g < 30.0) && !covered[i] {
            let start = i;
            while i < n && speeds[i] > 1.0 && matches!(gaps[i], Some(g) if g < 30.0) && !covered[i] {
                i += 1;
            }
            mark(SnippetKind::Following, start, i, &mut covered);
        } else {
            i += 1;
        }
    }

    out.sort_by_key(|s| (s.start, s.kind));
    out
}

/// Open-loop metrics of one plan against its frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct OpenLoopSample {
    pub ade: f64,
    pub fde: f64,
    pub inverse_ttc: f64,
    pub standstill: bool,
    pub stopping: bool,
}

pub fn open_loop_sample(
    plan: &WaypointPlan,
    label: &WaypointPlan,
    sdv_dims: &VehicleDims,
    traffic: &[(VehicleState, VehicleDims)],
) -> OpenLoopSample {
    let mut ade = 0.0;
    for (p, q) in plan.points.iter().zip(label.points.iter()) {
        ade += p.dist(*q);
    }
    ade /= PLAN_STEPS as f64;
    let fde = plan.points[PLAN_STEPS - 1].dist(label.points[PLAN_STEPS - 1]);
    OpenLoopSample {
        ade,
        fde,
        inverse_ttc: waypoints_inverse_ttc(plan, sdv_dims, traffic),
        standstill: classify_standstill(plan),
        stopping: classify_stopping(plan),
    }
}

/// Aggregated open-loop metrics per snippet kind.
#[derive(Debug, Clone, Default)]
pub struct OpenLoopRow {
    pub n_frames: usize,
    pub tpi: f64,
    pub inverse_ttc: f64,
    pub standstill_rate: f64,
    pub stopping_rate: f64,
    pub ade: f64,
    pub fde: f64,
}

#[derive(Debug, Clone, Default)]
pub struct OpenLoopReport {
    pub rows: BTreeMap<SnippetKind, OpenLoopRow>,
}

impl OpenLoopReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "snippet,frames,temporal_plan_instability,waypoints_inverse_ttc,waypoints_standstill,waypoints_stopping,ade,fde\n",
        );
        for (kind, row) in &self.rows {
            out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                kind.name(),
                row.n_frames,
                row.tpi,
                row.inverse_ttc,
                row.standstill_rate,
                row.stopping_rate,
                row.ade,
                row.fde
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<18} {:>7} {:>8} {:>8} {:>11} {:>9} {:>8} {:>8}\n",
            "snippet", "frames", "tpi", "iTTC", "standstill", "stopping", "ADE", "FDE"
        );
        for (kind, row) in &self.rows {
            out.push_str(&format!(
                "{:<18} {:>7} {:>8.3} {:>8.3} {:>11.3} {:>9.3} {:>8.3} {:>8.3}\n",
                kind.name(),
                row.n_frames,
                row.tpi,
                row.inverse_ttc,
                row.standstill_rate,
                row.stopping_rate,
                row.ade,
                row.fde
            ));
        }
        out
    }
}

/// Closed-loop rates for one scenario kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClosedLoopRow {
    pub episodes: usize,
    pub success: f64,
    pub collisions: f64,
    pub offroad: f64,
    pub timeout_other: f64,
    pub avg_speed: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ClosedLoopReport {
    pub rows: Vec<(ScenarioKind, ClosedLoopRow)>,
}

impl ClosedLoopReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("scenario,episodes,success,collisions,offroad,timeout_other,avg_speed\n");
        for (kind, r) in &self.rows {
            out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                kind.name(),
                r.episodes,
                r.success,
                r.collisions,
                r.offroad,
                r.timeout_other,
                r.avg_speed
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<26} {:>5} {:>9} {:>11} {:>9} {:>9} {:>10}\n",
            "scenario", "n", "success", "collisions", "offroad", "other", "avg-speed"
        );
        for (kind, r) in &self.rows {
            out.push_str(&format!(
                "{:<26} {:>5} {:>9.2} {:>11.2} {:>9.2} {:>9.2} {:>10.2}\n",
                kind.name(),
                r.episodes,
                r.success,
                r.collisions,
                r.offroad,
                r.timeout_other,
                r.avg_speed
            ));
        }
        out
    }
}

/// Per-episode outcome indicators; rates are their means.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeIndicators {
    pub success: bool,
    pub collision: bool,
    pub offroad: bool,
    pub avg_speed: f64,
    pub termination: Termination,
}

pub fn episode_indicators(config: &EpisodeConfig, result: &crate::sim::EpisodeResult) -> EpisodeIndicators {
    EpisodeIndicators {
        success: check_success(config, result),
        collision: result.termination == Termination::Collision,
        offroad: result.termination == Termination::Offroad,
        avg_speed: result.avg_speed,
        termination: result.termination,
    }
}

/// Run `n` episodes of each kind closed-loop and aggregate rates.
///
/// `make_policy` builds a fresh policy per episode (index passed in).
/// Episodes execute in parallel; aggregation is in episode order, so the
/// report is deterministic for a fixed seed.
pub fn eval_closed_loop<F, M>(
    kinds: &[ScenarioKind],
    n_per_kind: usize,
    base_seed: u64,
    map_for: M,
    make_policy: F,
) -> ClosedLoopReport
where
    F: Fn(u64) -> Box<dyn SdvPolicy + Send> + Sync,
    M: Fn(ScenarioKind, u64) -> Arc<crate::geom::RoadMap> + Sync,
{
    let mut rows = Vec::new();
    for &kind in kinds {
        let indicators: Vec<Option<EpisodeIndicators>> = (0..n_per_kind)
            .into_par_iter()
            .map(|i| {
                let seed = crate::seeding::SeedTree::new(base_seed)
                    .derive_indexed(kind.name(), i as u64);
                let map = map_for(kind, seed);
                let config = match sample_scenario(kind, &map, seed) {
                    Ok(c) => c,
                    Err(_) => return None,
                };
                let mut policy = make_policy(seed);
                let result = run_episode(&config, policy.as_mut(), &mut TickHooks::none());
                Some(episode_indicators(&config, &result))
            })
            .collect();
        let valid: Vec<EpisodeIndicators> = indicators.into_iter().flatten().collect();
        let n = valid.len().max(1) as f64;
        let row = ClosedLoopRow {
            episodes: valid.len(),
            success: valid.iter().filter(|i| i.success).count() as f64 / n,
            collisions: valid.iter().filter(|i| i.collision).count() as f64 / n,
            offroad: valid.iter().filter(|i| i.offroad).count() as f64 / n,
            timeout_other: valid
                .iter()
                .filter(|i| !i.success && !i.collision && !i.offroad)
                .count() as f64 / n,
            avg_speed: valid.iter().map(|i| i.avg_speed).sum::<f64>() / n,
        };
        rows.push((kind, row));
    }
    ClosedLoopReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_with_gaps(gaps: &[f64]) -> WaypointPlan {
        let mut pts = [Vec2::ZERO; PLAN_STEPS];
        let mut x = 0.0;
        for i in 0..PLAN_STEPS {
            x += gaps[i.min(gaps.len() - 1)];
            pts[i].x = x;
        }
        WaypointPlan::new(pts)
    }

    #[test]
    fn tpi_zero_for_identical_standstill_plans() {
        let mut log = PlanLog::default();
        let pose = VehicleState::new(3.0, 4.0, 0.7, 0.0);
        for i in 0..10 {
            log.records.push(PlanRecord {
                tau: i as f64 * 0.1,
                plan: WaypointPlan::standstill(),
                sdv_pose: pose,
            });
        }
        let (values, skipped) = temporal_plan_instability(&log);
        assert!(!values.is_empty());
        assert_eq!(skipped, 0);
        assert!(values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tpi_euclidean_norm() {
        // two plans whose compared points differ by (3, 4) in the map frame
        let mut log = PlanLog::default();
        let pose = VehicleState::new(0.0, 0.0, 0.0, 0.0);
        let mut plan_a = WaypointPlan::standstill();
        plan_a.points[PLAN_STEPS - 1] = Vec2::new(10.0, 0.0);
        let mut plan_b = WaypointPlan::standstill();
        plan_b.points[PLAN_STEPS - 2] = Vec2::new(13.0, 4.0);
        log.records.push(PlanRecord {
            tau: 0.0,
            plan: plan_a,
            sdv_pose: pose,
        });
        log.records.push(PlanRecord {
            tau: 0.2,
            plan: plan_b,
            sdv_pose: pose,
        });
        let (values, _) = temporal_plan_instability(&log);
        assert_eq!(values.len(), 1);
        assert!((values[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_replan_straight_line_tpi_zero() {
        // constant speed straight driving with exact replanning: the T-0.2
        // point of the next plan coincides with the previous endpoint
        let mut log = PlanLog::default();
        let v = 5.0;
        let mut t = 0.0;
        while t < 2.0 {
            let pose = VehicleState::new(v * t, 0.0, 0.0, v);
            let mut pts = [Vec2::ZERO; PLAN_STEPS];
            for (i, p) in pts.iter_mut().enumerate() {
                p.x = v * PLAN_DT * (i + 1) as f64;
            }
            log.records.push(PlanRecord {
                tau: t,
                plan: WaypointPlan::new(pts),
                sdv_pose: pose,
            });
            t += 0.1;
        }
        let (values, _) = temporal_plan_instability(&log);
        assert!(!values.is_empty());
        let m = mean(&values);
        assert!(m < 1e-9, "mean tpi {m}");
    }

    #[test]
    fn inverse_ttc_values() {
        let sdv_dims = VehicleDims::new(4.0, 2.0);
        let plan = plan_with_gaps(&[1.0]);
        // no traffic -> 0
        assert_eq!(waypoints_inverse_ttc(&plan, &sdv_dims, &[]), 0.0);
        // the SDV footprint reaches 2 m past each waypoint; an obstacle box
        // spanning [6.2, 7.2] first touches the footprint of waypoint 5
        // (front at x = 7.0) -> 1/(5*0.2) = 1.0
        let t5 = (
            VehicleState::new(6.7, 0.0, 0.0, 0.0),
            VehicleDims::new(1.0, 1.0),
        );
        let v = waypoints_inverse_ttc(&plan, &sdv_dims, &[t5]);
        assert!((v - 1.0).abs() < 1e-12, "got {v}");
        // overlap already at waypoint 1 -> 5.0
        let t1 = (
            VehicleState::new(1.0, 0.0, 0.0, 0.0),
            VehicleDims::new(1.0, 1.0),
        );
        let v = waypoints_inverse_ttc(&plan, &sdv_dims, &[t1]);
        assert!((v - 5.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn inverse_ttc_antitone_in_first_intersection_index() {
        let sdv_dims = VehicleDims::new(4.0, 2.0);
        let plan = plan_with_gaps(&[1.0]);
        let mut prev = f64::INFINITY;
        for k in 1..=15 {
            let t = (
                VehicleState::new(k as f64, 0.0, 0.0, 0.0),
                VehicleDims::new(0.5, 0.5),
            );
            let v = waypoints_inverse_ttc(&plan, &sdv_dims, &[t]);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn standstill_and_stopping_thresholds() {
        // all gaps 0.05 -> standstill
        let p = plan_with_gaps(&[0.05]);
        assert!(classify_standstill(&p));
        assert!(!classify_stopping(&p));
        // all gaps 0.2 -> neither
        let p = plan_with_gaps(&[0.2]);
        assert!(!classify_standstill(&p));
        assert!(!classify_stopping(&p));
        // decreasing 0.4 -> 0.05 -> stopping, not standstill
        let gaps: Vec<f64> = (0..PLAN_STEPS)
            .map(|i| 0.4 - (0.4 - 0.05) * i as f64 / (PLAN_STEPS - 1) as f64)
            .collect();
        let p = plan_with_gaps(&gaps);
        assert!(!classify_standstill(&p));
        assert!(classify_stopping(&p));
        // exactly at the threshold: 0.1 is not under it
        let p = plan_with_gaps(&[STANDSTILL_GAP]);
        assert!(!classify_standstill(&p));
        let p = plan_with_gaps(&[STANDSTILL_GAP - 1e-9]);
        assert!(classify_standstill(&p));
    }

    #[test]
    fn snippet_extraction_windows() {
        let dt = 0.1;
        // 4 s driving at 5, 2 s decel, 3 s standing, then drive off
        let mut speeds = Vec::new();
        speeds.extend(std::iter::repeat(5.0).take(40));
        for i in 0..20 {
            speeds.push(5.0 * (1.0 - i as f64 / 19.0));
        }
        speeds.extend(std::iter::repeat(0.0).take(30));
        for i in 0..30 {
            speeds.push((i as f64 * 0.1).min(3.0));
        }
        let gaps: Vec<Option<f64>> = speeds.iter().map(|_| Some(8.0)).collect();
        let yielding = vec![false; speeds.len()];
        let snippets = extract_snippets(0, &speeds, &gaps, &yielding, dt);
        let kinds: Vec<SnippetKind> = snippets.iter().map(|s| s.kind).collect();
        assert!(kinds.contains(&SnippetKind::StoppingBehind), "{kinds:?}");
        assert!(kinds.contains(&SnippetKind::KeepStanding) || kinds.contains(&SnippetKind::DriveOff));
        for s in &snippets {
            let len = (s.end - s.start) as f64 * dt;
            assert!((1.0..=5.0 + 1e-9).contains(&len), "window {len} s");
        }
    }

    #[test]
    fn open_loop_perfect_imitator_zero_errors() {
        let label = plan_with_gaps(&[0.8]);
        let s = open_loop_sample(&label.clone(), &label, &VehicleDims::car(), &[]);
        assert_eq!(s.ade, 0.0);
        assert_eq!(s.fde, 0.0);
        assert_eq!(s.inverse_ttc, 0.0);
    }
}
