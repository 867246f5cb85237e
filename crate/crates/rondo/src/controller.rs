//! Waypoint plan to drivable trajectory: cubic spline fit plus linear
//! longitudinal/lateral tracking controllers with a 400 ms control timepoint.

use crate::dynamics::VehicleState;
use crate::geom::{normalize_angle, Vec2};
use crate::policy::{WaypointPlan, PLAN_DT, PLAN_HORIZON, PLAN_STEPS};

/// Time the controllers look ahead on the trajectory, seconds.
pub const CONTROL_TIMEPOINT: f64 = 0.4;

/// Consecutive-waypoint gap below which a plan segment counts as standing.
pub const STANDSTILL_GAP: f64 = 0.1;

/// Natural cubic spline on a uniform knot grid.
#[derive(Debug, Clone)]
struct CubicSpline {
    /// Knot values.
    y: Vec<f64>,
    /// Second derivatives at the knots (natural: zero at both ends).
    m: Vec<f64>,
    h: f64,
}

impl CubicSpline {
    /// Fit through `y` at knots spaced `h` apart, natural boundary conditions.
    fn natural(y: Vec<f64>, h: f64) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the tridiagonal system for interior knots
            let dim = n - 2;
            let mut diag = vec![2.0 * h / 3.0; dim];
            let off = h / 6.0;
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|i| (y[i + 1] - y[i]) / h - (y[i] - y[i - 1]) / h)
                .collect();
            for i in 1..dim {
                let w = off / diag[i - 1];
                diag[i] -= w * off;
                rhs[i] -= w * rhs[i - 1];
            }
            m[dim] = rhs[dim - 1] / diag[dim - 1];
            for i in (0..dim - 1).rev() {
                m[i + 1] = (rhs[i] - off * m[i + 2]) / diag[i];
            }
        }
        CubicSpline { y, m, h }
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.y.len();
        let t = t.clamp(0.0, self.h * (n - 1) as f64);
        let i = ((t / self.h) as usize).min(n - 2);
        (i, t - i as f64 * self.h)
    }

    fn value(&self, t: f64) -> f64 {
        let (i, tau) = self.locate(t);
        let h = self.h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
        let c = m0 / 2.0;
        let d = (m1 - m0) / (6.0 * h);
        y0 + b * tau + c * tau * tau + d * tau * tau * tau
    }

    fn derivative(&self, t: f64) -> f64 {
        let (i, tau) = self.locate(t);
        let h = self.h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
        let c = m0 / 2.0;
        let d = (m1 - m0) / (6.0 * h);
        b + 2.0 * c * tau + 3.0 * d * tau * tau
    }

    fn second_derivative(&self, t: f64) -> f64 {
        let (i, tau) = self.locate(t);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        m0 + (m1 - m0) * tau / self.h
    }
}

/// Piecewise-cubic x(t), y(t) over the plan horizon, C2-continuous,
/// interpolating the SDV position at t = 0 and every waypoint at t = 0.2 k.
#[derive(Debug, Clone)]
pub struct SplineTrajectory {
    x: CubicSpline,
    y: CubicSpline,
    standstill: bool,
}

/// Pose, heading, speed, and curvature sampled from a trajectory at one time.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub pos: Vec2,
    pub heading: f64,
    pub speed: f64,
    /// Signed path curvature, 1/m; zero at creeping speeds.
    pub curvature: f64,
}

impl SplineTrajectory {
    pub fn horizon(&self) -> f64 {
        PLAN_HORIZON
    }

    /// Whether the source plan never moves (all gaps below the threshold).
    pub fn is_standstill(&self) -> bool {
        self.standstill
    }

    pub fn sample(&self, t: f64) -> TrajectorySample {
        let t = t.clamp(0.0, PLAN_HORIZON);
        let pos = Vec2::new(self.x.value(t), self.y.value(t));
        let vel = Vec2::new(self.x.derivative(t), self.y.derivative(t));
        let speed = vel.norm();
        let heading = if speed > 1e-3 {
            vel.angle()
        } else {
            self.heading_before(t)
        };
        let curvature = if speed > 0.5 {
            let acc = Vec2::new(self.x.second_derivative(t), self.y.second_derivative(t));
            (vel.cross(acc) / (speed * speed * speed)).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        TrajectorySample {
            pos,
            heading,
            speed,
            curvature,
        }
    }

    /// Heading held from the last point with meaningful speed before `t`;
    /// falls back to straight ahead in the planning frame.
    fn heading_before(&self, t: f64) -> f64 {
        let mut s = t - 0.05;
        while s > 0.0 {
            let vel = Vec2::new(self.x.derivative(s), self.y.derivative(s));
            if vel.norm() > 1e-3 {
                return vel.angle();
            }
            s -= 0.05;
        }
        0.0
    }

    /// Dense polyline of trajectory positions (`n` samples over the horizon).
    pub fn positions(&self, n: usize) -> Vec<Vec2> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64 * PLAN_HORIZON;
                Vec2::new(self.x.value(t), self.y.value(t))
            })
            .collect()
    }
}

/// Fit natural cubic splines per coordinate through the plan, with the SDV
/// position (the origin of the planning frame) as the t = 0 knot.
pub fn fit_spline(plan: &WaypointPlan) -> SplineTrajectory {
    let mut xs = Vec::with_capacity(PLAN_STEPS + 1);
    let mut ys = Vec::with_capacity(PLAN_STEPS + 1);
    xs.push(0.0);
    ys.push(0.0);
    for p in &plan.points {
        xs.push(p.x);
        ys.push(p.y);
    }
    SplineTrajectory {
        x: CubicSpline::natural(xs, PLAN_DT),
        y: CubicSpline::natural(ys, PLAN_DT),
        standstill: plan.is_full_standstill(STANDSTILL_GAP),
    }
}

/// Longitudinal acceleration and steering command, clamped to actuator limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub accel: f64,
    pub steer: f64,
}

pub const ACCEL_MIN: f64 = -6.0;
pub const ACCEL_MAX: f64 = 3.0;
pub const STEER_MAX: f64 = std::f64::consts::FRAC_PI_4;

/// Tracking gains. Values are tuned so closed-loop tracking of expert plans
/// stays under the lateral-error budget; they live in the run config.
#[derive(Debug, Clone, Copy)]
pub struct ControllerGains {
    /// Longitudinal proportional gain, 1/s.
    pub k_speed: f64,
    /// Steering gain on heading error.
    pub k_heading: f64,
    /// Steering gain on lateral error, rad/m.
    pub k_lateral: f64,
    /// Braking applied for standstill plans, m/s^2.
    pub standstill_brake: f64,
    /// Wheelbase used by the curvature feedforward, m.
    pub wheelbase: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        ControllerGains {
            // reach the plan's speed at the control timepoint: (v* - v) / 0.4
            k_speed: 1.0 / CONTROL_TIMEPOINT,
            k_heading: 1.4,
            k_lateral: 0.7,
            standstill_brake: 2.0,
            wheelbase: crate::dynamics::VehicleDims::car().wheelbase(),
        }
    }
}

/// Track a trajectory from the given state (both in the planning frame).
///
/// Reads the trajectory only through its sample at the 400 ms control
/// timepoint; standstill plans always brake.
pub fn track(traj: &SplineTrajectory, state: &VehicleState, gains: &ControllerGains) -> ControlCommand {
    if traj.is_standstill() {
        return ControlCommand {
            accel: -gains.standstill_brake,
            steer: 0.0,
        };
    }
    command_from_reference(&traj.sample(CONTROL_TIMEPOINT), state, gains)
}

/// The linear control laws applied to one trajectory sample. Exposed so the
/// control-timepoint contract can be tested directly.
pub fn command_from_reference(
    reference: &TrajectorySample,
    state: &VehicleState,
    gains: &ControllerGains,
) -> ControlCommand {
    let accel = (gains.k_speed * (reference.speed - state.speed)).clamp(ACCEL_MIN, ACCEL_MAX);
    let rel = (reference.pos - state.pos()).rotated(-state.heading);
    // the reference heading 0.4 s ahead leads the current one by roughly
    // curvature * v * 0.4 on curves, which acts as built-in feedforward
    let heading_err = normalize_angle(reference.heading - state.heading);
    let steer =
        (gains.k_heading * heading_err + gains.k_lateral * rel.y).clamp(-STEER_MAX, STEER_MAX);
    ControlCommand { accel, steer }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_from(points: impl Fn(usize) -> Vec2) -> WaypointPlan {
        let mut pts = [Vec2::ZERO; PLAN_STEPS];
        for (i, p) in pts.iter_mut().enumerate() {
            *p = points(i);
        }
        WaypointPlan::new(pts)
    }

    #[test]
    fn spline_interpolates_all_knots_exactly() {
        let plan = plan_from(|i| Vec2::new((i + 1) as f64 * 0.9, ((i as f64) * 0.7).sin()));
        let traj = fit_spline(&plan);
        for (i, p) in plan.points.iter().enumerate() {
            let t = (i + 1) as f64 * PLAN_DT;
            let s = traj.sample(t);
            assert!(s.pos.dist(*p) < 1e-12, "knot {i} missed: {:?} vs {:?}", s.pos, p);
        }
        let s0 = traj.sample(0.0);
        assert!(s0.pos.norm() < 1e-12);
    }

    #[test]
    fn collinear_points_give_straight_constant_speed() {
        let plan = plan_from(|i| Vec2::new((i + 1) as f64, 0.0));
        let traj = fit_spline(&plan);
        // uniform 1 m spacing at 0.2 s -> 5 m/s at all sampled times
        let mut t = 0.0;
        while t <= PLAN_HORIZON {
            let s = traj.sample(t);
            assert!((s.speed - 5.0).abs() < 1e-9, "speed {} at t={t}", s.speed);
            assert!(s.pos.y.abs() < 1e-12);
            assert!(s.heading.abs() < 1e-12);
            t += 0.05;
        }
    }

    #[test]
    fn circular_arc_heading_tangent_to_circle() {
        // waypoints on a circle; spline headings must match the tangent field
        let r = 25.0;
        let centre = Vec2::new(0.0, r);
        let speed = 6.0;
        let plan = plan_from(|i| {
            let arc = speed * PLAN_DT * (i + 1) as f64 / r;
            centre + Vec2::new(arc.sin(), -arc.cos()) * r
        });
        let traj = fit_spline(&plan);
        // dense finite-difference oracle on the sampled positions; the circle
        // comparison skips the outermost intervals where the natural boundary
        // condition (zero second derivative) cannot match constant curvature
        let mut t = 0.4;
        while t < PLAN_HORIZON - 0.4 {
            let s = traj.sample(t);
            let eps = 1e-5;
            let a = traj.sample(t - eps).pos;
            let b = traj.sample(t + eps).pos;
            let fd_heading = (b - a).angle();
            assert!(
                (normalize_angle(s.heading - fd_heading)).abs() < 1e-9,
                "heading vs finite difference at t={t}"
            );
            // tangent of the circle at the sample position
            let radial = (s.pos - centre).normalized();
            let tangent = Vec2::new(radial.y, -radial.x) * -1.0;
            let wanted = tangent.angle();
            assert!(
                normalize_angle(s.heading - wanted).abs() < 1e-3,
                "heading {} vs circle tangent {} at t={t}",
                s.heading,
                wanted
            );
            t += 0.05;
        }
    }

    #[test]
    fn track_on_trajectory_is_near_zero_command() {
        let plan = plan_from(|i| Vec2::new((i + 1) as f64, 0.0));
        let traj = fit_spline(&plan);
        let state = VehicleState::new(0.0, 0.0, 0.0, 5.0);
        let cmd = track(&traj, &state, &ControllerGains::default());
        assert!(cmd.accel.abs() < 1e-9);
        assert!(cmd.steer.abs() < 1e-9);
    }

    #[test]
    fn proportional_speed_law() {
        // plan 2 m/s faster at the control timepoint than current speed
        let plan = plan_from(|i| Vec2::new((i + 1) as f64, 0.0)); // 5 m/s plan
        let traj = fit_spline(&plan);
        let state = VehicleState::new(0.0, 0.0, 0.0, 3.0);
        let gains = ControllerGains {
            k_speed: 1.0,
            ..Default::default()
        };
        let cmd = track(&traj, &state, &gains);
        assert!((cmd.accel - 2.0).abs() < 1e-9);
    }

    #[test]
    fn standstill_plan_brakes() {
        let plan = WaypointPlan::standstill();
        let traj = fit_spline(&plan);
        let state = VehicleState::new(0.0, 0.0, 0.0, 1.0);
        let cmd = track(&traj, &state, &ControllerGains::default());
        assert!(cmd.accel < 0.0);
        assert_eq!(cmd.steer, 0.0);
    }

    #[test]
    fn commands_depend_only_on_the_control_timepoint_sample() {
        // two plans agreeing at t = 0.4 (same sample) must give the same command
        let plan = plan_from(|i| Vec2::new((i + 1) as f64, 0.1 * (i as f64)));
        let traj = fit_spline(&plan);
        let state = VehicleState::new(0.2, -0.1, 0.05, 5.0);
        let gains = ControllerGains {
            k_speed: 1.0,
            ..Default::default()
        };
        let direct = track(&traj, &state, &gains);
        let via_sample = command_from_reference(&traj.sample(CONTROL_TIMEPOINT), &state, &gains);
        assert_eq!(direct, via_sample);

        // perturbing the reference speed moves accel proportionally (k_v = 1,
        // well inside the actuator limits)
        let mut bumped = traj.sample(CONTROL_TIMEPOINT);
        bumped.speed += 2.0;
        let cmd2 = command_from_reference(&bumped, &state, &gains);
        assert!((cmd2.accel - direct.accel - gains.k_speed * 2.0).abs() < 1e-9);
    }

    #[test]
    fn track_is_continuous_in_the_state() {
        let plan = plan_from(|i| {
            let arc = 0.08 * (i + 1) as f64;
            Vec2::new(20.0 * arc.sin(), 20.0 * (1.0 - arc.cos()))
        });
        let traj = fit_spline(&plan);
        let gains = ControllerGains::default();
        let base = VehicleState::new(0.0, 0.0, 0.0, 4.0);
        let cmd0 = track(&traj, &base, &gains);
        for (dx, dy) in [(0.01, 0.0), (0.0, 0.01), (-0.01, 0.0), (0.0, -0.01)] {
            let s = VehicleState::new(dx, dy, 0.0, 4.0);
            let cmd = track(&traj, &s, &gains);
            assert!((cmd.accel - cmd0.accel).abs() < 0.1);
            assert!((cmd.steer - cmd0.steer).abs() < 0.05);
        }
    }
}
