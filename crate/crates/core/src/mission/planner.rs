//! Initial planning and warm-started replanning of a single leg.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cost::{self, CostBreakdown, FeasibilityReport, PenaltyWeights, RendezvousSpec, VehicleLimits};
use crate::env_map::GridMap;
use crate::environment::EnvironmentSnapshot;
use crate::error::{Error, Result};
use crate::optimizers::{optimize, Algorithm, ObjectiveContext, OptimizerConfig, OptimizerRun};
use crate::scenario::{PlannerSettings, Scenario};
use crate::spline::{clamped_knots, corridor_bounds, synthesize_trajectory, ControlPolygon, CorridorBounds, CurveSampler, Trajectory};
use crate::Point3;

/// What the leader broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RendezvousMessage {
    pub position: Point3,
    pub course: f64,
    pub depth: f64,
    pub rendezvous_time: f64,
}

impl RendezvousMessage {
    pub fn target(&self) -> Point3 {
        Point3::new(self.position.x, self.position.y, self.depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Initial,
    FieldUpdate,
    Obstacle,
    Drift,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Initial => "initial",
            Self::FieldUpdate => "field_update",
            Self::Obstacle => "obstacle",
            Self::Drift => "drift",
        }
    }
}

/// One optimized leg, timed from `time` (mission clock).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub time: f64,
    pub trigger: Trigger,
    /// What the plan is judged against.
    pub leg: RendezvousSpec,
    /// What the optimizer scored: the leg with the clearance margin applied.
    pub objective: RendezvousSpec,
    pub bounds: CorridorBounds,
    pub run: OptimizerRun,
    pub trajectory: Trajectory,
    pub report: FeasibilityReport,
}

impl Plan {
    pub fn polygon(&self) -> &ControlPolygon {
        &self.run.best
    }

    pub fn cost(&self) -> &CostBreakdown {
        &self.run.best_cost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Proceed(Box<Plan>),
    Cancel { plan: Box<Plan>, reason: String },
}

/// Requested time and tolerance for a leg that starts at mission time `now`: the
/// original request while it is still ahead, otherwise the middle of what is left of
/// the window. `None` once the window has closed.
pub fn leg_window(t_r: f64, epsilon: f64, now: f64) -> Option<(f64, f64)> {
    let hi = t_r + epsilon - now;
    if hi <= 0.0 {
        return None;
    }
    if t_r > now {
        Some((t_r - now, epsilon))
    } else {
        Some((0.5 * hi, 0.5 * hi))
    }
}

/// Greville abscissae of a clamped uniform spline with `n` control points.
pub fn greville(n: usize, degree: usize) -> Vec<f64> {
    let p = degree.min(n - 1);
    let knots = clamped_knots(n, p);
    (0..n).map(|i| knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect()
}

/// Tail re-fit: interior points whose abscissa lies beyond `u` survive, the start becomes
/// `vehicle`. Returns the surviving indices into the interior.
pub fn surviving_interior(poly: &ControlPolygon, degree: usize, u: f64) -> Vec<usize> {
    let g = greville(poly.len(), degree);
    (0..poly.interior.len()).filter(|&k| g[k + 1] > u).collect()
}

/// Shared planning parameters for one mission.
#[derive(Debug, Clone)]
pub struct Planner {
    pub map: Arc<GridMap>,
    pub limits: VehicleLimits,
    pub weights: PenaltyWeights,
    pub water_speed: f64,
    pub clearance_threshold: f64,
    /// Half-width of the arrival window, s.
    pub epsilon: f64,
    pub settings: PlannerSettings,
    pub algorithm: Algorithm,
    pub optimizer: OptimizerConfig,
    pub degree: usize,
}

impl Planner {
    pub fn from_scenario(scenario: &Scenario, map: Arc<GridMap>) -> Self {
        Self {
            map,
            limits: scenario.limits,
            weights: scenario.weights,
            water_speed: scenario.rendezvous.water_speed,
            clearance_threshold: scenario.rendezvous.clearance_threshold,
            epsilon: scenario.rendezvous.epsilon,
            settings: scenario.planner.clone(),
            algorithm: scenario.optimizer.algorithm,
            optimizer: scenario.optimizer.config.clone(),
            degree: crate::spline::DEFAULT_DEGREE,
        }
    }

    /// Judged and scored versions of a leg. A vehicle already squeezed inside the
    /// clearance band is judged only on getting no closer; the optimizer always aims
    /// for the threshold plus the margin.
    fn legs(&self, start: Point3, target: Point3, t_r: f64, epsilon: f64, env: &EnvironmentSnapshot) -> (RendezvousSpec, RendezvousSpec) {
        let room = env.clearance(start).max(0.0);
        let leg = RendezvousSpec { t_r, epsilon, start, target, clearance_threshold: self.clearance_threshold.min(room) };
        let objective = RendezvousSpec { clearance_threshold: self.clearance_threshold + self.settings.planning_margin, ..leg };
        (leg, objective)
    }

    /// Objective value of a polygon: clearance is not scored at the fixed start.
    pub fn objective(&self, poly: &ControlPolygon, env: &EnvironmentSnapshot, objective: &RendezvousSpec) -> Result<CostBreakdown> {
        cost::evaluate_ahead(&self.trajectory(poly, env)?, env, &self.limits, objective, &self.weights, 1)
    }

    /// Corridor boxes grown by the configured margin and clamped to the chart and water column.
    pub fn corridor(&self, start: Point3, target: Point3, interior: usize) -> Result<CorridorBounds> {
        let (lo, hi) = self.map.extent();
        let [h, v] = self.settings.corridor_margin;
        Ok(corridor_bounds(start, target, interior)?.padded(
            Point3::new(h, h, v),
            Point3::new(lo.x, lo.y, 0.0),
            Point3::new(hi.x, hi.y, self.map.depth_limit()),
        ))
    }

    pub fn sampler(&self, n_ctrl: usize) -> Result<CurveSampler> {
        CurveSampler::new(n_ctrl, self.settings.samples, self.degree)
    }

    pub fn trajectory(&self, poly: &ControlPolygon, env: &EnvironmentSnapshot) -> Result<Trajectory> {
        synthesize_trajectory(poly, self.water_speed, &env.current, &self.sampler(poly.len())?)
    }

    /// Cost of a polygon for a leg under `env`.
    pub fn cost(&self, poly: &ControlPolygon, env: &EnvironmentSnapshot, leg: &RendezvousSpec) -> Result<CostBreakdown> {
        cost::evaluate(&self.trajectory(poly, env)?, env, &self.limits, leg, &self.weights)
    }

    fn solve(
        &self,
        time: f64,
        trigger: Trigger,
        (leg, objective): (RendezvousSpec, RendezvousSpec),
        bounds: CorridorBounds,
        env: &EnvironmentSnapshot,
        cfg: &OptimizerConfig,
        seed: u64,
        warm: Option<&ControlPolygon>,
    ) -> Result<Plan> {
        // fail on bad limits before the hot loop
        cost::evaluate(&self.trajectory(&bounds.polygon(&bounds.flat_lower()), env)?, env, &self.limits, &objective, &self.weights)?;
        let sampler = self.sampler(bounds.len() + 2)?;
        let ctx = ObjectiveContext::new(bounds.clone(), |poly: &ControlPolygon| {
            let traj = synthesize_trajectory(poly, self.water_speed, &env.current, &sampler).expect("positive water speed");
            cost::evaluate_ahead(&traj, env, &self.limits, &objective, &self.weights, 1).expect("validated leg")
        });
        let run = optimize(self.algorithm, &ctx, cfg, seed, warm)?;
        let trajectory = synthesize_trajectory(&run.best, self.water_speed, &env.current, &sampler)?;
        let report = cost::check_feasible(&trajectory, env, &self.limits, &leg)?;
        Ok(Plan { time, trigger, leg, objective, bounds, run, trajectory, report })
    }

    /// Plans the whole mission from a fresh population. Proceeds only when the best
    /// trajectory passes every hard constraint.
    pub fn initial_plan(&self, msg: &RendezvousMessage, start: Point3, env: &EnvironmentSnapshot, seed: u64) -> Result<Decision> {
        if !(msg.rendezvous_time > 0.0) {
            return Err(Error::InvalidInput("rendezvous time must lie in the future".into()));
        }
        let target = msg.target();
        let interior = self.settings.control_points - 2;
        let bounds = self.corridor(start, target, interior)?;
        let legs = self.legs(start, target, msg.rendezvous_time, self.epsilon, env);
        let plan = self.solve(0.0, Trigger::Initial, legs, bounds, env, &self.optimizer, seed, None)?;
        if plan.report.feasible {
            Ok(Decision::Proceed(Box::new(plan)))
        } else {
            let clauses: Vec<&str> = plan.report.violations.iter().map(|v| v.clause.as_str()).collect();
            let reason = format!("no feasible path: {}", dedup(clauses).join(", "));
            Ok(Decision::Cancel { plan: Box::new(plan), reason })
        }
    }

    /// Replans the rest of the mission from the vehicle's position at mission time `now`.
    /// `u` is the vehicle's curve parameter on the previous plan.
    pub fn replan(
        &self,
        prev: &Plan,
        vehicle: Point3,
        u: f64,
        now: f64,
        deadline: (f64, f64),
        env: &EnvironmentSnapshot,
        trigger: Trigger,
        seed: u64,
    ) -> Result<Plan> {
        let (t_r, epsilon) = leg_window(deadline.0, deadline.1, now).ok_or(Error::BudgetExhausted { remaining: deadline.0 + deadline.1 - now })?;
        let target = prev.leg.target;
        let legs = self.legs(vehicle, target, t_r, epsilon, env);
        let keep = surviving_interior(prev.polygon(), self.degree, u);
        let (bounds, warm) = if keep.is_empty() {
            let bounds = self.corridor(vehicle, target, 1)?;
            let warm = ControlPolygon { start: vehicle, interior: vec![(vehicle + target) * 0.5], target };
            (bounds, warm)
        } else {
            let bounds = CorridorBounds {
                start: vehicle,
                target,
                lower: keep.iter().map(|&k| prev.bounds.lower[k]).collect(),
                upper: keep.iter().map(|&k| prev.bounds.upper[k]).collect(),
            };
            let warm = ControlPolygon { start: vehicle, interior: keep.iter().map(|&k| prev.polygon().interior[k]).collect(), target };
            (bounds, warm)
        };
        let mut cfg = self.optimizer.clone();
        cfg.set_t_max(self.settings.replan_iterations);
        let plan = self.solve(now, trigger, legs, bounds, env, &cfg, seed, Some(&warm))?;
        if plan.report.feasible {
            return Ok(plan);
        }
        // the warm tail is stuck: search a fresh full corridor with the full budget
        let bounds = self.corridor(vehicle, target, self.settings.control_points - 2)?;
        let fresh = self.solve(now, trigger, legs, bounds, env, &self.optimizer, seed ^ FRESH_SALT, None)?;
        Ok(if better(&fresh, &plan) { fresh } else { plan })
    }
}

const FRESH_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn better(a: &Plan, b: &Plan) -> bool {
    (a.report.feasible, -a.run.best_cost.total) > (b.report.feasible, -b.run.best_cost.total)
}

fn dedup(mut v: Vec<&str>) -> Vec<&str> {
    let mut seen = Vec::new();
    v.retain(|c| {
        if seen.contains(c) {
            false
        } else {
            seen.push(*c);
            true
        }
    });
    v
}
