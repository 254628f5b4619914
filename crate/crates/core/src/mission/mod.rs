//! Plan, fly, sense, replan: the rendezvous mission loop.

mod planner;

pub use planner::{greville, leg_window, surviving_interior, Decision, Plan, Planner, RendezvousMessage, Trigger};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::current_field::CurrentField;
use crate::env_map::GridMap;
use crate::environment::EnvironmentSnapshot;
use crate::error::{Error, Result};
use crate::obstacles::{Obstacle, ObstacleKind, ObstacleSet};
use crate::optimizers::Algorithm;
use crate::scenario::{derive_seed, streams, Scenario, ScriptedDrop};
use crate::spline::{wrap_angle, Trajectory, TrajectorySample, MIN_PROGRESS_SPEED};
use crate::Point3;

/// Realized vehicle state; same layout as a planned sample.
pub type VehicleState = TrajectorySample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Rendezvous,
    Failed,
    Cancel,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rendezvous => "rendezvous",
            Self::Failed => "failed",
            Self::Cancel => "cancel",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: String,
    pub detail: String,
}

impl Event {
    pub fn line(&self) -> String {
        format!("{:9.1} {:<12} {}", self.time, self.kind, self.detail)
    }
}

/// A plan together with the world it was made in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub plan: Plan,
    /// Obstacles as they really were at planning time.
    pub obstacles: ObstacleSet,
    pub current: CurrentField,
    /// Index into `flown` of the state the plan starts from.
    pub flown_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionLog {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub outcome: Outcome,
    pub reason: String,
    pub t_r: f64,
    pub epsilon: f64,
    pub achieved_t_f: Option<f64>,
    pub plans: Vec<PlanRecord>,
    pub flown: Vec<VehicleState>,
    pub events: Vec<Event>,
    /// Dense-check points that fell on land or inside a confidence sphere.
    pub incursions: usize,
    pub min_clearance: f64,
}

impl MissionLog {
    pub fn replans(&self) -> usize {
        self.plans.len().saturating_sub(1)
    }

    /// Collision trace value of the last plan's final iteration.
    pub fn final_collision_violation(&self) -> f64 {
        self.plans
            .last()
            .and_then(|p| p.plan.run.history.last())
            .map_or(f64::INFINITY, |h| h.collision_violation)
    }

    pub fn within_window(&self) -> bool {
        self.achieved_t_f.is_some_and(|t| (t - self.t_r).abs() < self.epsilon)
    }

    pub fn write_events<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            writeln!(out, "{}", e.line())?;
        }
        Ok(())
    }
}

/// Position along a trajectory polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cursor {
    segment: usize,
    offset: f64,
}

impl Cursor {
    fn position(&self, traj: &Trajectory) -> Point3 {
        let s = &traj.samples;
        if self.segment + 1 >= s.len() {
            return traj.end();
        }
        let (a, b) = (s[self.segment].position, s[self.segment + 1].position);
        let len = (b - a).norm();
        if len == 0.0 {
            a
        } else {
            a + (b - a) * (self.offset / len)
        }
    }

    /// Curve parameter, taking samples as uniform in it.
    fn parameter(&self, traj: &Trajectory) -> f64 {
        let s = &traj.samples;
        if s.len() < 2 || self.segment + 1 >= s.len() {
            return 1.0;
        }
        let len = (s[self.segment + 1].position - s[self.segment].position).norm();
        let f = if len > 0.0 { self.offset / len } else { 0.0 };
        (self.segment as f64 + f) / (s.len() - 1) as f64
    }

    fn done(&self, traj: &Trajectory) -> bool {
        self.segment + 1 >= traj.samples.len()
    }
}

fn along_speed(water_speed: f64, current: &CurrentField, p: Point3, dir: Point3) -> f64 {
    water_speed + current.velocity_3d(p).vector().dot(&dir)
}

/// Time to fly the rest of `traj` from `cursor` under `current`; infinite when some
/// segment cannot make headway.
fn remaining_time(traj: &Trajectory, cursor: Cursor, water_speed: f64, current: &CurrentField) -> f64 {
    let s = &traj.samples;
    let mut t = 0.0;
    for k in cursor.segment..s.len().saturating_sub(1) {
        let (a, b) = (s[k].position, s[k + 1].position);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let from = if k == cursor.segment { cursor.offset } else { 0.0 };
        let dir = (b - a) / len;
        let mid = a + (b - a) * ((from + len) / (2.0 * len));
        let v = along_speed(water_speed, current, mid, dir);
        if v <= MIN_PROGRESS_SPEED {
            return f64::INFINITY;
        }
        t += (len - from) / v;
    }
    t
}

/// Every point of the straight step `a -> b` at `density` even subdivisions, excluding `a`.
pub fn dense_points(a: Point3, b: Point3, density: usize) -> impl Iterator<Item = Point3> {
    let n = density.max(1);
    (1..=n).map(move |i| a + (b - a) * (i as f64 / n as f64))
}

/// Counts dense points on land, outside the water column or inside a confidence sphere.
pub fn count_incursions(map: &GridMap, obstacles: &ObstacleSet, points: impl Iterator<Item = Point3>) -> usize {
    points.filter(|p| !map.is_feasible(*p) || obstacles.clearance(*p) < 0.0).count()
}

/// What the planner is allowed to see: charted static obstacles always, the rest only
/// within sensor range.
pub fn sensed(truth: &ObstacleSet, vehicle: Point3, range: f64) -> ObstacleSet {
    let k = truth.confidence_multiplier;
    ObstacleSet {
        obstacles: truth
            .obstacles
            .iter()
            .filter(|o| o.kind == ObstacleKind::QuasiStatic || (vehicle - o.position).norm() - o.confidence_radius(k) <= range)
            .cloned()
            .collect(),
        confidence_multiplier: k,
    }
}

/// Mutable simulation state for one mission.
struct Sim<'a> {
    scenario: &'a Scenario,
    planner: Planner,
    map: Arc<GridMap>,
    current: CurrentField,
    truth: ObstacleSet,
    seed: u64,
    t: f64,
    position: Point3,
    cursor: Cursor,
    plans: Vec<PlanRecord>,
    flown: Vec<VehicleState>,
    events: Vec<Event>,
    incursions: usize,
    min_clearance: f64,
    last_replan: f64,
    pending_drops: Vec<ScriptedDrop>,
}

impl Sim<'_> {
    fn event(&mut self, kind: &str, detail: String) {
        log::debug!("t={:.1} {kind} {detail}", self.t);
        self.events.push(Event { time: self.t, kind: kind.to_string(), detail });
    }

    fn snapshot(&self) -> EnvironmentSnapshot {
        let range = self.scenario.planner.sensor_range;
        EnvironmentSnapshot::new(self.map.clone(), self.current.clone(), sensed(&self.truth, self.position, range), self.t)
    }

    fn active(&self) -> &Plan {
        &self.plans.last().expect("at least one plan").plan
    }

    fn adopt(&mut self, plan: Plan) {
        let c = plan.run.best_cost;
        self.event(
            "plan",
            format!(
                "#{} trigger={} total={:.6} t_f={:.1} violation={:.6} feasible={}",
                self.plans.len(),
                plan.trigger.as_str(),
                c.total,
                plan.time + c.t_f,
                c.term_6,
                plan.report.feasible
            ),
        );
        self.plans.push(PlanRecord {
            plan,
            obstacles: self.truth.clone(),
            current: self.current.clone(),
            flown_index: self.flown.len() - 1,
        });
        self.cursor = Cursor { segment: 0, offset: 0.0 };
        self.last_replan = self.t;
    }

    fn state(&self, dir: Point3, prev_psi: Option<f64>, dt: f64) -> VehicleState {
        let c = self.current.velocity_3d(self.position).vector();
        let g = dir * self.scenario.rendezvous.water_speed + c;
        let psi = dir.y.atan2(dir.x);
        let theta = (-dir.z).atan2(dir.xy().norm());
        let r = prev_psi.map_or(0.0, |p| if dt > 0.0 { wrap_angle(psi - p) / dt } else { 0.0 });
        VehicleState { t: self.t, position: self.position, psi, theta, r, u: g.x, v: g.y, w: g.z }
    }

    /// Flies `dt` seconds along the active plan. Returns the travel direction.
    fn advance(&mut self, dt: f64) -> Point3 {
        let water_speed = self.scenario.rendezvous.water_speed;
        let mut left = dt;
        let mut dir = Point3::x();
        while left > 0.0 {
            let traj = &self.plans.last().expect("plan").plan.trajectory;
            if self.cursor.done(traj) {
                break;
            }
            let s = &traj.samples;
            let (a, b) = (s[self.cursor.segment].position, s[self.cursor.segment + 1].position);
            let len = (b - a).norm();
            if len == 0.0 {
                self.cursor = Cursor { segment: self.cursor.segment + 1, offset: 0.0 };
                continue;
            }
            dir = (b - a) / len;
            let v = along_speed(water_speed, &self.current, self.position, dir);
            if v <= 0.0 {
                break;
            }
            let rest = len - self.cursor.offset;
            if v * left >= rest {
                left -= rest / v;
                self.cursor = Cursor { segment: self.cursor.segment + 1, offset: 0.0 };
            } else {
                self.cursor.offset += v * left;
                left = 0.0;
            }
            self.position = self.cursor.position(traj);
        }
        dir
    }

    fn environment_update(&mut self) {
        if self.scenario.current.updates {
            self.current = self.current.evolve();
        }
        self.truth = self.truth.step(&self.current);
        let due: Vec<ScriptedDrop> = {
            let t = self.t;
            let (due, rest) = self.pending_drops.drain(..).partition(|d| d.time <= t);
            self.pending_drops = rest;
            due
        };
        for d in due {
            let traj = self.active().trajectory.clone();
            let at = point_ahead(&traj, self.cursor, d.ahead);
            let seed = derive_seed(self.seed, streams::OBSTACLES + 100 + self.truth.len() as u64);
            let o = Obstacle::fixed(d.kind, at, d.radius, d.uncertainty, d.step_scale, seed);
            self.event("drop", format!("{} at ({:.1}, {:.1}, {:.1}) r={:.1}", d.kind.as_str(), at.x, at.y, at.z, d.radius));
            self.truth.obstacles.push(o);
        }
    }

    /// Smallest clearance between the rest of the active path and the sensed obstacles.
    fn path_obstacle_clearance(&self, obstacles: &ObstacleSet) -> f64 {
        let traj = &self.active().trajectory;
        std::iter::once(self.position)
            .chain(traj.samples.iter().skip(self.cursor.segment + 1).map(|s| s.position))
            .map(|p| obstacles.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }

    fn trigger(&self, field_updated: bool, env: &EnvironmentSnapshot) -> Option<Trigger> {
        let p = &self.scenario.planner;
        let since = self.t - self.last_replan;
        if field_updated && self.path_obstacle_clearance(&env.obstacles) < self.scenario.rendezvous.clearance_threshold {
            return Some(Trigger::Obstacle);
        }
        if field_updated && self.scenario.current.updates && since >= p.replan_interval {
            return Some(Trigger::FieldUpdate);
        }
        if field_updated && since >= p.drift_interval {
            let rest = remaining_time(&self.active().trajectory, self.cursor, self.scenario.rendezvous.water_speed, &self.current);
            if ((self.t + rest) - self.scenario.rendezvous.t_r).abs() > 0.5 * self.scenario.rendezvous.epsilon {
                return Some(Trigger::Drift);
            }
        }
        None
    }
}

/// Point `ahead` metres further along `traj` than `cursor`, clamped to the end.
fn point_ahead(traj: &Trajectory, cursor: Cursor, ahead: f64) -> Point3 {
    let s = &traj.samples;
    let mut left = ahead;
    let mut seg = cursor.segment;
    let mut offset = cursor.offset;
    while seg + 1 < s.len() {
        let len = (s[seg + 1].position - s[seg].position).norm();
        if offset + left <= len {
            return Cursor { segment: seg, offset: offset + left }.position(traj);
        }
        left -= len - offset;
        seg += 1;
        offset = 0.0;
    }
    traj.end()
}

/// The leader's message as configured in a scenario.
pub fn message(scenario: &Scenario) -> RendezvousMessage {
    let r = &scenario.rendezvous;
    RendezvousMessage { position: r.target, course: r.course, depth: r.target.z, rendezvous_time: r.t_r }
}

/// Runs one seeded mission of `scenario` with its configured algorithm.
pub fn run_mission(scenario: &Scenario, seed: u64) -> Result<MissionLog> {
    run_mission_with_map(scenario, scenario.load_map()?, seed)
}

/// As [`run_mission`], reusing an already built map.
pub fn run_mission_with_map(scenario: &Scenario, map: Arc<GridMap>, seed: u64) -> Result<MissionLog> {
    scenario.validate()?;
    let r = &scenario.rendezvous;
    if !map.is_feasible(r.start) || !map.is_feasible(r.target) {
        return Err(Error::InvalidConfig("start and target must lie in water".into()));
    }
    let current = scenario.current_field(&map, seed)?;
    let truth = scenario.obstacle_set(&map, seed)?;
    let planner = Planner::from_scenario(scenario, map.clone());
    let mut sim = Sim {
        scenario,
        planner,
        map,
        current,
        truth,
        seed,
        t: 0.0,
        position: r.start,
        cursor: Cursor { segment: 0, offset: 0.0 },
        plans: Vec::new(),
        flown: Vec::new(),
        events: Vec::new(),
        incursions: 0,
        min_clearance: f64::INFINITY,
        last_replan: 0.0,
        pending_drops: scenario.scripted.clone(),
    };
    sim.flown.push(VehicleState { t: 0.0, position: r.start, psi: r.course, theta: 0.0, r: 0.0, u: 0.0, v: 0.0, w: 0.0 });

    let msg = message(scenario);
    sim.event("message", format!("target ({:.1}, {:.1}, {:.1}) T_r={:.1}", msg.position.x, msg.position.y, msg.depth, msg.rendezvous_time));
    let env = sim.snapshot();
    let decision = sim.planner.initial_plan(&msg, r.start, &env, derive_seed(seed, streams::PLAN_BASE))?;
    let (outcome, reason, achieved) = match decision {
        Decision::Cancel { plan, reason } => {
            sim.adopt(*plan);
            sim.event("cancel", reason.clone());
            (Outcome::Cancel, reason, None)
        }
        Decision::Proceed(plan) => {
            sim.adopt(*plan);
            sim.event("proceed", String::new());
            fly(&mut sim)?
        }
    };
    sim.event("outcome", format!("{} {}", outcome.as_str(), reason));
    Ok(MissionLog {
        scenario: scenario.name.clone(),
        algorithm: scenario.optimizer.algorithm,
        seed,
        outcome,
        reason,
        t_r: r.t_r,
        epsilon: r.epsilon,
        achieved_t_f: achieved,
        plans: sim.plans,
        flown: sim.flown,
        events: sim.events,
        incursions: sim.incursions,
        min_clearance: sim.min_clearance,
    })
}

fn fly(sim: &mut Sim<'_>) -> Result<(Outcome, String, Option<f64>)> {
    let r = sim.scenario.rendezvous.clone();
    let p = sim.scenario.planner.clone();
    let period = sim.current.update_period();
    let deadline = r.t_r + r.epsilon;
    let mut next_update = period;
    let mut prev_psi = None;
    loop {
        let from = sim.position;
        sim.t += p.sim_step;
        let dir = sim.advance(p.sim_step);
        let state = sim.state(dir, prev_psi, p.sim_step);
        prev_psi = Some(state.psi);
        sim.flown.push(state);

        let hits = count_incursions(&sim.map, &sim.truth, dense_points(from, sim.position, p.check_density));
        for q in dense_points(from, sim.position, p.check_density) {
            sim.min_clearance = sim.min_clearance.min(sim.truth.clearance(q));
        }
        if hits > 0 {
            sim.incursions += hits;
            let reason = format!("collision at ({:.1}, {:.1}, {:.1})", sim.position.x, sim.position.y, sim.position.z);
            return Ok((Outcome::Failed, reason, None));
        }
        if (sim.position - r.target).norm() <= p.arrival_radius {
            let t = sim.t;
            return Ok(if (t - r.t_r).abs() < r.epsilon {
                (Outcome::Rendezvous, format!("arrived at {t:.1} s"), Some(t))
            } else {
                (Outcome::Failed, format!("arrived at {t:.1} s, outside the window"), Some(t))
            });
        }
        if sim.t >= deadline {
            return Ok((Outcome::Failed, "rendezvous window closed".into(), None));
        }

        let mut updated = false;
        while sim.t + 1e-9 >= next_update {
            sim.environment_update();
            next_update += period;
            updated = true;
        }
        let env = sim.snapshot();
        if let Some(trigger) = sim.trigger(updated, &env) {
            sim.event("trigger", trigger.as_str().to_string());
            let prev = sim.active().clone();
            let u = sim.cursor.parameter(&prev.trajectory);
            let seed = derive_seed(sim.seed, streams::PLAN_BASE + sim.plans.len() as u64);
            match sim.planner.replan(&prev, sim.position, u, sim.t, (r.t_r, r.epsilon), &env, trigger, seed) {
                Ok(plan) => sim.adopt(plan),
                Err(Error::BudgetExhausted { .. }) => return Ok((Outcome::Failed, "no time left to replan".into(), None)),
                Err(e) => return Err(e),
            }
        }
    }
}
