//! Scaled penalty objective and hard feasibility checks for a timed trajectory.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::environment::EnvironmentSnapshot;
use crate::error::{Error, Result};
use crate::spline::Trajectory;
use crate::Point3;

/// Added to the total of any trajectory that cannot make headway somewhere.
pub const INFEASIBLE_PENALTY: f64 = 1e6;
/// Endpoint tolerance for the boundary conditions, m.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleLimits {
    pub u_max: f64,
    pub v_max: f64,
    pub theta_max: f64,
    pub r_max: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self { u_max: 3.0, v_max: 3.0, theta_max: 0.6, r_max: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RendezvousSpec {
    /// Requested arrival time, s from the start of the leg.
    pub t_r: f64,
    pub epsilon: f64,
    pub start: Point3,
    pub target: Point3,
    /// Required distance from the coast and from obstacle confidence spheres, m.
    pub clearance_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub beta: [f64; 7],
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self { beta: [10.0, 10.0, 10.0, 10.0, 10.0, 100.0, 10.0] }
    }
}

impl PenaltyWeights {
    pub fn scaled(&self, factor: f64) -> Self {
        Self { beta: self.beta.map(|b| b * factor) }
    }
}

/// The objective split into its scaled brackets (before weighting).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub pi_term: f64,
    pub term_1: f64,
    pub term_2: f64,
    pub term_3: f64,
    pub term_4: f64,
    pub term_5: f64,
    pub term_6: f64,
    pub term_7: f64,
    pub infeasible_penalty: f64,
    pub total: f64,
    pub feasible: bool,
    /// Smallest coast/obstacle clearance over the samples, m.
    pub min_clearance: f64,
    pub t_f: f64,
}

impl CostBreakdown {
    pub fn terms(&self) -> [f64; 7] {
        [self.term_1, self.term_2, self.term_3, self.term_4, self.term_5, self.term_6, self.term_7]
    }

    /// Weighted collision term, the value traced as "collision violation".
    pub fn collision_violation(&self) -> f64 {
        self.term_6
    }

    /// A flat cost with every penalty at zero, for tests of generic machinery.
    pub fn constant(total: f64) -> Self {
        Self {
            pi_term: total,
            term_1: 0.0,
            term_2: 0.0,
            term_3: 0.0,
            term_4: 0.0,
            term_5: 0.0,
            term_6: 0.0,
            term_7: 0.0,
            infeasible_penalty: 0.0,
            total,
            feasible: true,
            min_clearance: f64::INFINITY,
            t_f: 0.0,
        }
    }
}

fn excess(value: f64, limit: f64) -> f64 {
    let e = (value.abs() - limit).max(0.0) / limit;
    e * e
}

fn validate(limits: &VehicleLimits, spec: &RendezvousSpec) -> Result<()> {
    let positive = [limits.u_max, limits.v_max, limits.theta_max, limits.r_max, spec.t_r, spec.epsilon];
    if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidConfig("T_r, epsilon and every vehicle limit must be positive".into()));
    }
    if !(spec.clearance_threshold >= 0.0) {
        return Err(Error::InvalidConfig("clearance threshold must be non-negative".into()));
    }
    Ok(())
}

/// Worst sample per constrained quantity.
#[derive(Debug, Clone, Copy)]
struct Scan {
    worst: [(f64, usize); 4],
    min_clearance: (f64, usize),
}

fn scan(traj: &Trajectory, env: &EnvironmentSnapshot, limits: &VehicleLimits) -> Scan {
    scan_from(traj, env, limits, 0)
}

fn scan_from(traj: &Trajectory, env: &EnvironmentSnapshot, limits: &VehicleLimits, first: usize) -> Scan {
    let lims = [limits.u_max, limits.v_max, limits.theta_max, limits.r_max];
    let mut worst = [(0.0, 0); 4];
    let mut min_clearance = (f64::INFINITY, 0);
    for (i, s) in traj.samples.iter().enumerate() {
        for (k, v) in [s.u, s.v, s.theta, s.r].into_iter().enumerate() {
            let e = excess(v, lims[k]);
            if e > worst[k].0 {
                worst[k] = (e, i);
            }
        }
        let d = if i < first { f64::INFINITY } else { env.clearance(s.position) };
        if d < min_clearance.0 {
            min_clearance = (d, i);
        }
    }
    Scan { worst, min_clearance }
}

fn clearance_term(d: f64, threshold: f64) -> f64 {
    if threshold > 0.0 {
        let m = (d - threshold).min(0.0) / threshold;
        m * m
    } else {
        // zero threshold: penalize penetration in metres
        let m = d.min(0.0);
        m * m
    }
}

/// Scaled augmented objective of a timed trajectory.
pub fn evaluate(
    traj: &Trajectory,
    env: &EnvironmentSnapshot,
    limits: &VehicleLimits,
    spec: &RendezvousSpec,
    weights: &PenaltyWeights,
) -> Result<CostBreakdown> {
    evaluate_ahead(traj, env, limits, spec, weights, 0)
}

/// As [`evaluate`], with clearance counted only from sample `first` on. A planner
/// uses this when the leg starts somewhere it cannot move, such as the vehicle.
pub fn evaluate_ahead(
    traj: &Trajectory,
    env: &EnvironmentSnapshot,
    limits: &VehicleLimits,
    spec: &RendezvousSpec,
    weights: &PenaltyWeights,
    first: usize,
) -> Result<CostBreakdown> {
    validate(limits, spec)?;
    if traj.samples.is_empty() {
        return Err(Error::InvalidInput("trajectory has no samples".into()));
    }
    let sc = scan_from(traj, env, limits, first.min(traj.samples.len() - 1));
    let (pi_term, term_5) = if traj.feasible {
        let dt = traj.t_f - spec.t_r;
        let late = (dt.abs() - spec.epsilon).max(0.0) / spec.epsilon;
        ((dt / spec.t_r).powi(2), late * late)
    } else {
        (0.0, 0.0)
    };
    let term_6 = clearance_term(sc.min_clearance.0, spec.clearance_threshold);
    let miss = (traj.end() - spec.target).norm_squared() / spec.target.norm().max(1.0).powi(2);
    let terms = [sc.worst[0].0, sc.worst[1].0, sc.worst[2].0, sc.worst[3].0, term_5, term_6, miss];
    let infeasible_penalty = if traj.feasible { 0.0 } else { INFEASIBLE_PENALTY };
    let total = pi_term + terms.iter().zip(&weights.beta).map(|(t, b)| t * b).sum::<f64>() + infeasible_penalty;
    let feasible = report(traj, spec, &sc).is_empty();
    Ok(CostBreakdown {
        pi_term,
        term_1: terms[0],
        term_2: terms[1],
        term_3: terms[2],
        term_4: terms[3],
        term_5,
        term_6,
        term_7: miss,
        infeasible_penalty,
        total,
        feasible,
        min_clearance: sc.min_clearance.0,
        t_f: traj.t_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// Trajectory does not start at the vehicle or end at the target.
    BoundaryConditions,
    /// A sample is closer than the clearance threshold to the coast or an obstacle.
    NoIntersection,
    SurgeBound,
    SwayBound,
    PitchBound,
    YawRateBound,
    /// Arrival outside the tolerance window, or no headway at all.
    RendezvousTime,
}

impl Clause {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BoundaryConditions => "boundary_conditions",
            Self::NoIntersection => "no_intersection",
            Self::SurgeBound => "surge_bound",
            Self::SwayBound => "sway_bound",
            Self::PitchBound => "pitch_bound",
            Self::YawRateBound => "yaw_rate_bound",
            Self::RendezvousTime => "rendezvous_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    /// Worst offending sample (or stalled segment).
    pub sample: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn has(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }
}

fn report(traj: &Trajectory, spec: &RendezvousSpec, sc: &Scan) -> Vec<Violation> {
    let mut out = Vec::new();
    let last = traj.samples.len() - 1;
    let start_miss = (traj.start() - spec.start).norm();
    let end_miss = (traj.end() - spec.target).norm();
    if start_miss > BOUNDARY_TOLERANCE || end_miss > BOUNDARY_TOLERANCE {
        let (sample, value) = if start_miss > end_miss { (0, start_miss) } else { (last, end_miss) };
        out.push(Violation { clause: Clause::BoundaryConditions, sample, value });
    }
    if sc.min_clearance.0 < spec.clearance_threshold {
        out.push(Violation { clause: Clause::NoIntersection, sample: sc.min_clearance.1, value: sc.min_clearance.0 });
    }
    let bounds = [Clause::SurgeBound, Clause::SwayBound, Clause::PitchBound, Clause::YawRateBound];
    for (k, clause) in bounds.into_iter().enumerate() {
        if sc.worst[k].0 > 0.0 {
            let (e, i) = sc.worst[k];
            out.push(Violation { clause, sample: i, value: e });
        }
    }
    if !((traj.t_f - spec.t_r).abs() < spec.epsilon) {
        out.push(Violation { clause: Clause::RendezvousTime, sample: traj.stalled_segment.unwrap_or(last), value: traj.t_f });
    }
    out
}

/// Hard constraint check: boundary points, clearance, state bounds and the strict time window.
pub fn check_feasible(
    traj: &Trajectory,
    env: &EnvironmentSnapshot,
    limits: &VehicleLimits,
    spec: &RendezvousSpec,
) -> Result<FeasibilityReport> {
    validate(limits, spec)?;
    if traj.samples.is_empty() {
        return Err(Error::InvalidInput("trajectory has no samples".into()));
    }
    let violations = report(traj, spec, &scan(traj, env, limits));
    Ok(FeasibilityReport { feasible: violations.is_empty(), violations })
}

/// Trace writer: one CSV row per evaluation.
pub struct CostTrace<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CostTrace<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "pi_term", "term_1", "term_2", "term_3", "term_4", "term_5", "term_6", "term_7", "total", "feasible",
        ])?;
        Ok(Self { writer })
    }

    pub fn push(&mut self, c: &CostBreakdown) -> Result<()> {
        let mut row: Vec<String> = std::iter::once(c.pi_term)
            .chain(c.terms())
            .chain(std::iter::once(c.total))
            .map(|v| format!("{v:.9e}"))
            .collect();
        row.push(c.feasible.to_string());
        self.writer.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        self.writer.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}
