//! Uncertain spherical obstacles: quasi-static, randomly moving, and
//! current-driven dynamic, plus confidence-boundary clearance queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::current_field::CurrentField;
use crate::error::{Error, Result};
use crate::Point3;

/// Spawn attempts before giving up on a placement.
pub const SPAWN_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    QuasiStatic,
    Moving,
    Dynamic,
}

impl ObstacleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::QuasiStatic => "quasi_static",
            Self::Moving => "moving",
            Self::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSigmas {
    /// Spread of the spawn position perturbation, m.
    pub position: f64,
    /// Upper end of the uniform uncertainty draw, m.
    pub uncertainty: f64,
    /// Spread of the dynamic radius-state noise.
    pub radius_noise: f64,
}

impl Default for ObstacleSigmas {
    fn default() -> Self {
        Self { position: 30.0, uncertainty: 15.0, radius_noise: 0.5 }
    }
}

impl ObstacleSigmas {
    fn validate(&self) -> Result<()> {
        if [self.position, self.uncertainty, self.radius_noise].iter().all(|s| *s >= 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("obstacle sigmas must be finite and non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub kind: ObstacleKind,
    pub position: Point3,
    pub radius: f64,
    pub uncertainty: f64,
    /// `[radius, growth rate, bias]`; only evolves for dynamic obstacles.
    pub radius_state: [f64; 3],
    /// Per-step displacement scale, m.
    pub step_scale: f64,
    pub radius_noise: f64,
    pub seed: u64,
    pub step: u64,
}

/// One step of the dynamic radius recursion with the propagation matrices
/// `B1 = [[1, u, 0], [0, 1, 0], [0, 0, 1]]`, `B2 = [0, 1, 1]`, `B3 = [0, 0, u]`.
pub fn propagate_radius_state(rs: [f64; 3], u_rc: f64, x: f64, uncertainty: f64) -> [f64; 3] {
    [rs[0] + u_rc * rs[1], rs[1] + x, rs[2] + x + u_rc * uncertainty]
}

fn uniform(rng: &mut ChaCha8Rng, a: f64, b: f64) -> f64 {
    a + rng.random::<f64>() * (b - a)
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

impl Obstacle {
    /// A sphere at a known position with no positional noise.
    pub fn fixed(kind: ObstacleKind, position: Point3, radius: f64, uncertainty: f64, step_scale: f64, seed: u64) -> Self {
        Self {
            kind,
            position,
            radius,
            uncertainty,
            radius_state: [radius, 0.0, 0.0],
            step_scale,
            radius_noise: 0.0,
            seed,
            step: 0,
        }
    }

    /// Samples a center inside the box spanned by `start` and `dest`, shrunk by the drawn
    /// radius on every axis wide enough to hold it; narrower axes collapse to their midpoint.
    pub fn spawn(
        kind: ObstacleKind,
        start: Point3,
        dest: Point3,
        nominal_radius: f64,
        sigmas: &ObstacleSigmas,
        step_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if start == dest {
            return Err(Error::InvalidInput("obstacle spawn box needs start != dest".into()));
        }
        if !(nominal_radius >= 0.0) || !(step_scale >= 0.0) {
            return Err(Error::InvalidConfig("obstacle radius and step scale must be non-negative".into()));
        }
        sigmas.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = start.inf(&dest);
        let hi = start.sup(&dest);
        for _ in 0..SPAWN_ATTEMPTS {
            let uncertainty = uniform(&mut rng, 0.0, sigmas.uncertainty);
            let n: f64 = rng.sample(StandardNormal);
            let radius = (nominal_radius + uncertainty * n).abs();
            if (0..3).all(|a| hi[a] - lo[a] <= 2.0 * radius) {
                continue;
            }
            let mut position = Point3::zeros();
            for a in 0..3 {
                let base = if hi[a] - lo[a] > 2.0 * radius {
                    uniform(&mut rng, lo[a] + radius, hi[a] - radius)
                } else {
                    0.5 * (lo[a] + hi[a])
                };
                let jitter: f64 = rng.sample(StandardNormal);
                position[a] = (base + sigmas.position * jitter).clamp(lo[a], hi[a]);
            }
            return Ok(Self {
                kind,
                position,
                radius,
                uncertainty,
                radius_state: [radius, 0.0, 0.0],
                step_scale,
                radius_noise: sigmas.radius_noise,
                seed: rng.random(),
                step: 0,
            });
        }
        Err(Error::Unplaceable { attempts: SPAWN_ATTEMPTS })
    }

    pub fn spawn_quasi_static(start: Point3, dest: Point3, nominal_radius: f64, sigmas: &ObstacleSigmas, seed: u64) -> Result<Self> {
        Self::spawn(ObstacleKind::QuasiStatic, start, dest, nominal_radius, sigmas, 0.0, seed)
    }

    /// Radius of the collision surface: `radius + k * uncertainty`.
    pub fn confidence_radius(&self, multiplier: f64) -> f64 {
        self.radius + multiplier * self.uncertainty
    }

    /// Generator used by the next step.
    pub fn step_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.step);
        rng
    }

    /// Random jump: each axis moves by a uniform draw between the step scale and the
    /// uncertainty, with an independent fair sign. Draw order per axis: magnitude, sign.
    pub fn step_moving(&self) -> Result<Self> {
        if self.kind != ObstacleKind::Moving {
            return Err(Error::ContractViolation(format!("step_moving on a {} obstacle", self.kind.as_str())));
        }
        let mut rng = self.step_rng();
        let mut next = self.clone();
        for a in 0..3 {
            let d = uniform(&mut rng, self.step_scale, self.uncertainty);
            next.position[a] += sign(&mut rng) * d;
        }
        next.step += 1;
        Ok(next)
    }

    /// Current-driven step: the local current speed sets the radius growth rate.
    pub fn step_dynamic(&self, current: &CurrentField) -> Result<Self> {
        if self.kind != ObstacleKind::Dynamic {
            return Err(Error::ContractViolation(format!("step_dynamic on a {} obstacle", self.kind.as_str())));
        }
        let mut rng = self.step_rng();
        let speed = current.velocity_3d(self.position).magnitude;
        let scale: f64 = rng.sample(StandardNormal);
        let u_rc = speed * (0.3 * scale).abs();
        let mut next = self.clone();
        let jump = Normal::new(self.step_scale, self.uncertainty).expect("finite spread");
        for a in 0..3 {
            let d = jump.sample(&mut rng);
            next.position[a] += sign(&mut rng) * d;
        }
        let x_noise: f64 = rng.sample(StandardNormal);
        next.radius_state = propagate_radius_state(self.radius_state, u_rc, self.radius_noise * x_noise, self.uncertainty);
        next.radius = next.radius_state[0].max(0.0);
        next.step += 1;
        Ok(next)
    }

    /// Advances by kind; quasi-static obstacles are returned unchanged.
    pub fn step(&self, current: &CurrentField) -> Self {
        match self.kind {
            ObstacleKind::QuasiStatic => self.clone(),
            ObstacleKind::Moving => self.step_moving().expect("kind checked"),
            ObstacleKind::Dynamic => self.step_dynamic(current).expect("kind checked"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSet {
    pub obstacles: Vec<Obstacle>,
    pub confidence_multiplier: f64,
}

impl Default for ObstacleSet {
    fn default() -> Self {
        Self { obstacles: Vec::new(), confidence_multiplier: 2.0 }
    }
}

impl ObstacleSet {
    pub fn new(obstacles: Vec<Obstacle>, confidence_multiplier: f64) -> Result<Self> {
        if !(confidence_multiplier > 0.0) {
            return Err(Error::InvalidConfig("confidence multiplier must be positive".into()));
        }
        Ok(Self { obstacles, confidence_multiplier })
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    /// Signed distance to the nearest confidence boundary; negative inside. `INFINITY` when empty.
    pub fn clearance(&self, p: Point3) -> f64 {
        self.obstacles
            .iter()
            .map(|o| (p - o.position).norm() - o.confidence_radius(self.confidence_multiplier))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn step(&self, current: &CurrentField) -> Self {
        Self {
            obstacles: self.obstacles.iter().map(|o| o.step(current)).collect(),
            confidence_multiplier: self.confidence_multiplier,
        }
    }

    /// Obstacles whose confidence boundary comes within `range` of `p`.
    pub fn visible_from(&self, p: Point3, range: f64) -> Self {
        Self {
            obstacles: self
                .obstacles
                .iter()
                .filter(|o| (p - o.position).norm() - o.confidence_radius(self.confidence_multiplier) <= range)
                .cloned()
                .collect(),
            confidence_multiplier: self.confidence_multiplier,
        }
    }
}

/// How many obstacles of each kind to scatter between start and destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObstacleRoster {
    pub quasi_static: usize,
    pub moving: usize,
    pub dynamic: usize,
    pub nominal_radius: f64,
    pub step_scale: f64,
    pub sigmas: ObstacleSigmas,
    pub confidence_multiplier: f64,
    /// Minimum gap between a confidence boundary and the start or destination, m.
    pub keep_clear: f64,
}

impl Default for ObstacleRoster {
    fn default() -> Self {
        Self {
            quasi_static: 0,
            moving: 0,
            dynamic: 0,
            nominal_radius: 60.0,
            step_scale: 1.0,
            sigmas: ObstacleSigmas::default(),
            confidence_multiplier: 2.0,
            keep_clear: 150.0,
        }
    }
}

impl ObstacleRoster {
    pub fn total(&self) -> usize {
        self.quasi_static + self.moving + self.dynamic
    }

    /// Spawns the roster, redrawing any sphere that would crowd the endpoints or fail `accept`.
    pub fn spawn(&self, start: Point3, dest: Point3, seed: u64, accept: impl Fn(&Obstacle) -> bool) -> Result<ObstacleSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kinds = std::iter::repeat_n(ObstacleKind::QuasiStatic, self.quasi_static)
            .chain(std::iter::repeat_n(ObstacleKind::Moving, self.moving))
            .chain(std::iter::repeat_n(ObstacleKind::Dynamic, self.dynamic));
        let mut obstacles = Vec::with_capacity(self.total());
        for kind in kinds {
            let mut placed = None;
            for _ in 0..SPAWN_ATTEMPTS {
                let o = Obstacle::spawn(kind, start, dest, self.nominal_radius, &self.sigmas, self.step_scale, rng.random())?;
                let reach = o.confidence_radius(self.confidence_multiplier) + self.keep_clear;
                if (o.position - start).norm() > reach && (o.position - dest).norm() > reach && accept(&o) {
                    placed = Some(o);
                    break;
                }
            }
            obstacles.push(placed.ok_or(Error::Unplaceable { attempts: SPAWN_ATTEMPTS })?);
        }
        ObstacleSet::new(obstacles, self.confidence_multiplier)
    }
}
