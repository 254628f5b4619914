//! Versioned JSON scenario files and the bundled presets.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{PenaltyWeights, RendezvousSpec, VehicleLimits};
use crate::current_field::{CurrentConfig, CurrentField};
use crate::env_map::io::{read_csv_grid, read_pgm};
use crate::env_map::synthetic::CoastSpec;
use crate::env_map::{cluster_map_with, ClusterOptions, GridMap, RasterMap, DEFAULT_DEPTH_LIMIT};
use crate::error::{Error, Result};
use crate::obstacles::{ObstacleKind, ObstacleRoster, ObstacleSet};
use crate::optimizers::{Algorithm, OptimizerConfig};
use crate::{Point2, Point3};

pub const SCHEMA_VERSION: u32 = 1;

/// Stream-split child seed, stable across platforms.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random()
}

pub(crate) mod streams {
    pub const CURRENT: u64 = 1;
    pub const OBSTACLES: u64 = 2;
    pub const PLAN_BASE: u64 = 1000;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSource {
    /// Every cell is water.
    Open { width: usize, height: usize, cell_size: f64 },
    /// Procedural coastline, rendered and then clustered like a real chart.
    Synthetic { coast: CoastSpec },
    /// Grayscale PGM, relative paths resolved against the scenario file.
    Pgm { path: PathBuf, cell_size: f64 },
    /// Numeric CSV grid of intensities.
    Csv { path: PathBuf, cell_size: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub source: MapSource,
    #[serde(default = "default_depth_limit")]
    pub depth_limit: f64,
    #[serde(default)]
    pub clusters: Option<usize>,
    /// A point known to be water; picks the feasible cluster.
    #[serde(default)]
    pub water_seed: Option<Point2>,
    #[serde(default)]
    pub cluster_seed: u64,
}

fn default_depth_limit() -> f64 {
    DEFAULT_DEPTH_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurrentSpec {
    pub vortex_count: usize,
    /// Core radius in map cells.
    pub radius: f64,
    /// Circulation with lengths in map cells (m/s times cells).
    pub strength: f64,
    /// Metres per map cell for the two values above.
    pub length_scale: f64,
    /// Refresh the field during the mission.
    pub updates: bool,
    pub config: CurrentConfig,
}

impl Default for CurrentSpec {
    fn default() -> Self {
        Self { vortex_count: 50, radius: 2.8, strength: 12.0, length_scale: 10.0, updates: true, config: CurrentConfig::default() }
    }
}

impl CurrentSpec {
    pub fn world_radius(&self) -> f64 {
        self.radius * self.length_scale
    }

    pub fn world_strength(&self) -> f64 {
        self.strength * self.length_scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RendezvousSetup {
    pub start: Point3,
    /// Leader position; its z is the rendezvous depth.
    pub target: Point3,
    #[serde(default)]
    pub course: f64,
    pub t_r: f64,
    pub epsilon: f64,
    pub water_speed: f64,
    #[serde(default = "default_clearance")]
    pub clearance_threshold: f64,
}

fn default_clearance() -> f64 {
    30.0
}

impl RendezvousSetup {
    pub fn spec(&self) -> RendezvousSpec {
        RendezvousSpec {
            t_r: self.t_r,
            epsilon: self.epsilon,
            start: self.start,
            target: self.target,
            clearance_threshold: self.clearance_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    /// Including start and target.
    pub control_points: usize,
    pub samples: usize,
    /// Extra room around each corridor box: horizontal, vertical (m).
    pub corridor_margin: [f64; 2],
    pub sim_step: f64,
    pub sensor_range: f64,
    pub arrival_radius: f64,
    /// Minimum gap between replans caused by field updates, s.
    pub replan_interval: f64,
    /// Minimum gap between replans caused by arrival-time drift, s.
    pub drift_interval: f64,
    pub replan_iterations: usize,
    /// Clearance the optimizer aims for beyond the threshold, m.
    pub planning_margin: f64,
    /// Dense-check points per simulation step.
    pub check_density: usize,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            control_points: 7,
            samples: 100,
            corridor_margin: [300.0, 40.0],
            sim_step: 1.0,
            sensor_range: 500.0,
            arrival_radius: 10.0,
            replan_interval: 120.0,
            drift_interval: 60.0,
            replan_iterations: 20,
            planning_margin: 15.0,
            check_density: 10,
        }
    }
}

/// An obstacle placed on the active path ahead of the vehicle at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedDrop {
    pub time: f64,
    /// Arc length ahead of the vehicle along the active plan, m.
    pub ahead: f64,
    pub kind: ObstacleKind,
    pub radius: f64,
    pub uncertainty: f64,
    #[serde(default = "one")]
    pub step_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSpec {
    pub algorithm: Algorithm,
    pub config: OptimizerConfig,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self { algorithm: Algorithm::Pso, config: OptimizerConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::InvalidConfig(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgLayers {
    pub map: bool,
    pub current: bool,
    pub obstacles: bool,
    pub path: bool,
}

impl Default for SvgLayers {
    fn default() -> Self {
        Self { map: true, current: true, obstacles: true, path: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub formats: Vec<Format>,
    pub svg_layers: SvgLayers,
    /// Quiver lattice size per axis.
    pub quiver: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { formats: vec![Format::Csv, Format::Json, Format::Svg], svg_layers: SvgLayers::default(), quiver: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub map: MapSpec,
    #[serde(default)]
    pub current: CurrentSpec,
    #[serde(default)]
    pub obstacles: ObstacleRoster,
    pub rendezvous: RendezvousSetup,
    #[serde(default)]
    pub limits: VehicleLimits,
    #[serde(default)]
    pub weights: PenaltyWeights,
    #[serde(default)]
    pub planner: PlannerSettings,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub scripted: Vec<ScriptedDrop>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative map paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_runs() -> usize {
    1
}

const PRESETS: [(&str, &str); 4] = [
    ("scenario1", include_str!("../presets/scenario1.json")),
    ("scenario2", include_str!("../presets/scenario2.json")),
    ("scenario3", include_str!("../presets/scenario3.json")),
    ("scenario4", include_str!("../presets/scenario4.json")),
];

impl Scenario {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::InvalidConfig(format!("no preset named {name:?}")))?;
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    /// Loads a scenario file; a bare preset name such as `scenario4` also works.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => {
                let mut s = Self::from_json(&text)?;
                s.base_dir = path.parent().map(Path::to_path_buf);
                Ok(s)
            }
            Err(e) => {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                if Self::preset_names().any(|n| n == stem) {
                    Self::preset(stem)
                } else {
                    Err(Error::InvalidConfig(format!("cannot read scenario {}: {e}", path.display())))
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let r = &self.rendezvous;
        if !(r.t_r > 0.0 && r.epsilon > 0.0 && r.water_speed > 0.0 && r.clearance_threshold >= 0.0) {
            return Err(Error::InvalidConfig("rendezvous t_r, epsilon and water_speed must be positive".into()));
        }
        if r.start == r.target {
            return Err(Error::InvalidConfig("start and target coincide".into()));
        }
        let p = &self.planner;
        if p.control_points < 3 || p.samples < 2 {
            return Err(Error::InvalidConfig("need >= 3 control points and >= 2 samples".into()));
        }
        if !(p.sim_step > 0.0 && p.arrival_radius > 0.0 && p.sensor_range >= 0.0) {
            return Err(Error::InvalidConfig("sim_step and arrival_radius must be positive".into()));
        }
        if p.corridor_margin.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidConfig("corridor margin must be non-negative".into()));
        }
        if !(self.current.length_scale > 0.0 && self.current.radius > 0.0) {
            return Err(Error::InvalidConfig("vortex radius and length scale must be positive".into()));
        }
        if self.map.depth_limit <= 0.0 {
            return Err(Error::InvalidConfig("depth limit must be positive".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        self.optimizer.config.pso.validate()?;
        self.optimizer.config.bbo.validate()?;
        self.optimizer.config.fa.validate()?;
        self.optimizer.config.de.validate()?;
        Ok(())
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Builds the occupancy grid. Independent of the run seed.
    pub fn load_map(&self) -> Result<Arc<GridMap>> {
        let raster: RasterMap = match &self.map.source {
            MapSource::Open { width, height, cell_size } => {
                return Ok(Arc::new(GridMap::open(*width, *height, *cell_size, Point2::zeros(), self.map.depth_limit)?));
            }
            MapSource::Synthetic { coast } => coast.render()?,
            MapSource::Pgm { path, cell_size } => read_pgm(&self.resolve(path), *cell_size)?,
            MapSource::Csv { path, cell_size } => read_csv_grid(&self.resolve(path), *cell_size)?,
        };
        let opts = ClusterOptions {
            k: self.map.clusters.unwrap_or(2),
            seed: self.map.cluster_seed,
            water_seed: self.map.water_seed.or(Some(self.rendezvous.start.xy())),
            depth_limit: self.map.depth_limit,
            ..Default::default()
        };
        Ok(Arc::new(cluster_map_with(&raster, &opts)?.map))
    }

    /// Initial current field for one run.
    pub fn current_field(&self, map: &GridMap, seed: u64) -> Result<CurrentField> {
        let (lo, hi) = map.extent();
        CurrentField::random(
            self.current.vortex_count,
            lo,
            hi,
            self.current.world_radius(),
            self.current.world_strength(),
            &self.current.config,
            derive_seed(seed, streams::CURRENT),
        )
    }

    /// Obstacles for one run; spheres whose centre sits on land are redrawn.
    pub fn obstacle_set(&self, map: &GridMap, seed: u64) -> Result<ObstacleSet> {
        let r = &self.rendezvous;
        self.obstacles.spawn(r.start, r.target, derive_seed(seed, streams::OBSTACLES), |o| {
            map.is_feasible(Point3::new(o.position.x, o.position.y, o.position.z.clamp(0.0, map.depth_limit())))
        })
    }

    pub fn with_algorithm(mut self, algo: Algorithm) -> Self {
        self.optimizer.algorithm = algo;
        self
    }
}
