//! Immutable bundle of everything the planner can observe at one instant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::current_field::CurrentField;
use crate::env_map::GridMap;
use crate::obstacles::ObstacleSet;
use crate::Point3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSnapshot {
    pub map: Arc<GridMap>,
    pub current: CurrentField,
    pub obstacles: ObstacleSet,
    pub timestamp: f64,
}

impl EnvironmentSnapshot {
    pub fn new(map: Arc<GridMap>, current: CurrentField, obstacles: ObstacleSet, timestamp: f64) -> Self {
        Self { map, current, obstacles, timestamp }
    }

    /// Distance to the coast, negative by the overshoot when outside the water column.
    pub fn map_clearance(&self, p: Point3) -> f64 {
        if p.z < 0.0 {
            return p.z;
        }
        if p.z > self.map.depth_limit() {
            return self.map.depth_limit() - p.z;
        }
        self.map.distance_to_forbidden(p.xy())
    }

    /// The smaller of the coast distance and the obstacle clearance.
    pub fn clearance(&self, p: Point3) -> f64 {
        self.map_clearance(p).min(self.obstacles.clearance(p))
    }

    /// True when `p` is in water and outside every confidence sphere.
    pub fn is_free(&self, p: Point3) -> bool {
        self.map.is_feasible(p) && self.obstacles.clearance(p) >= 0.0
    }

    /// Same snapshot with a different obstacle set.
    pub fn with_obstacles(&self, obstacles: ObstacleSet) -> Self {
        Self { obstacles, ..self.clone() }
    }
}
