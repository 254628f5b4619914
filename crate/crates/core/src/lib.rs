//! Time-constrained rendezvous planning for an autonomous underwater vehicle.
//!
//! World frame: x north, y east, z down (depth, m). Headings are measured from +x toward +y.

pub mod cost;
pub mod current_field;
pub mod env_map;
pub mod environment;
pub mod error;
pub mod mission;
pub mod obstacles;
pub mod optimizers;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod spline;

pub use error::{Error, Result};

pub type Point2 = nalgebra::Vector2<f64>;
pub type Point3 = nalgebra::Vector3<f64>;
