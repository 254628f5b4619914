//! Procedural coastline raster used by the bundled scenarios.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::RasterMap;
use crate::error::Result;

/// A land disk in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Island {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoastSpec {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    /// Land strip along the low-y edge: `y < coast_depth + coast_amplitude * sin(x / coast_wavelength)`.
    pub coast_depth: f64,
    pub coast_amplitude: f64,
    pub coast_wavelength: f64,
    pub islands: Vec<Island>,
    pub water_intensity: f64,
    pub land_intensity: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for CoastSpec {
    fn default() -> Self {
        Self {
            width: 350,
            height: 350,
            cell_size: 10.0,
            coast_depth: 120.0,
            coast_amplitude: 90.0,
            coast_wavelength: 380.0,
            islands: vec![
                Island { x: 2450.0, y: 850.0, radius: 430.0 },
                Island { x: 850.0, y: 2500.0, radius: 480.0 },
                Island { x: 1900.0, y: 1480.0, radius: 150.0 },
                Island { x: 3200.0, y: 2200.0, radius: 220.0 },
            ],
            water_intensity: 0.22,
            land_intensity: 0.72,
            noise: 0.06,
            seed: 0,
        }
    }
}

impl CoastSpec {
    pub fn is_land(&self, x: f64, y: f64) -> bool {
        let coast = self.coast_depth + self.coast_amplitude * (x / self.coast_wavelength).sin();
        y < coast || self.islands.iter().any(|i| (x - i.x).powi(2) + (y - i.y).powi(2) < i.radius * i.radius)
    }

    /// Grayscale raster: dark water, bright land, clipped Gaussian pixel noise.
    pub fn render(&self) -> Result<RasterMap> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise.max(0.0)).expect("finite sigma");
        let mut data = Vec::with_capacity(self.width * self.height);
        for iy in 0..self.height {
            for ix in 0..self.width {
                let x = (ix as f64 + 0.5) * self.cell_size;
                let y = (iy as f64 + 0.5) * self.cell_size;
                let base = if self.is_land(x, y) { self.land_intensity } else { self.water_intensity };
                data.push((base + noise.sample(&mut rng)).clamp(0.0, 1.0));
            }
        }
        RasterMap::grayscale(self.width, self.height, self.cell_size, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_map::{cluster_map_with, Cell, ClusterOptions};
    use crate::Point2;

    #[test]
    fn clustering_recovers_the_drawn_coastline() {
        let spec = CoastSpec { width: 120, height: 120, cell_size: 30.0, ..Default::default() };
        let raster = spec.render().unwrap();
        let opts = ClusterOptions { water_seed: Some(Point2::new(1500.0, 1500.0)), ..Default::default() };
        let map = cluster_map_with(&raster, &opts).unwrap().map;
        let mut wrong = 0;
        for iy in 0..120 {
            for ix in 0..120 {
                let land = spec.is_land((ix as f64 + 0.5) * 30.0, (iy as f64 + 0.5) * 30.0);
                if (map.cell(ix, iy) == Cell::Forbidden) != land {
                    wrong += 1;
                }
            }
        }
        assert_eq!(wrong, 0);
    }
}
