//! Offline map: raster clustering into feasible water and forbidden land, plus
//! feasibility and coast-distance queries.
//!
//! Grid convention: cell `(ix, iy)` covers `[origin.x + ix*cell, origin.x + (ix+1)*cell)`
//! along x (north) and likewise along y (east). Storage is row-major with rows along y,
//! so a PGM/CSV column is x and a row is y.

mod distance;
pub mod io;
pub mod kmeans;
pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Point2, Point3};

pub use distance::feature_transform;

/// Default z-extent of the operating volume.
pub const DEFAULT_DEPTH_LIMIT: f64 = 1000.0;

/// Raw per-pixel feature vectors (grayscale or RGB intensities in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMap {
    width: usize,
    height: usize,
    cell_size: f64,
    channels: usize,
    data: Vec<f64>,
}

impl RasterMap {
    pub fn new(width: usize, height: usize, cell_size: f64, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("raster must be non-empty".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidInput(format!("cell size must be positive, got {cell_size}")));
        }
        if channels == 0 || data.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("pixel intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, cell_size, channels, data })
    }

    /// Single-channel raster.
    pub fn grayscale(width: usize, height: usize, cell_size: f64, data: Vec<f64>) -> Result<Self> {
        Self::new(width, height, cell_size, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, ix: usize, iy: usize) -> &[f64] {
        let i = (iy * self.width + ix) * self.channels;
        &self.data[i..i + self.channels]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Feasible,
    Forbidden,
}

/// Binary occupancy grid with a precomputed nearest-forbidden-cell transform.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    origin: Point2,
    depth_limit: f64,
    occupancy: Vec<Cell>,
    nearest_forbidden: Vec<u32>,
    has_forbidden: bool,
}

impl GridMap {
    pub fn new(
        width: usize,
        height: usize,
        cell_size: f64,
        origin: Point2,
        depth_limit: f64,
        occupancy: Vec<Cell>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || occupancy.len() != width * height {
            return Err(Error::InvalidInput("occupancy size does not match grid dimensions".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidInput(format!("cell size must be positive, got {cell_size}")));
        }
        if !(depth_limit >= 0.0) || !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("origin and depth limit must be finite".into()));
        }
        let sites: Vec<bool> = occupancy.iter().map(|c| *c == Cell::Forbidden).collect();
        let has_forbidden = sites.iter().any(|s| *s);
        let nearest_forbidden = feature_transform(&sites, width, height);
        Ok(Self { width, height, cell_size, origin, depth_limit, occupancy, nearest_forbidden, has_forbidden })
    }

    /// An all-water map.
    pub fn open(width: usize, height: usize, cell_size: f64, origin: Point2, depth_limit: f64) -> Result<Self> {
        Self::new(width, height, cell_size, origin, depth_limit, vec![Cell::Feasible; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn depth_limit(&self) -> f64 {
        self.depth_limit
    }

    pub fn occupancy(&self) -> &[Cell] {
        &self.occupancy
    }

    /// World extent `(min, max)` of the grid.
    pub fn extent(&self) -> (Point2, Point2) {
        let size = Point2::new(self.width as f64, self.height as f64) * self.cell_size;
        (self.origin, self.origin + size)
    }

    pub fn feasible_count(&self) -> usize {
        self.occupancy.iter().filter(|c| **c == Cell::Feasible).count()
    }

    pub fn cell(&self, ix: usize, iy: usize) -> Cell {
        self.occupancy[iy * self.width + ix]
    }

    /// Floor-to-cell lookup; `None` outside the extent.
    pub fn world_to_cell(&self, p: Point2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        self.origin + Point2::new(ix as f64 + 0.5, iy as f64 + 0.5) * self.cell_size
    }

    /// True when `(x, y)` lands in a feasible cell and `z` is inside the water column.
    pub fn is_feasible(&self, p: Point3) -> bool {
        if !(0.0..=self.depth_limit).contains(&p.z) {
            return false;
        }
        matches!(self.world_to_cell(p.xy()), Some((ix, iy)) if self.cell(ix, iy) == Cell::Feasible)
    }

    /// Distance from `p` to the nearest forbidden cell, measured to its center less
    /// half a cell diagonal and clamped at zero. `INFINITY` when nothing is forbidden;
    /// zero outside the map extent.
    pub fn distance_to_forbidden(&self, p: Point2) -> f64 {
        if !self.has_forbidden {
            return f64::INFINITY;
        }
        let Some((ix, iy)) = self.world_to_cell(p) else {
            return 0.0;
        };
        let site = self.nearest_forbidden[iy * self.width + ix] as usize;
        let c = self.cell_center(site % self.width, site / self.width);
        let half_diag = self.cell_size * std::f64::consts::SQRT_2 * 0.5;
        ((p - c).norm() - half_diag).max(0.0)
    }
}

/// Options for turning a raster into a [`GridMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// A world point known to be water; its cluster is labeled feasible.
    pub water_seed: Option<Point2>,
    pub origin: Point2,
    pub depth_limit: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            k: 2,
            seed: 0,
            max_iter: kmeans::DEFAULT_MAX_ITER,
            water_seed: None,
            origin: Point2::zeros(),
            depth_limit: DEFAULT_DEPTH_LIMIT,
        }
    }
}

/// Result of clustering, kept for inspection.
#[derive(Debug, Clone)]
pub struct ClusteredMap {
    pub map: GridMap,
    pub kmeans: kmeans::KMeansResult,
    pub water_cluster: usize,
}

/// k-means on pixel intensities; the water cluster becomes feasible, all others forbidden.
pub fn cluster_map(raster: &RasterMap, k: usize, seed: u64) -> Result<GridMap> {
    cluster_map_with(raster, &ClusterOptions { k, seed, ..Default::default() }).map(|c| c.map)
}

pub fn cluster_map_with(raster: &RasterMap, opts: &ClusterOptions) -> Result<ClusteredMap> {
    let dim = raster.channels();
    let km = kmeans::kmeans(raster.data(), dim, opts.k, opts.seed, opts.max_iter)?;

    let seed_cell = opts.water_seed.and_then(|p| {
        let fx = ((p.x - opts.origin.x) / raster.cell_size()).floor();
        let fy = ((p.y - opts.origin.y) / raster.cell_size()).floor();
        (fx >= 0.0 && fy >= 0.0 && fx < raster.width() as f64 && fy < raster.height() as f64)
            .then(|| fy as usize * raster.width() + fx as usize)
    });
    let water_cluster = match seed_cell {
        Some(i) => km.labels[i],
        None => (0..opts.k)
            .map(|c| (c, km.center(c, dim).iter().sum::<f64>() / dim as f64))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
            .unwrap_or(0),
    };

    let occupancy = km
        .labels
        .iter()
        .map(|&l| if l == water_cluster { Cell::Feasible } else { Cell::Forbidden })
        .collect();
    let map = GridMap::new(
        raster.width(),
        raster.height(),
        raster.cell_size(),
        opts.origin,
        opts.depth_limit,
        occupancy,
    )?;
    Ok(ClusteredMap { map, kmeans: km, water_cluster })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_tone(w: usize, h: usize) -> RasterMap {
        let data = (0..w * h).map(|i| if i % w < w / 2 { 0.1 } else { 0.9 }).collect();
        RasterMap::grayscale(w, h, 10.0, data).unwrap()
    }

    #[test]
    fn two_tone_partition_is_exact() {
        let map = cluster_map(&two_tone(64, 64), 2, 7).unwrap();
        for iy in 0..64 {
            for ix in 0..64 {
                let want = if ix < 32 { Cell::Feasible } else { Cell::Forbidden };
                assert_eq!(map.cell(ix, iy), want);
            }
        }
    }

    #[test]
    fn water_seed_overrides_intensity_rule() {
        let opts = ClusterOptions { water_seed: Some(Point2::new(600.0, 5.0)), ..Default::default() };
        let c = cluster_map_with(&two_tone(64, 4), &opts).unwrap();
        assert_eq!(c.map.cell(63, 0), Cell::Feasible);
        assert_eq!(c.map.cell(0, 0), Cell::Forbidden);
    }

    #[test]
    fn k_one_keeps_everything_feasible() {
        let c = cluster_map_with(&two_tone(8, 8), &ClusterOptions { k: 1, ..Default::default() }).unwrap();
        assert_eq!(c.map.feasible_count(), 64);
        assert!((c.kmeans.centers[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn raster_validation() {
        assert!(RasterMap::grayscale(0, 3, 1.0, vec![]).is_err());
        assert!(RasterMap::grayscale(1, 1, 0.0, vec![0.5]).is_err());
        assert!(RasterMap::grayscale(1, 1, 1.0, vec![1.5]).is_err());
        assert!(cluster_map(&RasterMap::grayscale(2, 1, 1.0, vec![0.1, 0.2]).unwrap(), 3, 0).is_err());
    }

    #[test]
    fn feasibility_queries() {
        let map = GridMap::open(10, 10, 10.0, Point2::new(0.0, 0.0), 1000.0).unwrap();
        assert!(map.is_feasible(Point3::new(50.0, 50.0, 10.0)));
        assert!(!map.is_feasible(Point3::new(-0.1, 50.0, 10.0)));
        assert!(!map.is_feasible(Point3::new(50.0, 50.0, 1000.5)));
        assert!(!map.is_feasible(Point3::new(50.0, 50.0, -1.0)));
        // boundary floors into the upper cell; the far edge is outside
        assert_eq!(map.world_to_cell(Point2::new(10.0, 20.0)), Some((1, 2)));
        assert!(!map.is_feasible(Point3::new(100.0, 50.0, 10.0)));
        assert_eq!(map.distance_to_forbidden(Point2::new(50.0, 50.0)), f64::INFINITY);
    }

    #[test]
    fn single_forbidden_cell_distance() {
        // cell (9, 9) of a 10 m grid at the origin has its center at (95, 95)
        let mut occ = vec![Cell::Feasible; 40 * 40];
        occ[9 * 40 + 9] = Cell::Forbidden;
        let map = GridMap::new(40, 40, 10.0, Point2::new(5.0, 5.0), 1000.0, occ).unwrap();
        assert_eq!(map.cell_center(9, 9), Point2::new(100.0, 100.0));

        let d = map.distance_to_forbidden(Point2::new(160.0, 100.0));
        let expect = 60.0 - 5.0 * 2f64.sqrt();
        assert!((d - expect).abs() <= 10.0);
        assert!((d - expect).abs() < 1e-12);
        assert_eq!(map.distance_to_forbidden(Point2::new(101.0, 99.0)), 0.0);
        assert_eq!(map.distance_to_forbidden(Point2::new(-50.0, 99.0)), 0.0);
    }

    #[test]
    fn distance_agrees_with_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let occ: Vec<Cell> = (0..32 * 32)
            .map(|_| if rng.random::<f64>() < 0.08 { Cell::Forbidden } else { Cell::Feasible })
            .collect();
        let map = GridMap::new(32, 32, 10.0, Point2::new(-40.0, 25.0), 1000.0, occ).unwrap();
        let diag = 10.0 * 2f64.sqrt();
        for _ in 0..50 {
            let p = Point2::new(-40.0 + rng.random::<f64>() * 320.0, 25.0 + rng.random::<f64>() * 320.0);
            let mut brute = f64::INFINITY;
            for iy in 0..32 {
                for ix in 0..32 {
                    if map.cell(ix, iy) == Cell::Forbidden {
                        brute = brute.min(((p - map.cell_center(ix, iy)).norm() - diag / 2.0).max(0.0));
                    }
                }
            }
            let d = map.distance_to_forbidden(p);
            assert!((d - brute).abs() <= diag, "{d} vs {brute}");
            assert!(d >= brute - 1e-9);
        }
    }

    #[test]
    fn world_cell_round_trip_is_within_a_cell() {
        let map = GridMap::open(20, 30, 7.5, Point2::new(3.0, -9.0), 1000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = Point2::new(3.0 + rng.random::<f64>() * 150.0, -9.0 + rng.random::<f64>() * 225.0);
            let (ix, iy) = map.world_to_cell(p).unwrap();
            assert!((map.cell_center(ix, iy) - p).norm() < map.cell_size());
        }
    }
}
