//! B-spline path encoding, corridor search boxes, and trajectory synthesis
//! through a current field.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::current_field::CurrentField;
use crate::error::{Error, Result};
use crate::Point3;

pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_SAMPLES: usize = 100;
/// Along-track ground speed below which a segment counts as unflyable, m/s.
pub const MIN_PROGRESS_SPEED: f64 = 0.1;

/// Fixed endpoints plus the free interior control points.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolygon {
    pub start: Point3,
    pub interior: Vec<Point3>,
    pub target: Point3,
}

impl ControlPolygon {
    pub fn new(start: Point3, interior: Vec<Point3>, target: Point3) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::InvalidInput("control polygon needs at least one interior point".into()));
        }
        let all_finite = std::iter::once(&start)
            .chain(&interior)
            .chain(std::iter::once(&target))
            .all(|p| p.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::InvalidInput("control polygon has non-finite coordinates".into()));
        }
        Ok(Self { start, interior, target })
    }

    /// Interior points from `[x0, y0, z0, x1, ...]`.
    pub fn from_flat(start: Point3, target: Point3, flat: &[f64]) -> Self {
        debug_assert!(flat.len().is_multiple_of(3) && !flat.is_empty());
        let interior = flat.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
        Self { start, interior, target }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.interior.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    /// Start, interior points, target.
    pub fn points(&self) -> Vec<Point3> {
        let mut pts = Vec::with_capacity(self.interior.len() + 2);
        pts.push(self.start);
        pts.extend_from_slice(&self.interior);
        pts.push(self.target);
        pts
    }

    pub fn len(&self) -> usize {
        self.interior.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Serialize for ControlPolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pts: Vec<[f64; 3]> = self.points().iter().map(|p| [p.x, p.y, p.z]).collect();
        pts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ControlPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pts: Vec<[f64; 3]> = Vec::deserialize(d)?;
        if pts.len() < 3 {
            return Err(serde::de::Error::custom("control polygon needs start, target and one interior point"));
        }
        let p: Vec<Point3> = pts.into_iter().map(Point3::from).collect();
        ControlPolygon::new(p[0], p[1..p.len() - 1].to_vec(), p[p.len() - 1]).map_err(serde::de::Error::custom)
    }
}

/// One axis-aligned search box per interior control point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorBounds {
    pub start: Point3,
    pub target: Point3,
    pub lower: Vec<Point3>,
    pub upper: Vec<Point3>,
}

/// Splits every axis of `[start, target]` into `n` equal pieces; box `i` is piece `i`
/// counted from the start.
pub fn corridor_bounds(start: Point3, target: Point3, n: usize) -> Result<CorridorBounds> {
    if n == 0 {
        return Err(Error::InvalidInput("corridor needs at least one interior point".into()));
    }
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let d = target - start;
    for i in 0..n {
        let a = start + d * (i as f64 / n as f64);
        let b = if i + 1 == n { target } else { start + d * ((i + 1) as f64 / n as f64) };
        lower.push(a.inf(&b));
        upper.push(a.sup(&b));
    }
    Ok(CorridorBounds { start, target, lower, upper })
}

impl CorridorBounds {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Search-space dimension, three per interior point.
    pub fn dim(&self) -> usize {
        3 * self.lower.len()
    }

    pub fn flat_lower(&self) -> Vec<f64> {
        self.lower.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    pub fn flat_upper(&self) -> Vec<f64> {
        self.upper.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    /// Grows every box by `margin` per axis, then clamps it into `[lo, hi]`.
    pub fn padded(&self, margin: Point3, lo: Point3, hi: Point3) -> Self {
        let clamp = |p: Point3| p.sup(&lo).inf(&hi);
        Self {
            start: self.start,
            target: self.target,
            lower: self.lower.iter().map(|l| clamp(l - margin)).collect(),
            upper: self.upper.iter().zip(&self.lower).map(|(u, l)| clamp(u + margin).sup(&clamp(l - margin))).collect(),
        }
    }

    pub fn contains(&self, poly: &ControlPolygon) -> bool {
        poly.interior.len() == self.len()
            && poly
                .interior
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(p, (l, u))| (0..3).all(|a| p[a] >= l[a] && p[a] <= u[a]))
    }

    /// Clamps a flat candidate into the boxes.
    pub fn clip(&self, flat: &mut [f64]) {
        for (i, v) in flat.iter_mut().enumerate() {
            let (b, a) = (i / 3, i % 3);
            *v = v.clamp(self.lower[b][a], self.upper[b][a]);
        }
    }

    pub fn polygon(&self, flat: &[f64]) -> ControlPolygon {
        ControlPolygon::from_flat(self.start, self.target, flat)
    }

    /// Each coordinate `L + rand() * (U - L)`.
    pub fn random_polygon_with(&self, mut rand: impl FnMut() -> f64) -> ControlPolygon {
        let interior = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| Point3::from_fn(|a, _| l[a] + rand() * (u[a] - l[a])))
            .collect();
        ControlPolygon { start: self.start, interior, target: self.target }
    }

    pub fn random_polygon<R: Rng>(&self, rng: &mut R) -> ControlPolygon {
        self.random_polygon_with(|| rng.random::<f64>())
    }
}

/// Clamped uniform knot vector for `n` control points of degree `p`.
pub fn clamped_knots(n: usize, p: usize) -> Vec<f64> {
    let spans = n - p;
    let mut knots = vec![0.0; p + 1];
    knots.extend((1..spans).map(|i| i as f64 / spans as f64));
    knots.extend(std::iter::repeat_n(1.0, p + 1));
    knots
}

/// All `n` Cox-de Boor basis values at `u`.
pub fn basis_functions(knots: &[f64], n: usize, p: usize, u: f64) -> Vec<f64> {
    // degree 0: the half-open span holding u, with u = 1 assigned to the last non-empty span
    let mut b: Vec<f64> = (0..knots.len() - 1)
        .map(|i| {
            let inside = knots[i] <= u && u < knots[i + 1];
            let last = u >= 1.0 && knots[i] < knots[i + 1] && knots[i + 1] >= 1.0;
            if inside || last {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 1..=p {
        for i in 0..knots.len() - 1 - k {
            let left = if knots[i + k] > knots[i] { (u - knots[i]) / (knots[i + k] - knots[i]) * b[i] } else { 0.0 };
            let right = if knots[i + k + 1] > knots[i + 1] {
                (knots[i + k + 1] - u) / (knots[i + k + 1] - knots[i + 1]) * b[i + 1]
            } else {
                0.0
            };
            b[i] = left + right;
        }
    }
    b.truncate(n);
    b
}

/// Precomputed basis matrix for sampling polygons of a fixed size.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSampler {
    n_ctrl: usize,
    degree: usize,
    samples: usize,
    basis: Vec<f64>,
}

impl CurveSampler {
    /// Degree drops to `n_ctrl - 1` when there are too few control points.
    pub fn new(n_ctrl: usize, samples: usize, degree: usize) -> Result<Self> {
        if n_ctrl < 2 || samples < 2 || degree == 0 {
            return Err(Error::InvalidInput("sampler needs >= 2 control points, >= 2 samples and degree >= 1".into()));
        }
        let degree = degree.min(n_ctrl - 1);
        let knots = clamped_knots(n_ctrl, degree);
        let mut basis = Vec::with_capacity(samples * n_ctrl);
        for j in 0..samples {
            let u = j as f64 / (samples - 1) as f64;
            basis.extend(basis_functions(&knots, n_ctrl, degree, u));
        }
        Ok(Self { n_ctrl, degree, samples, basis })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn n_ctrl(&self) -> usize {
        self.n_ctrl
    }

    /// Basis weights of sample `j`.
    pub fn weights(&self, j: usize) -> &[f64] {
        &self.basis[j * self.n_ctrl..(j + 1) * self.n_ctrl]
    }

    pub fn sample(&self, poly: &ControlPolygon) -> Vec<Point3> {
        assert_eq!(poly.len(), self.n_ctrl, "polygon size does not match sampler");
        let ctrl = poly.points();
        let mut out: Vec<Point3> = (0..self.samples)
            .map(|j| self.weights(j).iter().zip(&ctrl).fold(Point3::zeros(), |acc, (w, c)| acc + c * *w))
            .collect();
        out[0] = poly.start;
        out[self.samples - 1] = poly.target;
        out
    }
}

/// Samples a polygon's clamped cubic B-spline at `m` uniform parameters.
pub fn sample_curve(poly: &ControlPolygon, m: usize) -> Result<Vec<Point3>> {
    Ok(CurveSampler::new(poly.len(), m, DEFAULT_DEGREE)?.sample(poly))
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attitude {
    pub psi: f64,
    pub theta: f64,
    pub r: f64,
}

/// Per-segment heading, pitch and yaw rate. `durations[i]` is the time spent on
/// segment `i`; zero-length segments reuse the previous angles.
pub fn heading_profile(points: &[Point3], durations: &[f64]) -> Result<Vec<Attitude>> {
    if points.len() < 2 || durations.len() != points.len() - 1 {
        return Err(Error::InvalidInput("heading profile needs >= 2 points and one duration per segment".into()));
    }
    let mut out: Vec<Attitude> = Vec::with_capacity(points.len() - 1);
    for (i, w) in points.windows(2).enumerate() {
        let d = w[1] - w[0];
        let horizontal = d.x.hypot(d.y);
        let prev = out.last().copied();
        let (psi, theta) = if d.norm() == 0.0 {
            prev.map_or((0.0, 0.0), |a| (a.psi, a.theta))
        } else {
            let psi = if horizontal == 0.0 { prev.map_or(0.0, |a| a.psi) } else { d.y.atan2(d.x) };
            (psi, (-d.z).atan2(horizontal))
        };
        let r = match prev {
            Some(a) if durations[i] > 0.0 => wrap_angle(psi - a.psi) / durations[i],
            _ => 0.0,
        };
        out.push(Attitude { psi, theta, r });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Point3,
    pub psi: f64,
    pub theta: f64,
    pub r: f64,
    /// Ground velocity components, m/s.
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// `INFINITY` when some segment cannot make headway.
    pub t_f: f64,
    pub length: f64,
    pub feasible: bool,
    /// Index of the first segment that cannot make headway.
    pub stalled_segment: Option<usize>,
}

impl Trajectory {
    pub fn start(&self) -> Point3 {
        self.samples[0].position
    }

    pub fn end(&self) -> Point3 {
        self.samples[self.samples.len() - 1].position
    }

    pub fn points(&self) -> Vec<Point3> {
        self.samples.iter().map(|s| s.position).collect()
    }

    /// Position at time `t` along the polyline, clamped to the ends.
    pub fn position_at(&self, t: f64) -> Point3 {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0].position;
        }
        let i = s.partition_point(|x| x.t <= t);
        if i >= s.len() {
            return self.end();
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let f = (t - a.t) / (b.t - a.t);
        a.position + (b.position - a.position) * f
    }

    /// `t, x, y, z, psi, theta, r, u, v, w` rows, times shifted by `t0`.
    pub fn write_csv<W: Write>(&self, t0: f64, out: W) -> Result<()> {
        write_samples_csv(&self.samples, t0, out)
    }
}

pub fn write_samples_csv<W: Write>(samples: &[TrajectorySample], t0: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "z", "psi", "theta", "r", "u", "v", "w"])?;
    for s in samples {
        let row = [s.t + t0, s.position.x, s.position.y, s.position.z, s.psi, s.theta, s.r, s.u, s.v, s.w];
        w.write_record(row.map(|v| format!("{v:.6}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Times a sampled ground path: each segment is flown at the water speed along its
/// direction plus the current at its midpoint; the along-track part sets the segment time.
pub fn synthesize(points: &[Point3], water_speed: f64, current: &CurrentField) -> Result<Trajectory> {
    if !(water_speed > 0.0) {
        return Err(Error::InvalidInput(format!("water speed must be positive, got {water_speed}")));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("trajectory needs at least one point".into()));
    }
    let mut pts: Vec<Point3> = Vec::with_capacity(points.len());
    for p in points {
        if pts.last() != Some(p) {
            pts.push(*p);
        }
    }
    if pts.len() == 1 {
        let s = TrajectorySample { t: 0.0, position: pts[0], psi: 0.0, theta: 0.0, r: 0.0, u: 0.0, v: 0.0, w: 0.0 };
        return Ok(Trajectory { samples: vec![s], t_f: 0.0, length: 0.0, feasible: true, stalled_segment: None });
    }

    let segs = pts.len() - 1;
    let mut durations = Vec::with_capacity(segs);
    let mut ground = Vec::with_capacity(segs);
    let mut length = 0.0;
    let mut stalled = None;
    for (i, w) in pts.windows(2).enumerate() {
        let d = w[1] - w[0];
        let len = d.norm();
        length += len;
        let dir = d / len;
        let c = current.velocity_3d((w[0] + w[1]) * 0.5).vector();
        let along = water_speed + c.dot(&dir);
        if along <= MIN_PROGRESS_SPEED && stalled.is_none() {
            stalled = Some(i);
        }
        durations.push(if along > MIN_PROGRESS_SPEED { len / along } else { f64::INFINITY });
        ground.push(dir * water_speed + c);
    }
    let feasible = stalled.is_none();
    let attitude = heading_profile(&pts, &durations)?;

    let mut samples = Vec::with_capacity(pts.len());
    let mut t = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let k = i.min(segs - 1);
        let (a, g) = (attitude[k], ground[k]);
        let r = if i == segs { 0.0 } else { a.r };
        samples.push(TrajectorySample { t, position: *p, psi: a.psi, theta: a.theta, r, u: g.x, v: g.y, w: g.z });
        if i < segs {
            t += if feasible { durations[i] } else { 0.0 };
        }
    }
    let t_f = if feasible { t } else { f64::INFINITY };
    Ok(Trajectory { samples, t_f, length, feasible, stalled_segment: stalled })
}

/// Samples the polygon and times the resulting path.
pub fn synthesize_trajectory(poly: &ControlPolygon, water_speed: f64, current: &CurrentField, sampler: &CurveSampler) -> Result<Trajectory> {
    synthesize(&sampler.sample(poly), water_speed, current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current_field::{CurrentConfig, Vortex};
    use crate::Point2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn corridor_uniform_partition() {
        let b = corridor_bounds(p(0.0, 0.0, 0.0), p(100.0, 0.0, 0.0), 4).unwrap();
        let xs: Vec<(f64, f64)> = b.lower.iter().zip(&b.upper).map(|(l, u)| (l.x, u.x)).collect();
        assert_eq!(xs, vec![(0.0, 25.0), (25.0, 50.0), (50.0, 75.0), (75.0, 100.0)]);
        assert!(b.lower.iter().chain(&b.upper).all(|q| q.y == 0.0 && q.z == 0.0));

        let one = corridor_bounds(p(5.0, 9.0, 1.0), p(-5.0, 19.0, 1.0), 1).unwrap();
        assert_eq!((one.lower[0], one.upper[0]), (p(-5.0, 9.0, 1.0), p(5.0, 19.0, 1.0)));

        let point = corridor_bounds(p(3.0, 3.0, 3.0), p(3.0, 3.0, 3.0), 3).unwrap();
        assert!(point.lower.iter().chain(&point.upper).all(|q| *q == p(3.0, 3.0, 3.0)));
        assert!(corridor_bounds(p(0.0, 0.0, 0.0), p(1.0, 1.0, 1.0), 0).is_err());
    }

    #[test]
    fn reversed_axes_count_boxes_from_the_start() {
        let b = corridor_bounds(p(100.0, 0.0, 0.0), p(0.0, 0.0, 0.0), 2).unwrap();
        assert_eq!((b.lower[0].x, b.upper[0].x), (50.0, 100.0));
        assert_eq!((b.lower[1].x, b.upper[1].x), (0.0, 50.0));
    }

    #[test]
    fn random_polygons_stay_in_their_boxes() {
        let b = corridor_bounds(p(300.0, 350.0, 30.0), p(3130.0, 3180.0, 80.0), 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(b.contains(&b.random_polygon(&mut rng)));
        }
        let mid = b.random_polygon_with(|| 0.5);
        for (i, q) in mid.interior.iter().enumerate() {
            assert_eq!(*q, (b.lower[i] + b.upper[i]) * 0.5);
        }
        let flat = corridor_bounds(p(0.0, 0.0, 0.0), p(70.0, 0.0, 0.0), 7).unwrap();
        let poly = flat.random_polygon(&mut rng);
        assert!(poly.interior.iter().all(|q| q.y == 0.0 && q.z == 0.0));
    }

    #[test]
    fn padding_clamps_into_the_volume() {
        let b = corridor_bounds(p(0.0, 0.0, 10.0), p(100.0, 100.0, 20.0), 2).unwrap();
        let padded = b.padded(p(30.0, 30.0, 30.0), p(0.0, 0.0, 0.0), p(1000.0, 1000.0, 25.0));
        assert_eq!(padded.lower[0], p(0.0, 0.0, 0.0));
        assert_eq!(padded.upper[1], p(130.0, 130.0, 25.0));
        assert!(padded.lower.iter().zip(&padded.upper).all(|(l, u)| (0..3).all(|a| l[a] <= u[a])));
    }

    #[test]
    fn knots_and_degree_reduction() {
        assert_eq!(clamped_knots(5, 3), vec![0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(CurveSampler::new(3, 10, 3).unwrap().degree(), 2);
        assert_eq!(CurveSampler::new(2, 10, 3).unwrap().degree(), 1);
        assert!(CurveSampler::new(3, 1, 3).is_err());
    }

    /// de Boor's algorithm, independent of the basis-matrix path.
    fn de_boor(ctrl: &[Point3], p: usize, u: f64) -> Point3 {
        let knots = clamped_knots(ctrl.len(), p);
        let n = ctrl.len();
        let mut k = p;
        while k < n - 1 && u >= knots[k + 1] {
            k += 1;
        }
        let mut d: Vec<Point3> = (0..=p).map(|j| ctrl[j + k - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let i = j + k - p;
                let denom = knots[i + p + 1 - r] - knots[i];
                let a = if denom > 0.0 { (u - knots[i]) / denom } else { 0.0 };
                d[j] = d[j - 1] * (1.0 - a) + d[j] * a;
            }
        }
        d[p]
    }

    #[test]
    fn sampler_matches_de_boor() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = corridor_bounds(p(0.0, 0.0, 0.0), p(1000.0, -400.0, 200.0), 5).unwrap().padded(
            p(200.0, 200.0, 200.0),
            p(-1e9, -1e9, -1e9),
            p(1e9, 1e9, 1e9),
        );
        let sampler = CurveSampler::new(7, 41, 3).unwrap();
        for _ in 0..20 {
            let poly = b.random_polygon(&mut rng);
            let pts = sampler.sample(&poly);
            for (j, q) in pts.iter().enumerate() {
                let u = j as f64 / 40.0;
                assert!((q - de_boor(&poly.points(), 3, u)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn collinear_polygon_samples_stay_on_the_line() {
        let poly = ControlPolygon::new(p(0.0, 0.0, 0.0), vec![p(10.0, 20.0, 5.0), p(40.0, 80.0, 20.0), p(15.0, 30.0, 7.5)], p(50.0, 100.0, 25.0)).unwrap();
        let dir = p(50.0, 100.0, 25.0).normalize();
        for q in sample_curve(&poly, 100).unwrap() {
            assert!(q.cross(&dir).norm() < 1e-9);
        }
    }

    #[test]
    fn heading_cases() {
        let a = heading_profile(&[p(0.0, 0.0, 0.0), p(10.0, 0.0, 0.0)], &[4.0]).unwrap();
        assert_eq!(a[0], Attitude { psi: 0.0, theta: 0.0, r: 0.0 });

        let dive = heading_profile(&[p(0.0, 0.0, 0.0), p(10.0, 0.0, 0.0), p(10.0, 0.0, 10.0)], &[1.0, 1.0]).unwrap();
        assert_eq!(dive[1].theta, -PI / 2.0);
        assert_eq!(dive[1].psi, 0.0);

        let stall = heading_profile(&[p(0.0, 0.0, 0.0), p(0.0, 5.0, -5.0), p(0.0, 5.0, -5.0)], &[1.0, 0.0]).unwrap();
        assert_eq!((stall[1].psi, stall[1].theta), (stall[0].psi, stall[0].theta));
        assert!(heading_profile(&[p(0.0, 0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn quarter_arc_has_constant_yaw_rate() {
        let n = 400;
        let radius = 500.0;
        let pts: Vec<Point3> = (0..=n)
            .map(|i| {
                let a = (i as f64 / n as f64) * PI / 2.0;
                p(radius * a.sin(), radius * (1.0 - a.cos()), 0.0)
            })
            .collect();
        let durations: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm() / 2.0).collect();
        let total: f64 = durations.iter().sum();
        let expect = (PI / 2.0) / total;
        let prof = heading_profile(&pts, &durations).unwrap();
        for a in &prof[1..] {
            assert!((a.r - expect).abs() < 0.02 * expect, "{} vs {expect}", a.r);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-0.1) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn straight_path_in_still_water() {
        let pts: Vec<Point3> = (0..=100).map(|i| p(25.0 * i as f64, 0.0, 50.0)).collect();
        let tr = synthesize(&pts, 2.5, &CurrentField::still()).unwrap();
        assert!((tr.t_f - 1000.0).abs() < 1e-9);
        assert!((tr.length - 2500.0).abs() < 1e-9);
        assert!(tr.feasible);
        assert_eq!(tr.samples.last().unwrap().t, tr.t_f);
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn vortex_stream_adds_along_track() {
        // a huge vortex a long way off gives a locally uniform 1 m/s stream along +x
        let field = CurrentField::new(
            vec![Vortex::new(Point2::new(0.0, 1.0e6), 10.0, 2.0 * PI * 1.0e6)],
            &CurrentConfig { vertical_scale: 0.0, ..Default::default() },
            0,
        )
        .unwrap();
        let (u, v) = field.velocity_2d(Point2::new(0.0, 0.0));
        assert!((u - 1.0).abs() < 1e-9 && v.abs() < 1e-9);
        let pts: Vec<Point3> = (0..=10).map(|i| p(100.0 * i as f64, 0.0, 10.0)).collect();
        let tr = synthesize(&pts, 2.5, &field).unwrap();
        assert!((tr.t_f - 1000.0 / 3.5).abs() < 1e-3);

        let head: Vec<Point3> = pts.iter().rev().copied().collect();
        let strong = CurrentField::new(
            vec![Vortex::new(Point2::new(0.0, 1.0e6), 10.0, 6.0 * PI * 1.0e6)],
            &CurrentConfig { vertical_scale: 0.0, ..Default::default() },
            0,
        )
        .unwrap();
        let stalled = synthesize(&head, 2.5, &strong).unwrap();
        assert!(!stalled.feasible);
        assert_eq!(stalled.t_f, f64::INFINITY);
        assert_eq!(stalled.stalled_segment, Some(0));
    }

    #[test]
    fn degenerate_leg_is_instant() {
        let tr = synthesize(&[p(1.0, 2.0, 3.0); 5], 2.5, &CurrentField::still()).unwrap();
        assert_eq!(tr.t_f, 0.0);
        assert_eq!(tr.samples.len(), 1);
    }

    #[test]
    fn position_lookup_interpolates() {
        let pts: Vec<Point3> = (0..=4).map(|i| p(10.0 * i as f64, 0.0, 0.0)).collect();
        let tr = synthesize(&pts, 2.0, &CurrentField::still()).unwrap();
        assert_eq!(tr.position_at(7.5), p(15.0, 0.0, 0.0));
        assert_eq!(tr.position_at(-1.0), pts[0]);
        assert_eq!(tr.position_at(1e9), pts[4]);
    }

    #[test]
    fn polygon_json_is_a_point_array() {
        let poly = ControlPolygon::new(p(0.0, 0.0, 0.0), vec![p(1.0, 2.0, 3.0)], p(4.0, 5.0, 6.0)).unwrap();
        let json = serde_json::to_string(&poly).unwrap();
        assert_eq!(json, "[[0.0,0.0,0.0],[1.0,2.0,3.0],[4.0,5.0,6.0]]");
        assert_eq!(serde_json::from_str::<ControlPolygon>(&json).unwrap(), poly);
        assert!(serde_json::from_str::<ControlPolygon>("[[0,0,0],[1,1,1]]").is_err());
    }
}
