//! Exact Euclidean feature transform on a cell grid.
//!
//! Two separable passes of the lower-envelope-of-parabolas method. Besides the
//! squared distance, each cell records which site realizes it, so a query can
//! measure the true distance from an arbitrary point to that site.

/// Sentinel for "no site reachable".
pub const NO_SITE: u32 = u32::MAX;

/// One-dimensional squared distance transform with argmin tracking.
///
/// `f[q]` is the cost of site `q` (`INFINITY` = not a site). Writes
/// `min_q f[q] + (p - q)^2` into `d[p]` and the minimizing `q` into `arg[p]`.
fn envelope_1d(f: &[f64], d: &mut [f64], arg: &mut [usize], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        arg.iter_mut().for_each(|x| *x = usize::MAX);
        return;
    }
    let mut k = 0;
    for p in 0..n {
        while k + 1 < v.len() && z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        let dx = p as f64 - q as f64;
        d[p] = dx * dx + f[q];
        arg[p] = q;
    }
}

/// Nearest-site index for every cell of a `width x height` grid (row-major, rows along y).
pub fn feature_transform(sites: &[bool], width: usize, height: usize) -> Vec<u32> {
    assert_eq!(sites.len(), width * height);
    let mut v = Vec::new();
    let mut z = Vec::new();

    // pass 1: along x inside each row
    let mut row_d = vec![f64::INFINITY; width * height];
    let mut row_arg = vec![usize::MAX; width * height];
    let mut f = vec![0.0; width];
    for y in 0..height {
        for x in 0..width {
            f[x] = if sites[y * width + x] { 0.0 } else { f64::INFINITY };
        }
        let range = y * width..(y + 1) * width;
        envelope_1d(&f, &mut row_d[range.clone()], &mut row_arg[range], &mut v, &mut z);
    }

    // pass 2: along y inside each column
    let mut out = vec![NO_SITE; width * height];
    let mut col_f = vec![0.0; height];
    let mut col_d = vec![0.0; height];
    let mut col_arg = vec![0usize; height];
    for x in 0..width {
        for y in 0..height {
            col_f[y] = row_d[y * width + x];
        }
        envelope_1d(&col_f, &mut col_d, &mut col_arg, &mut v, &mut z);
        for y in 0..height {
            if col_d[y].is_finite() {
                let sy = col_arg[y];
                let sx = row_arg[sy * width + x];
                out[y * width + x] = (sy * width + sx) as u32;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(sites: &[bool], w: usize, h: usize, x: usize, y: usize) -> Option<f64> {
        let mut best: Option<f64> = None;
        for sy in 0..h {
            for sx in 0..w {
                if sites[sy * w + sx] {
                    let d = ((sx as f64 - x as f64).powi(2) + (sy as f64 - y as f64).powi(2)).sqrt();
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_at_cell_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(w, h, p) in &[(17usize, 9usize, 0.1), (32, 32, 0.03), (5, 40, 0.5), (1, 7, 0.3)] {
            let sites: Vec<bool> = (0..w * h).map(|_| rng.random::<f64>() < p).collect();
            let ft = feature_transform(&sites, w, h);
            for y in 0..h {
                for x in 0..w {
                    let expect = brute(&sites, w, h, x, y);
                    let got = (ft[y * w + x] != NO_SITE).then(|| {
                        let i = ft[y * w + x] as usize;
                        let (sx, sy) = (i % w, i / w);
                        assert!(sites[i]);
                        ((sx as f64 - x as f64).powi(2) + (sy as f64 - y as f64).powi(2)).sqrt()
                    });
                    match (expect, got) {
                        (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
                        (None, None) => {}
                        other => panic!("mismatch {other:?}"),
                    }
                }
            }
        }
    }
}
