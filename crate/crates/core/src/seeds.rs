//! Cross-state motion seeds: per-pixel 3D displacement samples between the
//! closed and opened point maps, with confidence gating, discontinuity
//! adjustment, and displacement-band filtering.
//!
//! The band filter keeps the middle of the displacement distribution — the
//! shortest seeds are static-surface jitter, the longest tend to straddle
//! occlusion changes where the same pixel sees unrelated surfaces.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::pointmap::{check_same_resolution, PointMap};

/// 3D gap between adjacent pixels that marks a depth discontinuity, as a
/// fraction of scene scale. Matches the renderer's edge rule.
pub const SILHOUETTE_GAP_FRACTION: f64 = 0.02;

/// The two 3D points observed at one pixel across states, with their
/// displacement magnitude cached.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSeed {
    pub row: usize,
    pub col: usize,
    pub p0: Vector3<f64>,
    pub p1: Vector3<f64>,
    /// ‖p1 − p0‖.
    pub d: f64,
}

impl MotionSeed {
    pub fn new(row: usize, col: usize, p0: Vector3<f64>, p1: Vector3<f64>) -> Self {
        MotionSeed { row, col, p0, p1, d: (p1 - p0).norm() }
    }
}

#[derive(Debug, Clone)]
pub struct SeedFilterConfig {
    /// Both endpoints must exceed this confidence (strict).
    pub conf_gate: f64,
    /// Fraction of the shortest displacements dropped by the band filter.
    pub low_pct: f64,
    /// Fraction of the longest displacements dropped.
    pub high_pct: f64,
    /// Seeds moving less than this fraction of scene scale are static.
    pub abs_floor: f64,
    /// Chebyshev pixel radius searched when snapping off discontinuities.
    pub adjust_radius: usize,
}

impl Default for SeedFilterConfig {
    fn default() -> Self {
        SeedFilterConfig {
            conf_gate: 0.85,
            low_pct: 0.15,
            high_pct: 0.20,
            abs_floor: 1e-3,
            adjust_radius: 2,
        }
    }
}

impl SeedFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.conf_gate > 0.0 && self.conf_gate < 1.0) {
            return Err(Error::Geometry(format!("conf_gate {} outside (0, 1)", self.conf_gate)));
        }
        let sum = self.low_pct + self.high_pct;
        if !(self.low_pct >= 0.0 && self.high_pct >= 0.0 && sum < 1.0) {
            return Err(Error::Geometry(format!(
                "percentile bands {}+{} must be nonnegative and sum below 1",
                self.low_pct, self.high_pct
            )));
        }
        if !(self.abs_floor >= 0.0 && self.abs_floor.is_finite()) {
            return Err(Error::Geometry(format!("abs_floor {} must be >= 0", self.abs_floor)));
        }
        Ok(())
    }
}

/// Diagonal of the union bounding box over the valid points of both maps —
/// the scene-scale reference every fractional threshold multiplies.
pub fn pair_scale(p0: &PointMap, p1: &PointMap) -> f64 {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    let mut any = false;
    for map in [p0, p1] {
        for (p, &c) in map.points().iter().zip(map.confidences()) {
            if c > 0.0 {
                lo = lo.inf(p);
                hi = hi.sup(p);
                any = true;
            }
        }
    }
    if any {
        (hi - lo).norm()
    } else {
        0.0
    }
}

/// One seed per pixel where both maps are valid and the smaller confidence
/// strictly exceeds the gate; row-major order.
pub fn extract_candidates(
    p0: &PointMap,
    p1: &PointMap,
    cfg: &SeedFilterConfig,
) -> Result<Vec<MotionSeed>> {
    cfg.validate()?;
    check_same_resolution(p0, p1)?;
    let mut seeds = Vec::new();
    for r in 0..p0.height() {
        for c in 0..p0.width() {
            if p0.is_valid(r, c)
                && p1.is_valid(r, c)
                && p0.confidence(r, c).min(p1.confidence(r, c)) > cfg.conf_gate
            {
                seeds.push(MotionSeed::new(r, c, p0.point(r, c), p1.point(r, c)));
            }
        }
    }
    Ok(seeds)
}

/// Plane through one image row or column of valid points. For a pinhole
/// camera every such plane passes exactly through the camera center, no
/// matter what geometry the pixels see — the one scene-independent cue the
/// maps carry. Lines (a row seeing a single flat surface) fix no plane and
/// are rejected.
fn scanline_plane(points: &[Vector3<f64>], scale: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
    if points.len() < 8 {
        return None;
    }
    let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= points.len() as f64;
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let (mid, min) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    // Needs real 2D spread in the plane, and far less across it.
    if mid < (0.02 * scale).powi(2) || min > 0.25 * mid {
        return None;
    }
    Some((eig.eigenvectors.column(order[2]).into_owned(), centroid))
}

/// Recovers the camera center as the least-squares intersection of the
/// scanline planes of both maps. Returns None when too few scanlines cross
/// depth structure (a single flat face), the planes are near-parallel, or
/// the solution lands implausibly close to the scene.
pub fn estimate_camera_center(
    p0: &PointMap,
    p1: &PointMap,
    scale: f64,
) -> Option<Vector3<f64>> {
    let mut a = Matrix3::<f64>::zeros();
    let mut b = Vector3::<f64>::zeros();
    let mut count = 0usize;
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    let mut buf: Vec<Vector3<f64>> = Vec::new();
    for map in [p0, p1] {
        let mut feed = |pts: &[Vector3<f64>]| {
            if let Some((n, m)) = scanline_plane(pts, scale) {
                let proj = n * n.transpose();
                a += proj;
                b += proj * m;
                count += 1;
            }
        };
        for r in 0..map.height() {
            buf.clear();
            for c in 0..map.width() {
                if map.is_valid(r, c) {
                    let p = map.point(r, c);
                    lo = lo.inf(&p);
                    hi = hi.sup(&p);
                    buf.push(p);
                }
            }
            feed(&buf);
        }
        for c in 0..map.width() {
            buf.clear();
            for r in 0..map.height() {
                if map.is_valid(r, c) {
                    buf.push(map.point(r, c));
                }
            }
            feed(&buf);
        }
        // Diagonals too: row planes alone (or column planes alone) share a
        // common direction, leaving the intersection a line. Any straight
        // image line back-projects to a plane through the center.
        for d in 0..(map.height() + map.width() - 1) {
            for anti in [false, true] {
                buf.clear();
                let r_lo = d.saturating_sub(map.width() - 1);
                for r in r_lo..=d.min(map.height() - 1) {
                    let c = if anti { map.width() - 1 - (d - r) } else { d - r };
                    if map.is_valid(r, c) {
                        buf.push(map.point(r, c));
                    }
                }
                feed(&buf);
            }
        }
    }
    let debug = std::env::var("ARTIKIT_DEBUG_SUPPLEMENT").is_ok();
    if count < 8 {
        if debug {
            eprintln!("cam: count {count}");
        }
        return None;
    }
    let eigenvalues = a.symmetric_eigen().eigenvalues;
    if eigenvalues.min() <= 1e-3 * eigenvalues.max() {
        if debug {
            eprintln!("cam: eigen ratio {:.2e}", eigenvalues.min() / eigenvalues.max());
        }
        return None;
    }
    let center = a.lu().solve(&b)?;
    // A real viewpoint sits well outside the observed geometry.
    if (center - (lo + hi) / 2.0).norm() < 0.5 * scale {
        if debug {
            eprintln!(
                "cam: center dist {:.3} vs {:.3}",
                (center - (lo + hi) / 2.0).norm(),
                0.5 * scale
            );
        }
        return None;
    }
    Some(center)
}

fn on_discontinuity(
    map: &PointMap,
    row: usize,
    col: usize,
    cam: &Vector3<f64>,
    jump: f64,
) -> bool {
    let range0 = (map.point(row, col) - cam).norm();
    for (nr, nc) in [
        (row.wrapping_sub(1), col),
        (row + 1, col),
        (row, col.wrapping_sub(1)),
        (row, col + 1),
    ] {
        if nr >= map.height() || nc >= map.width() {
            continue;
        }
        if !map.is_valid(nr, nc) {
            return true;
        }
        if ((map.point(nr, nc) - cam).norm() - range0).abs() > jump {
            return true;
        }
    }
    false
}

/// Nearest-to-camera gated neighbor within the window, excluding the pixel
/// itself; row-major scan keeps ties deterministic.
fn snap_endpoint(
    map: &PointMap,
    row: usize,
    col: usize,
    cam: &Vector3<f64>,
    cfg: &SeedFilterConfig,
) -> Option<Vector3<f64>> {
    let rad = cfg.adjust_radius as isize;
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for dr in -rad..=rad {
        for dc in -rad..=rad {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (nr, nc) = (row as isize + dr, col as isize + dc);
            if nr < 0 || nc < 0 || nr >= map.height() as isize || nc >= map.width() as isize {
                continue;
            }
            let (nr, nc) = (nr as usize, nc as usize);
            if !(map.confidence(nr, nc) > cfg.conf_gate) {
                continue;
            }
            let p = map.point(nr, nc);
            let range = (p - cam).norm();
            if best.as_ref().is_none_or(|(b, _)| range < *b) {
                best = Some((range, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Snaps each seed endpoint that sits on a depth discontinuity to the gated
/// neighbor nearest the camera; a discontinuity endpoint with no such
/// neighbor drops the seed. Seeds pass through untouched when no camera
/// center is recoverable from the maps.
pub fn adjust_seeds(
    seeds: Vec<MotionSeed>,
    p0: &PointMap,
    p1: &PointMap,
    cfg: &SeedFilterConfig,
) -> Vec<MotionSeed> {
    let scale = pair_scale(p0, p1);
    let Some(cam) = estimate_camera_center(p0, p1, scale) else {
        return seeds;
    };
    let jump = SILHOUETTE_GAP_FRACTION * scale;
    let mut out = Vec::with_capacity(seeds.len());
    'seed: for s in seeds {
        let mut endpoints = [s.p0, s.p1];
        for (i, map) in [p0, p1].into_iter().enumerate() {
            if on_discontinuity(map, s.row, s.col, &cam, jump) {
                match snap_endpoint(map, s.row, s.col, &cam, cfg) {
                    Some(p) => endpoints[i] = p,
                    None => continue 'seed,
                }
            }
        }
        out.push(MotionSeed::new(s.row, s.col, endpoints[0], endpoints[1]));
    }
    out
}

/// Drops sub-floor (static) seeds, then the shortest `low_pct` and longest
/// `high_pct` of the remainder; the middle band returns in input order.
/// Percentile counts use floor; displacement ties break by pixel order.
pub fn filter_displacement(
    seeds: &[MotionSeed],
    cfg: &SeedFilterConfig,
    scale: f64,
) -> Vec<MotionSeed> {
    let floor = cfg.abs_floor * scale;
    let mut order: Vec<usize> = (0..seeds.len()).filter(|&i| seeds[i].d >= floor).collect();
    order.sort_by(|&i, &j| {
        seeds[i]
            .d
            .partial_cmp(&seeds[j].d)
            .unwrap()
            .then_with(|| (seeds[i].row, seeds[i].col).cmp(&(seeds[j].row, seeds[j].col)))
    });
    let n = order.len();
    let lo = (cfg.low_pct * n as f64).floor() as usize;
    let hi = (cfg.high_pct * n as f64).floor() as usize;
    let top = n.saturating_sub(hi);
    if lo >= top {
        return Vec::new();
    }
    let mut keep = vec![false; seeds.len()];
    for &i in &order[lo..top] {
        keep[i] = true;
    }
    (0..seeds.len()).filter(|&i| keep[i]).map(|i| seeds[i].clone()).collect()
}
