//! Ray-cast point-map rendering with the confidence model and deterministic
//! per-pixel noise.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ArticulatedObject, Camera};
use crate::error::{Error, Result};
use crate::kinematics::{pose_at, RigidTransform, StateIndex};
use crate::pointmap::PointMap;

/// Depth jump (as a fraction of bbox diagonal) that marks an edge pixel.
pub const EDGE_DEPTH_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Gaussian 3D noise, fraction of bbox diagonal.
    pub point_sigma: f64,
    /// Confidence assigned at depth discontinuities.
    pub edge_conf: f64,
    /// Per-row probability of a low-confidence ribbon strip.
    pub artifact_rate: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { point_sigma: 0.0, edge_conf: 0.7, artifact_rate: 0.0 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v) && v.is_finite();
        if !in_unit(self.point_sigma) || self.point_sigma > 0.05 {
            return Err(Error::Geometry(format!("point_sigma {} outside [0, 0.05]", self.point_sigma)));
        }
        if !in_unit(self.edge_conf) || !in_unit(self.artifact_rate) {
            return Err(Error::Geometry("noise parameters outside [0, 1]".into()));
        }
        Ok(())
    }
}

// ============================ deterministic rng ============================

/// splitmix64: tiny counter-based generator for per-pixel noise streams,
/// independent of render order and thread count.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut s = a ^ b.wrapping_mul(0x9e3779b97f4a7c15);
    splitmix64(&mut s)
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1]: avoids ln(0) in Box-Muller.
    ((bits >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

/// Two independent standard normals via Box-Muller.
fn gaussian_pair(state: &mut u64) -> (f64, f64) {
    let u1 = unit_open(splitmix64(state));
    let u2 = unit_open(splitmix64(state));
    let r = (-2.0 * u1.ln()).sqrt();
    let a = 2.0 * std::f64::consts::PI * u2;
    (r * a.cos(), r * a.sin())
}

/// Per-render seed for a joint-state vector, so that any command rendering
/// the same (seed, states) reproduces bytes exactly.
pub fn state_seed(seed: u64, states: &[StateIndex]) -> u64 {
    let mut h = mix(seed, 0x5eed_u64);
    for s in states {
        h = mix(h, s.value().to_bits());
    }
    h
}

// ================================ ray cast =================================

/// Nearest intersection of a ray with a posed box, as the ray parameter.
fn ray_box(part_pose: &RigidTransform, half: &Vector3<f64>, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
    let inv = part_pose.inverse();
    let o = inv.apply_point(origin);
    let d = inv.apply_vector(dir);
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for i in 0..3 {
        if d[i].abs() < 1e-15 {
            if o[i].abs() > half[i] {
                return None;
            }
            continue;
        }
        let inv_d = 1.0 / d[i];
        let (mut t0, mut t1) = ((-half[i] - o[i]) * inv_d, (half[i] - o[i]) * inv_d);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    (t_near > 1e-9).then_some(t_near)
}

// ================================ render ===================================

/// Point map plus the per-pixel part id (-1 on miss). The labels are a
/// test/oracle channel; estimators only ever see the `PointMap`.
pub fn render_pointmap_labeled(
    object: &ArticulatedObject,
    states: &[StateIndex],
    camera: &Camera,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<(PointMap, Vec<i32>)> {
    camera.validate()?;
    noise.validate()?;
    let (w, h) = (camera.width, camera.height);
    let n_parts = object.part_count();
    let motions: Vec<RigidTransform> = (0..n_parts)
        .map(|id| object.motion_of(id, states))
        .collect::<Result<_>>()?;
    let poses: Vec<RigidTransform> = (0..n_parts)
        .map(|id| motions[id].compose(&object.part(id).pose))
        .collect();

    let mut depth = vec![f64::INFINITY; w * h];
    let mut labels = vec![-1i32; w * h];
    let mut points = vec![Vector3::zeros(); w * h];
    for r in 0..h {
        for c in 0..w {
            let (origin, dir) = camera.ray(r, c);
            let mut best = f64::INFINITY;
            let mut best_id = -1i32;
            for id in 0..n_parts {
                if let Some(t) = ray_box(&poses[id], &object.part(id).half_extents, &origin, &dir) {
                    if t < best {
                        best = t;
                        best_id = id as i32;
                    }
                }
            }
            let i = r * w + c;
            depth[i] = best;
            labels[i] = best_id;
            if best_id >= 0 {
                points[i] = origin + best * dir;
            }
        }
    }

    // Confidence: miss 0, edge pixels edge_conf, interior 1. A neighbor
    // miss is an infinite depth jump, hence an edge.
    let jump = EDGE_DEPTH_FRACTION * object.bbox_diagonal;
    let mut conf = vec![0.0f64; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if labels[i] < 0 {
                continue;
            }
            let mut edge = false;
            let mut check = |rr: isize, cc: isize| {
                if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                    return;
                }
                let j = rr as usize * w + cc as usize;
                if (depth[i] - depth[j]).abs() > jump {
                    edge = true;
                }
            };
            check(r as isize - 1, c as isize);
            check(r as isize + 1, c as isize);
            check(r as isize, c as isize - 1);
            check(r as isize, c as isize + 1);
            conf[i] = if edge { noise.edge_conf } else { 1.0 };
        }
    }

    // Low-confidence ribbons, decided per row from the seed.
    if noise.artifact_rate > 0.0 {
        for r in 0..h {
            let mut s = mix(seed, 0xa27f ^ r as u64);
            if unit_open(splitmix64(&mut s)) >= noise.artifact_rate {
                continue;
            }
            let c0 = (splitmix64(&mut s) % w as u64) as usize;
            let len = (w / 8 + (splitmix64(&mut s) % (w as u64 / 4 + 1)) as usize).max(2);
            let value = 0.3 + 0.5 * unit_open(splitmix64(&mut s));
            for c in c0..(c0 + len).min(w) {
                let i = r * w + c;
                conf[i] = conf[i].min(value);
            }
        }
    }

    // Gaussian point noise, counter-based per pixel.
    if noise.point_sigma > 0.0 {
        let sigma = noise.point_sigma * object.bbox_diagonal;
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if labels[i] < 0 {
                    continue;
                }
                let mut s = mix(mix(seed, r as u64), !(c as u64));
                let (n0, n1) = gaussian_pair(&mut s);
                let (n2, _) = gaussian_pair(&mut s);
                points[i] += sigma * Vector3::new(n0, n1, n2);
            }
        }
    }

    Ok((PointMap::new(w, h, points, conf)?, labels))
}

pub fn render_pointmap(
    object: &ArticulatedObject,
    states: &[StateIndex],
    camera: &Camera,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<PointMap> {
    render_pointmap_labeled(object, states, camera, noise, seed).map(|(m, _)| m)
}

/// Closed-state and fully-opened maps under one camera; per-state noise
/// streams derive from `state_seed`.
pub fn render_state_pair(
    object: &ArticulatedObject,
    camera: &Camera,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<(PointMap, PointMap)> {
    let closed = vec![StateIndex::CLOSED; object.joint_count()];
    let opened = vec![StateIndex::OPEN; object.joint_count()];
    let p0 = render_pointmap(object, &closed, camera, noise, state_seed(seed, &closed))?;
    let p1 = render_pointmap(object, &opened, camera, noise, state_seed(seed, &opened))?;
    Ok((p0, p1))
}

/// A true surface-point track from t=0 to t=1 — the oracle the estimator
/// never sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedPoint {
    pub p0: Vector3<f64>,
    pub p1: Vector3<f64>,
    pub part_id: usize,
}

/// Samples visible t=0 surface points through random pixels and advances
/// each by its part's true motion.
pub fn tracked_correspondences(
    object: &ArticulatedObject,
    camera: &Camera,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<TrackedPoint>> {
    camera.validate()?;
    if n_samples == 0 {
        return Err(Error::Geometry("n_samples must be >= 1".into()));
    }
    let closed = vec![StateIndex::CLOSED; object.joint_count()];
    let opened = vec![StateIndex::OPEN; object.joint_count()];
    let n_parts = object.part_count();
    let poses: Vec<RigidTransform> = (0..n_parts)
        .map(|id| Ok(object.motion_of(id, &closed)?.compose(&object.part(id).pose)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 0x7aac_u64));
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples.saturating_mul(100) {
        if out.len() == n_samples {
            break;
        }
        let r = rng.gen_range(0..camera.height);
        let c = rng.gen_range(0..camera.width);
        let (origin, dir) = camera.ray(r, c);
        let mut best = f64::INFINITY;
        let mut best_id = None;
        for id in 0..n_parts {
            if let Some(t) = ray_box(&poses[id], &object.part(id).half_extents, &origin, &dir) {
                if t < best {
                    best = t;
                    best_id = Some(id);
                }
            }
        }
        let Some(id) = best_id else { continue };
        let p0 = origin + best * dir;
        let p1 = if object.is_movable(id) {
            let k = id - object.base.len();
            let (_, joint) = &object.movable[k];
            let t0 = pose_at(joint, closed[k])?;
            let t1 = pose_at(joint, opened[k])?;
            t1.compose(&t0.inverse()).apply_point(&p0)
        } else {
            p0
        };
        out.push(TrackedPoint { p0, p1, part_id: id });
    }
    Ok(out)
}
