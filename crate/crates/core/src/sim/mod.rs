//! Procedural articulated-object simulator: box geometry, pinhole camera,
//! ray-cast point-map rendering and scene generation.
//!
//! The world frame is the object frame (z up, front normal +x); the camera
//! is known to the renderer only.

mod camera;
mod generate;
mod render;

pub use camera::Camera;
pub use generate::{camera_for_scene, generate_object, Category, ALL_CATEGORIES};
pub use render::{
    render_pointmap, render_pointmap_labeled, render_state_pair, state_seed,
    tracked_correspondences, NoiseConfig, TrackedPoint,
};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::kinematics::{pose_at, Joint, RigidTransform, StateIndex};

/// Maximum joints per object.
pub const K_MAX: usize = 16;

/// An axis-aligned box in its own frame, placed in the world by `pose`.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub half_extents: Vector3<f64>,
    pub pose: RigidTransform,
}

impl Part {
    /// Axis-aligned box centered at `center`.
    pub fn axis_aligned(center: Vector3<f64>, half_extents: Vector3<f64>) -> Part {
        Part { half_extents, pose: RigidTransform::from_translation(center) }
    }

    /// Box spanning `lo..hi` on each axis.
    pub fn from_bounds(lo: Vector3<f64>, hi: Vector3<f64>) -> Part {
        Part::axis_aligned((lo + hi) / 2.0, (hi - lo) / 2.0)
    }

    /// The eight corners under `extra * pose`.
    pub fn corners(&self, extra: &RigidTransform) -> [Vector3<f64>; 8] {
        let world = extra.compose(&self.pose);
        let h = self.half_extents;
        let mut out = [Vector3::zeros(); 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let local = Vector3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            *corner = world.apply_point(&local);
        }
        out
    }
}

/// Static base geometry plus movable parts, each driven by one world-frame
/// joint. Part ids number base parts first, then movable parts.
#[derive(Debug, Clone)]
pub struct ArticulatedObject {
    pub base: Vec<Part>,
    pub movable: Vec<(Part, Joint)>,
    /// Diagonal of the closed-state (t=0) bounding box.
    pub bbox_diagonal: f64,
}

impl ArticulatedObject {
    pub fn new(base: Vec<Part>, movable: Vec<(Part, Joint)>) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::Geometry("object needs at least one base part".into()));
        }
        if movable.len() > K_MAX {
            return Err(Error::Geometry(format!(
                "{} joints exceed the capacity of {K_MAX}",
                movable.len()
            )));
        }
        for part in base.iter().chain(movable.iter().map(|(p, _)| p)) {
            if !(part.half_extents.min() > 0.0) {
                return Err(Error::Geometry("degenerate part extents".into()));
            }
        }
        for (_, joint) in &movable {
            joint.validate()?;
        }

        let mut obj = ArticulatedObject { base, movable, bbox_diagonal: 0.0 };
        let (lo, hi) = obj.aabb_at(&vec![StateIndex::CLOSED; obj.movable.len()])?;
        obj.bbox_diagonal = (hi - lo).norm();

        // Closed parts must sit inside 1.5x the static bounding box.
        let (blo, bhi) = aabb_of(obj.base.iter().map(|p| p.corners(&RigidTransform::identity())));
        let center = (blo + bhi) / 2.0;
        let half = (bhi - blo) / 2.0 * 1.5;
        for (k, (part, joint)) in obj.movable.iter().enumerate() {
            let closed = pose_at(joint, StateIndex::CLOSED)?;
            for corner in part.corners(&closed) {
                let d = corner - center;
                if d.x.abs() > half.x + 1e-9 || d.y.abs() > half.y + 1e-9 || d.z.abs() > half.z + 1e-9
                {
                    return Err(Error::Geometry(format!(
                        "movable part {k} escapes 1.5x base bounds when closed"
                    )));
                }
            }
        }
        Ok(obj)
    }

    pub fn part_count(&self) -> usize {
        self.base.len() + self.movable.len()
    }

    pub fn joint_count(&self) -> usize {
        self.movable.len()
    }

    /// Ground-truth joints in movable-part order.
    pub fn joints(&self) -> Vec<Joint> {
        self.movable.iter().map(|(_, j)| j.clone()).collect()
    }

    /// World transform applied on top of the part's rest pose at `states`.
    pub fn motion_of(&self, part_id: usize, states: &[StateIndex]) -> Result<RigidTransform> {
        self.check_states(states)?;
        if part_id < self.base.len() {
            return Ok(RigidTransform::identity());
        }
        let k = part_id - self.base.len();
        let (_, joint) = &self.movable[k];
        pose_at(joint, states[k])
    }

    pub fn part(&self, part_id: usize) -> &Part {
        if part_id < self.base.len() {
            &self.base[part_id]
        } else {
            &self.movable[part_id - self.base.len()].0
        }
    }

    pub fn is_movable(&self, part_id: usize) -> bool {
        part_id >= self.base.len()
    }

    /// Bounding box over all parts posed at `states`.
    pub fn aabb_at(&self, states: &[StateIndex]) -> Result<(Vector3<f64>, Vector3<f64>)> {
        self.check_states(states)?;
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for id in 0..self.part_count() {
            let motion = self.motion_of(id, states)?;
            for c in self.part(id).corners(&motion) {
                lo = lo.inf(&c);
                hi = hi.sup(&c);
            }
        }
        Ok((lo, hi))
    }

    fn check_states(&self, states: &[StateIndex]) -> Result<()> {
        if states.len() != self.movable.len() {
            return Err(Error::Geometry(format!(
                "{} joint states for {} joints",
                states.len(),
                self.movable.len()
            )));
        }
        Ok(())
    }
}

fn aabb_of(corner_sets: impl Iterator<Item = [Vector3<f64>; 8]>) -> (Vector3<f64>, Vector3<f64>) {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for set in corner_sets {
        for c in set {
            lo = lo.inf(&c);
            hi = hi.sup(&c);
        }
    }
    (lo, hi)
}
