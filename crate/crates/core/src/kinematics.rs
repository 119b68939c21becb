//! Joint parameterization, rigid transforms and screw decomposition.
//!
//! Conventions: right-handed world frame, angles in radians, translations in
//! meters. A joint is the tuple (type, origin point, unit axis, motion range);
//! the scalar motion value interpolates linearly between the range endpoints
//! as the state index runs 0 → 1 (closed → fully articulated).

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::error::{Error, Result};

/// Tolerance for unit-axis, orthonormality and gauge checks.
pub const GEOM_TOL: f64 = 1e-9;
/// Rotations with |angle| below this are reported as pure translations.
pub const THETA_EPS: f64 = 1e-6;
/// Number of joint type classes carried by classification score vectors.
pub const NUM_TYPE_CLASSES: usize = 7;

// ============================== joint types ===============================

/// Joint type code. Codes 0–3 are meaningful; 4–6 are reserved and only
/// constructible through [`JointType::from_code_permissive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Fixed,
    Revolute,
    Continuous,
    Prismatic,
    Reserved4,
    Reserved5,
    Reserved6,
}

impl JointType {
    pub fn code(self) -> u8 {
        match self {
            JointType::Fixed => 0,
            JointType::Revolute => 1,
            JointType::Continuous => 2,
            JointType::Prismatic => 3,
            JointType::Reserved4 => 4,
            JointType::Reserved5 => 5,
            JointType::Reserved6 => 6,
        }
    }

    /// Strict constructor: reserved codes are rejected.
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(JointType::Fixed),
            1 => Ok(JointType::Revolute),
            2 => Ok(JointType::Continuous),
            3 => Ok(JointType::Prismatic),
            _ => Err(Error::UnsupportedJointType { code }),
        }
    }

    /// Permissive constructor: admits the reserved codes 4–6 (they still
    /// cannot be posed, see [`pose_at`]).
    pub fn from_code_permissive(code: u8) -> Result<Self> {
        match code {
            4 => Ok(JointType::Reserved4),
            5 => Ok(JointType::Reserved5),
            6 => Ok(JointType::Reserved6),
            _ => Self::from_code(code),
        }
    }

    /// Parses a type name. "rotate" is accepted as an alias of revolute.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fixed" => Ok(JointType::Fixed),
            "revolute" | "rotate" => Ok(JointType::Revolute),
            "continuous" => Ok(JointType::Continuous),
            "prismatic" => Ok(JointType::Prismatic),
            other => Err(Error::UnknownJointTypeName(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JointType::Fixed => "fixed",
            JointType::Revolute => "revolute",
            JointType::Continuous => "continuous",
            JointType::Prismatic => "prismatic",
            JointType::Reserved4 => "reserved4",
            JointType::Reserved5 => "reserved5",
            JointType::Reserved6 => "reserved6",
        }
    }

    /// Kinematic means the joint can move: every code >= 1.
    pub fn is_kinematic(self) -> bool {
        self.code() >= 1
    }

    /// Angular types measure motion in radians.
    pub fn is_angular(self) -> bool {
        matches!(self, JointType::Revolute | JointType::Continuous)
    }
}

// ================================= joint ==================================

/// A 1-DoF joint in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub joint_type: JointType,
    pub origin: Vector3<f64>,
    pub axis: Vector3<f64>,
    /// (m_min, m_max); radians for angular types, meters for prismatic.
    pub range: (f64, f64),
}

impl Joint {
    pub fn new(
        joint_type: JointType,
        origin: Vector3<f64>,
        axis: Vector3<f64>,
        range: (f64, f64),
    ) -> Result<Self> {
        let joint = Joint { joint_type, origin, axis, range };
        joint.validate()?;
        Ok(joint)
    }

    /// Fixed joint: zero axis, zero range.
    pub fn fixed(origin: Vector3<f64>) -> Self {
        Joint {
            joint_type: JointType::Fixed,
            origin,
            axis: Vector3::zeros(),
            range: (0.0, 0.0),
        }
    }

    pub fn revolute(origin: Vector3<f64>, axis: Vector3<f64>, range: (f64, f64)) -> Result<Self> {
        Self::new(JointType::Revolute, origin, axis, range)
    }

    pub fn prismatic(origin: Vector3<f64>, axis: Vector3<f64>, range: (f64, f64)) -> Result<Self> {
        Self::new(JointType::Prismatic, origin, axis, range)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.origin.iter().chain(self.axis.iter()).all(|v| v.is_finite())
            && self.range.0.is_finite()
            && self.range.1.is_finite();
        if !finite {
            return Err(Error::Geometry("joint contains non-finite values".into()));
        }
        if self.range.0 > self.range.1 {
            return Err(Error::InvalidRange {
                lo: self.range.0,
                hi: self.range.1,
                reason: "m_min must not exceed m_max",
            });
        }
        match self.joint_type {
            JointType::Fixed => {
                if self.axis != Vector3::zeros() || self.range != (0.0, 0.0) {
                    return Err(Error::Geometry("fixed joint must carry zero axis and range".into()));
                }
            }
            _ => {
                let norm = self.axis.norm();
                if (norm - 1.0).abs() > GEOM_TOL {
                    return Err(Error::NonUnitAxis { norm });
                }
                if self.joint_type.is_angular() {
                    let bound = 2.0 * std::f64::consts::PI + GEOM_TOL;
                    if self.range.0 < -bound || self.range.1 > bound {
                        return Err(Error::InvalidRange {
                            lo: self.range.0,
                            hi: self.range.1,
                            reason: "angular range must lie within [-2pi, 2pi]",
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Motion value at state index t: m = m_min + t (m_max - m_min).
    pub fn motion_value(&self, t: StateIndex) -> f64 {
        self.range.0 + t.value() * (self.range.1 - self.range.0)
    }

    /// The joint expressed in a rigidly transformed frame.
    pub fn transformed(&self, tf: &RigidTransform) -> Joint {
        Joint {
            joint_type: self.joint_type,
            origin: tf.apply_point(&self.origin),
            axis: tf.rotation * self.axis,
            range: self.range,
        }
    }

    /// Axis-canonicalized copy (see [`canonicalize_axis`]). Fixed joints are
    /// returned unchanged.
    pub fn canonicalized(&self) -> Result<Joint> {
        if self.joint_type == JointType::Fixed {
            return Ok(self.clone());
        }
        let (axis, range) = canonicalize_axis(&self.axis, self.range)?;
        Ok(Joint { joint_type: self.joint_type, origin: self.origin, axis, range })
    }
}

// =============================== state index ==============================

/// Interpolation parameter in [0, 1] between range endpoints.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StateIndex(f64);

impl StateIndex {
    pub const CLOSED: StateIndex = StateIndex(0.0);
    pub const OPEN: StateIndex = StateIndex(1.0);

    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::StateIndexOutOfRange(t));
        }
        Ok(StateIndex(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

// ============================= rigid transform ============================

/// Proper rigid transform: x -> R x + t.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Validates orthonormality and det = +1 within [`GEOM_TOL`]-scaled slack.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let tf = RigidTransform { rotation, translation };
        tf.validate()?;
        Ok(tf)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rotation.iter().chain(self.translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonRigidRotation("non-finite entries"));
        }
        let gram = self.rotation.transpose() * self.rotation;
        if (gram - Matrix3::identity()).norm() > 1e-8 {
            return Err(Error::NonRigidRotation("R^T R deviates from identity"));
        }
        if (self.rotation.determinant() - 1.0).abs() > 1e-8 {
            return Err(Error::NonRigidRotation("determinant is not +1"));
        }
        Ok(())
    }

    pub fn from_rotation(rotation: Rotation3<f64>) -> Self {
        RigidTransform { rotation: rotation.into_inner(), translation: Vector3::zeros() }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        RigidTransform { rotation: Matrix3::identity(), translation }
    }

    /// Rotation by `angle` about the line through `pivot` with direction `axis`.
    pub fn rotation_about_line(axis: &Unit<Vector3<f64>>, angle: f64, pivot: &Vector3<f64>) -> Self {
        let r = Rotation3::from_axis_angle(axis, angle).into_inner();
        let translation = pivot - r * pivot;
        RigidTransform { rotation: r, translation }
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Composition: (self ∘ rhs)(x) = self(rhs(x)).
    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -(rt * self.translation) }
    }

    /// Combined Frobenius/Euclidean distance used by round-trip checks.
    pub fn distance(&self, other: &RigidTransform) -> f64 {
        let dr = (self.rotation - other.rotation).norm();
        let dt = (self.translation - other.translation).norm();
        dr.max(dt)
    }
}

impl std::ops::Mul for &RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: &RigidTransform) -> RigidTransform {
        self.compose(rhs)
    }
}

// ============================== screw params ==============================

/// Screw decomposition of a rigid transform: rotation by `angle` about the
/// line (pivot, axis) plus `slide` meters of translation along the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScrewParams {
    pub axis: Vector3<f64>,
    /// Point on the screw axis closest to the anchor handed to
    /// [`screw_from_transform`] (pure translations keep the anchor itself).
    pub pivot: Vector3<f64>,
    /// Rotation angle in (-pi, pi]; 0 for pure translations.
    pub angle: f64,
    pub slide: f64,
    /// Set when |angle| came within [`THETA_EPS`] of pi, where the axis sign
    /// is no longer determined by the skew part.
    pub near_half_turn: bool,
}

// ================================ operations ==============================

/// Rigid pose of a joint's moving side at state index t.
pub fn pose_at(joint: &Joint, t: StateIndex) -> Result<RigidTransform> {
    let m = joint.motion_value(t);
    match joint.joint_type {
        JointType::Fixed => Ok(RigidTransform::identity()),
        JointType::Revolute | JointType::Continuous => {
            let axis = Unit::try_new(joint.axis, GEOM_TOL)
                .ok_or(Error::DegenerateAxis { norm: joint.axis.norm() })?;
            Ok(RigidTransform::rotation_about_line(&axis, m, &joint.origin))
        }
        JointType::Prismatic => Ok(RigidTransform::from_translation(m * joint.axis)),
        _ => Err(Error::UnsupportedJointType { code: joint.joint_type.code() }),
    }
}

/// Decomposes a rigid transform into screw parameters.
///
/// The pivot is gauged to the point on the screw axis closest to `anchor`.
/// Rotations below [`THETA_EPS`] are reported as pure translations with
/// axis t/|t| (or (0,0,1) when |t| < [`GEOM_TOL`]). Near half-turns the axis
/// is recovered from the symmetric part of R and `near_half_turn` is set.
pub fn screw_from_transform(tf: &RigidTransform, anchor: &Vector3<f64>) -> ScrewParams {
    let r = &tf.rotation;
    let t = &tf.translation;
    let skew = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    // atan2 keeps full precision at both ends, where acos(trace) is flat.
    let cos_theta = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let sin_theta = skew.norm() / 2.0;
    let angle = sin_theta.atan2(cos_theta); // in [0, pi]

    if angle < THETA_EPS {
        let norm = t.norm();
        let axis = if norm < GEOM_TOL { Vector3::z() } else { t / norm };
        return ScrewParams { axis, pivot: *anchor, angle: 0.0, slide: norm, near_half_turn: false };
    }

    let near_half_turn = std::f64::consts::PI - angle < THETA_EPS;
    let mut axis = if !near_half_turn {
        skew.normalize()
    } else {
        // Symmetric part: (R + R^T)/2 = cos(a) I + (1 - cos(a)) aa^T.
        let sym = (r + r.transpose()) / 2.0;
        let outer = (sym - Matrix3::identity() * cos_theta) / (1.0 - cos_theta);
        let diag = outer.diagonal();
        let col = diag.imax();
        let mut a = outer.column(col) / diag[col].max(GEOM_TOL).sqrt();
        // Pick the sign: the skew part still points along +axis when sin > 0;
        // at exactly pi fall back to the canonical orientation.
        if skew.norm() > 1e-12 {
            if skew.dot(&a) < 0.0 {
                a = -a;
            }
        } else {
            let lead = if a.z != 0.0 {
                a.z
            } else if a.y != 0.0 {
                a.y
            } else {
                a.x
            };
            if lead < 0.0 {
                a = -a;
            }
        }
        a.normalize()
    };
    // Guard against accumulated sign noise producing a non-unit axis.
    if !axis.iter().all(|v| v.is_finite()) {
        axis = Vector3::z();
    }

    let slide = axis.dot(t);
    let t_perp = t - slide * axis;
    // Solve (I - R) p = t_perp in the plane orthogonal to the axis.
    let p0 = 0.5 * t_perp + axis.cross(&t_perp) / (2.0 * (angle / 2.0).tan());
    let pivot = p0 + (anchor - p0).dot(&axis) * axis;

    ScrewParams { axis, pivot, angle, slide, near_half_turn }
}

/// Rebuilds the rigid transform described by screw parameters.
pub fn transform_from_screw(screw: &ScrewParams) -> Result<RigidTransform> {
    let norm = screw.axis.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitAxis { norm });
    }
    if !screw.angle.is_finite() || !screw.slide.is_finite() {
        return Err(Error::Geometry("screw parameters not finite".into()));
    }
    let axis = Unit::new_normalize(screw.axis);
    let r = Rotation3::from_axis_angle(&axis, screw.angle).into_inner();
    let translation = (Matrix3::identity() - r) * screw.pivot + screw.slide * screw.axis;
    Ok(RigidTransform { rotation: r, translation })
}

/// Orients an axis so its first nonzero component in (z, y, x) priority is
/// positive; a flip negates and swaps the range so the described motion is
/// unchanged. Idempotent.
pub fn canonicalize_axis(axis: &Vector3<f64>, range: (f64, f64)) -> Result<(Vector3<f64>, (f64, f64))> {
    let norm = axis.norm();
    if norm < GEOM_TOL {
        return Err(Error::DegenerateAxis { norm });
    }
    // Skip the division for already-unit input so canonicalization is
    // exactly idempotent (renormalizing shifts ulps).
    let unit = if (norm - 1.0).abs() <= 1e-12 { *axis } else { axis / norm };
    let lead = if unit.z != 0.0 {
        unit.z
    } else if unit.y != 0.0 {
        unit.y
    } else {
        unit.x
    };
    if lead < 0.0 {
        Ok((-unit, (-range.1, -range.0)))
    } else {
        Ok((unit, range))
    }
}

/// Maps a motion range into [0, 2]: angular endpoints via
/// (degrees + 360) / 360 over the domain [-2pi, 2pi]; prismatic endpoints via
/// (m + scale) / scale over [-scale, scale]. Fixed joints use the angular map.
pub fn normalize_range(joint_type: JointType, range: (f64, f64), scale: f64) -> Result<(f64, f64)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RangeDomain { value: scale, reason: "scale must be positive" });
    }
    let map = |m: f64| -> Result<f64> {
        if !m.is_finite() {
            return Err(Error::RangeDomain { value: m, reason: "endpoint not finite" });
        }
        if joint_type == JointType::Prismatic {
            if m.abs() > scale * (1.0 + 1e-12) {
                return Err(Error::RangeDomain { value: m, reason: "prismatic endpoint beyond scale" });
            }
            Ok((m + scale) / scale)
        } else {
            let bound = 2.0 * std::f64::consts::PI * (1.0 + 1e-12);
            if m.abs() > bound {
                return Err(Error::RangeDomain { value: m, reason: "angular endpoint beyond 2pi" });
            }
            Ok((m.to_degrees() + 360.0) / 360.0)
        }
    };
    Ok((map(range.0)?, map(range.1)?))
}

/// Exact inverse of [`normalize_range`].
pub fn denormalize_range(joint_type: JointType, normalized: (f64, f64), scale: f64) -> Result<(f64, f64)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RangeDomain { value: scale, reason: "scale must be positive" });
    }
    let map = |n: f64| -> Result<f64> {
        if !n.is_finite() || !(-1e-12..=2.0 + 1e-12).contains(&n) {
            return Err(Error::RangeDomain { value: n, reason: "normalized endpoint outside [0, 2]" });
        }
        if joint_type == JointType::Prismatic {
            Ok(n * scale - scale)
        } else {
            Ok((n * 360.0 - 360.0).to_radians())
        }
    };
    Ok((map(normalized.0)?, map(normalized.1)?))
}

/// Distance from `p` to the line through `point` with (non-zero) direction `dir`.
pub fn point_to_line_distance(p: &Vector3<f64>, point: &Vector3<f64>, dir: &Vector3<f64>) -> f64 {
    let d = dir.normalize();
    let rel = p - point;
    (rel - rel.dot(&d) * d).norm()
}
