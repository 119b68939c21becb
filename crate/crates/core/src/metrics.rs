//! Joint-level error measures, the per-joint success test and dataset
//! aggregation.
//!
//! All comparisons canonicalize axes first, so error values are invariant
//! to the axis-sign/range-mirror gauge. Origin error is measured to the
//! axis *line* for angular ground truth (the pivot is only defined up to
//! sliding along the axis) and to the point otherwise.

use crate::error::{Error, Result};
use crate::kinematics::{normalize_range, point_to_line_distance, Joint};
use crate::matching::{line_angle, match_joints};

/// Error thresholds a prediction must beat (strictly) to count as a success.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessThresholds {
    /// Scale-normalized origin distance.
    pub origin: f64,
    /// Acute axis-line angle, radians.
    pub axis_angle: f64,
    /// 1 - cos between canonical oriented axes.
    pub direction: f64,
    /// Euclidean distance between normalized range endpoints.
    pub range: f64,
}

pub const DEFAULT_THRESHOLDS: SuccessThresholds = SuccessThresholds {
    origin: 0.15,
    axis_angle: 0.25,
    direction: 0.3,
    range: 0.3,
};

/// Error decomposition between one ground-truth joint and one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointErrors {
    pub type_match: bool,
    pub origin_err: f64,
    pub axis_angle: f64,
    pub direction_err: f64,
    pub range_err: f64,
}

/// Outcome for a single ground-truth joint within a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub gt_index: usize,
    /// Slot index of the matched real prediction, if any.
    pub matched_slot: Option<usize>,
    pub errors: Option<JointErrors>,
    pub success: bool,
}

/// Matched evaluation of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneEval {
    pub outcomes: Vec<JointOutcome>,
    /// Real predictions no ground-truth joint claimed.
    pub spurious: usize,
}

/// Micro-averaged metrics over every ground-truth joint in a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetMetrics {
    pub joints_total: usize,
    pub joints_matched: usize,
    pub successes: usize,
    /// successes / joints_total; unmatched joints count as failures.
    pub success_rate: f64,
    pub spurious_total: usize,
    /// Means below run over matched pairs only (0 when nothing matched).
    pub mean_origin_err: f64,
    pub mean_axis_angle: f64,
    pub mean_direction_err: f64,
    pub mean_range_err: f64,
    pub type_accuracy: f64,
}

/// Errors between a ground-truth joint and a prediction, canonicalizing
/// both sides internally (hence idempotent under canonicalization).
pub fn joint_errors(gt: &Joint, pred: &Joint, scale: f64) -> Result<JointErrors> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RangeDomain { value: scale, reason: "scale must be positive" });
    }
    let g = gt.canonicalized()?;
    let p = pred.canonicalized()?;

    let origin_err = if g.joint_type.is_angular() {
        point_to_line_distance(&p.origin, &g.origin, &g.axis) / scale
    } else {
        (g.origin - p.origin).norm() / scale
    };

    let axis_angle = line_angle(&g.axis, &p.axis);

    let denom = g.axis.norm() * p.axis.norm();
    let direction_err = if denom < crate::kinematics::GEOM_TOL {
        if g.axis.norm() < crate::kinematics::GEOM_TOL
            && p.axis.norm() < crate::kinematics::GEOM_TOL
        {
            0.0
        } else {
            1.0
        }
    } else {
        1.0 - (g.axis.dot(&p.axis) / denom).clamp(-1.0, 1.0)
    };

    let gn = normalize_range(g.joint_type, g.range, scale)?;
    let pn = normalize_range(p.joint_type, p.range, scale)?;
    let range_err = ((gn.0 - pn.0).powi(2) + (gn.1 - pn.1).powi(2)).sqrt();

    Ok(JointErrors {
        type_match: g.joint_type == p.joint_type,
        origin_err,
        axis_angle,
        direction_err,
        range_err,
    })
}

/// Strict success test: the type must agree and every error must fall
/// strictly below its threshold.
pub fn is_success(e: &JointErrors, th: &SuccessThresholds) -> bool {
    e.type_match
        && e.origin_err < th.origin
        && e.axis_angle < th.axis_angle
        && e.direction_err < th.direction
        && e.range_err < th.range
}

/// Matches predictions to ground truth and scores every ground-truth joint.
/// A joint that only pairs with a padding placeholder is an unmatched
/// failure; leftover real predictions are tallied as spurious.
pub fn evaluate_scene(
    gt: &[Joint],
    preds: &[Joint],
    scale: f64,
    th: &SuccessThresholds,
) -> Result<SceneEval> {
    let k_slots = gt.len().max(preds.len()).max(1);
    let assignment = match_joints(gt, preds, k_slots, scale)?;
    let mut outcomes = Vec::with_capacity(gt.len());
    for (n, &slot) in assignment.sigma.iter().enumerate() {
        if assignment.is_real_match(n) {
            let errors = joint_errors(&gt[n], &preds[slot], scale)?;
            outcomes.push(JointOutcome {
                gt_index: n,
                matched_slot: Some(slot),
                success: is_success(&errors, th),
                errors: Some(errors),
            });
        } else {
            outcomes.push(JointOutcome {
                gt_index: n,
                matched_slot: None,
                errors: None,
                success: false,
            });
        }
    }
    Ok(SceneEval { outcomes, spurious: assignment.unmatched_slots.len() })
}

/// Micro-average scene evaluations joint by joint.
pub fn aggregate(scenes: &[SceneEval]) -> DatasetMetrics {
    let mut m = DatasetMetrics {
        joints_total: 0,
        joints_matched: 0,
        successes: 0,
        success_rate: 0.0,
        spurious_total: 0,
        mean_origin_err: 0.0,
        mean_axis_angle: 0.0,
        mean_direction_err: 0.0,
        mean_range_err: 0.0,
        type_accuracy: 0.0,
    };
    let mut type_hits = 0usize;
    for scene in scenes {
        m.spurious_total += scene.spurious;
        for o in &scene.outcomes {
            m.joints_total += 1;
            if o.success {
                m.successes += 1;
            }
            if let Some(e) = &o.errors {
                m.joints_matched += 1;
                m.mean_origin_err += e.origin_err;
                m.mean_axis_angle += e.axis_angle;
                m.mean_direction_err += e.direction_err;
                m.mean_range_err += e.range_err;
                if e.type_match {
                    type_hits += 1;
                }
            }
        }
    }
    if m.joints_total > 0 {
        m.success_rate = m.successes as f64 / m.joints_total as f64;
    }
    if m.joints_matched > 0 {
        let n = m.joints_matched as f64;
        m.mean_origin_err /= n;
        m.mean_axis_angle /= n;
        m.mean_direction_err /= n;
        m.mean_range_err /= n;
        m.type_accuracy = type_hits as f64 / n;
    }
    m
}
