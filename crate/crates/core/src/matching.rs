//! Bipartite matching of ground-truth joints to prediction slots, the
//! matched supervision losses and their analytic gradients.
//!
//! Conventions: cost/loss comparisons canonicalize axes first and express
//! ranges in the normalized [0, 2] space; origins stay in meters (cost
//! divides by the scene scale, the squared loss does not).

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::kinematics::{
    normalize_range, Joint, JointType, GEOM_TOL, NUM_TYPE_CLASSES,
};

/// Weight of the type-disagreement indicator inside [`joint_cost`].
pub const TYPE_MISMATCH_WEIGHT: f64 = 10.0;
/// Default weight of the geometric loss inside the total loss.
pub const DEFAULT_LAMBDA_REG: f64 = 1.0;

/// Result of matching N ground-truth joints into K prediction slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// sigma[n] = slot assigned to ground-truth joint n (injective).
    pub sigma: Vec<usize>,
    /// Real prediction slots left unmatched (spurious predictions).
    pub unmatched_slots: Vec<usize>,
    /// Number of real (non-placeholder) prediction slots.
    pub real_slots: usize,
}

impl Assignment {
    /// True when ground-truth joint n landed on a real prediction rather
    /// than a padding placeholder.
    pub fn is_real_match(&self, n: usize) -> bool {
        self.sigma[n] < self.real_slots
    }
}

/// Stage II loss decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub l_cls: f64,
    pub l_joint_mean: f64,
    pub l_total: f64,
}

/// A prediction slot carrying classification scores plus regressed geometry.
#[derive(Debug, Clone)]
pub struct ScoredPrediction {
    pub joint: Joint,
    /// Probability simplex over the 7 type codes.
    pub type_scores: [f64; NUM_TYPE_CLASSES],
}

/// Analytic gradients of the total loss for one matched pair.
#[derive(Debug, Clone)]
pub struct PairGradients {
    pub gt_index: usize,
    pub slot: usize,
    pub d_origin: Vector3<f64>,
    pub d_axis: Vector3<f64>,
    /// Gradient with respect to the normalized range endpoints.
    pub d_range: (f64, f64),
    /// Axes were antiparallel: the cosine gradient vanishes there and the
    /// zero vector is returned.
    pub antiparallel: bool,
}

// =============================== hungarian ================================

const INF: f64 = f64::INFINITY;

/// Exact minimum-cost assignment of every row to a distinct column
/// (rows <= cols). Among equal-cost optima the lexicographically smallest
/// sigma is returned, so the result is deterministic.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let (rows, cols) = validate_cost(cost)?;
    if rows == 0 {
        return Ok(Vec::new());
    }
    let best = solve_potentials(cost, rows, cols);
    let tol = 1e-9 * (1.0 + best.abs());

    // Fix rows in order, always trying the smallest feasible column.
    let mut available: Vec<usize> = (0..cols).collect();
    let mut sigma = Vec::with_capacity(rows);
    let mut accum = 0.0;
    for n in 0..rows {
        let mut chosen = None;
        for (ai, &k) in available.iter().enumerate() {
            let sub = reduced_optimum(cost, n + 1, &available, ai);
            if accum + cost[n][k] + sub <= best + tol {
                chosen = Some((ai, k));
                break;
            }
        }
        let (ai, k) = chosen.expect("optimal assignment lost during tie-break refinement");
        accum += cost[n][k];
        available.remove(ai);
        sigma.push(k);
    }
    Ok(sigma)
}

/// Total cost of `sigma` under `cost`, summed in row order.
pub fn assignment_total(cost: &[Vec<f64>], sigma: &[usize]) -> f64 {
    sigma.iter().enumerate().map(|(n, &k)| cost[n][k]).sum()
}

fn validate_cost(cost: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows > cols {
        return Err(Error::AssignmentShape { rows, cols });
    }
    for (r, row) in cost.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::AssignmentShape { rows, cols: row.len() });
        }
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteCost { row: r, col: c });
            }
        }
    }
    Ok((rows, cols))
}

/// Optimal total of the subproblem on rows `from_row..` over `available`
/// columns with index `skip` removed.
fn reduced_optimum(cost: &[Vec<f64>], from_row: usize, available: &[usize], skip: usize) -> f64 {
    let rows = cost.len() - from_row;
    if rows == 0 {
        return 0.0;
    }
    let cols: Vec<usize> = available
        .iter()
        .enumerate()
        .filter(|&(ai, _)| ai != skip)
        .map(|(_, &k)| k)
        .collect();
    let sub: Vec<Vec<f64>> = (from_row..cost.len())
        .map(|r| cols.iter().map(|&k| cost[r][k]).collect())
        .collect();
    solve_potentials(&sub, rows, cols.len())
}

/// O(rows^2 * cols) assignment via shortest augmenting paths with potentials.
fn solve_potentials(cost: &[Vec<f64>], rows: usize, cols: usize) -> f64 {
    // 1-indexed; matched_row[j] = row occupying column j, 0 = free.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut matched_row = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut total = 0.0;
    for j in 1..=cols {
        if matched_row[j] != 0 {
            total += cost[matched_row[j] - 1][j - 1];
        }
    }
    total
}

// ================================ costs ===================================

/// Matching cost between a ground-truth joint and a prediction.
///
/// cost = 10·[type differs] + |o - ô|/scale + line_angle(a, â) + |ϑn - ϑ̂n|
/// with both joints axis-canonicalized and ranges normalized first.
pub fn joint_cost(gt: &Joint, pred: &Joint, scale: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RangeDomain { value: scale, reason: "scale must be positive" });
    }
    let g = gt.canonicalized()?;
    let p = pred.canonicalized()?;
    let type_term = if g.joint_type == p.joint_type { 0.0 } else { TYPE_MISMATCH_WEIGHT };
    let origin_term = (g.origin - p.origin).norm() / scale;
    let axis_term = line_angle(&g.axis, &p.axis);
    let gn = normalize_range(g.joint_type, g.range, scale)?;
    let pn = normalize_range(p.joint_type, p.range, scale)?;
    let range_term = ((gn.0 - pn.0).powi(2) + (gn.1 - pn.1).powi(2)).sqrt();
    Ok(type_term + origin_term + axis_term + range_term)
}

/// Acute angle between axis lines, in [0, pi/2]. A single zero axis (fixed
/// joint) takes the maximum penalty; two zero axes agree trivially.
pub fn line_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na < GEOM_TOL && nb < GEOM_TOL {
        return 0.0;
    }
    if na < GEOM_TOL || nb < GEOM_TOL {
        return std::f64::consts::FRAC_PI_2;
    }
    (a.dot(b).abs() / (na * nb)).clamp(0.0, 1.0).acos()
}

/// Matches ground truth against predictions padded with fixed placeholders
/// to `k_slots`.
pub fn match_joints(gt: &[Joint], preds: &[Joint], k_slots: usize, scale: f64) -> Result<Assignment> {
    if gt.len() > k_slots || preds.len() > k_slots {
        return Err(Error::AssignmentShape {
            rows: gt.len().max(preds.len()),
            cols: k_slots,
        });
    }
    let placeholder = Joint::fixed(Vector3::zeros());
    let cost: Vec<Vec<f64>> = gt
        .iter()
        .map(|g| {
            (0..k_slots)
                .map(|k| {
                    let p = preds.get(k).unwrap_or(&placeholder);
                    joint_cost(g, p, scale)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = hungarian(&cost)?;
    let unmatched_slots = (0..preds.len()).filter(|k| !sigma.contains(k)).collect();
    Ok(Assignment { sigma, unmatched_slots, real_slots: preds.len() })
}

// ================================ losses ==================================

fn check_simplex(slot: usize, scores: &[f64; NUM_TYPE_CLASSES]) -> Result<()> {
    let mut sum = 0.0;
    for &s in scores {
        if !s.is_finite() {
            return Err(Error::NotSimplex { slot, reason: "non-finite entry" });
        }
        if s < -1e-9 {
            return Err(Error::NotSimplex { slot, reason: "negative entry" });
        }
        sum += s;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotSimplex { slot, reason: "entries do not sum to 1" });
    }
    Ok(())
}

fn cosine(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let denom = a.norm() * b.norm();
    if denom < GEOM_TOL {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(-1.0, 1.0)
}

/// Geometric loss of one matched pair; ranges enter normalized.
fn pair_joint_loss(gt: &Joint, pred: &Joint, scale: f64) -> Result<f64> {
    let gn = normalize_range(gt.joint_type, gt.range, scale)?;
    let pn = normalize_range(pred.joint_type, pred.range, scale)?;
    let origin = (gt.origin - pred.origin).norm_squared();
    let axis = 1.0 - cosine(&gt.axis, &pred.axis);
    let range = (gn.0 - pn.0).powi(2) + (gn.1 - pn.1).powi(2);
    Ok(origin + axis + range)
}

/// Classification + geometric losses over all K slots under assignment sigma.
///
/// l_cls averages cross-entropy over every slot (unassigned slots target the
/// fixed class); l_joint_mean averages the geometric loss over the N matched
/// pairs; l_total = l_cls + lambda_reg * l_joint_mean.
pub fn stage2_losses(
    gt: &[Joint],
    slots: &[ScoredPrediction],
    sigma: &[usize],
    scale: f64,
    lambda_reg: f64,
) -> Result<LossBreakdown> {
    validate_assignment_inputs(gt, slots, sigma)?;
    let k = slots.len();

    let mut target = vec![JointType::Fixed; k];
    for (n, &slot) in sigma.iter().enumerate() {
        target[slot] = gt[n].joint_type;
    }
    let mut l_cls = 0.0;
    for (slot_idx, slot) in slots.iter().enumerate() {
        check_simplex(slot_idx, &slot.type_scores)?;
        let p = slot.type_scores[target[slot_idx].code() as usize];
        l_cls += -(p.max(f64::MIN_POSITIVE)).ln();
    }
    l_cls /= k as f64;

    let mut l_joint_mean = 0.0;
    if !gt.is_empty() {
        for (n, &slot) in sigma.iter().enumerate() {
            l_joint_mean += pair_joint_loss(&gt[n], &slots[slot].joint, scale)?;
        }
        l_joint_mean /= gt.len() as f64;
    }

    Ok(LossBreakdown {
        l_cls,
        l_joint_mean,
        l_total: l_cls + lambda_reg * l_joint_mean,
    })
}

/// Analytic gradients of l_total with respect to each matched slot's
/// origin, raw axis vector and normalized range endpoints.
pub fn stage2_loss_gradients(
    gt: &[Joint],
    slots: &[ScoredPrediction],
    sigma: &[usize],
    scale: f64,
    lambda_reg: f64,
) -> Result<Vec<PairGradients>> {
    validate_assignment_inputs(gt, slots, sigma)?;
    let n_matched = gt.len();
    let mut out = Vec::with_capacity(n_matched);
    for (n, &slot) in sigma.iter().enumerate() {
        let g = &gt[n];
        let p = &slots[slot].joint;
        let w = lambda_reg / n_matched as f64;

        let d_origin = 2.0 * w * (p.origin - g.origin);

        let gn = normalize_range(g.joint_type, g.range, scale)?;
        let pn = normalize_range(p.joint_type, p.range, scale)?;
        let d_range = (2.0 * w * (pn.0 - gn.0), 2.0 * w * (pn.1 - gn.1));

        // d(-cos)/dâ = -(û - cosθ · v̂) / |â|; vanishes when antiparallel.
        let cos = cosine(&g.axis, &p.axis);
        let antiparallel = cos < -1.0 + 1e-9;
        let d_axis = if antiparallel || g.axis.norm() < GEOM_TOL || p.axis.norm() < GEOM_TOL {
            Vector3::zeros()
        } else {
            let u = g.axis.normalize();
            let v = p.axis.normalize();
            -w * (u - cos * v) / p.axis.norm()
        };

        out.push(PairGradients { gt_index: n, slot, d_origin, d_axis, d_range, antiparallel });
    }
    Ok(out)
}

fn validate_assignment_inputs(gt: &[Joint], slots: &[ScoredPrediction], sigma: &[usize]) -> Result<()> {
    if sigma.len() != gt.len() || gt.len() > slots.len() {
        return Err(Error::AssignmentShape { rows: gt.len(), cols: slots.len() });
    }
    let mut seen = vec![false; slots.len()];
    for &slot in sigma {
        if slot >= slots.len() || seen[slot] {
            return Err(Error::AssignmentShape { rows: gt.len(), cols: slots.len() });
        }
        seen[slot] = true;
    }
    Ok(())
}
