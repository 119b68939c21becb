//! Joint hypotheses from filtered motion seeds: group seeds into coherent
//! motion clusters, fit a rigid transform per cluster, read screw
//! parameters off the transform, and classify type and range.
//!
//! Same-pixel sampling makes thin swinging panels ambiguous in two ways.
//! A featureless rectangle registers onto its moved self equally well the
//! right way round, flipped end over end, or slid sideways into place, so
//! nearest-point cost alone cannot pick the real motion. When the panel
//! stays in view, the observed per-pixel displacement magnitudes break the
//! tie: a flip claims near-hinge points travelled the whole panel width
//! while their recorded displacement is tiny. When it swings out of view,
//! the cluster pairs the vacated surface with whatever static geometry now
//! shows through, so its displacements are meaningless; there we register
//! against the points that *appeared* at t=1 (came nearer or came over
//! background, by depth order from the recovered camera) and break ties by
//! requiring the rotation axis to pass through the region where the
//! vacated patch still touches the arrived panel — their shared hinge.

use std::collections::HashMap;

use nalgebra::{Matrix3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::kinematics::{screw_from_transform, Joint, JointType, RigidTransform};
use crate::pointmap::PointMap;
use crate::seeds::{
    adjust_seeds, estimate_camera_center, extract_candidates, filter_displacement, pair_scale,
    MotionSeed, SeedFilterConfig,
};

/// Seeds join a cluster only when their displacement directions agree
/// within 60 degrees.
pub const DIRECTION_COHERENCE_COS: f64 = 0.5;
/// Depth-order margin (fraction of scene scale) for calling a pixel's
/// surface newly appeared at t=1.
pub const APPEARED_DEPTH_TOL: f64 = 0.012;
const MIN_CLUSTER_SEEDS: usize = 8;
const MAX_POOL_COMPONENTS: usize = 6;
const ICP_MAX_SOURCES: usize = 600;
const ICP_CONVERGENCE: f64 = 1e-8;
/// Fits within this factor of the best cost count as tied and fall through
/// to the displacement-consistency tie-break.
const CHORD_TIE_FACTOR: f64 = 1.5;
const CHORD_TIE_ABS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Treats (p0, p1) as exact correspondences; closed-form alignment.
    Paired,
    /// Ignores the pairing (honest to same-pixel sampling): trimmed
    /// iterative closest point.
    Icp,
}

#[derive(Debug, Clone)]
pub struct EstimateConfig {
    /// Hypothesis slot capacity.
    pub k_max: usize,
    /// Hypotheses at or below this confidence are pruned.
    pub conf_threshold: f64,
    /// Cluster linkage distance as a fraction of scene scale.
    pub cluster_3d_gap: f64,
    /// Rotations at or above this angle classify as revolute (radians).
    pub revolute_min_angle: f64,
    /// Translations at or above this fraction of scene scale classify as
    /// prismatic.
    pub prismatic_min_slide: f64,
    pub icp_max_iters: usize,
    /// Worst fraction of matches dropped each alignment round.
    pub icp_trim_fraction: f64,
    pub fit_mode: FitMode,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            k_max: 16,
            conf_threshold: 0.5,
            cluster_3d_gap: 0.05,
            revolute_min_angle: 0.087,
            prismatic_min_slide: 0.01,
            icp_max_iters: 50,
            icp_trim_fraction: 0.2,
            fit_mode: FitMode::Icp,
        }
    }
}

impl EstimateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Geometry("k_max must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.conf_threshold) {
            return Err(Error::Geometry(format!(
                "conf_threshold {} outside [0, 1]",
                self.conf_threshold
            )));
        }
        for (name, v) in [
            ("cluster_3d_gap", self.cluster_3d_gap),
            ("revolute_min_angle", self.revolute_min_angle),
            ("prismatic_min_slide", self.prismatic_min_slide),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("{name} {v} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.icp_trim_fraction) {
            return Err(Error::Geometry(format!(
                "icp_trim_fraction {} outside [0, 1)",
                self.icp_trim_fraction
            )));
        }
        Ok(())
    }
}

/// Connected group of seeds moving coherently.
#[derive(Debug, Clone)]
pub struct MotionCluster {
    pub seeds: Vec<MotionSeed>,
    pub centroid0: Vector3<f64>,
    pub pixel_footprint: usize,
}

impl MotionCluster {
    pub fn from_seeds(seeds: Vec<MotionSeed>) -> Option<Self> {
        if seeds.is_empty() {
            return None;
        }
        let centroid0 = seeds.iter().map(|s| s.p0).sum::<Vector3<f64>>() / seeds.len() as f64;
        let pixel_footprint = seeds.len();
        Some(MotionCluster { seeds, centroid0, pixel_footprint })
    }
}

#[derive(Debug, Clone)]
pub struct JointHypothesis {
    pub joint: Joint,
    pub confidence: f64,
    pub support: usize,
    /// RMS fit error in meters over the fit's retained matches.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimateDiagnostics {
    pub candidates: usize,
    pub adjusted: usize,
    pub filtered: usize,
    pub clusters: usize,
    /// Cluster fits where displacement consistency overrode the cheapest
    /// registration.
    pub tie_breaks: usize,
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub hypotheses: Vec<JointHypothesis>,
    pub diagnostics: EstimateDiagnostics,
}

// ============================== clustering ================================

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.0[ri.max(rj)] = ri.min(rj);
        }
    }
}

fn directions_agree(a: &MotionSeed, b: &MotionSeed) -> bool {
    let (da, db) = (a.p1 - a.p0, b.p1 - b.p0);
    let denom = da.norm() * db.norm();
    if denom < 1e-15 {
        // A zero displacement carries no direction to contradict.
        return true;
    }
    da.dot(&db) / denom > DIRECTION_COHERENCE_COS
}

/// Connected components under "4-adjacent pixels, nearby closed-state
/// points, coherent displacement direction"; groups under 8 seeds are
/// discarded, the rest ordered by size descending and capped at `k_max`.
pub fn cluster_seeds(
    seeds: &[MotionSeed],
    cfg: &EstimateConfig,
    scale: f64,
) -> Vec<MotionCluster> {
    let gap = cfg.cluster_3d_gap * scale;
    let by_pixel: HashMap<(usize, usize), usize> =
        seeds.iter().enumerate().map(|(i, s)| ((s.row, s.col), i)).collect();
    let mut dsu = Dsu::new(seeds.len());
    for (i, s) in seeds.iter().enumerate() {
        for neighbor in [(s.row + 1, s.col), (s.row, s.col + 1)] {
            if let Some(&j) = by_pixel.get(&neighbor) {
                if (seeds[i].p0 - seeds[j].p0).norm() < gap && directions_agree(&seeds[i], &seeds[j])
                {
                    dsu.union(i, j);
                }
            }
        }
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..seeds.len() {
        let root = dsu.find(i);
        components.entry(root).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> =
        components.into_values().filter(|g| g.len() >= MIN_CLUSTER_SEEDS).collect();
    // Members are in row-major order already (insertion order); order groups
    // by size, ties by first pixel.
    groups.sort_by_key(|g| (std::cmp::Reverse(g.len()), seeds[g[0]].row, seeds[g[0]].col));
    groups.truncate(cfg.k_max);
    groups
        .into_iter()
        .filter_map(|g| {
            MotionCluster::from_seeds(g.into_iter().map(|i| seeds[i].clone()).collect())
        })
        .collect()
}

// ====================== appeared-surface target pool ======================

/// Opened-map points whose pixel's surface is new at t=1: the ray now hits
/// something nearer, or something where the closed map saw nothing. These
/// are where moving parts arrived, purged of revealed static background.
/// Low-confidence pixels stay in: an obliquely seen panel is flagged
/// edge-like wholesale, and dropping it would empty the pool exactly when
/// the panel is hardest to track.
pub fn appeared_points(
    p0: &PointMap,
    p1: &PointMap,
    cam: &Vector3<f64>,
    scale: f64,
) -> Vec<Vector3<f64>> {
    let tol = APPEARED_DEPTH_TOL * scale;
    let mut out = Vec::new();
    for r in 0..p1.height() {
        for c in 0..p1.width() {
            if !p1.is_valid(r, c) {
                continue;
            }
            let q = p1.point(r, c);
            if !p0.is_valid(r, c) {
                out.push(q);
            } else if (q - cam).norm() < (p0.point(r, c) - cam).norm() - tol {
                out.push(q);
            }
        }
    }
    out
}

/// Splits a point set into connected components under a linkage distance,
/// largest first; fragments under the cluster minimum are dropped.
fn point_components(points: &[Vector3<f64>], gap: f64) -> Vec<Vec<Vector3<f64>>> {
    let cell = gap.max(1e-12);
    let key = |p: &Vector3<f64>| {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64)
    };
    let mut bins: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        bins.entry(key(p)).or_default().push(i);
    }
    let mut dsu = Dsu::new(points.len());
    for (i, p) in points.iter().enumerate() {
        let base = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(ids) = bins.get(&(base.0 + dx, base.1 + dy, base.2 + dz)) else {
                        continue;
                    };
                    for &j in ids {
                        if j > i && (points[j] - p).norm() < gap {
                            dsu.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..points.len() {
        groups.entry(dsu.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> =
        groups.into_values().filter(|g| g.len() >= MIN_CLUSTER_SEEDS).collect();
    out.sort_by_key(|g| (std::cmp::Reverse(g.len()), g[0]));
    out.truncate(MAX_POOL_COMPONENTS);
    out.into_iter().map(|g| g.into_iter().map(|i| points[i]).collect()).collect()
}

// ================================ fitting =================================

fn centroid(points: impl Iterator<Item = Vector3<f64>>, n: usize) -> Vector3<f64> {
    points.sum::<Vector3<f64>>() / n as f64
}

/// Closed-form least-squares rigid alignment of paired points, with the
/// reflection guard. Errors when sources are collinear (the rotation about
/// that line is unconstrained).
fn kabsch(pairs: &[(Vector3<f64>, Vector3<f64>)]) -> Result<RigidTransform> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateCluster(format!("{} pairs", pairs.len())));
    }
    let n = pairs.len();
    let c0 = centroid(pairs.iter().map(|p| p.0), n);
    let c1 = centroid(pairs.iter().map(|p| p.1), n);
    let mut h = Matrix3::<f64>::zeros();
    let mut spread = Matrix3::<f64>::zeros();
    for (p, q) in pairs {
        let d0 = p - c0;
        h += d0 * (q - c1).transpose();
        spread += d0 * d0.transpose();
    }
    let eig = spread.symmetric_eigen().eigenvalues;
    let (max, mid) = {
        let mut v = [eig[0], eig[1], eig[2]];
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        (v[0], v[1])
    };
    if mid <= 1e-10 * max.max(1e-300) {
        return Err(Error::DegenerateCluster("collinear source points".into()));
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < 0.0 {
        let mut flip = Matrix3::identity();
        flip[(2, 2)] = -1.0;
        r = v_t.transpose() * flip * u.transpose();
    }
    let translation = c1 - r * c0;
    RigidTransform::new(r, translation)
}

/// Grid-hashed nearest neighbor over a fixed point set.
struct GridNn {
    cell: f64,
    span: i64,
    bins: HashMap<(i64, i64, i64), Vec<usize>>,
    points: Vec<Vector3<f64>>,
}

impl GridNn {
    fn build(points: Vec<Vector3<f64>>, cell: f64) -> Self {
        let key = |p: &Vector3<f64>| {
            (
                (p.x / cell).floor() as i64,
                (p.y / cell).floor() as i64,
                (p.z / cell).floor() as i64,
            )
        };
        let mut bins: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            lo = (lo.0.min(k.0), lo.1.min(k.1), lo.2.min(k.2));
            hi = (hi.0.max(k.0), hi.1.max(k.1), hi.2.max(k.2));
            bins.entry(k).or_default().push(i);
        }
        let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(hi.2 - lo.2).max(0) + 2;
        GridNn { cell, span, bins, points }
    }

    /// Exact nearest neighbor via expanding Chebyshev shells.
    fn nearest(&self, q: &Vector3<f64>) -> Option<(usize, f64)> {
        let base = (
            (q.x / self.cell).floor() as i64,
            (q.y / self.cell).floor() as i64,
            (q.z / self.cell).floor() as i64,
        );
        let mut best: Option<(f64, usize)> = None;
        for shell in 0..=self.span {
            if let Some((d, _)) = best {
                // Any point in a farther shell is at least (shell-1) cells
                // away from q.
                if d <= (shell - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            for dx in -shell..=shell {
                for dy in -shell..=shell {
                    for dz in -shell..=shell {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != shell {
                            continue;
                        }
                        let Some(ids) = self.bins.get(&(base.0 + dx, base.1 + dy, base.2 + dz))
                        else {
                            continue;
                        };
                        for &i in ids {
                            let d = (self.points[i] - q).norm();
                            if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(d, i)| (i, d))
    }
}

fn principal_axes(points: &[Vector3<f64>]) -> Matrix3<f64> {
    let c = centroid(points.iter().copied(), points.len());
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let mut m = Matrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    if m.determinant() < 0.0 {
        let col = -m.column(2);
        m.set_column(2, &col);
    }
    m
}

fn stride_subsample<T: Clone>(items: &[T], cap: usize) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let stride = items.len().div_ceil(cap);
    items.iter().step_by(stride).cloned().collect()
}

/// One ICP matching round: each transformed source against its nearest
/// target, sorted by residual (source index breaks ties).
fn match_round(
    sources: &[Vector3<f64>],
    tf: &RigidTransform,
    targets: &GridNn,
) -> Vec<(f64, usize, usize)> {
    let mut matches: Vec<(f64, usize, usize)> = sources
        .iter()
        .enumerate()
        .filter_map(|(i, p)| targets.nearest(&tf.apply_point(p)).map(|(j, d)| (d, i, j)))
        .collect();
    matches.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    matches
}

fn trimmed_rms(matches: &[(f64, usize, usize)], keep: usize) -> f64 {
    let kept = &matches[..keep.min(matches.len())];
    if kept.is_empty() {
        return f64::INFINITY;
    }
    (kept.iter().map(|(d, _, _)| d * d).sum::<f64>() / kept.len() as f64).sqrt()
}

#[derive(Debug, Clone)]
struct IcpFit {
    tf: RigidTransform,
    rms: f64,
    inlier_ratio: f64,
}

/// Candidate starts: centroid shift alone, plus the four proper
/// principal-axes alignments (planar sets leave sign ambiguities only
/// trying out resolves).
fn icp_starts(sources: &[Vector3<f64>], targets: &[Vector3<f64>]) -> Vec<RigidTransform> {
    let c0 = centroid(sources.iter().copied(), sources.len());
    let c1 = centroid(targets.iter().copied(), targets.len());
    let e0 = principal_axes(sources);
    let e1 = principal_axes(targets);
    let mut starts = vec![RigidTransform::from_translation(c1 - c0)];
    for signs in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        let s = Matrix3::from_diagonal(&Vector3::new(signs[0], signs[1], signs[2]));
        let r = e1 * s * e0.transpose();
        if let Ok(tf) = RigidTransform::new(r, c1 - r * c0) {
            starts.push(tf);
        }
    }
    starts
}

/// Trimmed ICP from one start against a prebuilt target index.
fn run_icp(
    sources: &[Vector3<f64>],
    start: RigidTransform,
    targets: &GridNn,
    cfg: &EstimateConfig,
    inlier_radius: f64,
) -> Result<IcpFit> {
    let keep = |n: usize| (((1.0 - cfg.icp_trim_fraction) * n as f64).floor() as usize).max(3);
    let mut tf = start;
    for _ in 0..cfg.icp_max_iters {
        let matches = match_round(sources, &tf, targets);
        if matches.len() < 3 {
            return Err(Error::DegenerateCluster("too few matches".into()));
        }
        let kept = &matches[..keep(matches.len()).min(matches.len())];
        let pairs: Vec<(Vector3<f64>, Vector3<f64>)> =
            kept.iter().map(|&(_, i, j)| (sources[i], targets.points[j])).collect();
        let next = kabsch(&pairs)?;
        let delta = next.distance(&tf);
        tf = next;
        if delta < ICP_CONVERGENCE {
            break;
        }
    }
    let final_matches = match_round(sources, &tf, targets);
    let rms = trimmed_rms(&final_matches, keep(final_matches.len()));
    let inliers = final_matches.iter().filter(|(d, _, _)| *d < inlier_radius).count();
    Ok(IcpFit { tf, rms, inlier_ratio: inliers as f64 / sources.len() as f64 })
}

/// Median mismatch between the motion's claimed point travel and the
/// seeds' recorded displacement magnitudes.
fn chord_median(tf: &RigidTransform, seeds: &[MotionSeed]) -> f64 {
    let mut m: Vec<f64> = seeds
        .iter()
        .map(|s| ((tf.apply_point(&s.p0) - s.p0).norm() - s.d).abs())
        .collect();
    m.sort_by(|a, b| a.partial_cmp(b).unwrap());
    m[m.len() / 2]
}

/// How near-tied registrations are separated. Clusters that track a moving
/// surface carry honest displacement magnitudes; clusters of *revealed*
/// surface (the panel left, the ray hits background) do not, but there the
/// vacated patch and the arrived panel share their hinge edge, so the real
/// motion's axis passes through the region where sources already touch
/// targets.
enum TieBreak {
    Chord,
    AxisNearOverlap { anchor: Vector3<f64>, min_angle: f64 },
}

fn tie_break_score(fit: &IcpFit, seeds: &[MotionSeed], rule: &TieBreak) -> f64 {
    match rule {
        TieBreak::Chord => chord_median(&fit.tf, seeds),
        TieBreak::AxisNearOverlap { anchor, min_angle } => {
            let screw = screw_from_transform(&fit.tf, anchor);
            if screw.angle < *min_angle {
                f64::INFINITY
            } else {
                // The pivot is the axis point closest to the anchor.
                (screw.pivot - anchor).norm()
            }
        }
    }
}

/// Cheapest fit wins; fits tied within `CHORD_TIE_FACTOR` are re-ranked by
/// the cluster's tie-break rule. Returns the choice and whether the
/// tie-break overrode the cost order.
fn select_fit(
    candidates: Vec<IcpFit>,
    seeds: &[MotionSeed],
    scale: f64,
    rule: &TieBreak,
) -> Option<(IcpFit, bool)> {
    let best_rms = candidates.iter().map(|c| c.rms).fold(f64::INFINITY, f64::min);
    if !best_rms.is_finite() {
        return None;
    }
    let tie_limit = best_rms * CHORD_TIE_FACTOR + CHORD_TIE_ABS * scale;
    let mut tied: Vec<(f64, f64, usize)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rms <= tie_limit)
        .map(|(i, c)| (tie_break_score(c, seeds, rule), c.rms, i))
        .collect();
    tied.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()).then(a.2.cmp(&b.2))
    });
    let chosen = tied.first()?.2;
    let cheapest = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.rms.partial_cmp(&b.1.rms).unwrap().then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    let overrode = candidates[chosen].tf.distance(&candidates[cheapest].tf) > 1e-9;
    Some((candidates[chosen].clone(), overrode))
}

fn icp_candidates(
    sources: &[Vector3<f64>],
    target_pts: &[Vector3<f64>],
    targets: &GridNn,
    cfg: &EstimateConfig,
    inlier_radius: f64,
) -> Vec<IcpFit> {
    icp_starts(sources, target_pts)
        .into_iter()
        .filter_map(|start| run_icp(sources, start, targets, cfg, inlier_radius).ok())
        .collect()
}

/// Fits the rigid motion carrying the cluster's closed-state points onto
/// its opened-state points. Returns the transform, the fraction of sources
/// within half the cluster linkage distance of a target, and the RMS error
/// over the fit's retained matches.
pub fn fit_cluster_motion(
    cluster: &MotionCluster,
    mode: FitMode,
    cfg: &EstimateConfig,
    scale: f64,
) -> Result<(RigidTransform, f64, f64)> {
    cfg.validate()?;
    let inlier_radius = cfg.cluster_3d_gap * scale / 2.0;
    match mode {
        FitMode::Paired => {
            let pairs: Vec<(Vector3<f64>, Vector3<f64>)> =
                cluster.seeds.iter().map(|s| (s.p0, s.p1)).collect();
            let tf = kabsch(&pairs)?;
            let (mut sq_sum, mut inliers) = (0.0, 0usize);
            for (p, q) in &pairs {
                let r = (tf.apply_point(p) - q).norm();
                sq_sum += r * r;
                if r < inlier_radius {
                    inliers += 1;
                }
            }
            let residual = (sq_sum / pairs.len() as f64).sqrt();
            Ok((tf, inliers as f64 / pairs.len() as f64, residual))
        }
        FitMode::Icp => {
            let sources: Vec<Vector3<f64>> = stride_subsample(
                &cluster.seeds.iter().map(|s| s.p0).collect::<Vec<_>>(),
                ICP_MAX_SOURCES,
            );
            let target_pts: Vec<Vector3<f64>> = cluster.seeds.iter().map(|s| s.p1).collect();
            let targets = GridNn::build(target_pts.clone(), (cfg.cluster_3d_gap * scale).max(1e-9));
            let candidates = icp_candidates(&sources, &target_pts, &targets, cfg, inlier_radius);
            let (fit, _) = select_fit(candidates, &cluster.seeds, scale, &TieBreak::Chord)
                .ok_or_else(|| Error::DegenerateCluster("no registration converged".into()))?;
            Ok((fit.tf, fit.inlier_ratio, fit.rms))
        }
    }
}

/// Picks the disambiguation rule for a cluster. When most of the cluster's
/// rays got *longer*, the patch is revealed surface whose recorded
/// displacements measure the gap to the background, not the part's travel;
/// there the honest cue is that the vacated patch and the arrived panel
/// share their hinge region, so the real motion's axis passes through the
/// points where sources already touch the pool. Everywhere else the
/// displacement magnitudes are trustworthy and the chord rule applies.
fn tie_break_rule(
    cluster: &MotionCluster,
    sources: &[Vector3<f64>],
    cam: Option<&Vector3<f64>>,
    top: Option<&(f64, usize)>,
    pool: &[(Vec<Vector3<f64>>, GridNn)],
    cfg: &EstimateConfig,
    scale: f64,
) -> TieBreak {
    let (Some(cam), Some(&(_, top_idx))) = (cam, top) else {
        return TieBreak::Chord;
    };
    let tol = APPEARED_DEPTH_TOL * scale;
    let revealed = cluster
        .seeds
        .iter()
        .filter(|s| (s.p1 - cam).norm() > (s.p0 - cam).norm() + tol)
        .count();
    if (revealed as f64) <= 0.5 * cluster.seeds.len() as f64 {
        return TieBreak::Chord;
    }
    let gap = cfg.cluster_3d_gap * scale;
    let nn = &pool[top_idx].1;
    let touching: Vec<Vector3<f64>> = sources
        .iter()
        .filter(|p| nn.nearest(p).is_some_and(|(_, d)| d < gap))
        .copied()
        .collect();
    if touching.len() < 3 {
        return TieBreak::Chord;
    }
    let anchor = centroid(touching.iter().copied(), touching.len());
    TieBreak::AxisNearOverlap { anchor, min_angle: cfg.revolute_min_angle }
}

// ======================= planar-cluster projection ========================

/// Unit normal and centroid of the cluster's closed-state patch when it is
/// genuinely flat. A thin patch leaves sliding and spinning within its own
/// plane invisible to registration, so only the plane-to-plane part of a
/// fit can be trusted. Returns None for patches with real thickness, or so
/// narrow that the normal itself is ill-conditioned.
fn source_plane(cluster: &MotionCluster, scale: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let c0 = cluster.centroid0;
    let mut cov = Matrix3::<f64>::zeros();
    for s in &cluster.seeds {
        let d = s.p0 - c0;
        cov += d * d.transpose();
    }
    cov /= cluster.seeds.len() as f64;
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let thin = eig.eigenvalues[order[0]].max(0.0).sqrt() < 0.01 * scale;
    let wide = eig.eigenvalues[order[1]].max(0.0).sqrt() > 0.02 * scale;
    (thin && wide).then(|| (eig.eigenvectors.column(order[0]).into_owned(), c0))
}

/// Minimal-motion completion of a fit on a flat patch. A near-parallel
/// plane map becomes the pure translation along the normal; anything else
/// becomes a rotation about the two planes' intersection line — for a
/// panel hinged on one of its own edges that line *is* the hinge, so this
/// discards exactly the unobservable in-plane drift and keeps the
/// well-conditioned plane orientation. Rotating by the dihedral angle or
/// by its reverse supplement both map the unoriented planes onto each
/// other, so the rotation case returns both and the caller keeps the one
/// that lands the patch on actual surface.
fn project_planar_fit(
    tf: &RigidTransform,
    normal: &Vector3<f64>,
    centroid: &Vector3<f64>,
    min_angle: f64,
) -> (RigidTransform, Option<RigidTransform>) {
    let n1 = tf.apply_vector(normal);
    let cross = normal.cross(&n1);
    let sin = cross.norm();
    let angle = sin.atan2(normal.dot(&n1));
    if angle < min_angle {
        let delta = (tf.apply_point(centroid) - centroid).dot(normal);
        return (RigidTransform::from_translation(delta * *normal), None);
    }
    if sin < 1e-9 {
        // Plane mapped onto itself reversed: the hinge line is anywhere in
        // the plane, so there is nothing to correct toward.
        return (tf.clone(), None);
    }
    let axis = Unit::new_normalize(cross);
    let d0 = centroid.dot(normal);
    let d1 = tf.apply_point(centroid).dot(&n1);
    // Minimal-norm point on both planes, as a combination of the normals.
    let c = normal.dot(&n1);
    let det = 1.0 - c * c;
    let (a, b) = ((d0 - c * d1) / det, (d1 - c * d0) / det);
    let pivot = a * *normal + b * n1;
    (
        RigidTransform::rotation_about_line(&axis, angle, &pivot),
        Some(RigidTransform::rotation_about_line(&axis, angle - std::f64::consts::PI, &pivot)),
    )
}

/// Trimmed mean distance from the mapped sources to the nearest of any
/// target set; the yardstick for choosing between plane-map variants.
fn transform_cost(
    tf: &RigidTransform,
    sources: &[Vector3<f64>],
    targets: &[&GridNn],
    keep: usize,
) -> f64 {
    let mut dists: Vec<f64> = sources
        .iter()
        .map(|p| {
            let q = tf.apply_point(p);
            targets
                .iter()
                .filter_map(|nn| nn.nearest(&q).map(|(_, d)| d))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    dists.sort_by(|x, y| x.partial_cmp(y).unwrap());
    dists.truncate(keep.max(1).min(dists.len()));
    if dists.is_empty() || dists.iter().any(|d| !d.is_finite()) {
        return f64::INFINITY;
    }
    dists.iter().sum::<f64>() / dists.len() as f64
}

// ============================ classification ==============================

/// Unit axis with components below 5% of the norm zeroed. Estimated axes
/// hover next to the grid planes, and a sign-noisy near-zero component must
/// not decide the canonical orientation.
fn snap_axis(axis: &Vector3<f64>) -> Vector3<f64> {
    let floor = 0.05 * axis.norm();
    let snapped = axis.map(|c| if c.abs() < floor { 0.0 } else { c });
    if snapped.norm() > 0.0 { snapped.normalize() } else { axis.normalize() }
}

/// Reads joint type, axis, origin and range off a fitted cluster motion.
/// Rotation at or above the revolute gate wins; otherwise the translation
/// magnitude decides prismatic versus fixed. The fit's inlier ratio and the
/// cluster's size set the confidence.
pub fn hypothesis_from_motion(
    tf: &RigidTransform,
    cluster: &MotionCluster,
    inlier_ratio: f64,
    residual: f64,
    cfg: &EstimateConfig,
    scale: f64,
) -> Result<JointHypothesis> {
    let screw = screw_from_transform(tf, &cluster.centroid0);
    let support = cluster.seeds.len();
    let confidence = inlier_ratio * (support as f64 / 50.0).min(1.0);
    let joint = if screw.angle.abs() >= cfg.revolute_min_angle {
        Joint::revolute(screw.pivot, snap_axis(&screw.axis), (0.0, screw.angle.abs()))?
            .canonicalized()?
    } else {
        let translation = tf.translation;
        let slide = translation.norm();
        if slide >= cfg.prismatic_min_slide * scale {
            Joint::prismatic(cluster.centroid0, snap_axis(&translation), (0.0, slide))?
                .canonicalized()?
        } else {
            Joint::fixed(cluster.centroid0)
        }
    };
    Ok(JointHypothesis { joint, confidence, support, residual })
}

// ================================ pipeline ================================

/// Full estimation pipeline: extract, adjust and band-filter seeds, cluster
/// them, fit each cluster against the appeared-surface pool (falling back
/// to the cluster's own opened points when no pool exists), classify, then
/// prune to kinematic hypotheses above the confidence threshold.
/// Degenerate clusters are skipped.
pub fn estimate_joints(
    p0: &PointMap,
    p1: &PointMap,
    cfg: &EstimateConfig,
    filter_cfg: &SeedFilterConfig,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let mut diagnostics = EstimateDiagnostics::default();
    let scale = pair_scale(p0, p1);
    if scale <= 0.0 {
        return Ok(EstimateResult { hypotheses: Vec::new(), diagnostics });
    }

    let candidates = extract_candidates(p0, p1, filter_cfg)?;
    diagnostics.candidates = candidates.len();
    let adjusted = adjust_seeds(candidates, p0, p1, filter_cfg);
    diagnostics.adjusted = adjusted.len();
    let filtered = filter_displacement(&adjusted, filter_cfg, scale);
    diagnostics.filtered = filtered.len();
    let clusters = cluster_seeds(&filtered, cfg, scale);
    diagnostics.clusters = clusters.len();
    if clusters.is_empty() {
        return Ok(EstimateResult { hypotheses: Vec::new(), diagnostics });
    }

    let gap = cfg.cluster_3d_gap * scale;
    let inlier_radius = gap / 2.0;
    let cam = estimate_camera_center(p0, p1, scale);
    // Split components at half the cluster linkage: stacked drawer fronts
    // sit a band apart at t=1 and must not fuse into one target.
    let pool: Vec<(Vec<Vector3<f64>>, GridNn)> = cam
        .map(|c| appeared_points(p0, p1, &c, scale))
        .map(|pts| point_components(&pts, 0.5 * gap))
        .unwrap_or_default()
        .into_iter()
        .map(|comp| {
            let nn = GridNn::build(comp.clone(), gap.max(1e-9));
            (comp, nn)
        })
        .collect();

    if std::env::var("ARTIKIT_DEBUG_SUPPLEMENT").is_ok() {
        let raw = cam.map(|c| appeared_points(p0, p1, &c, scale)).unwrap_or_default();
        eprintln!(
            "pool: cam {:?} raw {} comps {:?}",
            cam.is_some(),
            raw.len(),
            pool.iter().map(|(pts, _)| pts.len()).collect::<Vec<_>>()
        );
    }
    let t0_all = {
        let mut pts = Vec::new();
        for r in 0..p0.height() {
            for c in 0..p0.width() {
                if p0.is_valid(r, c) {
                    pts.push(p0.point(r, c));
                }
            }
        }
        GridNn::build(pts, gap.max(1e-9))
    };

    let mut hypotheses = Vec::new();
    let mut comp_claims: std::collections::BTreeMap<usize, (f64, JointHypothesis, Vector3<f64>)> =
        std::collections::BTreeMap::new();
    for cluster in &clusters {
        let sources: Vec<Vector3<f64>> = stride_subsample(
            &cluster.seeds.iter().map(|s| s.p0).collect::<Vec<_>>(),
            ICP_MAX_SOURCES,
        );
        // Rank pool components by one matching round from their best start,
        // then register in full against the two most promising.
        let keep =
            (((1.0 - cfg.icp_trim_fraction) * sources.len() as f64).floor() as usize).max(3);
        let mut ranked: Vec<(f64, usize)> = pool
            .iter()
            .enumerate()
            .map(|(i, (pts, nn))| {
                let preview = icp_starts(&sources, pts)
                    .into_iter()
                    .map(|start| trimmed_rms(&match_round(&sources, &start, nn), keep))
                    .fold(f64::INFINITY, f64::min);
                (preview, i)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let mut candidates: Vec<IcpFit> = Vec::new();
        for &(_, i) in ranked.iter().take(2) {
            let (pts, nn) = &pool[i];
            candidates.extend(icp_candidates(&sources, pts, nn, cfg, inlier_radius));
        }
        let rule = tie_break_rule(cluster, &sources, cam.as_ref(), ranked.first(), &pool, cfg, scale);
        let from_pool = !candidates.is_empty();
        let fitted = if candidates.is_empty() {
            match fit_cluster_motion(cluster, cfg.fit_mode, cfg, scale) {
                Ok((tf, inlier_ratio, rms)) => Some((IcpFit { tf, rms, inlier_ratio }, false)),
                Err(Error::DegenerateCluster(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            select_fit(candidates, &cluster.seeds, scale, &rule)
        };
        let Some((fit, overrode)) = fitted else {
            continue;
        };
        if overrode {
            diagnostics.tie_breaks += 1;
        }
        let plane = source_plane(cluster, scale);
        let tf = match &plane {
            Some((n0, c0)) => {
                let (primary, alt) =
                    project_planar_fit(&fit.tf, n0, c0, cfg.revolute_min_angle);
                match alt {
                    Some(alt) => {
                        // A slab's two faces are a half turn apart, so when
                        // the far face is what shows at t=1 the registration
                        // is the end-over-end flip of the true swing, and it
                        // matches the visible surface better than the truth
                        // does. Forward residuals cannot separate them; what
                        // does is pulling the arrived surface back: the true
                        // swing parks it on t=0 surface, the flip in mid-air.
                        let mapped: Vec<Vector3<f64>> = match ranked.first() {
                            Some(&(_, i)) => stride_subsample(&pool[i].0, ICP_MAX_SOURCES),
                            None => stride_subsample(
                                &cluster.seeds.iter().map(|s| s.p1).collect::<Vec<_>>(),
                                ICP_MAX_SOURCES,
                            ),
                        };
                        let keep_m = (((1.0 - cfg.icp_trim_fraction) * mapped.len() as f64)
                            .floor() as usize)
                            .max(3);
                        let cost_a =
                            transform_cost(&primary.inverse(), &mapped, &[&t0_all], keep_m);
                        let cost_b = transform_cost(&alt.inverse(), &mapped, &[&t0_all], keep_m);
                        if std::env::var("ARTIKIT_DEBUG_SUPPLEMENT").is_ok() {
                            let sa = screw_from_transform(&primary, c0);
                            let sb = screw_from_transform(&alt, c0);
                            eprintln!(
                                "cluster {} seeds: primary {:.1}deg cost {:.4}, alt {:.1}deg cost {:.4}, from_pool {}",
                                cluster.seeds.len(),
                                sa.angle.to_degrees(),
                                cost_a,
                                sb.angle.to_degrees(),
                                cost_b,
                                from_pool,
                            );
                        }
                        if cost_b < cost_a { alt } else { primary }
                    }
                    None => primary,
                }
            }
            None => fit.tf.clone(),
        };
        let hyp = hypothesis_from_motion(&tf, cluster, fit.inlier_ratio, fit.rms, cfg, scale)?;
        if !(hyp.joint.joint_type.is_kinematic() && hyp.confidence > cfg.conf_threshold) {
            continue;
        }
        // Sliding panels need the pool to pin them down twice over: the
        // cluster's own centroid is dragged around by occlusion-rim seeds,
        // and two drawers pushed out equally far move as one rigid field,
        // merging into a single cluster. The arrived surfaces at t=1 are
        // separate components, so each component the translation explains
        // becomes its own hypothesis, anchored at the component pulled back
        // to the closed state.
        if hyp.joint.joint_type == JointType::Prismatic && !pool.is_empty() {
            let t = tf.translation;
            let back = RigidTransform::from_translation(-t);
            let src =
                GridNn::build(cluster.seeds.iter().map(|s| s.p0).collect(), gap.max(1e-9));
            let mut any = false;
            for (ci, (pts, _)) in pool.iter().enumerate() {
                // A flat patch tests components by the residual off its own
                // plane: independent of how much of the panel the cluster's
                // surviving seeds happen to cover, yet a wrong slide still
                // shows up as the full slide difference.
                let (cost, bar) = match &plane {
                    Some((n0, c0)) => {
                        let sum: f64 =
                            pts.iter().map(|q| ((q - t - c0).dot(n0)).abs()).sum();
                        (sum / pts.len() as f64, 0.5 * inlier_radius)
                    }
                    None => {
                        let keep_pts = ((0.5 * pts.len() as f64).floor() as usize).max(1);
                        (transform_cost(&back, pts, &[&src], keep_pts), inlier_radius)
                    }
                };
                if cost >= bar {
                    continue;
                }
                any = true;
                let better = comp_claims.get(&ci).is_none_or(|(c, ..)| cost < *c);
                if better {
                    comp_claims.insert(ci, (cost, hyp.clone(), t));
                }
            }
            if !any {
                hypotheses.push(hyp);
            }
        } else {
            hypotheses.push(hyp);
        }
    }
    for (ci, (_, mut hyp, t)) in comp_claims {
        let pts = &pool[ci].0;
        let origin = centroid(pts.iter().copied(), pts.len()) - t;
        hyp.joint = Joint::prismatic(origin, snap_axis(&t), (0.0, t.norm()))?.canonicalized()?;
        hyp.support = pts.len();
        hypotheses.push(hyp);
    }
    Ok(EstimateResult { hypotheses, diagnostics })
}
