//! Track-to-detection association.
//!
//! Each entry of the cost matrix blends the mean particle-to-detection
//! motion cost, the detection's lack of confidence and the track penalty.
//! The matrix is solved by [`min_cost_assignment`]; pairs above the gate
//! are split back into unmatched tracks and detections.

use crate::assignment::min_cost_assignment;
pub use crate::assignment::CostMatrix;
use crate::config::TrackerConfig;
use crate::geometry::{center_distance, iou, BBox, Detection};
use crate::lifecycle::Track;

/// Row/column level result of [`solve_assignment`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssignmentResult {
    /// `(row, column)` pairs, ordered by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Association outcome in track-id terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Classification {
    /// `(track id, detection index)`.
    pub strong: Vec<(u64, usize)>,
    pub weak: Vec<u64>,
    /// Detection indices that start new tracks.
    pub births: Vec<usize>,
}

/// `(1 - IoU) * min(dist, d_od) / d_od` between a particle box and a detection.
pub fn motion_cost(p: &BBox, det: &BBox, d_od: f64) -> f64 {
    let c_iou = 1.0 - iou(p, det);
    let c_d = center_distance(p, det).min(d_od) / d_od;
    (c_iou * c_d).clamp(0.0, 1.0)
}

/// One row per track, one column per detection.
pub fn build_cost_matrix(tracks: &[Track], dets: &[Detection], cfg: &TrackerConfig) -> CostMatrix {
    CostMatrix::from_fn(tracks.len(), dets.len(), |i, j| {
        let t = &tracks[i];
        let det = &dets[j];
        let d_od = 0.5 * (t.state.diag() + det.bbox.diag());
        let motion = if t.particles.is_empty() {
            motion_cost(&t.state, &det.bbox, d_od)
        } else {
            t.particles
                .iter()
                .map(|p| motion_cost(&p.state, &det.bbox, d_od))
                .sum::<f64>()
                / t.particles.len() as f64
        };
        let c = cfg.lambda_p * motion + cfg.lambda_d * (1.0 - det.conf) + cfg.lambda_h * t.penalty;
        c.clamp(0.0, 1.0)
    })
}

/// Minimum-cost assignment followed by gating: matched pairs costing more
/// than `gate` are released on both sides.
pub fn solve_assignment(c: &CostMatrix, gate: f64) -> AssignmentResult {
    let assigned = min_cost_assignment(c);
    let mut out = AssignmentResult::default();
    let mut col_used = vec![false; c.cols()];
    for (row, col) in assigned.into_iter().enumerate() {
        match col {
            Some(col) if c.get(row, col) <= gate => {
                col_used[col] = true;
                out.matches.push((row, col));
            }
            _ => out.unmatched_rows.push(row),
        }
    }
    out.unmatched_cols = (0..c.cols()).filter(|&j| !col_used[j]).collect();
    out
}

/// Splits an assignment into strong matches, weak tracks and births.
pub fn classify(
    assign: &AssignmentResult,
    track_ids: &[u64],
    dets: &[Detection],
    conf_new: f64,
) -> Classification {
    Classification {
        strong: assign
            .matches
            .iter()
            .map(|&(r, c)| (track_ids[r], c))
            .collect(),
        weak: assign
            .unmatched_rows
            .iter()
            .map(|&r| track_ids[r])
            .collect(),
        births: assign
            .unmatched_cols
            .iter()
            .copied()
            .filter(|&c| dets[c].conf >= conf_new)
            .collect(),
    }
}
