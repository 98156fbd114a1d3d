//! CLEAR-MOT accuracy and identity F1.
//!
//! Per frame, ground-truth/hypothesis pairs matched in the previous frame are
//! kept while their IoU stays above the threshold; the rest are matched by a
//! minimum-cost assignment on `1 - IoU`. Identity F1 comes from a single
//! global assignment between ground-truth and hypothesis trajectories.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::assignment::{min_cost_assignment, CostMatrix};
use crate::geometry::{iou, BBox};
use crate::motfile::MotRecord;
use crate::pipeline::TrackOutput;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("frame {frame}: id {id} appears more than once")]
    DuplicateId { frame: u32, id: i64 },
}

/// Boxes per frame, keyed by frame then id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackFile {
    frames: BTreeMap<u32, BTreeMap<i64, BBox>>,
}

impl TrackFile {
    pub fn from_records(records: &[MotRecord]) -> Result<Self, MetricsError> {
        Self::from_boxes(records.iter().map(|r| (r.frame, r.id, r.bbox)))
    }

    pub fn from_boxes(
        items: impl IntoIterator<Item = (u32, i64, BBox)>,
    ) -> Result<Self, MetricsError> {
        let mut frames: BTreeMap<u32, BTreeMap<i64, BBox>> = BTreeMap::new();
        for (frame, id, b) in items {
            if frames.entry(frame).or_default().insert(id, b).is_some() {
                return Err(MetricsError::DuplicateId { frame, id });
            }
        }
        Ok(Self { frames })
    }

    /// Tracker output, one entry per frame. Track ids are unique within a
    /// step, so this cannot fail.
    pub fn from_outputs(results: &[(u32, Vec<TrackOutput>)]) -> Self {
        let mut frames: BTreeMap<u32, BTreeMap<i64, BBox>> = BTreeMap::new();
        for (frame, outs) in results {
            let row = frames.entry(*frame).or_default();
            for o in outs {
                row.insert(o.id as i64, o.bbox);
            }
        }
        Self { frames }
    }

    pub fn frames(&self) -> &BTreeMap<u32, BTreeMap<i64, BBox>> {
        &self.frames
    }

    /// Total number of boxes.
    pub fn len(&self) -> usize {
        self.frames.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> BTreeSet<i64> {
        self.frames
            .values()
            .flat_map(|m| m.keys().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mota: f64,
    pub idf1: f64,
    pub idsw: usize,
    pub fp: usize,
    #[doc(alias = "fn")]
    pub fn_: usize,
    pub gt_count: usize,
    pub matches: usize,
    pub idtp: usize,
    pub hyp_count: usize,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8}{:>10}", "metric", "value")?;
        writeln!(f, "{:<8}{:>10.3}", "MOTA", self.mota)?;
        writeln!(f, "{:<8}{:>10.3}", "IDF1", self.idf1)?;
        writeln!(f, "{:<8}{:>10}", "IDSW", self.idsw)?;
        writeln!(f, "{:<8}{:>10}", "FP", self.fp)?;
        writeln!(f, "{:<8}{:>10}", "FN", self.fn_)?;
        writeln!(f, "{:<8}{:>10}", "GT", self.gt_count)?;
        write!(f, "{:<8}{:>10}", "MATCHES", self.matches)
    }
}

/// Per ground-truth identity outcome of the frame-by-frame matching.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GtIdentity {
    pub frames: usize,
    pub matched_frames: usize,
    pub switches: usize,
    /// Hypothesis ids this object was matched to, in order of first use.
    pub hyp_ids: Vec<i64>,
    pub matched_at_end: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub per_gt: BTreeMap<i64, GtIdentity>,
}

impl Evaluation {
    /// Ground-truth objects not matched in their last frame.
    pub fn lost_identities(&self) -> usize {
        self.per_gt.values().filter(|g| !g.matched_at_end).count()
    }
}

pub fn evaluate(gt: &TrackFile, hyp: &TrackFile, iou_threshold: f64) -> MetricsReport {
    evaluate_detailed(gt, hyp, iou_threshold).report
}

pub fn evaluate_detailed(gt: &TrackFile, hyp: &TrackFile, iou_threshold: f64) -> Evaluation {
    let empty = BTreeMap::new();
    let all_frames: BTreeSet<u32> = gt.frames.keys().chain(hyp.frames.keys()).copied().collect();
    let last_gt_frame: HashMap<i64, u32> = gt
        .frames
        .iter()
        .flat_map(|(f, m)| m.keys().map(move |id| (*id, *f)))
        .collect();

    let mut per_gt: BTreeMap<i64, GtIdentity> = BTreeMap::new();
    let mut prev: BTreeMap<i64, i64> = BTreeMap::new();
    let mut last_hyp: HashMap<i64, i64> = HashMap::new();
    let (mut fp, mut fn_, mut idsw, mut matches) = (0, 0, 0, 0);

    for f in all_frames {
        let g = gt.frames.get(&f).unwrap_or(&empty);
        let h = hyp.frames.get(&f).unwrap_or(&empty);
        let mut pairs: BTreeMap<i64, i64> = BTreeMap::new();
        for (&gid, &hid) in &prev {
            if let (Some(gb), Some(hb)) = (g.get(&gid), h.get(&hid)) {
                if iou(gb, hb) >= iou_threshold {
                    pairs.insert(gid, hid);
                }
            }
        }
        let taken: BTreeSet<i64> = pairs.values().copied().collect();
        let free_g: Vec<(i64, &BBox)> = g
            .iter()
            .filter(|(id, _)| !pairs.contains_key(id))
            .map(|(i, b)| (*i, b))
            .collect();
        let free_h: Vec<(i64, &BBox)> = h
            .iter()
            .filter(|(id, _)| !taken.contains(id))
            .map(|(i, b)| (*i, b))
            .collect();
        if !free_g.is_empty() && !free_h.is_empty() {
            // a forbidden pair costs more than any full set of allowed pairs
            let forbidden = 1.0 + free_g.len().min(free_h.len()) as f64;
            let c = CostMatrix::from_fn(free_g.len(), free_h.len(), |i, j| {
                let o = iou(free_g[i].1, free_h[j].1);
                if o >= iou_threshold {
                    1.0 - o
                } else {
                    forbidden
                }
            });
            for (i, j) in min_cost_assignment(&c).into_iter().enumerate() {
                if let Some(j) = j {
                    if c.get(i, j) < forbidden {
                        pairs.insert(free_g[i].0, free_h[j].0);
                    }
                }
            }
        }

        for &gid in g.keys() {
            let e = per_gt.entry(gid).or_default();
            e.frames += 1;
            let hit = pairs.get(&gid).copied();
            if let Some(hid) = hit {
                e.matched_frames += 1;
                if let Some(&before) = last_hyp.get(&gid) {
                    if before != hid {
                        idsw += 1;
                        e.switches += 1;
                    }
                }
                if !e.hyp_ids.contains(&hid) {
                    e.hyp_ids.push(hid);
                }
                last_hyp.insert(gid, hid);
            }
            if last_gt_frame[&gid] == f {
                e.matched_at_end = hit.is_some();
            }
        }
        matches += pairs.len();
        fn_ += g.len() - pairs.len();
        fp += h.len() - pairs.len();
        prev = pairs;
    }

    let gt_count = gt.len();
    let hyp_count = hyp.len();
    let mota = if gt_count == 0 {
        if fp == 0 {
            100.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        100.0 * (1.0 - (fn_ + fp + idsw) as f64 / gt_count as f64)
    };
    let idtp = identity_true_positives(gt, hyp, iou_threshold);
    let idf1 = if gt_count + hyp_count == 0 {
        100.0
    } else {
        100.0 * 2.0 * idtp as f64 / (gt_count + hyp_count) as f64
    };
    Evaluation {
        report: MetricsReport {
            mota,
            idf1,
            idsw,
            fp,
            fn_,
            gt_count,
            matches,
            idtp,
            hyp_count,
        },
        per_gt,
    }
}

/// Largest total number of frames in which matched trajectory pairs
/// overlap, over one-to-one pairings of ground-truth and hypothesis ids.
fn identity_true_positives(gt: &TrackFile, hyp: &TrackFile, iou_threshold: f64) -> usize {
    let gids: Vec<i64> = gt.ids().into_iter().collect();
    let hids: Vec<i64> = hyp.ids().into_iter().collect();
    if gids.is_empty() || hids.is_empty() {
        return 0;
    }
    let gi: HashMap<i64, usize> = gids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let hi: HashMap<i64, usize> = hids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut overlap = vec![0usize; gids.len() * hids.len()];
    for (f, g) in &gt.frames {
        let Some(h) = hyp.frames.get(f) else { continue };
        for (gid, gb) in g {
            for (hid, hb) in h {
                if iou(gb, hb) >= iou_threshold {
                    overlap[gi[gid] * hids.len() + hi[hid]] += 1;
                }
            }
        }
    }
    let c = CostMatrix::from_fn(gids.len(), hids.len(), |i, j| {
        -(overlap[i * hids.len() + j] as f64)
    });
    min_cost_assignment(&c)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| overlap[i * hids.len() + j]))
        .sum()
}
