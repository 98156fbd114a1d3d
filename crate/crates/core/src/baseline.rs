//! Reference tracker: greedy IoU matching with no motion model, in the
//! style of SORT without its Kalman filter.
//!
//! Tracks keep the box of their last matched detection, survive up to
//! `max_age` unmatched frames and are reported only on frames where they
//! were matched.

use crate::geometry::{iou, BBox, Detection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub iou_threshold: f64,
    pub max_age: u32,
    pub min_conf: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            max_age: 5,
            min_conf: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct BaselineTrack {
    id: u64,
    bbox: BBox,
    misses: u32,
}

#[derive(Debug, Clone)]
pub struct IouTracker {
    cfg: BaselineConfig,
    tracks: Vec<BaselineTrack>,
    next_id: u64,
}

impl IouTracker {
    pub fn new(cfg: BaselineConfig) -> Self {
        Self {
            cfg,
            tracks: Vec::new(),
            next_id: 1,
        }
    }

    /// Returns `(id, box)` for every track matched or born this frame.
    pub fn step(&mut self, dets: &[Detection]) -> Vec<(u64, BBox)> {
        let dets: Vec<&Detection> = dets
            .iter()
            .filter(|d| d.conf >= self.cfg.min_conf)
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, t) in self.tracks.iter().enumerate() {
            for (j, d) in dets.iter().enumerate() {
                let o = iou(&t.bbox, &d.bbox);
                if o >= self.cfg.iou_threshold {
                    pairs.push((o, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; self.tracks.len()];
        let mut det_used = vec![false; dets.len()];
        let mut out = Vec::new();
        for (_, i, j) in pairs {
            if track_used[i] || det_used[j] {
                continue;
            }
            track_used[i] = true;
            det_used[j] = true;
            self.tracks[i].bbox = dets[j].bbox;
            self.tracks[i].misses = 0;
            out.push((self.tracks[i].id, dets[j].bbox));
        }
        for (t, used) in self.tracks.iter_mut().zip(&track_used) {
            if !used {
                t.misses += 1;
            }
        }
        let max_age = self.cfg.max_age;
        self.tracks.retain(|t| t.misses <= max_age);
        for (j, d) in dets.iter().enumerate() {
            if !det_used[j] {
                self.tracks.push(BaselineTrack {
                    id: self.next_id,
                    bbox: d.bbox,
                    misses: 0,
                });
                out.push((self.next_id, d.bbox));
                self.next_id += 1;
            }
        }
        out.sort_by_key(|o| o.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(u: f64) -> Detection {
        Detection::new(BBox::new(u, 50.0, 20.0, 40.0).unwrap(), 0.9)
    }

    #[test]
    fn follows_overlapping_detections() {
        let mut t = IouTracker::new(BaselineConfig::default());
        assert_eq!(t.step(&[det(10.0)])[0].0, 1);
        assert_eq!(t.step(&[det(14.0)])[0].0, 1);
    }

    #[test]
    fn loses_fast_movers_after_a_gap() {
        let mut t = IouTracker::new(BaselineConfig::default());
        t.step(&[det(10.0)]);
        t.step(&[]);
        assert_eq!(t.step(&[det(40.0)])[0].0, 2);
    }

    #[test]
    fn expires_after_max_age() {
        let cfg = BaselineConfig {
            max_age: 2,
            ..Default::default()
        };
        let mut t = IouTracker::new(cfg);
        t.step(&[det(10.0)]);
        t.step(&[]);
        t.step(&[]);
        assert_eq!(t.step(&[det(10.0)])[0].0, 1);
        for _ in 0..3 {
            t.step(&[]);
        }
        assert_eq!(t.step(&[det(10.0)])[0].0, 2);
    }

    #[test]
    fn low_confidence_is_ignored() {
        let mut t = IouTracker::new(BaselineConfig::default());
        assert!(t.step(&[Detection::new(det(0.0).bbox, 0.2)]).is_empty());
    }
}
