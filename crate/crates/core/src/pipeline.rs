//! Frame-by-frame tracker.
//!
//! [`Tracker::step`] runs one frame: particle sampling and swarm refinement
//! for every live track, association against the frame's detections, state
//! updates for matched, unmatched and newly born tracks, appearance refresh,
//! trend-velocity regression and expiry.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::appearance::{extract_hog, GrayImage};
use crate::association::{build_cost_matrix, classify, solve_assignment};
use crate::config::{ConfigError, TrackerConfig};
use crate::geometry::{BBox, Detection};
use crate::lifecycle::{
    create_track, penalty_age_update, prune, trend_velocity_timed, update_strong, update_weak,
    GlobalBest, SlopeWindow, Track, TrackStatus,
};
use crate::particles::{resample, sample_particles, MotionBounds};
use crate::rng::KeyedRng;
use crate::swarm::{neighbours, optimize, SwarmResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("frame {got} is not after frame {last}")]
    OutOfOrderFrame { last: u32, got: u32 },
    #[error("detection {index} is malformed: {reason}")]
    MalformedDetection { index: usize, reason: String },
}

/// Everything the tracker sees for one frame.
#[derive(Debug, Clone, Default)]
pub struct FrameInput {
    pub frame_index: u32,
    pub detections: Vec<Detection>,
    pub image: Option<GrayImage>,
}

impl FrameInput {
    pub fn new(frame_index: u32, detections: Vec<Detection>) -> Self {
        Self {
            frame_index,
            detections,
            image: None,
        }
    }

    pub fn with_image(mut self, image: GrayImage) -> Self {
        self.image = Some(image);
        self
    }
}

/// One live track as reported after a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOutput {
    pub id: u64,
    pub bbox: BBox,
    pub status: TrackStatus,
    pub penalty: f64,
    pub age: f64,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    rng: KeyedRng,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, ConfigError> {
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(Self {
            rng: KeyedRng::new(cfg.seed),
            cfg,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Drops all tracks and restarts id issuance and frame ordering.
    pub fn reset(&mut self) {
        self.tracks.clear();
        self.next_id = 1;
        self.last_frame = None;
    }

    /// Runs frames `1..=last_frame` frameless, with empty detection lists
    /// for frames absent from `dets`.
    pub fn run_detections(
        &mut self,
        dets: &BTreeMap<u32, Vec<Detection>>,
        last_frame: u32,
    ) -> Result<Vec<(u32, Vec<TrackOutput>)>, StepError> {
        (1..=last_frame)
            .map(|f| {
                let input = FrameInput::new(f, dets.get(&f).cloned().unwrap_or_default());
                Ok((f, self.step(&input)?))
            })
            .collect()
    }

    pub fn step(&mut self, input: &FrameInput) -> Result<Vec<TrackOutput>, StepError> {
        if let Some(last) = self.last_frame {
            if input.frame_index <= last {
                return Err(StepError::OutOfOrderFrame {
                    last,
                    got: input.frame_index,
                });
            }
        }
        validate_detections(&input.detections)?;
        self.last_frame = Some(input.frame_index);

        let cfg = &self.cfg;
        let frame = input.frame_index as u64;
        let image = if cfg.frameless {
            None
        } else {
            input.image.as_ref()
        };
        let dets = &input.detections;

        for t in self.tracks.iter_mut() {
            t.prev_state = t.state;
        }

        // neighbour lists come from frame-start states
        let snapshot = &self.tracks;
        let swarms: Vec<SwarmResult> = snapshot
            .par_iter()
            .map(|t| {
                let nbrs = neighbours(t, snapshot, cfg.radius_scale);
                let particles =
                    sample_particles(t, cfg, &self.rng, frame).expect("validated particle count");
                let mut res = optimize(t, particles, image, nbrs, cfg, &self.rng, frame);
                let bounds = MotionBounds::for_box(&t.state, cfg);
                let gbest = res.gbest_particle();
                res.particles = resample(
                    std::mem::take(&mut res.particles),
                    &gbest,
                    cfg,
                    &bounds,
                    &self.rng,
                    frame,
                    t.id,
                );
                res
            })
            .collect();
        for (t, s) in self.tracks.iter_mut().zip(&swarms) {
            t.particles = s.particles.clone();
            t.gbest = Some(GlobalBest {
                state: s.gbest_state,
                vel: s.gbest_vel,
                fitness: s.gbest_fitness,
            });
        }

        let costs = build_cost_matrix(&self.tracks, dets, cfg);
        let assigned = solve_assignment(&costs, cfg.gate);
        let ids: Vec<u64> = self.tracks.iter().map(|t| t.id).collect();
        let classes = classify(&assigned, &ids, dets, cfg.conf_new);

        let mut matched = vec![None; self.tracks.len()];
        for &(row, col) in &assigned.matches {
            matched[row] = Some(col);
        }
        for (t, m) in self.tracks.iter_mut().zip(&matched) {
            if let Some(col) = m {
                update_strong(t, &dets[*col], input.frame_index, cfg);
            }
        }
        let strong: Vec<Track> = self
            .tracks
            .iter()
            .zip(&matched)
            .filter(|(_, m)| m.is_some())
            .map(|(t, _)| t.clone())
            .collect();

        self.tracks
            .par_iter_mut()
            .zip(swarms.par_iter())
            .zip(matched.par_iter())
            .filter(|(_, m)| m.is_none())
            .for_each(|((t, s), _)| {
                t.misses += 1;
                let trusted = update_weak(t, s, &strong, cfg);
                let [u, v] = t.state.center();
                penalty_age_update(
                    t,
                    s.gbest_history_fitness,
                    trusted,
                    cfg.entrance_delta(u, v),
                    cfg,
                );
                if cfg.weak_history {
                    let b = t.state;
                    t.push_history(input.frame_index, b);
                }
            });

        for &col in &classes.births {
            let t = create_track(&dets[col], self.next_id, input.frame_index, cfg.history);
            self.next_id += 1;
            self.tracks.push(t);
        }

        if let Some(img) = image {
            self.tracks
                .par_iter_mut()
                .filter(|t| t.status != TrackStatus::Weak)
                .for_each(|t| t.appearance = extract_hog(img, &t.state, &cfg.hog).ok());
        }

        let win = SlopeWindow::from_config(cfg);
        for t in self.tracks.iter_mut() {
            t.vel = trend_velocity_timed(&t.history, &win);
        }

        self.tracks = prune(std::mem::take(&mut self.tracks), cfg.age_max);
        self.tracks.sort_by_key(|t| t.id);
        Ok(self
            .tracks
            .iter()
            .map(|t| TrackOutput {
                id: t.id,
                bbox: t.state,
                status: t.status,
                penalty: t.penalty,
                age: t.age,
            })
            .collect())
    }
}

fn validate_detections(dets: &[Detection]) -> Result<(), StepError> {
    for (index, d) in dets.iter().enumerate() {
        let b = &d.bbox;
        let reason = if ![b.u, b.v, b.w, b.h, d.conf].iter().all(|x| x.is_finite()) {
            Some("non-finite value".to_string())
        } else if b.w <= 0.0 || b.h <= 0.0 {
            Some(format!("non-positive size {}x{}", b.w, b.h))
        } else if !(0.0..=1.0).contains(&d.conf) {
            Some(format!("confidence {} outside [0, 1]", d.conf))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(StepError::MalformedDetection { index, reason });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(u: f64, v: f64, w: f64, h: f64, conf: f64) -> Detection {
        Detection::new(BBox::new(u, v, w, h).unwrap(), conf)
    }

    #[test]
    fn empty_first_frame() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        assert!(t.step(&FrameInput::new(1, vec![])).unwrap().is_empty());
    }

    #[test]
    fn first_detection_creates_track_one() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let out = t
            .step(&FrameInput::new(1, vec![det(10.0, 10.0, 5.0, 5.0, 0.9)]))
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].id, out[0].penalty, out[0].age), (1, 0.0, 0.0));
        assert_eq!(out[0].status, TrackStatus::New);
    }

    #[test]
    fn low_confidence_detection_is_ignored() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        assert!(t
            .step(&FrameInput::new(1, vec![det(10.0, 10.0, 5.0, 5.0, 0.4)]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_frame_fixture_keeps_id() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let a = t
            .step(&FrameInput::new(
                1,
                vec![det(100.0, 100.0, 20.0, 40.0, 0.9)],
            ))
            .unwrap();
        let b = t
            .step(&FrameInput::new(
                2,
                vec![det(104.0, 100.0, 20.0, 40.0, 0.9)],
            ))
            .unwrap();
        assert_eq!(a[0].id, b[0].id);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].bbox.center(), [104.0, 100.0]);
        assert_eq!(b[0].status, TrackStatus::Strong);
    }

    #[test]
    fn births_get_consecutive_ids() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let out = t
            .step(&FrameInput::new(
                1,
                vec![
                    det(10.0, 10.0, 5.0, 5.0, 0.9),
                    det(100.0, 10.0, 5.0, 5.0, 0.9),
                ],
            ))
            .unwrap();
        assert_eq!(out.iter().map(|o| o.id).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn out_of_order_frames_are_rejected() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        t.step(&FrameInput::new(5, vec![])).unwrap();
        assert_eq!(
            t.step(&FrameInput::new(5, vec![])),
            Err(StepError::OutOfOrderFrame { last: 5, got: 5 })
        );
        t.reset();
        assert!(t.step(&FrameInput::new(1, vec![])).is_ok());
    }

    #[test]
    fn malformed_detection_is_identified() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let mut bad = det(10.0, 10.0, 5.0, 5.0, 0.9);
        bad.conf = 1.5;
        let err = t
            .step(&FrameInput::new(1, vec![det(0.0, 0.0, 1.0, 1.0, 0.9), bad]))
            .unwrap_err();
        assert!(matches!(
            err,
            StepError::MalformedDetection { index: 1, .. }
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = TrackerConfig {
            window: 0,
            ..Default::default()
        };
        assert!(matches!(Tracker::new(cfg), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn appearance_template_refreshes_only_on_match() {
        let img = |shade: u8| GrayImage::filled(200, 200, shade);
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        let d = det(100.0, 100.0, 20.0, 40.0, 0.9);
        t.step(&FrameInput::new(1, vec![d]).with_image(img(50)))
            .unwrap();
        let born = t.tracks()[0].appearance.clone();
        assert!(born.is_some());
        t.step(&FrameInput::new(2, vec![]).with_image(img(200)))
            .unwrap();
        assert_eq!(t.tracks()[0].status, TrackStatus::Weak);
        assert_eq!(t.tracks()[0].appearance, born);
        t.step(&FrameInput::new(3, vec![]).with_image(img(10)))
            .unwrap();
        t.step(&FrameInput::new(4, vec![d])).unwrap();
        assert_eq!(t.tracks()[0].status, TrackStatus::Strong);
        assert_eq!(t.tracks()[0].appearance, born, "no frame, no refresh");
    }

    #[test]
    fn unmatched_track_expires_and_id_is_not_reused() {
        let mut t = Tracker::new(TrackerConfig::default()).unwrap();
        t.step(&FrameInput::new(1, vec![det(50.0, 50.0, 10.0, 10.0, 0.9)]))
            .unwrap();
        let mut gone_at = None;
        for f in 2..200 {
            let out = t.step(&FrameInput::new(f, vec![])).unwrap();
            if out.is_empty() {
                gone_at = Some(f);
                break;
            }
            assert_eq!(out[0].status, TrackStatus::Weak);
        }
        assert!(gone_at.is_some());
        let out = t
            .step(&FrameInput::new(
                300,
                vec![det(50.0, 50.0, 10.0, 10.0, 0.9)],
            ))
            .unwrap();
        assert_eq!(out[0].id, 2);
    }
}
