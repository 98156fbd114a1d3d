//! Synthetic scenes: piecewise-linear ground truth, noisy detections and
//! optional flat-shaded frames.
//!
//! Scenes are described in the same `key = value` text as tracker configs:
//!
//! ```text
//! n_frames = 60
//! width = 640
//! height = 480
//! noise = 1.5          # std. dev. of detection center noise, px
//! dropout = 0.15       # probability a visible target is missed
//! fp_rate = 0.5        # mean false positives per frame
//! seed = 7
//! frames = true        # also render PGM frames
//! size.1 = 30,60
//! waypoint.1 = 1,100,200
//! waypoint.1 = 60,540,260
//! occlusion.1 = 25,34
//! ```
//!
//! A target exists from its first to its last waypoint frame.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::appearance::GrayImage;
use crate::geometry::BBox;
use crate::motfile::{render_records, MotError, MotRecord};
use crate::pgm::{self, PgmError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Mot(#[from] MotError),
    #[error(transparent)]
    Pgm(#[from] PgmError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetPath {
    pub id: i64,
    pub w: f64,
    pub h: f64,
    /// `(frame, u, v)` sorted by frame.
    pub waypoints: Vec<(u32, f64, f64)>,
    /// Inclusive frame ranges with no detection for this target.
    pub occlusions: Vec<(u32, u32)>,
}

impl TargetPath {
    pub fn first_frame(&self) -> u32 {
        self.waypoints[0].0
    }

    pub fn last_frame(&self) -> u32 {
        self.waypoints[self.waypoints.len() - 1].0
    }

    /// Center at `frame`, or `None` outside the target's lifetime.
    pub fn position(&self, frame: u32) -> Option<(f64, f64)> {
        if frame < self.first_frame() || frame > self.last_frame() {
            return None;
        }
        let k = self.waypoints.partition_point(|w| w.0 <= frame);
        let a = self.waypoints[k - 1];
        if a.0 == frame || k == self.waypoints.len() {
            return Some((a.1, a.2));
        }
        let b = self.waypoints[k];
        let s = (frame - a.0) as f64 / (b.0 - a.0) as f64;
        Some((a.1 + s * (b.1 - a.1), a.2 + s * (b.2 - a.2)))
    }

    pub fn occluded(&self, frame: u32) -> bool {
        self.occlusions
            .iter()
            .any(|&(s, e)| (s..=e).contains(&frame))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub n_frames: u32,
    pub width: u32,
    pub height: u32,
    pub noise: f64,
    pub dropout: f64,
    pub fp_rate: f64,
    pub seed: u64,
    pub frames: bool,
    pub targets: Vec<TargetPath>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            n_frames: 100,
            width: 640,
            height: 480,
            noise: 0.0,
            dropout: 0.0,
            fp_rate: 0.0,
            seed: 0,
            frames: false,
            targets: Vec::new(),
        }
    }
}

/// Ground truth, detections and (optionally) frames of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gt: Vec<MotRecord>,
    pub detections: Vec<MotRecord>,
}

const DEFAULT_SIZE: (f64, f64) = (30.0, 60.0);

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut spec = ScenarioSpec::default();
        let mut targets: BTreeMap<i64, TargetPath> = BTreeMap::new();
        let mut declared: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |msg: String| ScenarioError::Syntax { line, msg };
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| syntax(format!("expected `key = value`, got {content:?}")))?;
            let nums = |n: usize| -> Result<Vec<f64>, ScenarioError> {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| syntax(format!("{key}: expected {n} comma-separated numbers")))?;
                if parts.len() != n || parts.iter().any(|x| !x.is_finite()) {
                    return Err(syntax(format!(
                        "{key}: expected {n} comma-separated numbers"
                    )));
                }
                Ok(parts)
            };
            let scalar = || nums(1).map(|v| v[0]);
            let whole = |x: f64| -> Result<u64, ScenarioError> {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(syntax(format!("{key}: expected a non-negative integer")))
                }
            };
            if let Some((kind, id)) = key.split_once('.') {
                let id: i64 = id
                    .trim()
                    .parse()
                    .map_err(|_| syntax(format!("bad target id in {key:?}")))?;
                if id < 1 {
                    return Err(syntax(format!("target ids start at 1, got {id}")));
                }
                let t = targets.entry(id).or_insert_with(|| TargetPath {
                    id,
                    w: DEFAULT_SIZE.0,
                    h: DEFAULT_SIZE.1,
                    waypoints: Vec::new(),
                    occlusions: Vec::new(),
                });
                match kind.trim() {
                    "waypoint" => {
                        let v = nums(3)?;
                        t.waypoints.push((whole(v[0])? as u32, v[1], v[2]));
                    }
                    "occlusion" => {
                        let v = nums(2)?;
                        t.occlusions
                            .push((whole(v[0])? as u32, whole(v[1])? as u32));
                    }
                    "size" => {
                        let v = nums(2)?;
                        (t.w, t.h) = (v[0], v[1]);
                    }
                    other => return Err(syntax(format!("unknown key {other:?}"))),
                }
                continue;
            }
            match key {
                "n_frames" => spec.n_frames = whole(scalar()?)? as u32,
                "width" => spec.width = whole(scalar()?)? as u32,
                "height" => spec.height = whole(scalar()?)? as u32,
                "noise" => spec.noise = scalar()?,
                "dropout" => spec.dropout = scalar()?,
                "fp_rate" => spec.fp_rate = scalar()?,
                "seed" => spec.seed = whole(scalar()?)?,
                "n_targets" => declared = Some(whole(scalar()?)? as usize),
                "frames" => {
                    spec.frames = match value {
                        "true" | "1" | "yes" | "on" => true,
                        "false" | "0" | "no" | "off" => false,
                        _ => {
                            return Err(syntax(format!(
                                "frames: expected a boolean, got {value:?}"
                            )))
                        }
                    }
                }
                other => return Err(syntax(format!("unknown key {other:?}"))),
            }
        }
        spec.targets = targets.into_values().collect();
        for t in spec.targets.iter_mut() {
            t.waypoints.sort_by_key(|w| w.0);
        }
        if let Some(n) = declared {
            if n != spec.targets.len() {
                return Err(ScenarioError::Invalid(format!(
                    "n_targets = {n} but {} targets have waypoints",
                    spec.targets.len()
                )));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.n_frames == 0 || self.width == 0 || self.height == 0 {
            return bad("n_frames, width and height must be positive".into());
        }
        if self.noise.is_nan() || self.noise < 0.0 {
            return bad(format!("noise must be non-negative, got {}", self.noise));
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return bad(format!("dropout must be in [0, 1], got {}", self.dropout));
        }
        if self.fp_rate.is_nan() || self.fp_rate < 0.0 {
            return bad(format!(
                "fp_rate must be non-negative, got {}",
                self.fp_rate
            ));
        }
        for t in &self.targets {
            if t.waypoints.is_empty() {
                return bad(format!("target {} has no waypoints", t.id));
            }
            if !(t.w > 0.0 && t.h > 0.0) {
                return bad(format!("target {} has non-positive size", t.id));
            }
            if t.waypoints.windows(2).any(|w| w[0].0 == w[1].0) {
                return bad(format!("target {} has two waypoints on one frame", t.id));
            }
            if t.first_frame() < 1 || t.last_frame() > self.n_frames {
                return bad(format!(
                    "target {} waypoints leave [1, {}]",
                    t.id, self.n_frames
                ));
            }
            for &(s, e) in &t.occlusions {
                if s < 1 || e > self.n_frames || s > e {
                    return bad(format!(
                        "target {} occlusion {s}-{e} outside [1, {}]",
                        t.id, self.n_frames
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal spec.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "n_frames = {}\nwidth = {}\nheight = {}\nnoise = {}\ndropout = {}\nfp_rate = {}\nseed = {}\nframes = {}\n",
            self.n_frames, self.width, self.height, self.noise, self.dropout, self.fp_rate, self.seed, self.frames
        );
        for t in &self.targets {
            s += &format!("size.{} = {},{}\n", t.id, t.w, t.h);
            for (f, u, v) in &t.waypoints {
                s += &format!("waypoint.{} = {f},{u},{v}\n", t.id);
            }
            for (a, b) in &t.occlusions {
                s += &format!("occlusion.{} = {a},{b}\n", t.id);
            }
        }
        s
    }

    /// Ground-truth box of every live target at `frame`, ordered by id.
    pub fn gt_boxes(&self, frame: u32) -> Vec<(i64, BBox)> {
        self.targets
            .iter()
            .filter_map(|t| {
                let (u, v) = t.position(frame)?;
                Some((t.id, BBox::new(u, v, t.w, t.h).expect("validated size")))
            })
            .collect()
    }

    /// Deterministic: the same scenario always yields the same records.
    pub fn generate(&self) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let center_noise = Normal::new(0.0, self.noise.max(0.0)).expect("finite noise");
        let fp_count =
            (self.fp_rate > 0.0).then(|| Poisson::new(self.fp_rate).expect("positive rate"));
        let mut gt = Vec::new();
        let mut dets = Vec::new();
        for frame in 1..=self.n_frames {
            for (id, b) in self.gt_boxes(frame) {
                gt.push(MotRecord {
                    frame,
                    id,
                    bbox: b,
                    conf: 1.0,
                    extra: [1.0, -1.0, -1.0],
                });
                let target = self
                    .targets
                    .iter()
                    .find(|t| t.id == id)
                    .expect("live target");
                // draw every random number regardless of outcome so one
                // target's occlusion does not shift the others' noise
                let missed = rng.random::<f64>() < self.dropout;
                let (du, dv) = (center_noise.sample(&mut rng), center_noise.sample(&mut rng));
                if target.occluded(frame) || missed {
                    continue;
                }
                let noisy = b.with_center(b.u + du, b.v + dv);
                let conf = if self.noise == 0.0 {
                    1.0
                } else {
                    (1.0 - du.hypot(dv) / b.diag()).max(0.5)
                };
                dets.push(MotRecord {
                    frame,
                    id: -1,
                    bbox: noisy,
                    conf,
                    extra: [-1.0; 3],
                });
            }
            if let Some(p) = &fp_count {
                let n = p.sample(&mut rng) as usize;
                for _ in 0..n {
                    let (w, h) = match self.targets.len() {
                        0 => DEFAULT_SIZE,
                        k => {
                            let t = &self.targets[rng.random_range(0..k)];
                            (t.w, t.h)
                        }
                    };
                    let u = rng.random_range(0.0..self.width as f64);
                    let v = rng.random_range(0.0..self.height as f64);
                    let conf = rng.random_range(0.3..=1.0);
                    dets.push(MotRecord {
                        frame,
                        id: -1,
                        bbox: BBox::new(u, v, w, h).expect("positive size"),
                        conf,
                        extra: [-1.0; 3],
                    });
                }
            }
        }
        Scenario {
            gt,
            detections: dets,
        }
    }

    /// Flat background with one filled rectangle per visible target;
    /// occluded targets are not drawn.
    pub fn render_frame(&self, frame: u32) -> GrayImage {
        let mut img = GrayImage::filled(self.width as usize, self.height as usize, 40);
        let n = self.targets.len().max(1) as f64;
        for (k, t) in self.targets.iter().enumerate() {
            if t.occluded(frame) {
                continue;
            }
            let Some((u, v)) = t.position(frame) else {
                continue;
            };
            let shade = (90.0 + 160.0 * k as f64 / n).round() as u8;
            let b = BBox::new(u, v, t.w, t.h).expect("validated size");
            let x0 = b.left().round().max(0.0) as usize;
            let y0 = b.top().round().max(0.0) as usize;
            let x1 = (b.right().round().max(0.0) as usize).min(self.width as usize);
            let y1 = (b.bottom().round().max(0.0) as usize).min(self.height as usize);
            for y in y0..y1 {
                for x in x0..x1 {
                    img.set(x, y, shade);
                }
            }
        }
        img
    }

    /// Writes `gt.txt`, `det.txt` and, when enabled, `frames/%06d.pgm`.
    pub fn write(&self, out_dir: &Path) -> Result<Scenario, ScenarioError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ScenarioError::Io { path, source }
        };
        std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
        let sc = self.generate();
        crate::motfile::write_text(&out_dir.join("gt.txt"), &render_records(&sc.gt))?;
        crate::motfile::write_text(&out_dir.join("det.txt"), &render_records(&sc.detections))?;
        if self.frames {
            let dir = out_dir.join("frames");
            std::fs::create_dir_all(&dir).map_err(io(&dir))?;
            for f in 1..=self.n_frames {
                pgm::write(&pgm::frame_path(&dir, f), &self.render_frame(f))?;
            }
        }
        Ok(sc)
    }
}

/// One scene of the identity-preservation suite: two targets crossing while
/// one of them is hidden for ten frames, and three targets walking side by
/// side, with 15% detection dropout. Geometry is jittered by the seed.
pub fn crossing_suite(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ seed);
    let mut j = |r: f64| rng.random_range(-r..=r);
    let n_frames = 60;
    let (y1, y2) = (200.0 + j(10.0), 200.0 + j(10.0));
    let cross = TargetPath {
        id: 1,
        w: 30.0,
        h: 60.0,
        waypoints: vec![
            (1, 100.0 + j(10.0), y1),
            (n_frames, 540.0 + j(10.0), y2 + 60.0),
        ],
        occlusions: vec![],
    };
    let other = TargetPath {
        id: 2,
        w: 30.0,
        h: 60.0,
        waypoints: vec![
            (1, 540.0 + j(10.0), y2),
            (n_frames, 100.0 + j(10.0), y1 + 60.0),
        ],
        occlusions: vec![(25, 34)],
    };
    let speed = 5.0 + j(1.0);
    let lane = 380.0 + j(10.0);
    let start = 110.0 + j(10.0);
    let parallel = (0..3).map(|k| TargetPath {
        id: 3 + k as i64,
        w: 30.0,
        h: 60.0,
        waypoints: vec![
            (1, start + 45.0 * k as f64, lane),
            (
                n_frames,
                start + 45.0 * k as f64 + speed * (n_frames - 1) as f64,
                lane,
            ),
        ],
        occlusions: vec![],
    });
    ScenarioSpec {
        n_frames,
        width: 640,
        height: 480,
        noise: 1.0,
        dropout: 0.15,
        fp_rate: 0.0,
        seed,
        frames: false,
        targets: [cross, other].into_iter().chain(parallel).collect(),
    }
}

/// `n` targets on random multi-segment paths covering the whole sequence.
pub fn crowd(n: usize, n_frames: u32, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (width, height) = (1920u32, 1080u32);
    let targets = (0..n)
        .map(|k| {
            let w = rng.random_range(20.0..40.0);
            let h = 2.5 * w;
            let legs = 4u32;
            let waypoints = (0..=legs)
                .map(|s| {
                    let f = 1 + (n_frames - 1) * s / legs;
                    let u = rng.random_range(w..width as f64 - w);
                    let v = rng.random_range(h..height as f64 - h);
                    (f, u, v)
                })
                .collect();
            TargetPath {
                id: k as i64 + 1,
                w,
                h,
                waypoints,
                occlusions: vec![],
            }
        })
        .collect();
    ScenarioSpec {
        n_frames,
        width,
        height,
        noise: 1.0,
        dropout: 0.05,
        fp_rate: 0.2,
        seed,
        frames: false,
        targets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "n_frames = 40\nwidth = 200\nheight = 100\nseed = 3\n\
        size.1 = 10,20\nwaypoint.1 = 1,20,50\nwaypoint.1 = 21,60,50 # halfway\nwaypoint.1 = 40,60,88\n\
        waypoint.2 = 5,150,50\nwaypoint.2 = 30,100,50\nocclusion.2 = 20,30\n";

    #[test]
    fn parse_and_round_trip() {
        let s = ScenarioSpec::parse(TEXT).unwrap();
        assert_eq!(s.targets.len(), 2);
        assert_eq!(s.targets[0].waypoints.len(), 3);
        assert_eq!((s.targets[1].w, s.targets[1].h), DEFAULT_SIZE);
        assert_eq!(ScenarioSpec::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn interpolation() {
        let s = ScenarioSpec::parse(TEXT).unwrap();
        let t = &s.targets[0];
        assert_eq!(t.position(1), Some((20.0, 50.0)));
        assert_eq!(t.position(11), Some((40.0, 50.0)));
        assert_eq!(t.position(21), Some((60.0, 50.0)));
        assert_eq!(t.position(40), Some((60.0, 88.0)));
        assert_eq!(s.targets[1].position(4), None);
        assert_eq!(s.targets[1].position(31), None);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            ScenarioSpec::parse("speed = 3"),
            Err(ScenarioError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ScenarioSpec::parse("n_frames = 10\nwaypoint.1 = 1,0,0\nocclusion.1 = 5,11"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            ScenarioSpec::parse("n_frames = 10\nwaypoint.1 = 12,0,0"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            ScenarioSpec::parse("n_targets = 2\nwaypoint.1 = 1,0,0"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            ScenarioSpec::parse("waypoint.1 = 1,0"),
            Err(ScenarioError::Syntax { .. })
        ));
    }

    #[test]
    fn noiseless_detections_equal_ground_truth() {
        let s = ScenarioSpec::parse("n_frames = 40\nwaypoint.1 = 1,20,50\nwaypoint.1 = 40,60,88\nwaypoint.2 = 5,150,50\nwaypoint.2 = 30,100,50\n").unwrap();
        let sc = s.generate();
        assert_eq!(sc.gt.len(), sc.detections.len());
        for (g, d) in sc.gt.iter().zip(&sc.detections) {
            assert_eq!((g.frame, g.bbox), (d.frame, d.bbox));
            assert_eq!(d.conf, 1.0);
        }
    }

    #[test]
    fn occlusion_removes_exactly_its_window() {
        let s = ScenarioSpec::parse(
            "n_frames = 40\nwaypoint.1 = 1,20,50\nwaypoint.1 = 40,20,50\nwaypoint.2 = 1,150,50\nwaypoint.2 = 40,150,50\nocclusion.2 = 20,30\n",
        )
        .unwrap();
        let sc = s.generate();
        for f in 1..=40u32 {
            let target2 = sc
                .detections
                .iter()
                .filter(|d| d.frame == f && d.bbox.u > 100.0)
                .count();
            assert_eq!(
                target2,
                if (20..=30).contains(&f) { 0 } else { 1 },
                "frame {f}"
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let mut s = ScenarioSpec::parse(TEXT).unwrap();
        s.noise = 2.0;
        s.dropout = 0.2;
        s.fp_rate = 1.5;
        assert_eq!(s.generate(), s.generate());
        let a = render_records(&s.generate().detections);
        s.seed += 1;
        assert_ne!(a, render_records(&s.generate().detections));
    }

    #[test]
    fn suite_scenes_are_valid() {
        for seed in 0..20 {
            let s = crossing_suite(seed);
            s.validate().unwrap();
            assert_eq!(s.targets.len(), 5);
        }
        crowd(30, 100, 1).validate().unwrap();
    }

    #[test]
    fn frames_draw_visible_targets() {
        let s = ScenarioSpec::parse(TEXT).unwrap();
        let img = s.render_frame(25);
        let t1 = s.targets[0].position(25).unwrap();
        assert_ne!(img.get(t1.0 as usize, t1.1 as usize), 40);
        // target 2 is occluded on frame 25
        let t2 = s.targets[1].position(25).unwrap();
        assert_eq!(img.get(t2.0 as usize, t2.1 as usize), 40);
    }
}
