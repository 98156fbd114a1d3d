//! Track state, lifecycle updates and trend velocity.
//!
//! Matched tracks follow their detection (smoothed on large jumps). Unmatched
//! tracks coast on their own trend velocity, shift with co-moving strong
//! neighbours, or steer away from diverging ones, while a penalty and an age
//! grow with the miss count until the track expires.

use std::collections::VecDeque;

use crate::appearance::FeatureVec;
use crate::config::TrackerConfig;
use crate::geometry::{
    center_distance, componentwise_median, median_in_place, BBox, Detection, Velocity4,
};
use crate::particles::Particle;
use crate::swarm::SwarmResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackStatus {
    Strong,
    Weak,
    New,
}

impl TrackStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackStatus::Strong => "strong",
            TrackStatus::Weak => "weak",
            TrackStatus::New => "new",
        }
    }
}

/// Best swarm particle of the latest frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalBest {
    pub state: BBox,
    pub vel: Velocity4,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: BBox,
    /// State at the start of the current frame.
    pub prev_state: BBox,
    pub vel: Velocity4,
    pub penalty: f64,
    pub age: f64,
    pub status: TrackStatus,
    /// Consecutive frames without a match.
    pub misses: u32,
    /// Recent states stamped with the frame they belong to, oldest first.
    pub history: VecDeque<(u32, BBox)>,
    pub history_cap: usize,
    pub particles: Vec<Particle>,
    pub gbest: Option<GlobalBest>,
    /// Descriptor of `state` taken from the last frame in which the track
    /// was matched or born. Coasting leaves it untouched.
    pub appearance: Option<FeatureVec>,
}

impl Track {
    pub fn push_history(&mut self, frame: u32, b: BBox) {
        self.history.push_back((frame, b));
        while self.history.len() > self.history_cap.max(1) {
            self.history.pop_front();
        }
    }
}

/// New track on a detection: zero velocity, penalty and age, status `New`.
pub fn create_track(det: &Detection, id: u64, frame: u32, history_cap: usize) -> Track {
    let mut history = VecDeque::with_capacity(history_cap.max(1));
    history.push_back((frame, det.bbox));
    Track {
        id,
        state: det.bbox,
        prev_state: det.bbox,
        vel: Velocity4::ZERO,
        penalty: 0.0,
        age: 0.0,
        status: TrackStatus::New,
        misses: 0,
        history,
        history_cap,
        particles: Vec::new(),
        gbest: None,
        appearance: None,
    }
}

/// Matched update. Jumps of at least `gamma_o * diag` land halfway between
/// the old state and the detection; smaller ones snap to the detection.
pub fn update_strong(track: &mut Track, det: &Detection, frame: u32, cfg: &TrackerConfig) {
    let d_o = cfg.gamma_o * track.state.diag();
    let next = if center_distance(&track.state, &det.bbox) >= d_o {
        let a = track.state.as_array();
        let b = det.bbox.as_array();
        BBox::from_array_clamped(
            std::array::from_fn(|d| 0.5 * (a[d] + b[d])),
            f64::MIN_POSITIVE,
        )
    } else {
        det.bbox
    };
    track.state = next;
    track.penalty = 0.0;
    track.age = 0.0;
    track.misses = 0;
    track.status = TrackStatus::Strong;
    track.push_history(frame, next);
}

/// Sign with `sign(0) = 0`.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Penalty/age change for an unmatched track whose miss count has already
/// been incremented. Returns the signed increment applied to the penalty.
pub fn penalty_age_update(
    track: &mut Track,
    gbest_fitness: f64,
    has_strong_neighbour: bool,
    delta_e: f64,
    cfg: &TrackerConfig,
) -> f64 {
    let l = track.misses as f64;
    let sigma = cfg.miss_sigma();
    let ramp = 1.0 - (-(l * l) / (2.0 * sigma * sigma)).exp();
    let delta = ramp * (1.0 - gbest_fitness + delta_e);
    let zeta = if has_strong_neighbour {
        sign(cfg.rho_re - gbest_fitness + delta_e)
    } else {
        1.0
    };
    let step = zeta * delta;
    track.penalty = (track.penalty + step).clamp(0.0, 1.0);
    track.age = (track.age + step * cfg.age_max).clamp(0.0, cfg.age_max);
    step
}

/// History length, frame window and slope threshold scale for
/// [`trend_velocity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeWindow {
    pub h: usize,
    pub f: usize,
    pub tau_scale: f64,
}

impl SlopeWindow {
    pub fn from_config(cfg: &TrackerConfig) -> Self {
        Self {
            h: cfg.history,
            f: cfg.window,
            tau_scale: cfg.tau_scale,
        }
    }

    /// Per-component slope limits for a box: diagonal-based for the center,
    /// width/height-based for the size.
    pub fn thresholds(&self, b: &BBox) -> [f64; 4] {
        let d = b.diag();
        [d, d, b.w, b.h].map(|x| self.tau_scale * x)
    }
}

/// Robust per-component velocity: the median of all pairwise slopes
/// `(x_j - x_i) / (j - i)` with `j - i <= F` over the latest `H` states,
/// ignoring slopes above the size-based threshold of the newest state.
/// States are taken to be one frame apart.
pub fn trend_velocity(history: &VecDeque<BBox>, win: &SlopeWindow) -> Velocity4 {
    let n = history.len().min(win.h);
    let start = history.len() - n;
    let recent: Vec<(f64, [f64; 4])> = history
        .iter()
        .skip(start)
        .enumerate()
        .map(|(i, b)| (i as f64, b.as_array()))
        .collect();
    median_slopes(&recent, win)
}

/// [`trend_velocity`] over frame-stamped states. Slopes divide by the
/// frame gap and the window `F` counts frames, so states missing from the
/// history do not inflate the estimate.
pub fn trend_velocity_timed(history: &VecDeque<(u32, BBox)>, win: &SlopeWindow) -> Velocity4 {
    let n = history.len().min(win.h);
    let start = history.len() - n;
    let recent: Vec<(f64, [f64; 4])> = history
        .iter()
        .skip(start)
        .map(|(f, b)| (*f as f64, b.as_array()))
        .collect();
    median_slopes(&recent, win)
}

fn median_slopes(recent: &[(f64, [f64; 4])], win: &SlopeWindow) -> Velocity4 {
    let n = recent.len();
    if n < 2 {
        return Velocity4::ZERO;
    }
    let newest = recent[n - 1].1;
    let tau = win.thresholds(&BBox::from_array_clamped(newest, f64::MIN_POSITIVE));
    let f = win.f as f64;
    let mut out = [0.0; 4];
    let mut slopes = Vec::with_capacity(n * win.f);
    for d in 0..4 {
        slopes.clear();
        for i in 0..n {
            for j in (i + 1)..n {
                let dt = recent[j].0 - recent[i].0;
                if dt <= 0.0 || dt > f {
                    continue;
                }
                let s = (recent[j].1[d] - recent[i].1[d]) / dt;
                if s.abs() <= tau[d] {
                    slopes.push(s);
                }
            }
        }
        out[d] = median_in_place(&mut slopes);
    }
    Velocity4::from_array(out)
}

/// Unmatched update of the center; width and height stay fixed.
///
/// `strong` holds this frame's matched tracks after their own update. Only
/// those are trusted as neighbours. Returns whether any trusted neighbour
/// was found.
pub fn update_weak(
    track: &mut Track,
    swarm: &SwarmResult,
    strong: &[Track],
    cfg: &TrackerConfig,
) -> bool {
    let mut trusted: Vec<&Track> = swarm
        .neighbours
        .iter()
        .filter_map(|n| strong.iter().find(|t| t.id == n.id))
        .collect();
    if trusted.is_empty() {
        let radius = cfg.expanded_radius_scale * track.state.diag();
        trusted = strong
            .iter()
            .filter(|t| t.id != track.id && center_distance(&t.prev_state, &track.state) <= radius)
            .collect();
        trusted.sort_by_key(|t| t.id);
    }

    let prev = track.state;
    let tau_v = cfg.tau_v_scale * prev.diag();
    let own = track.vel;
    let own_speed = own.center_speed();

    let center = if trusted.is_empty() {
        coast(&prev, &own, tau_v)
    } else {
        let now = componentwise_median(
            &trusted
                .iter()
                .map(|t| t.state.as_array())
                .collect::<Vec<_>>(),
        );
        let before = componentwise_median(
            &trusted
                .iter()
                .map(|t| t.prev_state.as_array())
                .collect::<Vec<_>>(),
        );
        let vb =
            componentwise_median(&trusted.iter().map(|t| t.vel.as_array()).collect::<Vec<_>>());
        let vb_speed = vb[0].hypot(vb[1]);
        if vb_speed < tau_v {
            coast(&prev, &own, tau_v)
        } else {
            let delta = if own_speed > 0.0 {
                (own.du * vb[0] + own.dv * vb[1]) / (own_speed * vb_speed)
            } else {
                0.0
            };
            if delta >= cfg.delta_d {
                [prev.u + now[0] - before[0], prev.v + now[1] - before[1]]
            } else {
                let push = repulsion(&prev, &own, [now[0], now[1]], [vb[0], vb[1]], cfg.eps_s);
                let xo = [prev.u + own.du + push[0], prev.v + own.dv + push[1]];
                let g = swarm.gbest_state;
                [
                    (1.0 - cfg.sigma_g) * xo[0] + cfg.sigma_g * g.u,
                    (1.0 - cfg.sigma_g) * xo[1] + cfg.sigma_g * g.v,
                ]
            }
        }
    };
    track.state = prev.with_center(center[0], center[1]);
    track.status = TrackStatus::Weak;
    !trusted.is_empty()
}

fn coast(prev: &BBox, own: &Velocity4, tau_v: f64) -> [f64; 2] {
    if own.center_speed() >= tau_v && own.center_speed() > 0.0 {
        [prev.u + own.du, prev.v + own.dv]
    } else {
        [prev.u, prev.v]
    }
}

/// Sideways push away from the neighbour median: perpendicular to the
/// offset from the median center, oriented against the median velocity,
/// with magnitude `eps_s * |v| / |offset| * diag`. Zero for a zero offset.
pub fn repulsion(
    prev: &BBox,
    own: &Velocity4,
    median_center: [f64; 2],
    median_vel: [f64; 2],
    eps_s: f64,
) -> [f64; 2] {
    let dx = [prev.u - median_center[0], prev.v - median_center[1]];
    let dist = dx[0].hypot(dx[1]);
    if dist == 0.0 {
        return [0.0, 0.0];
    }
    let mut n = [-dx[1] / dist, dx[0] / dist];
    if n[0] * median_vel[0] + n[1] * median_vel[1] > 0.0 {
        n = [-n[0], -n[1]];
    }
    let eps_o = eps_s * own.center_speed() / dist * prev.diag();
    [eps_o * n[0], eps_o * n[1]]
}

/// Keeps tracks whose age is below `age_max`.
pub fn prune(tracks: Vec<Track>, age_max: f64) -> Vec<Track> {
    tracks.into_iter().filter(|t| t.age < age_max).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::Neighbour;
    use proptest::prelude::*;

    fn bx(u: f64, v: f64, w: f64, h: f64) -> BBox {
        BBox::new(u, v, w, h).unwrap()
    }

    fn track(id: u64, b: BBox) -> Track {
        create_track(&Detection::new(b, 1.0), id, 1, 10)
    }

    fn swarm_for(gbest: BBox, neighbours: Vec<Neighbour>) -> SwarmResult {
        SwarmResult {
            particles: vec![Particle::new(gbest, Velocity4::ZERO)],
            gbest_state: gbest,
            gbest_vel: Velocity4::ZERO,
            gbest_fitness: 0.5,
            gbest_history_fitness: 0.5,
            neighbours,
        }
    }

    fn neighbour_of(t: &Track) -> Neighbour {
        Neighbour {
            id: t.id,
            state: t.prev_state,
            vel: t.vel,
            status: TrackStatus::Strong,
        }
    }

    #[test]
    fn create_track_starts_clean() {
        let t = create_track(&Detection::new(bx(5.0, 6.0, 2.0, 3.0), 0.95), 7, 1, 10);
        assert_eq!(t.id, 7);
        assert_eq!(t.vel, Velocity4::ZERO);
        assert_eq!((t.penalty, t.age, t.misses), (0.0, 0.0, 0));
        assert_eq!(t.status, TrackStatus::New);
        assert_eq!(t.history.len(), 1);
    }

    #[test]
    fn strong_update_snaps_or_halves() {
        let cfg = TrackerConfig::default();
        // diag of 120x160 is 200, so d_o = 50
        let mut t = track(1, bx(0.0, 0.0, 120.0, 160.0));
        t.penalty = 0.7;
        t.age = 3.0;
        t.misses = 2;
        let near = Detection::new(bx(10.0, 0.0, 120.0, 160.0), 0.9);
        update_strong(&mut t, &near, 2, &cfg);
        assert_eq!(t.state, near.bbox);
        assert_eq!(
            (t.penalty, t.age, t.misses, t.status),
            (0.0, 0.0, 0, TrackStatus::Strong)
        );

        let mut t = track(1, bx(0.0, 0.0, 120.0, 160.0));
        update_strong(
            &mut t,
            &Detection::new(bx(100.0, 0.0, 120.0, 160.0), 0.9),
            3,
            &cfg,
        );
        assert_eq!(t.state.center(), [50.0, 0.0]);
        assert_eq!(t.history.len(), 2);
    }

    #[test]
    fn history_is_bounded() {
        let mut t = create_track(&Detection::new(bx(0.0, 0.0, 4.0, 4.0), 1.0), 1, 1, 3);
        for k in 1..10 {
            t.push_history(k as u32 + 2, bx(k as f64, 0.0, 4.0, 4.0));
        }
        let us: Vec<f64> = t.history.iter().map(|(_, b)| b.u).collect();
        assert_eq!(us, vec![7.0, 8.0, 9.0]);
    }

    #[test]
    fn penalty_examples() {
        let cfg = TrackerConfig::default();
        let mut t = track(1, bx(0.0, 0.0, 10.0, 10.0));
        t.penalty = 0.4;
        t.misses = 0;
        assert_eq!(penalty_age_update(&mut t, 0.0, false, 0.0, &cfg), 0.0);
        assert_eq!(t.penalty, 0.4);

        t.misses = 17;
        assert_eq!(penalty_age_update(&mut t, 1.0, false, 0.0, &cfg), 0.0);
        assert_eq!(t.penalty, 0.4);

        let mut t = track(1, bx(0.0, 0.0, 10.0, 10.0));
        t.misses = (6.0 * cfg.miss_sigma()) as u32;
        let step = penalty_age_update(&mut t, 0.0, false, 0.0, &cfg);
        assert!((step - 1.0).abs() < 1e-6);
        assert!((t.penalty - 1.0).abs() < 1e-6);

        let mut t = track(1, bx(0.0, 0.0, 10.0, 10.0));
        t.penalty = 0.5;
        t.age = 10.0;
        t.misses = 12;
        let step = penalty_age_update(&mut t, 0.9, true, 0.0, &cfg);
        assert!(step < 0.0);
        assert!(t.penalty < 0.5 && t.age < 10.0);
    }

    #[test]
    fn zero_sign_freezes_penalty() {
        let cfg = TrackerConfig::default();
        let mut t = track(1, bx(0.0, 0.0, 10.0, 10.0));
        t.penalty = 0.3;
        t.misses = 20;
        assert_eq!(penalty_age_update(&mut t, cfg.rho_re, true, 0.0, &cfg), 0.0);
        assert_eq!(t.penalty, 0.3);
    }

    /// Enumerate every admissible pair, sort and take the median.
    fn slope_oracle(xs: &[f64], f: usize, tau: f64) -> f64 {
        let mut all = Vec::new();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if i < j && j - i <= f {
                    let s = (xs[j] - xs[i]) / (j - i) as f64;
                    if s.abs() <= tau {
                        all.push(s);
                    }
                }
            }
        }
        all.sort_by(f64::total_cmp);
        match all.len() {
            0 => 0.0,
            q if q % 2 == 1 => all[q / 2],
            q => (all[q / 2 - 1] + all[q / 2]) / 2.0,
        }
    }

    fn hist(us: &[f64]) -> VecDeque<BBox> {
        us.iter().map(|&u| bx(u, 0.0, 10.0, 10.0)).collect()
    }

    #[test]
    fn trend_examples() {
        let wide = SlopeWindow {
            h: 5,
            f: 5,
            tau_scale: 100.0,
        };
        assert_eq!(trend_velocity(&hist(&[3.0; 5]), &wide), Velocity4::ZERO);
        assert_eq!(
            trend_velocity(&hist(&[0.0, 2.0, 4.0, 6.0, 8.0]), &wide).du,
            2.0
        );
        let strict = SlopeWindow {
            h: 5,
            f: 5,
            tau_scale: 0.01,
        };
        assert_eq!(
            trend_velocity(&hist(&[0.0, 5.0, 10.0, 15.0]), &strict).du,
            0.0
        );
        assert_eq!(trend_velocity(&hist(&[4.0]), &wide), Velocity4::ZERO);
    }

    #[test]
    fn trend_survives_outliers() {
        let win = SlopeWindow {
            h: 6,
            f: 5,
            tau_scale: 100.0,
        };
        let mut us: Vec<f64> = (0..6).map(|t| 3.0 * t as f64).collect();
        us[2] += 400.0;
        us[4] -= 350.0;
        let got = trend_velocity(&hist(&us), &win).du;
        assert_eq!(
            got,
            slope_oracle(&us, 5, 100.0 * bx(0.0, 0.0, 10.0, 10.0).diag())
        );
        assert!((got - 3.0).abs() <= 0.3, "got {got}");
    }

    #[test]
    fn trend_uses_only_latest_h() {
        let win = SlopeWindow {
            h: 3,
            f: 2,
            tau_scale: 100.0,
        };
        let got = trend_velocity(&hist(&[100.0, -50.0, 0.0, 1.0, 2.0]), &win);
        assert_eq!(got.du, 1.0);
    }

    #[test]
    fn timed_trend_divides_by_frame_gaps() {
        let win = SlopeWindow {
            h: 10,
            f: 5,
            tau_scale: 100.0,
        };
        let timed: VecDeque<(u32, BBox)> = [(1, 0.0), (2, 7.5), (4, 22.5), (5, 30.0), (8, 52.5)]
            .iter()
            .map(|&(f, u)| (f, bx(u, 0.0, 10.0, 10.0)))
            .collect();
        assert_eq!(trend_velocity_timed(&timed, &win).du, 7.5);
        // pairs more than F frames apart are skipped: only (5, 8) remains
        let narrow = SlopeWindow {
            h: 10,
            f: 3,
            tau_scale: 100.0,
        };
        let sparse: VecDeque<(u32, BBox)> = [(1, 0.0), (5, 100.0), (8, 106.0)]
            .iter()
            .map(|&(f, u)| (f, bx(u, 0.0, 10.0, 10.0)))
            .collect();
        assert_eq!(trend_velocity_timed(&sparse, &narrow).du, 2.0);
        let uniform: VecDeque<(u32, BBox)> = hist(&[0.0, 1.0, 5.0, 6.0])
            .into_iter()
            .zip(3..)
            .map(|(b, f)| (f, b))
            .collect();
        assert_eq!(
            trend_velocity_timed(&uniform, &win),
            trend_velocity(&hist(&[0.0, 1.0, 5.0, 6.0]), &win)
        );
    }

    #[test]
    fn weak_frozen_without_velocity() {
        let cfg = TrackerConfig::default();
        let b = bx(50.0, 50.0, 10.0, 20.0);
        let mut t = track(1, b);
        update_weak(
            &mut t,
            &swarm_for(bx(80.0, 80.0, 5.0, 5.0), vec![]),
            &[],
            &cfg,
        );
        assert_eq!(t.state, b);
        assert_eq!(t.status, TrackStatus::Weak);
    }

    #[test]
    fn weak_coasts_on_own_velocity() {
        let cfg = TrackerConfig::default();
        let mut t = track(1, bx(50.0, 50.0, 10.0, 20.0));
        t.vel = Velocity4::new(3.0, 0.0, 1.0, 1.0);
        let found = update_weak(
            &mut t,
            &swarm_for(bx(80.0, 80.0, 5.0, 5.0), vec![]),
            &[],
            &cfg,
        );
        assert!(!found);
        assert_eq!(t.state, bx(53.0, 50.0, 10.0, 20.0));
    }

    #[test]
    fn weak_follows_comoving_neighbour() {
        let cfg = TrackerConfig::default();
        let mut t = track(1, bx(50.0, 50.0, 10.0, 20.0));
        t.vel = Velocity4::new(4.0, 1.0, 0.0, 0.0);
        let mut nb = track(2, bx(60.0, 50.0, 10.0, 20.0));
        nb.vel = Velocity4::new(4.0, 1.0, 0.0, 0.0);
        nb.prev_state = nb.state;
        nb.state = bx(63.5, 51.25, 11.0, 19.0);
        let sw = swarm_for(bx(0.0, 0.0, 5.0, 5.0), vec![neighbour_of(&nb)]);
        assert!(update_weak(&mut t, &sw, &[nb], &cfg));
        assert_eq!(t.state, bx(53.5, 51.25, 10.0, 20.0));
    }

    #[test]
    fn weak_with_full_gbest_weight_takes_gbest_center() {
        let cfg = TrackerConfig {
            sigma_g: 1.0,
            ..Default::default()
        };
        let mut t = track(1, bx(50.0, 50.0, 10.0, 20.0));
        t.vel = Velocity4::new(0.0, 4.0, 0.0, 0.0);
        let mut nb = track(2, bx(58.0, 50.0, 10.0, 20.0));
        nb.vel = Velocity4::new(-4.0, 0.0, 0.0, 0.0);
        nb.prev_state = nb.state;
        nb.state = bx(54.0, 50.0, 10.0, 20.0);
        let g = bx(47.0, 55.0, 12.0, 18.0);
        let sw = swarm_for(g, vec![neighbour_of(&nb)]);
        update_weak(&mut t, &sw, &[nb], &cfg);
        assert_eq!(t.state.center(), g.center());
        assert_eq!((t.state.w, t.state.h), (10.0, 20.0));
    }

    #[test]
    fn expanded_search_finds_distant_strong_track() {
        let cfg = TrackerConfig::default();
        let mut t = track(1, bx(0.0, 0.0, 30.0, 40.0));
        t.vel = Velocity4::new(2.0, 0.0, 0.0, 0.0);
        let mut nb = track(2, bx(80.0, 0.0, 30.0, 40.0));
        nb.vel = Velocity4::new(2.0, 0.0, 0.0, 0.0);
        nb.prev_state = nb.state;
        nb.state = bx(82.0, 0.0, 30.0, 40.0);
        // diag 50: 80 is outside the normal radius but inside twice that
        let sw = swarm_for(t.state, vec![]);
        assert!(update_weak(&mut t, &sw, &[nb], &cfg));
        assert_eq!(t.state.center(), [2.0, 0.0]);
    }

    #[test]
    fn zero_offset_skips_repulsion() {
        let b = bx(10.0, 10.0, 4.0, 4.0);
        assert_eq!(
            repulsion(
                &b,
                &Velocity4::new(3.0, 1.0, 0.0, 0.0),
                [10.0, 10.0],
                [1.0, 0.0],
                0.1
            ),
            [0.0, 0.0]
        );
    }

    #[test]
    fn prune_examples() {
        let mut a = track(1, bx(0.0, 0.0, 1.0, 1.0));
        let mut b = track(2, bx(0.0, 0.0, 1.0, 1.0));
        let c = track(3, bx(0.0, 0.0, 1.0, 1.0));
        let all = prune(vec![a.clone(), b.clone(), c.clone()], 30.0);
        assert_eq!(all.len(), 3);
        a.age = 30.0;
        b.age = 29.999;
        let kept = prune(vec![a, b, c], 30.0);
        assert_eq!(kept.iter().map(|t| t.id).collect::<Vec<_>>(), vec![2, 3]);
        let again = prune(kept.clone(), 30.0);
        assert_eq!(again, kept);
    }

    proptest! {
        #[test]
        fn trend_matches_oracle(us in proptest::collection::vec(-50.0..50.0f64, 1..=10), f in 1usize..=10, tau in 0.5..40.0f64) {
            let h = us.len();
            let f = f.min(h);
            let box_diag = bx(0.0, 0.0, 10.0, 10.0).diag();
            let win = SlopeWindow { h, f, tau_scale: tau / box_diag };
            let got = trend_velocity(&hist(&us), &win).du;
            prop_assert_eq!(got, slope_oracle(&us, f, win.tau_scale * box_diag));
        }

        #[test]
        fn trend_is_translation_equivariant(us in proptest::collection::vec(-50.0..50.0f64, 2..=10), shift in -1000i32..1000) {
            let win = SlopeWindow { h: 10, f: 5, tau_scale: 0.5 };
            let shifted: Vec<f64> = us.iter().map(|u| u + shift as f64 / 8.0).collect();
            let a = trend_velocity(&hist(&us), &win).du;
            let b = trend_velocity(&hist(&shifted), &win).du;
            prop_assert!((a - b).abs() <= 1e-9);
        }

        #[test]
        fn penalty_and_age_stay_clamped(start in 0.0..=1.0f64, misses in 0u32..200, f in 0.0..=1.0f64, strong in any::<bool>(), de in 0.0..1.0f64) {
            let cfg = TrackerConfig::default();
            let mut t = track(1, bx(0.0, 0.0, 1.0, 1.0));
            t.penalty = start;
            t.age = start * cfg.age_max;
            t.misses = misses;
            penalty_age_update(&mut t, f, strong, de, &cfg);
            prop_assert!((0.0..=1.0).contains(&t.penalty));
            prop_assert!((0.0..=cfg.age_max).contains(&t.age));
        }

        #[test]
        fn repulsion_is_orthogonal_and_opposes_neighbours(
            u in -100.0..100.0f64, v in -100.0..100.0f64,
            mu in -100.0..100.0f64, mv in -100.0..100.0f64,
            du in -10.0..10.0f64, dv in -10.0..10.0f64,
            bu in -10.0..10.0f64, bv in -10.0..10.0f64,
        ) {
            let prev = bx(u, v, 20.0, 30.0);
            let push = repulsion(&prev, &Velocity4::new(du, dv, 0.0, 0.0), [mu, mv], [bu, bv], 0.1);
            let dx = [u - mu, v - mv];
            let scale = push[0].hypot(push[1]) * dx[0].hypot(dx[1]);
            prop_assert!((push[0] * dx[0] + push[1] * dx[1]).abs() <= 1e-9 * scale.max(1.0));
            prop_assert!(push[0] * bu + push[1] * bv <= 1e-9 * push[0].hypot(push[1]).max(1.0) * bu.hypot(bv).max(1.0));
        }

        #[test]
        fn weak_update_keeps_size(w in 1.0..80.0f64, h in 1.0..80.0f64, du in -5.0..5.0f64, dv in -5.0..5.0f64, nu in -5.0..5.0f64) {
            let cfg = TrackerConfig::default();
            let mut t = track(1, bx(50.0, 50.0, w, h));
            t.vel = Velocity4::new(du, dv, 3.0, -2.0);
            let mut nb = track(2, bx(55.0, 52.0, 20.0, 20.0));
            nb.vel = Velocity4::new(nu, 1.0, 0.0, 0.0);
            nb.prev_state = nb.state;
            nb.state = bx(55.0 + nu, 53.0, 22.0, 19.0);
            let sw = swarm_for(bx(48.0, 49.0, 70.0, 3.0), vec![neighbour_of(&nb)]);
            update_weak(&mut t, &sw, &[nb], &cfg);
            prop_assert_eq!((t.state.w, t.state.h), (w, h));
        }
    }
}
