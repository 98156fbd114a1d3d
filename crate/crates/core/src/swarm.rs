//! Swarm refinement of a target's particles.
//!
//! A particle's fitness mixes three terms, each in `[0, 1]`:
//!
//! * history: similarity to the target's previous optimal state,
//! * exploration: similarity to the particle's own position one optimizer
//!   iteration earlier (1 on the first evaluation),
//! * social: separation from neighbouring targets in position and velocity.
//!
//! Similarity between two boxes is a weighted sum of HoG cosine similarity
//! and a capped center-distance term. Without a frame the appearance weight
//! moves entirely onto the motion term.

use std::collections::HashMap;

use crate::appearance::{cosine_sim, extract_hog, FeatureVec, GrayImage, HogConfig};
use crate::config::TrackerConfig;
use crate::geometry::{center_distance, BBox, Velocity4};
use crate::lifecycle::{Track, TrackStatus};
use crate::particles::{MotionBounds, Particle, MIN_BOX_SIZE};
use crate::rng::{KeyedRng, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessWeights {
    pub sigma_h: f64,
    pub sigma_p: f64,
    pub sigma_i: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub xi_p: f64,
    pub xi_v: f64,
}

impl FitnessWeights {
    pub fn from_config(cfg: &TrackerConfig, have_frame: bool) -> Self {
        let (lambda_s, lambda_m) = cfg.pair_weights(have_frame);
        Self {
            sigma_h: cfg.sigma_h,
            sigma_p: cfg.sigma_p,
            sigma_i: cfg.sigma_i,
            lambda_s,
            lambda_m,
            xi_p: cfg.xi_p,
            xi_v: cfg.xi_v,
        }
    }

    pub fn is_valid(&self) -> bool {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        [
            self.sigma_h,
            self.sigma_p,
            self.sigma_i,
            self.lambda_s,
            self.lambda_m,
            self.xi_p,
            self.xi_v,
        ]
        .into_iter()
        .all(unit)
            && (self.sigma_h + self.sigma_p + self.sigma_i - 1.0).abs() <= 1e-9
            && (self.lambda_s + self.lambda_m - 1.0).abs() <= 1e-9
            && (self.xi_p + self.xi_v - 1.0).abs() <= 1e-9
    }
}

/// Frame-start snapshot of another target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub id: u64,
    pub state: BBox,
    pub vel: Velocity4,
    pub status: TrackStatus,
}

/// Output of [`optimize`] for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmResult {
    pub particles: Vec<Particle>,
    pub gbest_state: BBox,
    pub gbest_vel: Velocity4,
    pub gbest_fitness: f64,
    /// History-term fitness evaluated at the global best.
    pub gbest_history_fitness: f64,
    pub neighbours: Vec<Neighbour>,
}

impl SwarmResult {
    pub fn gbest_particle(&self) -> Particle {
        let mut p = Particle::new(self.gbest_state, self.gbest_vel);
        p.fitness = self.gbest_fitness;
        p.pbest_fitness = self.gbest_fitness;
        p
    }
}

/// Every other track whose center lies within `radius_scale * diag(target)`
/// of the target's center, ordered by id.
pub fn neighbours(target: &Track, all_tracks: &[Track], radius_scale: f64) -> Vec<Neighbour> {
    let radius = radius_scale * target.state.diag();
    let mut out: Vec<Neighbour> = all_tracks
        .iter()
        .filter(|t| t.id != target.id && center_distance(&t.state, &target.state) <= radius)
        .map(|t| Neighbour {
            id: t.id,
            state: t.state,
            vel: t.vel,
            status: t.status,
        })
        .collect();
    out.sort_by_key(|n| n.id);
    out
}

/// `1 - min(dist, d_om) / d_om` over box centers.
pub fn motion_fitness(a: &BBox, b: &BBox, d_om: f64) -> f64 {
    1.0 - center_distance(a, b).min(d_om) / d_om
}

/// Weighted appearance + motion similarity of two boxes. When either
/// descriptor is missing the motion term carries the full weight.
pub fn pair_fitness(
    candidate: (&BBox, Option<&FeatureVec>),
    reference: (&BBox, Option<&FeatureVec>),
    d_om: f64,
    lambda_s: f64,
    lambda_m: f64,
) -> f64 {
    let f_m = motion_fitness(candidate.0, reference.0, d_om);
    match (candidate.1, reference.1) {
        (Some(a), Some(b)) if lambda_s > 0.0 => {
            let f_s = cosine_sim(a, b).unwrap_or(0.0);
            (lambda_s * f_s + lambda_m * f_m).clamp(0.0, 1.0)
        }
        _ => f_m.clamp(0.0, 1.0),
    }
}

/// Separation of a particle from the neighbouring targets; 1 with no
/// neighbours, 0 when it coincides with all of them in position and velocity.
pub fn social_fitness(
    p: &Particle,
    neighbours: &[Neighbour],
    eps_nei: f64,
    v_s_max: f64,
    weights: &FitnessWeights,
) -> f64 {
    if neighbours.is_empty() {
        return 1.0;
    }
    let n = neighbours.len() as f64;
    let reach = 2.0 * eps_nei;
    let (mut pos, mut vel) = (0.0, 0.0);
    for nb in neighbours {
        pos += center_distance(&p.state, &nb.state).min(reach) / reach;
        let gap = (p.vel.du - nb.vel.du).hypot(p.vel.dv - nb.vel.dv);
        vel += gap.min(v_s_max) / v_s_max;
    }
    (weights.xi_p * pos / n + weights.xi_v * vel / n).clamp(0.0, 1.0)
}

/// Descriptor lookup with a cache keyed by the rounded box.
struct FeatureCache<'a> {
    frame: Option<&'a GrayImage>,
    hog: HogConfig,
    cache: HashMap<[i64; 4], Option<FeatureVec>>,
}

impl<'a> FeatureCache<'a> {
    fn new(frame: Option<&'a GrayImage>, hog: HogConfig) -> Self {
        Self {
            frame,
            hog,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, b: &BBox) -> Option<FeatureVec> {
        let img = self.frame?;
        let key = [b.u, b.v, b.w, b.h].map(|x| x.round() as i64);
        let hog = self.hog;
        self.cache
            .entry(key)
            .or_insert_with(|| extract_hog(img, b, &hog).ok())
            .clone()
    }
}

struct Scorer<'a> {
    weights: FitnessWeights,
    reference: BBox,
    reference_feat: Option<FeatureVec>,
    neighbours: &'a [Neighbour],
    eps_nei: f64,
    v_s_max: f64,
    features: FeatureCache<'a>,
}

impl Scorer<'_> {
    fn history(&mut self, b: &BBox) -> f64 {
        let feat = self.features.get(b);
        pair_fitness(
            (b, feat.as_ref()),
            (&self.reference, self.reference_feat.as_ref()),
            self.reference.diag(),
            self.weights.lambda_s,
            self.weights.lambda_m,
        )
    }

    fn exploration(&mut self, b: &BBox, prior: Option<&BBox>) -> f64 {
        let Some(prior) = prior else {
            return 1.0;
        };
        let fa = self.features.get(b);
        let fb = self.features.get(prior);
        pair_fitness(
            (b, fa.as_ref()),
            (prior, fb.as_ref()),
            prior.diag(),
            self.weights.lambda_s,
            self.weights.lambda_m,
        )
    }

    fn total(&mut self, p: &Particle, prior: Option<&BBox>) -> f64 {
        let w = self.weights;
        let f = w.sigma_h * self.history(&p.state)
            + w.sigma_p * self.exploration(&p.state, prior)
            + w.sigma_i * social_fitness(p, self.neighbours, self.eps_nei, self.v_s_max, &w);
        f.clamp(0.0, 1.0)
    }
}

/// Runs `cfg.pso_iterations` rounds of global-best PSO over the particles
/// of `target`, using the target's previous state as the history reference.
///
/// The reference descriptor is the track's stored appearance when it has
/// one, otherwise the descriptor of the previous state in `frame`.
pub fn optimize(
    target: &Track,
    mut particles: Vec<Particle>,
    frame: Option<&GrayImage>,
    neighbours: Vec<Neighbour>,
    cfg: &TrackerConfig,
    rng: &KeyedRng,
    frame_index: u64,
) -> SwarmResult {
    assert!(
        !particles.is_empty(),
        "optimize needs at least one particle"
    );
    let weights = FitnessWeights::from_config(cfg, frame.is_some());
    let bounds = MotionBounds::for_box(&target.state, cfg);
    let use_frame = if weights.lambda_s > 0.0 { frame } else { None };
    let mut features = FeatureCache::new(use_frame, cfg.hog);
    let reference_feat = match (&target.appearance, use_frame) {
        (Some(f), Some(_)) => Some(f.clone()),
        _ => features.get(&target.state),
    };
    let mut scorer = Scorer {
        weights,
        reference: target.state,
        reference_feat,
        neighbours: &neighbours,
        eps_nei: cfg.radius_scale * target.state.diag(),
        v_s_max: bounds.social_speed_cap().max(f64::MIN_POSITIVE),
        features,
    };

    for p in particles.iter_mut() {
        p.fitness = scorer.total(p, None);
        p.pbest_state = p.state;
        p.pbest_fitness = p.fitness;
        p.step = [0.0; 4];
    }
    let mut g = 0;
    for (i, p) in particles.iter().enumerate() {
        if p.pbest_fitness > particles[g].pbest_fitness {
            g = i;
        }
    }
    let mut gbest_state = particles[g].pbest_state;
    let mut gbest_vel = particles[g].vel;
    let mut gbest_fitness = particles[g].pbest_fitness;

    let clamp = bounds.pos_noise.as_array();
    let mut streams: Vec<_> = (0..particles.len())
        .map(|s| rng.stream(frame_index, target.id, s as u64, Purpose::Swarm))
        .collect();
    for _ in 0..cfg.pso_iterations {
        let gb = gbest_state.as_array();
        for (p, stream) in particles.iter_mut().zip(streams.iter_mut()) {
            let prior = p.state;
            let x = prior.as_array();
            let pb = p.pbest_state.as_array();
            let mut next = [0.0; 4];
            for d in 0..4 {
                let r1 = stream.unit();
                let r2 = stream.unit();
                let step = cfg.pso_inertia * p.step[d]
                    + cfg.pso_cognitive * r1 * (pb[d] - x[d])
                    + cfg.pso_social * r2 * (gb[d] - x[d]);
                p.step[d] = step.clamp(-clamp[d], clamp[d]);
                next[d] = x[d] + p.step[d];
            }
            p.state = BBox::from_array_clamped(next, MIN_BOX_SIZE);
            p.fitness = scorer.total(p, Some(&prior));
            if p.fitness > p.pbest_fitness {
                p.pbest_fitness = p.fitness;
                p.pbest_state = p.state;
            }
        }
        // synchronous global-best update, lowest index wins ties
        for p in particles.iter() {
            if p.pbest_fitness > gbest_fitness {
                gbest_fitness = p.pbest_fitness;
                gbest_state = p.pbest_state;
                gbest_vel = p.vel;
            }
        }
    }

    let gbest_history_fitness = scorer.history(&gbest_state);
    SwarmResult {
        particles,
        gbest_state,
        gbest_vel,
        gbest_fitness,
        gbest_history_fitness,
        neighbours,
    }
}
