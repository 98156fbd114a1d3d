//! Per-target particle sets: sampling from the random motion model and
//! post-swarm resampling.

use thiserror::Error;

use crate::config::{ResampleMode, SamplingSource, TrackerConfig};
use crate::geometry::{BBox, Velocity4};
use crate::lifecycle::Track;
use crate::rng::{KeyedRng, Purpose};

/// Smallest width/height a particle may take.
pub const MIN_BOX_SIZE: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParticleError {
    #[error("particle count must be at least 1")]
    NoParticles,
}

/// One hypothesis of a target's box and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub state: BBox,
    /// Motion-model velocity drawn by the sampler.
    pub vel: Velocity4,
    pub pbest_state: BBox,
    pub pbest_fitness: f64,
    pub fitness: f64,
    /// Swarm displacement carried between optimizer iterations.
    pub step: [f64; 4],
}

impl Particle {
    pub fn new(state: BBox, vel: Velocity4) -> Self {
        Self {
            state,
            vel,
            pbest_state: state,
            pbest_fitness: 0.0,
            fitness: 0.0,
            step: [0.0; 4],
        }
    }
}

/// Size-adaptive noise bounds and velocity caps for one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionBounds {
    /// Half-width of the position perturbation.
    pub pos_noise: Velocity4,
    /// Half-width of the velocity perturbation.
    pub vel_noise: Velocity4,
    /// Per-component velocity cap.
    pub vel_cap: Velocity4,
}

impl MotionBounds {
    pub fn for_box(b: &BBox, cfg: &TrackerConfig) -> Self {
        let scaled = |c: f64, s: f64| Velocity4::new(c * b.w, c * b.h, s * b.w, s * b.h);
        Self {
            pos_noise: scaled(cfg.alpha_x, cfg.alpha_s),
            vel_noise: scaled(cfg.alpha_v, cfg.alpha_sv),
            vel_cap: scaled(cfg.beta, cfg.beta_s),
        }
    }

    /// Scalar cap on the center-velocity gap used by the social fitness:
    /// the magnitude of the `(du, dv)` parts of `vel_cap + vel_noise`.
    pub fn social_speed_cap(&self) -> f64 {
        (self.vel_cap.du + self.vel_noise.du).hypot(self.vel_cap.dv + self.vel_noise.dv)
    }
}

/// Draws `cfg.particles` particles for `track` at `frame`.
///
/// Velocity is the previous velocity (capped) plus uniform noise; position is
/// the previous state advanced by that velocity plus uniform noise. Bounds
/// scale with the previous box size.
pub fn sample_particles(
    track: &Track,
    cfg: &TrackerConfig,
    rng: &KeyedRng,
    frame: u64,
) -> Result<Vec<Particle>, ParticleError> {
    if cfg.particles < 1 {
        return Err(ParticleError::NoParticles);
    }
    let bounds = MotionBounds::for_box(&track.state, cfg);
    let from_particles =
        cfg.sampling == SamplingSource::PreviousParticles && !track.particles.is_empty();
    let out = (0..cfg.particles)
        .map(|s| {
            let (prev_x, prev_v) = if from_particles {
                let p = &track.particles[s % track.particles.len()];
                (p.state, p.vel)
            } else {
                (track.state, track.vel)
            };
            let mut stream = rng.stream(frame, track.id, s as u64, Purpose::Sampling);
            let cap = prev_v.clamp_to(&bounds.vel_cap).as_array();
            let vn = bounds.vel_noise.as_array();
            let xn = bounds.pos_noise.as_array();
            let x0 = prev_x.as_array();
            let mut v = [0.0; 4];
            let mut x = [0.0; 4];
            for d in 0..4 {
                v[d] = cap[d] + cfg.eps_v * stream.symmetric(vn[d]);
                x[d] = x0[d]
                    + cfg.lambda_v * v[d]
                    + cfg.lambda_x * cfg.eps_x * stream.symmetric(xn[d]);
            }
            Particle::new(
                BBox::from_array_clamped(x, MIN_BOX_SIZE),
                Velocity4::from_array(v),
            )
        })
        .collect();
    Ok(out)
}

/// Handles particles whose fitness is below `cfg.rho_discard`.
///
/// Replace mode overwrites them with copies of `gbest` jittered by
/// `replace_jitter * pos_noise`; discard mode drops them but keeps at least
/// one particle (a copy of `gbest` if nothing survives).
pub fn resample(
    particles: Vec<Particle>,
    gbest: &Particle,
    cfg: &TrackerConfig,
    bounds: &MotionBounds,
    rng: &KeyedRng,
    frame: u64,
    track_id: u64,
) -> Vec<Particle> {
    match cfg.resample {
        ResampleMode::Replace => particles
            .into_iter()
            .enumerate()
            .map(|(s, p)| {
                if p.fitness >= cfg.rho_discard {
                    return p;
                }
                let mut stream = rng.stream(frame, track_id, s as u64, Purpose::Resample);
                let g = gbest.state.as_array();
                let noise = bounds.pos_noise.as_array();
                let mut x = [0.0; 4];
                for d in 0..4 {
                    x[d] = g[d] + stream.symmetric(cfg.replace_jitter * noise[d]);
                }
                let state = BBox::from_array_clamped(x, MIN_BOX_SIZE);
                Particle {
                    state,
                    vel: gbest.vel,
                    pbest_state: state,
                    pbest_fitness: gbest.fitness,
                    fitness: gbest.fitness,
                    step: [0.0; 4],
                }
            })
            .collect(),
        ResampleMode::Discard => {
            let kept: Vec<Particle> = particles
                .into_iter()
                .filter(|p| p.fitness >= cfg.rho_discard)
                .collect();
            if kept.is_empty() {
                vec![gbest.clone()]
            } else {
                kept
            }
        }
    }
}
