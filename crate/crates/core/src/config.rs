//! Tracker configuration: every tunable scalar, its default, validation and
//! the `key = value` text format.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::appearance::HogConfig;
use crate::geometry::BBox;

/// What the swarm does with particles whose fitness falls below
/// `rho_discard` after optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMode {
    /// Overwrite them with jittered copies of the global best.
    Replace,
    /// Drop them; the set never becomes empty.
    Discard,
}

/// Where a frame's particles are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingSource {
    /// The previous optimal state of the target.
    PreviousState,
    /// Each particle evolves from its own previous position.
    PreviousParticles,
}

/// A single constraint failure found by [`TrackerConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid configuration: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Particles per target (S).
    pub particles: usize,
    pub pso_iterations: usize,
    pub pso_inertia: f64,
    pub pso_cognitive: f64,
    pub pso_social: f64,

    // swarm fitness weights
    pub sigma_h: f64,
    pub sigma_p: f64,
    pub sigma_i: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub xi_p: f64,
    pub xi_v: f64,

    // association
    pub lambda_p: f64,
    pub lambda_d: f64,
    pub lambda_h: f64,
    pub gate: f64,
    pub conf_new: f64,

    // random motion model
    pub eps_v: f64,
    pub eps_x: f64,
    pub lambda_x: f64,
    pub lambda_v: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
    pub alpha_v: f64,
    pub alpha_sv: f64,
    pub beta: f64,
    pub beta_s: f64,
    pub sampling: SamplingSource,
    pub resample: ResampleMode,
    pub rho_discard: f64,
    pub replace_jitter: f64,

    // neighbourhoods
    pub radius_scale: f64,
    pub expanded_radius_scale: f64,

    // state updates
    pub gamma_o: f64,
    pub tau_v_scale: f64,
    pub delta_d: f64,
    pub sigma_g: f64,
    pub eps_s: f64,
    pub rho_re: f64,
    pub entrance_penalty: f64,
    pub entrances: Vec<BBox>,
    pub age_max: f64,
    pub weak_history: bool,

    // trend velocity
    pub history: usize,
    pub window: usize,
    pub tau_scale: f64,

    pub seed: u64,
    /// Forces the appearance term off even when frames are supplied.
    pub frameless: bool,
    pub hog: HogConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            particles: 8,
            pso_iterations: 5,
            pso_inertia: 0.6,
            pso_cognitive: 1.5,
            pso_social: 1.5,
            sigma_h: 0.5,
            sigma_p: 0.2,
            sigma_i: 0.3,
            lambda_s: 0.4,
            lambda_m: 0.6,
            xi_p: 0.7,
            xi_v: 0.3,
            lambda_p: 0.6,
            lambda_d: 0.2,
            lambda_h: 0.2,
            gate: 0.8,
            conf_new: 0.6,
            eps_v: 1.0,
            eps_x: 1.0,
            lambda_x: 1.0,
            lambda_v: 1.0,
            alpha_x: 0.10,
            alpha_s: 0.02,
            alpha_v: 0.05,
            alpha_sv: 0.01,
            beta: 0.5,
            beta_s: 0.05,
            sampling: SamplingSource::PreviousState,
            resample: ResampleMode::Replace,
            rho_discard: 0.5,
            replace_jitter: 0.05,
            radius_scale: 1.0,
            expanded_radius_scale: 2.0,
            gamma_o: 0.25,
            tau_v_scale: 0.02,
            delta_d: 0.9,
            sigma_g: 0.5,
            eps_s: 0.1,
            rho_re: 0.5,
            entrance_penalty: 0.0,
            entrances: Vec::new(),
            age_max: 30.0,
            weak_history: true,
            history: 10,
            window: 5,
            tau_scale: 0.5,
            seed: 0,
            frameless: false,
            hog: HogConfig::default(),
        }
    }
}

const SIMPLEX_TOL: f64 = 1e-9;

impl TrackerConfig {
    /// Checks every constraint and reports all failures at once.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut bad = |key: &str, message: String| {
            out.push(Violation {
                key: key.to_string(),
                message,
            })
        };

        let unit = [
            ("sigma_h", self.sigma_h),
            ("sigma_p", self.sigma_p),
            ("sigma_i", self.sigma_i),
            ("lambda_s", self.lambda_s),
            ("lambda_m", self.lambda_m),
            ("xi_p", self.xi_p),
            ("xi_v", self.xi_v),
            ("lambda_p", self.lambda_p),
            ("lambda_d", self.lambda_d),
            ("lambda_h", self.lambda_h),
            ("gate", self.gate),
            ("conf_new", self.conf_new),
            ("rho_discard", self.rho_discard),
            ("delta_d", self.delta_d),
            ("sigma_g", self.sigma_g),
            ("rho_re", self.rho_re),
        ];
        for (k, x) in unit {
            if !(0.0..=1.0).contains(&x) {
                bad(k, format!("must lie in [0, 1], got {x}"));
            }
        }
        let simplexes = [
            (
                "sigma_h + sigma_p + sigma_i",
                self.sigma_h + self.sigma_p + self.sigma_i,
            ),
            ("lambda_s + lambda_m", self.lambda_s + self.lambda_m),
            ("xi_p + xi_v", self.xi_p + self.xi_v),
            (
                "lambda_p + lambda_d + lambda_h",
                self.lambda_p + self.lambda_d + self.lambda_h,
            ),
        ];
        for (k, sum) in simplexes {
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                bad(k, format!("weights must sum to 1, got {sum}"));
            }
        }

        if self.particles < 1 {
            bad("particles", "need at least one particle per target".into());
        }
        if self.window == 0 || self.window > self.history {
            bad(
                "window",
                format!(
                    "need 0 < window <= history, got window {} history {}",
                    self.window, self.history
                ),
            );
        }
        if !(self.age_max > 0.0 && self.age_max.is_finite()) {
            bad("age_max", format!("must be positive, got {}", self.age_max));
        }

        let non_negative = [
            ("pso_inertia", self.pso_inertia),
            ("pso_cognitive", self.pso_cognitive),
            ("pso_social", self.pso_social),
            ("eps_v", self.eps_v),
            ("eps_x", self.eps_x),
            ("lambda_x", self.lambda_x),
            ("lambda_v", self.lambda_v),
            ("alpha_x", self.alpha_x),
            ("alpha_s", self.alpha_s),
            ("alpha_v", self.alpha_v),
            ("alpha_sv", self.alpha_sv),
            ("beta", self.beta),
            ("beta_s", self.beta_s),
            ("replace_jitter", self.replace_jitter),
            ("gamma_o", self.gamma_o),
            ("tau_v_scale", self.tau_v_scale),
            ("eps_s", self.eps_s),
            ("entrance_penalty", self.entrance_penalty),
            ("tau_scale", self.tau_scale),
        ];
        for (k, x) in non_negative {
            if !(x >= 0.0 && x.is_finite()) {
                bad(k, format!("must be finite and non-negative, got {x}"));
            }
        }
        let positive = [
            ("radius_scale", self.radius_scale),
            ("expanded_radius_scale", self.expanded_radius_scale),
        ];
        for (k, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                bad(k, format!("must be positive, got {x}"));
            }
        }
        if self.beta + self.alpha_v <= 0.0 {
            bad(
                "beta",
                "beta + alpha_v must be positive (social velocity cap)".into(),
            );
        }
        if !self.hog.is_valid() {
            bad(
                "hog_patch",
                format!(
                    "HoG layout invalid: patch {} cell {} block {} bins {}",
                    self.hog.patch, self.hog.cell, self.hog.block, self.hog.bins
                ),
            );
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Parses `key = value` text on top of the defaults and validates the
    /// result. `#` starts a comment; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, got {content:?}"),
            })?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let syntax = |msg: String| ConfigError::Syntax { line, msg };
        let f = || -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .map_err(|_| syntax(format!("`{key}` expects a number, got {value:?}")))
        };
        let u = || -> Result<usize, ConfigError> {
            value.parse::<usize>().map_err(|_| {
                syntax(format!(
                    "`{key}` expects a non-negative integer, got {value:?}"
                ))
            })
        };
        let b = || -> Result<bool, ConfigError> {
            match value {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(syntax(format!("`{key}` expects a boolean, got {value:?}"))),
            }
        };
        match key {
            "particles" => self.particles = u()?,
            "pso_iterations" => self.pso_iterations = u()?,
            "pso_inertia" => self.pso_inertia = f()?,
            "pso_cognitive" => self.pso_cognitive = f()?,
            "pso_social" => self.pso_social = f()?,
            "sigma_h" => self.sigma_h = f()?,
            "sigma_p" => self.sigma_p = f()?,
            "sigma_i" => self.sigma_i = f()?,
            "lambda_s" => self.lambda_s = f()?,
            "lambda_m" => self.lambda_m = f()?,
            "xi_p" => self.xi_p = f()?,
            "xi_v" => self.xi_v = f()?,
            "lambda_p" => self.lambda_p = f()?,
            "lambda_d" => self.lambda_d = f()?,
            "lambda_h" => self.lambda_h = f()?,
            "gate" => self.gate = f()?,
            "conf_new" => self.conf_new = f()?,
            "eps_v" => self.eps_v = f()?,
            "eps_x" => self.eps_x = f()?,
            "lambda_x" => self.lambda_x = f()?,
            "lambda_v" => self.lambda_v = f()?,
            "alpha_x" => self.alpha_x = f()?,
            "alpha_s" => self.alpha_s = f()?,
            "alpha_v" => self.alpha_v = f()?,
            "alpha_sv" => self.alpha_sv = f()?,
            "beta" => self.beta = f()?,
            "beta_s" => self.beta_s = f()?,
            "sampling" => {
                self.sampling = match value {
                    "state" => SamplingSource::PreviousState,
                    "particles" => SamplingSource::PreviousParticles,
                    _ => {
                        return Err(syntax(format!(
                            "`sampling` expects state|particles, got {value:?}"
                        )))
                    }
                }
            }
            "resample" => {
                self.resample = match value {
                    "replace" => ResampleMode::Replace,
                    "discard" => ResampleMode::Discard,
                    _ => {
                        return Err(syntax(format!(
                            "`resample` expects replace|discard, got {value:?}"
                        )))
                    }
                }
            }
            "rho_discard" => self.rho_discard = f()?,
            "replace_jitter" => self.replace_jitter = f()?,
            "radius_scale" => self.radius_scale = f()?,
            "expanded_radius_scale" => self.expanded_radius_scale = f()?,
            "gamma_o" => self.gamma_o = f()?,
            "tau_v_scale" => self.tau_v_scale = f()?,
            "delta_d" => self.delta_d = f()?,
            "sigma_g" => self.sigma_g = f()?,
            "eps_s" => self.eps_s = f()?,
            "rho_re" => self.rho_re = f()?,
            "entrance_penalty" => self.entrance_penalty = f()?,
            "entrance" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| {
                        syntax(format!("`entrance` expects left,top,w,h, got {value:?}"))
                    })?;
                if parts.len() != 4 {
                    return Err(syntax(format!(
                        "`entrance` expects 4 numbers, got {}",
                        parts.len()
                    )));
                }
                let area = BBox::from_topleft(parts[0], parts[1], parts[2], parts[3])
                    .map_err(|e| syntax(format!("`entrance`: {e}")))?;
                self.entrances.push(area);
            }
            "age_max" => self.age_max = f()?,
            "weak_history" => self.weak_history = b()?,
            "history" => self.history = u()?,
            "window" => self.window = u()?,
            "tau_scale" => self.tau_scale = f()?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| {
                    syntax(format!("`seed` expects an unsigned integer, got {value:?}"))
                })?
            }
            "frameless" => self.frameless = b()?,
            "hog_patch" => self.hog.patch = u()?,
            "hog_cell" => self.hog.cell = u()?,
            "hog_bins" => self.hog.bins = u()?,
            "hog_block" => self.hog.block = u()?,
            "hog_clip" => self.hog.clip = f()?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Appearance weights in effect for a frame: frameless operation moves
    /// all weight onto the motion term.
    pub fn pair_weights(&self, have_frame: bool) -> (f64, f64) {
        if have_frame && !self.frameless {
            (self.lambda_s, self.lambda_m)
        } else {
            (0.0, 1.0)
        }
    }

    /// Gaussian width of the miss-count ramp in the penalty update.
    pub fn miss_sigma(&self) -> f64 {
        self.age_max / 6.0
    }

    /// Entrance penalty for a state centered at `(u, v)`.
    pub fn entrance_delta(&self, u: f64, v: f64) -> f64 {
        if self.entrances.iter().any(|a| a.contains_point(u, v)) {
            self.entrance_penalty
        } else {
            0.0
        }
    }
}
