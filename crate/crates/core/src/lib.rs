//! Multi-object tracking with swarm-refined particle filters.
//!
//! Each target carries a small particle set that is sampled from a random
//! motion model and refined by particle swarm optimization. Tracks are then
//! associated with detections by a minimum-cost assignment, and unmatched
//! tracks are coasted with the help of their neighbours until they expire.
//!
//! The usual entry point is [`Tracker`]:
//!
//! ```
//! use swarmtrack::{BBox, Detection, FrameInput, Tracker, TrackerConfig};
//!
//! let mut tracker = Tracker::new(TrackerConfig::default()).unwrap();
//! let det = Detection::new(BBox::new(100.0, 80.0, 20.0, 40.0).unwrap(), 0.9);
//! let out = tracker.step(&FrameInput::new(1, vec![det])).unwrap();
//! assert_eq!(out[0].id, 1);
//! ```

pub mod appearance;
pub mod assignment;
pub mod association;
pub mod baseline;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod lifecycle;
pub mod metrics;
pub mod motfile;
pub mod overlay;
pub mod particles;
pub mod pgm;
pub mod pipeline;
pub mod rng;
pub mod scenario;
pub mod swarm;

pub use appearance::{FeatureVec, GrayImage, HogConfig};
pub use config::{ConfigError, TrackerConfig};
pub use geometry::{BBox, Detection, Velocity4};
pub use lifecycle::{Track, TrackStatus};
pub use pipeline::{FrameInput, StepError, TrackOutput, Tracker};
