//! The tracker against a greedy IoU tracker with no motion model on the
//! crossing/side-by-side suite, seed by seed.
//!
//! cargo run --release --example baseline_comparison -- [n_seeds]

use swarmtrack::baseline::{BaselineConfig, IouTracker};
use swarmtrack::metrics::{evaluate_detailed, Evaluation, TrackFile};
use swarmtrack::motfile::detections_by_frame;
use swarmtrack::scenario::crossing_suite;
use swarmtrack::{Tracker, TrackerConfig};

fn kept_identities(e: &Evaluation) -> bool {
    e.report.idsw == 0 && e.lost_identities() == 0
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(20);
    let base_cfg = TrackerConfig::parse(include_str!("../../../configs/frameless.conf"))?;
    let (mut ours, mut theirs) = (0, 0);
    println!(
        "{:>4}  {:>14}  {:>14}",
        "seed", "tracker idsw", "baseline idsw"
    );
    for seed in 0..n {
        let spec = crossing_suite(seed);
        let scene = spec.generate();
        let gt = TrackFile::from_records(&scene.gt)?;
        let dets = detections_by_frame(&scene.detections);

        let mut tracker = Tracker::new(TrackerConfig {
            seed,
            ..base_cfg.clone()
        })?;
        let results = tracker.run_detections(&dets, spec.n_frames)?;
        let e = evaluate_detailed(&gt, &TrackFile::from_outputs(&results), 0.5);

        let mut base = IouTracker::new(BaselineConfig::default());
        let mut rows = Vec::new();
        for f in 1..=spec.n_frames {
            let found = base.step(dets.get(&f).map(Vec::as_slice).unwrap_or(&[]));
            rows.extend(found.into_iter().map(|(id, b)| (f, id as i64, b)));
        }
        let b = evaluate_detailed(&gt, &TrackFile::from_boxes(rows)?, 0.5);

        ours += kept_identities(&e) as u32;
        theirs += kept_identities(&b) as u32;
        println!("{seed:>4}  {:>14}  {:>14}", e.report.idsw, b.report.idsw);
    }
    println!("scenes with every identity kept: tracker {ours}/{n}, baseline {theirs}/{n}");
    Ok(())
}
