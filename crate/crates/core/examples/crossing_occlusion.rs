//! Two people cross paths while one of them is hidden for ten frames, and
//! three more walk side by side. Prints both crossing tracks around the
//! occlusion and the final scores.
//!
//! cargo run --example crossing_occlusion -- [seed]

use swarmtrack::metrics::{evaluate_detailed, TrackFile};
use swarmtrack::motfile::detections_by_frame;
use swarmtrack::scenario::crossing_suite;
use swarmtrack::{Tracker, TrackerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(3);
    let spec = crossing_suite(seed);
    let scene = spec.generate();
    let dets = detections_by_frame(&scene.detections);

    let mut cfg = TrackerConfig::parse(include_str!("../../../configs/frameless.conf"))?;
    cfg.seed = seed;
    let mut tracker = Tracker::new(cfg)?;
    let results = tracker.run_detections(&dets, spec.n_frames)?;

    let occluded = &spec.targets[1];
    println!(
        "target 2 has no detections in frames {:?}",
        occluded.occlusions
    );
    println!(
        "{:>5}  {:<26}  tracks near the crossing",
        "frame", "ground truth 1 / 2"
    );
    for (frame, outs) in results.iter().filter(|(f, _)| (20..=40).contains(f)) {
        let gt = spec.gt_boxes(*frame);
        let near: Vec<String> = outs
            .iter()
            .filter(|o| o.bbox.v < 320.0)
            .map(|o| {
                format!(
                    "#{} {:>6} ({:.0},{:.0})",
                    o.id,
                    o.status.as_str(),
                    o.bbox.u,
                    o.bbox.v
                )
            })
            .collect();
        println!(
            "{frame:>5}  ({:.0},{:.0}) / ({:.0},{:.0})        {}",
            gt[0].1.u,
            gt[0].1.v,
            gt[1].1.u,
            gt[1].1.v,
            near.join("  ")
        );
    }

    let gt = TrackFile::from_records(&scene.gt)?;
    let eval = evaluate_detailed(&gt, &TrackFile::from_outputs(&results), 0.5);
    println!("\n{}", eval.report);
    for (id, g) in &eval.per_gt {
        println!(
            "gt {id}: tracked by {:?}, {} switches",
            g.hyp_ids, g.switches
        );
    }
    Ok(())
}
