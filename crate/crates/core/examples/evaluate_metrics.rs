//! Scoring a hypothesis against ground truth: one object followed for ten
//! frames whose hypothesis id changes halfway through.
//!
//! cargo run --example evaluate_metrics

use swarmtrack::metrics::{evaluate, evaluate_detailed, TrackFile};
use swarmtrack::BBox;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boxes: Vec<(u32, BBox)> = (1..=10)
        .map(|f| Ok((f, BBox::new(50.0 + 5.0 * f as f64, 100.0, 20.0, 40.0)?)))
        .collect::<Result<_, swarmtrack::geometry::GeometryError>>()?;
    let gt = TrackFile::from_boxes(boxes.iter().map(|&(f, b)| (f, 1, b)))?;
    let hyp = TrackFile::from_boxes(
        boxes
            .iter()
            .map(|&(f, b)| (f, if f <= 6 { 7 } else { 8 }, b)),
    )?;

    println!("ground truth against itself\n{}\n", evaluate(&gt, &gt, 0.5));
    let eval = evaluate_detailed(&gt, &hyp, 0.5);
    println!(
        "hypothesis switches from id 7 to id 8 after frame 6\n{}",
        eval.report
    );
    println!(
        "\nground-truth object 1 was followed by ids {:?}",
        eval.per_gt[&1].hyp_ids
    );
    Ok(())
}
