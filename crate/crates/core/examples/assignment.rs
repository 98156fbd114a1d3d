//! Association of predicted tracks with detections: the cost matrix, the
//! gated optimal assignment and the strong/weak/new split.
//!
//! cargo run --example assignment

use swarmtrack::assignment::{assignment_cost, min_cost_assignment, CostMatrix};
use swarmtrack::association::{build_cost_matrix, classify, solve_assignment};
use swarmtrack::lifecycle::create_track;
use swarmtrack::{BBox, Detection, TrackerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // plain rectangular assignment: 2 workers, 3 jobs
    let c = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0]]);
    let a = min_cost_assignment(&c);
    println!("rows -> cols {:?}, total {}", a, assignment_cost(&c, &a));

    let cfg = TrackerConfig::default();
    let tracks = vec![
        create_track(
            &Detection::new(BBox::new(100.0, 100.0, 30.0, 60.0)?, 0.9),
            1,
            1,
            cfg.history,
        ),
        create_track(
            &Detection::new(BBox::new(200.0, 100.0, 30.0, 60.0)?, 0.9),
            2,
            1,
            cfg.history,
        ),
        create_track(
            &Detection::new(BBox::new(400.0, 300.0, 30.0, 60.0)?, 0.9),
            3,
            1,
            cfg.history,
        ),
    ];
    let dets = vec![
        Detection::new(BBox::new(203.0, 101.0, 30.0, 60.0)?, 0.95),
        Detection::new(BBox::new(98.0, 102.0, 30.0, 60.0)?, 0.8),
        Detection::new(BBox::new(600.0, 50.0, 30.0, 60.0)?, 0.7),
        Detection::new(BBox::new(50.0, 400.0, 30.0, 60.0)?, 0.3),
    ];

    // tracks without particles are scored from their state
    let costs = build_cost_matrix(&tracks, &dets, &cfg);
    println!("\ncost matrix (rows = tracks 1..3, cols = detections 0..3)");
    for i in 0..costs.rows() {
        let row: Vec<String> = (0..costs.cols())
            .map(|j| format!("{:.3}", costs.get(i, j)))
            .collect();
        println!("  {}", row.join("  "));
    }

    let ids: Vec<u64> = tracks.iter().map(|t| t.id).collect();
    // the default gate lets track 3 jump 320 px; a tight one makes it coast
    for gate in [cfg.gate, 0.3] {
        let result = solve_assignment(&costs, gate);
        let classes = classify(&result, &ids, &dets, cfg.conf_new);
        println!("\ngate {gate}");
        println!("  strong (track, detection): {:?}", classes.strong);
        println!("  weak tracks: {:?}", classes.weak);
        println!(
            "  births from detections: {:?} (conf >= {})",
            classes.births, cfg.conf_new
        );
    }
    Ok(())
}
