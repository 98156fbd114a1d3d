//! End to end through files: write a synthetic scene with frames, track it
//! with the appearance term on, save MOTChallenge results, score them and
//! draw the boxes onto copies of the frames.
//!
//! cargo run --example synth_and_track -- [out_dir]

use std::path::PathBuf;

use swarmtrack::metrics::{evaluate, TrackFile};
use swarmtrack::motfile::{parse_det_file, read_records, write_results};
use swarmtrack::overlay::draw_box;
use swarmtrack::pgm;
use swarmtrack::scenario::ScenarioSpec;
use swarmtrack::{FrameInput, Tracker, TrackerConfig};

const SCENE: &str = "
n_frames = 40
width = 320
height = 240
noise = 0.5
dropout = 0.1
seed = 4
frames = true
n_targets = 2
size.1 = 24,48
waypoint.1 = 1,40,80
waypoint.1 = 40,280,100
size.2 = 24,48
waypoint.2 = 1,280,170
waypoint.2 = 40,40,150
occlusion.2 = 18,22
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("swarmtrack_synth"));
    let spec = ScenarioSpec::parse(SCENE)?;
    spec.write(&out)?;
    println!("scene written to {}", out.display());

    let dets = parse_det_file(&out.join("det.txt"))?;
    let frames = out.join("frames");
    let mut tracker = Tracker::new(TrackerConfig::default())?;
    let mut results = Vec::new();
    for f in 1..=spec.n_frames {
        let image = pgm::read(&pgm::frame_path(&frames, f))?;
        let input = FrameInput::new(f, dets.get(&f).cloned().unwrap_or_default()).with_image(image);
        results.push((f, tracker.step(&input)?));
    }
    let res_path = out.join("results.txt");
    write_results(&results, &res_path, true)?;

    let gt = TrackFile::from_records(&read_records(&out.join("gt.txt"))?)?;
    let hyp = TrackFile::from_records(&read_records(&res_path)?)?;
    println!("{}", evaluate(&gt, &hyp, 0.5));

    let drawn = out.join("overlay");
    std::fs::create_dir_all(&drawn)?;
    for (f, outs) in &results {
        let mut img = pgm::read(&pgm::frame_path(&frames, *f))?;
        for o in outs {
            draw_box(&mut img, &o.bbox, o.status);
        }
        pgm::write(&pgm::frame_path(&drawn, *f), &img)?;
    }
    println!("overlays in {}", drawn.display());
    Ok(())
}
