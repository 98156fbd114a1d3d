//! One prediction step for a single target: particles drawn around the
//! motion-model guess, then refined by the swarm with and without the
//! frame. The history term holds the swarm near the previous state; with
//! the frame, appearance draws the best particle toward where the target
//! went.
//!
//! cargo run --example swarm_refine

use swarmtrack::appearance::extract_hog;
use swarmtrack::lifecycle::create_track;
use swarmtrack::particles::sample_particles;
use swarmtrack::rng::KeyedRng;
use swarmtrack::swarm::optimize;
use swarmtrack::{BBox, Detection, GrayImage, TrackerConfig, Velocity4};

fn render(u: f64, v: f64) -> GrayImage {
    let mut img = GrayImage::filled(320, 240, 90);
    let b = BBox::new(u, v, 30.0, 60.0).expect("positive size");
    for y in b.top() as usize..b.bottom() as usize {
        for x in b.left() as usize..b.right() as usize {
            let checker =
                ((x - b.left() as usize) / 5 + (y - b.top() as usize) / 10).is_multiple_of(2);
            img.set(x, y, if checker { 230 } else { 20 });
        }
    }
    img
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TrackerConfig {
        seed: 11,
        ..Default::default()
    };
    let rng = KeyedRng::new(cfg.seed);

    // last seen at (140, 120) moving 4 px/frame; it actually moved 9 px
    let mut track = create_track(
        &Detection::new(BBox::new(140.0, 120.0, 30.0, 60.0)?, 0.9),
        1,
        1,
        cfg.history,
    );
    track.vel = Velocity4::new(4.0, 0.0, 0.0, 0.0);
    track.appearance = Some(extract_hog(&render(140.0, 120.0), &track.state, &cfg.hog)?);
    let frame = render(149.0, 120.0);

    let particles = sample_particles(&track, &cfg, &rng, 2)?;
    println!("sampled particles (u, v):");
    for p in &particles {
        println!("  ({:.1}, {:.1})", p.state.u, p.state.v);
    }

    for (label, image) in [("without frame", None), ("with frame", Some(&frame))] {
        let res = optimize(&track, particles.clone(), image, Vec::new(), &cfg, &rng, 2);
        let off = (res.gbest_state.u - 149.0).hypot(res.gbest_state.v - 120.0);
        println!(
            "{label:>14}: gbest at ({:.1}, {:.1}), {off:.1} px from the target, fitness {:.3}",
            res.gbest_state.u, res.gbest_state.v, res.gbest_fitness
        );
    }
    Ok(())
}
