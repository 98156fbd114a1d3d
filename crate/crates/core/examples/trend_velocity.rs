//! Velocity from a short, noisy history. The median of pairwise slopes
//! shrugs off two wild boxes that drag a least-squares fit far off.
//!
//! cargo run --example trend_velocity

use std::collections::VecDeque;

use swarmtrack::lifecycle::{trend_velocity, trend_velocity_timed, SlopeWindow};
use swarmtrack::BBox;

fn least_squares_slope(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_t = (n - 1.0) / 2.0;
    let mean_x = xs.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, x) in xs.iter().enumerate() {
        num += (t as f64 - mean_t) * (x - mean_x);
        den += (t as f64 - mean_t).powi(2);
    }
    num / den
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut us: Vec<f64> = (0..10).map(|t| 100.0 + 4.0 * t as f64).collect();
    us[3] += 60.0;
    us[7] -= 45.0;
    let history: VecDeque<BBox> = us
        .iter()
        .map(|&u| BBox::new(u, 200.0, 30.0, 60.0))
        .collect::<Result<_, _>>()?;

    let win = SlopeWindow {
        h: 10,
        f: 5,
        tau_scale: 1.0,
    };
    println!("true horizontal speed      4.000 px/frame");
    println!(
        "median of pairwise slopes  {:.3}",
        trend_velocity(&history, &win).du
    );
    println!("least squares              {:.3}", least_squares_slope(&us));

    // a track that missed frames 4, 5 and 8: slopes divide by the frame gap
    let timed: VecDeque<(u32, BBox)> = [1u32, 2, 3, 6, 7, 9, 10]
        .iter()
        .map(|&f| Ok((f, BBox::new(100.0 + 4.0 * f as f64, 200.0, 30.0, 60.0)?)))
        .collect::<Result<_, swarmtrack::geometry::GeometryError>>()?;
    println!(
        "with gaps in the history   {:.3}",
        trend_velocity_timed(&timed, &win).du
    );
    Ok(())
}
