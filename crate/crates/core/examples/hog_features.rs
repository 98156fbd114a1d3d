//! Appearance descriptors: HoG vectors of two textured targets, compared
//! by cosine similarity as the box drifts off each target.
//!
//! cargo run --example hog_features

use swarmtrack::appearance::{cosine_sim, extract_hog};
use swarmtrack::{BBox, GrayImage, HogConfig};

fn paint(img: &mut GrayImage, x0: usize, y0: usize, w: usize, h: usize, stripes: bool) {
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            let v = if stripes {
                if (x / 4) % 2 == 0 {
                    220
                } else {
                    60
                }
            } else if (y / 6) % 2 == 0 {
                200
            } else {
                40
            };
            img.set(x, y, v);
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut img = GrayImage::filled(320, 160, 128);
    paint(&mut img, 40, 40, 40, 80, true);
    paint(&mut img, 200, 40, 40, 80, false);

    let cfg = HogConfig::default();
    let a = BBox::from_topleft(40.0, 40.0, 40.0, 80.0)?;
    let b = BBox::from_topleft(200.0, 40.0, 40.0, 80.0)?;
    let fa = extract_hog(&img, &a, &cfg)?;
    let fb = extract_hog(&img, &b, &cfg)?;
    println!("descriptor length {} (norm {:.3})", fa.len(), fa.norm());
    println!(
        "vertical stripes vs horizontal stripes: {:.3}",
        cosine_sim(&fa, &fb)?
    );

    println!("\nshift  same target  other target");
    for dx in [0.0, 4.0, 8.0, 16.0, 32.0] {
        let moved = extract_hog(&img, &a.with_center(a.u + dx, a.v), &cfg)?;
        println!(
            "{dx:>5}  {:>11.3}  {:>12.3}",
            cosine_sim(&fa, &moved)?,
            cosine_sim(&fb, &moved)?
        );
    }
    Ok(())
}
