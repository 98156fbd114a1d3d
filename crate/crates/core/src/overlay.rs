//! Box drawing on grayscale frames: solid white outlines for matched
//! tracks, dashed black-and-white outlines for coasted ones.

use crate::appearance::GrayImage;
use crate::geometry::BBox;
use crate::lifecycle::TrackStatus;

/// Outline thickness in pixels.
pub const THICKNESS: i64 = 2;
/// Dash period for coasted tracks.
pub const DASH: i64 = 4;

pub fn draw_box(img: &mut GrayImage, b: &BBox, status: TrackStatus) {
    let x0 = b.left().round() as i64;
    let y0 = b.top().round() as i64;
    let x1 = b.right().round() as i64 - 1;
    let y1 = b.bottom().round() as i64 - 1;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut put = |x: i64, y: i64, along: i64| {
        if x < 0 || y < 0 || x >= w || y >= h {
            return;
        }
        let value = match status {
            TrackStatus::Weak if (along / DASH) % 2 == 1 => 0,
            _ => 255,
        };
        img.set(x as usize, y as usize, value);
    };
    for k in 0..THICKNESS {
        for x in x0..=x1 {
            put(x, y0 + k, x - x0);
            put(x, y1 - k, x - x0);
        }
        for y in y0..=y1 {
            put(x0 + k, y, y - y0);
            put(x1 - k, y, y - y0);
        }
    }
}
