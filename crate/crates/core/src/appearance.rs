//! HoG appearance descriptors over grayscale frames and the cosine
//! similarity used by the appearance part of the particle fitness.
//!
//! Every box is resampled (bilinear) to a square canonical patch before the
//! gradient histograms are built, so all descriptors in a run share one
//! length regardless of box size.

use thiserror::Error;

use crate::geometry::BBox;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppearanceError {
    #[error("box lies entirely outside the {width}x{height} image")]
    OutOfFrame { width: usize, height: usize },
    #[error("feature length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("image buffer has {got} pixels, expected {expected}")]
    BadImageSize { expected: usize, got: usize },
}

/// Row-major 8-bit luminance image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, AppearanceError> {
        let expected = width * height;
        if width == 0 || height == 0 || pixels.len() != expected {
            return Err(AppearanceError::BadImageSize {
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image of constant intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width: width.max(1),
            height: height.max(1),
            pixels: vec![value; width.max(1) * height.max(1)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at
    /// integer positions), clamped to the image border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let p = |xx, yy| self.get(xx, yy) as f64;
        let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
        let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// HoG layout. The defaults give a 48x48 patch, 8x8 cells, 9 unsigned bins
/// and 2x2-cell blocks with stride one cell (900 values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogConfig {
    pub patch: usize,
    pub cell: usize,
    pub bins: usize,
    pub block: usize,
    /// L2-Hys clipping level applied after the first block normalization.
    pub clip: f64,
}

impl Default for HogConfig {
    fn default() -> Self {
        Self {
            patch: 48,
            cell: 8,
            bins: 9,
            block: 2,
            clip: 0.2,
        }
    }
}

impl HogConfig {
    pub fn cells_per_side(&self) -> usize {
        self.patch / self.cell
    }

    pub fn blocks_per_side(&self) -> usize {
        self.cells_per_side() + 1 - self.block
    }

    pub fn block_len(&self) -> usize {
        self.block * self.block * self.bins
    }

    /// Length of every descriptor produced with this configuration.
    pub fn descriptor_len(&self) -> usize {
        let b = self.blocks_per_side();
        b * b * self.block_len()
    }

    pub fn is_valid(&self) -> bool {
        self.patch > 0
            && self.cell > 0
            && self.bins > 0
            && self.block > 0
            && self.patch.is_multiple_of(self.cell)
            && self.block <= self.cells_per_side()
            && self.clip > 0.0
    }
}

/// Non-negative appearance descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVec(Vec<f64>);

impl FeatureVec {
    /// Wraps raw values; negative entries are clamped to zero.
    pub fn new(values: Vec<f64>) -> Self {
        Self(values.into_iter().map(|x| x.max(0.0)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Cosine similarity of two non-negative descriptors, in `[0, 1]`.
///
/// A zero-magnitude operand carries no identity evidence and scores 0.
pub fn cosine_sim(a: &FeatureVec, b: &FeatureVec) -> Result<f64, AppearanceError> {
    if a.len() != b.len() {
        return Err(AppearanceError::LengthMismatch(a.len(), b.len()));
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

/// Resamples `bbox` from `img` to a `patch x patch` grid.
pub fn resample_patch(
    img: &GrayImage,
    bbox: &BBox,
    patch: usize,
) -> Result<Vec<f64>, AppearanceError> {
    let overlaps = bbox.right() > 0.0
        && bbox.left() < img.width() as f64
        && bbox.bottom() > 0.0
        && bbox.top() < img.height() as f64;
    if !overlaps {
        return Err(AppearanceError::OutOfFrame {
            width: img.width(),
            height: img.height(),
        });
    }
    let sx = bbox.w / patch as f64;
    let sy = bbox.h / patch as f64;
    let (left, top) = (bbox.left(), bbox.top());
    let mut out = Vec::with_capacity(patch * patch);
    for r in 0..patch {
        // pixel (i, j) covers [j, j+1) so its center sits at j + 0.5
        let y = top + (r as f64 + 0.5) * sy - 0.5;
        for c in 0..patch {
            let x = left + (c as f64 + 0.5) * sx - 0.5;
            out.push(img.sample_bilinear(x, y));
        }
    }
    Ok(out)
}

/// Per-cell orientation histograms of a square patch, laid out
/// `[cell_row][cell_col][bin]`.
pub fn cell_histograms(patch: &[f64], cfg: &HogConfig) -> Vec<f64> {
    let n = cfg.patch;
    let cells = cfg.cells_per_side();
    let bin_width = std::f64::consts::PI / cfg.bins as f64;
    let mut hist = vec![0.0; cells * cells * cfg.bins];
    let at = |x: usize, y: usize| patch[y * n + x];
    for y in 0..n {
        for x in 0..n {
            let gx = at((x + 1).min(n - 1), y) - at(x.saturating_sub(1), y);
            let gy = at(x, (y + 1).min(n - 1)) - at(x, y.saturating_sub(1));
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += std::f64::consts::PI;
            }
            if theta >= std::f64::consts::PI {
                theta -= std::f64::consts::PI;
            }
            // linear vote between the two nearest bin centers (centers at
            // (k + 0.5) * bin_width), wrapping around 0/pi
            let pos = theta / bin_width - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_bin = (lo as i64).rem_euclid(cfg.bins as i64) as usize;
            let hi_bin = (lo_bin + 1) % cfg.bins;
            let cell = (y / cfg.cell) * cells + x / cfg.cell;
            hist[cell * cfg.bins + lo_bin] += mag * (1.0 - frac);
            hist[cell * cfg.bins + hi_bin] += mag * frac;
        }
    }
    hist
}

/// Groups cell histograms into overlapping blocks with L2-Hys normalization.
pub fn block_normalize(hist: &[f64], cfg: &HogConfig) -> Vec<f64> {
    let cells = cfg.cells_per_side();
    let nb = cfg.blocks_per_side();
    let mut out = Vec::with_capacity(cfg.descriptor_len());
    let mut block = vec![0.0; cfg.block_len()];
    for by in 0..nb {
        for bx in 0..nb {
            let mut k = 0;
            for cy in by..by + cfg.block {
                for cx in bx..bx + cfg.block {
                    let start = (cy * cells + cx) * cfg.bins;
                    block[k..k + cfg.bins].copy_from_slice(&hist[start..start + cfg.bins]);
                    k += cfg.bins;
                }
            }
            l2_normalize(&mut block);
            for x in block.iter_mut() {
                *x = x.min(cfg.clip);
            }
            l2_normalize(&mut block);
            out.extend_from_slice(&block);
        }
    }
    out
}

fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-12 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    } else {
        v.fill(0.0);
    }
}

/// HoG descriptor of the region `bbox` of `img`.
pub fn extract_hog(
    img: &GrayImage,
    bbox: &BBox,
    cfg: &HogConfig,
) -> Result<FeatureVec, AppearanceError> {
    let patch = resample_patch(img, bbox, cfg.patch)?;
    let hist = cell_histograms(&patch, cfg);
    Ok(FeatureVec(block_normalize(&hist, cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(v: &[f64]) -> FeatureVec {
        FeatureVec::new(v.to_vec())
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_sim(&fv(&[0.3, 0.2]), &fv(&[0.3, 0.2])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_sim(&fv(&[1.0, 0.0]), &fv(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine_sim(&fv(&[1.0, 1.0, 0.0]), &fv(&[1.0, 0.0, 0.0])).unwrap();
        assert!((c - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vector_and_mismatch() {
        assert_eq!(cosine_sim(&fv(&[0.0, 0.0]), &fv(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(
            cosine_sim(&fv(&[1.0]), &fv(&[1.0, 0.0])),
            Err(AppearanceError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn flat_patch_gives_zero_descriptor() {
        let img = GrayImage::filled(100, 100, 128);
        let bbox = BBox::new(50.0, 50.0, 30.0, 40.0).unwrap();
        let f = extract_hog(&img, &bbox, &HogConfig::default()).unwrap();
        assert_eq!(f.len(), 900);
        assert!(f.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vertical_edge_votes_horizontal_gradient_bins() {
        // 8x8 patch, one cell: left half 0, right half 255
        let cfg = HogConfig {
            patch: 8,
            cell: 8,
            bins: 9,
            block: 1,
            clip: 0.2,
        };
        let patch: Vec<f64> = (0..64)
            .map(|i| if i % 8 < 4 { 0.0 } else { 255.0 })
            .collect();
        let hist = cell_histograms(&patch, &cfg);
        // gradient (255, 0) on columns 3 and 4 of every row: theta = 0, which
        // sits halfway between the centers of bins 0 and 8
        let total: f64 = hist.iter().sum();
        assert!((total - 16.0 * 255.0).abs() < 1e-9);
        assert!((hist[0] - 8.0 * 255.0).abs() < 1e-9);
        assert!((hist[8] - 8.0 * 255.0).abs() < 1e-9);
        assert!(hist[1..8].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn extraction_is_deterministic_and_fixed_length() {
        let mut img = GrayImage::filled(64, 64, 0);
        for y in 0..64 {
            for x in 0..64 {
                img.set(x, y, ((x * 7 + y * 13) % 251) as u8);
            }
        }
        let cfg = HogConfig::default();
        let a = BBox::new(20.0, 30.0, 17.0, 33.0).unwrap();
        let b = BBox::new(40.0, 40.0, 60.0, 10.0).unwrap();
        let fa = extract_hog(&img, &a, &cfg).unwrap();
        assert_eq!(fa, extract_hog(&img, &a, &cfg).unwrap());
        assert_eq!(fa.len(), extract_hog(&img, &b, &cfg).unwrap().len());
        assert_eq!(fa.len(), cfg.descriptor_len());
    }

    #[test]
    fn out_of_frame_box_is_rejected() {
        let img = GrayImage::filled(10, 10, 5);
        let bbox = BBox::new(100.0, 100.0, 4.0, 4.0).unwrap();
        assert!(matches!(
            extract_hog(&img, &bbox, &HogConfig::default()),
            Err(AppearanceError::OutOfFrame { .. })
        ));
    }

    #[test]
    fn bad_image_buffer_is_rejected() {
        assert!(GrayImage::new(3, 3, vec![0; 8]).is_err());
        assert!(GrayImage::new(0, 3, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_bounded_symmetric_scale_invariant(
            a in proptest::collection::vec(0.0..10.0f64, 6),
            b in proptest::collection::vec(0.0..10.0f64, 6),
            c in 0.01..100.0f64,
        ) {
            let (fa, fb) = (fv(&a), fv(&b));
            let s = cosine_sim(&fa, &fb).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, cosine_sim(&fb, &fa).unwrap());
            let scaled = fv(&a.iter().map(|x| x * c).collect::<Vec<_>>());
            prop_assert!((cosine_sim(&scaled, &fb).unwrap() - s).abs() < 1e-9);
        }

        #[test]
        fn block_norms_bounded(seed in 0u64..1000, u in 10.0..90.0f64, v in 10.0..90.0f64, w in 4.0..80.0f64, h in 4.0..80.0f64) {
            let mut img = GrayImage::filled(100, 100, 0);
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            for y in 0..100 {
                for x in 0..100 {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    img.set(x, y, (state >> 56) as u8);
                }
            }
            let cfg = HogConfig::default();
            let f = extract_hog(&img, &BBox::new(u, v, w, h).unwrap(), &cfg).unwrap();
            for block in f.values().chunks(cfg.block_len()) {
                let n = block.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!(n <= 1.0 + 1e-9);
            }
            prop_assert!(f.values().iter().all(|&x| x >= 0.0));
        }
    }
}
