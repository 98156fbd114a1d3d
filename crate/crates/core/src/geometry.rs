//! Center-format bounding boxes and the overlap/distance measures shared by
//! every stage of the tracker.
//!
//! Boxes are stored as `(u, v, w, h)`: the center `(u, v)` and the size
//! `(w, h)`, all in pixels. Distances between states are measured between
//! centers only; size mismatch is accounted for by [`iou`].

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("box size must be positive, got {w} x {h}")]
    NonPositiveSize { w: f64, h: f64 },
    #[error("box coordinates must be finite")]
    NonFinite,
}

/// Axis-aligned bounding box in center format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub h: f64,
}

/// Per-frame rates of change of a [`BBox`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity4 {
    pub du: f64,
    pub dv: f64,
    pub dw: f64,
    pub dh: f64,
}

impl BBox {
    /// Builds a box, rejecting non-finite values and non-positive sizes.
    pub fn new(u: f64, v: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        if !(u.is_finite() && v.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(GeometryError::NonPositiveSize { w, h });
        }
        Ok(Self { u, v, w, h })
    }

    /// Builds a box from MOTChallenge top-left coordinates.
    pub fn from_topleft(left: f64, top: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        Self::new(left + w / 2.0, top + h / 2.0, w, h)
    }

    /// Returns `(left, top, w, h)`.
    pub fn to_topleft(&self) -> (f64, f64, f64, f64) {
        (self.u - self.w / 2.0, self.v - self.h / 2.0, self.w, self.h)
    }

    pub fn left(&self) -> f64 {
        self.u - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.v - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.u + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.v + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> [f64; 2] {
        [self.u, self.v]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.u, self.v, self.w, self.h]
    }

    /// Inverse of [`BBox::as_array`]; sizes are floored at `min_size` so the
    /// result always satisfies the type invariants.
    pub fn from_array_clamped(a: [f64; 4], min_size: f64) -> Self {
        Self {
            u: a[0],
            v: a[1],
            w: a[2].max(min_size),
            h: a[3].max(min_size),
        }
    }

    /// Same size, center moved to `(u, v)`.
    pub fn with_center(&self, u: f64, v: f64) -> Self {
        Self { u, v, ..*self }
    }

    /// Length of the box diagonal, `sqrt(w² + h²)`.
    pub fn diag(&self) -> f64 {
        self.w.hypot(self.h)
    }

    pub fn contains_point(&self, u: f64, v: f64) -> bool {
        u >= self.left() && u <= self.right() && v >= self.top() && v <= self.bottom()
    }
}

impl Velocity4 {
    pub const ZERO: Velocity4 = Velocity4 {
        du: 0.0,
        dv: 0.0,
        dw: 0.0,
        dh: 0.0,
    };

    pub fn new(du: f64, dv: f64, dw: f64, dh: f64) -> Self {
        Self { du, dv, dw, dh }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.du, self.dv, self.dw, self.dh]
    }

    /// Magnitude of the center part `(du, dv)`.
    pub fn center_speed(&self) -> f64 {
        self.du.hypot(self.dv)
    }

    /// Componentwise clamp to `[-cap, cap]`.
    pub fn clamp_to(&self, cap: &Velocity4) -> Self {
        Self::new(
            self.du.clamp(-cap.du, cap.du),
            self.dv.clamp(-cap.dv, cap.dv),
            self.dw.clamp(-cap.dw, cap.dw),
            self.dh.clamp(-cap.dh, cap.dh),
        )
    }
}

impl Add for Velocity4 {
    type Output = Velocity4;
    fn add(self, o: Velocity4) -> Velocity4 {
        Velocity4::new(
            self.du + o.du,
            self.dv + o.dv,
            self.dw + o.dw,
            self.dh + o.dh,
        )
    }
}

impl Sub for Velocity4 {
    type Output = Velocity4;
    fn sub(self, o: Velocity4) -> Velocity4 {
        Velocity4::new(
            self.du - o.du,
            self.dv - o.dv,
            self.dw - o.dw,
            self.dh - o.dh,
        )
    }
}

impl Mul<f64> for Velocity4 {
    type Output = Velocity4;
    fn mul(self, k: f64) -> Velocity4 {
        Velocity4::new(self.du * k, self.dv * k, self.dw * k, self.dh * k)
    }
}

/// A detector output: a box and its confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub conf: f64,
}

impl Detection {
    pub fn new(bbox: BBox, conf: f64) -> Self {
        Self { bbox, conf }
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.left().max(b.left())).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Euclidean distance between box centers.
pub fn center_distance(a: &BBox, b: &BBox) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}

/// Length of the box diagonal.
pub fn diag(a: &BBox) -> f64 {
    a.diag()
}

/// Componentwise median of a non-empty set of equal-length vectors; even
/// counts average the two middle values.
pub(crate) fn componentwise_median<const N: usize>(items: &[[f64; N]]) -> [f64; N] {
    let mut out = [0.0; N];
    for (d, slot) in out.iter_mut().enumerate() {
        let mut col: Vec<f64> = items.iter().map(|x| x[d]).collect();
        *slot = median_in_place(&mut col);
    }
    out
}

/// Median of a slice (sorted in place). Returns 0 for an empty slice.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let q = values.len();
    if q % 2 == 1 {
        values[q / 2]
    } else {
        0.5 * (values[q / 2 - 1] + values[q / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(u: f64, v: f64, w: f64, h: f64) -> BBox {
        BBox::new(u, v, w, h).unwrap()
    }

    /// Counts covered cells of a fine grid; independent of the analytic
    /// interval-overlap route.
    fn raster_iou(a: &BBox, bx: &BBox, step: f64) -> f64 {
        let x0 = a.left().min(bx.left());
        let x1 = a.right().max(bx.right());
        let y0 = a.top().min(bx.top());
        let y1 = a.bottom().max(bx.bottom());
        let (mut inter, mut uni) = (0u64, 0u64);
        let mut y = y0 + step / 2.0;
        while y < y1 {
            let mut x = x0 + step / 2.0;
            while x < x1 {
                let ia = a.contains_point(x, y);
                let ib = bx.contains_point(x, y);
                if ia && ib {
                    inter += 1;
                }
                if ia || ib {
                    uni += 1;
                }
                x += step;
            }
            y += step;
        }
        if uni == 0 {
            0.0
        } else {
            inter as f64 / uni as f64
        }
    }

    #[test]
    fn iou_identity_and_disjoint() {
        let a = b(10.0, 10.0, 4.0, 4.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&b(0.0, 0.0, 2.0, 2.0), &b(100.0, 100.0, 2.0, 2.0)), 0.0);
    }

    #[test]
    fn iou_half_shift_matches_raster_oracle() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        let c = b(1.0, 0.0, 2.0, 2.0);
        let oracle = raster_iou(&a, &c, 0.01);
        assert!((oracle - 1.0 / 3.0).abs() < 1e-3);
        assert!((iou(&a, &c) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn center_distance_examples() {
        let a = b(0.0, 0.0, 1.0, 1.0);
        assert_eq!(center_distance(&a, &a), 0.0);
        assert_eq!(center_distance(&a, &b(3.0, 4.0, 2.0, 2.0)), 5.0);
        assert_eq!(
            center_distance(&b(1.0, 1.0, 1.0, 1.0), &b(4.0, 5.0, 1.0, 1.0)),
            5.0
        );
    }

    #[test]
    fn diag_examples() {
        assert_eq!(diag(&b(0.0, 0.0, 3.0, 4.0)), 5.0);
        assert!((diag(&b(0.0, 0.0, 1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(diag(&b(5.0, 5.0, 6.0, 8.0)), 10.0);
    }

    #[test]
    fn topleft_conversions() {
        assert_eq!(
            BBox::from_topleft(100.0, 200.0, 50.0, 100.0).unwrap(),
            b(125.0, 250.0, 50.0, 100.0)
        );
        assert_eq!(
            BBox::from_topleft(0.0, 0.0, 2.0, 2.0).unwrap(),
            b(1.0, 1.0, 2.0, 2.0)
        );
        let a = b(10.0, 10.0, 4.0, 4.0);
        let (l, t, w, h) = a.to_topleft();
        assert_eq!(BBox::from_topleft(l, t, w, h).unwrap(), a);
        assert!(matches!(
            BBox::from_topleft(0.0, 0.0, 0.0, 2.0),
            Err(GeometryError::NonPositiveSize { .. })
        ));
        assert!(BBox::from_topleft(0.0, 0.0, 3.0, -1.0).is_err());
        assert!(BBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median_in_place(&mut []), 0.0);
    }

    fn int_box() -> impl Strategy<Value = BBox> {
        (-20i32..20, -20i32..20, 1i32..12, 1i32..12).prop_map(|(l, t, w, h)| {
            BBox::from_topleft(l as f64, t as f64, w as f64, h as f64).unwrap()
        })
    }

    fn any_box() -> impl Strategy<Value = BBox> {
        (-1e3..1e3f64, -1e3..1e3f64, 0.1..300.0f64, 0.1..300.0f64)
            .prop_map(|(u, v, w, h)| b(u, v, w, h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in any_box(), c in any_box()) {
            let x = iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(x, iou(&c, &a));
        }

        #[test]
        fn iou_agrees_with_raster_on_integer_boxes(a in int_box(), c in int_box()) {
            // step 1/8 places cell centers strictly inside integer-aligned cells
            let oracle = raster_iou(&a, &c, 0.125);
            prop_assert!((iou(&a, &c) - oracle).abs() < 1e-3);
        }

        #[test]
        fn topleft_round_trip_exact(l in -8000i32..8000, t in -8000i32..8000, w in 1i32..4000, h in 1i32..4000) {
            // dyadic coordinates: the half-size shifts are exact in binary
            let (l, t, w, h) = (l as f64 / 8.0, t as f64 / 8.0, w as f64 / 4.0, h as f64 / 4.0);
            let bx = BBox::from_topleft(l, t, w, h).unwrap();
            prop_assert_eq!(bx.to_topleft(), (l, t, w, h));
        }

        #[test]
        fn center_distance_triangle(a in any_box(), c in any_box(), d in any_box()) {
            let ab = center_distance(&a, &c);
            let bc = center_distance(&c, &d);
            let ac = center_distance(&a, &d);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(ab, center_distance(&c, &a));
        }
    }
}
