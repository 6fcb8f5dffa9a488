//! Rectangle arithmetic shared by every stage of the tracker.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Axis-aligned rectangle `(x, y, w, h)` in continuous pixel coordinates,
/// `x`/`y` being the left/top edge. Width and height are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    x: T,
    y: T,
    w: T,
    h: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Result<Self> {
        if !(w > T::zero() && h > T::zero()) || x.partial_cmp(&x).is_none() || y.partial_cmp(&y).is_none() {
            return Err(Error::InvalidBox(format!("({x}, {y}, {w}, {h})")));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn from_corners(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        let w = x1 - x0.clone();
        let h = y1 - y0.clone();
        Self::new(x0, y0, w, h)
    }

    pub fn x(&self) -> T {
        self.x.clone()
    }

    pub fn y(&self) -> T {
        self.y.clone()
    }

    pub fn w(&self) -> T {
        self.w.clone()
    }

    pub fn h(&self) -> T {
        self.h.clone()
    }

    pub fn right(&self) -> T {
        self.x.clone() + self.w.clone()
    }

    pub fn bottom(&self) -> T {
        self.y.clone() + self.h.clone()
    }

    pub fn center(&self) -> (T, T) {
        (
            self.x.clone() + self.w.clone() / T::two(),
            self.y.clone() + self.h.clone() / T::two(),
        )
    }

    pub fn area(&self) -> T {
        self.w.clone() * self.h.clone()
    }

    /// Box of the given size whose center is `(cx, cy)`.
    pub fn centered(cx: T, cy: T, w: T, h: T) -> Result<Self> {
        let x = cx - w.clone() / T::two();
        let y = cy - h.clone() / T::two();
        Self::new(x, y, w, h)
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self {
            x: self.x.clone() + dx,
            y: self.y.clone() + dy,
            w: self.w.clone(),
            h: self.h.clone(),
        }
    }

    /// Overlapping rectangle, `None` when the overlap has zero area.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let x0 = T::max_of(self.x(), other.x());
        let y0 = T::max_of(self.y(), other.y());
        let x1 = T::min_of(self.right(), other.right());
        let y1 = T::min_of(self.bottom(), other.bottom());
        Self::from_corners(x0, y0, x1, y1).ok()
    }

    /// True when `other` lies inside `self` (edges may touch).
    pub fn contains(&self, other: &Self) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// Converts the coordinates into another scalar type.
    pub fn cast<U: Scalar>(&self) -> BBox<U> {
        BBox {
            x: U::from_f64_lossy(self.x.to_f64_lossy()),
            y: U::from_f64_lossy(self.y.to_f64_lossy()),
            w: U::from_f64_lossy(self.w.to_f64_lossy()),
            h: U::from_f64_lossy(self.h.to_f64_lossy()),
        }
    }
}

impl<T: Real> BBox<T> {
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Same center, each side multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let (cx, cy) = self.center();
        Self::centered(cx, cy, self.w * factor, self.h * factor)
    }
}

impl<T: fmt::Display> fmt::Display for BBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.w, self.h)
    }
}

/// Extent of a frame in whole pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameDims {
    pub width: u32,
    pub height: u32,
}

impl FrameDims {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    /// The frame as a box anchored at the origin.
    pub fn rect<T: Scalar>(&self) -> BBox<T> {
        BBox {
            x: T::zero(),
            y: T::zero(),
            w: T::from_u32(self.width).expect("u32 fits scalar"),
            h: T::from_u32(self.height).expect("u32 fits scalar"),
        }
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Intersection over union of two boxes using continuous areas.
pub fn iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    if a == b {
        return T::one();
    }
    match a.intersection(b) {
        None => T::zero(),
        Some(inter) => {
            let inter = inter.area();
            let union = a.area() + b.area() - inter.clone();
            // float corners can make the intersection a hair larger than the box
            T::min_of(inter / union, T::one())
        }
    }
}

/// Squared Euclidean distance between box centers.
pub fn center_distance_sq<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    let dx = ax - bx;
    let dy = ay - by;
    dx.clone() * dx + dy.clone() * dy
}

pub fn center_distance<T: Real>(a: &BBox<T>, b: &BBox<T>) -> T {
    center_distance_sq(a, b).sqrt()
}

/// `b` intersected with the frame. Errors when nothing of `b` is inside.
pub fn clip<T: Scalar>(b: &BBox<T>, dims: FrameDims) -> Result<BBox<T>> {
    clip_to(b, &dims.rect())
        .ok_or(Error::OutsideFrame { width: dims.width, height: dims.height })
}

/// `b` intersected with an arbitrary bounding rectangle.
pub fn clip_to<T: Scalar>(b: &BBox<T>, bounds: &BBox<T>) -> Option<BBox<T>> {
    b.intersection(bounds)
}

/// Region centered on `b` with each side scaled by `side_scale`, before clipping.
pub fn expand_unclipped<T: Scalar>(b: &BBox<T>, side_scale: T) -> Result<BBox<T>> {
    if !(side_scale >= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "region scale must be >= 1, got {side_scale}"
        )));
    }
    let (cx, cy) = b.center();
    BBox::centered(cx, cy, b.w() * side_scale.clone(), b.h() * side_scale)
}

/// Search region of `side_scale^2` times the area of `b`, same center and
/// aspect ratio, clipped to the frame.
pub fn expand_region<T: Scalar>(b: &BBox<T>, side_scale: T, dims: FrameDims) -> Result<BBox<T>> {
    clip(&expand_unclipped(b, side_scale)?, dims)
}

/// Square region with the same area as [`expand_region`] would produce.
pub fn expand_region_square<T: Real>(
    b: &BBox<T>,
    side_scale: T,
    dims: FrameDims,
) -> Result<BBox<T>> {
    if !(side_scale >= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "region scale must be >= 1, got {side_scale}"
        )));
    }
    let (cx, cy) = b.center();
    let side = (b.w() * b.h()).sqrt() * side_scale;
    clip(&BBox::centered(cx, cy, side, side)?, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> BBox<f64> {
        BBox::new(x, y, w, h).unwrap()
    }

    fn dims(w: u32, h: u32) -> FrameDims {
        FrameDims::new(w, h).unwrap()
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(BBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, 1.0, -1.0).is_err());
        assert!(BBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(FrameDims::new(0, 10).is_err());
    }

    #[test]
    fn iou_examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(20.0, 20.0, 5.0, 5.0)), 0.0);
        assert_abs_diff_eq!(iou(&a, &b(5.0, 0.0, 10.0, 10.0)), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn iou_touching_edges_is_zero() {
        assert_eq!(iou(&b(0.0, 0.0, 10.0, 10.0), &b(10.0, 0.0, 10.0, 10.0)), 0.0);
    }

    #[test]
    fn center_distance_examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(center_distance(&a, &a), 0.0);
        assert_eq!(center_distance(&a, &b(3.0, 4.0, 10.0, 10.0)), 5.0);
        assert_eq!(center_distance(&b(0.0, 0.0, 2.0, 2.0), &b(10.0, 0.0, 2.0, 2.0)), 10.0);
    }

    #[test]
    fn expand_region_examples() {
        let r = expand_region(&b(100.0, 100.0, 20.0, 10.0), 5.0, dims(1000, 1000)).unwrap();
        assert_eq!(r, b(60.0, 80.0, 100.0, 50.0));
        let r = expand_region(&b(100.0, 100.0, 20.0, 10.0), 1.0, dims(1000, 1000)).unwrap();
        assert_eq!(r, b(100.0, 100.0, 20.0, 10.0));
        // ideal region (-38, -18, 100, 50) clamped at the top-left corner
        let ideal = expand_unclipped(&b(2.0, 2.0, 20.0, 10.0), 5.0).unwrap();
        assert_eq!(ideal, b(-38.0, -18.0, 100.0, 50.0));
        let r = expand_region(&b(2.0, 2.0, 20.0, 10.0), 5.0, dims(200, 200)).unwrap();
        assert_eq!(r, b(0.0, 0.0, 62.0, 32.0));
    }

    #[test]
    fn expand_region_rejects_shrinking() {
        assert!(expand_region(&b(0.0, 0.0, 5.0, 5.0), 0.5, dims(10, 10)).is_err());
    }

    #[test]
    fn square_region_has_same_area() {
        let r = expand_region_square(&b(100.0, 100.0, 40.0, 10.0), 3.0, dims(1000, 1000)).unwrap();
        assert_abs_diff_eq!(r.w(), r.h());
        assert_abs_diff_eq!(r.area(), 9.0 * 400.0, epsilon = 1e-9);
        assert_eq!(r.center(), (120.0, 105.0));
    }

    #[test]
    fn clip_examples() {
        let d = dims(100, 100);
        assert_eq!(clip(&b(-5.0, -5.0, 20.0, 20.0), d).unwrap(), b(0.0, 0.0, 15.0, 15.0));
        assert_eq!(clip(&b(10.0, 10.0, 5.0, 5.0), d).unwrap(), b(10.0, 10.0, 5.0, 5.0));
        assert!(matches!(
            clip(&b(200.0, 200.0, 5.0, 5.0), d),
            Err(Error::OutsideFrame { .. })
        ));
    }

    #[test]
    fn exact_rational_iou() {
        let r = |n: i64| BigRational::from_integer(n.into());
        let a = BBox::new(r(0), r(0), r(10), r(10)).unwrap();
        let c = BBox::new(r(5), r(0), r(10), r(10)).unwrap();
        assert_eq!(iou(&a, &c), BigRational::new(1.into(), 3.into()));
    }

    /// Pixel-count oracle: number of unit cells covered by the intersection
    /// and union of two integer-aligned boxes.
    fn raster_iou(a: (i32, i32, i32, i32), c: (i32, i32, i32, i32)) -> f64 {
        let inside = |bx: (i32, i32, i32, i32), px: i32, py: i32| {
            px >= bx.0 && px < bx.0 + bx.2 && py >= bx.1 && py < bx.1 + bx.3
        };
        let (mut inter, mut uni) = (0u32, 0u32);
        for py in -5..150 {
            for px in -5..150 {
                let (ia, ic) = (inside(a, px, py), inside(c, px, py));
                inter += (ia && ic) as u32;
                uni += (ia || ic) as u32;
            }
        }
        inter as f64 / uni as f64
    }

    fn arb_box() -> impl Strategy<Value = BBox<f64>> {
        (-50.0..200.0f64, -50.0..200.0f64, 0.5..80.0f64, 0.5..80.0f64)
            .prop_map(|(x, y, w, h)| BBox::new(x, y, w, h).unwrap())
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), c in arb_box()) {
            let v = iou(&a, &c);
            prop_assert_eq!(v, iou(&c, &a));
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn iou_matches_raster_count(
            ax in 0..60i32, ay in 0..60i32, aw in 10..60i32, ah in 10..60i32,
            cx in 0..60i32, cy in 0..60i32, cw in 10..60i32, ch in 10..60i32,
        ) {
            let a = b(ax as f64, ay as f64, aw as f64, ah as f64);
            let c = b(cx as f64, cy as f64, cw as f64, ch as f64);
            let oracle = raster_iou((ax, ay, aw, ah), (cx, cy, cw, ch));
            prop_assert!((iou(&a, &c) - oracle).abs() <= 0.02);
        }

        #[test]
        fn expansion_keeps_center_and_scales_area(a in arb_box(), k in 1.0..20.0f64) {
            let e = expand_unclipped(&a, k).unwrap();
            let (c0, c1) = (a.center(), e.center());
            prop_assert!((c0.0 - c1.0).abs() < 1e-9 && (c0.1 - c1.1).abs() < 1e-9);
            prop_assert!((e.area() / a.area() - k * k).abs() < 1e-9 * k * k);
        }

        #[test]
        fn unit_expansion_is_identity_inside_frame(
            x in 0.0..100.0f64, y in 0.0..100.0f64, w in 1.0..50.0f64, h in 1.0..50.0f64,
        ) {
            let a = b(x, y, w, h);
            let e = expand_region(&a, 1.0, dims(200, 200)).unwrap();
            prop_assert!((e.x() - x).abs() < 1e-12 && (e.y() - y).abs() < 1e-12);
            prop_assert!((e.w() - w).abs() < 1e-12 && (e.h() - h).abs() < 1e-12);
        }
    }
}
