//! 8-bit grayscale rasters and sub-pixel patch sampling.

use crate::error::{Error, Result};
use crate::geometry::FrameDims;
use crate::BBox64;

/// Grayscale frame, row-major, one byte per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    dims: FrameDims,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(dims: FrameDims, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != dims.pixel_count() {
            return Err(Error::LengthMismatch {
                what: "frame pixels",
                got: pixels.len(),
                expected: dims.pixel_count(),
            });
        }
        Ok(Self { dims, pixels })
    }

    pub fn filled(dims: FrameDims, value: u8) -> Self {
        Self {
            dims,
            pixels: vec![value; dims.pixel_count()],
        }
    }

    pub fn from_fn(dims: FrameDims, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(dims.pixel_count());
        for y in 0..dims.height {
            for x in 0..dims.width {
                pixels.push(f(x, y));
            }
        }
        Self { dims, pixels }
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn width(&self) -> u32 {
        self.dims.width
    }

    pub fn height(&self) -> u32 {
        self.dims.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.dims.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        let w = self.dims.width as usize;
        self.pixels[y as usize * w + x as usize] = v;
    }

    /// Intensity in `[0, 1]` at a continuous position, bilinear between pixel
    /// centers (pixel `(i, j)` is centered at `(i + 0.5, j + 0.5)`), edges
    /// replicated.
    pub fn sample(&self, x: f64, y: f64) -> f32 {
        let (x0, x1, fx) = axis_taps(x - 0.5, self.dims.width);
        let (y0, y1, fy) = axis_taps(y - 0.5, self.dims.height);
        self.bilinear(x0, x1, fx, y0, y1, fy)
    }

    #[inline]
    fn bilinear(&self, x0: usize, x1: usize, fx: f32, y0: usize, y1: usize, fy: f32) -> f32 {
        let w = self.dims.width as usize;
        let p = &self.pixels;
        let top = p[y0 * w + x0] as f32 * (1.0 - fx) + p[y0 * w + x1] as f32 * fx;
        let bot = p[y1 * w + x0] as f32 * (1.0 - fx) + p[y1 * w + x1] as f32 * fx;
        (top * (1.0 - fy) + bot * fy) / 255.0
    }

    /// Resamples the area under `b` onto a `res x res` grid (sample centers at
    /// `(i + 0.5) / res` of the box extent). Row-major output in `[0, 1]`.
    pub fn sample_patch(&self, b: &BBox64, res: usize) -> Vec<f32> {
        let mut out = vec![0.0; res * res];
        self.sample_patch_into(b, res, &mut out);
        out
    }

    pub fn sample_patch_into(&self, b: &BBox64, res: usize, out: &mut [f32]) {
        debug_assert_eq!(out.len(), res * res);
        let step_x = b.w() / res as f64;
        let step_y = b.h() / res as f64;
        let cols: Vec<(usize, usize, f32)> = (0..res)
            .map(|i| axis_taps(b.x() + (i as f64 + 0.5) * step_x - 0.5, self.dims.width))
            .collect();
        for j in 0..res {
            let (y0, y1, fy) = axis_taps(b.y() + (j as f64 + 0.5) * step_y - 0.5, self.dims.height);
            let row = &mut out[j * res..(j + 1) * res];
            for (dst, &(x0, x1, fx)) in row.iter_mut().zip(&cols) {
                *dst = self.bilinear(x0, x1, fx, y0, y1, fy);
            }
        }
    }

    /// Copies the integer rectangle `(x, y, w, h)` out of the frame.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Frame> {
        if w == 0 || h == 0 || x + w > self.width() || y + h > self.height() {
            return Err(Error::InvalidArgument(format!(
                "crop ({x}, {y}, {w}, {h}) outside {}x{} frame",
                self.width(),
                self.height()
            )));
        }
        let dims = FrameDims::new(w, h)?;
        Ok(Frame::from_fn(dims, |i, j| self.get(x + i, y + j)))
    }

    /// Pastes `src` with its top-left pixel at `(x, y)`; parts outside are dropped.
    pub fn paste(&mut self, src: &Frame, x: i64, y: i64) {
        for j in 0..src.height() {
            for i in 0..src.width() {
                let (px, py) = (x + i as i64, y + j as i64);
                if px >= 0 && py >= 0 && px < self.width() as i64 && py < self.height() as i64 {
                    self.set(px as u32, py as u32, src.get(i, j));
                }
            }
        }
    }
}

/// Neighbouring pixel indices and interpolation weight along one axis for a
/// position expressed in pixel-center coordinates.
#[inline]
fn axis_taps(pos: f64, len: u32) -> (usize, usize, f32) {
    let max = (len - 1) as f64;
    let p = pos.clamp(0.0, max);
    let i0 = p.floor();
    let f = (p - i0) as f32;
    let i0 = i0 as usize;
    let i1 = (i0 + 1).min(len as usize - 1);
    (i0, i1, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Frame {
        Frame::from_fn(FrameDims::new(16, 8).unwrap(), |x, y| (x * 10 + y) as u8)
    }

    #[test]
    fn sample_hits_pixel_centers() {
        let f = ramp();
        assert!((f.sample(3.5, 2.5) - f.get(3, 2) as f32 / 255.0).abs() < 1e-6);
        let mid = f.sample(4.0, 2.5);
        assert!((mid - 37.0 / 255.0).abs() < 1e-6, "{mid}");
    }

    #[test]
    fn sample_replicates_edges() {
        let f = ramp();
        assert_eq!(f.sample(-10.0, -10.0), f.get(0, 0) as f32 / 255.0);
        assert_eq!(f.sample(100.0, 100.0), f.get(15, 7) as f32 / 255.0);
    }

    #[test]
    fn integer_aligned_patch_copies_pixels() {
        let f = ramp();
        let p = f.sample_patch(&BBox64::new(2.0, 1.0, 4.0, 4.0).unwrap(), 4);
        for j in 0..4 {
            for i in 0..4 {
                let want = f.get(2 + i as u32, 1 + j as u32) as f32 / 255.0;
                assert!((p[j * 4 + i] - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn crop_and_paste_roundtrip() {
        let f = ramp();
        let c = f.crop(3, 2, 5, 4).unwrap();
        let mut g = Frame::filled(f.dims(), 0);
        g.paste(&c, 3, 2);
        assert_eq!(g.get(5, 3), f.get(5, 3));
        assert_eq!(g.get(0, 0), 0);
        assert!(f.crop(14, 0, 5, 1).is_err());
    }

    #[test]
    fn rejects_wrong_pixel_count() {
        assert!(Frame::new(FrameDims::new(2, 2).unwrap(), vec![0; 3]).is_err());
    }
}
