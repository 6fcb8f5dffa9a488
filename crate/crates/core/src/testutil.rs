//! Synthetic frames shared by unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frame::Frame;
use crate::geometry::FrameDims;
use crate::texture::Texture;
use crate::BBox64;

pub fn to_u8(v: f32, mean: f32, contrast: f32) -> u8 {
    (mean + contrast * v).round().clamp(0.0, 255.0) as u8
}

/// 160x120 frame of band-limited noise and a target box inside it.
pub fn textured_scene(seed: u64) -> (Frame, BBox64) {
    textured_scene_sized(seed, 160, 120)
}

/// Band-limited noise frame of the given size with a 40x32 box at its center.
pub fn textured_scene_sized(seed: u64, width: u32, height: u32) -> (Frame, BBox64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tex = Texture::band_limited(width as usize, height as usize, 1.2, &mut rng);
    let dims = FrameDims::new(width, height).unwrap();
    let frame = Frame::from_fn(dims, |x, y| to_u8(tex.get(x as usize, y as usize), 128.0, 40.0));
    let b = BBox64::centered(width as f64 / 2.0, height as f64 / 2.0, 40.0, 32.0).unwrap();
    (frame, b)
}

/// Flat background at the midpoint of `[lo, hi]` with one textured 40x32
/// target whose intensities span `[lo, hi]`.
pub fn flat_with_target(seed: u64, lo: u8, hi: u8) -> (Frame, BBox64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tex = Texture::band_limited(40, 32, 1.2, &mut rng);
    let (min, max) = tex
        .values()
        .iter()
        .fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let dims = FrameDims::new(200, 150).unwrap();
    let (x0, y0) = (120u32, 80u32);
    let mid = ((lo as u32 + hi as u32) / 2) as u8;
    let frame = Frame::from_fn(dims, |x, y| {
        if (x0..x0 + 40).contains(&x) && (y0..y0 + 32).contains(&y) {
            let v = (tex.get((x - x0) as usize, (y - y0) as usize) - min) / (max - min);
            (lo as f32 + v * (hi - lo) as f32).round() as u8
        } else {
            mid
        }
    });
    (frame, BBox64::new(x0 as f64, y0 as f64, 40.0, 32.0).unwrap())
}

/// Low-contrast background with a high-contrast textured target that can be
/// placed anywhere (integer positions).
pub struct MovingScene {
    pub dims: FrameDims,
    pub bg: Texture,
    pub target: Texture,
}

impl MovingScene {
    pub fn new(seed: u64, width: u32, height: u32, tw: usize, th: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            dims: FrameDims::new(width, height).unwrap(),
            bg: Texture::band_limited(width as usize, height as usize, 1.5, &mut rng),
            target: Texture::band_limited(tw, th, 1.2, &mut rng),
        }
    }

    pub fn target_box(&self, x: i64, y: i64) -> BBox64 {
        BBox64::new(x as f64, y as f64, self.target.width() as f64, self.target.height() as f64).unwrap()
    }

    /// Frame with the target's top-left corner at `(x, y)`; `None` hides it.
    pub fn render(&self, at: Option<(i64, i64)>) -> Frame {
        let (tw, th) = (self.target.width() as i64, self.target.height() as i64);
        Frame::from_fn(self.dims, |px, py| {
            if let Some((x, y)) = at {
                let (u, v) = (px as i64 - x, py as i64 - y);
                if (0..tw).contains(&u) && (0..th).contains(&v) {
                    return to_u8(self.target.get(u as usize, v as usize), 128.0, 45.0);
                }
            }
            to_u8(self.bg.get(px as usize, py as usize), 110.0, 10.0)
        })
    }
}
