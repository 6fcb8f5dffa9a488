//! Region-level global motion between adjacent frames by exhaustive block
//! matching.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::clip;
use crate::BBox64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionVector {
    pub dx: f64,
    pub dy: f64,
    /// Match quality in `[0, 1]`; 0 for flat or unmatched content.
    pub reliability: f64,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector {
        dx: 0.0,
        dy: 0.0,
        reliability: 0.0,
    };

    pub fn negated(&self) -> Self {
        Self {
            dx: -self.dx,
            dy: -self.dy,
            reliability: self.reliability,
        }
    }
}

/// Translates `prev_box` by the motion vector; the size is unchanged.
pub fn compensate(prev_box: &BBox64, mv: &MotionVector) -> BBox64 {
    prev_box.translate(mv.dx, mv.dy)
}

pub trait MotionEstimator: Send + Sync {
    fn estimate(&self, prev: &Frame, cur: &Frame, region: &BBox64) -> Result<MotionVector>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionConfig {
    pub search_radius: u32,
    /// Blocks larger than this are subsampled to at most `max_block` per side.
    pub max_block: u32,
    /// Below this reliability callers should treat the motion as zero.
    pub reliability_floor: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            search_radius: 16,
            max_block: 64,
            reliability_floor: 0.2,
        }
    }
}

/// Minimizes the mean absolute difference of the previous-frame region over
/// all integer displacements within the search radius.
///
/// Ties go to the smaller displacement, then to the earlier displacement in
/// row-major order, so identical frames always yield `(0, 0)`.
#[derive(Debug, Clone, Default)]
pub struct BlockMatcher {
    cfg: MotionConfig,
}

impl BlockMatcher {
    pub fn new(cfg: MotionConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &MotionConfig {
        &self.cfg
    }
}

/// Running cost of one displacement: sum of absolute differences and the
/// number of compared samples. Compared as exact rationals.
#[derive(Clone, Copy)]
struct Cost {
    sad: u64,
    n: u64,
}

impl Cost {
    fn less_than(&self, other: &Cost) -> bool {
        (self.sad as u128) * (other.n as u128) < (other.sad as u128) * (self.n as u128)
    }

    fn equals(&self, other: &Cost) -> bool {
        (self.sad as u128) * (other.n as u128) == (other.sad as u128) * (self.n as u128)
    }

    fn mean(&self) -> f64 {
        self.sad as f64 / self.n as f64
    }
}

impl MotionEstimator for BlockMatcher {
    fn estimate(&self, prev: &Frame, cur: &Frame, region: &BBox64) -> Result<MotionVector> {
        if prev.dims() != cur.dims() {
            return Err(Error::DimsMismatch(
                prev.width(),
                prev.height(),
                cur.width(),
                cur.height(),
            ));
        }
        let dims = prev.dims();
        let r = clip(region, dims)?;
        let x0 = r.x().floor().max(0.0) as i64;
        let y0 = r.y().floor().max(0.0) as i64;
        let x1 = (r.right().ceil() as i64).min(dims.width as i64).max(x0 + 1);
        let y1 = (r.bottom().ceil() as i64).min(dims.height as i64).max(y0 + 1);
        let side = (x1 - x0).max(y1 - y0) as u64;
        let step = side.div_ceil(self.cfg.max_block.max(1) as u64).max(1) as usize;

        let xs: Vec<i64> = (x0..x1).step_by(step).collect();
        let ys: Vec<i64> = (y0..y1).step_by(step).collect();
        let block: Vec<u8> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| prev.get(x as u32, y as u32)))
            .collect();
        let total = block.len() as u64;
        let mean = block.iter().map(|&v| v as f64).sum::<f64>() / total as f64;
        let ceiling = block.iter().map(|&v| (v as f64 - mean).abs()).sum::<f64>() / total as f64;

        let (w, h) = (dims.width as i64, dims.height as i64);
        let radius = self.cfg.search_radius as i64;
        let cur_px = cur.pixels();
        let mut best: Option<(Cost, i64, i64)> = None;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let mut cost = Cost { sad: 0, n: 0 };
                for (j, &y) in ys.iter().enumerate() {
                    let cy = y + dy;
                    if cy < 0 || cy >= h {
                        continue;
                    }
                    let row = &block[j * xs.len()..(j + 1) * xs.len()];
                    let base = (cy * w) as usize;
                    for (&x, &p) in xs.iter().zip(row) {
                        let cx = x + dx;
                        if cx >= 0 && cx < w {
                            cost.sad += (p as i32 - cur_px[base + cx as usize] as i32).unsigned_abs() as u64;
                            cost.n += 1;
                        }
                    }
                }
                if cost.n * 2 < total {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((b, bx, by)) => {
                        cost.less_than(b)
                            || (cost.equals(b) && dx * dx + dy * dy < bx * bx + by * by)
                    }
                };
                if better {
                    best = Some((cost, dx, dy));
                }
            }
        }
        let Some((cost, dx, dy)) = best else {
            return Ok(MotionVector::ZERO);
        };
        let reliability = if ceiling > 1e-9 {
            (1.0 - cost.mean() / ceiling).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(MotionVector {
            dx: dx as f64,
            dy: dy as f64,
            reliability,
        })
    }
}
