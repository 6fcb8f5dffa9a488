//! Sliding-window region proposals scored by gradient-energy contrast.

use crate::appearance::ScorePair;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{clip, iou};
use crate::BBox64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub bbox: BBox64,
    pub objectness: f64,
    /// Filled once the proposal has been scored.
    pub scores: Option<ScorePair>,
    /// Position in the generator's scan order; the final tie-breaker.
    pub scan_index: usize,
}

pub trait ProposalGenerator: Send + Sync {
    /// At most `budget` candidate boxes inside `region`, best first.
    fn propose(
        &self,
        frame: &Frame,
        region: &BBox64,
        prior_size: (f64, f64),
        budget: usize,
    ) -> Result<Vec<Proposal>>;
}

/// Multi-scale, multi-aspect windows at a fixed fractional stride. Objectness
/// is the contrast between mean gradient energy inside a window and in the
/// ring around it; greedy non-maximum suppression thins the result.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingWindowProposer {
    pub scales: Vec<f64>,
    /// Multipliers of the prior aspect ratio (area preserving).
    pub aspects: Vec<f64>,
    pub stride_frac: f64,
    pub nms_iou: f64,
    /// Side scale of the ring's outer boundary.
    pub ring_scale: f64,
}

impl Default for SlidingWindowProposer {
    fn default() -> Self {
        Self {
            scales: vec![0.5, 0.71, 1.0, 1.41, 2.0],
            aspects: vec![0.5, 1.0, 2.0],
            stride_frac: 0.25,
            nms_iou: 0.7,
            ring_scale: 1.5,
        }
    }
}

/// Summed-area table of a per-pixel energy map.
struct Integral {
    w: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn gradient_energy(frame: &Frame) -> Self {
        let (w, h) = (frame.width() as usize, frame.height() as usize);
        let px = frame.pixels();
        let at = |x: usize, y: usize| px[y * w + x] as f64;
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                let gx = at((x + 1).min(w - 1), y) - at(x.saturating_sub(1), y);
                let gy = at(x, (y + 1).min(h - 1)) - at(x, y.saturating_sub(1));
                row += 0.5 * (gx.abs() + gy.abs());
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Self { w, sums }
    }

    /// Sum and pixel count over the integer rectangle covering `b`.
    fn sum(&self, b: &BBox64) -> (f64, f64) {
        let stride = self.w + 1;
        let x0 = b.x().round().max(0.0) as usize;
        let y0 = b.y().round().max(0.0) as usize;
        let x1 = (b.right().round() as usize).min(self.w).max(x0);
        let y1 = (b.bottom().round() as usize).min(self.sums.len() / stride - 1).max(y0);
        let s = self.sums[y1 * stride + x1] - self.sums[y0 * stride + x1] - self.sums[y1 * stride + x0]
            + self.sums[y0 * stride + x0];
        (s, ((x1 - x0) * (y1 - y0)) as f64)
    }
}

impl SlidingWindowProposer {
    /// Every window in scan order (scale, aspect, row, column).
    pub fn windows(&self, region: &BBox64, prior_size: (f64, f64)) -> Vec<BBox64> {
        let mut out = Vec::new();
        for &s in &self.scales {
            for &a in &self.aspects {
                let w = prior_size.0 * s * a.sqrt();
                let h = prior_size.1 * s / a.sqrt();
                if w > region.w() + 1e-9 || h > region.h() + 1e-9 || w <= 0.0 || h <= 0.0 {
                    continue;
                }
                let xs = positions(region.x(), region.w(), w, self.stride_frac * w);
                let ys = positions(region.y(), region.h(), h, self.stride_frac * h);
                for &y in &ys {
                    for &x in &xs {
                        if let Ok(b) = BBox64::new(x, y, w, h) {
                            out.push(b);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Window origins from `start` at `step`, plus one flush with the far edge.
fn positions(start: f64, extent: f64, side: f64, step: f64) -> Vec<f64> {
    let last = start + (extent - side).max(0.0);
    let step = step.max(1e-6);
    let mut out = Vec::new();
    let mut p = start;
    while p <= last + 1e-9 {
        out.push(p.min(last));
        p += step;
    }
    if out.last().is_none_or(|&l| last - l > 1e-9) {
        out.push(last);
    }
    out
}

impl ProposalGenerator for SlidingWindowProposer {
    fn propose(
        &self,
        frame: &Frame,
        region: &BBox64,
        prior_size: (f64, f64),
        budget: usize,
    ) -> Result<Vec<Proposal>> {
        if budget == 0 {
            return Err(Error::InvalidArgument("proposal budget must be positive".into()));
        }
        let region = clip(region, frame.dims())?;
        let windows = self.windows(&region, prior_size);
        if windows.is_empty() {
            return Ok(vec![Proposal {
                bbox: region,
                objectness: 0.0,
                scores: None,
                scan_index: 0,
            }]);
        }
        let energy = Integral::gradient_energy(frame);
        let frame_rect = frame.dims().rect();
        let mut scored: Vec<Proposal> = windows
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                let (sw, nw) = energy.sum(&b);
                let outer = b
                    .scaled(self.ring_scale)
                    .ok()
                    .and_then(|o| o.intersection(&frame_rect))
                    .unwrap_or(b);
                let (so, no) = energy.sum(&outer);
                let e_in = if nw > 0.0 { sw / nw } else { 0.0 };
                let e_ring = if no > nw { (so - sw) / (no - nw) } else { e_in };
                Proposal {
                    bbox: b,
                    objectness: (e_in - e_ring) / (e_in + e_ring + 1e-9),
                    scores: None,
                    scan_index: i,
                }
            })
            .collect();
        scored.sort_by(|a, b| {
            b.objectness
                .total_cmp(&a.objectness)
                .then(a.scan_index.cmp(&b.scan_index))
        });
        let mut kept: Vec<Proposal> = Vec::with_capacity(budget);
        for p in scored {
            if kept.len() == budget {
                break;
            }
            if kept.iter().all(|k| iou(&k.bbox, &p.bbox) <= self.nms_iou) {
                kept.push(p);
            }
        }
        Ok(kept)
    }
}
