//! Per-frame local tracking: Gaussian candidate sampling, classifier-driven
//! selection, local similarity refinement and the online update policy.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::appearance::{AppearanceModel, RefitOutcome, ScorePair, MIN_BOX_SIDE};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{clip, clip_to, FrameDims};
use crate::judgement::Thresholds;
use crate::BBox64;

const MAX_RETRIES: usize = 10;

/// Per-frame tracker output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    /// Current box when present, otherwise the last trusted box.
    pub bbox: BBox64,
    /// Tracking confidence `S_t` in `[0, 1]`.
    pub confidence: f64,
    pub present: bool,
    pub frame_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_candidates: usize,
    /// Center standard deviation as a fraction of `mean(w, h)`.
    pub sigma_xy: f64,
    /// Standard deviation of the log scale factor.
    pub sigma_scale: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_candidates: 256,
            sigma_xy: 0.3,
            sigma_scale: 0.05,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 {
            return Err(Error::Config("n_candidates must be at least 1".into()));
        }
        if !(self.sigma_xy > 0.0 && self.sigma_scale > 0.0) {
            return Err(Error::Config("sampler sigmas must be positive".into()));
        }
        Ok(())
    }
}

/// Draws `n_candidates` boxes around `center`: isotropic Gaussian centers,
/// log-normal scale, aspect ratio kept, each clipped to the frame. A draw
/// whose clipped box is empty or thinner than the scoring minimum is redrawn
/// up to ten times and then dropped.
pub fn gaussian_sample(
    center: &BBox64,
    cfg: &SamplerConfig,
    dims: FrameDims,
    rng: &mut impl Rng,
) -> Vec<BBox64> {
    gaussian_sample_within(center, cfg, &dims.rect(), rng)
}

/// [`gaussian_sample`] with candidates clipped to `bounds` instead of the frame.
pub fn gaussian_sample_within(
    center: &BBox64,
    cfg: &SamplerConfig,
    bounds: &BBox64,
    rng: &mut impl Rng,
) -> Vec<BBox64> {
    let (cx, cy) = center.center();
    let spread = cfg.sigma_xy * 0.5 * (center.w() + center.h());
    let mut out = Vec::with_capacity(cfg.n_candidates);
    for _ in 0..cfg.n_candidates {
        for _ in 0..=MAX_RETRIES {
            let dx = rng.sample::<f64, _>(StandardNormal) * spread;
            let dy = rng.sample::<f64, _>(StandardNormal) * spread;
            let s = (rng.sample::<f64, _>(StandardNormal) * cfg.sigma_scale).exp();
            let drawn = BBox64::centered(cx + dx, cy + dy, center.w() * s, center.h() * s)
                .ok()
                .and_then(|b| clip_to(&b, bounds));
            if let Some(b) = drawn {
                if b.w() >= MIN_BOX_SIDE && b.h() >= MIN_BOX_SIDE {
                    out.push(b);
                    break;
                }
            }
        }
    }
    out
}

/// Highest-`classify` box and its score; the first one wins ties.
pub fn select_best(
    model: &dyn AppearanceModel,
    frame: &Frame,
    candidates: &[BBox64],
) -> Result<Option<(BBox64, f64)>> {
    let mut best: Option<(BBox64, f64)> = None;
    for b in candidates {
        let s = model.classify(frame, b)?;
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((*b, s));
        }
    }
    Ok(best)
}

/// Exhaustive similarity search around a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub refine_radius_px: f64,
    pub refine_step_px: f64,
    pub refine_scales: Vec<f64>,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            refine_radius_px: 2.0,
            refine_step_px: 1.0,
            refine_scales: vec![0.975, 1.0, 1.025],
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.refine_step_px > 0.0 && self.refine_radius_px >= 0.0) {
            return Err(Error::Config("refine step must be positive and radius non-negative".into()));
        }
        if self.refine_scales.is_empty() || self.refine_scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("refine_scales must be non-empty and positive".into()));
        }
        Ok(())
    }
}

/// Moves `b` to the best-similarity position on the offset/scale grid. The
/// input box is kept unless a grid box scores strictly higher.
pub fn refine_similarity(
    model: &dyn AppearanceModel,
    frame: &Frame,
    b: &BBox64,
    cfg: &RefineConfig,
) -> Result<(BBox64, f64)> {
    let mut best = (*b, model.similarity(frame, b)?);
    let steps = (cfg.refine_radius_px / cfg.refine_step_px).floor() as i64;
    let (cx, cy) = b.center();
    for &s in &cfg.refine_scales {
        for j in -steps..=steps {
            for i in -steps..=steps {
                let (dx, dy) = (i as f64 * cfg.refine_step_px, j as f64 * cfg.refine_step_px);
                let Ok(c) = BBox64::centered(cx + dx, cy + dy, b.w() * s, b.h() * s)
                    .and_then(|c| clip(&c, frame.dims()))
                else {
                    continue;
                };
                if c.w() < MIN_BOX_SIDE || c.h() < MIN_BOX_SIDE || c == *b {
                    continue;
                }
                let sim = model.similarity(frame, &c)?;
                if sim > best.1 {
                    best = (c, sim);
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ShortTermConfig {
    pub sampler: SamplerConfig,
    pub refine: RefineConfig,
}

/// One short-term step: sample around the previous box, keep the best
/// classified candidate, refine it by similarity. The returned `s_cls` is
/// that of the selected candidate; `s_sim` is that of the refined box.
pub fn track_frame(
    model: &dyn AppearanceModel,
    prev: &TargetState,
    frame: &Frame,
    cfg: &ShortTermConfig,
    rng: &mut impl Rng,
) -> Result<(BBox64, ScorePair)> {
    let candidates = gaussian_sample(&prev.bbox, &cfg.sampler, frame.dims(), rng);
    let (selected, s_cls) = match select_best(model, frame, &candidates)? {
        Some(best) => best,
        None => {
            let b = clip(&prev.bbox, frame.dims())?;
            (b, model.classify(frame, &b)?)
        }
    };
    let (refined, s_sim) = refine_similarity(model, frame, &selected, &cfg.refine)?;
    Ok((refined, ScorePair::new(s_sim, s_cls)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateAction {
    Collected,
    Refitted(RefitOutcome),
    None,
}

/// Collects samples when `s_t > th_mid`, refits when `s_t < th_low`, and
/// leaves the model alone otherwise.
pub fn apply_update_policy(
    model: &mut dyn AppearanceModel,
    s_t: f64,
    th: &Thresholds,
    frame: &Frame,
    frame_index: usize,
    tracked: &BBox64,
) -> UpdateAction {
    if s_t > th.th_mid {
        model.collect_samples(frame, frame_index, tracked);
        UpdateAction::Collected
    } else if s_t < th.th_low {
        UpdateAction::Refitted(model.refit())
    } else {
        UpdateAction::None
    }
}
