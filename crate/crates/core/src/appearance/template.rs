//! Classical reference appearance model: NCC against the initial template for
//! similarity, adaptive template bank versus background exemplars for
//! classification.

use std::collections::VecDeque;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ncc::NormalizedPatch;
use super::{
    check_scorable, AppearanceModel, RefitOutcome, SimilarityMapping, SimilarityReference,
};
use crate::error::Result;
use crate::frame::Frame;
use crate::geometry::iou;
use crate::BBox64;

/// Negatives correlating this strongly with the initial template contradict
/// the positive label and are dropped when refitting.
const CONTRADICTORY_NEGATIVE_NCC: f32 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceConfig {
    pub patch_resolution: usize,
    pub bank_capacity: usize,
    pub pos_iou: f64,
    pub neg_iou: f64,
    pub pos_per_frame: usize,
    pub neg_per_frame: usize,
    /// Frames retained in the sample buffer.
    pub buffer_frames: usize,
    pub init_pos: usize,
    pub init_neg: usize,
    /// Cap on background exemplars used by `classify`.
    pub max_background: usize,
    /// Minimum background score; a patch must beat it to classify as target.
    pub background_floor: f64,
    pub similarity_mapping: SimilarityMapping,
    /// Correlation treated as chance level by the clamped mapping.
    pub chance_ncc: f64,
    pub similarity_reference: SimilarityReference,
    pub seed: u64,
}

impl Default for AppearanceConfig {
    fn default() -> Self {
        Self {
            patch_resolution: 32,
            bank_capacity: 50,
            pos_iou: 0.7,
            neg_iou: 0.3,
            pos_per_frame: 5,
            neg_per_frame: 20,
            buffer_frames: 10,
            init_pos: 20,
            init_neg: 60,
            max_background: 64,
            background_floor: 0.2,
            similarity_mapping: SimilarityMapping::Clamped,
            chance_ncc: 0.2,
            similarity_reference: SimilarityReference::Initial,
            seed: 0,
        }
    }
}

/// Training samples gathered on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSamples {
    pub frame_index: usize,
    pub positives: Vec<NormalizedPatch>,
    pub negatives: Vec<NormalizedPatch>,
}

/// FIFO of per-frame samples; pushing beyond capacity evicts the oldest frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    frames: VecDeque<FrameSamples>,
    capacity: usize,
}

impl SampleBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            frames: VecDeque::with_capacity(capacity + 1),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, samples: FrameSamples) {
        self.frames.push_back(samples);
        while self.frames.len() > self.capacity {
            self.frames.pop_front();
        }
    }

    pub fn frames(&self) -> impl DoubleEndedIterator<Item = &FrameSamples> {
        self.frames.iter()
    }

    pub fn positive_count(&self) -> usize {
        self.frames.iter().map(|f| f.positives.len()).sum()
    }

    pub fn negative_count(&self) -> usize {
        self.frames.iter().map(|f| f.negatives.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.positive_count() + self.negative_count() == 0
    }

    pub fn clear(&mut self) {
        self.frames.clear();
    }
}

/// Draws positive (IoU >= `pos_iou`) and negative (IoU <= `neg_iou`) boxes
/// around `tracked`, before any frame-boundary filtering.
pub fn draw_sample_boxes(
    tracked: &BBox64,
    n_pos: usize,
    n_neg: usize,
    pos_iou: f64,
    neg_iou: f64,
    rng: &mut impl Rng,
) -> (Vec<BBox64>, Vec<BBox64>) {
    let (cx, cy) = tracked.center();
    let size = 0.5 * (tracked.w() + tracked.h());
    let mut draw = |n: usize, sigma_xy: f64, sigma_s: f64, accept: &dyn Fn(f64) -> bool| {
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n && attempts < 100 * n.max(1) {
            attempts += 1;
            let dx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_xy * size;
            let dy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_xy * size;
            let s = (rng.sample::<f64, _>(StandardNormal) * sigma_s).exp();
            let Ok(b) = BBox64::centered(cx + dx, cy + dy, tracked.w() * s, tracked.h() * s) else {
                continue;
            };
            if accept(iou(&b, tracked)) {
                out.push(b);
            }
        }
        out
    };
    let pos = draw(n_pos, 0.1, 0.05, &|o| o >= pos_iou);
    let neg = draw(n_neg, 1.0, 0.1, &|o| o <= neg_iou);
    (pos, neg)
}

/// NCC template model: the initial template scores similarity; the weighted
/// template bank minus the best background exemplar gives the class margin.
#[derive(Debug, Clone)]
pub struct TemplateModel {
    cfg: AppearanceConfig,
    initial: NormalizedPatch,
    bank: Vec<(NormalizedPatch, f32)>,
    background: Vec<NormalizedPatch>,
    buffer: SampleBuffer,
    rng: ChaCha8Rng,
}

impl TemplateModel {
    /// Captures the initial template at `box0` and trains the classifier on
    /// samples drawn around it.
    pub fn init(frame0: &Frame, box0: &BBox64, cfg: AppearanceConfig) -> Result<Self> {
        check_scorable(frame0, box0)?;
        let initial = NormalizedPatch::new(&frame0.sample_patch(box0, cfg.patch_resolution));
        let mut model = Self {
            initial: initial.clone(),
            bank: vec![(initial, 1.0)],
            background: Vec::new(),
            buffer: SampleBuffer::new(cfg.buffer_frames),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_a99e),
            cfg,
        };
        let (n_pos, n_neg) = (model.cfg.init_pos, model.cfg.init_neg);
        model.gather(frame0, 0, box0, n_pos, n_neg);
        model.refit();
        Ok(model)
    }

    pub fn config(&self) -> &AppearanceConfig {
        &self.cfg
    }

    pub fn initial_template(&self) -> &NormalizedPatch {
        &self.initial
    }

    pub fn bank_len(&self) -> usize {
        self.bank.len()
    }

    pub fn background_len(&self) -> usize {
        self.background.len()
    }

    pub fn samples(&self) -> &SampleBuffer {
        &self.buffer
    }

    pub fn samples_mut(&mut self) -> &mut SampleBuffer {
        &mut self.buffer
    }

    /// Classifier state as comparable values: bank weights and background size.
    pub fn classifier_fingerprint(&self) -> (Vec<f32>, Vec<f32>) {
        let weights = self.bank.iter().map(|(_, w)| *w).collect();
        let bg = self
            .background
            .iter()
            .map(|p| p.ncc(&self.initial))
            .collect();
        (weights, bg)
    }

    fn patch(&self, frame: &Frame, b: &BBox64) -> Result<NormalizedPatch> {
        check_scorable(frame, b)?;
        Ok(NormalizedPatch::new(
            &frame.sample_patch(b, self.cfg.patch_resolution),
        ))
    }

    fn similarity_of(&self, p: &NormalizedPatch) -> f64 {
        let ncc = match self.cfg.similarity_reference {
            SimilarityReference::Initial => p.ncc(&self.initial),
            SimilarityReference::Bank => self
                .bank
                .iter()
                .map(|(t, _)| p.ncc(t))
                .fold(f32::NEG_INFINITY, f32::max),
        };
        self.cfg.similarity_mapping.apply(ncc, self.cfg.chance_ncc)
    }

    fn classify_patch(&self, p: &NormalizedPatch) -> f64 {
        let target = self
            .bank
            .iter()
            .map(|(t, w)| w * p.ncc(t))
            .fold(f32::NEG_INFINITY, f32::max);
        let background = self
            .background
            .iter()
            .map(|b| p.ncc(b))
            .fold(self.cfg.background_floor as f32, f32::max);
        (target - background) as f64
    }

    fn gather(&mut self, frame: &Frame, frame_index: usize, tracked: &BBox64, n_pos: usize, n_neg: usize) {
        let (pos, neg) = draw_sample_boxes(
            tracked,
            n_pos,
            n_neg,
            self.cfg.pos_iou,
            self.cfg.neg_iou,
            &mut self.rng,
        );
        let rect = frame.dims().rect();
        let res = self.cfg.patch_resolution;
        let extract = |boxes: Vec<BBox64>| -> Vec<NormalizedPatch> {
            boxes
                .iter()
                .filter(|b| rect.contains(b))
                .map(|b| NormalizedPatch::new(&frame.sample_patch(b, res)))
                .collect()
        };
        let samples = FrameSamples {
            frame_index,
            positives: extract(pos),
            negatives: extract(neg),
        };
        self.buffer.push(samples);
    }
}

impl AppearanceModel for TemplateModel {
    fn similarity(&self, frame: &Frame, b: &BBox64) -> Result<f64> {
        Ok(self.similarity_of(&self.patch(frame, b)?))
    }

    fn classify(&self, frame: &Frame, b: &BBox64) -> Result<f64> {
        Ok(self.classify_patch(&self.patch(frame, b)?))
    }

    fn scores(&self, frame: &Frame, b: &BBox64) -> Result<super::ScorePair> {
        let p = self.patch(frame, b)?;
        super::ScorePair::new(self.similarity_of(&p), self.classify_patch(&p))
    }

    fn collect_samples(&mut self, frame: &Frame, frame_index: usize, tracked: &BBox64) {
        let (n_pos, n_neg) = (self.cfg.pos_per_frame, self.cfg.neg_per_frame);
        self.gather(frame, frame_index, tracked, n_pos, n_neg);
    }

    fn refit(&mut self) -> RefitOutcome {
        if self.buffer.is_empty() {
            warn!("refit requested with an empty sample buffer; classifier unchanged");
            return RefitOutcome::EmptyBuffer;
        }
        let initial = &self.initial;
        let mut bank = vec![(initial.clone(), 1.0f32)];
        bank.extend(
            self.buffer
                .frames()
                .rev()
                .flat_map(|f| f.positives.iter())
                .take(self.cfg.bank_capacity.saturating_sub(1))
                .map(|p| (p.clone(), 0.5 * (1.0 + p.ncc(initial).max(0.0)))),
        );
        let background: Vec<NormalizedPatch> = self
            .buffer
            .frames()
            .rev()
            .flat_map(|f| f.negatives.iter())
            .filter(|n| n.ncc(initial) < CONTRADICTORY_NEGATIVE_NCC)
            .take(self.cfg.max_background)
            .cloned()
            .collect();
        let outcome = RefitOutcome::Refitted {
            positives: bank.len() - 1,
            negatives: background.len(),
        };
        self.bank = bank;
        self.background = background;
        outcome
    }
}
