//! Re-detection cascade: flow-guided local sampling, then proposals over
//! regions of growing side scale, then the whole frame. The first stage whose
//! best candidate clears both gates wins.

mod proposal;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use proposal::{Proposal, ProposalGenerator, SlidingWindowProposer};

use crate::appearance::{AppearanceModel, ScorePair, MIN_BOX_SIDE};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{center_distance, clip_to, expand_region, expand_unclipped, FrameDims};
use crate::judgement::{flow_motion, Thresholds};
use crate::motion::{compensate, MotionEstimator, MotionVector};
use crate::shortterm::{gaussian_sample_within, refine_similarity, select_best, RefineConfig, SamplerConfig, TargetState};
use crate::BBox64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Local,
    /// Proposals inside the previous box expanded by this side scale.
    Area(u32),
    Global,
    None,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Local => f.write_str("local"),
            Stage::Area(k) => write!(f, "area{k}"),
            Stage::Global => f.write_str("global"),
            Stage::None => f.write_str("none"),
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Stage::Local),
            "global" => Ok(Stage::Global),
            "none" => Ok(Stage::None),
            other => other
                .strip_prefix("area")
                .and_then(|k| k.parse().ok())
                .map(Stage::Area)
                .ok_or_else(|| Error::Config(format!("unknown stage `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    /// `s_sim * shape prior * distance prior`.
    #[default]
    Composite,
    /// Nearest K, then the K/2 best shapes, then appearance.
    Sequential,
}

crate::snake_enum_str!(RankingMode {
    Composite => "composite",
    Sequential => "sequential",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Side scales of the intermediate regions, strictly increasing.
    pub stage_scales: Vec<u32>,
    pub local_n: usize,
    /// Side scale of the local sampling span around the compensated box.
    pub local_span_scale: f64,
    pub area_budget: usize,
    pub global_budget: usize,
    /// Ranked proposals gate-tested per stage.
    pub gate_top_k: usize,
    pub one_stage_per_frame: bool,
    pub ranking_mode: RankingMode,
    pub sequential_k: usize,
    /// Move each proposal to its local similarity peak before ranking.
    pub snap_proposals: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            stage_scales: vec![5, 18],
            local_n: 256,
            local_span_scale: 3.0,
            area_budget: 64,
            global_budget: 256,
            gate_top_k: 8,
            one_stage_per_frame: false,
            ranking_mode: RankingMode::Composite,
            sequential_k: 16,
            snap_proposals: true,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stage_scales.iter().any(|&k| k <= 1)
            || self.stage_scales.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config("stage_scales must be strictly increasing and > 1".into()));
        }
        if self.local_n == 0 || self.area_budget == 0 || self.global_budget == 0 || self.gate_top_k == 0 {
            return Err(Error::Config("cascade counts and budgets must be positive".into()));
        }
        if !(self.local_span_scale >= 1.0) {
            return Err(Error::Config("local_span_scale must be at least 1".into()));
        }
        if self.sequential_k < 2 {
            return Err(Error::Config("sequential_k must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub found: bool,
    pub bbox: Option<BBox64>,
    pub scores: Option<ScorePair>,
    /// Accepting stage, or `None` when nothing passed.
    pub stage: Stage,
    /// Stages evaluated this frame, in order.
    pub stages_run: Vec<Stage>,
    /// Highest similarity among gate-tested candidates.
    pub best_sim: f64,
    pub motion: Option<MotionVector>,
}

/// Inputs of one detection step.
pub struct DetectInput<'a> {
    pub frame: &'a Frame,
    pub prev_frame: &'a Frame,
    pub prev_state: &'a TargetState,
    pub model: &'a dyn AppearanceModel,
    pub flow: &'a dyn MotionEstimator,
    pub thresholds: &'a Thresholds,
    pub sampler: &'a SamplerConfig,
    pub refine: &'a RefineConfig,
    pub flow_region_scale: f64,
    pub reliability_floor: f64,
}

pub struct CascadeDetector {
    cfg: CascadeConfig,
    proposer: Box<dyn ProposalGenerator>,
    cursor: usize,
}

impl fmt::Debug for CascadeDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CascadeDetector")
            .field("cfg", &self.cfg)
            .field("cursor", &self.cursor)
            .finish_non_exhaustive()
    }
}

impl CascadeDetector {
    pub fn new(cfg: CascadeConfig) -> Result<Self> {
        Self::with_proposer(cfg, Box::new(SlidingWindowProposer::default()))
    }

    pub fn with_proposer(cfg: CascadeConfig, proposer: Box<dyn ProposalGenerator>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            proposer,
            cursor: 0,
        })
    }

    pub fn config(&self) -> &CascadeConfig {
        &self.cfg
    }

    pub fn stages(&self) -> Vec<Stage> {
        let mut s = vec![Stage::Local];
        s.extend(self.cfg.stage_scales.iter().map(|&k| Stage::Area(k)));
        s.push(Stage::Global);
        s
    }

    /// Restarts the stage cycle used by `one_stage_per_frame`.
    pub fn reset(&mut self) {
        self.cursor = 0;
    }

    /// Search region of a proposal stage around `reference`.
    pub fn stage_region(&self, stage: Stage, reference: &BBox64, dims: FrameDims) -> Result<BBox64> {
        match stage {
            Stage::Area(k) => expand_region(reference, k as f64, dims),
            Stage::Global | Stage::None => Ok(dims.rect()),
            Stage::Local => self.local_span(reference, reference, dims),
        }
    }

    /// Local sampling span: the compensated box expanded by
    /// `local_span_scale`, kept inside the first proposal region.
    pub fn local_span(&self, reference: &BBox64, compensated: &BBox64, dims: FrameDims) -> Result<BBox64> {
        let outer = match self.cfg.stage_scales.first() {
            Some(&k) => expand_region(reference, k as f64, dims)?,
            None => dims.rect(),
        };
        let span = expand_unclipped(compensated, self.cfg.local_span_scale)?;
        Ok(clip_to(&span, &outer).unwrap_or(outer))
    }

    pub fn detect(&mut self, input: &DetectInput<'_>, rng: &mut impl Rng) -> Result<DetectionOutcome> {
        let stages = self.stages();
        let run: Vec<Stage> = if self.cfg.one_stage_per_frame {
            let s = stages[self.cursor % stages.len()];
            self.cursor = (self.cursor + 1) % stages.len();
            vec![s]
        } else {
            stages
        };
        let mut outcome = DetectionOutcome {
            found: false,
            bbox: None,
            scores: None,
            stage: Stage::None,
            stages_run: Vec::new(),
            best_sim: 0.0,
            motion: None,
        };
        for stage in run {
            outcome.stages_run.push(stage);
            let hit = match stage {
                Stage::Local => self.local_stage(input, rng, &mut outcome)?,
                _ => self.proposal_stage(stage, input, &mut outcome)?,
            };
            if let Some((b, sc)) = hit {
                outcome.found = true;
                outcome.bbox = Some(b);
                outcome.scores = Some(sc);
                outcome.stage = stage;
                self.cursor = 0;
                break;
            }
        }
        Ok(outcome)
    }

    fn local_stage(
        &self,
        input: &DetectInput<'_>,
        rng: &mut impl Rng,
        outcome: &mut DetectionOutcome,
    ) -> Result<Option<(BBox64, ScorePair)>> {
        let prev = &input.prev_state.bbox;
        let mv = flow_motion(
            input.flow,
            input.prev_frame,
            input.frame,
            prev,
            input.flow_region_scale,
            input.reliability_floor,
        )?;
        outcome.motion = Some(mv);
        let comp = compensate(prev, &mv);
        let span = self.local_span(prev, &comp, input.frame.dims())?;
        let sampler = SamplerConfig {
            n_candidates: self.cfg.local_n,
            ..input.sampler.clone()
        };
        let cands = gaussian_sample_within(&comp, &sampler, &span, rng);
        let Some((selected, _)) = select_best(input.model, input.frame, &cands)? else {
            return Ok(None);
        };
        let (refined, _) = refine_similarity(input.model, input.frame, &selected, input.refine)?;
        let sc = input.model.scores(input.frame, &refined)?;
        outcome.best_sim = outcome.best_sim.max(sc.s_sim);
        Ok(passes(&sc, input.thresholds).then_some((refined, sc)))
    }

    fn proposal_stage(
        &self,
        stage: Stage,
        input: &DetectInput<'_>,
        outcome: &mut DetectionOutcome,
    ) -> Result<Option<(BBox64, ScorePair)>> {
        let prev = &input.prev_state.bbox;
        let region = self.stage_region(stage, prev, input.frame.dims())?;
        let budget = match stage {
            Stage::Global => self.cfg.global_budget,
            _ => self.cfg.area_budget,
        };
        let mut proposals = self
            .proposer
            .propose(input.frame, &region, (prev.w(), prev.h()), budget)?;
        if self.cfg.snap_proposals {
            for p in proposals.iter_mut() {
                let (b, _) = snap_to_similarity(input.model, input.frame, &p.bbox, &region)?;
                p.bbox = b;
            }
        }
        let ranked = rank_proposals(
            proposals,
            prev,
            input.model,
            input.frame,
            self.cfg.ranking_mode,
            self.cfg.sequential_k,
        )?;
        for p in ranked.iter().take(self.cfg.gate_top_k) {
            let sc = p.scores.expect("ranked proposals are scored");
            outcome.best_sim = outcome.best_sim.max(sc.s_sim);
            if passes(&sc, input.thresholds) {
                return Ok(Some((p.bbox, sc)));
            }
        }
        Ok(None)
    }
}

/// Both gates, strictly.
pub fn passes(sc: &ScorePair, th: &Thresholds) -> bool {
    sc.s_sim > th.det_sim && sc.s_cls > th.det_cls
}

/// Side scales tried around the translated winner when snapping.
const SNAP_SCALES: [f64; 4] = [0.8, 0.9, 1.1, 1.25];

/// Moves `b` to the highest-similarity translate within a quarter of its
/// side: a coarse pass on a grid, a one-pixel pass around the winner, then
/// a few rescalings about its center followed by another one-pixel pass.
/// Candidates that leave `bounds` are skipped; `b` is kept on ties.
pub fn snap_to_similarity(
    model: &dyn AppearanceModel,
    frame: &Frame,
    b: &BBox64,
    bounds: &BBox64,
) -> Result<(BBox64, f64)> {
    let mut best = (*b, model.similarity(frame, b)?);
    let grid = |radius: f64| -> (i64, f64) {
        let step = (radius / 2.0).ceil().max(2.0);
        ((radius / step).floor() as i64, step)
    };
    let (kx, sx) = grid(0.125 * b.w());
    let (ky, sy) = grid(0.125 * b.h());
    let try_at = |c: BBox64, best: &mut (BBox64, f64)| -> Result<()> {
        if c.w() >= MIN_BOX_SIDE && bounds.contains(&c) && c != best.0 {
            let s = model.similarity(frame, &c)?;
            if s > best.1 {
                *best = (c, s);
            }
        }
        Ok(())
    };
    for j in -ky..=ky {
        for i in -kx..=kx {
            try_at(b.translate(i as f64 * sx, j as f64 * sy), &mut best)?;
        }
    }
    let one_pixel = |best: &mut (BBox64, f64)| -> Result<()> {
        let c = best.0;
        for j in -1..=1 {
            for i in -1..=1 {
                try_at(c.translate(i as f64, j as f64), best)?;
            }
        }
        Ok(())
    };
    one_pixel(&mut best)?;
    let fine = best.0;
    for s in SNAP_SCALES {
        if let Ok(c) = fine.scaled(s) {
            try_at(c, &mut best)?;
        }
    }
    if best.0 != fine {
        one_pixel(&mut best)?;
    }
    Ok(best)
}

fn shape_prior(b: &BBox64, prev: &BBox64) -> f64 {
    (-(b.w() / prev.w()).ln().abs() - (b.h() / prev.h()).ln().abs()).exp()
}

fn composite(p: &Proposal, prev: &BBox64, diag: f64) -> f64 {
    let sim = p.scores.map_or(0.0, |s| s.s_sim);
    sim * shape_prior(&p.bbox, prev) * (-center_distance(&p.bbox, prev) / diag).exp()
}

fn by_appearance(a: &Proposal, b: &Proposal) -> Ordering {
    let (sa, sb) = (a.scores.unwrap(), b.scores.unwrap());
    sb.s_sim
        .total_cmp(&sa.s_sim)
        .then(sb.s_cls.total_cmp(&sa.s_cls))
        .then(a.scan_index.cmp(&b.scan_index))
}

/// Scores unscored proposals and orders them best first. Composite mode
/// sorts by `s_sim * exp(-|ln w/w'| - |ln h/h'|) * exp(-d / diagonal)`,
/// ties by `s_cls` then scan order. Sequential mode keeps the `k` nearest,
/// then the `k/2` best shapes among them, sorted by appearance; the rest
/// follow in composite order.
pub fn rank_proposals(
    mut proposals: Vec<Proposal>,
    prev: &BBox64,
    model: &dyn AppearanceModel,
    frame: &Frame,
    mode: RankingMode,
    k: usize,
) -> Result<Vec<Proposal>> {
    if proposals.is_empty() {
        return Err(Error::Empty("proposal list"));
    }
    for p in proposals.iter_mut() {
        if p.scores.is_none() {
            p.scores = Some(model.scores(frame, &p.bbox)?);
        }
    }
    let diag = frame.dims().diagonal();
    let by_composite = |a: &Proposal, b: &Proposal| {
        composite(b, prev, diag)
            .total_cmp(&composite(a, prev, diag))
            .then_with(|| {
                let (sa, sb) = (a.scores.unwrap(), b.scores.unwrap());
                sb.s_cls.total_cmp(&sa.s_cls)
            })
            .then(a.scan_index.cmp(&b.scan_index))
    };
    match mode {
        RankingMode::Composite => {
            proposals.sort_by(by_composite);
            Ok(proposals)
        }
        RankingMode::Sequential => {
            let mut idx: Vec<usize> = (0..proposals.len()).collect();
            let dist = |i: usize| center_distance(&proposals[i].bbox, prev);
            idx.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(proposals[a].scan_index.cmp(&proposals[b].scan_index)));
            idx.truncate(k);
            let shape = |i: usize| shape_prior(&proposals[i].bbox, prev);
            idx.sort_by(|&a, &b| shape(b).total_cmp(&shape(a)).then(proposals[a].scan_index.cmp(&proposals[b].scan_index)));
            idx.truncate((k / 2).max(1));
            let mut head: Vec<Proposal> = idx.iter().map(|&i| proposals[i]).collect();
            head.sort_by(by_appearance);
            let mut rest: Vec<Proposal> = proposals
                .iter()
                .enumerate()
                .filter(|(i, _)| !idx.contains(i))
                .map(|(_, p)| *p)
                .collect();
            rest.sort_by(by_composite);
            head.extend(rest);
            Ok(head)
        }
    }
}
