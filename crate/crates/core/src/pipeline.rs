//! The long-term tracker: short-term tracking with judgement and recovery
//! while the target is held, cascade re-detection after a failure, plus the
//! sequence and suite drivers and the per-frame trace log.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::appearance::{
    AppearanceConfig, AppearanceModel, BBoxRegressor, RegressorConfig, SimilarityMapping, SimilarityReference,
    TemplateModel,
};
use crate::cascade::{CascadeConfig, CascadeDetector, DetectInput, ProposalGenerator, RankingMode, SlidingWindowProposer, Stage};
use crate::error::{Error, Result};
use crate::evaluation::{
    attribute_report, attribute_table_csv, evaluate, summary_csv, AttributeRow, FrameRecord, PredictionTrack,
    SequenceReport,
};
use crate::frame::Frame;
use crate::geometry::{clip, iou};
use crate::io;
use crate::judgement::{check_failure, confidence, decide, resolve, Decision, ResolveContext, Thresholds};
use crate::motion::{compensate, BlockMatcher, MotionConfig, MotionEstimator};
use crate::shortterm::{apply_update_policy, track_frame, RefineConfig, SamplerConfig, ShortTermConfig, TargetState};
use crate::simulator::{generate, scenario_seed, standard_specs, Attribute, SequenceRecord};
use crate::BBox64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackerMode {
    ShortTerm,
    Detecting,
}

crate::snake_enum_str!(TrackerMode {
    ShortTerm => "short_term",
    Detecting => "detecting",
});

/// Every tunable of the tracker as one flat key-value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    /// Similarity above which the short-term result is trusted.
    pub th_mid: f64,
    /// Confidence below which tracking has failed.
    pub th_low: f64,
    /// Detection similarity gate.
    pub det_sim: f64,
    /// Detection classification gate.
    pub det_cls: f64,

    /// Side of the square patches scored by the appearance model.
    pub patch_resolution: usize,
    pub bank_capacity: usize,
    /// Minimum IoU of positive training samples.
    pub pos_iou: f64,
    /// Maximum IoU of negative training samples.
    pub neg_iou: f64,
    pub pos_per_frame: usize,
    pub neg_per_frame: usize,
    pub buffer_frames: usize,
    pub init_pos: usize,
    pub init_neg: usize,
    pub max_background: usize,
    pub background_floor: f64,
    pub similarity_mapping: SimilarityMapping,
    /// Correlation mapped to zero similarity by the clamped mapping.
    pub chance_ncc: f64,
    pub similarity_reference: SimilarityReference,

    pub regressor_samples: usize,
    pub regressor_jitter: f64,
    pub regressor_scale_jitter: f64,
    pub regressor_ridge_lambda: f64,

    /// Candidates drawn per short-term step.
    pub n_candidates: usize,
    /// Translation std as a fraction of the box side.
    pub sigma_xy: f64,
    /// Log-scale std.
    pub sigma_scale: f64,
    pub refine_radius_px: f64,
    pub refine_step_px: f64,
    pub refine_scales: Vec<f64>,

    pub search_radius: u32,
    pub max_block: u32,
    pub reliability_floor: f64,
    /// Side scale of the region around the target used for motion estimation.
    pub flow_region_scale: f64,

    pub stage_scales: Vec<u32>,
    pub local_n: usize,
    pub local_span_scale: f64,
    pub area_budget: usize,
    pub global_budget: usize,
    pub gate_top_k: usize,
    pub one_stage_per_frame: bool,
    pub ranking_mode: RankingMode,
    pub sequential_k: usize,
    pub snap_proposals: bool,

    /// When false, failures are reported absent but re-detection never runs.
    pub detector_enabled: bool,
    pub seed: u64,
    /// Sequence directory for `track`.
    pub sequence: Option<PathBuf>,
    /// Prediction file written by `track`.
    pub output: Option<PathBuf>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        let th = Thresholds::default();
        let ap = AppearanceConfig::default();
        let rg = RegressorConfig::default();
        let sm = SamplerConfig::default();
        let rf = RefineConfig::default();
        let mo = MotionConfig::default();
        let cc = CascadeConfig::default();
        Self {
            th_mid: th.th_mid,
            th_low: th.th_low,
            det_sim: th.det_sim,
            det_cls: th.det_cls,
            patch_resolution: ap.patch_resolution,
            bank_capacity: ap.bank_capacity,
            pos_iou: ap.pos_iou,
            neg_iou: ap.neg_iou,
            pos_per_frame: ap.pos_per_frame,
            neg_per_frame: ap.neg_per_frame,
            buffer_frames: ap.buffer_frames,
            init_pos: ap.init_pos,
            init_neg: ap.init_neg,
            max_background: ap.max_background,
            background_floor: ap.background_floor,
            similarity_mapping: ap.similarity_mapping,
            chance_ncc: ap.chance_ncc,
            similarity_reference: ap.similarity_reference,
            regressor_samples: rg.samples,
            regressor_jitter: rg.jitter,
            regressor_scale_jitter: rg.scale_jitter,
            regressor_ridge_lambda: rg.ridge_lambda,
            n_candidates: sm.n_candidates,
            sigma_xy: sm.sigma_xy,
            sigma_scale: sm.sigma_scale,
            refine_radius_px: rf.refine_radius_px,
            refine_step_px: rf.refine_step_px,
            refine_scales: rf.refine_scales,
            search_radius: mo.search_radius,
            max_block: mo.max_block,
            reliability_floor: mo.reliability_floor,
            flow_region_scale: 3.0,
            stage_scales: cc.stage_scales,
            local_n: cc.local_n,
            local_span_scale: cc.local_span_scale,
            area_budget: cc.area_budget,
            global_budget: cc.global_budget,
            gate_top_k: cc.gate_top_k,
            one_stage_per_frame: cc.one_stage_per_frame,
            ranking_mode: cc.ranking_mode,
            sequential_k: cc.sequential_k,
            snap_proposals: cc.snap_proposals,
            detector_enabled: true,
            seed: 0,
            sequence: None,
            output: None,
        }
    }
}

impl TrackerConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&io::read_text(path)?)
    }

    /// Every key with its current value; unset paths appear commented out.
    pub fn to_toml(&self) -> Result<String> {
        let mut s = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        if self.sequence.is_none() {
            s.push_str("# sequence = \"path/to/sequence\"\n");
        }
        if self.output.is_none() {
            s.push_str("# output = \"predictions.txt\"\n");
        }
        Ok(s)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            th_mid: self.th_mid,
            th_low: self.th_low,
            det_sim: self.det_sim,
            det_cls: self.det_cls,
        }
    }

    pub fn appearance(&self) -> AppearanceConfig {
        AppearanceConfig {
            patch_resolution: self.patch_resolution,
            bank_capacity: self.bank_capacity,
            pos_iou: self.pos_iou,
            neg_iou: self.neg_iou,
            pos_per_frame: self.pos_per_frame,
            neg_per_frame: self.neg_per_frame,
            buffer_frames: self.buffer_frames,
            init_pos: self.init_pos,
            init_neg: self.init_neg,
            max_background: self.max_background,
            background_floor: self.background_floor,
            similarity_mapping: self.similarity_mapping,
            chance_ncc: self.chance_ncc,
            similarity_reference: self.similarity_reference,
            seed: self.seed,
        }
    }

    pub fn regressor(&self) -> RegressorConfig {
        RegressorConfig {
            patch_resolution: self.patch_resolution,
            samples: self.regressor_samples,
            jitter: self.regressor_jitter,
            scale_jitter: self.regressor_scale_jitter,
            ridge_lambda: self.regressor_ridge_lambda,
            seed: self.seed ^ 0x5eed,
        }
    }

    pub fn short_term(&self) -> ShortTermConfig {
        ShortTermConfig {
            sampler: SamplerConfig {
                n_candidates: self.n_candidates,
                sigma_xy: self.sigma_xy,
                sigma_scale: self.sigma_scale,
            },
            refine: RefineConfig {
                refine_radius_px: self.refine_radius_px,
                refine_step_px: self.refine_step_px,
                refine_scales: self.refine_scales.clone(),
            },
        }
    }

    pub fn motion(&self) -> MotionConfig {
        MotionConfig {
            search_radius: self.search_radius,
            max_block: self.max_block,
            reliability_floor: self.reliability_floor,
        }
    }

    pub fn cascade(&self) -> CascadeConfig {
        CascadeConfig {
            stage_scales: self.stage_scales.clone(),
            local_n: self.local_n,
            local_span_scale: self.local_span_scale,
            area_budget: self.area_budget,
            global_budget: self.global_budget,
            gate_top_k: self.gate_top_k,
            one_stage_per_frame: self.one_stage_per_frame,
            ranking_mode: self.ranking_mode,
            sequential_k: self.sequential_k,
            snap_proposals: self.snap_proposals,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds().validate()?;
        let st = self.short_term();
        st.sampler.validate()?;
        st.refine.validate()?;
        self.cascade().validate()?;
        if self.patch_resolution < 4 || self.bank_capacity == 0 || self.regressor_samples == 0 {
            return Err(Error::Config("patch_resolution >= 4, bank_capacity and regressor_samples > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.pos_iou) || !(0.0..=1.0).contains(&self.neg_iou) || self.neg_iou >= self.pos_iou {
            return Err(Error::Config("need 0 <= neg_iou < pos_iou <= 1".into()));
        }
        if self.search_radius == 0 || self.max_block < 4 {
            return Err(Error::Config("search_radius > 0 and max_block >= 4".into()));
        }
        if !(0.0..1.0).contains(&self.chance_ncc) {
            return Err(Error::Config("chance_ncc must lie in [0, 1)".into()));
        }
        if !(self.flow_region_scale >= 1.0) {
            return Err(Error::Config("flow_region_scale must be at least 1".into()));
        }
        Ok(())
    }
}

/// What happened on one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Init,
    Tracked,
    Failure,
    Found,
    /// A detection passed the gates but failed the confidence re-check.
    Rejected,
    Missed,
}

crate::snake_enum_str!(TraceEvent {
    Init => "init",
    Tracked => "tracked",
    Failure => "failure",
    Found => "found",
    Rejected => "rejected",
    Missed => "missed",
});

/// One line of the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub frame: usize,
    pub mode: TrackerMode,
    pub next: TrackerMode,
    pub event: TraceEvent,
    pub decision: Option<Decision>,
    /// Accepting cascade stage on a successful detection.
    pub stage: Option<Stage>,
    pub stages_run: Vec<Stage>,
    pub s_sim: f64,
    pub s_cls: f64,
    pub s_t: f64,
    pub present: bool,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stages = if self.stages_run.is_empty() {
            "-".to_string()
        } else {
            self.stages_run.iter().map(Stage::to_string).collect::<Vec<_>>().join("+")
        };
        write!(
            f,
            "frame={} mode={} next={} event={} decision={} stage={} stages={} s_sim={:.6} s_cls={:.6} s_t={:.6} present={}",
            self.frame,
            self.mode,
            self.next,
            self.event,
            opt(&self.decision),
            opt(&self.stage),
            stages,
            self.s_sim,
            self.s_cls,
            self.s_t,
            self.present
        )
    }
}

impl std::str::FromStr for TraceEntry {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("trace line `{line}`: {m}"));
        let mut map = std::collections::BTreeMap::new();
        for field in line.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            map.insert(k, v);
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| bad(&format!("missing `{k}`")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(&format!("bad `{k}`"))) };
        let maybe = |k: &str| -> Result<Option<&str>> { Ok(Some(get(k)?).filter(|v| *v != "-")) };
        Ok(Self {
            frame: get("frame")?.parse().map_err(|_| bad("bad `frame`"))?,
            mode: get("mode")?.parse()?,
            next: get("next")?.parse()?,
            event: get("event")?.parse()?,
            decision: maybe("decision")?.map(str::parse).transpose()?,
            stage: maybe("stage")?.map(str::parse).transpose()?,
            stages_run: maybe("stages")?
                .map_or(Ok(Vec::new()), |s| s.split('+').map(str::parse).collect::<Result<_>>())?,
            s_sim: num("s_sim")?,
            s_cls: num("s_cls")?,
            s_t: num("s_t")?,
            present: get("present")?.parse().map_err(|_| bad("bad `present`"))?,
        })
    }
}

pub fn format_trace(trace: &[TraceEntry]) -> String {
    trace.iter().map(|t| format!("{t}\n")).collect()
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEntry>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect()
}

/// Replays a trace against the mode automaton. Returns one message per
/// violation; empty means the trace is legal.
///
/// With the detector disabled a failure keeps the tracker in short-term mode.
pub fn check_trace(trace: &[TraceEntry], detector_enabled: bool) -> Vec<String> {
    use TraceEvent::*;
    use TrackerMode::*;
    let mut errs = Vec::new();
    for (i, t) in trace.iter().enumerate() {
        let mut err = |m: &str| errs.push(format!("frame {}: {m}", t.frame));
        if t.frame != i {
            err("frame index out of sequence");
        }
        if let Some(prev) = i.checked_sub(1).map(|j| &trace[j]) {
            if prev.next != t.mode {
                err("mode differs from the previous frame's next mode");
            }
        }
        let failure_next = if detector_enabled { Detecting } else { ShortTerm };
        let legal = match (t.mode, t.event) {
            (ShortTerm, Init) => i == 0 && t.next == ShortTerm && t.present,
            (ShortTerm, Tracked) => t.next == ShortTerm && t.present,
            (ShortTerm, Failure) => t.next == failure_next && !t.present,
            (Detecting, Found) => t.next == ShortTerm && t.present,
            (Detecting, Missed | Rejected) => t.next == Detecting && !t.present,
            _ => false,
        };
        if !legal {
            err(&format!("illegal {} -> {} on {}", t.mode, t.next, t.event));
        }
        if t.mode == Detecting && !detector_enabled {
            err("detecting while the detector is disabled");
        }
    }
    errs
}

/// Output of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub record: FrameRecord,
    pub trace: TraceEntry,
}

/// The mode-switching long-term tracker.
pub struct LongTermTracker {
    cfg: TrackerConfig,
    thresholds: Thresholds,
    short_term: ShortTermConfig,
    model: Box<dyn AppearanceModel>,
    regressor: BBoxRegressor,
    flow: Box<dyn MotionEstimator>,
    detector: CascadeDetector,
    mode: TrackerMode,
    /// Last trusted state; carried (motion compensated) while detecting.
    state: TargetState,
    prev_frame: Frame,
    frame_index: usize,
    rng: ChaCha8Rng,
}

impl fmt::Debug for LongTermTracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LongTermTracker")
            .field("mode", &self.mode)
            .field("state", &self.state)
            .field("frame_index", &self.frame_index)
            .finish_non_exhaustive()
    }
}

fn unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

impl LongTermTracker {
    /// Initializes on frame 0 with the reference backends.
    pub fn new(frame0: &Frame, box0: &BBox64, cfg: TrackerConfig) -> Result<(Self, StepOutput)> {
        cfg.validate()?;
        let box0 = clip(box0, frame0.dims())?;
        let model = TemplateModel::init(frame0, &box0, cfg.appearance())?;
        let flow = BlockMatcher::new(cfg.motion());
        Self::with_backends(frame0, &box0, cfg, Box::new(model), Box::new(flow), Box::new(SlidingWindowProposer::default()))
    }

    /// Initializes with caller-supplied scoring, motion and proposal backends.
    /// The model must already be initialized on `frame0`.
    pub fn with_backends(
        frame0: &Frame,
        box0: &BBox64,
        cfg: TrackerConfig,
        model: Box<dyn AppearanceModel>,
        flow: Box<dyn MotionEstimator>,
        proposer: Box<dyn ProposalGenerator>,
    ) -> Result<(Self, StepOutput)> {
        cfg.validate()?;
        let regressor = BBoxRegressor::train(frame0, box0, &cfg.regressor())?;
        let detector = CascadeDetector::with_proposer(cfg.cascade(), proposer)?;
        let s = model.scores(frame0, box0)?;
        let tracker = Self {
            thresholds: cfg.thresholds(),
            short_term: cfg.short_term(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            model,
            regressor,
            flow,
            detector,
            mode: TrackerMode::ShortTerm,
            state: TargetState {
                bbox: *box0,
                confidence: s.s_sim,
                present: true,
                frame_index: 0,
            },
            prev_frame: frame0.clone(),
            frame_index: 0,
        };
        let out = StepOutput {
            record: FrameRecord::present(*box0, unit(s.s_sim)),
            trace: TraceEntry {
                frame: 0,
                mode: TrackerMode::ShortTerm,
                next: TrackerMode::ShortTerm,
                event: TraceEvent::Init,
                decision: None,
                stage: None,
                stages_run: Vec::new(),
                s_sim: s.s_sim,
                s_cls: s.s_cls,
                s_t: s.s_sim,
                present: true,
            },
        };
        Ok((tracker, out))
    }

    pub fn mode(&self) -> TrackerMode {
        self.mode
    }

    pub fn state(&self) -> &TargetState {
        &self.state
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Processes the next frame.
    pub fn step(&mut self, frame: &Frame) -> Result<StepOutput> {
        if frame.dims() != self.prev_frame.dims() {
            let (a, b) = (frame.dims(), self.prev_frame.dims());
            return Err(Error::DimsMismatch(a.width, a.height, b.width, b.height));
        }
        self.frame_index += 1;
        let out = match self.mode {
            TrackerMode::ShortTerm => self.short_term_step(frame)?,
            TrackerMode::Detecting => self.detect_step(frame)?,
        };
        self.mode = out.trace.next;
        self.prev_frame = frame.clone();
        Ok(out)
    }

    fn short_term_step(&mut self, frame: &Frame) -> Result<StepOutput> {
        let (result, scores) = track_frame(self.model.as_ref(), &self.state, frame, &self.short_term, &mut self.rng)?;
        let decision = decide(&scores, &self.thresholds);
        let resolution = resolve(
            decision,
            &result,
            &mut ResolveContext {
                frame,
                prev_frame: &self.prev_frame,
                prev_box: &self.state.bbox,
                model: self.model.as_ref(),
                regressor: &self.regressor,
                sampler: &self.short_term.sampler,
                flow: self.flow.as_ref(),
                flow_region_scale: self.cfg.flow_region_scale,
                reliability_floor: self.cfg.reliability_floor,
                rng: &mut self.rng,
            },
        )?;
        let bbox = resolution.bbox;
        let s_t = confidence(self.model.as_ref(), frame, &bbox)?;
        apply_update_policy(self.model.as_mut(), s_t, &self.thresholds, frame, self.frame_index, &bbox);
        let failed = check_failure(s_t, &self.thresholds);
        let mut trace = TraceEntry {
            frame: self.frame_index,
            mode: TrackerMode::ShortTerm,
            next: TrackerMode::ShortTerm,
            event: TraceEvent::Tracked,
            decision: Some(decision),
            stage: None,
            stages_run: Vec::new(),
            s_sim: scores.s_sim,
            s_cls: scores.s_cls,
            s_t,
            present: !failed,
        };
        let record = if failed {
            trace.event = TraceEvent::Failure;
            if self.cfg.detector_enabled {
                trace.next = TrackerMode::Detecting;
                self.detector.reset();
                self.state.present = false;
            } else {
                // a plain short-term tracker keeps following its own output
                self.trust(bbox, s_t);
            }
            FrameRecord::absent(unit(s_t))
        } else {
            self.trust(bbox, s_t);
            FrameRecord::present(bbox, unit(s_t))
        };
        Ok(StepOutput { record, trace })
    }

    fn trust(&mut self, bbox: BBox64, s_t: f64) {
        self.state = TargetState {
            bbox,
            confidence: s_t,
            present: true,
            frame_index: self.frame_index,
        };
    }

    fn detect_step(&mut self, frame: &Frame) -> Result<StepOutput> {
        let st = self.short_term.clone();
        let outcome = self.detector.detect(
            &DetectInput {
                frame,
                prev_frame: &self.prev_frame,
                prev_state: &self.state,
                model: self.model.as_ref(),
                flow: self.flow.as_ref(),
                thresholds: &self.thresholds,
                sampler: &st.sampler,
                refine: &st.refine,
                flow_region_scale: self.cfg.flow_region_scale,
                reliability_floor: self.cfg.reliability_floor,
            },
            &mut self.rng,
        )?;
        let mut trace = TraceEntry {
            frame: self.frame_index,
            mode: TrackerMode::Detecting,
            next: TrackerMode::Detecting,
            event: TraceEvent::Missed,
            decision: None,
            stage: None,
            stages_run: outcome.stages_run.clone(),
            s_sim: outcome.scores.map_or(outcome.best_sim, |s| s.s_sim),
            s_cls: outcome.scores.map_or(0.0, |s| s.s_cls),
            s_t: 0.0,
            present: false,
        };
        if let (true, Some(bbox)) = (outcome.found, outcome.bbox) {
            // judge the detected box again before handing back
            let s_t = confidence(self.model.as_ref(), frame, &bbox)?;
            trace.s_t = s_t;
            trace.stage = Some(outcome.stage);
            if !check_failure(s_t, &self.thresholds) {
                trace.event = TraceEvent::Found;
                trace.next = TrackerMode::ShortTerm;
                trace.present = true;
                self.trust(bbox, s_t);
                let conf = outcome.scores.map_or(s_t, |s| s.s_sim);
                return Ok(StepOutput {
                    record: FrameRecord::present(bbox, unit(conf)),
                    trace,
                });
            }
            trace.event = TraceEvent::Rejected;
        } else {
            trace.s_t = outcome.best_sim;
        }
        // keep the search anchored to the scene while the target is away
        if let Some(mv) = outcome.motion.filter(|m| m.reliability >= self.cfg.reliability_floor) {
            if let Ok(b) = clip(&compensate(&self.state.bbox, &mv), frame.dims()) {
                if b.w() >= crate::appearance::MIN_BOX_SIDE && b.h() >= crate::appearance::MIN_BOX_SIDE {
                    self.state.bbox = b;
                }
            }
        }
        Ok(StepOutput {
            record: FrameRecord::absent(unit(trace.s_t)),
            trace,
        })
    }
}

/// Predictions and trace of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub track: PredictionTrack,
    pub trace: Vec<TraceEntry>,
}

/// Tracks a whole sequence from its frame-0 groundtruth box.
pub fn run_sequence(cfg: &TrackerConfig, seq: &SequenceRecord) -> Result<RunOutput> {
    let first = seq.frames.first().ok_or(Error::Empty("sequence frames"))?;
    let box0 = seq
        .groundtruth
        .first()
        .copied()
        .flatten()
        .ok_or_else(|| Error::InvalidArgument("frame 0 groundtruth is required for initialization".into()))?;
    let (mut tracker, out) = LongTermTracker::new(first, &box0, cfg.clone())?;
    let mut records = vec![out.record];
    let mut trace = vec![out.trace];
    for f in &seq.frames[1..] {
        let out = tracker.step(f)?;
        log::trace!("{}", out.trace);
        records.push(out.record);
        trace.push(out.trace);
    }
    Ok(RunOutput {
        track: PredictionTrack::new(records)?,
        trace,
    })
}

/// Reads `cfg.sequence`, tracks it and writes `cfg.output` plus a `.log`
/// trace next to it.
pub fn run_configured(cfg: &TrackerConfig) -> Result<RunOutput> {
    let seq_dir = cfg
        .sequence
        .as_deref()
        .ok_or_else(|| Error::Config("`sequence` is not set".into()))?;
    let out_path = cfg
        .output
        .as_deref()
        .ok_or_else(|| Error::Config("`output` is not set".into()))?;
    let seq = io::read_sequence(seq_dir)?;
    let run = run_sequence(cfg, &seq)?;
    io::write_predictions(out_path, &run.track)?;
    io::write_text(&trace_path(out_path), &format_trace(&run.trace))?;
    Ok(run)
}

/// Run log written beside a prediction file.
pub fn trace_path(predictions: &Path) -> PathBuf {
    predictions.with_extension("log")
}

/// Frames between reappearance and the first confident, overlapping report,
/// one entry per gap in the groundtruth. Recapture means a reported box
/// with IoU at least `min_iou`; `None` if that never happens before the
/// next gap or the end.
pub fn recapture_delays(track: &PredictionTrack, gt: &[Option<BBox64>], min_iou: f64) -> Vec<Option<usize>> {
    let mut out = Vec::new();
    let n = gt.len().min(track.len());
    let mut t = 1;
    while t < n {
        if gt[t].is_some() && gt[t - 1].is_none() {
            let end = (t..n).find(|&k| gt[k].is_none()).unwrap_or(n);
            let hit = (t..end).find(|&k| {
                matches!((&track.records[k].bbox, &gt[k]), (Some(p), Some(g)) if iou(p, g) >= min_iou)
            });
            out.push(hit.map(|k| k - t));
            t = end;
        } else {
            t += 1;
        }
    }
    out
}

/// `(boxes reported on groundtruth-absent frames, groundtruth-absent frames)`.
pub fn false_presence(track: &PredictionTrack, gt: &[Option<BBox64>]) -> (usize, usize) {
    let mut reported = 0;
    let mut absent = 0;
    for (r, g) in track.records.iter().zip(gt) {
        if g.is_none() {
            absent += 1;
            if r.bbox.is_some() {
                reported += 1;
            }
        }
    }
    (reported, absent)
}

/// One scenario of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub attributes: BTreeSet<Attribute>,
    pub groundtruth: Vec<Option<BBox64>>,
    pub run: RunOutput,
    pub report: SequenceReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub entries: Vec<SuiteEntry>,
    pub table: Vec<AttributeRow>,
}

impl SuiteResult {
    pub fn summary_csv(&self) -> String {
        let reports: Vec<SequenceReport> = self.entries.iter().map(|e| e.report.clone()).collect();
        summary_csv(&reports)
    }

    pub fn attribute_csv(&self) -> String {
        attribute_table_csv(&self.table)
    }

    /// Mean metrics over all sequences.
    pub fn overall(&self) -> &AttributeRow {
        &self.table[0]
    }
}

/// Generates, tracks and evaluates every standard scenario in turn. With an
/// output directory, writes per-sequence groundtruth, predictions and logs,
/// a summary and the attribute table.
pub fn run_suite(cfg: &TrackerConfig, seed: u64, out: Option<&Path>) -> Result<SuiteResult> {
    let mut entries = Vec::new();
    for (i, spec) in standard_specs().iter().enumerate() {
        let seq = generate(spec, scenario_seed(seed, i))?;
        let run = run_sequence(cfg, &seq)?;
        let eval = evaluate(&run.track, &seq.groundtruth)?;
        log::info!(
            "{}: f={:.3} auc={:.3} re@0.5={:.3}",
            seq.name,
            eval.report.f_score,
            eval.report.success_auc,
            eval.report.re_at_half
        );
        if let Some(dir) = out {
            let d = dir.join(&seq.name);
            io::write_text(&d.join(io::GROUNDTRUTH_FILE), &io::format_groundtruth(&seq.groundtruth))?;
            let pred = d.join("predictions.txt");
            io::write_predictions(&pred, &run.track)?;
            io::write_text(&trace_path(&pred), &format_trace(&run.trace))?;
        }
        entries.push(SuiteEntry {
            name: seq.name.clone(),
            attributes: seq.attributes.clone(),
            groundtruth: seq.groundtruth,
            report: SequenceReport {
                name: seq.name,
                attributes: seq.attributes,
                report: eval.report,
            },
            run,
        });
    }
    let reports: Vec<SequenceReport> = entries.iter().map(|e| e.report.clone()).collect();
    let table = attribute_report(&reports)?;
    let result = SuiteResult { entries, table };
    if let Some(dir) = out {
        io::write_text(&dir.join("summary.csv"), &result.summary_csv())?;
        io::write_text(&dir.join("attributes.csv"), &result.attribute_csv())?;
    }
    Ok(result)
}
