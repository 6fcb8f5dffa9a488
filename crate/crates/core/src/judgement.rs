//! Judgement of short-term results: the similarity/classification decision
//! table, the recovery action for each verdict, and the failure test.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::appearance::{AppearanceModel, BBoxRegressor, ScorePair};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{clip, expand_region};
use crate::motion::{compensate, MotionEstimator, MotionVector};
use crate::shortterm::{gaussian_sample, select_best, SamplerConfig};
use crate::BBox64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// High similarity, positive class: keep the box.
    Success,
    /// High similarity, non-positive class: likely a distractor.
    DistractorResample,
    /// Low similarity, non-positive class: likely following background.
    FlowGuidedResample,
    /// Low similarity, positive class: the box is inaccurate.
    Refine,
}

crate::snake_enum_str!(Decision {
    Success => "success",
    DistractorResample => "distractor_resample",
    FlowGuidedResample => "flow_guided_resample",
    Refine => "refine",
});

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub th_mid: f64,
    pub th_low: f64,
    /// Detection gate on similarity.
    pub det_sim: f64,
    /// Detection gate on classification.
    pub det_cls: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            th_mid: 0.5,
            th_low: 0.1,
            det_sim: 0.5,
            det_cls: 0.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.th_low && self.th_low < self.th_mid && self.th_mid <= 1.0) {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 <= th_low < th_mid <= 1 (got {} and {})",
                self.th_low, self.th_mid
            )));
        }
        if !self.det_sim.is_finite() || !self.det_cls.is_finite() {
            return Err(Error::Config("detection gates must be finite".into()));
        }
        Ok(())
    }
}

/// Strict inequalities throughout: `s_sim == th_mid` counts as low and
/// `s_cls == 0` as non-positive.
pub fn decide(scores: &ScorePair, th: &Thresholds) -> Decision {
    match (scores.s_sim > th.th_mid, scores.s_cls > 0.0) {
        (true, true) => Decision::Success,
        (true, false) => Decision::DistractorResample,
        (false, false) => Decision::FlowGuidedResample,
        (false, true) => Decision::Refine,
    }
}

/// Everything a recovery action may consult.
pub struct ResolveContext<'a, R: Rng> {
    pub frame: &'a Frame,
    pub prev_frame: &'a Frame,
    /// Box the tracker held on the previous frame.
    pub prev_box: &'a BBox64,
    pub model: &'a dyn AppearanceModel,
    pub regressor: &'a BBoxRegressor,
    pub sampler: &'a SamplerConfig,
    pub flow: &'a dyn MotionEstimator,
    /// Side scale of the region handed to the motion estimator.
    pub flow_region_scale: f64,
    /// Motion below this reliability is treated as zero.
    pub reliability_floor: f64,
    pub rng: &'a mut R,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub bbox: BBox64,
    /// Set when the flow-guided branch consulted the motion estimator.
    pub motion: Option<MotionVector>,
}

/// Applies the recovery action for `decision` to `result`.
pub fn resolve<R: Rng>(decision: Decision, result: &BBox64, ctx: &mut ResolveContext<'_, R>) -> Result<Resolution> {
    let dims = ctx.frame.dims();
    let resample = |center: &BBox64, ctx: &mut ResolveContext<'_, R>| -> Result<BBox64> {
        let cands = gaussian_sample(center, ctx.sampler, dims, ctx.rng);
        Ok(match select_best(ctx.model, ctx.frame, &cands)? {
            Some((b, _)) => b,
            None => *result,
        })
    };
    match decision {
        Decision::Success => Ok(Resolution {
            bbox: *result,
            motion: None,
        }),
        Decision::DistractorResample => Ok(Resolution {
            bbox: resample(result, ctx)?,
            motion: None,
        }),
        Decision::FlowGuidedResample => {
            let mv = flow_motion(ctx.flow, ctx.prev_frame, ctx.frame, ctx.prev_box, ctx.flow_region_scale, ctx.reliability_floor)?;
            let compensated = compensate(ctx.prev_box, &mv);
            let center = clip(&compensated, dims).unwrap_or(*result);
            Ok(Resolution {
                bbox: resample(&center, ctx)?,
                motion: Some(mv),
            })
        }
        Decision::Refine => Ok(Resolution {
            bbox: ctx.regressor.regress(ctx.frame, result)?,
            motion: None,
        }),
    }
}

/// Motion of the region around `b`, zeroed when the estimate is unreliable.
pub fn flow_motion(
    flow: &dyn MotionEstimator,
    prev: &Frame,
    cur: &Frame,
    b: &BBox64,
    region_scale: f64,
    reliability_floor: f64,
) -> Result<MotionVector> {
    let region = expand_region(b, region_scale.max(1.0), prev.dims())?;
    let mv = flow.estimate(prev, cur, &region)?;
    Ok(if mv.reliability < reliability_floor {
        MotionVector {
            reliability: mv.reliability,
            ..MotionVector::ZERO
        }
    } else {
        mv
    })
}

/// Tracking confidence `S_t`: similarity of `b` to the initial template.
pub fn confidence(model: &dyn AppearanceModel, frame: &Frame, b: &BBox64) -> Result<f64> {
    model.similarity(frame, b)
}

pub fn check_failure(s_t: f64, th: &Thresholds) -> bool {
    s_t < th.th_low
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appearance::{AppearanceConfig, SimilarityMapping, TemplateModel};
    use crate::geometry::{center_distance, iou};
    use crate::motion::BlockMatcher;
    use crate::testutil::{textured_scene, MovingScene};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sp(s: f64, c: f64) -> ScorePair {
        ScorePair::new(s, c).unwrap()
    }

    #[test]
    fn table_examples() {
        let th = Thresholds::default();
        assert_eq!(decide(&sp(0.8, 1.2), &th), Decision::Success);
        assert_eq!(decide(&sp(0.8, -0.5), &th), Decision::DistractorResample);
        assert_eq!(decide(&sp(0.2, -0.5), &th), Decision::FlowGuidedResample);
        assert_eq!(decide(&sp(0.2, 0.3), &th), Decision::Refine);
    }

    #[test]
    fn boundaries_fall_to_low_branch() {
        let th = Thresholds::default();
        assert_eq!(decide(&sp(0.5, 1.0), &th), Decision::Refine);
        assert_eq!(decide(&sp(0.9, 0.0), &th), Decision::DistractorResample);
        assert_eq!(decide(&sp(0.5, 0.0), &th), Decision::FlowGuidedResample);
    }

    #[test]
    fn grid_agrees_with_table() {
        let th = Thresholds::default();
        for i in 0..=20 {
            for j in 0..=20 {
                let s = i as f64 / 20.0;
                let c = -1.0 + j as f64 / 10.0;
                let want = if s > 0.5 {
                    if c > 0.0 { Decision::Success } else { Decision::DistractorResample }
                } else if c > 0.0 {
                    Decision::Refine
                } else {
                    Decision::FlowGuidedResample
                };
                assert_eq!(decide(&sp(s, c), &th), want, "({s}, {c})");
            }
        }
    }

    proptest! {
        #[test]
        fn decision_ignores_positive_scaling_of_cls(s in 0.0f64..=1.0, c in -10.0f64..10.0, k in 0.001f64..1000.0) {
            let th = Thresholds::default();
            prop_assert_eq!(decide(&sp(s, c), &th), decide(&sp(s, c * k), &th));
        }

        #[test]
        fn failure_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let th = Thresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(!check_failure(hi, &th) || check_failure(lo, &th));
        }
    }

    #[test]
    fn failure_examples() {
        let th = Thresholds::default();
        assert!(check_failure(0.05, &th));
        assert!(!check_failure(0.10, &th));
        assert!(!check_failure(0.9, &th));
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::default().validate().is_ok());
        let bad = Thresholds {
            th_low: 0.5,
            ..Thresholds::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn decision_strings_roundtrip() {
        for d in [
            Decision::Success,
            Decision::DistractorResample,
            Decision::FlowGuidedResample,
            Decision::Refine,
        ] {
            assert_eq!(d.to_string().parse::<Decision>().unwrap(), d);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn ctx<'a>(
        frame: &'a Frame,
        prev_frame: &'a Frame,
        prev_box: &'a BBox64,
        model: &'a TemplateModel,
        regressor: &'a BBoxRegressor,
        sampler: &'a SamplerConfig,
        flow: &'a BlockMatcher,
        rng: &'a mut ChaCha8Rng,
    ) -> ResolveContext<'a, ChaCha8Rng> {
        ResolveContext {
            frame,
            prev_frame,
            prev_box,
            model,
            regressor,
            sampler,
            flow,
            flow_region_scale: 3.0,
            reliability_floor: 0.2,
            rng,
        }
    }

    #[test]
    fn success_returns_box_untouched() {
        let (f, b) = textured_scene(1);
        let m = TemplateModel::init(&f, &b, AppearanceConfig::default()).unwrap();
        let before = m.clone();
        let reg = BBoxRegressor::identity(32);
        let (s, flow) = (SamplerConfig::default(), BlockMatcher::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = b.translate(2.0, 1.0);
        let r = resolve(Decision::Success, &q, &mut ctx(&f, &f, &b, &m, &reg, &s, &flow, &mut rng)).unwrap();
        assert_eq!(r.bbox, q);
        assert_eq!(m.samples(), before.samples());
    }

    #[test]
    fn flow_guided_centers_on_compensated_box() {
        // Whole scene shifts by (5, 0): the target stays glued to it.
        let scene = MovingScene::new(21, 360, 240, 40, 32);
        let f0 = scene.render(Some((120, 100)));
        let prev_box = scene.target_box(120, 100);
        let m = TemplateModel::init(&f0, &prev_box, AppearanceConfig::default()).unwrap();
        let shifted = Frame::from_fn(f0.dims(), |x, y| f0.get(x.saturating_sub(5), y));
        let flow = BlockMatcher::default();
        let mv = flow_motion(&flow, &f0, &shifted, &prev_box, 3.0, 0.2).unwrap();
        let center = compensate(&prev_box, &mv);
        let want = prev_box.translate(5.0, 0.0);
        assert!(center_distance(&center, &want) <= 1.0, "{center}");

        let reg = BBoxRegressor::identity(32);
        let s = SamplerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stray = BBox64::new(10.0, 10.0, 40.0, 32.0).unwrap();
        let r = resolve(
            Decision::FlowGuidedResample,
            &stray,
            &mut ctx(&shifted, &f0, &prev_box, &m, &reg, &s, &flow, &mut rng),
        )
        .unwrap();
        assert_eq!(r.motion.map(|v| (v.dx, v.dy)), Some((5.0, 0.0)));
        assert!(iou(&r.bbox, &want) > 0.5, "{}", r.bbox);
    }

    #[test]
    fn distractor_resample_returns_best_classified_candidate() {
        let scene = MovingScene::new(22, 320, 240, 40, 32);
        let f = scene.render(Some((150, 100)));
        let gt = scene.target_box(150, 100);
        let m = TemplateModel::init(&f, &gt, AppearanceConfig::default()).unwrap();
        let reg = BBoxRegressor::identity(32);
        let (s, flow) = (SamplerConfig::default(), BlockMatcher::default());
        let off = gt.translate(-12.0, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = resolve(Decision::DistractorResample, &off, &mut ctx(&f, &f, &gt, &m, &reg, &s, &flow, &mut rng)).unwrap();
        let mut replay = ChaCha8Rng::seed_from_u64(9);
        let cands = gaussian_sample(&off, &s, f.dims(), &mut replay);
        let best = cands
            .iter()
            .map(|c| m.classify(&f, c).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(m.classify(&f, &r.bbox).unwrap(), best);
        assert!(iou(&r.bbox, &gt) > iou(&off, &gt));
    }

    #[test]
    fn refine_uses_regressor() {
        let (f, b) = textured_scene(3);
        let m = TemplateModel::init(&f, &b, AppearanceConfig::default()).unwrap();
        let reg = BBoxRegressor::identity(32);
        let (s, flow) = (SamplerConfig::default(), BlockMatcher::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = b.translate(1.0, 1.0);
        let r = resolve(Decision::Refine, &q, &mut ctx(&f, &f, &b, &m, &reg, &s, &flow, &mut rng)).unwrap();
        assert_eq!(r.bbox, q);
    }

    #[test]
    fn confidence_examples() {
        let (f, b) = textured_scene(6);
        let m = TemplateModel::init(&f, &b, AppearanceConfig::default()).unwrap();
        assert!(confidence(&m, &f, &b).unwrap() >= 0.99);
        let inverted = Frame::from_fn(f.dims(), |x, y| 255 - f.get(x, y));
        assert!(confidence(&m, &inverted, &b).unwrap() <= 0.01);

        let cfg = AppearanceConfig {
            similarity_mapping: SimilarityMapping::Affine,
            ..AppearanceConfig::default()
        };
        let m = TemplateModel::init(&f, &b, cfg).unwrap();
        let flat = Frame::filled(f.dims(), 100);
        assert!((confidence(&m, &flat, &b).unwrap() - 0.5).abs() < 1e-9);
    }
}
