//! Appearance scoring: template similarity, discriminative classification and
//! first-frame box regression.
//!
//! The tracker talks to appearance backends only through [`AppearanceModel`],
//! so a learned scorer can replace the classical [`TemplateModel`].

mod ncc;
mod regressor;
mod template;

use serde::{Deserialize, Serialize};

pub use ncc::NormalizedPatch;
pub use regressor::{BBoxRegressor, RegressorConfig};
pub use template::{draw_sample_boxes, AppearanceConfig, FrameSamples, SampleBuffer, TemplateModel};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::BBox64;

/// Smallest box side, in pixels, that scoring accepts.
pub const MIN_BOX_SIDE: f64 = 2.0;

/// Similarity score in `[0, 1]` and signed classification margin
/// (positive means target, negative means background).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair {
    pub s_sim: f64,
    pub s_cls: f64,
}

impl ScorePair {
    pub fn new(s_sim: f64, s_cls: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s_sim) || !s_cls.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "score pair out of range: s_sim={s_sim}, s_cls={s_cls}"
            )));
        }
        Ok(Self { s_sim, s_cls })
    }
}

/// How a correlation in `[-1, 1]` becomes a similarity score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMapping {
    /// `max(0, (ncc - c) / (1 - c))` for a chance level `c`: correlation
    /// no better than chance scores 0.
    #[default]
    Clamped,
    /// `(ncc + 1) / 2`: uncorrelated content scores 0.5.
    Affine,
}

impl SimilarityMapping {
    /// `chance` only affects the clamped mapping and must lie in `[0, 1)`.
    pub fn apply(self, ncc: f32, chance: f64) -> f64 {
        let ncc = ncc.clamp(-1.0, 1.0) as f64;
        match self {
            SimilarityMapping::Clamped => ((ncc - chance) / (1.0 - chance)).max(0.0),
            SimilarityMapping::Affine => (ncc + 1.0) / 2.0,
        }
    }
}

/// Which templates the similarity score is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityReference {
    /// The frame-0 template only.
    #[default]
    Initial,
    /// Best match over the adaptive template bank.
    Bank,
}

#[macro_export]
#[doc(hidden)]
macro_rules! snake_enum_str {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl ::std::str::FromStr for $ty {
            type Err = $crate::Error;

            fn from_str(s: &str) -> ::std::result::Result<Self, $crate::Error> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err($crate::Error::Config(format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

crate::snake_enum_str!(SimilarityMapping { Clamped => "clamped", Affine => "affine" });
crate::snake_enum_str!(SimilarityReference { Initial => "initial", Bank => "bank" });

/// Result of a classifier refit request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefitOutcome {
    Refitted { positives: usize, negatives: usize },
    /// Nothing buffered; the classifier was left untouched.
    EmptyBuffer,
}

/// Scoring backend used by the short-term tracker, the judgement module and
/// the cascade detector.
///
/// Scoring methods never mutate the model. `collect_samples` and `refit`
/// are the only mutating operations.
pub trait AppearanceModel: Send {
    /// Similarity of the patch under `b` to the target template, in `[0, 1]`.
    fn similarity(&self, frame: &Frame, b: &BBox64) -> Result<f64>;

    /// Signed target-versus-background margin for the patch under `b`.
    fn classify(&self, frame: &Frame, b: &BBox64) -> Result<f64>;

    fn scores(&self, frame: &Frame, b: &BBox64) -> Result<ScorePair> {
        ScorePair::new(self.similarity(frame, b)?, self.classify(frame, b)?)
    }

    /// Buffers positive and negative training samples around `tracked`.
    fn collect_samples(&mut self, frame: &Frame, frame_index: usize, tracked: &BBox64);

    /// Retrains the classifier on buffered samples.
    fn refit(&mut self) -> RefitOutcome;
}

/// Rejects boxes that cannot be scored.
pub(crate) fn check_scorable(frame: &Frame, b: &BBox64) -> Result<()> {
    if !b.is_finite() || b.w() < MIN_BOX_SIDE || b.h() < MIN_BOX_SIDE {
        return Err(Error::InvalidBox(format!(
            "{b} is smaller than {MIN_BOX_SIDE}px or not finite"
        )));
    }
    if b.intersection(&frame.dims().rect()).is_none() {
        return Err(Error::OutsideFrame {
            width: frame.width(),
            height: frame.height(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mappings() {
        assert_eq!(SimilarityMapping::Clamped.apply(-0.4, 0.0), 0.0);
        assert_eq!(SimilarityMapping::Clamped.apply(0.7, 0.0), 0.7f32 as f64);
        assert_eq!(SimilarityMapping::Clamped.apply(0.15, 0.2), 0.0);
        assert!((SimilarityMapping::Clamped.apply(0.6, 0.2) - 0.5).abs() < 1e-6);
        assert_eq!(SimilarityMapping::Clamped.apply(1.0, 0.2), 1.0);
        assert_eq!(SimilarityMapping::Affine.apply(-1.0, 0.2), 0.0);
        assert_eq!(SimilarityMapping::Affine.apply(0.0, 0.2), 0.5);
        assert_eq!(SimilarityMapping::Affine.apply(1.0, 0.0), 1.0);
    }

    #[test]
    fn score_pair_validation() {
        assert!(ScorePair::new(0.5, -3.0).is_ok());
        assert!(ScorePair::new(1.5, 0.0).is_err());
        assert!(ScorePair::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn enum_strings_roundtrip() {
        for m in [SimilarityMapping::Clamped, SimilarityMapping::Affine] {
            assert_eq!(m.to_string().parse::<SimilarityMapping>().unwrap(), m);
        }
        assert!("nope".parse::<SimilarityReference>().is_err());
    }
}
