//! Linear bounding-box regression trained once on the first frame.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_scorable;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::clip;
use crate::BBox64;

const POOL: usize = 4;
/// Pooled intensity plus pooled gradient magnitude.
const FEATURES: usize = 2 * POOL * POOL;
const MAX_SHIFT: f64 = 0.5;
const MAX_LOG_SCALE: f64 = 0.405; // ln 1.5

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorConfig {
    pub patch_resolution: usize,
    pub samples: usize,
    /// Translation jitter as a fraction of the box side.
    pub jitter: f64,
    /// Log-scale jitter half-range.
    pub scale_jitter: f64,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            patch_resolution: 32,
            samples: 200,
            jitter: 0.15,
            scale_jitter: 0.1,
            ridge_lambda: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Trained {
    resolution: usize,
    mean: DVector<f64>,
    scale: DVector<f64>,
    /// `(FEATURES + 1) x 4`, last row is the bias.
    coef: DMatrix<f64>,
}

/// Maps patch features of a candidate box to `(dx, dy, dlogw, dlogh)`,
/// with translations relative to the box size.
#[derive(Debug, Clone, PartialEq)]
pub struct BBoxRegressor {
    trained: Option<Trained>,
}

impl BBoxRegressor {
    pub fn untrained() -> Self {
        Self { trained: None }
    }

    /// Regressor that always predicts zero offsets.
    pub fn identity(patch_resolution: usize) -> Self {
        Self {
            trained: Some(Trained {
                resolution: patch_resolution,
                mean: DVector::zeros(FEATURES),
                scale: DVector::from_element(FEATURES, 1.0),
                coef: DMatrix::zeros(FEATURES + 1, 4),
            }),
        }
    }

    pub fn is_trained(&self) -> bool {
        self.trained.is_some()
    }

    /// Fits ridge regression from jittered boxes around `box0` back to `box0`.
    pub fn train(frame0: &Frame, box0: &BBox64, cfg: &RegressorConfig) -> Result<Self> {
        check_scorable(frame0, box0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xb0c5);
        let (cx, cy) = box0.center();
        let n = cfg.samples.max(1);
        let mut x = DMatrix::<f64>::zeros(n, FEATURES);
        let mut y = DMatrix::<f64>::zeros(n, 4);
        for i in 0..n {
            let (jx, jy, js) = if cfg.jitter > 0.0 || cfg.scale_jitter > 0.0 {
                (
                    rng.random_range(-1.0..=1.0) * cfg.jitter,
                    rng.random_range(-1.0..=1.0) * cfg.jitter,
                    rng.random_range(-1.0..=1.0) * cfg.scale_jitter,
                )
            } else {
                (0.0, 0.0, 0.0)
            };
            let s = js.exp();
            let jb = BBox64::centered(
                cx + jx * box0.w(),
                cy + jy * box0.h(),
                box0.w() * s,
                box0.h() * s,
            )?;
            let f = features(frame0, &jb, cfg.patch_resolution);
            x.row_mut(i).copy_from_slice(&f);
            let (jcx, jcy) = jb.center();
            y[(i, 0)] = (cx - jcx) / jb.w();
            y[(i, 1)] = (cy - jcy) / jb.h();
            y[(i, 2)] = (box0.w() / jb.w()).ln();
            y[(i, 3)] = (box0.h() / jb.h()).ln();
        }

        let mean = DVector::from_fn(FEATURES, |j, _| x.column(j).mean());
        let scale = DVector::from_fn(FEATURES, |j, _| {
            let sd = x.column(j).map(|v| v - mean[j]).norm() / (n as f64).sqrt();
            if sd > 1e-9 {
                sd
            } else {
                1.0
            }
        });
        let mut design = DMatrix::<f64>::from_element(n, FEATURES + 1, 1.0);
        for i in 0..n {
            for j in 0..FEATURES {
                design[(i, j)] = (x[(i, j)] - mean[j]) / scale[j];
            }
        }
        let mut gram = design.transpose() * &design;
        for j in 0..FEATURES {
            gram[(j, j)] += cfg.ridge_lambda;
        }
        // Tiny bias jitter keeps the system solvable when all features are constant.
        gram[(FEATURES, FEATURES)] += 1e-12;
        let rhs = design.transpose() * &y;
        let coef = gram
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::InvalidArgument("singular regression system".into()))?;
        Ok(Self {
            trained: Some(Trained {
                resolution: cfg.patch_resolution,
                mean,
                scale,
                coef,
            }),
        })
    }

    /// Predicted `(dx, dy, dlogw, dlogh)` for the patch under `b`.
    pub fn predict(&self, frame: &Frame, b: &BBox64) -> Result<[f64; 4]> {
        let t = self.trained.as_ref().ok_or(Error::UntrainedRegressor)?;
        check_scorable(frame, b)?;
        let f = features(frame, b, t.resolution);
        let mut z = DVector::<f64>::from_element(FEATURES + 1, 1.0);
        for j in 0..FEATURES {
            z[j] = (f[j] - t.mean[j]) / t.scale[j];
        }
        let out = t.coef.transpose() * z;
        Ok([out[0], out[1], out[2], out[3]])
    }

    /// `b` adjusted by the predicted offsets and clipped to the frame.
    pub fn regress(&self, frame: &Frame, b: &BBox64) -> Result<BBox64> {
        let [dx, dy, dw, dh] = self.predict(frame, b)?;
        let (cx, cy) = b.center();
        let adjusted = BBox64::centered(
            cx + dx.clamp(-MAX_SHIFT, MAX_SHIFT) * b.w(),
            cy + dy.clamp(-MAX_SHIFT, MAX_SHIFT) * b.h(),
            b.w() * dw.clamp(-MAX_LOG_SCALE, MAX_LOG_SCALE).exp(),
            b.h() * dh.clamp(-MAX_LOG_SCALE, MAX_LOG_SCALE).exp(),
        )?;
        clip(&adjusted, frame.dims()).or_else(|_| clip(b, frame.dims()))
    }
}

/// 4x4 average-pooled intensity and gradient magnitude of the resampled patch.
fn features(frame: &Frame, b: &BBox64, res: usize) -> [f64; FEATURES] {
    let patch = frame.sample_patch(b, res);
    let at = |x: usize, y: usize| patch[y * res + x] as f64;
    let cell = (res / POOL).max(1);
    let mut out = [0.0; FEATURES];
    let mut counts = [0usize; POOL * POOL];
    for y in 0..res {
        for x in 0..res {
            let gx = at((x + 1).min(res - 1), y) - at(x.saturating_sub(1), y);
            let gy = at(x, (y + 1).min(res - 1)) - at(x, y.saturating_sub(1));
            let c = (y / cell).min(POOL - 1) * POOL + (x / cell).min(POOL - 1);
            out[c] += at(x, y);
            out[POOL * POOL + c] += 0.5 * (gx * gx + gy * gy).sqrt();
            counts[c] += 1;
        }
    }
    for c in 0..POOL * POOL {
        let n = counts[c].max(1) as f64;
        out[c] /= n;
        out[POOL * POOL + c] /= n;
    }
    out
}
