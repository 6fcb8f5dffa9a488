//! Deterministic synthetic sequences: a textured target moving over a
//! textured background, with occlusion, out-of-view periods, distractors,
//! camera motion and photometric changes, plus per-frame groundtruth.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{clip, FrameDims};
use crate::texture::Texture;
use crate::BBox64;

/// Challenge tags attached to sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attribute {
    /// Aspect ratio change.
    ARC,
    /// Background clutter.
    BC,
    /// Camera motion.
    CM,
    /// Fast motion.
    FM,
    /// Full occlusion.
    FOC,
    /// Illumination variation.
    IV,
    /// Low resolution.
    LR,
    /// Out of view.
    OV,
    /// Partial occlusion.
    POC,
    /// Similar object.
    SOB,
    /// Scale variation.
    SV,
    /// Viewpoint change.
    VC,
}

impl Attribute {
    pub const ALL: [Attribute; 12] = [
        Attribute::ARC,
        Attribute::BC,
        Attribute::CM,
        Attribute::FM,
        Attribute::FOC,
        Attribute::IV,
        Attribute::LR,
        Attribute::OV,
        Attribute::POC,
        Attribute::SOB,
        Attribute::SV,
        Attribute::VC,
    ];
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| Error::UnknownAttribute(s.to_string()))
    }
}

/// Value at a frame; keyframes are interpolated linearly and held flat past
/// either end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyframe {
    pub frame: usize,
    pub value: f64,
}

/// Target center (world pixels) at a frame. Consecutive points form the
/// piecewise-linear path; segment speed follows from distance over frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
}

/// Inclusive frame range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn contains(&self, t: usize) -> bool {
        (self.start..=self.end).contains(&t)
    }

    fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Full occlusion. Without an explicit occluder box (world `[x, y, w, h]`)
/// one is fitted around the target's path over the interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occlusion {
    pub start: usize,
    pub end: usize,
    #[serde(default)]
    pub occluder: Option<[f64; 4]>,
}

/// Occluder covering the left `fraction` of the target; the target stays
/// present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialOcclusion {
    pub start: usize,
    pub end: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub length: usize,
    pub target_width: f64,
    pub target_height: f64,
    pub target_seed: u64,
    pub target_blur: f64,
    pub target_mean: f64,
    pub target_contrast: f64,
    pub background_blur: f64,
    pub background_mean: f64,
    pub background_contrast: f64,
    pub trajectory: Vec<Waypoint>,
    /// Size multiplier.
    pub scale: Vec<Keyframe>,
    /// Aspect-ratio multiplier, area preserving.
    pub aspect: Vec<Keyframe>,
    /// Global intensity gain.
    pub illumination: Vec<Keyframe>,
    /// Final decorrelation of the target texture from its initial look, in `[0, 1)`.
    pub appearance_drift: f64,
    pub occlusions: Vec<Occlusion>,
    pub partial_occlusions: Vec<PartialOcclusion>,
    pub out_of_view: Vec<Interval>,
    pub distractor_count: usize,
    /// Texture correlation of distractors with the target, in `[0, 1]`.
    pub distractor_similarity: f64,
    /// Distractor drift, pixels per frame.
    pub distractor_speed: f64,
    /// Camera pan, pixels per frame (the scene moves the opposite way).
    pub camera_velocity: [f64; 2],
    /// Per-frame integer camera jitter amplitude.
    pub camera_shake: u32,
    /// Gaussian pixel noise standard deviation, intensity units.
    pub noise_sigma: f64,
    pub attributes: Vec<Attribute>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            width: 320,
            height: 240,
            length: 100,
            target_width: 40.0,
            target_height: 32.0,
            target_seed: 0,
            target_blur: 1.2,
            target_mean: 128.0,
            target_contrast: 45.0,
            background_blur: 1.5,
            background_mean: 110.0,
            background_contrast: 10.0,
            trajectory: Vec::new(),
            scale: Vec::new(),
            aspect: Vec::new(),
            illumination: Vec::new(),
            appearance_drift: 0.0,
            occlusions: Vec::new(),
            partial_occlusions: Vec::new(),
            out_of_view: Vec::new(),
            distractor_count: 0,
            distractor_similarity: 0.3,
            distractor_speed: 0.5,
            camera_velocity: [0.0, 0.0],
            camera_shake: 0,
            noise_sigma: 2.0,
            attributes: Vec::new(),
        }
    }
}

/// Frames with per-frame groundtruth (`None` while the target is absent).
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub name: String,
    pub frames: Vec<Frame>,
    pub groundtruth: Vec<Option<BBox64>>,
    pub attributes: BTreeSet<Attribute>,
    /// Hex SHA-256 of the scenario and seed.
    pub spec_hash: String,
    pub seed: u64,
}

impl SequenceRecord {
    pub fn dims(&self) -> FrameDims {
        self.frames[0].dims()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn interpolate(keys: &[Keyframe], t: usize, default: f64) -> f64 {
    let Some(first) = keys.first() else {
        return default;
    };
    if t <= first.frame {
        return first.value;
    }
    for w in keys.windows(2) {
        if t <= w[1].frame {
            let span = (w[1].frame - w[0].frame).max(1) as f64;
            let a = (t - w[0].frame) as f64 / span;
            return w[0].value + a * (w[1].value - w[0].value);
        }
    }
    keys.last().map_or(default, |k| k.value)
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// SHA-256 over the canonical serialization and the seed.
    pub fn fingerprint(&self, seed: u64) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.to_toml()?.as_bytes());
        h.update(seed.to_le_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    /// True on frames inside any full-occlusion or out-of-view interval.
    pub fn is_absent(&self, t: usize) -> bool {
        self.occlusions.iter().any(|o| (o.start..=o.end).contains(&t))
            || self.out_of_view.iter().any(|i| i.contains(t))
    }

    /// Target center in world coordinates.
    pub fn center_at(&self, t: usize) -> (f64, f64) {
        let default = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        let Some(first) = self.trajectory.first() else {
            return default;
        };
        if t <= first.frame {
            return (first.x, first.y);
        }
        for w in self.trajectory.windows(2) {
            if t <= w[1].frame {
                let span = (w[1].frame - w[0].frame).max(1) as f64;
                let a = (t - w[0].frame) as f64 / span;
                return (w[0].x + a * (w[1].x - w[0].x), w[0].y + a * (w[1].y - w[0].y));
            }
        }
        let last = self.trajectory.last().unwrap();
        (last.x, last.y)
    }

    /// Target size at a frame.
    pub fn size_at(&self, t: usize) -> (f64, f64) {
        let s = interpolate(&self.scale, t, 1.0);
        let a = interpolate(&self.aspect, t, 1.0).sqrt();
        (self.target_width * s * a, self.target_height * s / a)
    }

    fn target_world(&self, t: usize) -> Result<BBox64> {
        let (cx, cy) = self.center_at(t);
        let (w, h) = self.size_at(t);
        BBox64::centered(cx, cy, w, h)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(format!("{}: {m}", self.name)));
        if self.width == 0 || self.height == 0 || self.length == 0 {
            return bad("dimensions and length must be positive".into());
        }
        let positive = [
            self.target_width,
            self.target_height,
            self.target_blur,
            self.background_blur,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return bad("target size and blur widths must be positive".into());
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.distractor_similarity) {
            return bad("distractor_similarity must lie in [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.appearance_drift) {
            return bad("appearance_drift must lie in [0, 1)".into());
        }
        for keys in [&self.scale, &self.aspect, &self.illumination] {
            if keys.windows(2).any(|w| w[0].frame >= w[1].frame) || keys.iter().any(|k| !(k.value > 0.0)) {
                return bad("keyframes must be increasing with positive values".into());
            }
        }
        if self.trajectory.windows(2).any(|w| w[0].frame >= w[1].frame) {
            return bad("trajectory frames must be increasing".into());
        }
        let full: Vec<Interval> = self
            .occlusions
            .iter()
            .map(|o| Interval {
                start: o.start,
                end: o.end,
            })
            .collect();
        let partial: Vec<Interval> = self
            .partial_occlusions
            .iter()
            .map(|p| Interval {
                start: p.start,
                end: p.end,
            })
            .collect();
        for i in full.iter().chain(&self.out_of_view).chain(&partial) {
            if i.start > i.end || i.end >= self.length {
                return bad(format!("interval [{}, {}] outside [0, {})", i.start, i.end, self.length));
            }
        }
        for o in &full {
            if self.out_of_view.iter().any(|v| v.overlaps(o)) {
                return bad("occlusion and out-of-view intervals overlap".into());
            }
        }
        if self.partial_occlusions.iter().any(|p| !(p.fraction > 0.0 && p.fraction < 1.0)) {
            return bad("partial occlusion fraction must lie in (0, 1)".into());
        }
        if self.is_absent(0) {
            return bad("the target must be visible on frame 0".into());
        }
        for t in 0..self.length {
            let (w, h) = self.size_at(t);
            if w > self.width as f64 || h > self.height as f64 {
                return bad(format!("target larger than the frame at frame {t}"));
            }
        }
        Ok(())
    }
}

/// Rounds a box to whole pixels (sides at least 2).
fn snap_to_pixels(b: &BBox64) -> Result<BBox64> {
    let w = b.w().round().max(2.0);
    let h = b.h().round().max(2.0);
    let (cx, cy) = b.center();
    BBox64::new((cx - w / 2.0).round(), (cy - h / 2.0).round(), w, h)
}

/// Float canvas in intensity units.
struct Canvas {
    w: usize,
    h: usize,
    px: Vec<f32>,
}

impl Canvas {
    /// Fills the integer pixels covered by `b` with `f(u, v)` where `(u, v)`
    /// are the pixel center's fractions along the box.
    fn fill(&mut self, b: &BBox64, mut f: impl FnMut(f64, f64) -> f32) {
        let x0 = b.x().round().max(0.0) as usize;
        let y0 = b.y().round().max(0.0) as usize;
        let x1 = (b.right().round().max(0.0) as usize).min(self.w);
        let y1 = (b.bottom().round().max(0.0) as usize).min(self.h);
        for y in y0..y1 {
            let v = (y as f64 + 0.5 - b.y()) / b.h();
            for x in x0..x1 {
                let u = (x as f64 + 0.5 - b.x()) / b.w();
                self.px[y * self.w + x] = f(u, v);
            }
        }
    }
}

fn texture_at(t: &Texture, u: f64, v: f64) -> f32 {
    t.sample(u * t.width() as f64, v * t.height() as f64)
}

struct Distractor {
    texture: Texture,
    pos: (f64, f64),
    vel: (f64, f64),
}

fn stream(seed: u64, target_seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ target_seed.rotate_left(17) ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Renders the scenario. Identical `(spec, seed)` give identical output.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<SequenceRecord> {
    spec.validate()?;
    let dims = FrameDims::new(spec.width, spec.height)?;
    let (w, h) = (spec.width as usize, spec.height as usize);

    let mut cam_rng = stream(seed, spec.target_seed, 1);
    let offsets: Vec<(i64, i64)> = (0..spec.length)
        .map(|t| {
            let s = spec.camera_shake as i64;
            let (jx, jy) = if s > 0 && t > 0 {
                (cam_rng.random_range(-s..=s), cam_rng.random_range(-s..=s))
            } else {
                (0, 0)
            };
            (
                (spec.camera_velocity[0] * t as f64).round() as i64 + jx,
                (spec.camera_velocity[1] * t as f64).round() as i64 + jy,
            )
        })
        .collect();
    let min_x = offsets.iter().map(|o| o.0).min().unwrap_or(0);
    let max_x = offsets.iter().map(|o| o.0).max().unwrap_or(0);
    let min_y = offsets.iter().map(|o| o.1).min().unwrap_or(0);
    let max_y = offsets.iter().map(|o| o.1).max().unwrap_or(0);
    let (bw, bh) = (w + (max_x - min_x) as usize, h + (max_y - min_y) as usize);

    let background = Texture::band_limited(bw, bh, spec.background_blur, &mut stream(seed, spec.target_seed, 2));
    let mut trng = stream(seed, spec.target_seed, 3);
    let tw = spec.target_width.round().max(2.0) as usize;
    let th = spec.target_height.round().max(2.0) as usize;
    let target = Texture::band_limited(tw, th, spec.target_blur, &mut trng);
    let drift_tex = Texture::band_limited(tw, th, spec.target_blur, &mut trng);
    let occluder_tex = Texture::band_limited(64, 64, 6.0, &mut stream(seed, spec.target_seed, 4));

    let mut drng = stream(seed, spec.target_seed, 5);
    let start = spec.target_world(0)?;
    let mut distractors: Vec<Distractor> = Vec::with_capacity(spec.distractor_count);
    for _ in 0..spec.distractor_count {
        let other = Texture::band_limited(tw, th, spec.target_blur, &mut drng);
        let texture = target.mix(&other, spec.distractor_similarity);
        let mut pos = (w as f64 / 2.0, h as f64 / 2.0);
        for _ in 0..100 {
            pos = (
                drng.random_range(0.0..(w as f64 - tw as f64).max(1.0)),
                drng.random_range(0.0..(h as f64 - th as f64).max(1.0)),
            );
            let b = BBox64::new(pos.0, pos.1, tw as f64, th as f64)?;
            let clear = start.scaled(2.0)?.intersection(&b).is_none()
                && distractors
                    .iter()
                    .all(|d| BBox64::new(d.pos.0, d.pos.1, tw as f64, th as f64).is_ok_and(|o| o.intersection(&b).is_none()));
            if clear {
                break;
            }
        }
        let angle: f64 = drng.random_range(0.0..std::f64::consts::TAU);
        distractors.push(Distractor {
            texture,
            pos,
            vel: (spec.distractor_speed * angle.cos(), spec.distractor_speed * angle.sin()),
        });
    }

    let occluders: Vec<Option<BBox64>> = spec
        .occlusions
        .iter()
        .map(|o| -> Result<Option<BBox64>> {
            let b = match o.occluder {
                Some([x, y, ow, oh]) => BBox64::new(x, y, ow, oh)?,
                None => {
                    let mut u = spec.target_world(o.start)?;
                    for t in o.start..=o.end {
                        let b = spec.target_world(t)?;
                        u = BBox64::from_corners(
                            u.x().min(b.x()),
                            u.y().min(b.y()),
                            u.right().max(b.right()),
                            u.bottom().max(b.bottom()),
                        )?;
                    }
                    BBox64::from_corners(u.x() - 4.0, u.y() - 4.0, u.right() + 4.0, u.bottom() + 4.0)?
                }
            };
            for t in o.start..=o.end {
                if !b.contains(&spec.target_world(t)?) {
                    return Err(Error::Scenario(format!(
                        "{}: occluder does not cover the target at frame {t}",
                        spec.name
                    )));
                }
            }
            Ok(Some(b))
        })
        .collect::<Result<_>>()?;

    let mut noise_rng = stream(seed, spec.target_seed, 6);
    let mut frames = Vec::with_capacity(spec.length);
    let mut groundtruth = Vec::with_capacity(spec.length);
    for (t, &(ox, oy)) in offsets.iter().enumerate().take(spec.length) {
        let to_image = |b: &BBox64| b.translate(-ox as f64, -oy as f64);
        let mut canvas = Canvas {
            w,
            h,
            px: Vec::with_capacity(w * h),
        };
        let (bx, by) = ((ox - min_x) as usize, (oy - min_y) as usize);
        for y in 0..h {
            for x in 0..w {
                let v = background.get(x + bx, y + by);
                canvas.px.push(spec.background_mean as f32 + spec.background_contrast as f32 * v);
            }
        }
        let (tm, tc) = (spec.target_mean as f32, spec.target_contrast as f32);
        for d in distractors.iter_mut() {
            let b = to_image(&BBox64::new(d.pos.0, d.pos.1, tw as f64, th as f64)?);
            canvas.fill(&b, |u, v| tm + tc * texture_at(&d.texture, u, v));
            d.pos.0 += d.vel.0;
            d.pos.1 += d.vel.1;
            if d.pos.0 < 0.0 || d.pos.0 > w as f64 - tw as f64 {
                d.vel.0 = -d.vel.0;
            }
            if d.pos.1 < 0.0 || d.pos.1 > h as f64 - th as f64 {
                d.vel.1 = -d.vel.1;
            }
        }

        let world = spec.target_world(t)?;
        let pixel_box = snap_to_pixels(&to_image(&world))?;
        let out_of_view = spec.out_of_view.iter().any(|i| i.contains(t));
        if !out_of_view {
            let a = if spec.length > 1 {
                1.0 - spec.appearance_drift * t as f64 / (spec.length - 1) as f64
            } else {
                1.0
            };
            let b = (1.0 - a * a).sqrt();
            canvas.fill(&pixel_box, |u, v| {
                let s = a as f32 * texture_at(&target, u, v) + b as f32 * texture_at(&drift_tex, u, v);
                tm + tc * s
            });
        }
        for p in spec.partial_occlusions.iter().filter(|p| (p.start..=p.end).contains(&t)) {
            let cover = BBox64::new(
                pixel_box.x() - 2.0,
                pixel_box.y() - 2.0,
                (pixel_box.w() * p.fraction).round() + 2.0,
                pixel_box.h() + 4.0,
            )?;
            canvas.fill(&cover, |u, v| 90.0 + 25.0 * texture_at(&occluder_tex, u, v));
        }
        for (o, occ) in spec.occlusions.iter().zip(&occluders) {
            if let (true, Some(b)) = ((o.start..=o.end).contains(&t), occ) {
                canvas.fill(&to_image(b), |u, v| 90.0 + 25.0 * texture_at(&occluder_tex, u, v));
            }
        }

        let gain = interpolate(&spec.illumination, t, 1.0) as f32;
        let pixels: Vec<u8> = canvas
            .px
            .iter()
            .map(|&v| {
                let n = if spec.noise_sigma > 0.0 {
                    spec.noise_sigma as f32 * noise_rng.sample::<f32, _>(StandardNormal)
                } else {
                    0.0
                };
                (v * gain + n).round().clamp(0.0, 255.0) as u8
            })
            .collect();
        frames.push(Frame::new(dims, pixels)?);

        if spec.is_absent(t) {
            groundtruth.push(None);
        } else {
            let b = clip(&pixel_box, dims).map_err(|_| {
                Error::Scenario(format!(
                    "{}: target leaves the frame at frame {t} outside an out-of-view interval",
                    spec.name
                ))
            })?;
            groundtruth.push(Some(b));
        }
    }

    Ok(SequenceRecord {
        name: spec.name.clone(),
        frames,
        groundtruth,
        attributes: spec.attributes.iter().copied().collect(),
        spec_hash: spec.fingerprint(seed)?,
        seed,
    })
}

fn path(points: &[(usize, f64, f64)]) -> Vec<Waypoint> {
    points
        .iter()
        .map(|&(frame, x, y)| Waypoint { frame, x, y })
        .collect()
}

fn keys(points: &[(usize, f64)]) -> Vec<Keyframe> {
    points
        .iter()
        .map(|&(frame, value)| Keyframe { frame, value })
        .collect()
}

/// The fixed scenario battery. Every attribute appears at least once.
pub fn standard_specs() -> Vec<ScenarioSpec> {
    use Attribute::*;
    let base = ScenarioSpec::default();
    let mk = |name: &str, seed: u64, length: usize, attrs: &[Attribute]| ScenarioSpec {
        name: name.into(),
        target_seed: seed,
        length,
        attributes: attrs.to_vec(),
        ..base.clone()
    };
    vec![
        ScenarioSpec {
            trajectory: path(&[(0, 80.0, 120.0), (80, 200.0, 100.0), (160, 120.0, 140.0)]),
            ..mk("baseline", 1, 160, &[])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 90.0, 120.0), (150, 230.0, 120.0)]),
            occlusions: vec![Occlusion { start: 60, end: 79, occluder: None }],
            ..mk("occlusion-short", 2, 150, &[FOC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 100.0, 110.0), (240, 190.0, 130.0)]),
            occlusions: vec![Occlusion { start: 50, end: 169, occluder: None }],
            ..mk("occlusion-long", 3, 240, &[FOC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 80.0, 100.0), (60, 150.0, 100.0), (85, 160.0, 100.0), (160, 220.0, 150.0)]),
            out_of_view: vec![Interval { start: 60, end: 84 }],
            ..mk("reappear-near", 4, 160, &[OV])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 90.0, 80.0), (59, 50.0, 50.0), (90, 270.0, 195.0), (170, 230.0, 170.0)]),
            out_of_view: vec![Interval { start: 60, end: 89 }],
            ..mk("reappear-far", 5, 170, &[OV])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 70.0, 120.0), (150, 250.0, 120.0)]),
            partial_occlusions: vec![PartialOcclusion { start: 50, end: 90, fraction: 0.4 }],
            ..mk("partial-occlusion", 6, 150, &[POC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 60.0, 60.0), (25, 260.0, 80.0), (50, 70.0, 180.0), (75, 260.0, 170.0), (100, 80.0, 70.0), (120, 160.0, 120.0)]),
            ..mk("fast-motion", 7, 120, &[FM])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 110.0, 120.0), (150, 190.0, 110.0)]),
            scale: keys(&[(0, 1.0), (150, 1.8)]),
            ..mk("scale-up", 8, 150, &[SV])
        },
        ScenarioSpec {
            target_width: 48.0,
            target_height: 40.0,
            trajectory: path(&[(0, 200.0, 120.0), (150, 120.0, 110.0)]),
            scale: keys(&[(0, 1.0), (150, 0.6)]),
            ..mk("scale-down", 9, 150, &[SV])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 100.0, 120.0), (140, 210.0, 120.0)]),
            aspect: keys(&[(0, 1.0), (140, 1.35)]),
            ..mk("aspect-change", 10, 140, &[ARC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 120.0, 110.0), (150, 250.0, 150.0)]),
            camera_velocity: [1.2, 0.4],
            camera_shake: 2,
            ..mk("camera-pan", 11, 150, &[CM])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 90.0, 130.0), (150, 230.0, 100.0)]),
            illumination: keys(&[(0, 1.0), (50, 0.55), (100, 1.3), (150, 1.0)]),
            ..mk("illumination", 12, 150, &[IV])
        },
        ScenarioSpec {
            target_width: 20.0,
            target_height: 16.0,
            target_blur: 0.9,
            trajectory: path(&[(0, 100.0, 100.0), (140, 220.0, 140.0)]),
            ..mk("low-resolution", 13, 140, &[LR])
        },
        ScenarioSpec {
            background_contrast: 30.0,
            background_blur: 1.2,
            trajectory: path(&[(0, 90.0, 110.0), (150, 220.0, 130.0)]),
            ..mk("background-clutter", 14, 150, &[BC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 160.0, 120.0), (75, 220.0, 90.0), (150, 120.0, 140.0)]),
            distractor_count: 3,
            distractor_similarity: 0.6,
            distractor_speed: 1.0,
            ..mk("similar-objects", 15, 150, &[SOB])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 150.0, 120.0), (200, 200.0, 120.0)]),
            distractor_count: 6,
            distractor_similarity: 0.3,
            distractor_speed: 0.8,
            occlusions: vec![Occlusion { start: 70, end: 99, occluder: None }],
            ..mk("distractors-occlusion", 16, 200, &[SOB, FOC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 90.0, 120.0), (150, 220.0, 120.0)]),
            appearance_drift: 0.25,
            ..mk("viewpoint-change", 17, 150, &[VC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 120.0, 120.0), (55, 175.0, 120.0), (95, 340.0, 120.0), (180, 400.0, 130.0)]),
            camera_velocity: [1.5, 0.0],
            out_of_view: vec![Interval { start: 55, end: 94 }],
            ..mk("pan-and-exit", 18, 180, &[CM, OV])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 80.0, 150.0), (180, 250.0, 90.0)]),
            occlusions: vec![Occlusion { start: 70, end: 94, occluder: None }],
            ..mk("occlusion-while-moving", 19, 180, &[FOC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 110.0, 120.0), (170, 200.0, 120.0)]),
            scale: keys(&[(0, 1.0), (170, 1.5)]),
            occlusions: vec![Occlusion { start: 80, end: 104, occluder: None }],
            ..mk("scale-occlusion", 20, 170, &[SV, FOC])
        },
        ScenarioSpec {
            trajectory: path(&[(0, 220.0, 120.0), (60, 120.0, 120.0), (90, 120.0, 60.0), (160, 160.0, 100.0)]),
            illumination: keys(&[(0, 1.0), (60, 0.7), (90, 1.2), (160, 1.0)]),
            out_of_view: vec![Interval { start: 61, end: 89 }],
            ..mk("illumination-exit", 21, 160, &[IV, OV])
        },
        ScenarioSpec {
            background_contrast: 25.0,
            trajectory: path(&[(0, 80.0, 120.0), (150, 230.0, 120.0)]),
            partial_occlusions: vec![PartialOcclusion { start: 40, end: 70, fraction: 0.3 }],
            ..mk("clutter-partial", 22, 150, &[BC, POC])
        },
    ]
}

/// Per-scenario seed derived from the suite seed.
pub fn scenario_seed(suite_seed: u64, index: usize) -> u64 {
    suite_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Generates every standard scenario. Holds all frames in memory; the suite
/// runner generates them one at a time instead.
pub fn standard_suite(seed: u64) -> Result<Vec<SequenceRecord>> {
    standard_specs()
        .iter()
        .enumerate()
        .map(|(i, s)| generate(s, scenario_seed(seed, i)))
        .collect()
}
