//! Zero-mean, unit-norm patches so that normalized cross-correlation is a
//! plain dot product.

/// Standard deviation below which a patch counts as flat (intensities in `[0, 1]`).
const FLAT_STD: f32 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPatch {
    values: Vec<f32>,
    flat: bool,
}

impl NormalizedPatch {
    pub fn new(raw: &[f32]) -> Self {
        let n = raw.len().max(1) as f32;
        let mean = raw.iter().sum::<f32>() / n;
        let mut values: Vec<f32> = raw.iter().map(|v| v - mean).collect();
        let energy = values.iter().map(|v| v * v).sum::<f32>();
        let flat = (energy / n).sqrt() < FLAT_STD;
        if flat {
            values.iter_mut().for_each(|v| *v = 0.0);
        } else {
            let inv = energy.sqrt().recip();
            values.iter_mut().for_each(|v| *v *= inv);
        }
        Self { values, flat }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Normalized cross-correlation in `[-1, 1]`.
    ///
    /// Two flat patches correlate perfectly (any two constants are an affine
    /// map of each other); a flat patch against a textured one scores 0.
    pub fn ncc(&self, other: &Self) -> f32 {
        match (self.flat, other.flat) {
            (true, true) => 1.0,
            (true, false) | (false, true) => 0.0,
            (false, false) => dot(&self.values, &other.values).clamp(-1.0, 1.0),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (pa, pb) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for k in 0..8 {
            acc[k] += pa[k] * pb[k];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    acc.iter().sum::<f32>() + tail
}
