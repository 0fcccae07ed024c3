//! Flow estimator backends: the feature-map abstraction, the backend trait,
//! a deterministic census-pyramid matcher, and a file-based backend that
//! replays precomputed `.flo` fields.
//!
//! The trait splits estimation into `encode` (per-frame feature extraction)
//! and `decode` (matching on feature maps). Cyclic estimation relies on that
//! split to encode each frame once and decode twice on regrouped features;
//! backends without the split (such as the file backend) are restricted to
//! image-level estimation modes.

mod builtin;
mod file;

pub use builtin::BuiltinMatcher;
pub use file::FileBackend;

use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField};

/// Dense multi-channel feature raster at some pyramid scale.
///
/// Data is packed `(y, x, channel)`. `downsample` is the integer factor
/// relative to the input image (1 at full resolution).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub downsample: usize,
    pub data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, channels: usize, downsample: usize) -> Self {
        FeatureMap {
            width,
            height,
            channels,
            downsample,
            data: vec![0.0; width * height * channels],
        }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Swaps the left and right halves of every row (equivalent to a
    /// horizontal roll by half the width). Requires even width.
    pub fn swap_halves(&self) -> Result<FeatureMap> {
        if self.width % 2 != 0 {
            return Err(Error::contract("feature width must be even to swap halves"));
        }
        let mut out = self.clone();
        let half = self.width / 2;
        let c = self.channels;
        for y in 0..self.height {
            for x in 0..self.width {
                let src = (x + half) % self.width;
                let di = (y * self.width + x) * c;
                let si = (y * self.width + src) * c;
                out.data[di..di + c].copy_from_slice(&self.data[si..si + c]);
            }
        }
        Ok(out)
    }
}

/// Features for one frame pair at one pyramid level, with optional context
/// features derived from the first frame (used to guide filtering).
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePair {
    pub source: FeatureMap,
    pub target: FeatureMap,
    pub context: Option<FeatureMap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendCapabilities {
    /// Whether `encode`/`decode` are available separately from `estimate`.
    pub has_encode_decode_split: bool,
    /// Whether the backend treats the horizontal axis as circular.
    pub horizontally_circular: bool,
}

/// A dense flow estimator. Implementations must be deterministic: identical
/// inputs produce identical outputs across runs and thread counts.
pub trait EstimatorBackend: Sync {
    fn name(&self) -> &str;

    fn capabilities(&self) -> BackendCapabilities;

    /// Classical flow from `i1` to `i2`: `i2(x + u, y + v) ≈ i1(x, y)`.
    fn estimate(&self, i1: &EquirectImage, i2: &EquirectImage) -> Result<FlowField>;

    /// Per-frame feature extraction, finest level first.
    fn encode(&self, _i1: &EquirectImage, _i2: &EquirectImage) -> Result<Vec<FeaturePair>> {
        Err(Error::contract(format!(
            "backend '{}' has no encode/decode split",
            self.name()
        )))
    }

    /// Matching on already-extracted features, finest level first.
    fn decode(&self, _levels: &[FeaturePair]) -> Result<FlowField> {
        Err(Error::contract(format!(
            "backend '{}' has no encode/decode split",
            self.name()
        )))
    }
}
