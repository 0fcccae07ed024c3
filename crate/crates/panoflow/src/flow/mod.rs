//! Core flow and panorama containers, `.flo` I/O, backward warping, EPE
//! metrics, and flow visualization.

mod epe;
mod flo;
mod png;
mod viz;
mod warp;

pub use epe::{epe, EpeStats, EvalReport};
pub use flo::{read_flo, write_flo, FLO_MAGIC};
pub use png::{load_png, save_png};
pub use viz::visualize_flow;
pub use warp::{backward_warp, MaskedImage};

use crate::error::{Error, Result};

/// How the horizontal component of a flow field is to be interpreted.
///
/// `Classical` flow is an unconstrained in-image displacement. `Wrapped360`
/// flow takes the shortest of the two great-circle routes on the panorama, so
/// `|u| <= W/2` on every valid pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowRepresentation {
    Classical,
    Wrapped360,
}

/// Dense 2-channel per-pixel displacement grid with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f32>,
    v: Vec<f32>,
    valid: Vec<bool>,
    representation: FlowRepresentation,
}

impl FlowField {
    /// All-zero classical flow with every pixel valid.
    pub fn zeros(width: usize, height: usize) -> Self {
        let n = width * height;
        FlowField {
            width,
            height,
            u: vec![0.0; n],
            v: vec![0.0; n],
            valid: vec![true; n],
            representation: FlowRepresentation::Classical,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        representation: FlowRepresentation,
        mut f: impl FnMut(usize, usize) -> (f32, f32),
    ) -> Self {
        let mut flow = FlowField::zeros(width, height);
        flow.representation = representation;
        for y in 0..height {
            for x in 0..width {
                let (u, v) = f(x, y);
                flow.u[y * width + x] = u;
                flow.v[y * width + x] = v;
            }
        }
        flow
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn representation(&self) -> FlowRepresentation {
        self.representation
    }

    pub(crate) fn set_representation(&mut self, repr: FlowRepresentation) {
        self.representation = repr;
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, u: f32, v: f32) {
        let i = y * self.width + x;
        self.u[i] = u;
        self.v[i] = v;
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    #[inline]
    pub fn set_valid(&mut self, x: usize, y: usize, valid: bool) {
        self.valid[y * self.width + x] = valid;
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    /// Checks the representation invariants: finiteness of valid pixels and,
    /// for `Wrapped360`, `|u| <= W/2`.
    pub fn check_invariants(&self) -> Result<()> {
        let half = self.width as f32 / 2.0;
        for i in 0..self.u.len() {
            if !self.valid[i] {
                continue;
            }
            if !self.u[i].is_finite() || !self.v[i].is_finite() {
                return Err(Error::contract("non-finite flow on a valid pixel"));
            }
            if self.representation == FlowRepresentation::Wrapped360 && self.u[i].abs() > half {
                return Err(Error::contract(format!(
                    "wrapped flow |u|={} exceeds W/2={}",
                    self.u[i].abs(),
                    half
                )));
            }
        }
        Ok(())
    }
}

/// Color panorama (or grayscale) with normalized samples in `[0, 1]`.
///
/// Columns map linearly to longitude over 360° and rows to latitude over 180°
/// using the pixel-center convention: column `x` is longitude
/// `(x + 0.5)/W * 360 - 180`, row `y` is latitude `90 - (y + 0.5)/H * 180`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f32>,
}

impl EquirectImage {
    /// Black equirectangular image. Requires `width == 2 * height` and 1 or 3
    /// channels.
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        if width != 2 * height || height == 0 {
            return Err(Error::contract(format!(
                "equirectangular image requires width == 2*height, got {}x{}",
                width, height
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::contract("channels must be 1 or 3"));
        }
        Ok(EquirectImage {
            width,
            height,
            channels,
            samples: vec![0.0; width * height * channels],
        })
    }

    /// Builds an image container without the 2:1 aspect check, for rasters
    /// that are not panoramas (visualizations, cube faces).
    pub fn from_raw_parts(width: usize, height: usize, channels: usize, samples: Vec<f32>) -> Self {
        assert_eq!(samples.len(), width * height * channels);
        assert!(channels == 1 || channels == 3);
        EquirectImage {
            width,
            height,
            channels,
            samples,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut img = EquirectImage::new(width, height, channels)?;
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    img.samples[(y * width + x) * channels + c] = f(x, y, c);
                }
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f32] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f32) {
        self.samples[(y * self.width + x) * self.channels + c] = value;
    }

    /// Bilinear sample at fractional array coordinates `(x, y)`, writing one
    /// value per channel into `out`. Returns `false` (leaving `out` zeroed)
    /// when the location falls outside the image: vertically outside
    /// `[0, H-1]`, or horizontally outside `[0, W-1]` unless `wrap_x` is set,
    /// in which case the horizontal coordinate wraps modulo `W`.
    pub fn sample_bilinear(&self, x: f64, y: f64, wrap_x: bool, out: &mut [f32]) -> bool {
        debug_assert_eq!(out.len(), self.channels);
        bilinear(
            &self.samples,
            self.width,
            self.height,
            self.channels,
            x,
            y,
            wrap_x,
            out,
        )
    }

    /// Roll columns to the right by `shift` (panoramic yaw by integer pixels).
    pub fn roll_columns(&self, shift: usize) -> EquirectImage {
        let mut out = self.clone();
        let shift = shift % self.width;
        for y in 0..self.height {
            for x in 0..self.width {
                let src = (x + self.width - shift) % self.width;
                for c in 0..self.channels {
                    out.samples[(y * self.width + x) * self.channels + c] =
                        self.samples[(y * self.width + src) * self.channels + c];
                }
            }
        }
        out
    }

    /// Mean luminance view used by feature encoders.
    pub fn to_gray(&self) -> Vec<f32> {
        let n = self.width * self.height;
        let mut gray = vec![0.0f32; n];
        if self.channels == 1 {
            gray.copy_from_slice(&self.samples);
        } else {
            for i in 0..n {
                let base = i * 3;
                gray[i] =
                    (self.samples[base] + self.samples[base + 1] + self.samples[base + 2]) / 3.0;
            }
        }
        gray
    }
}

/// Shared bilinear sampler over a packed `(y, x, channel)` buffer.
///
/// Exact at integer coordinates and on constant inputs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn bilinear(
    samples: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    x: f64,
    y: f64,
    wrap_x: bool,
    out: &mut [f32],
) -> bool {
    for o in out.iter_mut() {
        *o = 0.0;
    }
    if !x.is_finite() || !y.is_finite() {
        return false;
    }
    if y < 0.0 || y > (height - 1) as f64 {
        return false;
    }
    let x = if wrap_x {
        x.rem_euclid(width as f64)
    } else {
        if x < 0.0 || x > (width - 1) as f64 {
            return false;
        }
        x
    };

    let x0 = x.floor();
    let y0 = y.floor();
    let fx = (x - x0) as f32;
    let fy = (y - y0) as f32;
    let x0 = x0 as usize;
    let y0 = y0 as usize;
    let x1 = if wrap_x {
        (x0 + 1) % width
    } else {
        (x0 + 1).min(width - 1)
    };
    let y1 = (y0 + 1).min(height - 1);

    let i00 = (y0 * width + x0) * channels;
    let i10 = (y0 * width + x1) * channels;
    let i01 = (y1 * width + x0) * channels;
    let i11 = (y1 * width + x1) * channels;
    // Nested lerps rather than a weighted sum: constant inputs reproduce the
    // constant exactly because each lerp of equal values is exact.
    for c in 0..channels {
        let top = samples[i00 + c] + fx * (samples[i10 + c] - samples[i00 + c]);
        let bot = samples[i01 + c] + fx * (samples[i11 + c] - samples[i01 + c]);
        out[c] = top + fy * (bot - top);
    }
    true
}
