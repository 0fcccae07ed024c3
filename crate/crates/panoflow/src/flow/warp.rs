//! Backward warping of panoramas by a flow field.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField};

/// An image paired with a per-pixel validity mask for pixels whose sample
/// source left the input domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedImage {
    pub image: EquirectImage,
    pub valid: Vec<bool>,
}

impl MaskedImage {
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.image.width() + x]
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

/// Backward-warps `image` by `flow`: `output(x, y)` is the bilinear sample of
/// `image` at `(x + u, y + v)`.
///
/// With `wrap_horizontal` the horizontal sample coordinate wraps modulo the
/// width (panoramic cyclicity); otherwise out-of-range horizontal samples mark
/// the output pixel invalid. Vertical out-of-range always marks it invalid.
/// Pixels where `flow` is itself invalid are marked invalid.
pub fn backward_warp(
    image: &EquirectImage,
    flow: &FlowField,
    wrap_horizontal: bool,
) -> Result<MaskedImage> {
    if image.width() != flow.width() || image.height() != flow.height() {
        return Err(Error::contract(format!(
            "backward_warp: image {}x{} vs flow {}x{}",
            image.width(),
            image.height(),
            flow.width(),
            flow.height()
        )));
    }
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let mut out = image.clone();
    let mut valid = vec![false; w * h];

    out.samples_mut()
        .par_chunks_mut(w * ch)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, valid_row))| {
            let mut px = [0.0f32; 3];
            for x in 0..w {
                let ok = if flow.is_valid(x, y) {
                    let (u, v) = flow.get(x, y);
                    image.sample_bilinear(
                        x as f64 + u as f64,
                        y as f64 + v as f64,
                        wrap_horizontal,
                        &mut px[..ch],
                    )
                } else {
                    false
                };
                valid_row[x] = ok;
                for c in 0..ch {
                    row[x * ch + c] = if ok { px[c] } else { 0.0 };
                }
            }
        });

    Ok(MaskedImage { image: out, valid })
}
