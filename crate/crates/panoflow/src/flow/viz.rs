//! Color-wheel flow visualization with saturation falloff for large flows.
//!
//! Hue encodes flow direction (`atan2(v, u)`), saturation encodes magnitude
//! relative to a threshold `T`: `s(m) = m/T` for `m <= T` and `s(m) = T/m`
//! beyond it, so very large flows fade back toward white instead of clipping
//! at full saturation. Zero flow renders white; invalid pixels render black.

use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField};

/// Saturation assigned to magnitude `m` at threshold `t`.
///
/// Continuous at `m == t` (both branches give 1), strictly increasing below
/// the threshold and strictly decreasing above it.
pub fn saturation_falloff(m: f64, t: f64) -> f64 {
    if m <= t {
        m / t
    } else {
        t / m
    }
}

fn hsv_to_rgb(h_deg: f64, s: f64, v: f64) -> [f32; 3] {
    let h = h_deg.rem_euclid(360.0) / 60.0;
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [(r1 + m) as f32, (g1 + m) as f32, (b1 + m) as f32]
}

/// Renders a flow field to a 3-channel color image.
pub fn visualize_flow(flow: &FlowField, saturation_threshold: f64) -> Result<EquirectImage> {
    if !(saturation_threshold > 0.0) {
        return Err(Error::contract("saturation threshold must be positive"));
    }
    let (w, h) = (flow.width(), flow.height());
    let mut samples = vec![0.0f32; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) * 3;
            if !flow.is_valid(x, y) {
                continue; // black
            }
            let (u, v) = flow.get(x, y);
            let (u, v) = (u as f64, v as f64);
            let mag = (u * u + v * v).sqrt();
            let rgb = if mag == 0.0 {
                [1.0, 1.0, 1.0]
            } else {
                let hue = v.atan2(u).to_degrees();
                let sat = saturation_falloff(mag, saturation_threshold);
                hsv_to_rgb(hue, sat, 1.0)
            };
            samples[i..i + 3].copy_from_slice(&rgb);
        }
    }
    // Flow fields are not constrained to 2:1, so build the container directly.
    Ok(EquirectImage::from_raw_parts(w, h, 3, samples))
}
