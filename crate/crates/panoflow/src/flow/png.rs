//! PNG image I/O. Samples are quantized to 8 bits with round-to-nearest;
//! encoder settings are the `image` crate defaults, which are deterministic.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{Error, Result};
use crate::flow::EquirectImage;

pub fn load_png(path: impl AsRef<Path>) -> Result<EquirectImage> {
    let path = path.as_ref();
    let dynimg = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(format!("{}: {}", path.display(), other)),
    })?;
    let img = match dynimg {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let samples = g.pixels().map(|p| p.0[0] as f32 / 255.0).collect();
            EquirectImage::from_raw_parts(w, h, 1, samples)
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let samples = rgb
                .pixels()
                .flat_map(|p| p.0.iter().map(|&b| b as f32 / 255.0))
                .collect();
            EquirectImage::from_raw_parts(w, h, 3, samples)
        }
    };
    Ok(img)
}

pub fn save_png(image: &EquirectImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let quant = |s: f32| (s.clamp(0.0, 1.0) * 255.0).round() as u8;
    let res = if image.channels() == 1 {
        let buf: Vec<u8> = image.samples().iter().map(|&s| quant(s)).collect();
        GrayImage::from_raw(w, h, buf).unwrap().save(path)
    } else {
        let buf: Vec<u8> = image.samples().iter().map(|&s| quant(s)).collect();
        RgbImage::from_raw(w, h, buf).unwrap().save(path)
    };
    res.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(format!("{}: {}", path.display(), other)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_within_quantization() {
        let img = EquirectImage::from_fn(16, 8, 3, |x, y, c| {
            ((x + 2 * y + 3 * c) % 17) as f32 / 16.0
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        save_png(&img, &path).unwrap();
        let back = load_png(&path).unwrap();
        assert_eq!(back.width(), 16);
        assert_eq!(back.channels(), 3);
        for i in 0..img.samples().len() {
            assert!((img.samples()[i] - back.samples()[i]).abs() <= 0.5 / 255.0 + 1e-6);
        }
    }

    #[test]
    fn save_is_deterministic() {
        let img = EquirectImage::from_fn(16, 8, 3, |x, y, c| ((x * y + c) % 7) as f32 / 6.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.png"), dir.path().join("b.png"));
        save_png(&img, &p1).unwrap();
        save_png(&img, &p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }
}
