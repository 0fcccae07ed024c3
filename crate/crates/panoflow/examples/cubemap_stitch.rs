//! Stitches six cube faces into an equirectangular panorama and checks the
//! result against direct evaluation of the analytic face texture.
//!
//!     cargo run --example cubemap_stitch

use panoflow::spherical::{cubemap_to_equirect, pix_to_sphere, CubeFaceSet};

fn main() -> panoflow::Result<()> {
    // Smooth texture defined on sphere directions, so every face edge has an
    // exactly matching neighbor.
    let texture = |d: [f64; 3], c: usize| {
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        (0.5 + 0.45 * d[c] / n) as f32
    };
    let faces = CubeFaceSet::render(128, 3, texture)?;
    let (w, h) = (512usize, 256usize);
    let pano = cubemap_to_equirect(&faces, w)?;

    let mut max_err = 0.0f32;
    for y in 0..h {
        for x in 0..w {
            let d = pix_to_sphere(x as f64, y as f64, w, h)?.unit_vector();
            for c in 0..3 {
                max_err = max_err.max((pano.get(x, y, c) - texture(d, c)).abs());
            }
        }
    }
    println!("stitched {w}x{h} panorama, max deviation from analytic: {max_err:.5}");

    let mut seam = 0.0f32;
    for y in 0..h {
        for c in 0..3 {
            seam = seam.max((pano.get(0, y, c) - pano.get(w - 1, y, c)).abs());
        }
    }
    println!("max jump across the left/right seam: {seam:.5}");
    Ok(())
}
