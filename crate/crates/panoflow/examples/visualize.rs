//! Renders the color-wheel visualization of a rotation flow field and writes
//! it as a PNG.
//!
//!     cargo run --example visualize

use panoflow::flow::{save_png, visualize_flow};
use panoflow::spherical::{rotation_flow_gt, RotationSpec};

fn main() -> panoflow::Result<()> {
    let (w, h) = (512usize, 256usize);
    let gt = rotation_flow_gt(&RotationSpec::new(20.0, 10.0, 5.0), w, h)?;

    // Saturation threshold: vectors at or above this magnitude map to fully
    // saturated colors; shorter ones fade toward white.
    let image = visualize_flow(&gt, 40.0)?;
    let path = std::env::temp_dir().join("panoflow-rotation-flow.png");
    save_png(&image, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
