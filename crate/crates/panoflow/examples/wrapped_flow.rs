//! Shows the 360 degree flow representation: classical displacements from a
//! large yaw rotation collapse to short wrapped vectors.
//!
//!     cargo run --example wrapped_flow

use panoflow::flow::{FlowField, FlowRepresentation};
use panoflow::spherical::{convert_to_360, rotation_flow_gt, wrap_shortest, RotationSpec};

fn range(flow: &FlowField) -> (f32, f32) {
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for &u in flow.u() {
        lo = lo.min(u);
        hi = hi.max(u);
    }
    (lo, hi)
}

fn main() -> panoflow::Result<()> {
    let (w, h) = (512usize, 256usize);

    // Analytic ground truth is already wrapped: a 350 degree yaw is a short
    // negative shift, not a near-full-width positive one.
    let gt = rotation_flow_gt(&RotationSpec::new(350.0, 0.0, 0.0), w, h)?;
    let (lo, hi) = range(&gt);
    println!("yaw 350 ground truth u in [{lo:.2}, {hi:.2}] (width {w})");

    // A classical field with the long route converts to the same short one.
    let long_shift = 350.0 / 360.0 * w as f32;
    let classical = FlowField::from_fn(w, h, FlowRepresentation::Classical, |_, _| {
        (long_shift, 0.0)
    });
    let wrapped = convert_to_360(&classical)?;
    let (lo, hi) = range(&wrapped);
    println!("classical u {long_shift:.2} wraps to [{lo:.2}, {hi:.2}]");

    for u in [-400.0, -256.0, 100.0, 256.0, 400.0] {
        println!("wrap_shortest({u:6.1}, {w}) = {:6.1}", wrap_shortest(u, w));
    }
    Ok(())
}
