//! Estimates flow on a panorama pair whose motion wraps across the seam,
//! comparing cyclic estimation against the plain single-pass run.
//!
//!     cargo run --release --example cyclic_estimation

use panoflow::backend::BuiltinMatcher;
use panoflow::cfe::{cyclic_estimate, CfeMode};
use panoflow::flow::epe;
use panoflow::spherical::RotationSpec;
use panoflow::synthetic::{gen_rotation_pair, SyntheticScene, TextureKind, WeatherCondition};

fn main() -> panoflow::Result<()> {
    // A 170 degree yaw moves every pixel almost half the panorama width, so
    // one of the two estimation views always crosses the seam.
    let scene = SyntheticScene::new(TextureKind::ProceduralNoise, 11, WeatherCondition::Sunny);
    let rot = RotationSpec::new(170.0, 0.0, 0.0);
    let (i1, i2, mut gt) = gen_rotation_pair(&scene, &rot, 512)?;
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            gt.set_valid(x, y, true);
        }
    }

    let matcher = BuiltinMatcher::new();
    for mode in [CfeMode::Naive, CfeMode::Default, CfeMode::HalfSamePadding] {
        let mut pred = cyclic_estimate(&matcher, &i1, &i2, mode)?;
        for y in 0..pred.height() {
            for x in 0..pred.width() {
                pred.set_valid(x, y, true);
            }
        }
        let stats = epe(&pred, &gt, None)?;
        println!(
            "{mode:?}: dense EPE {:.3} px, >3 px outliers {:.2}%",
            stats.epe_mean,
            100.0 * stats.px3
        );
    }
    Ok(())
}
