//! Applies a radial distortion jointly to a frame pair and its flow, then
//! verifies the distorted pair is still photometrically consistent.
//!
//!     cargo run --release --example distortion_augmentation

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use panoflow::distortion::{distort_flow, distort_image, DistortionModel};
use panoflow::flow::{backward_warp, FlowField, FlowRepresentation};
use panoflow::synthetic::{gen_warp_pair, SyntheticScene, TextureKind, WeatherCondition};

fn main() -> panoflow::Result<()> {
    let (w, h) = (512usize, 256usize);

    // A smooth sinusoidal motion field and a frame pair realizing it.
    let flow = FlowField::from_fn(w, h, FlowRepresentation::Classical, |x, y| {
        let u = 4.0 * (std::f32::consts::TAU * y as f32 / h as f32).sin();
        let v = 3.0 * (std::f32::consts::TAU * x as f32 / w as f32).cos();
        (u, v)
    });
    let scene = SyntheticScene::new(TextureKind::ProceduralNoise, 7, WeatherCondition::Sunny);
    let (i1, i2, _gt) = gen_warp_pair(&scene, &flow, w)?;

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let model = DistortionModel::sample_augmentation(&mut rng, w, h)?;
    let p = model.params();
    println!("sampled model: k2={:.2e} k4={:.2e} k6={:.2e}", p.k2, p.k4, p.k6);

    let d1 = distort_image(&i1, &model)?;
    let d2 = distort_image(&i2, &model)?;
    let dflow = distort_flow(&flow, &model)?;

    // The distorted flow must still map distorted frame 1 onto distorted
    // frame 2: warp the distorted target back and compare.
    let warped = backward_warp(&d2.image, &dflow, true)?;
    let mut err = 0.0f64;
    let mut n = 0usize;
    for y in 0..h {
        for x in 0..w {
            if dflow.is_valid(x, y) && warped.is_valid(x, y) && d1.is_valid(x, y) {
                for c in 0..i1.channels() {
                    err += (warped.image.get(x, y, c) - d1.image.get(x, y, c)).abs() as f64;
                    n += 1;
                }
            }
        }
    }
    println!(
        "photometric consistency after distortion: mean abs err {:.5} over {} samples",
        err / n as f64,
        n
    );
    Ok(())
}
