//! Synthetic panoramic frame pairs with exact ground truth, plus
//! condition-tagged mini-dataset generation.
//!
//! Motion comes from pure rotations (analytic, depth-free ground truth) or
//! from user-supplied smooth flow fields (inverted numerically). Weather
//! conditions are realized as pointwise affine photometric maps applied
//! identically to both frames after warping; affine maps commute with
//! bilinear resampling and never touch the ground truth, so every photometric
//! oracle stays exact.
//!
//! Everything is seeded and deterministic: identical inputs yield
//! bit-identical images, flow files, and dataset trees.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    load_png, save_png, write_flo, EquirectImage, FlowField, FlowRepresentation,
};
use crate::spherical::{convert_to_360, rotate_equirect, rotation_flow_gt, RotationSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TextureKind {
    /// Seeded multi-octave value noise, periodic in longitude.
    ProceduralNoise,
    /// High-contrast checkerboard.
    Checker,
    /// Smooth function of the view direction, continuous across the seam and
    /// the poles.
    AnalyticGradient,
    /// A PNG resampled to panorama size.
    ImageFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeatherCondition {
    Sunny,
    Cloud,
    Fog,
    Rain,
}

impl WeatherCondition {
    pub const ALL: [WeatherCondition; 4] = [
        WeatherCondition::Sunny,
        WeatherCondition::Cloud,
        WeatherCondition::Fog,
        WeatherCondition::Rain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeatherCondition::Sunny => "sunny",
            WeatherCondition::Cloud => "cloud",
            WeatherCondition::Fog => "fog",
            WeatherCondition::Rain => "rain",
        }
    }

    /// Pointwise affine photometric map `s -> a·s + b`. Affinity matters:
    /// it makes the condition commute with bilinear warping, keeping warped
    /// pairs photometrically consistent.
    fn coefficients(self) -> (f32, f32) {
        match self {
            WeatherCondition::Sunny => (1.0, 0.0),
            WeatherCondition::Cloud => (0.7, 0.15),
            WeatherCondition::Fog => (0.45, 0.45),
            WeatherCondition::Rain => (0.65, 0.08),
        }
    }

    pub fn apply(self, image: &EquirectImage) -> EquirectImage {
        let (a, b) = self.coefficients();
        if a == 1.0 && b == 0.0 {
            return image.clone();
        }
        let mut out = image.clone();
        for s in out.samples_mut() {
            *s = (a * *s + b).clamp(0.0, 1.0);
        }
        out
    }
}

impl std::str::FromStr for WeatherCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        WeatherCondition::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown condition '{s}' (expected sunny|cloud|fog|rain)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub texture: TextureKind,
    pub seed: u64,
    pub condition: WeatherCondition,
}

impl SyntheticScene {
    pub fn new(texture: TextureKind, seed: u64, condition: WeatherCondition) -> Self {
        SyntheticScene {
            texture,
            seed,
            condition,
        }
    }

    /// Renders the raw texture (condition not applied) at `width × width/2`.
    pub fn render(&self, width: usize) -> Result<EquirectImage> {
        if width % 2 != 0 || width < 8 {
            return Err(Error::contract("panorama width must be even and >= 8"));
        }
        let height = width / 2;
        match &self.texture {
            TextureKind::ProceduralNoise => Ok(value_noise(width, height, self.seed)),
            TextureKind::Checker => {
                let cell = (height / 8).max(1);
                EquirectImage::from_fn(width, height, 3, |x, y, _| {
                    if (x / cell + y / cell) % 2 == 0 {
                        0.85
                    } else {
                        0.25
                    }
                })
            }
            TextureKind::AnalyticGradient => {
                EquirectImage::from_fn(width, height, 3, |x, y, c| {
                    let lon = ((x as f64 + 0.5) / width as f64 * 360.0 - 180.0).to_radians();
                    let lat = (90.0 - (y as f64 + 0.5) / height as f64 * 180.0).to_radians();
                    let v = [
                        lat.cos() * lon.cos(),
                        lat.cos() * lon.sin(),
                        lat.sin(),
                    ];
                    (0.5 + 0.5 * v[c]) as f32
                })
            }
            TextureKind::ImageFile { path } => {
                let src = load_png(path)?;
                resample_to(&src, width, height)
            }
        }
    }
}

/// Periodic (in longitude) multi-octave value noise, 3 channels.
fn value_noise(width: usize, height: usize, seed: u64) -> EquirectImage {
    // (cells across longitude, amplitude) per octave. Octaves keep halving
    // down to cells of 2 px so local windows stay discriminable (clearly
    // above 8-bit quantization) at any resolution.
    let mut octaves = vec![(8usize, 0.5f32), (16, 0.3), (32, 0.2)];
    let mut nx = 64;
    let mut amp = 0.14f32;
    while nx <= width / 2 {
        octaves.push((nx, amp));
        nx *= 2;
        amp *= 0.72;
    }
    let mut img = EquirectImage::from_raw_parts(
        width,
        height,
        3,
        vec![0.5; width * height * 3],
    );
    for (oi, &(nx, amp)) in octaves.iter().enumerate() {
        let ny = nx / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9 * (oi as u64 + 1)));
        let lattice: Vec<f32> = (0..(ny + 1) * nx * 3).map(|_| rng.gen::<f32>()).collect();
        let at = |ix: usize, iy: usize, c: usize| lattice[(iy * nx + ix % nx) * 3 + c];
        for y in 0..height {
            let fy = y as f32 / height as f32 * ny as f32;
            let iy = (fy.floor() as usize).min(ny - 1);
            let ty = smooth(fy - iy as f32);
            for x in 0..width {
                let fx = x as f32 / width as f32 * nx as f32;
                let ix = (fx.floor() as usize).min(nx - 1);
                let tx = smooth(fx - ix as f32);
                for c in 0..3 {
                    let v00 = at(ix, iy, c);
                    let v10 = at(ix + 1, iy, c);
                    let v01 = at(ix, iy + 1, c);
                    let v11 = at(ix + 1, iy + 1, c);
                    let v = v00 * (1.0 - tx) * (1.0 - ty)
                        + v10 * tx * (1.0 - ty)
                        + v01 * (1.0 - tx) * ty
                        + v11 * tx * ty;
                    let cur = img.get(x, y, c);
                    img.set(x, y, c, cur + amp * (v - 0.5));
                }
            }
        }
    }
    for s in img.samples_mut() {
        *s = s.clamp(0.0, 1.0);
    }
    img
}

#[inline]
fn smooth(t: f32) -> f32 {
    t * t * (3.0 - 2.0 * t)
}

fn resample_to(src: &EquirectImage, width: usize, height: usize) -> Result<EquirectImage> {
    let ch = src.channels();
    let mut out = EquirectImage::new(width, height, ch)?;
    let mut px = [0.0f32; 3];
    for y in 0..height {
        let sy = ((y as f64 + 0.5) / height as f64) * src.height() as f64 - 0.5;
        let sy = sy.clamp(0.0, (src.height() - 1) as f64);
        for x in 0..width {
            let sx = ((x as f64 + 0.5) / width as f64) * src.width() as f64 - 0.5;
            src.sample_bilinear(sx, sy, true, &mut px[..ch]);
            for c in 0..ch {
                out.set(x, y, c, px[c]);
            }
        }
    }
    Ok(out)
}

/// Frame pair under a pure rotation, with analytic wrapped ground truth.
pub fn gen_rotation_pair(
    scene: &SyntheticScene,
    rot: &RotationSpec,
    width: usize,
) -> Result<(EquirectImage, EquirectImage, FlowField)> {
    let i1 = scene.render(width)?;
    let i2 = if *rot == RotationSpec::identity() {
        i1.clone()
    } else {
        rotate_equirect(&i1, rot)?
    };
    let gt = rotation_flow_gt(rot, width, width / 2)?;
    Ok((scene.condition.apply(&i1), scene.condition.apply(&i2), gt))
}

/// Frame pair realizing a given smooth classical flow exactly: `I2` is built
/// so that `I2(p + flow(p)) == I1(p)` (up to interpolation), by backward
/// warping `I1` with the numerically inverted flow.
///
/// The flow must be orientation-preserving: the Jacobian determinant of
/// `p -> p + flow(p)` must stay above 0.1 everywhere (fold-over would make
/// the pair ambiguous). Horizontal wrap is assumed.
pub fn gen_warp_pair(
    scene: &SyntheticScene,
    flow: &FlowField,
    width: usize,
) -> Result<(EquirectImage, EquirectImage, FlowField)> {
    if flow.representation() != FlowRepresentation::Classical {
        return Err(Error::contract("gen_warp_pair expects classical flow"));
    }
    if flow.width() != width || flow.height() != width / 2 {
        return Err(Error::contract("flow dimensions must match the panorama"));
    }
    let (w, h) = (flow.width(), flow.height());
    check_invertible(flow)?;
    let i1 = scene.render(width)?;

    let is_zero = flow.u().iter().all(|&u| u == 0.0) && flow.v().iter().all(|&v| v == 0.0);
    let i2 = if is_zero {
        i1.clone()
    } else {
        let ch = i1.channels();
        let mut i2 = i1.clone();
        let mut px = [0.0f32; 3];
        for y in 0..h {
            for x in 0..w {
                // Fixed point of p = q - flow(p).
                let q = (x as f64, y as f64);
                let (mut px_, mut py_) = q;
                for _ in 0..25 {
                    let (fu, fv) = sample_flow(flow, px_, py_);
                    px_ = q.0 - fu;
                    py_ = (q.1 - fv).clamp(0.0, (h - 1) as f64);
                }
                let ok = i1.sample_bilinear(px_, py_, true, &mut px[..ch]);
                for c in 0..ch {
                    i2.set(x, y, c, if ok { px[c] } else { 0.0 });
                }
            }
        }
        i2
    };
    let gt = convert_to_360(flow)?;
    Ok((scene.condition.apply(&i1), scene.condition.apply(&i2), gt))
}

/// Bilinear flow lookup with horizontal wrap and vertical clamp.
fn sample_flow(flow: &FlowField, x: f64, y: f64) -> (f64, f64) {
    let (w, h) = (flow.width(), flow.height());
    let x = x.rem_euclid(w as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize % w;
    let x1 = (x0 + 1) % w;
    let y0 = y.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let tx = (x - x.floor()) as f64;
    let ty = y - y0 as f64;
    let g = |xi: usize, yi: usize| {
        let (u, v) = flow.get(xi, yi);
        (u as f64, v as f64)
    };
    let (u00, v00) = g(x0, y0);
    let (u10, v10) = g(x1, y0);
    let (u01, v01) = g(x0, y1);
    let (u11, v11) = g(x1, y1);
    (
        u00 * (1.0 - tx) * (1.0 - ty) + u10 * tx * (1.0 - ty) + u01 * (1.0 - tx) * ty
            + u11 * tx * ty,
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty
            + v11 * tx * ty,
    )
}

/// Rejects flow whose forward map folds over (finite-difference Jacobian).
fn check_invertible(flow: &FlowField) -> Result<()> {
    let (w, h) = (flow.width(), flow.height());
    for y in 0..h.saturating_sub(1) {
        for x in 0..w {
            let (u, v) = flow.get(x, y);
            let (ur, vr) = flow.get((x + 1) % w, y);
            let (ud, vd) = flow.get(x, y + 1);
            let a = 1.0 + (ur - u) as f64;
            let b = (ud - u) as f64;
            let c = (vr - v) as f64;
            let d = 1.0 + (vd - v) as f64;
            if a * d - b * c < 0.1 {
                return Err(Error::contract(format!(
                    "flow folds over near ({x}, {y}); Jacobian determinant {:.3} < 0.1",
                    a * d - b * c
                )));
            }
        }
    }
    Ok(())
}

/// One scene listed in a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub texture: TextureKind,
    pub seed: u64,
}

/// Dataset description: the cross product of scenes, rotations, and
/// conditions is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub width: usize,
    pub scenes: Vec<SceneSpec>,
    pub rotations: Vec<RotationSpec>,
    pub conditions: Vec<WeatherCondition>,
}

/// Metadata written next to each generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub seed: u64,
    pub texture: TextureKind,
    pub rotation: RotationSpec,
    pub condition: WeatherCondition,
    pub width: usize,
    pub generator_version: String,
}

/// One generated sequence as reported back to the caller.
#[derive(Debug, Clone)]
pub struct GeneratedSequence {
    pub condition: WeatherCondition,
    pub seq_id: String,
    pub dir: PathBuf,
}

/// Generates `<root>/<condition>/<seq_id>/{frame_0001.png, frame_0002.png,
/// flow_0001.flo, meta.json}` for every manifest entry.
///
/// Each sequence directory is written to a temporary sibling and renamed into
/// place, so no partially written sequence ever appears under its final name.
/// Regeneration from the same manifest produces a byte-identical tree.
pub fn gen_dataset(manifest: &DatasetManifest, root: &Path) -> Result<Vec<GeneratedSequence>> {
    if manifest.scenes.is_empty() || manifest.rotations.is_empty() || manifest.conditions.is_empty()
    {
        return Err(Error::contract(
            "manifest needs at least one scene, rotation, and condition",
        ));
    }
    let mut out = Vec::new();
    for &condition in &manifest.conditions {
        let cond_dir = root.join(condition.name());
        std::fs::create_dir_all(&cond_dir).map_err(|e| Error::io(&cond_dir, e))?;
        let mut seq_no = 0usize;
        for scene_spec in &manifest.scenes {
            for rot in &manifest.rotations {
                seq_no += 1;
                let seq_id = format!("seq_{seq_no:04}");
                let final_dir = cond_dir.join(&seq_id);
                let tmp_dir = cond_dir.join(format!(".tmp-{seq_id}"));
                if tmp_dir.exists() {
                    std::fs::remove_dir_all(&tmp_dir).map_err(|e| Error::io(&tmp_dir, e))?;
                }
                std::fs::create_dir_all(&tmp_dir).map_err(|e| Error::io(&tmp_dir, e))?;

                let scene =
                    SyntheticScene::new(scene_spec.texture.clone(), scene_spec.seed, condition);
                let (i1, i2, gt) = gen_rotation_pair(&scene, rot, manifest.width)?;
                save_png(&i1, tmp_dir.join("frame_0001.png"))?;
                save_png(&i2, tmp_dir.join("frame_0002.png"))?;
                write_flo(&gt, tmp_dir.join("flow_0001.flo"))?;
                let meta = SequenceMeta {
                    seed: scene_spec.seed,
                    texture: scene_spec.texture.clone(),
                    rotation: *rot,
                    condition,
                    width: manifest.width,
                    generator_version: env!("CARGO_PKG_VERSION").to_string(),
                };
                let meta_path = tmp_dir.join("meta.json");
                let json = serde_json::to_string_pretty(&meta)
                    .map_err(|e| Error::Format(e.to_string()))?;
                std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))?;

                if final_dir.exists() {
                    std::fs::remove_dir_all(&final_dir).map_err(|e| Error::io(&final_dir, e))?;
                }
                std::fs::rename(&tmp_dir, &final_dir).map_err(|e| Error::io(&final_dir, e))?;
                out.push(GeneratedSequence {
                    condition,
                    seq_id,
                    dir: final_dir,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::backward_warp;

    fn noise_scene(seed: u64) -> SyntheticScene {
        SyntheticScene::new(TextureKind::ProceduralNoise, seed, WeatherCondition::Sunny)
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = noise_scene(7).render(128).unwrap();
        let b = noise_scene(7).render(128).unwrap();
        assert_eq!(a, b);
        let c = noise_scene(8).render(128).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn identity_rotation_gives_equal_frames_and_zero_gt() {
        let (i1, i2, gt) =
            gen_rotation_pair(&noise_scene(1), &RotationSpec::identity(), 128).unwrap();
        assert_eq!(i1, i2);
        assert!(gt.u().iter().all(|&u| u == 0.0));
        assert!(gt.v().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn yaw_ten_degrees_gives_uniform_column_shift() {
        let rot = RotationSpec::new(10.0, 0.0, 0.0);
        let (_, _, gt) = gen_rotation_pair(&noise_scene(2), &rot, 1024).unwrap();
        let expected = 10.0 / 360.0 * 1024.0;
        for &(x, y) in &[(0usize, 256usize), (500, 10), (1023, 511)] {
            let (u, v) = gt.get(x, y);
            assert!(
                (u.abs() - expected as f32).abs() < 1e-3,
                "u = {u}, expected |u| = {expected}"
            );
            assert!(v.abs() < 1e-3);
        }
    }

    #[test]
    fn rotation_pair_is_photometrically_consistent() {
        let rot = RotationSpec::new(23.0, 8.0, 0.0);
        let (i1, i2, gt) = gen_rotation_pair(&noise_scene(3), &rot, 256).unwrap();
        let warped = backward_warp(&i2, &gt, true).unwrap();
        let (w, h) = (i1.width(), i1.height());
        let mut total = 0.0f64;
        let mut count = 0usize;
        for y in 0..h {
            let lat = 90.0 - (y as f64 + 0.5) / h as f64 * 180.0;
            if lat.abs() >= 60.0 {
                continue;
            }
            for x in 0..w {
                if !warped.is_valid(x, y) {
                    continue;
                }
                for c in 0..i1.channels() {
                    total += (warped.image.get(x, y, c) - i1.get(x, y, c)).abs() as f64;
                    count += 1;
                }
            }
        }
        let mean = total / count as f64;
        assert!(mean < 2.0 / 255.0, "mean photometric error {mean}");
    }

    #[test]
    fn zero_flow_warp_pair_is_identity() {
        let flow = FlowField::zeros(128, 64);
        let (i1, i2, gt) = gen_warp_pair(&noise_scene(4), &flow, 128).unwrap();
        assert_eq!(i1, i2);
        assert!(gt.u().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn constant_flow_warp_pair_is_a_column_roll() {
        let flow = FlowField::from_fn(128, 64, FlowRepresentation::Classical, |_, _| (5.0, 0.0));
        let (i1, i2, _) = gen_warp_pair(&noise_scene(5), &flow, 128).unwrap();
        assert_eq!(i2, i1.roll_columns(5));
    }

    #[test]
    fn folding_flow_is_rejected() {
        let flow = FlowField::from_fn(128, 64, FlowRepresentation::Classical, |x, _| {
            (-1.5 * x as f32, 0.0)
        });
        assert!(matches!(
            gen_warp_pair(&noise_scene(6), &flow, 128),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn conditions_change_photometry_but_not_gt() {
        let rot = RotationSpec::new(15.0, 0.0, 0.0);
        let mut gts = Vec::new();
        let mut images = Vec::new();
        for condition in WeatherCondition::ALL {
            let scene = SyntheticScene::new(TextureKind::ProceduralNoise, 9, condition);
            let (i1, _, gt) = gen_rotation_pair(&scene, &rot, 128).unwrap();
            gts.push(gt);
            images.push(i1);
        }
        for gt in &gts[1..] {
            assert_eq!(gt.u(), gts[0].u());
            assert_eq!(gt.v(), gts[0].v());
        }
        assert_ne!(images[0], images[2], "fog must alter the photometry");
    }

    #[test]
    fn dataset_layout_and_determinism() {
        let manifest = DatasetManifest {
            width: 64,
            scenes: vec![SceneSpec {
                texture: TextureKind::ProceduralNoise,
                seed: 11,
            }],
            rotations: vec![
                RotationSpec::new(5.0, 0.0, 0.0),
                RotationSpec::new(-3.0, 2.0, 0.0),
            ],
            conditions: vec![WeatherCondition::Sunny, WeatherCondition::Fog],
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let seqs = gen_dataset(&manifest, d1.path()).unwrap();
        gen_dataset(&manifest, d2.path()).unwrap();
        assert_eq!(seqs.len(), 4);

        let mut rel_paths = Vec::new();
        for seq in &seqs {
            for f in ["frame_0001.png", "frame_0002.png", "flow_0001.flo", "meta.json"] {
                let p = seq.dir.join(f);
                assert!(p.is_file(), "{} missing", p.display());
                rel_paths.push(p.strip_prefix(d1.path()).unwrap().to_path_buf());
            }
        }
        for rel in rel_paths {
            let a = std::fs::read(d1.path().join(&rel)).unwrap();
            let b = std::fs::read(d2.path().join(&rel)).unwrap();
            assert_eq!(a, b, "{} differs between regenerations", rel.display());
        }
    }
}
