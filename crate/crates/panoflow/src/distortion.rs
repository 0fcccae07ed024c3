//! Radial distortion models and joint image/flow distortion augmentation.
//!
//! The coordinate map is driven by the polynomial
//! `P(x) = x + k2·x² + k4·x⁴ + k6·x⁶` evaluated at the radius `r` from the
//! distortion center. Two variants are provided:
//!
//! - `StandardRadial` (default): scales the centered offset,
//!   `q = c + (p - c) · P(r)/r`, which is the identity when all coefficients
//!   are zero.
//! - `OriginScaled`: multiplies the raw coordinate by `P(r)`, `q = P(r) · p`.
//!   This form scales about the origin rather than the center and is not the
//!   identity at zero coefficients; it is kept as a literal transcription of
//!   the raw-coordinate scaling formula some implementations use.
//!
//! Flow fields cannot be distorted by image resampling alone: the flow
//! endpoints are first corrected through the numeric inverse map `F'`
//! (per-pixel `F'(p + v) - F'(p)`), and the corrected field is then resampled
//! with the same backward mapping as image distortion.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField, FlowRepresentation, MaskedImage};

/// Coefficients the augmentation defaults to (empirically reasonable across
/// resolutions): `k2 = 1e-5`, `k4 = 1e-14`, `k6 = 1e-15`.
pub const DEFAULT_K2: f64 = 1e-5;
pub const DEFAULT_K4: f64 = 1e-14;
pub const DEFAULT_K6: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionVariant {
    OriginScaled,
    StandardRadial,
}

/// Serializable model parameters (the JSON sidecar format).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionParams {
    /// Distortion center; defaults to the image midpoint when absent.
    pub center: Option<(f64, f64)>,
    pub k2: f64,
    pub k4: f64,
    pub k6: f64,
    pub variant: DistortionVariant,
}

/// A validated radial distortion model bound to an image domain.
#[derive(Debug, Clone)]
pub struct DistortionModel {
    center: (f64, f64),
    k2: f64,
    k4: f64,
    k6: f64,
    variant: DistortionVariant,
    /// Radius of the farthest image corner from the center.
    r_max: f64,
}

impl DistortionModel {
    /// Builds and validates a model for a `width`×`height` pixel domain.
    ///
    /// Construction fails if the radial profile `P` is not strictly
    /// increasing (or not positive) over `[0, r_max]`, which would make the
    /// forward map non-injective.
    pub fn new(
        center: (f64, f64),
        k2: f64,
        k4: f64,
        k6: f64,
        variant: DistortionVariant,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let corners = [
            (0.0, 0.0),
            (width as f64 - 1.0, 0.0),
            (0.0, height as f64 - 1.0),
            (width as f64 - 1.0, height as f64 - 1.0),
        ];
        let r_max = corners
            .iter()
            .map(|&(x, y)| ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let model = DistortionModel {
            center,
            k2,
            k4,
            k6,
            variant,
            r_max,
        };
        // Monotonicity guard: sample the radial profile densely.
        let samples = 2048;
        let mut prev = 0.0f64;
        for i in 1..=samples {
            let r = r_max * i as f64 / samples as f64;
            let p = model.poly(r);
            if !(p > prev) || !p.is_finite() {
                return Err(Error::Numeric(format!(
                    "radial profile not strictly monotone at r = {r:.3}"
                )));
            }
            prev = p;
        }
        Ok(model)
    }

    /// Model from serializable parameters; the center defaults to the image
    /// midpoint.
    pub fn from_params(params: &DistortionParams, width: usize, height: usize) -> Result<Self> {
        let center = params.center.unwrap_or((
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
        ));
        DistortionModel::new(
            center,
            params.k2,
            params.k4,
            params.k6,
            params.variant,
            width,
            height,
        )
    }

    /// The default-coefficient standard model centered on the image.
    pub fn default_model(width: usize, height: usize) -> Result<Self> {
        DistortionModel::from_params(
            &DistortionParams {
                center: None,
                k2: DEFAULT_K2,
                k4: DEFAULT_K4,
                k6: DEFAULT_K6,
                variant: DistortionVariant::StandardRadial,
            },
            width,
            height,
        )
    }

    /// Centered identity model.
    pub fn identity(width: usize, height: usize) -> Result<Self> {
        DistortionModel::from_params(
            &DistortionParams {
                center: None,
                k2: 0.0,
                k4: 0.0,
                k6: 0.0,
                variant: DistortionVariant::StandardRadial,
            },
            width,
            height,
        )
    }

    /// Draws an augmentation model: the default coefficients jointly scaled
    /// by a uniform factor in `[0, 1.5]`. Scale 0 degrades to the identity.
    pub fn sample_augmentation(rng: &mut impl Rng, width: usize, height: usize) -> Result<Self> {
        let scale: f64 = rng.gen_range(0.0..=1.5);
        DistortionModel::from_params(
            &DistortionParams {
                center: None,
                k2: scale * DEFAULT_K2,
                k4: scale * DEFAULT_K4,
                k6: scale * DEFAULT_K6,
                variant: DistortionVariant::StandardRadial,
            },
            width,
            height,
        )
    }

    pub fn params(&self) -> DistortionParams {
        DistortionParams {
            center: Some(self.center),
            k2: self.k2,
            k4: self.k4,
            k6: self.k6,
            variant: self.variant,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn is_identity(&self) -> bool {
        self.k2 == 0.0
            && self.k4 == 0.0
            && self.k6 == 0.0
            && self.variant == DistortionVariant::StandardRadial
    }

    /// `P(x) = x + k2·x² + k4·x⁴ + k6·x⁶`, exactly as printed; `r` is not
    /// normalized.
    pub fn poly(&self, x: f64) -> f64 {
        let x2 = x * x;
        x + self.k2 * x2 + self.k4 * x2 * x2 + self.k6 * x2 * x2 * x2
    }

    /// Origin about which the map is a pure radial scaling.
    fn scaling_origin(&self) -> (f64, f64) {
        match self.variant {
            DistortionVariant::StandardRadial => self.center,
            DistortionVariant::OriginScaled => (0.0, 0.0),
        }
    }

    /// Forward coordinate map `F`. The identity model fixes every point
    /// bit-exactly (the centered round trip would otherwise cost an ulp).
    pub fn forward_point(&self, p: (f64, f64)) -> (f64, f64) {
        if self.is_identity() {
            return p;
        }
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        let r = (dx * dx + dy * dy).sqrt();
        match self.variant {
            DistortionVariant::StandardRadial => {
                if r == 0.0 {
                    // r -> 0 limit of P(r)/r is 1.
                    return self.center;
                }
                let scale = self.poly(r) / r;
                (self.center.0 + dx * scale, self.center.1 + dy * scale)
            }
            DistortionVariant::OriginScaled => {
                let pr = self.poly(r);
                (pr * p.0, pr * p.1)
            }
        }
    }

    /// Numeric inverse `F'`: returns `p` with `|F(p) - q| < 1e-6` px.
    ///
    /// The radial map preserves the angular direction about its scaling
    /// origin, so the inverse reduces to a bracketed bisection on the ray
    /// through `q` (tolerance 1e-9 in the ray parameter, bracket
    /// `[0, 4·r_max]`).
    pub fn inverse_point(&self, q: (f64, f64)) -> Result<(f64, f64)> {
        if self.is_identity() {
            return Ok(q);
        }
        let origin = self.scaling_origin();
        let (dx, dy) = (q.0 - origin.0, q.1 - origin.1);
        let target = (dx * dx + dy * dy).sqrt();
        if target == 0.0 {
            // F fixes the scaling origin (P(0) = 0 for the literal variant,
            // the center for the standard one).
            return Ok(origin);
        }
        let dir = (dx / target, dy / target);
        let along = |t: f64| -> f64 {
            let p = (origin.0 + t * dir.0, origin.1 + t * dir.1);
            let f = self.forward_point(p);
            (f.0 - origin.0) * dir.0 + (f.1 - origin.1) * dir.1
        };
        let (mut lo, mut hi) = (0.0f64, 4.0 * self.r_max);
        if along(hi) < target {
            return Err(Error::Numeric(format!(
                "no inverse within [0, {:.1}] for radius {:.3}",
                hi, target
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if along(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        Ok((origin.0 + t * dir.0, origin.1 + t * dir.1))
    }

    /// Endpoint correction of a single flow vector `v` anchored at `p`:
    /// `F'(p + v) - F'(p)`, together with the corrected anchor `F'(p)`.
    pub fn correct_vector(&self, p: (f64, f64), v: (f64, f64)) -> Result<((f64, f64), (f64, f64))> {
        let anchor = self.inverse_point(p)?;
        let tip = self.inverse_point((p.0 + v.0, p.1 + v.1))?;
        Ok((anchor, (tip.0 - anchor.0, tip.1 - anchor.1)))
    }

    /// Precomputed `F'` at every pixel center of a `width`×`height` grid.
    pub fn inverse_grid(&self, width: usize, height: usize) -> Result<InverseGrid> {
        let points: Vec<(f64, f64)> = (0..height)
            .into_par_iter()
            .flat_map_iter(|y| {
                (0..width).map(move |x| {
                    self.inverse_point((x as f64, y as f64))
                        .unwrap_or((f64::NAN, f64::NAN))
                })
            })
            .collect();
        if points.iter().any(|p| p.0.is_nan()) {
            return Err(Error::Numeric("inverse map failed inside the image".into()));
        }
        Ok(InverseGrid {
            width,
            height,
            points,
        })
    }
}

/// Immutable per-pixel inverse map, shareable across threads for repeated
/// augmentation of same-sized frames.
#[derive(Debug, Clone)]
pub struct InverseGrid {
    width: usize,
    height: usize,
    points: Vec<(f64, f64)>,
}

impl InverseGrid {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f64, f64) {
        self.points[y * self.width + x]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// Distorts an image by backward mapping: `output(q) = input(F'(q))`,
/// bilinear. Pixels whose preimage falls outside the input are zero-filled
/// and flagged in the validity mask.
pub fn distort_image(image: &EquirectImage, model: &DistortionModel) -> Result<MaskedImage> {
    let grid = model.inverse_grid(image.width(), image.height())?;
    distort_image_with_grid(image, &grid)
}

/// [`distort_image`] against a precomputed inverse grid.
pub fn distort_image_with_grid(image: &EquirectImage, grid: &InverseGrid) -> Result<MaskedImage> {
    if grid.width != image.width() || grid.height != image.height() {
        return Err(Error::contract("inverse grid size mismatch"));
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
                let (sx, sy) = grid.get(x, y);
                let ok = image.sample_bilinear(sx, sy, false, &mut px[..ch]);
                valid_row[x] = ok;
                for c in 0..ch {
                    row[x * ch + c] = if ok { px[c] } else { 0.0 };
                }
            }
        });
    Ok(MaskedImage { image: out, valid })
}

/// Distorts a classical flow field: per-pixel endpoint correction through
/// `F'`, then resampling of the corrected field with the same backward
/// mapping as [`distort_image`].
///
/// Output pixels are invalid where the resample source leaves the image, any
/// contributing corrected vector is invalid, or a corrected endpoint left the
/// image domain (clamping would fabricate wrong ground truth).
pub fn distort_flow(flow: &FlowField, model: &DistortionModel) -> Result<FlowField> {
    if flow.representation() != FlowRepresentation::Classical {
        return Err(Error::contract(
            "distort_flow is defined on classical flow; convert wrapped flow first",
        ));
    }
    if model.is_identity() {
        // F' is the identity and resampling happens on the identity grid;
        // short-circuit to keep the result bit-identical.
        return Ok(flow.clone());
    }
    let (w, h) = (flow.width(), flow.height());
    let grid = model.inverse_grid(w, h)?;

    // Stage 1: endpoint-corrected field on the original grid.
    let mut cu = vec![0.0f64; w * h];
    let mut cv = vec![0.0f64; w * h];
    let mut cvalid = vec![false; w * h];
    let rows: Vec<(usize, Vec<(f64, f64, bool)>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = Vec::with_capacity(w);
            for x in 0..w {
                if !flow.is_valid(x, y) {
                    row.push((0.0, 0.0, false));
                    continue;
                }
                let (u, v) = flow.get(x, y);
                let anchor = grid.get(x, y);
                let tip_src = (x as f64 + u as f64, y as f64 + v as f64);
                let tip = match model.inverse_point(tip_src) {
                    Ok(t) => t,
                    Err(_) => {
                        row.push((0.0, 0.0, false));
                        continue;
                    }
                };
                let in_domain = tip.0 >= 0.0
                    && tip.0 <= (w - 1) as f64
                    && tip.1 >= 0.0
                    && tip.1 <= (h - 1) as f64;
                row.push((tip.0 - anchor.0, tip.1 - anchor.1, in_domain));
            }
            (y, row)
        })
        .collect();
    for (y, row) in rows {
        for (x, (u, v, ok)) in row.into_iter().enumerate() {
            let i = y * w + x;
            cu[i] = u;
            cv[i] = v;
            cvalid[i] = ok;
        }
    }

    // Stage 2: resample the corrected field at F'(q).
    let mut out = FlowField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = grid.get(x, y);
            match sample_flow_bilinear(&cu, &cv, &cvalid, w, h, sx, sy) {
                Some((u, v)) => out.set(x, y, u as f32, v as f32),
                None => out.set_valid(x, y, false),
            }
        }
    }
    Ok(out)
}

/// Bilinear sample of a masked 2-channel field; `None` when the source is out
/// of range or any contributing tap is invalid.
fn sample_flow_bilinear(
    u: &[f64],
    v: &[f64],
    valid: &[bool],
    w: usize,
    h: usize,
    x: f64,
    y: f64,
) -> Option<(f64, f64)> {
    if !(0.0..=(w - 1) as f64).contains(&x) || !(0.0..=(h - 1) as f64).contains(&y) {
        return None;
    }
    let (x0f, y0f) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0f, y - y0f);
    let (x0, y0) = (x0f as usize, y0f as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let taps = [
        (y0 * w + x0, (1.0 - fx) * (1.0 - fy)),
        (y0 * w + x1, fx * (1.0 - fy)),
        (y1 * w + x0, (1.0 - fx) * fy),
        (y1 * w + x1, fx * fy),
    ];
    let mut su = 0.0;
    let mut sv = 0.0;
    for (i, wgt) in taps {
        if wgt > 0.0 && !valid[i] {
            return None;
        }
        su += wgt * u[i];
        sv += wgt * v[i];
    }
    Some((su, sv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const W: usize = 512;
    const H: usize = 256;

    fn default_model_fixture() -> DistortionModel {
        DistortionModel::default_model(W, H).unwrap()
    }

    #[test]
    fn zero_coefficients_standard_is_identity() {
        let m = DistortionModel::identity(W, H).unwrap();
        assert!(m.is_identity());
        for p in [(0.0, 0.0), (13.5, 200.25), (511.0, 255.0)] {
            assert_eq!(m.forward_point(p), p);
            assert_eq!(m.inverse_point(p).unwrap(), p);
        }
    }

    #[test]
    fn center_maps_to_center() {
        let m = default_model_fixture();
        let c = m.center();
        assert_eq!(m.forward_point(c), c);
        let (ix, iy) = m.inverse_point(c).unwrap();
        assert!((ix - c.0).abs() < 1e-9 && (iy - c.1).abs() < 1e-9);
    }

    #[test]
    fn radial_scale_at_r100_matches_polynomial_oracle() {
        // Independent evaluation: P(r)/r = 1 + k2 r + k4 r^3 + k6 r^5.
        let r = 100.0f64;
        let expected_scale = 1.0 + 1e-5 * r + 1e-14 * r.powi(3) + 1e-15 * r.powi(5);
        assert!((expected_scale - 1.00101001).abs() < 1e-8);

        let m = default_model_fixture();
        let c = m.center();
        let q = m.forward_point((c.0 + r, c.1));
        assert!((q.0 - (c.0 + r * expected_scale)).abs() < 1e-9);
        assert!((q.1 - c.1).abs() < 1e-12);
    }

    #[test]
    fn origin_scaled_matches_raw_coordinate_formula() {
        let m = DistortionModel::new(
            (255.5, 127.5),
            DEFAULT_K2,
            DEFAULT_K4,
            DEFAULT_K6,
            DistortionVariant::OriginScaled,
            W,
            H,
        )
        .unwrap();
        let p = (300.0, 100.0);
        let r = ((p.0 - 255.5f64).powi(2) + (p.1 - 127.5f64).powi(2)).sqrt();
        let pr = r + 1e-5 * r * r + 1e-14 * r.powi(4) + 1e-15 * r.powi(6);
        let q = m.forward_point(p);
        assert!((q.0 - pr * p.0).abs() < 1e-9);
        assert!((q.1 - pr * p.1).abs() < 1e-9);
    }

    #[test]
    fn inverse_of_forward_is_identity_both_variants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for variant in [DistortionVariant::StandardRadial, DistortionVariant::OriginScaled] {
            let m = DistortionModel::new(
                (255.5, 127.5),
                DEFAULT_K2,
                DEFAULT_K4,
                DEFAULT_K6,
                variant,
                W,
                H,
            )
            .unwrap();
            for _ in 0..1000 {
                let p = (rng.gen_range(0.0..W as f64), rng.gen_range(0.0..H as f64));
                let q = m.forward_point(p);
                let back = m.inverse_point(q).unwrap();
                let refwd = m.forward_point(back);
                let err = ((refwd.0 - q.0).powi(2) + (refwd.1 - q.1).powi(2)).sqrt();
                assert!(err < 1e-6, "{variant:?}: |F(F'(q)) - q| = {err}");
            }
        }
    }

    #[test]
    fn monotonicity_guard_rejects_folding_profile() {
        // Strongly negative k2 folds the radial profile inside the image.
        assert!(matches!(
            DistortionModel::new(
                (255.5, 127.5),
                -3e-3,
                0.0,
                0.0,
                DistortionVariant::StandardRadial,
                W,
                H
            ),
            Err(crate::Error::Numeric(_))
        ));
    }

    #[test]
    fn distort_image_identity_model_is_identity() {
        let img = EquirectImage::from_fn(64, 32, 3, |x, y, c| {
            ((x * 5 + y * 3 + c) % 17) as f32 / 16.0
        })
        .unwrap();
        let m = DistortionModel::identity(64, 32).unwrap();
        let out = distort_image(&img, &m).unwrap();
        assert!(out.all_valid());
        assert_eq!(out.image, img);
    }

    #[test]
    fn distort_image_constant_stays_constant_in_interior() {
        let img = EquirectImage::from_fn(64, 32, 1, |_, _, _| 0.7).unwrap();
        let m = DistortionModel::new(
            (31.5, 15.5),
            1e-3,
            0.0,
            0.0,
            DistortionVariant::StandardRadial,
            64,
            32,
        )
        .unwrap();
        let out = distort_image(&img, &m).unwrap();
        for y in 0..32 {
            for x in 0..64 {
                if out.is_valid(x, y) {
                    assert_eq!(out.image.get(x, y, 0), 0.7);
                }
            }
        }
    }

    #[test]
    fn barrel_square_corners_land_at_forward_mapped_positions() {
        // Bright centered square on black; in backward-mapped output the
        // square's corners sit at F(corner).
        let (w, h) = (256usize, 128usize);
        let half = 50.0f64;
        let c = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
        let img = EquirectImage::from_fn(w, h, 1, |x, y, _| {
            let (dx, dy) = (x as f64 - c.0, y as f64 - c.1);
            if dx.abs() <= half && dy.abs() <= half {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let m = DistortionModel::new(c, 5e-4, 0.0, 0.0, DistortionVariant::StandardRadial, w, h)
            .unwrap();
        let out = distort_image(&img, &m).unwrap();

        // Locate the white extent along the x axis through the center row and
        // compare with the forward-mapped square edge.
        let y_row = c.1.round() as usize;
        let mut max_x = 0usize;
        for x in 0..w {
            if out.image.get(x, y_row, 0) > 0.5 {
                max_x = x;
            }
        }
        let expected = m.forward_point((c.0 + half, c.1)).0;
        assert!(
            (max_x as f64 - expected).abs() <= 1.0,
            "edge at {max_x}, expected {expected}"
        );
    }

    #[test]
    fn distort_flow_identity_model_is_bit_exact() {
        let flow = FlowField::from_fn(64, 32, FlowRepresentation::Classical, |x, y| {
            ((x as f32 * 0.1).sin() * 2.0, (y as f32 * 0.2).cos())
        });
        let m = DistortionModel::identity(64, 32).unwrap();
        let out = distort_flow(&flow, &m).unwrap();
        assert_eq!(out, flow);
    }

    #[test]
    fn zero_flow_stays_zero_under_default_model() {
        let flow = FlowField::zeros(W, H);
        let out = distort_flow(&flow, &default_model_fixture()).unwrap();
        for y in 0..H {
            for x in 0..W {
                if out.is_valid(x, y) {
                    assert_eq!(out.get(x, y), (0.0, 0.0));
                }
            }
        }
        // The interior must remain valid.
        assert!(out.is_valid(W / 2, H / 2));
    }

    #[test]
    fn wrapped_input_rejected() {
        let mut flow = FlowField::zeros(W, H);
        flow.set_representation(FlowRepresentation::Wrapped360);
        assert!(matches!(
            distort_flow(&flow, &default_model_fixture()),
            Err(crate::Error::Contract(_))
        ));
    }

    #[test]
    fn vector_correction_commutes_with_flow_negation() {
        // Correcting v at p and -v at p + v gives exact negatives.
        let m = default_model_fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let p = (rng.gen_range(10.0..500.0), rng.gen_range(10.0..250.0));
            let v = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let (_, fwd) = m.correct_vector(p, v).unwrap();
            let (_, bwd) = m.correct_vector((p.0 + v.0, p.1 + v.1), (-v.0, -v.1)).unwrap();
            assert!((fwd.0 + bwd.0).abs() < 1e-6);
            assert!((fwd.1 + bwd.1).abs() < 1e-6);
        }
    }

    #[test]
    fn corrected_endpoint_property() {
        // At the correction stage (no resampling): anchor + corrected vector
        // equals F'(p + v) exactly.
        let m = default_model_fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let p = (rng.gen_range(0.0..511.0), rng.gen_range(0.0..255.0));
            let v = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let (anchor, corr) = m.correct_vector(p, v).unwrap();
            let tip = m.inverse_point((p.0 + v.0, p.1 + v.1)).unwrap();
            assert!((anchor.0 + corr.0 - tip.0).abs() < 1e-3);
            assert!((anchor.1 + corr.1 - tip.1).abs() < 1e-3);
        }
    }

    #[test]
    fn out_of_domain_endpoints_are_invalidated_not_clamped() {
        let (w, h) = (64usize, 32usize);
        let m = DistortionModel::new(
            ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0),
            1e-3,
            0.0,
            0.0,
            DistortionVariant::StandardRadial,
            w,
            h,
        )
        .unwrap();
        // Flow pointing far out of the image on the right edge.
        let flow = FlowField::from_fn(w, h, FlowRepresentation::Classical, |_, _| (100.0, 0.0));
        let out = distort_flow(&flow, &m).unwrap();
        for y in 0..h {
            for x in 0..w {
                assert!(!out.is_valid(x, y) || out.get(x, y).0.is_finite());
            }
        }
        // A vector whose endpoint lands beyond the domain must be invalid.
        assert!(!out.is_valid(w - 2, h / 2));
    }
}
