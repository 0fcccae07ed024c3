//! Equirectangular geometry: pixel↔sphere maps, 360° flow conversion,
//! cubemap stitching, and the analytic rotation ground truth used as the
//! oracle throughout the test suite.
//!
//! Conventions, fixed once:
//! - Pixel centers: column `x` is longitude `(x + 0.5)/W * 360 - 180`, row `y`
//!   is latitude `90 - (y + 0.5)/H * 180`.
//! - Right-handed unit sphere: `x = cos φ cos λ`, `y = cos φ sin λ`,
//!   `z = sin φ`. Longitude 0 points along `+x`, longitude 90° along `+y`,
//!   the north pole along `+z`.
//! - Rotations are extrinsic, applied yaw (about `+z`) → pitch (about `+y`)
//!   → roll (about `+x`); positive yaw increases longitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField, FlowRepresentation};

/// A direction on the unit sphere in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDirection {
    /// Longitude in `[-180, 180)`.
    pub longitude: f64,
    /// Latitude in `[-90, 90]`.
    pub latitude: f64,
}

/// Sine and cosine of an angle given in degrees, with exact quadrant
/// reduction: the angle is reduced modulo 360° in degree arithmetic before
/// touching radians, so angles that differ by an exact multiple of 90° yield
/// bit-identical component sets (swapped/negated). The cubemap yaw
/// equivariance test relies on this.
pub(crate) fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let a = deg.rem_euclid(360.0);
    let quadrant = (a / 90.0).floor() as i64 % 4;
    let rem = a - 90.0 * quadrant as f64;
    let (s, c) = rem.to_radians().sin_cos();
    match quadrant {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

impl SphereDirection {
    pub fn new(longitude: f64, latitude: f64) -> Self {
        let mut lon = longitude.rem_euclid(360.0);
        if lon >= 180.0 {
            lon -= 360.0;
        }
        SphereDirection {
            longitude: lon,
            latitude,
        }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sl, cl) = sin_cos_deg(self.longitude);
        let (sp, cp) = sin_cos_deg(self.latitude);
        [cp * cl, cp * sl, sp]
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let lon = v[1].atan2(v[0]).to_degrees();
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let lat = (v[2] / norm).clamp(-1.0, 1.0).asin().to_degrees();
        SphereDirection::new(lon, lat)
    }

    /// Angular equality modulo 360° in longitude.
    pub fn approx_eq(&self, other: &SphereDirection, tol_deg: f64) -> bool {
        let dlon = (self.longitude - other.longitude).rem_euclid(360.0);
        let dlon = dlon.min(360.0 - dlon);
        dlon <= tol_deg && (self.latitude - other.latitude).abs() <= tol_deg
    }
}

/// Maps a pixel position (fractional allowed) to its sphere direction.
pub fn pix_to_sphere(x: f64, y: f64, width: usize, height: usize) -> Result<SphereDirection> {
    if width != 2 * height {
        return Err(Error::contract("pix_to_sphere requires W == 2H"));
    }
    if !(0.0..(width as f64)).contains(&x) || !(0.0..(height as f64)).contains(&y) {
        return Err(Error::contract(format!(
            "pixel ({x}, {y}) outside {width}x{height}"
        )));
    }
    Ok(pix_to_sphere_unchecked(x, y, width, height))
}

#[inline]
pub(crate) fn pix_to_sphere_unchecked(x: f64, y: f64, width: usize, height: usize) -> SphereDirection {
    let lon = (x + 0.5) * (360.0 / width as f64) - 180.0;
    let lat = 90.0 - (y + 0.5) * (180.0 / height as f64);
    SphereDirection {
        longitude: lon,
        latitude: lat,
    }
}

/// Inverse of [`pix_to_sphere`] under the pixel-center convention.
pub fn sphere_to_pix(dir: &SphereDirection, width: usize, height: usize) -> (f64, f64) {
    let mut lon = dir.longitude.rem_euclid(360.0);
    if lon >= 180.0 {
        lon -= 360.0;
    }
    let x = (lon + 180.0) * (width as f64 / 360.0) - 0.5;
    let y = (90.0 - dir.latitude) * (height as f64 / 180.0) - 0.5;
    (x, y)
}

/// Wraps a horizontal displacement into `[-W/2, W/2]`, keeping exact
/// congruence modulo `W`: the truncating float remainder is exact, and the
/// single `±W` adjustment lands in `[-W/2, W/2]` where Sterbenz's lemma makes
/// the addition exact too. The boundaries `±W/2` are left unchanged.
pub fn wrap_shortest(u: f64, width: usize) -> f64 {
    let w = width as f64;
    let r = u % w;
    if r > w / 2.0 {
        r - w
    } else if r < -w / 2.0 {
        r + w
    } else {
        r
    }
}

/// Converts classical flow to wrapped 360° flow.
///
/// Per-pixel on valid pixels: `u > W/2` becomes `u - W`, `u < -W/2` becomes
/// `u + W`, anything else (including exactly `W/2`) is unchanged; `v` is
/// never touched. Input must be classical with `|u| <= W` on valid pixels.
pub fn convert_to_360(flow: &FlowField) -> Result<FlowField> {
    if flow.representation() != FlowRepresentation::Classical {
        return Err(Error::contract("convert_to_360 expects classical flow"));
    }
    let w = flow.width() as f32;
    let half = w / 2.0;
    let mut out = flow.clone();
    for y in 0..flow.height() {
        for x in 0..flow.width() {
            if !flow.is_valid(x, y) {
                continue;
            }
            let (u, v) = flow.get(x, y);
            if u.abs() > w {
                return Err(Error::contract(format!(
                    "convert_to_360: |u|={} exceeds W={} at ({x}, {y})",
                    u.abs(),
                    w
                )));
            }
            let u = if u > half {
                u - w
            } else if u < -half {
                u + w
            } else {
                u
            };
            out.set(x, y, u, v);
        }
    }
    out.set_representation(FlowRepresentation::Wrapped360);
    Ok(out)
}

/// Yaw/pitch/roll rotation in degrees, applied extrinsically in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl RotationSpec {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        RotationSpec { yaw, pitch, roll }
    }

    pub fn identity() -> Self {
        RotationSpec::new(0.0, 0.0, 0.0)
    }

    /// Row-major rotation matrix `R = Rx(roll) · Ry(pitch) · Rz(yaw)`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let (sy, cy) = sin_cos_deg(self.yaw);
        let (sp, cp) = sin_cos_deg(self.pitch);
        let (sr, cr) = sin_cos_deg(self.roll);
        let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
        let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
        mat_mul(&rx, &mat_mul(&ry, &rz))
    }

    /// Inverse of the direction map (the transposed matrix).
    pub fn inverse_matrix(&self) -> [[f64; 3]; 3] {
        transpose(&self.matrix())
    }

    pub fn rotate(&self, dir: &SphereDirection) -> SphereDirection {
        SphereDirection::from_vector(mat_apply(&self.matrix(), dir.unit_vector()))
    }

    pub fn rotate_inverse(&self, dir: &SphereDirection) -> SphereDirection {
        SphereDirection::from_vector(mat_apply(&self.inverse_matrix(), dir.unit_vector()))
    }
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

#[inline]
fn mat_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Analytic wrapped-360 flow of a pure camera rotation.
///
/// For each pixel `p`: rotate its direction, map back to pixel coordinates,
/// and take the shortest wrapped horizontal displacement. Every pixel is
/// valid.
pub fn rotation_flow_gt(rot: &RotationSpec, width: usize, height: usize) -> Result<FlowField> {
    if width != 2 * height {
        return Err(Error::contract("rotation_flow_gt requires W == 2H"));
    }
    if *rot == RotationSpec::identity() {
        let mut flow = FlowField::zeros(width, height);
        flow.set_representation(FlowRepresentation::Wrapped360);
        return Ok(flow);
    }
    let m = rot.matrix();
    let mut flow = FlowField::zeros(width, height);
    for y in 0..height {
        for x in 0..width {
            let d = pix_to_sphere_unchecked(x as f64, y as f64, width, height);
            let d2 = SphereDirection::from_vector(mat_apply(&m, d.unit_vector()));
            let (xp, yp) = sphere_to_pix(&d2, width, height);
            let u = wrap_shortest(xp - x as f64, width);
            let v = yp - y as f64;
            flow.set(x, y, u as f32, v as f32);
        }
    }
    flow.set_representation(FlowRepresentation::Wrapped360);
    Ok(flow)
}

/// Renders the view after a camera rotation: each output pixel samples the
/// input at the inversely-rotated direction. Horizontal wrap is always on;
/// vertical coordinates are clamped at the poles.
pub fn rotate_equirect(image: &EquirectImage, rot: &RotationSpec) -> Result<EquirectImage> {
    if *rot == RotationSpec::identity() {
        if image.width() != 2 * image.height() {
            return Err(Error::contract("rotate_equirect requires W == 2H"));
        }
        return Ok(image.clone());
    }
    resample_by_direction_matrix(image, &rot.inverse_matrix())
}

/// Resamples `image` so that each output pixel takes the input value at the
/// direction obtained by applying `m` to the pixel's direction.
pub fn resample_by_direction_matrix(
    image: &EquirectImage,
    m: &[[f64; 3]; 3],
) -> Result<EquirectImage> {
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    if w != 2 * h {
        return Err(Error::contract("rotate_equirect requires W == 2H"));
    }
    let minv = *m;
    let mut out = image.clone();
    out.samples_mut()
        .par_chunks_mut(w * ch)
        .enumerate()
        .for_each(|(y, row)| {
            let mut px = [0.0f32; 3];
            for x in 0..w {
                let d = pix_to_sphere_unchecked(x as f64, y as f64, w, h);
                let d2 = SphereDirection::from_vector(mat_apply(&minv, d.unit_vector()));
                let (xs, ys) = sphere_to_pix(&d2, w, h);
                let ys = ys.clamp(0.0, (h - 1) as f64);
                image.sample_bilinear(xs, ys, true, &mut px[..ch]);
                for c in 0..ch {
                    row[x * ch + c] = px[c];
                }
            }
        });
    Ok(out)
}

/// Cube face identifiers. `Front` looks along `+x` (longitude 0), `Right`
/// along longitude 90°, and so on; `Up`/`Down` along `±z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Front,
    Right,
    Back,
    Left,
    Up,
    Down,
}

pub const FACE_ORDER: [Face; 6] = [
    Face::Front,
    Face::Right,
    Face::Back,
    Face::Left,
    Face::Up,
    Face::Down,
];

impl Face {
    pub fn index(self) -> usize {
        match self {
            Face::Front => 0,
            Face::Right => 1,
            Face::Back => 2,
            Face::Left => 3,
            Face::Up => 4,
            Face::Down => 5,
        }
    }

    /// Outward axis, in-face right axis, and in-face down axis.
    ///
    /// Side faces share the down axis `-z` and their right axis points toward
    /// increasing longitude, so a 90° yaw carries face coordinates onto the
    /// next side face unchanged.
    pub fn axes(self) -> ([f64; 3], [f64; 3], [f64; 3]) {
        match self {
            Face::Front => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]),
            Face::Right => ([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
            Face::Back => ([-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]),
            Face::Left => ([0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
            Face::Up => ([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
            Face::Down => ([0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]),
        }
    }
}

/// Selects the cube face whose outward axis has the largest projection onto
/// `dir`, together with the gnomonic in-face coordinates `(s, t)` in
/// `[-1, 1]`.
pub fn direction_to_face(dir: [f64; 3]) -> (Face, f64, f64) {
    let mut best = Face::Front;
    let mut best_dot = f64::MIN;
    for face in FACE_ORDER {
        let (axis, _, _) = face.axes();
        let dot = axis[0] * dir[0] + axis[1] * dir[1] + axis[2] * dir[2];
        if dot > best_dot {
            best_dot = dot;
            best = face;
        }
    }
    let (axis, u, v) = best.axes();
    let a = axis[0] * dir[0] + axis[1] * dir[1] + axis[2] * dir[2];
    let s = (u[0] * dir[0] + u[1] * dir[1] + u[2] * dir[2]) / a;
    let t = (v[0] * dir[0] + v[1] * dir[1] + v[2] * dir[2]) / a;
    (best, s, t)
}

/// Direction of a face pixel center: `(i + 0.5)/n` maps to `[-1, 1]` in face
/// coordinates. Not normalized.
pub fn face_pixel_direction(face: Face, i: f64, j: f64, n: usize) -> [f64; 3] {
    let (axis, u, v) = face.axes();
    let s = (i + 0.5) / n as f64 * 2.0 - 1.0;
    let t = (j + 0.5) / n as f64 * 2.0 - 1.0;
    [
        axis[0] + s * u[0] + t * v[0],
        axis[1] + s * u[1] + t * v[1],
        axis[2] + s * u[2] + t * v[2],
    ]
}

/// Six square cube faces with 90°×90° FoV each.
#[derive(Debug, Clone)]
pub struct CubeFaceSet {
    faces: [EquirectImage; 6],
    size: usize,
    channels: usize,
}

impl CubeFaceSet {
    /// Face order: front, right, back, left, up, down.
    pub fn new(faces: [EquirectImage; 6]) -> Result<Self> {
        let size = faces[0].width();
        let channels = faces[0].channels();
        for f in &faces {
            if f.width() != size || f.height() != size {
                return Err(Error::contract("cube faces must be square and same size"));
            }
            if f.channels() != channels {
                return Err(Error::contract("cube face channel counts must match"));
            }
        }
        Ok(CubeFaceSet {
            faces,
            size,
            channels,
        })
    }

    pub fn face(&self, face: Face) -> &EquirectImage {
        &self.faces[face.index()]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Renders each face by evaluating `texture(direction)` at its pixel
    /// centers; handy for analytic-texture tests and synthetic scenes.
    pub fn render(
        size: usize,
        channels: usize,
        texture: impl Fn([f64; 3], usize) -> f32,
    ) -> Result<Self> {
        let mut faces = Vec::with_capacity(6);
        for face in FACE_ORDER {
            let mut samples = vec![0.0f32; size * size * channels];
            for j in 0..size {
                for i in 0..size {
                    let d = face_pixel_direction(face, i as f64, j as f64, size);
                    for c in 0..channels {
                        samples[(j * size + i) * channels + c] = texture(d, c);
                    }
                }
            }
            faces.push(EquirectImage::from_raw_parts(size, size, channels, samples));
        }
        CubeFaceSet::new(faces.try_into().unwrap())
    }

    /// Rotates the side-face role assignment one step (front→right→back→left),
    /// i.e. yaws the represented scene by +90°.
    pub fn rotate_roles(&self) -> CubeFaceSet {
        let f = &self.faces;
        CubeFaceSet {
            faces: [
                f[Face::Left.index()].clone(),
                f[Face::Front.index()].clone(),
                f[Face::Right.index()].clone(),
                f[Face::Back.index()].clone(),
                f[Face::Up.index()].clone(),
                f[Face::Down.index()].clone(),
            ],
            size: self.size,
            channels: self.channels,
        }
    }
}

/// Stitches a cube face set to an equirectangular panorama of width `out_w`.
///
/// Per output pixel: compute the sphere direction, pick the face with the
/// dominant axis, project gnomonically, sample the face bilinearly with edge
/// clamping.
pub fn cubemap_to_equirect(faces: &CubeFaceSet, out_w: usize) -> Result<EquirectImage> {
    if out_w % 2 != 0 || out_w == 0 {
        return Err(Error::contract("output width must be even and positive"));
    }
    let (w, h) = (out_w, out_w / 2);
    let ch = faces.channels();
    let n = faces.size();
    let mut out = EquirectImage::new(w, h, ch)?;
    out.samples_mut()
        .par_chunks_mut(w * ch)
        .enumerate()
        .for_each(|(y, row)| {
            let mut px = [0.0f32; 3];
            for x in 0..w {
                let dir = pix_to_sphere_unchecked(x as f64, y as f64, w, h).unit_vector();
                let (face, s, t) = direction_to_face(dir);
                let fx = (s + 1.0) / 2.0 * n as f64 - 0.5;
                let fy = (t + 1.0) / 2.0 * n as f64 - 0.5;
                let fx = fx.clamp(0.0, (n - 1) as f64);
                let fy = fy.clamp(0.0, (n - 1) as f64);
                faces.face(face).sample_bilinear(fx, fy, false, &mut px[..ch]);
                for c in 0..ch {
                    row[x * ch + c] = px[c];
                }
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn pixel_center_convention_examples() {
        // x = 0, y = H/2 of a 1024x512 panorama.
        let d = pix_to_sphere(0.0, 256.0, 1024, 512).unwrap();
        assert!((d.longitude - (-180.0 + 0.5 * (360.0 / 1024.0))).abs() < 1e-12);
        assert!((d.latitude - (90.0 - 256.5 * (180.0 / 512.0))).abs() < 1e-12);
        assert!((d.longitude + 179.824).abs() < 1e-3);
        assert!((d.latitude + 0.176).abs() < 1e-3);

        // Center pixel of an even-dims image sits half a pixel off the origin.
        let c = pix_to_sphere(511.5, 255.5, 1024, 512).unwrap();
        assert!(c.longitude.abs() < 1e-12);
        assert!(c.latitude.abs() < 1e-12);
    }

    #[test]
    fn sphere_pix_inverse_pair() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = rng.gen_range(0.0..1024.0);
            let y = rng.gen_range(0.0..512.0);
            let d = pix_to_sphere(x, y, 1024, 512).unwrap();
            let (xb, yb) = sphere_to_pix(&d, 1024, 512);
            assert!((xb - x).abs() < 1e-9, "x {x} -> {xb}");
            assert!((yb - y).abs() < 1e-9, "y {y} -> {yb}");
        }
    }

    #[test]
    fn convert_to_360_eq2_cases() {
        let w = 1024;
        let mk = |u: f32, v: f32| {
            let mut f = FlowField::zeros(w, 1);
            f.set(0, 0, u, v);
            f
        };
        let c = |u, v| {
            let out = convert_to_360(&mk(u, v)).unwrap();
            assert_eq!(out.representation(), FlowRepresentation::Wrapped360);
            out.get(0, 0)
        };
        assert_eq!(c(600.0, 0.0), (-424.0, 0.0));
        assert_eq!(c(100.0, 50.0), (100.0, 50.0));
        assert_eq!(c(-900.0, -7.0), (124.0, -7.0));
        // Boundary u == W/2 falls in the "others" case.
        assert_eq!(c(512.0, 0.0), (512.0, 0.0));
        assert_eq!(c(-512.0, 0.0), (-512.0, 0.0));
    }

    #[test]
    fn convert_to_360_rejects_out_of_domain() {
        let mut f = FlowField::zeros(100, 1);
        f.set(0, 0, 101.0, 0.0);
        assert!(matches!(convert_to_360(&f), Err(crate::Error::Contract(_))));
        // Invalid pixels are exempt.
        f.set_valid(0, 0, false);
        assert!(convert_to_360(&f).is_ok());
    }

    #[test]
    fn rotation_composes_with_inverse_to_identity() {
        let rot = RotationSpec::new(33.0, -17.0, 58.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d = SphereDirection::new(rng.gen_range(-180.0..180.0), rng.gen_range(-89.0..89.0));
            let back = rot.rotate_inverse(&rot.rotate(&d));
            assert!(d.approx_eq(&back, 1e-9), "{d:?} vs {back:?}");
        }
    }

    #[test]
    fn pure_yaw_flow_is_uniform_column_shift() {
        let flow = rotation_flow_gt(&RotationSpec::new(10.0, 0.0, 0.0), 1024, 512).unwrap();
        let expected = 10.0 / 360.0 * 1024.0;
        for y in (0..512).step_by(37) {
            for x in (0..1024).step_by(41) {
                let (u, v) = flow.get(x, y);
                assert!((u as f64 - expected).abs() < 1e-4, "u={u}");
                assert!(v.abs() < 1e-4, "v={v}");
            }
        }
    }

    #[test]
    fn yaw_350_wraps_to_short_negative_shift() {
        let flow = rotation_flow_gt(&RotationSpec::new(350.0, 0.0, 0.0), 1024, 512).unwrap();
        let expected = -10.0 / 360.0 * 1024.0;
        for y in (0..512).step_by(61) {
            for x in (0..1024).step_by(53) {
                let (u, v) = flow.get(x, y);
                assert!((u as f64 - expected).abs() < 1e-4, "u={u}");
                assert!(v.abs() < 1e-4);
            }
        }
        flow.check_invariants().unwrap();
    }

    #[test]
    fn pitch_flow_is_vertical_on_axis_meridians() {
        // Pitch rotates within the x-z plane, so directions on the lambda = 0
        // and lambda = 180 meridians stay on those meridians: motion there is
        // purely vertical.
        let (w, h) = (1024usize, 512usize);
        let flow = rotation_flow_gt(&RotationSpec::new(0.0, 5.0, 0.0), w, h).unwrap();
        for lam in [0.0f64, 180.0 - 360.0 / w as f64] {
            let d = SphereDirection::new(lam, 10.0);
            let (x, y) = sphere_to_pix(&d, w, h);
            let (x, y) = (x.round() as usize, y.round() as usize);
            let (u, v) = flow.get(x, y);
            // Pixel centers sit slightly off the exact meridian, hence the
            // small horizontal slack.
            assert!(u.abs() < 0.02, "u={u} at meridian {lam}");
            assert!(v.abs() > 1.0, "v={v} at meridian {lam}");
        }
    }

    #[test]
    fn rotate_equirect_identity() {
        let img = EquirectImage::from_fn(64, 32, 3, |x, y, c| {
            ((x * 3 + y * 5 + c) % 11) as f32 / 10.0
        })
        .unwrap();
        let out = rotate_equirect(&img, &RotationSpec::identity()).unwrap();
        assert_eq!(img, out);
    }

    #[test]
    fn integer_yaw_is_exact_column_roll() {
        let img = EquirectImage::from_fn(64, 32, 3, |x, y, c| {
            ((x * 7 + y * 3 + c * 2) % 13) as f32 / 12.0
        })
        .unwrap();
        let k = 5usize;
        let out = rotate_equirect(&img, &RotationSpec::new(k as f64 * 360.0 / 64.0, 0.0, 0.0))
            .unwrap();
        let rolled = img.roll_columns(k);
        for i in 0..out.samples().len() {
            assert!(
                (out.samples()[i] - rolled.samples()[i]).abs() < 1e-6,
                "sample {i}"
            );
        }
    }

    fn smooth_panorama(w: usize, h: usize) -> EquirectImage {
        EquirectImage::from_fn(w, h, 3, |x, y, c| {
            let d = pix_to_sphere_unchecked(x as f64, y as f64, w, h).unit_vector();
            (0.5 + 0.45 * d[c]) as f32
        })
        .unwrap()
    }

    #[test]
    fn rotate_then_unrotate_is_near_identity_away_from_poles() {
        let (w, h) = (256usize, 128usize);
        let img = smooth_panorama(w, h);
        let rot = RotationSpec::new(23.0, 11.0, -7.0);
        let once = rotate_equirect(&img, &rot).unwrap();
        // Undoing the rotation means sampling along the forward direction map.
        let back = resample_by_direction_matrix(&once, &rot.matrix()).unwrap();
        let mut max_err = 0.0f32;
        let mut count = 0usize;
        for y in 0..h {
            let lat = 90.0 - (y as f64 + 0.5) / h as f64 * 180.0;
            if lat.abs() >= 60.0 {
                continue;
            }
            for x in 0..w {
                for c in 0..3 {
                    max_err = max_err.max((back.get(x, y, c) - img.get(x, y, c)).abs());
                }
                count += 1;
            }
        }
        assert!(count > 0);
        assert!(max_err < 2.0 / 255.0, "max err {max_err}");
    }

    #[test]
    fn constant_faces_give_constant_panorama() {
        let faces = CubeFaceSet::render(32, 3, |_, _| 0.5).unwrap();
        let pano = cubemap_to_equirect(&faces, 128).unwrap();
        for &s in pano.samples() {
            assert_eq!(s, 0.5);
        }
    }

    #[test]
    fn front_center_color_lands_at_panorama_center() {
        // Independent face computation: direction (1, 0, 0) has its largest
        // dot with the front axis, so the front-face center pixel must land
        // at the pixel nearest (W/2, H/2).
        let (face, s, t) = direction_to_face([1.0, 0.0, 0.0]);
        assert_eq!(face, Face::Front);
        assert_eq!((s, t), (0.0, 0.0));

        let n = 33; // odd so a face pixel center sits exactly on the axis
        let faces = CubeFaceSet::render(n, 3, |d, c| {
            if d[0] > 0.0 && d[1].abs() < 1e-9 && d[2].abs() < 1e-9 {
                [0.9, 0.1, 0.4][c]
            } else {
                0.2
            }
        })
        .unwrap();
        let (w, h) = (128usize, 64usize);
        let pano = cubemap_to_equirect(&faces, w).unwrap();
        // Pixel nearest direction (lambda=0, phi=0).
        let (x, y) = sphere_to_pix(&SphereDirection::new(0.0, 0.0), w, h);
        let (x, y) = (x.round() as usize, y.round() as usize);
        // Nearest pixel is half a pixel off-axis; the sample interpolates
        // between marked and unmarked face pixels, so just require the marked
        // color to dominate the red channel.
        assert!(pano.get(x, y, 0) > 0.4, "got {}", pano.get(x, y, 0));
    }

    #[test]
    fn seam_continuity_on_analytic_texture() {
        // Render direction-vector texture per face, stitch, and compare with
        // direct analytic evaluation at every panorama pixel.
        let texture = |d: [f64; 3], c: usize| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            (0.5 + 0.45 * d[c] / n) as f32
        };
        let faces = CubeFaceSet::render(128, 3, texture).unwrap();
        let (w, h) = (256usize, 128usize);
        let pano = cubemap_to_equirect(&faces, w).unwrap();
        let mut max_err = 0.0f32;
        for y in 0..h {
            for x in 0..w {
                let d = pix_to_sphere_unchecked(x as f64, y as f64, w, h).unit_vector();
                for c in 0..3 {
                    max_err = max_err.max((pano.get(x, y, c) - texture(d, c)).abs());
                }
            }
        }
        assert!(max_err < 2.0 / 255.0, "max err {max_err}");
    }

    #[test]
    fn yaw_equivariance_of_face_roles() {
        // Side faces carry arbitrary textures; up/down are constant so a 90
        // degree yaw leaves them unchanged.
        let texture = |d: [f64; 3], c: usize| {
            let (face, s, t) = direction_to_face(d);
            match face {
                Face::Up | Face::Down => 0.5,
                f => {
                    let id = f.index() as f64;
                    ((s * 3.1 + t * 5.3 + id * 1.7 + c as f64).sin() * 0.5 + 0.5) as f32
                }
            }
        };
        let faces = CubeFaceSet::render(64, 3, texture).unwrap();
        let w = 256usize;
        let pano = cubemap_to_equirect(&faces, w).unwrap();
        let rotated_pano = cubemap_to_equirect(&faces.rotate_roles(), w).unwrap();
        let rolled = pano.roll_columns(w / 4);
        assert_eq!(rotated_pano.samples(), rolled.samples());
    }
}
