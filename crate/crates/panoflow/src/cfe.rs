//! Cyclic flow estimation: feature regrouping across the horizontal seam,
//! dual decoding, and per-pixel shortest-vector selection.
//!
//! A panorama's left and right edges are the same meridian, but a
//! conventional estimator treats them as image borders and cannot follow
//! motion across them. Cyclic estimation swaps the left and right halves of
//! both frames (at the feature level when the backend supports it), which
//! moves the seam to the middle: motion that crossed the seam becomes a short
//! in-image motion in the swapped view. Decoding both views and keeping the
//! per-pixel candidate of smaller Euclidean norm yields a flow field that
//! always takes the shorter of the two great-circle routes.

use crate::backend::{EstimatorBackend, FeatureMap, FeaturePair};
use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField, FlowRepresentation};
use crate::spherical::convert_to_360;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfeMode {
    /// Single estimate, wrapped after the fact. Baseline.
    Naive,
    /// Encode each frame once, decode the original and the half-swapped
    /// feature pairing, select per pixel. Requires the encode/decode split.
    Default,
    /// Two full estimates (original and half-swapped images). Works with any
    /// backend at roughly twice the cost.
    DoubleEstimation,
    /// Like `Default`, but four decodes where the half outside the area of
    /// interest is zeroed out.
    HalfZeroPadding,
    /// Like `HalfZeroPadding`, but the other half duplicates the area of
    /// interest instead of being zeroed. Ablation mode; expected to be weak.
    HalfSamePadding,
}

impl std::str::FromStr for CfeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "naive" => Ok(CfeMode::Naive),
            "default" => Ok(CfeMode::Default),
            "double" => Ok(CfeMode::DoubleEstimation),
            "half-zero" => Ok(CfeMode::HalfZeroPadding),
            "half-same" => Ok(CfeMode::HalfSamePadding),
            other => Err(format!(
                "unknown cfe mode '{other}' (expected naive|default|double|half-zero|half-same)"
            )),
        }
    }
}

impl CfeMode {
    pub fn needs_split(self) -> bool {
        matches!(
            self,
            CfeMode::Default | CfeMode::HalfZeroPadding | CfeMode::HalfSamePadding
        )
    }
}

/// Splits both frames' feature maps at half width and regroups them into the
/// original pairing `P1` and the half-swapped pairing `P2`. Context features
/// (from frame 1) are regrouped the same way and attached to each pairing.
pub fn regroup_features(
    f1: &FeatureMap,
    f2: &FeatureMap,
    c1: Option<&FeatureMap>,
) -> Result<(FeaturePair, FeaturePair)> {
    let p1 = FeaturePair {
        source: f1.clone(),
        target: f2.clone(),
        context: c1.cloned(),
    };
    let p2 = FeaturePair {
        source: f1.swap_halves()?,
        target: f2.swap_halves()?,
        context: match c1 {
            Some(c) => Some(c.swap_halves()?),
            None => None,
        },
    };
    Ok((p1, p2))
}

/// Maps a flow field decoded in half-swapped coordinates back to original
/// image columns: column `c` of the swapped view describes original column
/// `(c + W/2) mod W`; displacement values transfer unchanged because both
/// frames were identically swapped. An involution.
pub fn reindex(flow: &FlowField) -> Result<FlowField> {
    let (w, h) = (flow.width(), flow.height());
    if w % 2 != 0 {
        return Err(Error::contract("reindex requires even width"));
    }
    let half = w / 2;
    let mut out = FlowField::from_fn(w, h, flow.representation(), |x, y| {
        flow.get((x + half) % w, y)
    });
    for y in 0..h {
        for x in 0..w {
            out.set_valid(x, y, flow.is_valid((x + half) % w, y));
        }
    }
    Ok(out)
}

/// Per-pixel selection between the primary and the cyclic candidate
/// (already re-indexed to original columns): the vector of smaller Euclidean
/// norm wins, ties go to the primary. A candidate marked invalid by its
/// decoder concedes to a valid one; where both are invalid the primary value
/// is kept and the pixel stays invalid. The winner is wrapped to the
/// shortest-path representation.
pub fn select_min(primary: &FlowField, cyclic: &FlowField) -> Result<FlowField> {
    if primary.width() != cyclic.width() || primary.height() != cyclic.height() {
        return Err(Error::contract("select_min: dimension mismatch"));
    }
    if primary.representation() != FlowRepresentation::Classical
        || cyclic.representation() != FlowRepresentation::Classical
    {
        return Err(Error::contract("select_min expects classical candidates"));
    }
    let (w, h) = (primary.width(), primary.height());
    let mut out = FlowField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let pv = primary.is_valid(x, y);
            let cv = cyclic.is_valid(x, y);
            let (pu, pvv) = primary.get(x, y);
            let (cu, cvv) = cyclic.get(x, y);
            let take_cyclic = match (pv, cv) {
                (true, false) => false,
                (false, true) => true,
                _ => {
                    let pn = pu * pu + pvv * pvv;
                    let cn = cu * cu + cvv * cvv;
                    cn < pn
                }
            };
            if take_cyclic {
                out.set(x, y, cu, cvv);
            } else {
                out.set(x, y, pu, pvv);
            }
            out.set_valid(x, y, pv || cv);
        }
    }
    convert_to_360(&out)
}

/// Runs the requested estimation mode and returns wrapped 360° flow.
pub fn cyclic_estimate(
    backend: &dyn EstimatorBackend,
    i1: &EquirectImage,
    i2: &EquirectImage,
    mode: CfeMode,
) -> Result<FlowField> {
    if i1.width() != i2.width() || i1.height() != i2.height() {
        return Err(Error::contract("frame size mismatch"));
    }
    if i1.width() % 2 != 0 {
        return Err(Error::contract("cyclic estimation requires even width"));
    }
    if mode.needs_split() && !backend.capabilities().has_encode_decode_split {
        return Err(Error::contract(format!(
            "mode {mode:?} requires a backend with an encode/decode split; '{}' has none",
            backend.name()
        )));
    }
    match mode {
        CfeMode::Naive => convert_to_360(&backend.estimate(i1, i2)?),
        CfeMode::DoubleEstimation => {
            let half = i1.width() / 2;
            let primary = backend.estimate(i1, i2)?;
            let swapped = backend.estimate(&i1.roll_columns(half), &i2.roll_columns(half))?;
            select_min(&primary, &reindex(&swapped)?)
        }
        CfeMode::Default => {
            // The encoded levels are already the original pairing; only the
            // half-swapped pairing needs new buffers.
            let levels = backend.encode(i1, i2)?;
            let swapped_levels = swap_levels(&levels)?;
            let primary = backend.decode(&levels)?;
            let swapped = backend.decode(&swapped_levels)?;
            select_min(&primary, &reindex(&swapped)?)
        }
        CfeMode::HalfZeroPadding | CfeMode::HalfSamePadding => {
            let same = mode == CfeMode::HalfSamePadding;
            let levels = backend.encode(i1, i2)?;
            let swapped_levels = swap_levels(&levels)?;
            let primary = compose_halves(
                &backend.decode(&pad_levels(&levels, true, same)?)?,
                &backend.decode(&pad_levels(&levels, false, same)?)?,
            )?;
            let swapped = compose_halves(
                &backend.decode(&pad_levels(&swapped_levels, true, same)?)?,
                &backend.decode(&pad_levels(&swapped_levels, false, same)?)?,
            )?;
            select_min(&primary, &reindex(&swapped)?)
        }
    }
}

/// The half-swapped pairing of every pyramid level (the `P2` side of
/// [`regroup_features`]).
fn swap_levels(levels: &[FeaturePair]) -> Result<Vec<FeaturePair>> {
    levels
        .iter()
        .map(|lvl| {
            Ok(FeaturePair {
                source: lvl.source.swap_halves()?,
                target: lvl.target.swap_halves()?,
                context: match &lvl.context {
                    Some(c) => Some(c.swap_halves()?),
                    None => None,
                },
            })
        })
        .collect()
}

/// Replaces the half outside the area of interest with zeros, or with a copy
/// of the area of interest when `same` is set.
fn pad_map(map: &FeatureMap, keep_left: bool, same: bool) -> Result<FeatureMap> {
    if map.width % 2 != 0 {
        return Err(Error::contract("half padding requires even width"));
    }
    let mut out = map.clone();
    let half = map.width / 2;
    let c = map.channels;
    for y in 0..map.height {
        for x in 0..half {
            let (dst, src) = if keep_left {
                (x + half, x)
            } else {
                (x, x + half)
            };
            let di = (y * map.width + dst) * c;
            let si = (y * map.width + src) * c;
            if same {
                let copied: Vec<f32> = map.data[si..si + c].to_vec();
                out.data[di..di + c].copy_from_slice(&copied);
            } else {
                out.data[di..di + c].fill(0.0);
            }
        }
    }
    Ok(out)
}

fn pad_levels(levels: &[FeaturePair], keep_left: bool, same: bool) -> Result<Vec<FeaturePair>> {
    levels
        .iter()
        .map(|lvl| {
            Ok(FeaturePair {
                source: pad_map(&lvl.source, keep_left, same)?,
                target: pad_map(&lvl.target, keep_left, same)?,
                context: match &lvl.context {
                    Some(c) => Some(pad_map(c, keep_left, same)?),
                    None => None,
                },
            })
        })
        .collect()
}

/// Left half from the decode where the left half carried real features,
/// right half from the other decode.
fn compose_halves(left: &FlowField, right: &FlowField) -> Result<FlowField> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::contract("compose_halves: dimension mismatch"));
    }
    let (w, h) = (left.width(), left.height());
    let half = w / 2;
    let mut out = FlowField::from_fn(w, h, left.representation(), |x, y| {
        if x < half {
            left.get(x, y)
        } else {
            right.get(x, y)
        }
    });
    for y in 0..h {
        for x in 0..w {
            let v = if x < half {
                left.is_valid(x, y)
            } else {
                right.is_valid(x, y)
            };
            out.set_valid(x, y, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BuiltinMatcher;
    use crate::FileBackend;
    use rand::{Rng, SeedableRng};

    fn map_from(vals: &[f32], w: usize) -> FeatureMap {
        let mut m = FeatureMap::new(w, vals.len() / w, 1, 1);
        m.data.copy_from_slice(vals);
        m
    }

    #[test]
    fn width_two_toy_regrouping() {
        let f1 = map_from(&[1.0, 2.0], 2);
        let f2 = map_from(&[1.0, 2.0], 2);
        let (p1, p2) = regroup_features(&f1, &f2, None).unwrap();
        assert_eq!(p1.source.data, vec![1.0, 2.0]);
        assert_eq!(p1.target.data, vec![1.0, 2.0]);
        assert_eq!(p2.source.data, vec![2.0, 1.0]);
        assert_eq!(p2.target.data, vec![2.0, 1.0]);
    }

    #[test]
    fn primary_pairing_is_bit_exact_identity() {
        let f1 = map_from(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], 4);
        let f2 = map_from(&[0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1], 4);
        let (p1, _) = regroup_features(&f1, &f2, None).unwrap();
        assert_eq!(p1.source, f1);
        assert_eq!(p1.target, f2);
    }

    #[test]
    fn regrouping_is_involution() {
        let f1 = map_from(&[0.1, 0.2, 0.3, 0.4], 4);
        let f2 = map_from(&[0.5, 0.6, 0.7, 0.8], 4);
        let ctx = map_from(&[0.9, 1.0, 1.1, 1.2], 4);
        let (p1, p2) = regroup_features(&f1, &f2, Some(&ctx)).unwrap();
        assert_eq!(p2.source.swap_halves().unwrap(), p1.source);
        assert_eq!(p2.target.swap_halves().unwrap(), p1.target);
        assert_eq!(
            p2.context.unwrap().swap_halves().unwrap(),
            p1.context.unwrap()
        );
    }

    #[test]
    fn reindex_is_involution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut flow = FlowField::from_fn(16, 8, FlowRepresentation::Classical, |_, _| {
            (rng.gen_range(-8.0..8.0), rng.gen_range(-4.0..4.0))
        });
        flow.set_valid(3, 2, false);
        let twice = reindex(&reindex(&flow).unwrap()).unwrap();
        assert_eq!(twice, flow);
    }

    #[test]
    fn select_min_prefers_shorter_route() {
        let w = 1024;
        let primary = FlowField::from_fn(w, 4, FlowRepresentation::Classical, |_, _| (600.0, 0.0));
        let cyclic = FlowField::from_fn(w, 4, FlowRepresentation::Classical, |_, _| (-424.0, 0.0));
        let sel = select_min(&primary, &cyclic).unwrap();
        assert_eq!(sel.get(10, 2), (-424.0, 0.0));
        assert_eq!(sel.representation(), FlowRepresentation::Wrapped360);
    }

    #[test]
    fn select_min_zero_and_ties() {
        let z = FlowField::zeros(8, 4);
        let sel = select_min(&z, &z).unwrap();
        assert_eq!(sel.get(0, 0), (0.0, 0.0));

        let primary = FlowField::from_fn(8, 4, FlowRepresentation::Classical, |_, _| (3.0, 0.0));
        let cyclic = FlowField::from_fn(8, 4, FlowRepresentation::Classical, |_, _| (-3.0, 0.0));
        let sel = select_min(&primary, &cyclic).unwrap();
        assert_eq!(sel.get(4, 1), (3.0, 0.0), "tie must go to the primary");
    }

    #[test]
    fn select_min_respects_validity() {
        let mut primary = FlowField::from_fn(8, 4, FlowRepresentation::Classical, |_, _| (1.0, 0.0));
        let cyclic = FlowField::from_fn(8, 4, FlowRepresentation::Classical, |_, _| (3.0, 0.0));
        primary.set_valid(2, 2, false);
        let sel = select_min(&primary, &cyclic).unwrap();
        // Valid cyclic candidate beats an invalid shorter primary.
        assert_eq!(sel.get(2, 2), (3.0, 0.0));
        assert!(sel.is_valid(2, 2));
        assert_eq!(sel.get(0, 0), (1.0, 0.0));
    }

    #[test]
    fn selection_never_increases_magnitude() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let w = 64;
        let primary = FlowField::from_fn(w, 8, FlowRepresentation::Classical, |_, _| {
            (rng.gen_range(-60.0..60.0), rng.gen_range(-5.0..5.0))
        });
        let cyclic = FlowField::from_fn(w, 8, FlowRepresentation::Classical, |_, _| {
            (rng.gen_range(-60.0..60.0), rng.gen_range(-5.0..5.0))
        });
        let sel = select_min(&primary, &cyclic).unwrap();
        for y in 0..8 {
            for x in 0..w {
                let norm = |f: &FlowField| {
                    let (u, v) = f.get(x, y);
                    (u * u + v * v).sqrt()
                };
                let (su, sv) = sel.get(x, y);
                let sn = (su * su + sv * sv).sqrt();
                assert!(sn <= norm(&primary).min(norm(&cyclic)) + 1e-4);
            }
        }
    }

    #[test]
    fn selection_matches_per_pixel_oracle() {
        // Independent per-pixel reimplementation of the selection rule,
        // including the final wrap.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let (w, h) = (32, 4);
        let primary = FlowField::from_fn(w, h, FlowRepresentation::Classical, |_, _| {
            (rng.gen_range(-30.0..30.0), rng.gen_range(-3.0..3.0))
        });
        let cyclic = FlowField::from_fn(w, h, FlowRepresentation::Classical, |_, _| {
            (rng.gen_range(-30.0..30.0), rng.gen_range(-3.0..3.0))
        });
        let sel = select_min(&primary, &cyclic).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (pu, pv) = primary.get(x, y);
                let (cu, cv) = cyclic.get(x, y);
                let (mut eu, ev) = if cu.hypot(cv) < pu.hypot(pv) {
                    (cu, cv)
                } else {
                    (pu, pv)
                };
                if eu > w as f32 / 2.0 {
                    eu -= w as f32;
                } else if eu < -(w as f32) / 2.0 {
                    eu += w as f32;
                }
                assert_eq!(sel.get(x, y), (eu, ev));
            }
        }
    }

    fn noise_image(w: usize, _h: usize, seed: u64) -> EquirectImage {
        use crate::synthetic::{SyntheticScene, TextureKind, WeatherCondition};
        SyntheticScene::new(TextureKind::ProceduralNoise, seed, WeatherCondition::Sunny)
            .render(w)
            .unwrap()
    }

    #[test]
    fn identical_frames_give_zero_flow_in_every_mode() {
        let img = noise_image(64, 32, 41);
        let backend = BuiltinMatcher::new().with_circular(true);
        for mode in [
            CfeMode::Naive,
            CfeMode::Default,
            CfeMode::DoubleEstimation,
            CfeMode::HalfZeroPadding,
            CfeMode::HalfSamePadding,
        ] {
            let flow = cyclic_estimate(&backend, &img, &img, mode).unwrap();
            for y in 0..32 {
                for x in 0..64 {
                    assert_eq!(flow.get(x, y), (0.0, 0.0), "{mode:?} at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn default_equals_double_estimation_with_circular_builtin() {
        let i1 = noise_image(64, 32, 42);
        let i2 = noise_image(64, 32, 43);
        let backend = BuiltinMatcher::new().with_circular(true);
        let a = cyclic_estimate(&backend, &i1, &i2, CfeMode::Default).unwrap();
        let b = cyclic_estimate(&backend, &i1, &i2, CfeMode::DoubleEstimation).unwrap();
        assert_eq!(a.u(), b.u());
        assert_eq!(a.v(), b.v());
        assert_eq!(a.valid_mask(), b.valid_mask());
    }

    #[test]
    fn output_satisfies_wrapped_contract() {
        let i1 = noise_image(64, 32, 44);
        let i2 = i1.roll_columns(30);
        let backend = BuiltinMatcher::new().with_circular(true);
        for mode in [CfeMode::Naive, CfeMode::Default, CfeMode::DoubleEstimation] {
            let flow = cyclic_estimate(&backend, &i1, &i2, mode).unwrap();
            assert_eq!(flow.representation(), FlowRepresentation::Wrapped360);
            flow.check_invariants().unwrap();
        }
    }

    #[test]
    fn split_modes_reject_file_backend() {
        let dir = tempfile::tempdir().unwrap();
        let backend = FileBackend::new(dir.path(), "x");
        let img = noise_image(16, 8, 45);
        for mode in [
            CfeMode::Default,
            CfeMode::HalfZeroPadding,
            CfeMode::HalfSamePadding,
        ] {
            assert!(matches!(
                cyclic_estimate(&backend, &img, &img, mode),
                Err(Error::Contract(_))
            ));
        }
    }
}
