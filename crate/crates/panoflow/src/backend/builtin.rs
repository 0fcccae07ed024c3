//! Deterministic classical flow estimator: census features on a Gaussian
//! pyramid, exhaustive horizontal search at the coarsest level, windowed
//! Hamming matching with a fixed tie-break, parabolic subpixel refinement,
//! and a context-guided median filter per level.
//!
//! Census features carry a per-position bit-validity mask alongside the bit
//! pattern: comparison bits whose neighbor falls outside the image are masked
//! out, and the matching cost is the Hamming mismatch over the bits valid at
//! both positions, rescaled to the full-window range. Border positions are
//! therefore matched on their real support instead of on clamped garbage,
//! which keeps the estimate usable right up to the image edge. Because the
//! mask travels inside the feature channels, feature-level surgery
//! (half-swaps, padding) transports it correctly. Costs are deterministic,
//! so the tie-break `(cost, |u|, |v|, u, v)` and the whole estimator are
//! bit-exactly reproducible across runs and thread counts. The tie toward
//! smaller `|u|` gives the matcher a shortest-displacement preference.
//!
//! With `circular = true` every horizontal operation (blur, census, search,
//! aggregation, upsampling, filtering) wraps modulo the width, so encoding
//! and decoding commute exactly with horizontal column rolls whose size is an
//! integer at every pyramid level. That rigidity is what feature-level cyclic
//! estimation builds on. The default is non-circular: a conventional matcher
//! that cannot see across the seam.

use rayon::prelude::*;

use crate::backend::{BackendCapabilities, EstimatorBackend, FeatureMap, FeaturePair};
use crate::error::{Error, Result};
use crate::flow::{EquirectImage, FlowField};

/// Census window half-size: 7×7 window, 48 neighbor comparisons.
const CENSUS_HALF: i32 = 3;
/// The 48 comparison bits are packed into two 24-bit words, each stored
/// exactly in an `f32` channel (24-bit integers are exactly representable),
/// followed by two words holding the bit-validity mask of the position.
/// Matching cost is the popcount of the mutually-valid XOR, rescaled to the
/// 48-bit range.
const CENSUS_WORDS: usize = 2;
const BITS_PER_WORD: usize = 24;
/// Cost assigned to candidates whose target sample does not exist.
const BIG_COST: f32 = 1e6;

#[derive(Debug, Clone)]
pub struct BuiltinMatcher {
    levels: usize,
    radius: i32,
    circular: bool,
    /// Validity threshold as a fraction of the maximum aggregated cost.
    cost_threshold: f32,
}

impl Default for BuiltinMatcher {
    fn default() -> Self {
        BuiltinMatcher {
            levels: 4,
            radius: 4,
            circular: false,
            cost_threshold: 0.1,
        }
    }
}

impl BuiltinMatcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels.max(1);
        self
    }

    pub fn with_radius(mut self, radius: u32) -> Self {
        self.radius = radius.max(1) as i32;
        self
    }

    pub fn with_circular(mut self, circular: bool) -> Self {
        self.circular = circular;
        self
    }

    pub fn with_cost_threshold(mut self, fraction: f32) -> Self {
        self.cost_threshold = fraction;
        self
    }

    pub fn circular(&self) -> bool {
        self.circular
    }

    /// Number of pyramid levels actually used for a given base size.
    fn effective_levels(&self, width: usize, height: usize) -> usize {
        let mut n = 1;
        let (mut w, mut h) = (width, height);
        while n < self.levels && w / 2 >= 8 && h / 2 >= 4 {
            w /= 2;
            h /= 2;
            n += 1;
        }
        n
    }
}

impl EstimatorBackend for BuiltinMatcher {
    fn name(&self) -> &str {
        "builtin"
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            has_encode_decode_split: true,
            horizontally_circular: self.circular,
        }
    }

    fn estimate(&self, i1: &EquirectImage, i2: &EquirectImage) -> Result<FlowField> {
        let levels = self.encode(i1, i2)?;
        self.decode(&levels)
    }

    fn encode(&self, i1: &EquirectImage, i2: &EquirectImage) -> Result<Vec<FeaturePair>> {
        if i1.width() != i2.width() || i1.height() != i2.height() {
            return Err(Error::contract("frame size mismatch"));
        }
        let (w, h) = (i1.width(), i1.height());
        if w < 8 || h < 4 {
            return Err(Error::contract("image too small for the matcher"));
        }
        let n_levels = self.effective_levels(w, h);
        let pyr1 = pyramid(&i1.to_gray(), w, h, n_levels, self.circular);
        let pyr2 = pyramid(&i2.to_gray(), w, h, n_levels, self.circular);
        let mut out = Vec::with_capacity(n_levels);
        for (li, (g1, g2)) in pyr1.iter().zip(pyr2.iter()).enumerate() {
            let down = 1 << li;
            let source = census(&g1.data, g1.width, g1.height, down, self.circular);
            let target = census(&g2.data, g2.width, g2.height, down, self.circular);
            let context = FeatureMap {
                width: g1.width,
                height: g1.height,
                channels: 1,
                downsample: down,
                data: g1.data.clone(),
            };
            out.push(FeaturePair {
                source,
                target,
                context: Some(context),
            });
        }
        Ok(out)
    }

    fn decode(&self, levels: &[FeaturePair]) -> Result<FlowField> {
        if levels.is_empty() {
            return Err(Error::contract("decode requires at least one level"));
        }
        for (li, lvl) in levels.iter().enumerate() {
            if lvl.source.width != lvl.target.width
                || lvl.source.height != lvl.target.height
                || lvl.source.channels != lvl.target.channels
            {
                return Err(Error::contract(format!("level {li}: feature shape mismatch")));
            }
            if let Some(ctx) = &lvl.context {
                if ctx.width != lvl.source.width || ctx.height != lvl.source.height {
                    return Err(Error::contract(format!("level {li}: context shape mismatch")));
                }
            }
        }

        let mut flow_u: Vec<f32> = Vec::new();
        let mut flow_v: Vec<f32> = Vec::new();
        let mut prev_dims = (0usize, 0usize);
        let mut valid: Vec<bool> = Vec::new();

        for li in (0..levels.len()).rev() {
            let lvl = &levels[li];
            let (w, h) = (lvl.source.width, lvl.source.height);
            let coarsest = li == levels.len() - 1;
            let finest = li == 0;

            // Integer initialization from the previous (coarser) level.
            let (init_u, init_v): (Vec<i32>, Vec<i32>) = if coarsest {
                (vec![0; w * h], vec![0; w * h])
            } else {
                let up_u = upsample(&flow_u, prev_dims.0, prev_dims.1, w, h, self.circular);
                let up_v = upsample(&flow_v, prev_dims.0, prev_dims.1, w, h, self.circular);
                (
                    up_u.iter().map(|&u| u.round() as i32).collect(),
                    up_v.iter().map(|&v| v.round() as i32).collect(),
                )
            };

            let (wtgt, wvalid) = warp_features(&lvl.target, &init_u, &init_v, self.circular);

            let du_range: Vec<i32> = if coarsest {
                if self.circular {
                    (-(w as i32) / 2..w as i32 / 2).collect()
                } else {
                    (-(w as i32 - 1)..=w as i32 - 1).collect()
                }
            } else {
                (-self.radius..=self.radius).collect()
            };
            let dv_range: Vec<i32> = (-self.radius..=self.radius).collect();

            let mut best = Best::new(w, h);
            let mut raw = vec![0.0f32; w * h];
            let mut tmp = vec![0.0f32; w * h];
            let mut agg = vec![0.0f32; w * h];
            for &dv in &dv_range {
                for &du in &du_range {
                    candidate_raw_cost(&lvl.source, &wtgt, &wvalid, du, dv, self.circular, &mut raw);
                    box_sum(&raw, w, h, self.circular, &mut tmp, &mut agg);
                    best.update(&agg, &init_u, &init_v, du, dv);
                }
            }

            // Subpixel refinement and (at the finest level) validity. Cost
            // scale per pixel is the full bit budget: half the channels are
            // masks.
            let threshold =
                self.cost_threshold * 9.0 * (BITS_PER_WORD * lvl.source.channels / 2) as f32;
            let mut u_out = vec![0.0f32; w * h];
            let mut v_out = vec![0.0f32; w * h];
            let circular = self.circular;
            let src = &lvl.source;
            u_out
                .par_chunks_mut(w)
                .zip(v_out.par_chunks_mut(w))
                .enumerate()
                .for_each(|(y, (urow, vrow))| {
                    for x in 0..w {
                        let i = y * w + x;
                        let (du, dv) = (best.du[i], best.dv[i]);
                        let c0 = best.cost[i];
                        let mut su = 0.0f32;
                        let mut sv = 0.0f32;
                        if c0 > 0.0 && c0 < BIG_COST {
                            let cm =
                                agg_cost_at(src, &wtgt, &wvalid, x, y, du - 1, dv, circular);
                            let cp =
                                agg_cost_at(src, &wtgt, &wvalid, x, y, du + 1, dv, circular);
                            su = parabola(cm, c0, cp);
                            let cm =
                                agg_cost_at(src, &wtgt, &wvalid, x, y, du, dv - 1, circular);
                            let cp =
                                agg_cost_at(src, &wtgt, &wvalid, x, y, du, dv + 1, circular);
                            sv = parabola(cm, c0, cp);
                        }
                        urow[x] = (init_u[i] + du) as f32 + su;
                        vrow[x] = (init_v[i] + dv) as f32 + sv;
                    }
                });

            if finest {
                valid = best.cost.iter().map(|&c| c <= threshold).collect();
            }

            // Context-guided median.
            let (u_f, v_f) = match &lvl.context {
                Some(ctx) => guided_median(&u_out, &v_out, &ctx.data, w, h, self.circular, 0.1),
                None => (u_out, v_out),
            };
            flow_u = u_f;
            flow_v = v_f;
            prev_dims = (w, h);
        }

        let (w, h) = prev_dims;
        fill_invalid(&mut flow_u, &mut flow_v, &valid, w, h, self.circular);
        let mut flow = FlowField::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                flow.set(x, y, flow_u[i], flow_v[i]);
                flow.set_valid(x, y, valid[i]);
            }
        }
        Ok(flow)
    }
}

/// Per-pixel running best candidate with the `(cost, |u|, |v|, u, v)`
/// tie-break on the total integer displacement.
struct Best {
    w: usize,
    cost: Vec<f32>,
    du: Vec<i32>,
    dv: Vec<i32>,
    u_total: Vec<i32>,
    v_total: Vec<i32>,
}

impl Best {
    fn new(w: usize, h: usize) -> Self {
        Best {
            w,
            cost: vec![f32::INFINITY; w * h],
            du: vec![0; w * h],
            dv: vec![0; w * h],
            u_total: vec![0; w * h],
            v_total: vec![0; w * h],
        }
    }

    fn update(&mut self, agg: &[f32], init_u: &[i32], init_v: &[i32], du: i32, dv: i32) {
        let w = self.w;
        self.cost
            .par_chunks_mut(w)
            .zip(self.du.par_chunks_mut(w))
            .zip(self.dv.par_chunks_mut(w))
            .zip(self.u_total.par_chunks_mut(w).zip(self.v_total.par_chunks_mut(w)))
            .enumerate()
            .for_each(|(y, (((cost, bdu), bdv), (but, bvt)))| {
                for x in 0..w {
                    let i = y * w + x;
                    let c = agg[i];
                    let ut = init_u[i] + du;
                    let vt = init_v[i] + dv;
                    if takes(c, ut, vt, cost[x], but[x], bvt[x]) {
                        cost[x] = c;
                        bdu[x] = du;
                        bdv[x] = dv;
                        but[x] = ut;
                        bvt[x] = vt;
                    }
                }
            });
    }
}

/// Whether candidate `(c, u, v)` beats the stored best `(bc, bu, bv)`.
#[inline]
fn takes(c: f32, u: i32, v: i32, bc: f32, bu: i32, bv: i32) -> bool {
    if c != bc {
        return c < bc;
    }
    (u.abs(), v.abs(), u, v) < (bu.abs(), bv.abs(), bu, bv)
}

#[inline]
fn parabola(cm: f32, c0: f32, cp: f32) -> f32 {
    if cm >= BIG_COST || cp >= BIG_COST || cm < c0 || cp < c0 {
        return 0.0;
    }
    let denom = cm - 2.0 * c0 + cp;
    if denom <= 0.0 {
        return 0.0;
    }
    (0.5 * (cm - cp) / denom).clamp(-0.5, 0.5)
}

#[inline]
fn wrap_i(x: i32, n: usize) -> usize {
    (x.rem_euclid(n as i32)) as usize
}

#[inline]
fn clamp_i(x: i32, n: usize) -> usize {
    x.clamp(0, n as i32 - 1) as usize
}

struct GrayLevel {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

/// Gaussian pyramid: 5-tap [1 4 6 4 1]/16 separable blur, then 2× decimation.
fn pyramid(gray: &[f32], w: usize, h: usize, levels: usize, circular: bool) -> Vec<GrayLevel> {
    let mut out = vec![GrayLevel {
        width: w,
        height: h,
        data: gray.to_vec(),
    }];
    for _ in 1..levels {
        let prev = out.last().unwrap();
        let (pw, ph) = (prev.width, prev.height);
        let k = [1.0f32, 4.0, 6.0, 4.0, 1.0];
        // Horizontal blur.
        let mut hx = vec![0.0f32; pw * ph];
        for y in 0..ph {
            for x in 0..pw {
                let mut acc = 0.0;
                for (t, &kv) in k.iter().enumerate() {
                    let xi = x as i32 + t as i32 - 2;
                    let xi = if circular { wrap_i(xi, pw) } else { clamp_i(xi, pw) };
                    acc += kv * prev.data[y * pw + xi];
                }
                hx[y * pw + x] = acc / 16.0;
            }
        }
        // Vertical blur + decimation.
        let (nw, nh) = (pw / 2, ph / 2);
        let mut next = vec![0.0f32; nw * nh];
        for y in 0..nh {
            for x in 0..nw {
                let mut acc = 0.0;
                for (t, &kv) in k.iter().enumerate() {
                    let yi = clamp_i(2 * y as i32 + t as i32 - 2, ph);
                    acc += kv * hx[yi * pw + 2 * x];
                }
                next[y * nw + x] = acc / 16.0;
            }
        }
        out.push(GrayLevel {
            width: nw,
            height: nh,
            data: next,
        });
    }
    out
}

/// 7×7 census transform: one bit per neighbor, set when the neighbor is
/// strictly darker than the center, packed 24 bits per channel. The second
/// half of the channels holds the validity mask: a bit is valid when its
/// neighbor lies inside the image (horizontally always, if `circular`).
/// Constant regions encode to all-zero bit patterns.
fn census(gray: &[f32], w: usize, h: usize, downsample: usize, circular: bool) -> FeatureMap {
    let mut map = FeatureMap::new(w, h, 2 * CENSUS_WORDS, downsample);
    let stride = 2 * CENSUS_WORDS;
    map.data
        .par_chunks_mut(w * stride)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                let center = gray[y * w + x];
                let mut words = [0u32; CENSUS_WORDS];
                let mut masks = [0u32; CENSUS_WORDS];
                let mut c = 0;
                for dy in -CENSUS_HALF..=CENSUS_HALF {
                    let ys = y as i32 + dy;
                    let y_in = ys >= 0 && ys < h as i32;
                    let yi = clamp_i(ys, h);
                    for dx in -CENSUS_HALF..=CENSUS_HALF {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let xs = x as i32 + dx;
                        let (xi, x_in) = if circular {
                            (wrap_i(xs, w), true)
                        } else {
                            (clamp_i(xs, w), xs >= 0 && xs < w as i32)
                        };
                        if y_in && x_in {
                            masks[c / BITS_PER_WORD] |= 1 << (c % BITS_PER_WORD);
                            if gray[yi * w + xi] < center {
                                words[c / BITS_PER_WORD] |= 1 << (c % BITS_PER_WORD);
                            }
                        }
                        c += 1;
                    }
                }
                for ci in 0..CENSUS_WORDS {
                    row[x * stride + ci] = words[ci] as f32;
                    row[x * stride + CENSUS_WORDS + ci] = masks[ci] as f32;
                }
            }
        });
    map
}

/// Gathers the target features at `(x + init_u, y + init_v)` per pixel;
/// positions without a source sample are zeroed and flagged.
fn warp_features(
    target: &FeatureMap,
    init_u: &[i32],
    init_v: &[i32],
    circular: bool,
) -> (FeatureMap, Vec<bool>) {
    let (w, h, c) = (target.width, target.height, target.channels);
    let mut out = FeatureMap::new(w, h, c, target.downsample);
    let mut valid = vec![false; w * h];
    out.data
        .par_chunks_mut(w * c)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, vrow))| {
            for x in 0..w {
                let i = y * w + x;
                let ty = y as i32 + init_v[i];
                if ty < 0 || ty >= h as i32 {
                    continue;
                }
                let tx = x as i32 + init_u[i];
                let tx = if circular {
                    wrap_i(tx, w)
                } else if tx < 0 || tx >= w as i32 {
                    continue;
                } else {
                    tx as usize
                };
                let src = (ty as usize * w + tx) * c;
                row[x * c..(x + 1) * c].copy_from_slice(&target.data[src..src + c]);
                vrow[x] = true;
            }
        });
    (out, valid)
}

/// Masked Hamming distance between packed bit-pattern features. The first
/// half of the channels carries comparison bits, the second half their
/// validity masks; only bits valid at both positions are compared, and the
/// mismatch count is rescaled to the full-window bit budget so costs stay
/// comparable across positions. No mutually valid bits means no information,
/// which costs [`BIG_COST`].
#[inline]
fn feature_dist(a: &[f32], b: &[f32]) -> f32 {
    let half = a.len() / 2;
    let mut mism = 0u32;
    let mut bits = 0u32;
    for c in 0..half {
        let m = (a[half + c] as u32) & (b[half + c] as u32);
        mism += (((a[c] as u32) ^ (b[c] as u32)) & m).count_ones();
        bits += m.count_ones();
    }
    if bits == 0 {
        return BIG_COST;
    }
    mism as f32 * (half * BITS_PER_WORD) as f32 / bits as f32
}

/// Raw per-pixel cost of the displacement candidate `(du, dv)` relative to
/// the warped target.
fn candidate_raw_cost(
    source: &FeatureMap,
    wtgt: &FeatureMap,
    wvalid: &[bool],
    du: i32,
    dv: i32,
    circular: bool,
    raw: &mut [f32],
) {
    let (w, h) = (source.width, source.height);
    raw.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let ty = y as i32 + dv;
        if ty < 0 || ty >= h as i32 {
            for v in row.iter_mut() {
                *v = BIG_COST;
            }
            return;
        }
        let ty = ty as usize;
        for x in 0..w {
            let tx = x as i32 + du;
            let tx = if circular {
                wrap_i(tx, w)
            } else if tx < 0 || tx >= w as i32 {
                row[x] = BIG_COST;
                continue;
            } else {
                tx as usize
            };
            row[x] = if wvalid[ty * w + tx] {
                feature_dist(source.pixel(x, y), wtgt.pixel(tx, ty))
            } else {
                BIG_COST
            };
        }
    });
}

/// 3×3 box sum with horizontal wrap/clamp and vertical clamp.
fn box_sum(raw: &[f32], w: usize, h: usize, circular: bool, tmp: &mut [f32], out: &mut [f32]) {
    tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let xm = if circular {
                wrap_i(x as i32 - 1, w)
            } else {
                clamp_i(x as i32 - 1, w)
            };
            let xp = if circular {
                wrap_i(x as i32 + 1, w)
            } else {
                clamp_i(x as i32 + 1, w)
            };
            row[x] = raw[y * w + xm] + raw[y * w + x] + raw[y * w + xp];
        }
    });
    let tmp_ref: &[f32] = tmp;
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let ym = clamp_i(y as i32 - 1, h);
        let yp = clamp_i(y as i32 + 1, h);
        for x in 0..w {
            row[x] = tmp_ref[ym * w + x] + tmp_ref[y * w + x] + tmp_ref[yp * w + x];
        }
    });
}

/// Aggregated cost of one candidate at one pixel, matching [`box_sum`] over
/// [`candidate_raw_cost`] bit-exactly: partial sums are grouped per row first
/// so the floating-point rounding sequence is identical.
fn agg_cost_at(
    source: &FeatureMap,
    wtgt: &FeatureMap,
    wvalid: &[bool],
    x: usize,
    y: usize,
    du: i32,
    dv: i32,
    circular: bool,
) -> f32 {
    let (w, h) = (source.width, source.height);
    let raw_at = |x: usize, y: usize| -> f32 {
        let ty = y as i32 + dv;
        if ty < 0 || ty >= h as i32 {
            return BIG_COST;
        }
        let tx = x as i32 + du;
        let tx = if circular {
            wrap_i(tx, w)
        } else if tx < 0 || tx >= w as i32 {
            return BIG_COST;
        } else {
            tx as usize
        };
        let ty = ty as usize;
        if wvalid[ty * w + tx] {
            feature_dist(source.pixel(x, y), wtgt.pixel(tx, ty))
        } else {
            BIG_COST
        }
    };
    let mut total = 0.0;
    for dy in -1..=1 {
        let yy = clamp_i(y as i32 + dy, h);
        let mut row_sum = 0.0;
        for dx in -1..=1 {
            let xx = if circular {
                wrap_i(x as i32 + dx, w)
            } else {
                clamp_i(x as i32 + dx, w)
            };
            row_sum += raw_at(xx, yy);
        }
        total += row_sum;
    }
    total
}

/// 3×3 component-wise median, restricted to neighbors whose context value is
/// within `tau` of the center (edge preservation); falls back to the plain
/// 3×3 median when fewer than 3 neighbors qualify.
fn guided_median(
    u: &[f32],
    v: &[f32],
    ctx: &[f32],
    w: usize,
    h: usize,
    circular: bool,
    tau: f32,
) -> (Vec<f32>, Vec<f32>) {
    let mut out_u = vec![0.0f32; w * h];
    let mut out_v = vec![0.0f32; w * h];
    out_u
        .par_chunks_mut(w)
        .zip(out_v.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (urow, vrow))| {
            let mut us: Vec<f32> = Vec::with_capacity(9);
            let mut vs: Vec<f32> = Vec::with_capacity(9);
            for x in 0..w {
                us.clear();
                vs.clear();
                let gc = ctx[y * w + x];
                let mut all_u = [0.0f32; 9];
                let mut all_v = [0.0f32; 9];
                let mut n_all = 0;
                for dy in -1..=1 {
                    let yy = clamp_i(y as i32 + dy, h);
                    for dx in -1..=1 {
                        let xx = if circular {
                            wrap_i(x as i32 + dx, w)
                        } else {
                            clamp_i(x as i32 + dx, w)
                        };
                        let i = yy * w + xx;
                        all_u[n_all] = u[i];
                        all_v[n_all] = v[i];
                        n_all += 1;
                        if (dx == 0 && dy == 0) || (ctx[i] - gc).abs() <= tau {
                            us.push(u[i]);
                            vs.push(v[i]);
                        }
                    }
                }
                if us.len() < 3 {
                    us.clear();
                    vs.clear();
                    us.extend_from_slice(&all_u[..n_all]);
                    vs.extend_from_slice(&all_v[..n_all]);
                }
                us.sort_by(f32::total_cmp);
                vs.sort_by(f32::total_cmp);
                // Lower middle: keeps values drawn from the input set.
                urow[x] = us[(us.len() - 1) / 2];
                vrow[x] = vs[(vs.len() - 1) / 2];
            }
        });
    (out_u, out_v)
}

/// Replaces the flow values of invalid pixels by the component-wise median of
/// their already-filled 8-neighborhood, sweeping inward one ring per pass
/// (Jacobi style, so the result does not depend on traversal order). Validity
/// flags are untouched: the filled values are a best-effort extrapolation for
/// consumers that want a dense field.
fn fill_invalid(u: &mut [f32], v: &mut [f32], valid: &[bool], w: usize, h: usize, circular: bool) {
    let mut have = valid.to_vec();
    let mut remaining: Vec<usize> = (0..w * h).filter(|&i| !have[i]).collect();
    if remaining.len() == w * h {
        return;
    }
    while !remaining.is_empty() {
        let mut fills: Vec<(usize, f32, f32)> = Vec::new();
        for &i in &remaining {
            let (x, y) = (i % w, i / w);
            let mut us: Vec<f32> = Vec::with_capacity(8);
            let mut vs: Vec<f32> = Vec::with_capacity(8);
            for dy in -1i32..=1 {
                let yy = y as i32 + dy;
                if yy < 0 || yy >= h as i32 {
                    continue;
                }
                for dx in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let xx = x as i32 + dx;
                    let xx = if circular {
                        wrap_i(xx, w)
                    } else if xx < 0 || xx >= w as i32 {
                        continue;
                    } else {
                        xx as usize
                    };
                    let j = yy as usize * w + xx;
                    if have[j] {
                        us.push(u[j]);
                        vs.push(v[j]);
                    }
                }
            }
            if !us.is_empty() {
                us.sort_by(f32::total_cmp);
                vs.sort_by(f32::total_cmp);
                fills.push((i, us[(us.len() - 1) / 2], vs[(vs.len() - 1) / 2]));
            }
        }
        if fills.is_empty() {
            return;
        }
        for &(i, fu, fv) in &fills {
            u[i] = fu;
            v[i] = fv;
            have[i] = true;
        }
        remaining.retain(|&i| !have[i]);
    }
}

/// Scales a flow component field up to `(nw, nh)`, doubling the vectors.
fn upsample(f: &[f32], w: usize, h: usize, nw: usize, nh: usize, circular: bool) -> Vec<f32> {
    let mut out = vec![0.0f32; nw * nh];
    out.par_chunks_mut(nw).enumerate().for_each(|(y, row)| {
        let sy = ((y as f64 + 0.5) * h as f64 / nh as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = (sy - y0 as f64) as f32;
        for x in 0..nw {
            let sx = (x as f64 + 0.5) * w as f64 / nw as f64 - 0.5;
            let (x0, x1, fx);
            if circular {
                let sx = sx.rem_euclid(w as f64);
                x0 = sx.floor() as usize % w;
                x1 = (x0 + 1) % w;
                fx = (sx - sx.floor()) as f32;
            } else {
                let sx = sx.clamp(0.0, (w - 1) as f64);
                x0 = sx.floor() as usize;
                x1 = (x0 + 1).min(w - 1);
                fx = (sx - x0 as f64) as f32;
            }
            let top = f[y0 * w + x0] * (1.0 - fx) + f[y0 * w + x1] * fx;
            let bot = f[y1 * w + x0] * (1.0 - fx) + f[y1 * w + x1] * fx;
            row[x] = 2.0 * (top * (1.0 - fy) + bot * fy);
        }
    });
    out
}
