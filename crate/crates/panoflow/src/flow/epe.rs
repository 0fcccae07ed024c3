//! End-point-error metrics and the per-condition evaluation report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowField;

/// EPE statistics over one set of masked valid pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpeStats {
    /// Mean Euclidean end-point error in pixels.
    pub epe_mean: f64,
    /// Fraction of pixels with error strictly greater than 1 px.
    pub px1: f64,
    /// Fraction of pixels with error strictly greater than 3 px.
    pub px3: f64,
    /// Fraction of pixels with error strictly greater than 5 px.
    pub px5: f64,
    /// Number of pixels that entered the statistics.
    pub pixel_count: u64,
}

impl EpeStats {
    fn from_errors(sum: f64, over1: u64, over3: u64, over5: u64, count: u64) -> EpeStats {
        let n = count as f64;
        EpeStats {
            epe_mean: sum / n,
            px1: over1 as f64 / n,
            px3: over3 as f64 / n,
            px5: over5 as f64 / n,
            pixel_count: count,
        }
    }
}

/// Per-condition EPE statistics plus the pixel-count-weighted aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub conditions: BTreeMap<String, EpeStats>,
    pub all: EpeStats,
}

impl EvalReport {
    /// Builds a report from per-condition stats; the `all` row is the
    /// pixel-count-weighted mean of the conditions.
    pub fn from_conditions(conditions: BTreeMap<String, EpeStats>) -> Result<EvalReport> {
        if conditions.is_empty() {
            return Err(Error::contract("evaluation report with no conditions"));
        }
        let total: u64 = conditions.values().map(|s| s.pixel_count).sum();
        if total == 0 {
            return Err(Error::contract("evaluation report with zero pixels"));
        }
        let tw = total as f64;
        let mut all = EpeStats {
            epe_mean: 0.0,
            px1: 0.0,
            px3: 0.0,
            px5: 0.0,
            pixel_count: total,
        };
        for s in conditions.values() {
            let w = s.pixel_count as f64 / tw;
            all.epe_mean += w * s.epe_mean;
            all.px1 += w * s.px1;
            all.px3 += w * s.px3;
            all.px5 += w * s.px5;
        }
        Ok(EvalReport { conditions, all })
    }

    /// Aligned-column text table, one row per condition plus the aggregate.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>10} {:>8} {:>8} {:>8} {:>12}\n",
            "condition", "epe", "px1", "px3", "px5", "pixels"
        ));
        let mut row = |name: &str, s: &EpeStats| {
            out.push_str(&format!(
                "{:<12} {:>10.4} {:>8.4} {:>8.4} {:>8.4} {:>12}\n",
                name, s.epe_mean, s.px1, s.px3, s.px5, s.pixel_count
            ));
        };
        for (name, s) in &self.conditions {
            row(name, s);
        }
        row("all", &self.all);
        out
    }
}

/// Mean end-point error between a predicted and a ground-truth flow field.
///
/// Both fields must share dimensions and representation (comparing a classical
/// with a wrapped flow is meaningless and rejected). Pixels enter the
/// statistics when valid in both fields and, if `mask` is given, selected by
/// it.
pub fn epe(pred: &FlowField, gt: &FlowField, mask: Option<&[bool]>) -> Result<EpeStats> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::contract(format!(
            "epe: dimension mismatch {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    if pred.representation() != gt.representation() {
        return Err(Error::contract(
            "epe: representation mismatch (classical vs wrapped 360)",
        ));
    }
    if let Some(m) = mask {
        if m.len() != pred.width() * pred.height() {
            return Err(Error::contract("epe: mask length mismatch"));
        }
    }

    let n = pred.width() * pred.height();
    let (mut sum, mut over1, mut over3, mut over5, mut count) = (0.0f64, 0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        if !pred.valid_mask()[i] || !gt.valid_mask()[i] {
            continue;
        }
        if let Some(m) = mask {
            if !m[i] {
                continue;
            }
        }
        let du = (pred.u()[i] - gt.u()[i]) as f64;
        let dv = (pred.v()[i] - gt.v()[i]) as f64;
        let err = (du * du + dv * dv).sqrt();
        sum += err;
        count += 1;
        if err > 1.0 {
            over1 += 1;
        }
        if err > 3.0 {
            over3 += 1;
        }
        if err > 5.0 {
            over5 += 1;
        }
    }
    if count == 0 {
        return Err(Error::contract("epe: no pixels selected by the mask"));
    }
    Ok(EpeStats::from_errors(sum, over1, over3, over5, count))
}
