//! Regularization parameter choice by the corner of the L-curve.
//!
//! For each candidate `B` the filter is run and the pair
//! `(ln residual, ln smoothness)` recorded. The corner is the interior grid
//! point of largest signed three-point (Menger) curvature, taken with the
//! orientation in which the L bends counterclockwise as `B` grows.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{forward_sweep, AugmentedModel, EstimationResult, FilterWeights, GainSchedule};

/// Curvature below which the curve is treated as having no corner.
pub const FLAT_CURVATURE: f64 = 1e-12;

// Norms are floored before taking logs so noise-free fits stay finite.
const NORM_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct LCurvePoint {
    pub b: f64,
    pub residual_norm: f64,
    pub smoothness_norm: f64,
    /// Zero at the two end points.
    pub curvature: f64,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct LCurveSelection {
    pub chosen_b: f64,
    pub chosen_index: usize,
    /// Points in ascending `B`.
    pub points: Vec<LCurvePoint>,
    /// No corner found; the median grid value was returned.
    pub flat: bool,
    pub estimate: EstimationResult,
}

impl LCurveSelection {
    /// CSV with header `B,residual_norm,smoothness_norm,curvature,selected`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("B,residual_norm,smoothness_norm,curvature,selected\n");
        for p in &self.points {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{}",
                p.b,
                p.residual_norm,
                p.smoothness_norm,
                p.curvature,
                u8::from(p.selected)
            )
            .unwrap();
        }
        out
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Signed Menger curvature of the turn `p0 → p1 → p2`.
pub fn menger_curvature(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let a = (p1.0 - p0.0, p1.1 - p0.1);
    let b = (p2.0 - p1.0, p2.1 - p1.1);
    let c = (p2.0 - p0.0, p2.1 - p0.1);
    let la = a.0.hypot(a.1);
    let lb = b.0.hypot(b.1);
    let lc = c.0.hypot(c.1);
    let denom = la * lb * lc;
    if !(denom > 0.0) || !denom.is_finite() {
        return 0.0;
    }
    2.0 * (a.0 * b.1 - a.1 * b.0) / denom
}

pub fn l_curve_select(
    aug: &AugmentedModel,
    weights_template: &FilterWeights,
    measurements: &[DVector<f64>],
    b_grid: &[f64],
    z0: &DVector<f64>,
) -> Result<LCurveSelection> {
    let schedules = b_grid
        .par_iter()
        .map(|&b| {
            let w = weights_template.with_b(b)?;
            GainSchedule::compute(aug, &w, measurements.len()).map(Arc::new)
        })
        .collect::<Result<Vec<_>>>()?;
    l_curve_from_schedules(aug, weights_template, &schedules, measurements, z0)
}

/// L-curve over precomputed gain schedules, one per grid value.
pub fn l_curve_from_schedules(
    aug: &AugmentedModel,
    weights_template: &FilterWeights,
    schedules: &[Arc<GainSchedule>],
    measurements: &[DVector<f64>],
    z0: &DVector<f64>,
) -> Result<LCurveSelection> {
    if schedules.is_empty() {
        return Err(Error::InvalidArgument("empty regularization grid".into()));
    }
    let mut order: Vec<usize> = (0..schedules.len()).collect();
    order.sort_by(|&i, &j| schedules[i].b_reg.total_cmp(&schedules[j].b_reg));

    let mut runs = order
        .par_iter()
        .map(|&i| {
            let sched = &schedules[i];
            let pass = sched.backward(aug, measurements)?;
            let w = weights_template.with_b(sched.b_reg)?;
            forward_sweep(aug, &pass, &w, measurements, z0).map(|est| (sched.b_reg, est))
        })
        .collect::<Result<Vec<_>>>()?;

    let logs: Vec<(f64, f64)> = runs
        .iter()
        .map(|(_, e)| (e.residual_norm.max(NORM_FLOOR).ln(), e.smoothness_norm.max(NORM_FLOOR).ln()))
        .collect();
    let mut curvature = vec![0.0; runs.len()];
    for i in 1..runs.len().saturating_sub(1) {
        curvature[i] = menger_curvature(logs[i - 1], logs[i], logs[i + 1]);
    }
    let best = curvature
        .iter()
        .enumerate()
        .filter(|(_, &k)| k.is_finite())
        .fold(None::<(usize, f64)>, |acc, (i, &k)| match acc {
            Some((_, bk)) if bk >= k => acc,
            _ => Some((i, k)),
        });
    let (chosen_index, flat) = match best {
        Some((i, k)) if k >= FLAT_CURVATURE => (i, false),
        _ => (runs.len() / 2, true),
    };

    let points = runs
        .iter()
        .enumerate()
        .map(|(i, (b, e))| LCurvePoint {
            b: *b,
            residual_norm: e.residual_norm,
            smoothness_norm: e.smoothness_norm,
            curvature: curvature[i],
            selected: i == chosen_index,
        })
        .collect();
    let (chosen_b, estimate) = runs.swap_remove(chosen_index);
    Ok(LCurveSelection {
        chosen_b,
        chosen_index,
        points,
        flat,
        estimate,
    })
}
