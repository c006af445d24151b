//! Gauss linking integral of a loop with its framing companion.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Tolerances;
use crate::curve::LoopCurve;
use crate::error::{NumericError, Result};
use crate::sum::pairwise;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LinkingResult {
    pub value: f64,
    pub rounded: i64,
    pub deviation: f64,
    pub epsilon: f64,
    pub grid: usize,
}

/// `lk(γ, γ + εν)` with `ε = framing_fraction · diameter` on a
/// `linking_grid²` periodic grid.
pub fn linking_integral(curve: &LoopCurve, tol: &Tolerances) -> Result<LinkingResult> {
    linking_with(curve, tol.framing_fraction * curve.diameter(), tol.linking_grid, false)
}

/// Gauss double integral
/// `(1/4π) ∮∮ (γ(s) - γ̃(t)) · (γ'(s) × γ̃'(t)) / |γ(s) - γ̃(t)|³ ds dt`
/// with the companion `γ̃ = γ + εν`, traversed backwards when `reverse`.
pub fn linking_with(curve: &LoopCurve, eps: f64, grid: usize, reverse: bool) -> Result<LinkingResult> {
    if curve.dim() != 3 {
        return Err(NumericError::Argument(format!("linking integral needs a curve in R^3, got R^{}", curve.dim())));
    }
    if grid < 4 || !(eps > 0.0) {
        return Err(NumericError::Argument(format!("need grid >= 4 and epsilon > 0, got {grid} and {eps}")));
    }
    let h = 1.0 / grid as f64;
    let first: Vec<(DVector<f64>, DVector<f64>)> = (0..grid).map(|i| curve.point_and_velocity(i as f64 * h)).collect();
    let second: Vec<(DVector<f64>, DVector<f64>)> = (0..grid)
        .map(|j| {
            let t = if reverse { 1.0 - j as f64 * h } else { j as f64 * h };
            let (x, v) = curve.point_and_velocity(t);
            let (nu, dnu) = curve.framing(t);
            let d = v + dnu * eps;
            (x + nu * eps, if reverse { -d } else { d })
        })
        .collect();
    let rows: Vec<(f64, f64)> = first
        .par_iter()
        .map(|(x, dx)| {
            let mut min: f64 = f64::INFINITY;
            let terms: Vec<f64> = second
                .iter()
                .map(|(y, dy)| {
                    let r = x - y;
                    let d = r.norm();
                    min = min.min(d);
                    r.dot(&dx.cross(dy)) / (d * d * d)
                })
                .collect();
            (pairwise(&terms), min)
        })
        .collect();
    let closest = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if closest < 0.25 * eps {
        return Err(NumericError::Framing(format!(
            "companion comes within {closest:.3e} of the curve (epsilon = {eps:.3e})"
        )));
    }
    let sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let value = pairwise(&sums) * h * h / (4.0 * PI);
    let rounded = value.round() as i64;
    Ok(LinkingResult { value, rounded, deviation: value - rounded as f64, epsilon: eps, grid })
}
