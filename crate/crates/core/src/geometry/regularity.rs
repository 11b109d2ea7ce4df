use rayon::prelude::*;
use serde::Serialize;

use super::tensor::cholesky_ok;
use super::{positivity_margins, MetricSpec};
use crate::grid::{r_grid, s_grid};

/// Per-point outcome of the three positivity conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointFlags {
    pub r: f64,
    pub s: f64,
    /// `[φ > 0, φ − sφ_s > 0, φ − sφ_s + (r² − s²)φ_ss > 0]`; all false if
    /// the profile could not be evaluated.
    pub ok: [bool; 3],
    pub margins: [f64; 3],
    /// Report-only positive-definiteness check of the assembled tensor.
    pub cholesky: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub r_count: usize,
    pub s_count: usize,
    pub points: Vec<PointFlags>,
    pub pass: bool,
    /// Smallest margin over all points and conditions.
    pub worst_margin: f64,
    pub worst_condition: &'static str,
    pub worst_at: (f64, f64),
    /// Points where the scalar conditions hold but Cholesky fails.
    pub cholesky_disagreements: usize,
}

/// Evaluates the positivity conditions on the `(r, s)` grid.
///
/// Failures are reported rather than raised.
pub fn regularity_scan(spec: &MetricSpec, r_count: usize, s_count: usize) -> RegularityReport {
    let r_count = r_count.max(2);
    let s_count = s_count.max(2);
    let radii = r_grid(spec.domain, r_count);
    let points: Vec<PointFlags> = radii
        .par_iter()
        .flat_map_iter(|&r| {
            s_grid(r, s_count).into_iter().map(move |s| {
                let (ok, margins) = match spec.profile_jet(r, s) {
                    Ok(jet) => {
                        let m = positivity_margins(&jet, r, s);
                        ([m[0] > 0.0, m[1] > 0.0, m[2] > 0.0], m)
                    }
                    Err(_) => ([false; 3], [f64::NEG_INFINITY; 3]),
                };
                let cholesky = ok[0] && cholesky_ok(spec, r, s).unwrap_or(false);
                PointFlags {
                    r,
                    s,
                    ok,
                    margins,
                    cholesky,
                }
            })
        })
        .collect();

    let mut worst_margin = f64::INFINITY;
    let mut worst_condition = super::CONDITION_NAMES[0];
    let mut worst_at = (radii[0], 0.0);
    let mut cholesky_disagreements = 0;
    for p in &points {
        for k in 0..3 {
            if p.margins[k] < worst_margin || p.margins[k].is_nan() {
                worst_margin = p.margins[k];
                worst_condition = super::CONDITION_NAMES[k];
                worst_at = (p.r, p.s);
            }
        }
        if p.ok.iter().all(|&b| b) && !p.cholesky {
            cholesky_disagreements += 1;
        }
    }
    let pass = points.iter().all(|p| p.ok.iter().all(|&b| b));
    RegularityReport {
        r_count,
        s_count,
        points,
        pass,
        worst_margin,
        worst_condition,
        worst_at,
        cholesky_disagreements,
    }
}
