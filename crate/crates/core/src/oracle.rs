//! Independent S-curvature path: integrate geodesics of the spray and
//! differentiate the distortion along them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{determinant_from_jet, polar, regular_jet, spray_from_jet, MetricSpec};
use crate::quadrature::QuadratureRule;
use crate::volume::{density, VolumeSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    /// Largest `|F(x(t), y(t)) / F(x0, y0) − 1|` along the path.
    pub drift: f64,
}

pub const MIN_GEODESIC_STEPS: usize = 16;

/// `G^i = u P y^i + u² Q x^i`.
pub fn spray_vector(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (r, u, s) = polar(x, y)?;
    let jet = regular_jet(spec, r, s)?;
    let v = spray_from_jet(&jet, r, s)?;
    Ok(x.iter()
        .zip(y)
        .map(|(xi, yi)| u * v.p * yi + u * u * v.q * xi)
        .collect())
}

fn rhs(spec: &MetricSpec, x: &[f64], y: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !spec.domain.contains(r) {
        return Err(Error::DomainExit { t, r });
    }
    let g = spray_vector(spec, x, y)?;
    Ok((y.to_vec(), g.into_iter().map(|v| -2.0 * v).collect()))
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + h * q).collect()
}

/// RK4 for `ẍ = −2G(x, ẋ)`; `t_end` may be negative.
pub fn integrate_geodesic(
    spec: &MetricSpec,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps < MIN_GEODESIC_STEPS {
        return Err(Error::invalid(format!(
            "integrate_geodesic needs at least {MIN_GEODESIC_STEPS} steps, got {steps}"
        )));
    }
    if x0.len() != spec.n || y0.len() != spec.n {
        return Err(Error::invalid(format!(
            "initial data must have dimension {}",
            spec.n
        )));
    }
    let f0 = spec.finsler_norm(x0, y0)?;
    let h = t_end / steps as f64;
    let mut states = vec![GeodesicState {
        x: x0.to_vec(),
        y: y0.to_vec(),
        t: 0.0,
    }];
    let mut drift: f64 = 0.0;
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    for k in 0..steps {
        let t = k as f64 * h;
        let (k1x, k1y) = rhs(spec, &x, &y, t)?;
        let (k2x, k2y) = rhs(
            spec,
            &axpy(&x, 0.5 * h, &k1x),
            &axpy(&y, 0.5 * h, &k1y),
            t + 0.5 * h,
        )?;
        let (k3x, k3y) = rhs(
            spec,
            &axpy(&x, 0.5 * h, &k2x),
            &axpy(&y, 0.5 * h, &k2y),
            t + 0.5 * h,
        )?;
        let (k4x, k4y) = rhs(spec, &axpy(&x, h, &k3x), &axpy(&y, h, &k3y), t + h)?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !spec.domain.contains(r) {
            return Err(Error::DomainExit { t: t + h, r });
        }
        drift = drift.max((spec.finsler_norm(&x, &y)? / f0 - 1.0).abs());
        states.push(GeodesicState {
            x: x.clone(),
            y: y.clone(),
            t: t + h,
        });
    }
    Ok(Trajectory { states, drift })
}

/// `τ = ln(sqrt(det g) / σ)`.
pub fn distortion(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    x: &[f64],
    y: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    let (r, _, s) = polar(x, y)?;
    let jet = regular_jet(spec, r, s)?;
    let det = determinant_from_jet(&jet, spec.n, r, s);
    Ok(0.5 * det.ln() - density(vol, spec, r, rule)?.ln())
}

/// Geodesic substeps between stencil points.
const SUBSTEPS: usize = 8;

/// `S(x0, y0) = dτ/dt` at `t = 0` by the five-point stencil. `dt = None`
/// selects `1e-3 / F(x0, y0)`.
pub fn s_by_distortion(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    x0: &[f64],
    y0: &[f64],
    dt: Option<f64>,
    rule: &QuadratureRule,
) -> Result<f64> {
    let dt = match dt {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::invalid(format!("dt must be positive, got {v}"))),
        None => 1e-3 / spec.finsler_norm(x0, y0)?,
    };
    let mut tau = [0.0; 4];
    for (slot, dir) in [(0, 1.0), (2, -1.0)] {
        let path = integrate_geodesic(spec, x0, y0, 2.0 * dir * dt, 2 * SUBSTEPS)?;
        let near = &path.states[SUBSTEPS];
        let far = &path.states[2 * SUBSTEPS];
        tau[slot] = distortion(spec, vol, &near.x, &near.y, rule)?;
        tau[slot + 1] = distortion(spec, vol, &far.x, &far.y, rule)?;
    }
    let [p1, p2, m1, m2] = tau;
    Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * dt))
}
