//! Spherically symmetric volume densities `dV = σ(r) dx`.
//!
//! The Busemann–Hausdorff and Holmes–Thompson densities reduce to one
//! dimensional integrals over the angle `t` between `x` and `y`, with
//! `s = r cos t`. Their radial derivatives are taken under the integral sign
//! and cross-checked by central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Jet3, ScalarFunction};
use crate::geometry::{regular_jet, MetricSpec};
use crate::quadrature::{GaussLegendre, QuadratureRule};

/// Which volume form to attach to the metric.
#[derive(Clone, Debug, PartialEq)]
pub enum VolumeSpec {
    BusemannHausdorff,
    HolmesThompson,
    Custom(ScalarFunction),
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeKind {
    Bh,
    Ht,
    Custom,
    Constant,
}

impl VolumeSpec {
    pub fn kind(&self) -> VolumeKind {
        match self {
            VolumeSpec::BusemannHausdorff => VolumeKind::Bh,
            VolumeSpec::HolmesThompson => VolumeKind::Ht,
            VolumeSpec::Custom(_) => VolumeKind::Custom,
            VolumeSpec::Constant => VolumeKind::Constant,
        }
    }
}

/// Relative agreement required between the two `σ'` evaluations.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

/// `T(r, s) = φ (φ − sφ_s)^{n−2} [(φ − sφ_s) + (r² − s²)φ_ss]` as a jet
/// exact to first order.
fn t_jet(phi: &Jet3, r: f64, s: f64, n: usize) -> Jet3 {
    let rj = Jet3::var_r(r);
    let sj = Jet3::var_s(s);
    let phi_s = phi.d_s();
    let phi_ss = phi_s.d_s();
    let e = *phi - sj * phi_s;
    let d = e + (rj * rj - sj * sj) * phi_ss;
    let mut t = *phi * d;
    for _ in 0..n.saturating_sub(2) {
        t = t * e;
    }
    t
}

fn sin_weight(t: f64, n: usize) -> f64 {
    t.sin().powi(n as i32 - 2)
}

/// `[∫ sin^{n−2}, ∫ sin^{n−2} φ^{−n}, ∫ sin^{n−2} d/dr φ^{−n}]` for BH or the
/// analogous triple with `T` for HT.
fn angular_integrals(
    spec: &MetricSpec,
    r: f64,
    ht: bool,
    integrate: impl Fn(&dyn Fn(f64) -> Result<[f64; 3]>) -> Result<[f64; 3]>,
) -> Result<[f64; 3]> {
    let n = spec.n;
    integrate(&|t: f64| {
        let cos_t = t.cos();
        let wgt = sin_weight(t, n);
        let s = r * cos_t;
        let phi = regular_jet(spec, r, s)?;
        if ht {
            let tj = t_jet(&phi, r, s, n);
            let d = tj.partial(1, 0) + cos_t * tj.partial(0, 1);
            Ok([wgt, wgt * tj.value(), wgt * d])
        } else {
            let p = phi.value();
            let p_n = p.powi(-(n as i32));
            let dphi = phi.partial(1, 0) + cos_t * phi.partial(0, 1);
            Ok([wgt, wgt * p_n, wgt * (-(n as f64)) * p_n / p * dphi])
        }
    })
}

/// `(σ, σ')` from the angular integrals.
fn density_pair(ht: bool, [a, b, db]: [f64; 3]) -> (f64, f64) {
    if ht {
        let sigma = b / a;
        (sigma, db / a)
    } else {
        let sigma = a / b;
        (sigma, -a * db / (b * b))
    }
}

fn adaptive(spec: &MetricSpec, r: f64, ht: bool, rule: &QuadratureRule) -> Result<[f64; 3]> {
    angular_integrals(spec, r, ht, |f| {
        rule.integrate_many(0.0, std::f64::consts::PI, r, f)
    })
}

fn fixed(spec: &MetricSpec, r: f64, ht: bool, rule: &GaussLegendre) -> Result<[f64; 3]> {
    angular_integrals(spec, r, ht, |f| {
        let mut acc = [0.0; 3];
        for (t, w) in rule.mapped(0.0, std::f64::consts::PI) {
            let v = f(t)?;
            for k in 0..3 {
                acc[k] += w * v[k];
            }
        }
        Ok(acc)
    })
}

/// Busemann–Hausdorff density
/// `σ_BH = ∫₀^π sin^{n−2}t dt / ∫₀^π sin^{n−2}t φ(r, r cos t)^{−n} dt`.
pub fn sigma_bh(spec: &MetricSpec, r: f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(density_pair(false, adaptive(spec, r, false, rule)?).0)
}

/// Holmes–Thompson density
/// `σ_HT = ∫₀^π sin^{n−2}t T(r, r cos t) dt / ∫₀^π sin^{n−2}t dt`.
pub fn sigma_ht(spec: &MetricSpec, r: f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(density_pair(true, adaptive(spec, r, true, rule)?).0)
}

/// `σ(r)` for any volume choice.
pub fn density(vol: &VolumeSpec, spec: &MetricSpec, r: f64, rule: &QuadratureRule) -> Result<f64> {
    match vol {
        VolumeSpec::BusemannHausdorff => sigma_bh(spec, r, rule),
        VolumeSpec::HolmesThompson => sigma_ht(spec, r, rule),
        VolumeSpec::Custom(sigma) => {
            let v = sigma.value(r)?;
            if !(v > 0.0) {
                return Err(Error::domain("custom sigma", v));
            }
            Ok(v)
        }
        VolumeSpec::Constant => Ok(1.0),
    }
}

/// Density and its radial derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityJet {
    pub sigma: f64,
    pub dsigma: f64,
    /// Central-difference estimate of `σ'` (quadrature volumes only).
    pub dsigma_check: Option<f64>,
}

impl DensityJet {
    /// `f(r) = −σ'(r) / (r σ(r))`.
    pub fn f_coefficient(&self, r: f64) -> f64 {
        -self.dsigma / (r * self.sigma)
    }
}

/// `σ`, `σ'` and (for BH/HT) the finite-difference check of `σ'`.
pub fn density_jet(
    vol: &VolumeSpec,
    spec: &MetricSpec,
    r: f64,
    rule: &QuadratureRule,
) -> Result<DensityJet> {
    match vol {
        VolumeSpec::Constant => Ok(DensityJet {
            sigma: 1.0,
            dsigma: 0.0,
            dsigma_check: None,
        }),
        VolumeSpec::Custom(sigma) => {
            let d = sigma.derivatives(r)?;
            if !(d[0] > 0.0) {
                return Err(Error::domain("custom sigma", d[0]));
            }
            Ok(DensityJet {
                sigma: d[0],
                dsigma: d[1],
                dsigma_check: None,
            })
        }
        VolumeSpec::BusemannHausdorff | VolumeSpec::HolmesThompson => {
            let ht = matches!(vol, VolumeSpec::HolmesThompson);
            let (sigma, dsigma) = density_pair(ht, adaptive(spec, r, ht, rule)?);
            // The stencil uses one fixed, finer rule so that refinement jumps
            // between neighbouring radii cannot leak into the difference.
            let levels = rule.levels();
            let fine = &levels[levels.len().min(3) - 1];
            let fine = if fine.len() < 128 {
                GaussLegendre::new(256)
            } else {
                fine.clone()
            };
            // Richardson on steps h and 2h; plain central differences are
            // too coarse where σ''' is large (Funk-like metrics near r = 1).
            let h = 1e-4 * r;
            let sig =
                |x: f64| -> Result<f64> { Ok(density_pair(ht, fixed(spec, x, ht, &fine)?).0) };
            let d1 = (sig(r + h)? - sig(r - h)?) / (2.0 * h);
            let d2 = (sig(r + 2.0 * h)? - sig(r - 2.0 * h)?) / (4.0 * h);
            let check = (4.0 * d1 - d2) / 3.0;
            let scale = dsigma.abs().max(sigma / r);
            if (dsigma - check).abs() > CROSS_CHECK_TOLERANCE * scale {
                return Err(Error::CrossCheck {
                    r,
                    primary: dsigma,
                    check,
                });
            }
            Ok(DensityJet {
                sigma,
                dsigma,
                dsigma_check: Some(check),
            })
        }
    }
}

/// `f(r) = −σ'(r)/(r σ(r))`.
pub fn f_coefficient(
    vol: &VolumeSpec,
    spec: &MetricSpec,
    r: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(density_jet(vol, spec, r, rule)?.f_coefficient(r))
}
