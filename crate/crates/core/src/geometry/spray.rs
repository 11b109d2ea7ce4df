use super::{phi_jet, MetricSpec};
use crate::error::{Error, Result};
use crate::expr::Jet3;

/// Spray data at a point: `G^i = u P y^i + u² Q x^i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SprayValues {
    pub p: f64,
    pub q: f64,
    pub q_s: f64,
    /// `φ − sφ_s + (r² − s²)φ_ss`, the denominator of `Q`.
    pub denom: f64,
}

/// `P`, `Q` and `∂Q/∂s` at `(r, s)`.
pub fn spray_values(spec: &MetricSpec, r: f64, s: f64) -> Result<SprayValues> {
    let jet = phi_jet(spec, r, s)?;
    spray_from_jet(&jet, r, s)
}

/// Spray coefficients from a profile jet.
///
/// `Q = N / (2 r D)` with `N = −φ_r + sφ_rs + rφ_ss` and
/// `D = φ − sφ_s + (r² − s²)φ_ss`; `Q_s` differentiates that quotient using
/// the order-3 components `φ_rss` and `φ_sss`.
pub fn spray_from_jet(jet: &Jet3, r: f64, s: f64) -> Result<SprayValues> {
    let phi = jet.value();
    let phi_r = jet.partial(1, 0);
    let phi_s = jet.partial(0, 1);
    let phi_rs = jet.partial(1, 1);
    let phi_ss = jet.partial(0, 2);
    let phi_rss = jet.partial(1, 2);
    let phi_sss = jet.partial(0, 3);
    let w = r * r - s * s;

    let denom = phi - s * phi_s + w * phi_ss;
    if !(denom > 0.0) {
        return Err(Error::Regularity {
            r,
            s,
            condition: super::CONDITION_NAMES[2],
            value: denom,
        });
    }
    if !(phi > 0.0) {
        return Err(Error::Regularity {
            r,
            s,
            condition: super::CONDITION_NAMES[0],
            value: phi,
        });
    }
    let num = -phi_r + s * phi_rs + r * phi_ss;
    let q = num / (2.0 * r * denom);
    let p = -(s * phi + w * phi_s) * q / phi + (s * phi_r + r * phi_s) / (2.0 * r * phi);

    let num_s = s * phi_rss + r * phi_sss;
    let denom_s = -3.0 * s * phi_ss + w * phi_sss;
    let q_s = (num_s * denom - num * denom_s) / (2.0 * r * denom * denom);

    Ok(SprayValues { p, q, q_s, denom })
}
