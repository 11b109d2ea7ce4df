//! Randers metrics `F = α + β` with `a_ij = f(r)δ_ij + g(r)x^i x^j` and
//! `b_i = h(r)x^i`, treated through the Riemannian data of `α`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarFunction;
use crate::volume::VolumeKind;

/// Everything about `(α, β)` that depends only on the radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RandersCoefficients {
    pub r: f64,
    pub f: f64,
    pub df: f64,
    pub g: f64,
    pub dg: f64,
    pub h: f64,
    pub dh: f64,
    /// `f + r²g`, the eigenvalue of `a_ij` in the radial direction.
    pub radial: f64,
    pub inv_diag: f64,
    pub inv_xx: f64,
    pub beta_norm2: f64,
    pub rho: f64,
    pub drho: f64,
    /// `b_{i;j} = u1 δ_ij + u2 x_i x_j`.
    pub u1: f64,
    pub u2: f64,
    /// `Γ^k_ij = A x^i x^j x^k + B x^k δ_ij + C (x^i δ_kj + x^j δ_ki)`.
    pub christoffel: (f64, f64, f64),
    /// Antisymmetric part of `b_{i;j}`; zero since `β` is closed.
    pub s_ij: f64,
    /// `s_j = b^i s_ij`; zero for the same reason.
    pub s_j: f64,
}

impl RandersCoefficients {
    pub fn new(f: &ScalarFunction, g: &ScalarFunction, h: &ScalarFunction, r: f64) -> Result<Self> {
        let [fv, df, ..] = f.derivatives(r)?;
        let [gv, dg, ..] = g.derivatives(r)?;
        let [hv, dh, ..] = h.derivatives(r)?;
        let (a, b, c) = christoffel_from_values(fv, df, gv, dg, r)?;
        let m = fv + r * r * gv;
        let beta_norm2 = r * r * hv * hv / m;
        if !(beta_norm2 < 1.0) {
            return Err(Error::domain(
                "|beta|^2 = r^2 h^2 / (f + r^2 g)",
                beta_norm2,
            ));
        }
        let dm = df + 2.0 * r * gv + r * r * dg;
        let dbeta =
            (2.0 * r * hv * hv + 2.0 * r * r * hv * dh) / m - r * r * hv * hv * dm / (m * m);
        let (u1, u2) = covariant_from_values(fv, df, gv, dg, hv, dh, r);
        Ok(RandersCoefficients {
            r,
            f: fv,
            df,
            g: gv,
            dg,
            h: hv,
            dh,
            radial: m,
            inv_diag: 1.0 / fv,
            inv_xx: -gv / (fv * m),
            beta_norm2,
            rho: 0.5 * (1.0 - beta_norm2).ln(),
            drho: -0.5 * dbeta / (1.0 - beta_norm2),
            u1,
            u2,
            christoffel: (a, b, c),
            s_ij: 0.0,
            s_j: 0.0,
        })
    }

    /// `det(a_ij) = (f + r²g) f^{n−1}`.
    pub fn det_a(&self, n: usize) -> f64 {
        self.radial * self.f.powi(n as i32 - 1)
    }

    /// `φ(r, s) = sqrt(f + g s²) + h s`.
    pub fn phi(&self, s: f64) -> f64 {
        (self.f + self.g * s * s).sqrt() + self.h * s
    }

    /// `e_00 / u² = r_00 / u²` at `(r, s)`.
    pub fn e00(&self, s: f64) -> f64 {
        self.u1 + self.u2 * s * s
    }
}

fn christoffel_from_values(f: f64, df: f64, g: f64, dg: f64, r: f64) -> Result<(f64, f64, f64)> {
    if !(f > 0.0) {
        return Err(Error::domain("f", f));
    }
    let m = f + r * r * g;
    if !(m > 0.0) {
        return Err(Error::domain("f + r^2 g", m));
    }
    let a = (f * dg - 2.0 * df * g) / (2.0 * r * f * m);
    let b = (2.0 * r * g - df) / (2.0 * r * m);
    let c = df / (2.0 * r * f);
    Ok((a, b, c))
}

fn covariant_from_values(f: f64, df: f64, g: f64, dg: f64, h: f64, dh: f64, r: f64) -> (f64, f64) {
    let m = f + r * r * g;
    let u1 = 0.5 * h * (r * df + 2.0 * f) / m;
    let u2 = dh / r - 0.5 * h * (r * r * dg + 2.0 * df) / (r * m);
    (u1, u2)
}

/// `(A, B, C)` of the Christoffel symbols of `α`.
pub fn christoffel_coefficients(
    f: &ScalarFunction,
    g: &ScalarFunction,
    r: f64,
) -> Result<(f64, f64, f64)> {
    let [fv, df, ..] = f.derivatives(r)?;
    let [gv, dg, ..] = g.derivatives(r)?;
    christoffel_from_values(fv, df, gv, dg, r)
}

/// `(u1, u2)` with `b_{i;j} = u1 δ_ij + u2 x_i x_j`.
pub fn covariant_b_coefficients(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    r: f64,
) -> Result<(f64, f64)> {
    let c = RandersCoefficients::new(f, g, h, r)?;
    Ok((c.u1, c.u2))
}

/// `S/u` from the Randers formulas: `(n+1)(e_00/(2F) − s_0 − ρ_0)` for BH
/// and `(n+1)(e_00/(2F) − s_0)` for HT. The factor on `ρ_0` comes from
/// `σ_BH = e^{(n+1)ρ} sqrt(det a)`.
pub fn randers_reduced_s(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    n: usize,
    r: f64,
    s: f64,
    volume: VolumeKind,
) -> Result<f64> {
    randers_s_terms(f, g, h, n, r, s, volume, (n + 1) as f64)
}

/// The BH formula with `ρ_0` outside the `(n+1)` factor, i.e.
/// `(n+1) e_00/(2F) − (s_0 + ρ_0)`. Kept for comparison only; it disagrees
/// with the volume form it is derived from whenever `ρ' ≠ 0`.
pub fn randers_reduced_s_as_printed(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    n: usize,
    r: f64,
    s: f64,
    volume: VolumeKind,
) -> Result<f64> {
    randers_s_terms(f, g, h, n, r, s, volume, 1.0)
}

#[allow(clippy::too_many_arguments)]
fn randers_s_terms(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    n: usize,
    r: f64,
    s: f64,
    volume: VolumeKind,
    rho_factor: f64,
) -> Result<f64> {
    if s.abs() > r * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("|s| = {} exceeds r = {r}", s.abs())));
    }
    let c = RandersCoefficients::new(f, g, h, r)?;
    let phi = c.phi(s);
    // s_0 = 0 for closed β; kept so the formula reads in full
    let s0 = c.s_j * s;
    let main = (n + 1) as f64 * (c.e00(s) / (2.0 * phi) - s0);
    match volume {
        VolumeKind::Bh => Ok(main - rho_factor * c.drho * s / r),
        VolumeKind::Ht => Ok(main),
        other => Err(Error::invalid(format!(
            "the Randers S-curvature formula needs a BH or HT volume, got {other:?}"
        ))),
    }
}

/// Outcome of matching `e_00 = 2c(α² − β²)` at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma42Report {
    pub r: f64,
    pub c: f64,
    /// Sup over the grid of `|u1 + u2 s² − 2c(f + (g − h²)s²)|`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Finds the scalar `c` that best fits `e_00 = 2c(α² − β²)` on the grid.
pub fn lemma42_check(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    r: f64,
    s: &[f64],
) -> Result<Lemma42Report> {
    if s.is_empty() {
        return Err(Error::invalid("lemma42_check needs a non-empty s grid"));
    }
    let k = RandersCoefficients::new(f, g, h, r)?;
    let rhs = |si: f64| 2.0 * (k.f + (k.g - k.h * k.h) * si * si);
    let (num, den) = s.iter().fold((0.0, 0.0), |(a, b), &si| {
        (a + k.e00(si) * rhs(si), b + rhs(si) * rhs(si))
    });
    let c = num / den;
    let residual = s
        .iter()
        .map(|&si| (k.e00(si) - c * rhs(si)).abs())
        .fold(0.0, f64::max);
    let tolerance = 1e-10 * (1.0 + k.u1.abs() + k.u2.abs() * r * r);
    Ok(Lemma42Report {
        r,
        c,
        residual,
        tolerance,
        pass: residual <= tolerance,
    })
}
