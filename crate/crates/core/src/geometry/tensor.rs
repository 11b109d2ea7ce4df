use nalgebra::DMatrix;

use super::{phi_jet, polar, regular_jet, MetricSpec};
use crate::error::{Error, Result};
use crate::expr::Jet3;

/// `det(g_ij) = φ^{n+1} (φ − sφ_s)^{n−2} (φ − sφ_s + (r² − s²)φ_ss)`.
pub fn metric_determinant(spec: &MetricSpec, r: f64, s: f64) -> Result<f64> {
    let jet = phi_jet(spec, r, s)?;
    Ok(determinant_from_jet(&jet, spec.n, r, s))
}

pub(crate) fn determinant_from_jet(jet: &Jet3, n: usize, r: f64, s: f64) -> f64 {
    let phi = jet.value();
    let e = phi - s * jet.partial(0, 1);
    let d = e + (r * r - s * s) * jet.partial(0, 2);
    phi.powi(n as i32 + 1) * e.powi(n as i32 - 2) * d
}

/// The fundamental tensor `g_ij(x, y)` assembled entry by entry.
pub fn assemble_metric_matrix(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    if n != spec.n {
        return Err(Error::invalid(format!(
            "point has dimension {n}, metric has {}",
            spec.n
        )));
    }
    let (r, u, s) = polar(x, y)?;
    if !spec.domain.contains(r) {
        return Err(Error::domain("r outside metric domain", r));
    }
    let jet = spec.profile_jet(r, s)?;
    Ok(matrix_from_jet(&jet, x, y, u, s))
}

pub(crate) fn matrix_from_jet(jet: &Jet3, x: &[f64], y: &[f64], u: f64, s: f64) -> DMatrix<f64> {
    let n = x.len();
    let phi = jet.value();
    let phi_s = jet.partial(0, 1);
    let phi_ss = jet.partial(0, 2);
    let e = phi - s * phi_s;
    let c_delta = phi * e;
    let c_xx = phi_s * phi_s + phi * phi_ss;
    let c_yy = s * s * phi * phi_ss - s * e * phi_s;
    let c_xy = e * phi_s - s * phi * phi_ss;
    DMatrix::from_fn(n, n, |i, j| {
        let (i, j) = (i.min(j), i.max(j));
        let yi = y[i] / u;
        let yj = y[j] / u;
        let mut v = c_xx * x[i] * x[j] + c_yy * yi * yj + c_xy * (x[i] * yj + x[j] * yi);
        if i == j {
            v += c_delta;
        }
        v
    })
}

/// A point `(x, y)` in `R^n` with `|x| = r`, `|y| = 1` and `⟨x, y⟩ = s`.
pub fn point_from_rs(n: usize, r: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[0] = r;
    let c = (s / r).clamp(-1.0, 1.0);
    y[0] = c;
    if n > 1 {
        y[1] = (1.0 - c * c).max(0.0).sqrt();
    }
    (x, y)
}

/// Whether the assembled tensor at a point realizing `(r, s)` admits a
/// Cholesky factorization.
pub(crate) fn cholesky_ok(spec: &MetricSpec, r: f64, s: f64) -> Result<bool> {
    let jet = regular_jet(spec, r, s).or_else(|_| spec.profile_jet(r, s))?;
    let (x, y) = point_from_rs(spec.n, r, s);
    let m = matrix_from_jet(&jet, &x, &y, 1.0, s);
    Ok(m.cholesky().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RDomain;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_identity() {
        let spec = MetricSpec::general("1", 3, RDomain::new(0.1, 2.0).unwrap()).unwrap();
        assert_eq!(metric_determinant(&spec, 0.5, 0.2).unwrap(), 1.0);
        let m = assemble_metric_matrix(&spec, &[0.3, -0.2, 0.5], &[1.0, 2.0, -0.5]).unwrap();
        assert_eq!(m, DMatrix::identity(3, 3));
    }

    #[test]
    fn riemannian_profile_determinant() {
        let spec = MetricSpec::general("sqrt(1+s^2)", 2, RDomain::new(0.1, 2.0).unwrap()).unwrap();
        for (r, s) in [(0.5, 0.1), (1.5, -1.2)] {
            assert_relative_eq!(
                metric_determinant(&spec, r, s).unwrap(),
                1.0 + r * r,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn randers_without_beta_is_alpha() {
        let spec =
            MetricSpec::randers_str("1", "1", "0", 2, RDomain::new(0.1, 2.0).unwrap()).unwrap();
        let m = assemble_metric_matrix(&spec, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!((m - expect).abs().max() < 1e-15);
    }

    #[test]
    fn matrix_is_symmetric() {
        let spec = MetricSpec::general(
            "(sqrt(1-r^2+s^2)+s)/(1-r^2)",
            4,
            RDomain::new(0.1, 0.9).unwrap(),
        )
        .unwrap();
        let m =
            assemble_metric_matrix(&spec, &[0.2, 0.1, -0.3, 0.4], &[1.0, -2.0, 0.5, 0.3]).unwrap();
        assert_eq!(&m - m.transpose(), DMatrix::zeros(4, 4));
    }

    #[test]
    fn point_from_rs_realizes_coordinates() {
        let (x, y) = point_from_rs(3, 0.7, -0.4);
        let (r, u, s) = polar(&x, &y).unwrap();
        assert_relative_eq!(r, 0.7);
        assert_relative_eq!(u, 1.0);
        assert_relative_eq!(s, -0.4, epsilon = 1e-15);
    }
}
