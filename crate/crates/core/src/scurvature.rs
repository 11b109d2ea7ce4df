//! Reduced S-curvature `S/u` and the isotropy verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{phi_jet, spray_from_jet, MetricSpec};
use crate::grid::s_grid;
use crate::quadrature::QuadratureRule;
use crate::volume::{density_jet, VolumeSpec};

/// `S/u = (n+1)P + (r² − s²)Q_s + 2sQ + f(r)s`.
pub fn reduced_s(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    r: f64,
    s: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let f = density_jet(vol, spec, r, rule)?.f_coefficient(r);
    reduced_s_with_f(spec, r, s, f)
}

/// [`reduced_s`] with the volume coefficient `f(r)` already known.
pub fn reduced_s_with_f(spec: &MetricSpec, r: f64, s: f64, f: f64) -> Result<f64> {
    let jet = phi_jet(spec, r, s)?;
    let v = spray_from_jet(&jet, r, s)?;
    let n1 = (spec.n + 1) as f64;
    Ok(n1 * v.p + (r * r - s * s) * v.q_s + 2.0 * s * v.q + f * s)
}

/// Statistics of `c(r, ·)` at one radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusStats {
    pub r: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// `f(r)` used for every point at this radius.
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropyReport {
    pub r_grid: Vec<f64>,
    pub s_grid: Vec<Vec<f64>>,
    /// `c = (S/u) / ((n+1)φ)` at each grid point.
    pub c_values: Vec<Vec<f64>>,
    pub per_radius: Vec<RadiusStats>,
    pub pass: bool,
    pub tolerance: f64,
    pub max_spread: f64,
    pub worst_radius: f64,
}

impl IsotropyReport {
    /// The per-radius mean of `c`; meaningful as `c(r)` when the verdict passes.
    pub fn c_of_r(&self) -> Vec<(f64, f64)> {
        self.per_radius.iter().map(|p| (p.r, p.mean)).collect()
    }
}

/// Default spread tolerance `1e-7 (1 + max|c|)`.
pub fn default_isotropy_tolerance(max_abs_c: f64) -> f64 {
    1e-7 * (1.0 + max_abs_c)
}

/// Evaluates `c(r, s)` on the grid and decides whether it is independent of
/// `s` at every radius. `tolerance = None` selects the scale-aware default.
pub fn isotropy_profile(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    radii: &[f64],
    s_count: usize,
    tolerance: Option<f64>,
    rule: &QuadratureRule,
) -> Result<IsotropyReport> {
    let n1 = (spec.n + 1) as f64;
    let rows: Vec<(Vec<f64>, Vec<f64>, f64)> = radii
        .par_iter()
        .map(|&r| {
            let f = density_jet(vol, spec, r, rule)?.f_coefficient(r);
            let ss = s_grid(r, s_count);
            let cs = ss
                .iter()
                .map(|&s| {
                    let phi = phi_jet(spec, r, s)?.value();
                    Ok(reduced_s_with_f(spec, r, s, f)? / (n1 * phi))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((ss, cs, f))
        })
        .collect::<Result<_>>()?;

    let mut per_radius = Vec::with_capacity(rows.len());
    let mut max_abs_c: f64 = 0.0;
    for (&r, (_, cs, f)) in radii.iter().zip(&rows) {
        let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        max_abs_c = max_abs_c.max(min.abs()).max(max.abs());
        per_radius.push(RadiusStats {
            r,
            mean,
            min,
            max,
            spread: max - min,
            f: *f,
        });
    }
    let tolerance = tolerance.unwrap_or_else(|| default_isotropy_tolerance(max_abs_c));
    let (max_spread, worst_radius) = per_radius.iter().map(|p| (p.spread, p.r)).fold(
        (0.0, radii.first().copied().unwrap_or(0.0)),
        |a, b| {
            if b.0 > a.0 || b.0.is_nan() {
                b
            } else {
                a
            }
        },
    );
    let pass = per_radius.iter().all(|p| p.spread <= tolerance);
    let (s_grid, c_values) = rows.into_iter().map(|(s, c, _)| (s, c)).unzip();
    Ok(IsotropyReport {
        r_grid: radii.to_vec(),
        s_grid,
        c_values,
        per_radius,
        pass,
        tolerance,
        max_spread,
        worst_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, ScalarFunction, Var};
    use crate::geometry::BerwaldProfile;
    use crate::grid::{r_grid, RDomain};
    use approx::assert_relative_eq;

    const FUNK: &str = "(sqrt(1-r^2+s^2)+s)/(1-r^2)";

    #[test]
    fn euclidean_constant_volume_is_flat() {
        let spec = MetricSpec::general("1", 3, RDomain::new(0.1, 1.0).unwrap()).unwrap();
        let rule = QuadratureRule::default();
        assert_eq!(
            reduced_s(&spec, &VolumeSpec::Constant, 0.5, 0.3, &rule).unwrap(),
            0.0
        );
        let rep = isotropy_profile(
            &spec,
            &VolumeSpec::Constant,
            &[0.2, 0.5, 0.9],
            7,
            None,
            &rule,
        )
        .unwrap();
        assert!(rep.pass);
        assert!(rep.per_radius.iter().all(|p| p.mean == 0.0));
    }

    #[test]
    fn inverse_radius_family_cancels() {
        let p = BerwaldProfile::new(
            ScalarFunction::parse("0").unwrap(),
            parse_expression("1", &[Var::W]).unwrap(),
            1.0,
        )
        .unwrap();
        let spec = MetricSpec::berwald_family(p, 3, RDomain::new(0.2, 1.5).unwrap()).unwrap();
        let rule = QuadratureRule::default();
        for (r, s) in [(0.5, 0.2), (1.0, -0.7)] {
            let v = reduced_s(&spec, &VolumeSpec::BusemannHausdorff, r, s, &rule).unwrap();
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn funk_point_value() {
        let spec = MetricSpec::general(FUNK, 2, RDomain::new(0.1, 0.9).unwrap()).unwrap();
        let rule = QuadratureRule::default();
        let v = reduced_s(&spec, &VolumeSpec::BusemannHausdorff, 0.5, 0.2, &rule).unwrap();
        let phi = phi_jet(&spec, 0.5, 0.2).unwrap().value();
        assert_relative_eq!(v, 3.0 * 0.5 * phi, max_relative = 1e-8);
    }

    #[test]
    fn randers_unit_triple_isotropic() {
        let dom = RDomain::new(0.2, 1.2).unwrap();
        let spec = MetricSpec::randers_str("1", "1", "1", 3, dom).unwrap();
        let rule = QuadratureRule::default();
        let rep = isotropy_profile(
            &spec,
            &VolumeSpec::BusemannHausdorff,
            &r_grid(dom, 6),
            9,
            None,
            &rule,
        )
        .unwrap();
        assert!(rep.pass, "spread {}", rep.max_spread);
        for p in &rep.per_radius {
            assert_relative_eq!(p.mean, 0.5 / (1.0 + p.r * p.r), max_relative = 1e-7);
        }
        let rep = isotropy_profile(
            &spec,
            &VolumeSpec::BusemannHausdorff,
            &[1.0],
            5,
            None,
            &rule,
        )
        .unwrap();
        assert_relative_eq!(rep.per_radius[0].mean, 0.25, max_relative = 1e-7);
    }

    #[test]
    fn riemannian_non_example_fails() {
        let dom = RDomain::new(0.2, 0.9).unwrap();
        let spec = MetricSpec::randers_str("1", "1", "0.5", 2, dom).unwrap();
        let rule = QuadratureRule::default();
        let rep = isotropy_profile(
            &spec,
            &VolumeSpec::BusemannHausdorff,
            &r_grid(dom, 4),
            9,
            None,
            &rule,
        )
        .unwrap();
        assert!(!rep.pass);
        assert!(rep.max_spread > 1e3 * rep.tolerance);
    }
}
