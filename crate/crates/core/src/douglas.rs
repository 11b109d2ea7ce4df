//! Douglas test: is `Q(r, ·)` an even quadratic `c₁(r) + c₂(r)s²`?

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{spray_values, MetricSpec};
use crate::grid::s_grid;

/// Least-squares fit of `Q` at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QFit {
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    /// Sup-norm of `Q − (c1 + c2 s²)` over the grid.
    pub max_residual: f64,
    /// Sup-norm of the odd part `(Q(s) − Q(−s))/2`.
    pub odd_residual: f64,
    pub tolerance: f64,
}

impl QFit {
    pub fn passes(&self) -> bool {
        self.max_residual <= self.tolerance && self.odd_residual <= self.tolerance
    }
}

/// `1e-8 (1 + |c1| + |c2| r²)`.
pub fn default_douglas_tolerance(r: f64, c1: f64, c2: f64) -> f64 {
    1e-8 * (1.0 + c1.abs() + c2.abs() * r * r)
}

/// Fits `Q(r, s) ≈ c1 + c2 s²` over a grid symmetric about zero.
pub fn fit_q(spec: &MetricSpec, r: f64, s: &[f64]) -> Result<QFit> {
    if s.len() < 5 {
        return Err(Error::invalid(format!(
            "fit_q needs at least 5 s values, got {}",
            s.len()
        )));
    }
    let m = s.len();
    for i in 0..m {
        if (s[i] + s[m - 1 - i]).abs() > 1e-12 * r.max(1.0) {
            return Err(Error::invalid("fit_q needs an s grid symmetric about 0"));
        }
    }
    let q = s
        .iter()
        .map(|&si| Ok(spray_values(spec, r, si)?.q))
        .collect::<Result<Vec<f64>>>()?;

    // Normal equations for the basis {1, s²}.
    let s0 = m as f64;
    let (mut s2, mut s4, mut b0, mut b2) = (0.0, 0.0, 0.0, 0.0);
    for (&si, &qi) in s.iter().zip(&q) {
        let w = si * si;
        s2 += w;
        s4 += w * w;
        b0 += qi;
        b2 += qi * w;
    }
    let det = s0 * s4 - s2 * s2;
    if det.abs() <= f64::EPSILON * s0 * s4 {
        return Err(Error::invalid("degenerate s grid for the Douglas fit"));
    }
    let c1 = (s4 * b0 - s2 * b2) / det;
    let c2 = (s0 * b2 - s2 * b0) / det;
    let max_residual = s
        .iter()
        .zip(&q)
        .map(|(&si, &qi)| (qi - c1 - c2 * si * si).abs())
        .fold(0.0, f64::max);
    let odd_residual = (0..m)
        .map(|i| 0.5 * (q[i] - q[m - 1 - i]).abs())
        .fold(0.0, f64::max);
    Ok(QFit {
        r,
        c1,
        c2,
        max_residual,
        odd_residual,
        tolerance: default_douglas_tolerance(r, c1, c2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DouglasFit {
    pub per_radius: Vec<QFit>,
    pub pass: bool,
    /// Global override, if one was given; otherwise each radius carries its
    /// own default tolerance.
    pub tolerance: Option<f64>,
    pub max_residual: f64,
    pub worst_radius: f64,
}

/// Runs [`fit_q`] at every radius and aggregates the verdict.
pub fn douglas_verdict(
    spec: &MetricSpec,
    radii: &[f64],
    s_count: usize,
    tolerance: Option<f64>,
) -> Result<DouglasFit> {
    let per_radius = radii
        .par_iter()
        .map(|&r| {
            let mut fit = fit_q(spec, r, &s_grid(r, s_count))?;
            if let Some(t) = tolerance {
                fit.tolerance = t;
            }
            Ok(fit)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = per_radius.iter().all(QFit::passes);
    let (max_residual, worst_radius) = per_radius
        .iter()
        .map(|f| (f.max_residual.max(f.odd_residual), f.r))
        .fold((0.0, radii.first().copied().unwrap_or(0.0)), |a, b| {
            if b.0 > a.0 {
                b
            } else {
                a
            }
        });
    Ok(DouglasFit {
        per_radius,
        pass,
        tolerance,
        max_residual,
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

    #[test]
    fn riemannian_profile_fit() {
        let spec = MetricSpec::general("sqrt(1+s^2)", 3, RDomain::new(0.1, 1.0).unwrap()).unwrap();
        let fit = fit_q(&spec, 0.5, &s_grid(0.5, 11)).unwrap();
        assert_relative_eq!(fit.c1, 0.4, epsilon = 1e-12);
        assert!(fit.c2.abs() < 1e-12);
        assert!(fit.max_residual <= 1e-12);
        assert!(fit.passes());
    }

    #[test]
    fn family_recovers_c2() {
        let p = BerwaldProfile::new(
            ScalarFunction::parse("0.3").unwrap(),
            parse_expression("1", &[Var::W]).unwrap(),
            1.0,
        )
        .unwrap();
        let dom = RDomain::new(0.8, 1.2).unwrap();
        let spec = MetricSpec::berwald_family(p, 3, dom).unwrap();
        let rep = douglas_verdict(&spec, &r_grid(dom, 5), 11, None).unwrap();
        assert!(rep.pass, "{:?}", rep.max_residual);
        for f in &rep.per_radius {
            assert_relative_eq!(f.c1, 0.5 / (f.r * f.r), max_relative = 1e-8);
            assert_relative_eq!(f.c2, 0.3, max_relative = 1e-8);
        }
    }

    #[test]
    fn cubic_perturbation_fails() {
        let dom = RDomain::new(0.05, 0.3).unwrap();
        let spec = MetricSpec::general("sqrt(1+s^2) + (r/20)*s^3", 2, dom).unwrap();
        let rep = douglas_verdict(&spec, &r_grid(dom, 5), 11, None).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_residual > 1e-3, "{}", rep.max_residual);
    }

    #[test]
    fn euclidean_and_randers_pass() {
        let dom = RDomain::new(0.2, 0.9).unwrap();
        let spec = MetricSpec::general("1", 2, dom).unwrap();
        let rep = douglas_verdict(&spec, &r_grid(dom, 4), 9, None).unwrap();
        assert!(rep.pass);
        assert!(rep.per_radius.iter().all(|f| f.c1 == 0.0 && f.c2 == 0.0));
        let spec = MetricSpec::randers_str("1+r^2", "0.5", "0.3*r", 3, dom).unwrap();
        assert!(
            douglas_verdict(&spec, &r_grid(dom, 6), 11, None)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn rejects_short_or_asymmetric_grids() {
        let spec = MetricSpec::general("1", 2, RDomain::new(0.1, 1.0).unwrap()).unwrap();
        assert!(fit_q(&spec, 0.5, &[-0.2, 0.0, 0.2]).is_err());
        assert!(fit_q(&spec, 0.5, &[-0.4, -0.2, 0.0, 0.1, 0.4]).is_err());
    }
}
