//! Pointwise geometry of `F = u·φ(r, s)`: profile jets, spray coefficients,
//! the metric tensor and regularity.
//!
//! Throughout, `u = |y|`, `r = |x|` and `s = ⟨x, y⟩/|y|`, so `|s| <= r`.

mod berwald;
mod regularity;
mod spray;
mod tensor;

pub use berwald::{Antiderivatives, BerwaldProfile};
pub use regularity::{regularity_scan, PointFlags, RegularityReport};
pub use spray::{spray_from_jet, spray_values, SprayValues};
pub(crate) use tensor::determinant_from_jet;
pub use tensor::{assemble_metric_matrix, metric_determinant, point_from_rs};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, ExpressionTree, Jet3, ScalarFunction, Var};
use crate::grid::RDomain;

/// The three ways a spherically symmetric profile can be supplied.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    /// Any closed-form `φ(r, s)`.
    GeneralPhi(ExpressionTree),
    /// `φ = sqrt(f + g s²) + h s`.
    Randers {
        f: ScalarFunction,
        g: ScalarFunction,
        h: ScalarFunction,
    },
    /// The Berwald solution family built from `c₂(r)` and `χ(w)`.
    BerwaldFamily(Arc<BerwaldProfile>),
}

/// A spherically symmetric Finsler metric on an annulus of `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub n: usize,
    pub domain: RDomain,
}

/// Default lower radius used when only an upper bound is known.
pub const DEFAULT_R_MIN: f64 = 1e-3;

impl MetricSpec {
    pub fn new(kind: MetricKind, n: usize, domain: RDomain) -> Result<Self> {
        let spec = Self::new_unchecked(kind, n, domain)?;
        spec.check_randers_admissibility(64)?;
        Ok(spec)
    }

    /// Skips the Randers admissibility sweep, so that inadmissible triples
    /// can still be handed to [`regularity_scan`] for diagnosis.
    pub fn new_unchecked(kind: MetricKind, n: usize, domain: RDomain) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {n}")));
        }
        Ok(MetricSpec { kind, n, domain })
    }

    /// General profile from a formula in `r` and `s`.
    pub fn general(phi: &str, n: usize, domain: RDomain) -> Result<Self> {
        let tree = parse_expression(phi, &[Var::R, Var::S])?;
        Self::new(MetricKind::GeneralPhi(tree), n, domain)
    }

    pub fn randers(
        f: ScalarFunction,
        g: ScalarFunction,
        h: ScalarFunction,
        n: usize,
        domain: RDomain,
    ) -> Result<Self> {
        Self::new(MetricKind::Randers { f, g, h }, n, domain)
    }

    /// Randers metric from three formulas in `r`.
    pub fn randers_str(f: &str, g: &str, h: &str, n: usize, domain: RDomain) -> Result<Self> {
        Self::randers(
            ScalarFunction::parse(f)?,
            ScalarFunction::parse(g)?,
            ScalarFunction::parse(h)?,
            n,
            domain,
        )
    }

    pub fn berwald_family(profile: BerwaldProfile, n: usize, domain: RDomain) -> Result<Self> {
        Self::new(MetricKind::BerwaldFamily(Arc::new(profile)), n, domain)
    }

    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        Self::new(self.kind.clone(), n, self.domain)
    }

    /// The Randers triple, when this is a Randers metric.
    pub fn randers_triple(&self) -> Option<(&ScalarFunction, &ScalarFunction, &ScalarFunction)> {
        match &self.kind {
            MetricKind::Randers { f, g, h } => Some((f, g, h)),
            _ => None,
        }
    }

    /// `f > 0` and `f + r²(g − h²) > 0` at `samples` radii of the domain.
    pub fn check_randers_admissibility(&self, samples: usize) -> Result<()> {
        let Some((f, g, h)) = self.randers_triple() else {
            return Ok(());
        };
        for r in crate::grid::r_grid(self.domain, samples.max(2)) {
            let (fv, gv, hv) = (f.value(r)?, g.value(r)?, h.value(r)?);
            if fv <= 0.0 {
                return Err(Error::Admissibility {
                    r,
                    detail: format!("f = {fv} must be positive"),
                });
            }
            let m = fv + r * r * (gv - hv * hv);
            if m <= 0.0 {
                return Err(Error::Admissibility {
                    r,
                    detail: format!("f + r^2 (g - h^2) = {m} must be positive"),
                });
            }
        }
        Ok(())
    }

    /// Jet of the profile without domain or regularity checks.
    pub fn profile_jet(&self, r: f64, s: f64) -> Result<Jet3> {
        if r <= 0.0 {
            return Err(Error::domain("r", r));
        }
        let jet = match &self.kind {
            MetricKind::GeneralPhi(tree) => tree.eval_jet(r, s)?,
            MetricKind::Randers { f, g, h } => {
                let sj = Jet3::var_s(s);
                let alpha2 = f.jet(r)? + g.jet(r)? * sj * sj;
                alpha2.sqrt()? + h.jet(r)? * sj
            }
            MetricKind::BerwaldFamily(p) => p.phi_jet(r, s)?,
        };
        if !jet.is_finite() {
            return Err(Error::domain("phi", jet.value()));
        }
        Ok(jet)
    }

    /// `F(x, y) = |y| φ(|x|, ⟨x,y⟩/|y|)`.
    pub fn finsler_norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (r, u, s) = polar(x, y)?;
        Ok(u * self.profile_jet(r, s)?.value())
    }
}

/// `(r, u, s)` of a tangent vector.
pub fn polar(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::invalid("x and y must have the same dimension"));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if u == 0.0 {
        return Err(Error::invalid("y must be non-zero"));
    }
    let s = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / u;
    Ok((r, u, s.clamp(-r, r)))
}

/// The three positivity margins `φ`, `φ − sφ_s`, `φ − sφ_s + (r² − s²)φ_ss`.
pub fn positivity_margins(jet: &Jet3, r: f64, s: f64) -> [f64; 3] {
    let phi = jet.value();
    let e = phi - s * jet.partial(0, 1);
    let d = e + (r * r - s * s) * jet.partial(0, 2);
    [phi, e, d]
}

pub(crate) const CONDITION_NAMES: [&str; 3] =
    ["phi", "phi - s phi_s", "phi - s phi_s + (r^2 - s^2) phi_ss"];

fn check_point(spec: &MetricSpec, r: f64, s: f64) -> Result<()> {
    if !spec.domain.contains(r) {
        return Err(Error::domain("r outside metric domain", r));
    }
    if s.abs() > r * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("|s| = {} exceeds r = {r}", s.abs())));
    }
    Ok(())
}

fn check_regular(jet: &Jet3, r: f64, s: f64) -> Result<()> {
    for (k, m) in positivity_margins(jet, r, s).into_iter().enumerate() {
        if !(m > 0.0) {
            return Err(Error::Regularity {
                r,
                s,
                condition: CONDITION_NAMES[k],
                value: m,
            });
        }
    }
    Ok(())
}

/// Jet of `φ` at `(r, s)`, checked against the domain and the three
/// positivity conditions.
pub fn phi_jet(spec: &MetricSpec, r: f64, s: f64) -> Result<Jet3> {
    check_point(spec, r, s)?;
    let jet = spec.profile_jet(r, s)?;
    check_regular(&jet, r, s)?;
    Ok(jet)
}

/// Like [`phi_jet`] but without the domain check; used by the finite
/// difference stencils and the geodesic oracle, which may step just outside
/// the declared interval.
pub fn regular_jet(spec: &MetricSpec, r: f64, s: f64) -> Result<Jet3> {
    let jet = spec.profile_jet(r, s)?;
    check_regular(&jet, r, s)?;
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dom() -> RDomain {
        RDomain::new(0.1, 1.5).unwrap()
    }

    #[test]
    fn euclidean_profile() {
        let spec = MetricSpec::general("1", 3, dom()).unwrap();
        let j = phi_jet(&spec, 0.7, 0.2).unwrap();
        assert_eq!(j.value(), 1.0);
        assert!(j.partials()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn randers_profile_value() {
        let spec =
            MetricSpec::randers_str("1", "1", "1", 3, RDomain::new(0.1, 0.9).unwrap()).unwrap();
        let j = phi_jet(&spec, 0.5, 0.3).unwrap();
        assert_relative_eq!(j.value(), 1.09f64.sqrt() + 0.3, epsilon = 1e-15);
        assert!((j.value() - 1.344031).abs() < 1e-6);
    }

    #[test]
    fn berwald_profile_is_inverse_radius() {
        let p = BerwaldProfile::new(
            ScalarFunction::parse("0").unwrap(),
            parse_expression("1", &[Var::W]).unwrap(),
            1.0,
        )
        .unwrap();
        let spec = MetricSpec::berwald_family(p, 3, dom()).unwrap();
        for (r, s) in [(0.4, 0.1), (1.2, -1.0)] {
            assert_relative_eq!(
                phi_jet(&spec, r, s).unwrap().value(),
                1.0 / r,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn regularity_and_domain_errors() {
        let spec = MetricSpec::general("s/r^2", 2, dom()).unwrap();
        assert!(matches!(
            phi_jet(&spec, 0.5, -0.2),
            Err(Error::Regularity { .. })
        ));
        let spec = MetricSpec::general("1", 2, dom()).unwrap();
        assert!(phi_jet(&spec, 2.0, 0.0).is_err());
        assert!(phi_jet(&spec, 0.5, 0.6).is_err());
    }

    #[test]
    fn randers_admissibility_is_enforced() {
        let err = MetricSpec::randers_str("1", "0", "2", 2, RDomain::new(0.1, 0.9).unwrap());
        assert!(matches!(err, Err(Error::Admissibility { .. })));
        assert!(MetricSpec::general("1", 1, dom()).is_err());
    }
}
