//! Profile of the Berwald solution family
//! `φ = χ(w)·sqrt(g(r) + J(r) s²)·exp(−I₂(r))`, `w = s²/(g + J s²)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::expr::{ExpressionTree, Jet3, ScalarFunction, Var};
use crate::quadrature::{GaussLegendre, QuadratureRule};

const CACHE_LIMIT: usize = 1 << 16;

/// Antiderivatives anchored at `r0`:
/// `log_g = ∫(2/ρ − 4ρ³c₂)`, `j = ∫4ρc₂g`, `i2 = ∫(2/ρ − 2ρ³c₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Antiderivatives {
    pub log_g: f64,
    pub j: f64,
    pub i2: f64,
}

pub struct BerwaldProfile {
    c2: ScalarFunction,
    chi: ExpressionTree,
    r0: f64,
    rule: QuadratureRule,
    panel: GaussLegendre,
    cache: RwLock<HashMap<u64, Antiderivatives>>,
}

impl Clone for BerwaldProfile {
    fn clone(&self) -> Self {
        BerwaldProfile {
            c2: self.c2.clone(),
            chi: self.chi.clone(),
            r0: self.r0,
            rule: self.rule.clone(),
            panel: self.panel.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for BerwaldProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BerwaldProfile")
            .field("c2", &self.c2.description())
            .field("chi", &self.chi.to_string())
            .field("r0", &self.r0)
            .finish()
    }
}

impl PartialEq for BerwaldProfile {
    fn eq(&self, other: &Self) -> bool {
        self.c2 == other.c2 && self.chi == other.chi && self.r0 == other.r0
    }
}

impl BerwaldProfile {
    pub fn new(c2: ScalarFunction, chi: ExpressionTree, r0: f64) -> Result<Self> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::invalid(format!(
                "family anchor r0 must be positive, got {r0}"
            )));
        }
        if chi.variables().iter().any(|v| *v != Var::W) {
            return Err(Error::invalid("chi may only depend on w"));
        }
        Ok(BerwaldProfile {
            c2,
            chi,
            r0,
            rule: QuadratureRule::new(32, true).with_tolerance(1e-14),
            panel: GaussLegendre::new(8),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn c2(&self) -> &ScalarFunction {
        &self.c2
    }

    pub fn chi(&self) -> &ExpressionTree {
        &self.chi
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    fn log_g_integrand(&self, rho: f64) -> Result<f64> {
        Ok(2.0 / rho - 4.0 * rho.powi(3) * self.c2.value(rho)?)
    }

    /// Values of the three antiderivatives at `r`, cached per radius.
    pub fn antiderivatives(&self, r: f64) -> Result<Antiderivatives> {
        if r <= 0.0 {
            return Err(Error::domain("family antiderivative", r));
        }
        let key = r.to_bits();
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*hit);
        }
        let value = self.compute(r)?;
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, value);
        Ok(value)
    }

    fn compute(&self, r: f64) -> Result<Antiderivatives> {
        let r0 = self.r0;
        if r == r0 {
            return Ok(Antiderivatives {
                log_g: 0.0,
                j: 0.0,
                i2: 0.0,
            });
        }
        let [log_g, i2] = self.rule.integrate_many(r0, r, r, |rho| {
            let c2 = self.c2.value(rho)?;
            Ok([
                2.0 / rho - 4.0 * rho.powi(3) * c2,
                2.0 / rho - 2.0 * rho.powi(3) * c2,
            ])
        })?;

        // J needs g(ρ) = exp(log_g(ρ)) at every outer node: accumulate log_g
        // panel by panel along the sorted outer nodes.
        let mut prev: Option<f64> = None;
        let mut gap = f64::INFINITY;
        let mut j = 0.0;
        for level in self.rule.levels() {
            let mut acc = 0.0;
            let mut at = r0;
            let mut log_g_at = 0.0;
            for (x, w) in level.mapped(r0, r) {
                log_g_at += self
                    .panel
                    .try_integrate(at, x, |rho| self.log_g_integrand(rho))?;
                at = x;
                let c2 = self.c2.value(x)?;
                acc += w * 4.0 * x * c2 * log_g_at.exp();
            }
            j = acc;
            if let Some(p) = prev {
                gap = (acc - p).abs() / p.abs().max(1.0);
                if gap <= self.rule.tolerance() {
                    break;
                }
            }
            prev = Some(acc);
        }
        if !gap.is_finite() || gap > 1e-12 {
            return Err(Error::Quadrature {
                r,
                detail: format!("family J(r) did not converge (gap {gap:e})"),
            });
        }
        Ok(Antiderivatives { log_g, j, i2 })
    }

    /// `[log_g, J, I₂]` as r-only jets, derivatives from the integrands.
    pub fn antiderivative_jets(&self, r: f64) -> Result<[Jet3; 3]> {
        let vals = self.antiderivatives(r)?;
        let rj = Jet3::var_r(r);
        let c2 = self.c2.jet(r)?;
        let two_over_r = rj.recip()? * 2.0;
        let r3 = rj * rj * rj;
        let d_log_g = two_over_r - r3 * c2 * 4.0;
        let d_i2 = two_over_r - r3 * c2 * 2.0;
        let log_g = integrate_jet(vals.log_g, &d_log_g);
        let g = log_g.exp();
        let d_j = rj * c2 * g * 4.0;
        let j = integrate_jet(vals.j, &d_j);
        let i2 = integrate_jet(vals.i2, &d_i2);
        Ok([log_g, j, i2])
    }

    /// Jet of `φ` at `(r, s)`.
    pub fn phi_jet(&self, r: f64, s: f64) -> Result<Jet3> {
        let [log_g, j, i2] = self.antiderivative_jets(r)?;
        let g = log_g.exp();
        let sj = Jet3::var_s(s);
        let q = g + j * sj * sj;
        if q.value() <= 0.0 {
            return Err(Error::domain("g + J s^2", q.value()));
        }
        let w = (sj * sj).try_div(&q)?;
        let chi = self.chi.eval_jet_with(|v| match v {
            Var::W => w,
            _ => Jet3::constant(f64::NAN),
        })?;
        Ok(chi * q.sqrt()? * (-i2).exp())
    }
}

/// r-only jet of `∫ f` given its value and the jet of the integrand `f`.
fn integrate_jet(value: f64, integrand: &Jet3) -> Jet3 {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = value;
    for k in 0..3 {
        t[k + 1][0] = integrand.taylor(k, 0) / (k + 1) as f64;
    }
    Jet3::from_taylor(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use approx::assert_relative_eq;

    fn profile(c2: &str, chi: &str, r0: f64) -> BerwaldProfile {
        BerwaldProfile::new(
            ScalarFunction::parse(c2).unwrap(),
            parse_expression(chi, &[Var::W]).unwrap(),
            r0,
        )
        .unwrap()
    }

    #[test]
    fn zero_c2_gives_inverse_radius() {
        let p = profile("0", "1", 1.0);
        for (r, s) in [(0.5, 0.1), (1.3, -0.7), (2.0, 1.9)] {
            let a = p.antiderivatives(r).unwrap();
            assert_relative_eq!(a.log_g, 2.0 * f64::ln(r), epsilon = 1e-13);
            assert_eq!(a.j, 0.0);
            let jet = p.phi_jet(r, s).unwrap();
            assert_relative_eq!(jet.value(), 1.0 / r, max_relative = 1e-13);
            assert_relative_eq!(jet.partial(1, 0), -1.0 / (r * r), max_relative = 1e-12);
            assert_relative_eq!(jet.partial(2, 0), 2.0 / r.powi(3), max_relative = 1e-12);
            assert!(jet.partial(0, 1).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_c2_matches_closed_forms() {
        // c2 = k: log g = 2 ln(r/r0) − k(r⁴ − r0⁴), I₂ = 2 ln(r/r0) − k(r⁴ − r0⁴)/2.
        let k = 0.1;
        let p = profile("0.1", "1", 1.0);
        let r: f64 = 1.15;
        let a = p.antiderivatives(r).unwrap();
        assert_relative_eq!(
            a.log_g,
            2.0 * r.ln() - k * (r.powi(4) - 1.0),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            a.i2,
            2.0 * r.ln() - 0.5 * k * (r.powi(4) - 1.0),
            epsilon = 1e-14
        );
        // J by an independent composite Simpson rule on the closed-form integrand.
        let n = 2000;
        let h = (r - 1.0) / n as f64;
        let integrand = |x: f64| 4.0 * x * k * (x * x * (-k * (x.powi(4) - 1.0)).exp());
        let mut acc = integrand(1.0) + integrand(r);
        for i in 1..n {
            let x = 1.0 + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(x);
        }
        assert_relative_eq!(a.j, acc * h / 3.0, max_relative = 1e-11);
    }

    #[test]
    fn below_anchor_is_supported() {
        let p = profile("0.1", "1 + w/4", 1.0);
        let jet = p.phi_jet(0.8, 0.3).unwrap();
        assert!(jet.is_finite() && jet.value() > 0.0);
    }
}
