//! Solution families: the Berwald family built from `(c₂, χ)`, the PDE and
//! system residuals it must satisfy, and the ODEs that produce isotropic
//! Randers examples for the BH and HT volumes.

use serde::Serialize;

use crate::douglas::{douglas_verdict, DouglasFit};
use crate::error::{Error, Result};
use crate::expr::{ExpressionTree, HermiteTable, Jet3, ScalarFunction};
use crate::geometry::{regularity_scan, BerwaldProfile, MetricSpec, RegularityReport};
use crate::grid::{r_grid, s_grid, RDomain};
use crate::quadrature::GaussLegendre;

/// Largest family PDE residual accepted on the validation grid.
pub const FAMILY_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyDiagnostics {
    pub pde_max_residual: f64,
    pub douglas: DouglasFit,
    pub regularity: RegularityReport,
}

#[derive(Clone, Debug)]
pub struct FamilyBuildResult {
    pub spec: MetricSpec,
    pub diagnostics: FamilyDiagnostics,
}

/// Builds `φ = χ(w) sqrt(g + J s²) e^{−I₂}` and certifies it on a
/// validation grid.
pub fn build_berwald_family(
    c2: ScalarFunction,
    chi: ExpressionTree,
    r0: f64,
    domain: RDomain,
    n: usize,
) -> Result<FamilyBuildResult> {
    if !domain.contains(r0) {
        return Err(Error::domain("r0 outside the family domain", r0));
    }
    let profile = BerwaldProfile::new(c2.clone(), chi, r0)?;
    let spec = MetricSpec::berwald_family(profile, n, domain)?;

    let regularity = regularity_scan(&spec, 17, 17);
    if !regularity.pass {
        let (r, s) = regularity.worst_at;
        return Err(Error::Regularity {
            r,
            s,
            condition: regularity.worst_condition,
            value: regularity.worst_margin,
        });
    }
    let radii = r_grid(domain, 9);
    let mut pde_max_residual: f64 = 0.0;
    for &r in &radii {
        for s in s_grid(r, 11) {
            let res = lemma33_residual(&spec, &c2, r, s)?;
            if !(res.abs() <= FAMILY_RESIDUAL_TOLERANCE) {
                return Err(Error::Quadrature {
                    r,
                    detail: format!("family PDE residual {res:e} at s={s}"),
                });
            }
            pde_max_residual = pde_max_residual.max(res.abs());
        }
    }
    let douglas = douglas_verdict(&spec, &radii, 11, None)?;
    Ok(FamilyBuildResult {
        spec,
        diagnostics: FamilyDiagnostics {
            pde_max_residual,
            douglas,
            regularity,
        },
    })
}

fn checked_jet(spec: &MetricSpec, r: f64, s: f64) -> Result<Jet3> {
    if !spec.domain.contains(r) {
        return Err(Error::domain("r outside metric domain", r));
    }
    if s.abs() > r * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("|s| = {} exceeds r = {r}", s.abs())));
    }
    spec.profile_jet(r, s)
}

/// `φ_r + (s/r − 2rc₂(r² − s²)s)φ_s + (1/r − 2rc₂s²)φ`.
///
/// Regularity is not required, so degenerate fixtures can be tested.
pub fn lemma33_residual(spec: &MetricSpec, c2: &ScalarFunction, r: f64, s: f64) -> Result<f64> {
    let jet = checked_jet(spec, r, s)?;
    let k = c2.value(r)?;
    let phi = jet.value();
    Ok(jet.partial(1, 0)
        + (s / r - 2.0 * r * k * (r * r - s * s) * s) * jet.partial(0, 1)
        + (1.0 / r - 2.0 * r * k * s * s) * phi)
}

/// The two equations characterising Douglas metrics with isotropic
/// S-curvature, with `Q = c1 + c2 s²` and `P = cφ + b s`.
#[allow(clippy::too_many_arguments)]
pub fn system31_residual(
    spec: &MetricSpec,
    c1: &ScalarFunction,
    c2: &ScalarFunction,
    b: &ScalarFunction,
    c: &ScalarFunction,
    r: f64,
    s: f64,
) -> Result<(f64, f64)> {
    let jet = checked_jet(spec, r, s)?;
    let (c1, c2, b, c) = (c1.value(r)?, c2.value(r)?, b.value(r)?, c.value(r)?);
    let phi = jet.value();
    let phi_r = jet.partial(1, 0);
    let phi_s = jet.partial(0, 1);
    let phi_rs = jet.partial(1, 1);
    let phi_ss = jet.partial(0, 2);
    let q = c1 + c2 * s * s;
    let lead = r * (2.0 * (r * r - s * s) * q - 1.0);
    let res1 =
        lead * phi_s - s * phi_r + 2.0 * (b * r * s + r * s * q) * phi + 2.0 * r * c * phi * phi;
    let res2 = lead * phi_ss - s * phi_rs + phi_r + 2.0 * r * q * (phi - s * phi_s);
    Ok((res1, res2))
}

/// Residuals of the BH isotropy conditions for a Randers triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BhSystemResidual {
    pub res1: f64,
    pub res2: f64,
    /// `c = h(rf′ + 2f) / (4f(f + r²g))`.
    pub c: f64,
    /// The eliminated ODE with a `−2rfh²` term, evaluated as written.
    pub printed_ode_residual: f64,
    /// The same elimination redone, with `−2rfh³`.
    pub corrected_ode_residual: f64,
}

fn bh_admissible(f: f64, g: f64, h: f64, r: f64) -> Result<()> {
    if !(f > 0.0) {
        return Err(Error::domain("f", f));
    }
    let m = f + r * r * (g - h * h);
    if !(m > 0.0) {
        return Err(Error::domain("f + r^2 (g - h^2)", m));
    }
    Ok(())
}

pub fn bh_system_residual(
    f: &ScalarFunction,
    g: &ScalarFunction,
    h: &ScalarFunction,
    r: f64,
) -> Result<BhSystemResidual> {
    let [fv, df, ..] = f.derivatives(r)?;
    let [gv, dg, ..] = g.derivatives(r)?;
    let [hv, dh, ..] = h.derivatives(r)?;
    bh_admissible(fv, gv, hv, r)?;
    let m = fv + r * r * gv;
    let lhs1 = 0.5 * hv * (r * df + 2.0 * fv) / m;
    let c = lhs1 / (2.0 * fv);
    let res1 = lhs1 - 2.0 * c * fv;
    let res2 = dh / r - 0.5 * hv * (r * r * dg + 2.0 * df) / (r * m) - 2.0 * c * (gv - hv * hv);
    let common = r * r * fv * hv * dg
        + (2.0 * r * fv * hv + r * r * df * hv - 2.0 * r * r * fv * dh) * gv
        + 2.0 * fv * df * hv
        - 2.0 * fv * fv * dh
        - r * r * df * hv.powi(3);
    Ok(BhSystemResidual {
        res1,
        res2,
        c,
        printed_ode_residual: common - 2.0 * r * fv * hv * hv,
        corrected_ode_residual: common - 2.0 * r * fv * hv.powi(3),
    })
}

/// A tabulated solution of a scalar first-order ODE.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeSolution {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    /// Interpolation used between nodes (cubic Hermite).
    pub interpolation_order: usize,
    pub node_residuals: Vec<f64>,
    pub max_residual: f64,
}

impl OdeSolution {
    pub fn to_scalar(&self) -> Result<ScalarFunction> {
        Ok(ScalarFunction::Table(HermiteTable::new(
            self.r.clone(),
            self.values.clone(),
            self.derivatives.clone(),
        )?))
    }
}

/// Node layout containing `r0`, with every step at most `(b − a)/steps`.
fn ode_nodes(r0: f64, (a, b): (f64, f64), steps: usize) -> Result<(Vec<f64>, usize)> {
    if !(a < b) || !(a <= r0 && r0 <= b) {
        return Err(Error::invalid(format!(
            "need a <= r0 <= b, got r0 = {r0} and range [{a}, {b}]"
        )));
    }
    let hmax = (b - a) / steps.max(400) as f64;
    let left = ((r0 - a) / hmax).ceil() as usize;
    let right = ((b - r0) / hmax).ceil() as usize;
    let mut nodes = Vec::with_capacity(left + right + 1);
    for k in (1..=left).rev() {
        nodes.push(r0 - (r0 - a) * k as f64 / left as f64);
    }
    nodes.push(r0);
    for k in 1..=right {
        nodes.push(r0 + (b - r0) * k as f64 / right as f64);
    }
    Ok((nodes, left))
}

/// Classical RK4 for `y' = rhs(r, y)` outward from `nodes[start]`.
fn rk4_both_ways(
    nodes: &[f64],
    start: usize,
    y0: f64,
    rhs: &dyn Fn(f64, f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut y = vec![0.0; nodes.len()];
    y[start] = y0;
    let step = |r: f64, v: f64, h: f64| -> Result<f64> {
        let k1 = rhs(r, v)?;
        let k2 = rhs(r + 0.5 * h, v + 0.5 * h * k1)?;
        let k3 = rhs(r + 0.5 * h, v + 0.5 * h * k2)?;
        let k4 = rhs(r + h, v + h * k3)?;
        Ok(v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    };
    for i in start + 1..nodes.len() {
        y[i] = step(nodes[i - 1], y[i - 1], nodes[i] - nodes[i - 1])?;
    }
    for i in (0..start).rev() {
        y[i] = step(nodes[i + 1], y[i + 1], nodes[i] - nodes[i + 1])?;
    }
    Ok(y)
}

/// `g′` from the BH system for given `(f, h)`.
fn bh_g_prime(f: &ScalarFunction, h: &ScalarFunction, r: f64, g: f64) -> Result<f64> {
    let [fv, df, ..] = f.derivatives(r)?;
    let [hv, dh, ..] = h.derivatives(r)?;
    if hv.abs() < 1e-14 {
        return Err(Error::DegenerateInput(format!(
            "h vanishes at r={r}; every g solves the system"
        )));
    }
    if !(fv > 0.0) {
        return Err(Error::domain("f", fv));
    }
    let m = fv + r * r * (g - hv * hv);
    if !(m > 0.0) {
        return Err(Error::Admissibility {
            r,
            detail: format!("f + r^2 (g - h^2) = {m} must be positive"),
        });
    }
    let rest = (2.0 * r * fv * hv + r * r * df * hv - 2.0 * r * r * fv * dh) * g
        + 2.0 * fv * df * hv
        - 2.0 * fv * fv * dh
        - 2.0 * r * fv * hv.powi(3)
        - r * r * df * hv.powi(3);
    Ok(-rest / (r * r * fv * hv))
}

/// Solves the BH isotropy system for `g` given `f`, `h` and `g(r0)`.
pub fn bh_solve_g(
    f: &ScalarFunction,
    h: &ScalarFunction,
    r0: f64,
    g_at_r0: f64,
    range: (f64, f64),
    steps: usize,
) -> Result<OdeSolution> {
    let (nodes, start) = ode_nodes(r0, range, steps)?;
    let rhs = |r: f64, g: f64| bh_g_prime(f, h, r, g);
    let values = rk4_both_ways(&nodes, start, g_at_r0, &rhs)?;
    let derivatives = nodes
        .iter()
        .zip(&values)
        .map(|(&r, &g)| rhs(r, g))
        .collect::<Result<Vec<_>>>()?;
    let mut sol = OdeSolution {
        r: nodes,
        values,
        derivatives,
        interpolation_order: 3,
        node_residuals: Vec::new(),
        max_residual: 0.0,
    };
    let g = sol.to_scalar()?;
    sol.node_residuals = sol
        .r
        .iter()
        .map(|&r| Ok(bh_system_residual(f, &g, h, r)?.res2))
        .collect::<Result<Vec<_>>>()?;
    sol.max_residual = sol.node_residuals.iter().fold(0.0, |a, v| a.max(v.abs()));
    Ok(sol)
}

fn ht_inequality(c_const: f64, g: f64, h: f64, r: f64) -> Result<()> {
    if !(c_const > 0.0) {
        return Err(Error::domain("c", c_const));
    }
    let margin = g - h * h + c_const / r.powi(4);
    if !(margin > 0.0) {
        return Err(Error::domain("g - h^2 + c/r^4", margin));
    }
    Ok(())
}

/// `2h′(c/r² + r²g) − h(r²g′ − 4c/r³)`.
pub fn ht_condition_residual(
    c_const: f64,
    g: &ScalarFunction,
    h: &ScalarFunction,
    r: f64,
) -> Result<f64> {
    let [gv, dg, ..] = g.derivatives(r)?;
    let [hv, dh, ..] = h.derivatives(r)?;
    ht_inequality(c_const, gv, hv, r)?;
    Ok(2.0 * dh * (c_const / (r * r) + r * r * gv) - hv * (r * r * dg - 4.0 * c_const / r.powi(3)))
}

/// Solves the HT condition as `h = h(r0) exp(∫ k)`, with
/// `k = (r²g′ − 4c/r³) / (2(c/r² + r²g))`.
pub fn ht_solve_h(
    c_const: f64,
    g: &ScalarFunction,
    r0: f64,
    h_at_r0: f64,
    range: (f64, f64),
    steps: usize,
) -> Result<OdeSolution> {
    if !(c_const > 0.0) {
        return Err(Error::domain("c", c_const));
    }
    let (nodes, start) = ode_nodes(r0, range, steps)?;
    let k = |r: f64| -> Result<f64> {
        let [gv, dg, ..] = g.derivatives(r)?;
        let den = 2.0 * (c_const / (r * r) + r * r * gv);
        if !(den > 0.0) {
            return Err(Error::domain("c/r^2 + r^2 g", den / 2.0));
        }
        Ok((r * r * dg - 4.0 * c_const / r.powi(3)) / den)
    };
    let panel = GaussLegendre::new(8);
    let mut log_ratio = vec![0.0; nodes.len()];
    for i in start + 1..nodes.len() {
        log_ratio[i] = log_ratio[i - 1] + panel.try_integrate(nodes[i - 1], nodes[i], &k)?;
    }
    for i in (0..start).rev() {
        log_ratio[i] = log_ratio[i + 1] - panel.try_integrate(nodes[i], nodes[i + 1], &k)?;
    }
    let values: Vec<f64> = log_ratio.iter().map(|l| h_at_r0 * l.exp()).collect();
    let mut derivatives = Vec::with_capacity(nodes.len());
    for (&r, &hv) in nodes.iter().zip(&values) {
        let gv = g.value(r)?;
        if !(gv - hv * hv + c_const / r.powi(4) > 0.0) {
            return Err(Error::Admissibility {
                r,
                detail: format!(
                    "g - h^2 + c/r^4 = {} must be positive",
                    gv - hv * hv + c_const / r.powi(4)
                ),
            });
        }
        derivatives.push(k(r)? * hv);
    }
    let mut sol = OdeSolution {
        r: nodes,
        values,
        derivatives,
        interpolation_order: 3,
        node_residuals: Vec::new(),
        max_residual: 0.0,
    };
    let h = sol.to_scalar()?;
    sol.node_residuals = sol
        .r
        .iter()
        .map(|&r| ht_condition_residual(c_const, g, &h, r))
        .collect::<Result<Vec<_>>>()?;
    sol.max_residual = sol.node_residuals.iter().fold(0.0, |a, v| a.max(v.abs()));
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Var};
    use crate::geometry::phi_jet;
    use approx::assert_relative_eq;

    fn sf(t: &str) -> ScalarFunction {
        ScalarFunction::parse(t).unwrap()
    }

    fn chi(t: &str) -> ExpressionTree {
        parse_expression(t, &[Var::W]).unwrap()
    }

    #[test]
    fn trivial_family_is_inverse_radius() {
        let dom = RDomain::new(0.5, 2.0).unwrap();
        let built = build_berwald_family(sf("0"), chi("1"), 1.0, dom, 3).unwrap();
        assert!(built.diagnostics.pde_max_residual <= 1e-12);
        assert!(built.diagnostics.douglas.pass);
        assert_relative_eq!(
            phi_jet(&built.spec, 1.7, 0.4).unwrap().value(),
            1.0 / 1.7,
            max_relative = 1e-13
        );
    }

    #[test]
    fn quadratic_chi_family_builds() {
        let dom = RDomain::new(0.8, 1.2).unwrap();
        let built = build_berwald_family(sf("0.1"), chi("1+ w/4"), 1.0, dom, 3).unwrap();
        for fit in &built.diagnostics.douglas.per_radius {
            assert_relative_eq!(fit.c1, 0.5 / (fit.r * fit.r), epsilon = 1e-6);
            assert_relative_eq!(fit.c2, 0.1, epsilon = 1e-6);
        }
    }

    #[test]
    fn pde_fixtures() {
        let dom = RDomain::new(0.2, 1.0).unwrap();
        let odd = MetricSpec::general("s/r^2", 2, dom).unwrap();
        assert!(lemma33_residual(&odd, &sf("0"), 0.5, 0.3).unwrap().abs() < 1e-14);
        let riem = MetricSpec::general("sqrt(1+s^2)", 2, dom).unwrap();
        let res = lemma33_residual(&riem, &sf("0"), 0.5, 0.3).unwrap();
        assert!(res.abs() > 0.5, "{res}");
    }

    #[test]
    fn system_fixtures() {
        let dom = RDomain::new(0.5, 2.0).unwrap();
        let euclid = MetricSpec::general("1", 2, dom).unwrap();
        let z = sf("0");
        assert_eq!(
            system31_residual(&euclid, &z, &z, &z, &z, 1.0, 0.3).unwrap(),
            (0.0, 0.0)
        );
        let built = build_berwald_family(sf("0.2"), chi("1"), 1.0, dom, 3).unwrap();
        for (r, s) in [(0.7, 0.2), (1.5, -1.1)] {
            let (a, b) = system31_residual(
                &built.spec,
                &sf("0.5/r^2"),
                &sf("0.2"),
                &sf("-1/r^2"),
                &z,
                r,
                s,
            )
            .unwrap();
            assert!(a.abs() < 1e-8 && b.abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn bh_system_fixtures() {
        for r in [0.3, 0.5, 0.7] {
            let unit = bh_system_residual(&sf("1"), &sf("1"), &sf("1"), r).unwrap();
            assert!(unit.res2.abs() < 1e-15 && unit.printed_ode_residual.abs() < 1e-15);
            assert_relative_eq!(unit.c, 0.5 / (1.0 + r * r), max_relative = 1e-15);
            let funk =
                bh_system_residual(&sf("1/(1-r^2)"), &sf("1/(1-r^2)^2"), &sf("1/(1-r^2)"), r)
                    .unwrap();
            assert!(funk.res2.abs() < 1e-12);
            assert!(funk.corrected_ode_residual.abs() < 1e-12);
            assert!(funk.printed_ode_residual.abs() > 1e-2);
            assert_relative_eq!(funk.c, 0.5, max_relative = 1e-14);
            let riem = bh_system_residual(&sf("1+r"), &sf("2"), &sf("0"), r).unwrap();
            assert_eq!((riem.res2, riem.c), (0.0, 0.0));
        }
        assert!(bh_system_residual(&sf("1"), &sf("0"), &sf("2"), 0.9).is_err());
    }

    #[test]
    fn bh_solver_reproduces_known_solutions() {
        let sol = bh_solve_g(&sf("1"), &sf("1"), 1.0, 1.0, (0.5, 1.5), 400).unwrap();
        assert!(sol.values.iter().all(|g| (g - 1.0).abs() < 1e-13));
        let funk_f = sf("1/(1-r^2)");
        let sol = bh_solve_g(
            &funk_f,
            &funk_f,
            0.5,
            1.0 / 0.75f64.powi(2),
            (0.3, 0.7),
            400,
        )
        .unwrap();
        for (&r, &g) in sol.r.iter().zip(&sol.values) {
            assert_relative_eq!(g, 1.0 / (1.0 - r * r).powi(2), max_relative = 1e-8);
        }
        assert!(sol.max_residual <= 1e-8);
        assert!(matches!(
            bh_solve_g(&sf("1"), &sf("0"), 1.0, 1.0, (0.5, 1.5), 400),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn ht_fixtures() {
        assert!(
            ht_condition_residual(1.0, &sf("0"), &sf("0.5/r^2"), 0.8)
                .unwrap()
                .abs()
                < 1e-14
        );
        assert_eq!(
            ht_condition_residual(1.0, &sf("0"), &sf("0"), 0.8).unwrap(),
            0.0
        );
        assert!(
            ht_condition_residual(1.0, &sf("0"), &sf("0.5/r"), 0.8)
                .unwrap()
                .abs()
                > 0.1
        );

        let sol = ht_solve_h(1.0, &sf("0"), 1.0, 0.5, (0.5, 2.0), 400).unwrap();
        let h = sol.to_scalar().unwrap();
        assert_relative_eq!(h.value(2.0).unwrap(), 0.125, epsilon = 1e-9);
        assert_relative_eq!(
            h.value(0.77).unwrap(),
            0.5 / 0.77f64.powi(2),
            max_relative = 1e-9
        );
        assert!(sol.max_residual <= 1e-9);

        let zero = ht_solve_h(1.0, &sf("0"), 1.0, 0.0, (0.5, 2.0), 400).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            ht_solve_h(1.0, &sf("0"), 1.0, 5.0, (0.5, 2.0), 400),
            Err(Error::Admissibility { .. })
        ));
    }
}
