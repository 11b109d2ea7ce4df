//! The four subcommands. Each returns the text to write and an exit code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ssfinsler::expr::{parse_expression, Var};
use ssfinsler::geometry::{phi_jet, point_from_rs, spray_from_jet};
use ssfinsler::scurvature::reduced_s_with_f;
use ssfinsler::{
    bh_solve_g, bh_system_residual, build_berwald_family, covariant_b_coefficients,
    douglas_verdict, ht_condition_residual, ht_solve_h, isotropy_profile, lemma33_residual,
    metric_determinant, regularity_scan, s_by_distortion, s_grid, spray_values, IsotropyReport,
    MetricSpec, QuadratureRule, ScalarFunction, VolumeSpec,
};

use crate::config::{FamilyConfig, MetricConfig, OutputFormat, RunConfig, ScalarConfig};
use crate::error::{CliError, EXIT_PASS, EXIT_VERDICT_FAIL};
use crate::report::{csv, verdict, GridRow, Report, Residuals};

/// Result of a command: the document to emit, a one-line summary and the
/// exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub summary: String,
    pub code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    Isotropy,
    Douglas,
    BerwaldFamily,
    Thm11,
    Thm12,
    Oracle,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Isotropy => "isotropy",
            Check::Douglas => "douglas",
            Check::BerwaldFamily => "berwald-family",
            Check::Thm11 => "thm11",
            Check::Thm12 => "thm12",
            Check::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Berwald,
    RandersBh,
    RandersHt,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub quad: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(q) = self.quad {
            cfg.quadrature.nodes = q;
        }
        if let Some(seed) = self.seed {
            cfg.oracle.seed = seed;
        }
    }
}

fn echo(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn wrap<T>(
    module: &'static str,
    op: &'static str,
    point: Option<(f64, Option<f64>)>,
    r: ssfinsler::Result<T>,
) -> Result<T, CliError> {
    r.map_err(|e| CliError::numeric(module, op, point, e))
}

/// Regularity scan on the configured grid; failure is exit 4.
fn require_regular(spec: &MetricSpec, cfg: &RunConfig) -> Result<(), CliError> {
    let rep = regularity_scan(spec, cfg.grid.r_count, cfg.grid.s_count);
    if rep.pass {
        return Ok(());
    }
    let (r, s) = rep.worst_at;
    Err(CliError::numeric(
        "geometry",
        "regularity_scan",
        Some((r, Some(s))),
        ssfinsler::Error::Regularity {
            r,
            s,
            condition: rep.worst_condition,
            value: rep.worst_margin,
        },
    ))
}

fn grid_rows(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    cfg: &RunConfig,
    rule: &QuadratureRule,
) -> Result<Vec<GridRow>, CliError> {
    let n1 = (spec.n + 1) as f64;
    let mut rows = Vec::with_capacity(cfg.grid.r_count * cfg.grid.s_count);
    for r in cfg.radii()? {
        let dj = wrap(
            "volume",
            "density_jet",
            Some((r, None)),
            ssfinsler::density_jet(vol, spec, r, rule),
        )?;
        let f_r = dj.f_coefficient(r);
        for s in s_grid(r, cfg.grid.s_count) {
            let at = Some((r, Some(s)));
            let jet = wrap("geometry", "phi_jet", at, phi_jet(spec, r, s))?;
            let sp = wrap("geometry", "spray_values", at, spray_from_jet(&jet, r, s))?;
            let detg = wrap(
                "geometry",
                "metric_determinant",
                at,
                metric_determinant(spec, r, s),
            )?;
            let s_over_u = wrap(
                "scurvature",
                "reduced_s",
                at,
                reduced_s_with_f(spec, r, s, f_r),
            )?;
            rows.push(GridRow {
                r,
                s,
                phi: jet.value(),
                p: sp.p,
                q: sp.q,
                q_s: sp.q_s,
                detg,
                sigma: dj.sigma,
                f_r,
                s_over_u,
                c: s_over_u / (n1 * jet.value()),
            });
        }
    }
    Ok(rows)
}

pub fn sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.metric_spec()?;
    let vol = cfg.volume_spec()?;
    require_regular(&spec, cfg)?;
    let rows = grid_rows(&spec, &vol, cfg, &cfg.rule())?;
    Ok(Outcome {
        summary: format!("sample: {} rows", rows.len()),
        output: csv(&rows),
        code: EXIT_PASS,
    })
}

pub fn analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.metric_spec()?;
    let vol = cfg.volume_spec()?;
    let regularity = regularity_scan(&spec, cfg.grid.r_count, cfg.grid.s_count);
    require_regular(&spec, cfg)?;
    let rows = grid_rows(&spec, &vol, cfg, &cfg.rule())?;
    if cfg.output.format == OutputFormat::Csv {
        return Ok(Outcome {
            summary: format!("analyze: {} rows", rows.len()),
            output: csv(&rows),
            code: EXIT_PASS,
        });
    }
    let mut per_radius = Vec::new();
    let mut deviations = Vec::new();
    for chunk in rows.chunks(cfg.grid.s_count) {
        let mean = chunk.iter().map(|p| p.c).sum::<f64>() / chunk.len() as f64;
        let min = chunk.iter().map(|p| p.c).fold(f64::INFINITY, f64::min);
        let max = chunk.iter().map(|p| p.c).fold(f64::NEG_INFINITY, f64::max);
        per_radius.push(json!({
            "r": chunk[0].r, "sigma": chunk[0].sigma, "f": chunk[0].f_r,
            "c_mean": mean, "c_min": min, "c_max": max,
        }));
        deviations.extend(chunk.iter().map(|p| (p.r, Some(p.s), p.c - mean)));
    }
    let report = Report {
        config_echo: echo(cfg),
        command: "analyze".into(),
        verdict: verdict(regularity.pass),
        residuals: Residuals::from_samples(deviations),
        per_radius,
        details: json!({
            "regularity": {
                "pass": regularity.pass,
                "worst_margin": regularity.worst_margin,
                "worst_condition": regularity.worst_condition,
                "worst_at": {"r": regularity.worst_at.0, "s": regularity.worst_at.1},
                "cholesky_disagreements": regularity.cholesky_disagreements,
            },
            "points": rows,
        }),
    };
    Ok(Outcome {
        summary: format!(
            "analyze: {} points, max c deviation {:.3e}",
            rows.len(),
            report.residuals.max
        ),
        output: report.to_json(),
        code: EXIT_PASS,
    })
}

/// First grid point at which the pointwise pipeline fails.
fn locate_failure(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    cfg: &RunConfig,
) -> Option<(f64, Option<f64>)> {
    let rule = cfg.rule();
    for r in cfg.radii().ok()? {
        let Ok(dj) = ssfinsler::density_jet(vol, spec, r, &rule) else {
            return Some((r, None));
        };
        for s in s_grid(r, cfg.grid.s_count) {
            if reduced_s_with_f(spec, r, s, dj.f_coefficient(r)).is_err() {
                return Some((r, Some(s)));
            }
        }
    }
    None
}

fn iso(
    spec: &MetricSpec,
    vol: &VolumeSpec,
    cfg: &RunConfig,
    tol: Option<f64>,
) -> Result<IsotropyReport, CliError> {
    isotropy_profile(spec, vol, &cfg.radii()?, cfg.grid.s_count, tol, &cfg.rule()).map_err(|e| {
        CliError::numeric(
            "scurvature",
            "isotropy_profile",
            locate_failure(spec, vol, cfg),
            e,
        )
    })
}

/// Steps for the tabulated ODE solutions; the Hermite derivative between
/// nodes must resolve parallel-β checks at the 1e-8 level.
const ODE_STEPS: usize = 4000;

/// ODE solutions are tabulated slightly beyond the grid so that the
/// difference stencils at the end radii stay inside the table.
fn solve_range(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let d = cfg.domain()?;
    Ok((d.min * (1.0 - 1e-3), d.max * (1.0 + 1e-3)))
}

fn iso_per_radius(rep: &IsotropyReport) -> Vec<Value> {
    rep.per_radius
        .iter()
        .map(|p| json!({"r": p.r, "c": p.mean, "c_min": p.min, "c_max": p.max, "spread": p.spread, "f": p.f}))
        .collect()
}

fn iso_deviations(rep: &IsotropyReport) -> Residuals {
    Residuals::from_samples(rep.r_grid.iter().enumerate().flat_map(|(i, &r)| {
        let mean = rep.per_radius[i].mean;
        rep.s_grid[i]
            .iter()
            .zip(&rep.c_values[i])
            .map(move |(&s, &c)| (r, Some(s), c - mean))
    }))
}

fn finish(
    cfg: &RunConfig,
    check: Check,
    pass: bool,
    residuals: Residuals,
    per_radius: Vec<Value>,
    details: Value,
) -> Outcome {
    let report = Report {
        config_echo: echo(cfg),
        command: format!("verify {}", check.name()),
        verdict: verdict(pass),
        residuals,
        per_radius,
        details,
    };
    Outcome {
        summary: format!(
            "{}: {} (max residual {:.3e} at r={}{})",
            check.name(),
            if pass { "PASS" } else { "FAIL" },
            residuals.max,
            residuals.argmax.r,
            residuals
                .argmax
                .s
                .map(|s| format!(", s={s}"))
                .unwrap_or_default()
        ),
        output: report.to_json(),
        code: if pass { EXIT_PASS } else { EXIT_VERDICT_FAIL },
    }
}

pub fn verify(cfg: &RunConfig, check: Check, ov: Overrides) -> Result<Outcome, CliError> {
    match check {
        Check::Isotropy => verify_isotropy(cfg, ov),
        Check::Douglas => verify_douglas(cfg, ov),
        Check::BerwaldFamily => verify_berwald(cfg, ov),
        Check::Thm11 => verify_thm11(cfg, ov),
        Check::Thm12 => verify_thm12(cfg, ov),
        Check::Oracle => verify_oracle(cfg, ov),
    }
}

fn verify_isotropy(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let spec = cfg.metric_spec()?;
    require_regular(&spec, cfg)?;
    let rep = iso(
        &spec,
        &cfg.volume_spec()?,
        cfg,
        ov.tol.or(cfg.tolerances.isotropy),
    )?;
    Ok(finish(
        cfg,
        Check::Isotropy,
        rep.pass,
        iso_deviations(&rep),
        iso_per_radius(&rep),
        json!({"tolerance": rep.tolerance, "max_spread": rep.max_spread}),
    ))
}

fn verify_douglas(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let spec = cfg.metric_spec()?;
    require_regular(&spec, cfg)?;
    let radii = cfg.radii()?;
    let fit = wrap(
        "douglas",
        "douglas_verdict",
        None,
        douglas_verdict(
            &spec,
            &radii,
            cfg.grid.s_count,
            ov.tol.or(cfg.tolerances.douglas),
        ),
    )?;
    let mut samples = Vec::new();
    for f in &fit.per_radius {
        for s in s_grid(f.r, cfg.grid.s_count) {
            let q = wrap(
                "douglas",
                "fit_q",
                Some((f.r, Some(s))),
                spray_values(&spec, f.r, s),
            )?
            .q;
            samples.push((f.r, Some(s), q - f.c1 - f.c2 * s * s));
        }
    }
    let per_radius = fit
        .per_radius
        .iter()
        .map(|f| {
            json!({"r": f.r, "c1": f.c1, "c2": f.c2, "max_residual": f.max_residual,
                   "odd_residual": f.odd_residual, "tolerance": f.tolerance})
        })
        .collect();
    Ok(finish(
        cfg,
        Check::Douglas,
        fit.pass,
        Residuals::from_samples(samples),
        per_radius,
        Value::Null,
    ))
}

fn berwald_inputs(cfg: &RunConfig) -> Result<(ScalarConfig, String, f64), CliError> {
    match (&cfg.family, &cfg.metric) {
        (Some(FamilyConfig::Berwald { c2, chi, r0 }), _)
        | (None, Some(MetricConfig::BerwaldFamily { c2, chi, r0 })) => {
            Ok((c2.clone(), chi.clone(), *r0))
        }
        _ => Err(CliError::config(
            "family: berwald parameters (c2, chi, r0) required".to_string(),
        )),
    }
}

fn verify_berwald(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let (c2_cfg, chi, r0) = berwald_inputs(cfg)?;
    let c2 = c2_cfg.build("family.c2")?;
    let chi = parse_expression(&chi, &[Var::W])
        .map_err(|e| CliError::config(format!("family.chi: {e}")))?;
    let built = wrap(
        "families",
        "build_berwald_family",
        None,
        build_berwald_family(c2.clone(), chi, r0, cfg.domain()?, cfg.n),
    )?;
    let spec = &built.spec;
    let rep = iso(spec, &VolumeSpec::BusemannHausdorff, cfg, None)?;
    let c_tol = ov.tol.unwrap_or(1e-6);
    let c_zero = rep
        .c_values
        .iter()
        .flatten()
        .fold(0.0f64, |a, c| a.max(c.abs()));

    // P/s must not depend on s.
    let mut linearity: f64 = 0.0;
    let mut samples = Vec::new();
    let mut per_radius = Vec::new();
    for (i, &r) in rep.r_grid.iter().enumerate() {
        let mut ratios = Vec::new();
        for &s in &rep.s_grid[i] {
            let at = Some((r, Some(s)));
            samples.push((
                r,
                Some(s),
                wrap(
                    "families",
                    "lemma33_residual",
                    at,
                    lemma33_residual(spec, &c2, r, s),
                )?,
            ));
            if s.abs() > 1e-3 * r {
                ratios.push(wrap("geometry", "spray_values", at, spray_values(spec, r, s))?.p / s);
            }
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / (1.0 + hi.abs().max(lo.abs()));
        linearity = linearity.max(spread);
        let fit = &built.diagnostics.douglas.per_radius;
        let c1 = fit.iter().find(|f| f.r == r).map(|f| (f.c1, f.c2));
        per_radius.push(json!({
            "r": r, "c": rep.per_radius[i].mean, "p_over_s_spread": spread,
            "douglas_c1": c1.map(|v| v.0), "douglas_c2": c1.map(|v| v.1),
        }));
    }
    let pass = built.diagnostics.douglas.pass && rep.pass && c_zero <= c_tol && linearity <= 1e-7;
    Ok(finish(
        cfg,
        Check::BerwaldFamily,
        pass,
        Residuals::from_samples(samples),
        per_radius,
        json!({
            "pde_max_residual": built.diagnostics.pde_max_residual,
            "douglas_pass": built.diagnostics.douglas.pass,
            "isotropy_pass": rep.pass,
            "max_abs_c": c_zero,
            "p_over_s_max_spread": linearity,
        }),
    ))
}

/// `(f, g, h)` for the BH check: solved from `family.randers_bh` or read
/// from a Randers `metric`.
fn thm11_triple(
    cfg: &RunConfig,
) -> Result<
    (
        ScalarFunction,
        ScalarFunction,
        ScalarFunction,
        Option<Value>,
    ),
    CliError,
> {
    match (&cfg.family, &cfg.metric) {
        (Some(FamilyConfig::RandersBh { f, h, r0, g0 }), _) => {
            let (f, h) = (f.build("family.f")?, h.build("family.h")?);
            let sol = wrap(
                "families",
                "bh_solve_g",
                Some((*r0, None)),
                bh_solve_g(&f, &h, *r0, *g0, solve_range(cfg)?, ODE_STEPS),
            )?;
            let g = wrap("families", "bh_solve_g", None, sol.to_scalar())?;
            let info = json!({"ode_max_residual": sol.max_residual, "nodes": sol.r.len()});
            Ok((f, g, h, Some(info)))
        }
        (None, Some(MetricConfig::Randers { f, g, h })) => Ok((
            f.build("metric.f")?,
            g.build("metric.g")?,
            h.build("metric.h")?,
            None,
        )),
        _ => Err(CliError::config(
            "thm11 needs family.randers_bh or a randers metric".to_string(),
        )),
    }
}

fn verify_thm11(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let (f, g, h, solve_info) = thm11_triple(cfg)?;
    let spec = wrap(
        "geometry",
        "MetricSpec::randers",
        None,
        MetricSpec::randers(f.clone(), g.clone(), h.clone(), cfg.n, cfg.domain()?),
    )?;
    require_regular(&spec, cfg)?;
    let rep = iso(
        &spec,
        &VolumeSpec::BusemannHausdorff,
        cfg,
        cfg.tolerances.isotropy,
    )?;
    let c_tol = ov.tol.unwrap_or(1e-6);
    let mut samples = Vec::new();
    let mut per_radius = Vec::new();
    for p in &rep.per_radius {
        let sys = wrap(
            "families",
            "bh_system_residual",
            Some((p.r, None)),
            bh_system_residual(&f, &g, &h, p.r),
        )?;
        samples.push((p.r, None, sys.c - p.mean));
        per_radius.push(json!({
            "r": p.r, "g": g.value(p.r).ok(), "c_system": sys.c, "c_isotropy": p.mean,
            "res1": sys.res1, "res2": sys.res2,
            "printed_ode_residual": sys.printed_ode_residual,
            "corrected_ode_residual": sys.corrected_ode_residual,
        }));
    }
    let residuals = Residuals::from_samples(samples);
    let pass = rep.pass && residuals.max <= c_tol;
    Ok(finish(
        cfg,
        Check::Thm11,
        pass,
        residuals,
        per_radius,
        json!({"isotropy_pass": rep.pass, "max_spread": rep.max_spread, "solve": solve_info}),
    ))
}

fn thm12_inputs(
    cfg: &RunConfig,
) -> Result<
    (
        f64,
        ScalarFunction,
        ScalarFunction,
        ScalarFunction,
        Option<Value>,
    ),
    CliError,
> {
    match (&cfg.family, &cfg.metric) {
        (Some(FamilyConfig::RandersHt { c, g, r0, h0 }), _) => {
            let g = g.build("family.g")?;
            let sol = wrap(
                "families",
                "ht_solve_h",
                Some((*r0, None)),
                ht_solve_h(*c, &g, *r0, *h0, solve_range(cfg)?, ODE_STEPS),
            )?;
            let h = wrap("families", "ht_solve_h", None, sol.to_scalar())?;
            let f = ScalarFunction::parse(&format!("{c:?}/r^2"))
                .map_err(|e| CliError::config(e.to_string()))?;
            Ok((
                *c,
                f,
                g,
                h,
                Some(json!({"ode_max_residual": sol.max_residual, "nodes": sol.r.len()})),
            ))
        }
        (None, Some(MetricConfig::Randers { f, g, h })) => {
            let f = f.build("metric.f")?;
            let d = cfg.domain()?;
            let c = wrap("randers", "f", Some((d.min, None)), f.value(d.min))? * d.min * d.min;
            Ok((c, f, g.build("metric.g")?, h.build("metric.h")?, None))
        }
        _ => Err(CliError::config(
            "thm12 needs family.randers_ht or a randers metric".to_string(),
        )),
    }
}

fn verify_thm12(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let (c, f, g, h, solve_info) = thm12_inputs(cfg)?;
    let spec = wrap(
        "geometry",
        "MetricSpec::randers",
        None,
        MetricSpec::randers(f.clone(), g.clone(), h.clone(), cfg.n, cfg.domain()?),
    )?;
    require_regular(&spec, cfg)?;
    let rep = iso(
        &spec,
        &VolumeSpec::HolmesThompson,
        cfg,
        cfg.tolerances.isotropy,
    )?;
    let b_tol = ov.tol.unwrap_or(1e-8);
    let mut samples = Vec::new();
    let mut per_radius = Vec::new();
    let mut f_shape: f64 = 0.0;
    for p in &rep.per_radius {
        let at = Some((p.r, None));
        let (u1, u2) = wrap(
            "randers",
            "covariant_b_coefficients",
            at,
            covariant_b_coefficients(&f, &g, &h, p.r),
        )?;
        let cond = wrap(
            "families",
            "ht_condition_residual",
            at,
            ht_condition_residual(c, &g, &h, p.r),
        )?;
        let fr = wrap("randers", "f", at, f.value(p.r))? * p.r * p.r - c;
        f_shape = f_shape.max(fr.abs());
        samples.push((p.r, None, u1.abs().max(u2.abs() * p.r * p.r)));
        per_radius.push(
            json!({"r": p.r, "u1": u1, "u2": u2, "condition_residual": cond, "c_isotropy": p.mean}),
        );
    }
    let residuals = Residuals::from_samples(samples);
    let max_c = rep
        .per_radius
        .iter()
        .fold(0.0f64, |a, p| a.max(p.min.abs()).max(p.max.abs()));
    let pass = residuals.max <= b_tol && rep.pass && max_c <= 1e-7 && f_shape <= 1e-12 * (1.0 + c);
    Ok(finish(
        cfg,
        Check::Thm12,
        pass,
        residuals,
        per_radius,
        json!({"c": c, "max_abs_c": max_c, "f_times_r2_deviation": f_shape, "solve": solve_info}),
    ))
}

fn verify_oracle(cfg: &RunConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let spec = cfg.metric_spec()?;
    require_regular(&spec, cfg)?;
    let vol = cfg.volume_spec()?;
    let rule = cfg.rule();
    let band = ov.tol.or(cfg.tolerances.oracle).unwrap_or(1e-4);
    let d = cfg.domain()?;
    let margin = 0.1 * (d.max - d.min);
    let mut rng = ChaCha8Rng::seed_from_u64(ov.seed.unwrap_or(cfg.oracle.seed));
    let mut samples = Vec::new();
    let mut per_point = Vec::new();
    let mut pass = true;
    for _ in 0..cfg.oracle.samples {
        let r = rng.random_range(d.min + margin..d.max - margin);
        let s = r * rng.random_range(-0.9..0.9);
        let (x, mut y) = point_from_rs(cfg.n, r, s);
        let u = rng.random_range(0.5..2.0);
        y.iter_mut().for_each(|v| *v *= u);
        let at = Some((r, Some(s)));
        let oracle = wrap(
            "oracle",
            "s_by_distortion",
            at,
            s_by_distortion(&spec, &vol, &x, &y, None, &rule),
        )?;
        let dj = wrap(
            "volume",
            "density_jet",
            at,
            ssfinsler::density_jet(&vol, &spec, r, &rule),
        )?;
        let direct = u * wrap(
            "scurvature",
            "reduced_s",
            at,
            reduced_s_with_f(&spec, r, s, dj.f_coefficient(r)),
        )?;
        let gap = oracle - direct;
        pass &= gap.abs() <= band * (1.0 + direct.abs());
        samples.push((r, Some(s), gap));
        per_point.push(json!({"r": r, "s": s, "u": u, "oracle": oracle, "formula": direct}));
    }
    Ok(finish(
        cfg,
        Check::Oracle,
        pass,
        Residuals::from_samples(samples),
        per_point,
        json!({"band": band, "seed": ov.seed.unwrap_or(cfg.oracle.seed)}),
    ))
}

pub fn construct(cfg: &RunConfig, family: Family) -> Result<Outcome, CliError> {
    let fam = cfg
        .family
        .as_ref()
        .ok_or_else(|| CliError::config("family: missing".to_string()))?;
    let wanted = match family {
        Family::Berwald => "berwald",
        Family::RandersBh => "randers-bh",
        Family::RandersHt => "randers-ht",
    };
    if fam.name() != wanted {
        return Err(CliError::config(format!(
            "family: config describes {}, --family asks for {wanted}",
            fam.name()
        )));
    }
    let d = cfg.domain()?;
    let mut out = cfg.clone();
    out.family = None;
    let diagnostics = match fam {
        FamilyConfig::Berwald { c2, chi, r0 } => {
            let chi_tree = parse_expression(chi, &[Var::W])
                .map_err(|e| CliError::config(format!("family.chi: {e}")))?;
            let built = wrap(
                "families",
                "build_berwald_family",
                None,
                build_berwald_family(c2.build("family.c2")?, chi_tree, *r0, d, cfg.n),
            )?;
            let ssfinsler::MetricKind::BerwaldFamily(profile) = &built.spec.kind else {
                unreachable!("builder returns a family spec")
            };
            let mut table = Vec::new();
            for r in cfg.radii()? {
                let a = wrap(
                    "families",
                    "antiderivatives",
                    Some((r, None)),
                    profile.antiderivatives(r),
                )?;
                table.push(json!({"r": r, "log_g": a.log_g, "J": a.j, "I2": a.i2}));
            }
            out.metric = Some(MetricConfig::BerwaldFamily {
                c2: c2.clone(),
                chi: chi.clone(),
                r0: *r0,
            });
            json!({
                "family": "berwald",
                "pde_max_residual": built.diagnostics.pde_max_residual,
                "douglas_pass": built.diagnostics.douglas.pass,
                "douglas_max_residual": built.diagnostics.douglas.max_residual,
                "regularity_pass": built.diagnostics.regularity.pass,
                "worst_margin": built.diagnostics.regularity.worst_margin,
                "antiderivatives": table,
            })
        }
        FamilyConfig::RandersBh { f, h, r0, g0 } => {
            let (fs, hs) = (f.build("family.f")?, h.build("family.h")?);
            let sol = wrap(
                "families",
                "bh_solve_g",
                Some((*r0, None)),
                bh_solve_g(&fs, &hs, *r0, *g0, solve_range(cfg)?, ODE_STEPS),
            )?;
            let g = wrap("families", "bh_solve_g", None, sol.to_scalar())?;
            wrap(
                "geometry",
                "MetricSpec::randers",
                None,
                MetricSpec::randers(fs, g.clone(), hs, cfg.n, d),
            )?;
            let ScalarFunction::Table(table) = g else {
                unreachable!("solver returns a table")
            };
            out.metric = Some(MetricConfig::Randers {
                f: f.clone(),
                g: ScalarConfig::Table { table },
                h: h.clone(),
            });
            json!({"family": "randers-bh", "ode_max_residual": sol.max_residual, "nodes": sol.r.len()})
        }
        FamilyConfig::RandersHt { c, g, r0, h0 } => {
            let gs = g.build("family.g")?;
            let sol = wrap(
                "families",
                "ht_solve_h",
                Some((*r0, None)),
                ht_solve_h(*c, &gs, *r0, *h0, solve_range(cfg)?, ODE_STEPS),
            )?;
            let h = wrap("families", "ht_solve_h", None, sol.to_scalar())?;
            let f_text = format!("{c:?}/r^2");
            let fs = ScalarFunction::parse(&f_text).map_err(|e| CliError::config(e.to_string()))?;
            wrap(
                "geometry",
                "MetricSpec::randers",
                None,
                MetricSpec::randers(fs, gs, h.clone(), cfg.n, d),
            )?;
            let ScalarFunction::Table(table) = h else {
                unreachable!("solver returns a table")
            };
            out.metric = Some(MetricConfig::Randers {
                f: ScalarConfig::Expr(f_text),
                g: g.clone(),
                h: ScalarConfig::Table { table },
            });
            json!({"family": "randers-ht", "c": c, "ode_max_residual": sol.max_residual, "nodes": sol.r.len()})
        }
    };
    out.diagnostics = Some(diagnostics);
    let mut text = serde_json::to_string_pretty(&out).expect("config serializes");
    text.push('\n');
    Ok(Outcome {
        summary: format!("construct {wanted}: ok"),
        output: text,
        code: EXIT_PASS,
    })
}
