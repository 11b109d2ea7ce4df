//! The JSON run configuration.

use serde::{Deserialize, Serialize};

use ssfinsler::expr::{parse_expression, Var};
use ssfinsler::{
    BerwaldProfile, HermiteTable, MetricKind, MetricSpec, QuadratureRule, RDomain, ScalarFunction,
    VolumeSpec,
};

use crate::error::CliError;

/// A function of `r`: either a formula or a sampled Hermite table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarConfig {
    Expr(String),
    Table { table: HermiteTable },
}

impl ScalarConfig {
    pub fn build(&self, field: &str) -> Result<ScalarFunction, CliError> {
        match self {
            ScalarConfig::Expr(text) => {
                ScalarFunction::parse(text).map_err(|e| CliError::config(format!("{field}: {e}")))
            }
            ScalarConfig::Table { table } => {
                HermiteTable::new(table.r.clone(), table.value.clone(), table.deriv.clone())
                    .map(ScalarFunction::Table)
                    .map_err(|e| CliError::config(format!("{field}: {e}")))
            }
        }
    }
}

impl From<&str> for ScalarConfig {
    fn from(s: &str) -> Self {
        ScalarConfig::Expr(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    General {
        phi: String,
    },
    Randers {
        f: ScalarConfig,
        g: ScalarConfig,
        h: ScalarConfig,
    },
    BerwaldFamily {
        c2: ScalarConfig,
        chi: String,
        r0: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumeConfig {
    #[default]
    Bh,
    Ht,
    Constant,
    Custom {
        sigma: ScalarConfig,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    #[serde(default = "default_count")]
    pub r_count: usize,
    #[serde(default = "default_count")]
    pub s_count: usize,
}

fn default_count() -> usize {
    11
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub isotropy: Option<f64>,
    pub douglas: Option<f64>,
    pub oracle: Option<f64>,
    pub quadrature: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    pub path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_true")]
    pub adaptive: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: default_nodes(),
            adaptive: true,
        }
    }
}

fn default_nodes() -> usize {
    ssfinsler::quadrature::DEFAULT_NODES
}

fn default_true() -> bool {
    true
}

/// Inputs for the constructive checks and `construct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Berwald {
        c2: ScalarConfig,
        chi: String,
        r0: f64,
    },
    RandersBh {
        f: ScalarConfig,
        h: ScalarConfig,
        r0: f64,
        g0: f64,
    },
    RandersHt {
        c: f64,
        g: ScalarConfig,
        r0: f64,
        h0: f64,
    },
}

impl FamilyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyConfig::Berwald { .. } => "berwald",
            FamilyConfig::RandersBh { .. } => "randers-bh",
            FamilyConfig::RandersHt { .. } => "randers-ht",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            samples: default_samples(),
            seed: 0,
        }
    }
}

fn default_samples() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    #[serde(default)]
    pub volume: VolumeConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Build diagnostics attached by `construct`; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<serde_json::Value>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::config(format!("n: must be >= 2, got {}", self.n)));
        }
        if self.grid.r_count < 2 || self.grid.s_count < 5 {
            return Err(CliError::config(
                "grid: need r_count >= 2 and s_count >= 5".to_string(),
            ));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<RDomain, CliError> {
        RDomain::new(self.grid.r_min, self.grid.r_max)
            .map_err(|e| CliError::config(format!("grid: {e}")))
    }

    pub fn radii(&self) -> Result<Vec<f64>, CliError> {
        Ok(ssfinsler::r_grid(self.domain()?, self.grid.r_count))
    }

    pub fn metric_spec(&self) -> Result<MetricSpec, CliError> {
        let metric = self
            .metric
            .as_ref()
            .ok_or_else(|| CliError::config("metric: missing".to_string()))?;
        let domain = self.domain()?;
        let kind = match metric {
            MetricConfig::General { phi } => MetricKind::GeneralPhi(
                parse_expression(phi, &[Var::R, Var::S])
                    .map_err(|e| CliError::config(format!("metric.phi: {e}")))?,
            ),
            MetricConfig::Randers { f, g, h } => MetricKind::Randers {
                f: f.build("metric.f")?,
                g: g.build("metric.g")?,
                h: h.build("metric.h")?,
            },
            MetricConfig::BerwaldFamily { c2, chi, r0 } => {
                let chi = parse_expression(chi, &[Var::W])
                    .map_err(|e| CliError::config(format!("metric.chi: {e}")))?;
                let profile = BerwaldProfile::new(c2.build("metric.c2")?, chi, *r0)
                    .map_err(|e| CliError::config(format!("metric: {e}")))?;
                MetricKind::BerwaldFamily(std::sync::Arc::new(profile))
            }
        };
        MetricSpec::new(kind, self.n, domain)
            .map_err(|e| CliError::numeric("geometry", "MetricSpec::new", None, e))
    }

    pub fn volume_spec(&self) -> Result<VolumeSpec, CliError> {
        Ok(match &self.volume {
            VolumeConfig::Bh => VolumeSpec::BusemannHausdorff,
            VolumeConfig::Ht => VolumeSpec::HolmesThompson,
            VolumeConfig::Constant => VolumeSpec::Constant,
            VolumeConfig::Custom { sigma } => VolumeSpec::Custom(sigma.build("volume.sigma")?),
        })
    }

    pub fn rule(&self) -> QuadratureRule {
        let mut rule = QuadratureRule::new(self.quadrature.nodes, self.quadrature.adaptive);
        if let Some(t) = self.tolerances.quadrature {
            rule = rule.with_tolerance(t);
        }
        rule
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_round_trips() {
        let text = r#"{"n": 2, "metric": {"type": "general", "phi": "1"},
                       "grid": {"r_min": 0.2, "r_max": 0.9}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.volume, VolumeConfig::Bh);
        assert_eq!(cfg.grid.r_count, 11);
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.metric_spec().is_ok());
    }

    #[test]
    fn randers_with_table() {
        let text = r#"{"n": 3,
            "metric": {"type": "randers", "f": "1", "h": "1",
                       "g": {"table": {"r": [0.1, 1.0], "value": [1.0, 1.0], "deriv": [0.0, 0.0]}}},
            "volume": {"type": "ht"},
            "grid": {"r_min": 0.2, "r_max": 0.9, "r_count": 3, "s_count": 5}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let spec = cfg.metric_spec().unwrap();
        assert!(spec.randers_triple().is_some());
    }

    #[test]
    fn errors_are_located() {
        let err = RunConfig::from_json(r#"{"n": 2, "grid": {"r_min": 0.1}}"#).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.to_string().contains("line 1"), "{err}");
        let cfg = RunConfig::from_json(
            r#"{"n": 2, "metric": {"type": "general", "phi": "s +"}, "grid": {"r_min": 0.1, "r_max": 0.5}}"#,
        )
        .unwrap();
        let err = cfg.metric_spec().unwrap_err();
        assert!(err.to_string().contains("metric.phi"), "{err}");
        assert!(RunConfig::from_json(r#"{"n": 1, "grid": {"r_min": 0.1, "r_max": 0.5}}"#).is_err());
    }
}
