//! A fixed catalogue of reference metrics used by tests, benches and the CLI.

use crate::error::Result;
use crate::expr::{parse_expression, ScalarFunction, Var};
use crate::geometry::{BerwaldProfile, MetricSpec};
use crate::grid::RDomain;

pub const FUNK_PROFILE: &str = "(sqrt(1-r^2+s^2)+s)/(1-r^2)";

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub name: &'static str,
    pub spec: MetricSpec,
}

impl ZooEntry {
    pub fn is_randers(&self) -> bool {
        self.spec.randers_triple().is_some()
    }
}

/// The standard domain `[0.2, 0.9]`.
pub fn zoo_domain() -> RDomain {
    RDomain { min: 0.2, max: 0.9 }
}

/// Reference metrics in dimension `n`, all regular on [`zoo_domain`].
pub fn zoo(n: usize) -> Result<Vec<ZooEntry>> {
    let dom = zoo_domain();
    let randers = |name, f: &str, g: &str, h: &str| -> Result<ZooEntry> {
        Ok(ZooEntry {
            name,
            spec: MetricSpec::randers_str(f, g, h, n, dom)?,
        })
    };
    let general = |name, phi: &str| -> Result<ZooEntry> {
        Ok(ZooEntry {
            name,
            spec: MetricSpec::general(phi, n, dom)?,
        })
    };
    let family = BerwaldProfile::new(
        ScalarFunction::parse("0.1")?,
        parse_expression("1+ w/4", &[Var::W])?,
        0.5,
    )?;
    Ok(vec![
        general("euclidean", "1")?,
        general("riemannian", "sqrt(1+s^2)")?,
        general("funk", FUNK_PROFILE)?,
        randers("randers_unit", "1", "1", "1")?,
        randers("randers_funk", "1/(1-r^2)", "1/(1-r^2)^2", "1/(1-r^2)")?,
        randers("randers_mixed", "1+r^2", "0.5", "0.4")?,
        randers("randers_parallel", "1/r^2", "0", "0.5/r^2")?,
        randers("randers_half", "1", "1", "0.5")?,
        ZooEntry {
            name: "berwald_family",
            spec: MetricSpec::berwald_family(family, n, dom)?,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::regularity_scan;

    #[test]
    fn every_entry_is_regular() {
        for n in [2, 3] {
            for e in zoo(n).unwrap() {
                let rep = regularity_scan(&e.spec, 9, 9);
                assert!(rep.pass, "{} fails at {:?}", e.name, rep.worst_at);
            }
        }
    }
}
