//! Sampling grids over `(r, s)` with `|s| < r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance kept between sampled `s` values and the `|s| = r` boundary.
pub const S_EDGE_MARGIN: f64 = 1e-6;

/// Closed radial interval `[min, max]` with `min > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDomain {
    pub min: f64,
    pub max: f64,
}

impl RDomain {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min <= 0.0 || max <= min {
            return Err(Error::invalid(format!(
                "radial domain must satisfy 0 < r_min < r_max, got [{min}, {max}]"
            )));
        }
        Ok(RDomain { min, max })
    }

    pub fn contains(&self, r: f64) -> bool {
        let slack = 1e-12 * self.max;
        r >= self.min - slack && r <= self.max + slack
    }
}

/// `count` equally spaced radii covering the domain, endpoints included.
pub fn r_grid(domain: RDomain, count: usize) -> Vec<f64> {
    linspace(domain.min, domain.max, count)
}

/// `count` equally spaced values of `s` symmetric about zero, strictly
/// inside `(-r, r)` by the relative margin [`S_EDGE_MARGIN`].
pub fn s_grid(r: f64, count: usize) -> Vec<f64> {
    let edge = r * (1.0 - S_EDGE_MARGIN);
    let mut v = linspace(-edge, edge, count);
    // Exact antisymmetry so that even/odd splits are clean.
    let n = v.len();
    for k in 0..n / 2 {
        let m = 0.5 * (v[n - 1 - k] - v[k]);
        v[k] = -m;
        v[n - 1 - k] = m;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
    v
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..count)
            .map(|k| {
                let t = k as f64 / (count - 1) as f64;
                a + (b - a) * t
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_grid_is_symmetric_and_interior() {
        let g = s_grid(0.5, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[3], 0.0);
        for k in 0..7 {
            assert_eq!(g[k], -g[6 - k]);
            assert!(g[k].abs() < 0.5);
        }
        assert!((g[6] - 0.5 * (1.0 - S_EDGE_MARGIN)).abs() < 1e-15);
    }

    #[test]
    fn domain_rejects_zero() {
        assert!(RDomain::new(0.0, 1.0).is_err());
        assert!(RDomain::new(0.5, 0.4).is_err());
        assert!(RDomain::new(1e-3, 1.0).is_ok());
    }
}
