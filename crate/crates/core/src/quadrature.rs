//! Gauss–Legendre rules with doubling refinement.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn try_integrate(
        &self,
        a: f64,
        b: f64,
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Default starting node count.
pub const DEFAULT_NODES: usize = 64;
/// Largest node count reached by doubling.
pub const MAX_NODES: usize = 1024;
/// Successive-refinement agreement required for convergence.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// A Gauss–Legendre rule on `[0, π]` with optional doubling refinement.
///
/// Cloning is cheap; the node tables are shared.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    levels: Arc<Vec<GaussLegendre>>,
    adaptive: bool,
    tolerance: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(DEFAULT_NODES, true)
    }
}

impl QuadratureRule {
    /// Rule starting at `nodes` points; when `adaptive`, doubles up to
    /// [`MAX_NODES`] until successive values agree.
    pub fn new(nodes: usize, adaptive: bool) -> Self {
        let nodes = nodes.max(2);
        let mut levels = vec![GaussLegendre::new(nodes)];
        if adaptive {
            let mut n = nodes * 2;
            while n <= MAX_NODES.max(nodes) {
                levels.push(GaussLegendre::new(n));
                n *= 2;
            }
        }
        QuadratureRule {
            levels: Arc::new(levels),
            adaptive,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn node_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_adaptive(&self) -> bool {
        self.adaptive
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn base(&self) -> &GaussLegendre {
        &self.levels[0]
    }

    /// The base rule followed by its refinements (only the base when not adaptive).
    pub fn levels(&self) -> &[GaussLegendre] {
        &self.levels
    }

    /// Integrates a vector-valued integrand over `[a, b]`, refining until
    /// every component agrees between successive levels.
    pub fn integrate_many<const K: usize>(
        &self,
        a: f64,
        b: f64,
        at: f64,
        f: impl Fn(f64) -> Result<[f64; K]>,
    ) -> Result<[f64; K]> {
        let eval = |rule: &GaussLegendre| -> Result<[f64; K]> {
            let mut acc = [0.0; K];
            for (x, w) in rule.mapped(a, b) {
                let v = f(x)?;
                for k in 0..K {
                    acc[k] += w * v[k];
                }
            }
            Ok(acc)
        };
        let mut prev = eval(&self.levels[0])?;
        if !self.adaptive {
            return Ok(prev);
        }
        let mut last_gap = f64::INFINITY;
        for rule in self.levels.iter().skip(1) {
            let next = eval(rule)?;
            last_gap = (0..K)
                .map(|k| (next[k] - prev[k]).abs() / prev[k].abs().max(1.0))
                .fold(0.0, f64::max);
            if last_gap <= self.tolerance {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature {
            r: at,
            detail: format!(
                "successive Gauss-Legendre values still differ by {last_gap:e} at {} nodes",
                self.levels.last().map_or(0, |l| l.len())
            ),
        })
    }

    /// Scalar convenience wrapper around [`QuadratureRule::integrate_many`].
    pub fn integrate(
        &self,
        a: f64,
        b: f64,
        at: f64,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<f64> {
        Ok(self.integrate_many(a, b, at, |x| Ok([f(x)?]))?[0])
    }
}

/// `∫_0^π sin^k t dt` in closed form (Wallis).
pub fn sine_power_integral(k: u32) -> f64 {
    match k {
        0 => PI,
        1 => 2.0,
        _ => (k as f64 - 1.0) / k as f64 * sine_power_integral(k - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 64, 1024] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights().iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_of_degree_2n_minus_1() {
        let g = GaussLegendre::new(5);
        let v = g.integrate(0.0, 2.0, |x| x.powi(9));
        assert_relative_eq!(v, 2f64.powi(10) / 10.0, max_relative = 1e-14);
    }

    #[test]
    fn sine_powers_match_wallis() {
        for nodes in [64, 128] {
            let rule = QuadratureRule::new(nodes, false);
            for n in 2..=8u32 {
                let k = n - 2;
                let v = rule.base().integrate(0.0, PI, |t| t.sin().powi(k as i32));
                assert!(
                    (v - sine_power_integral(k)).abs() <= 1e-12,
                    "n={n} N={nodes}: {v} vs {}",
                    sine_power_integral(k)
                );
            }
        }
    }

    #[test]
    fn refinement_converges_and_fails_loudly() {
        let rule = QuadratureRule::default();
        let v = rule.integrate(0.0, PI, 0.0, |t| Ok(t.cos().exp())).unwrap();
        assert_relative_eq!(v, PI * 1.2660658777520082, max_relative = 1e-13);
        let err = rule.integrate(0.0, 1.0, 0.5, |t| Ok((200.0 * t).sin().abs()));
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }
}
