use serde::{Deserialize, Serialize};

use super::jet::Jet3;
use super::parse::parse_expression;
use super::tree::{ExpressionTree, Var};
use crate::error::{Error, Result};

/// Samples of a function and its derivative on increasing nodes,
/// interpolated by piecewise cubic Hermite polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub deriv: Vec<f64>,
}

impl HermiteTable {
    pub fn new(r: Vec<f64>, value: Vec<f64>, deriv: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || value.len() != r.len() || deriv.len() != r.len() {
            return Err(Error::invalid(
                "hermite table needs >= 2 nodes and matching column lengths",
            ));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "hermite table nodes must be strictly increasing",
            ));
        }
        if value.iter().chain(deriv.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("hermite table contains non-finite samples"));
        }
        Ok(HermiteTable { r, value, deriv })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], self.r[self.r.len() - 1])
    }

    /// Value and first three derivatives at `x`.
    pub fn derivatives(&self, x: f64) -> Result<[f64; 4]> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (1.0 + hi.abs());
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::domain("table", x));
        }
        let k = match self.r.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.r.len() - 2),
        };
        let (x0, x1) = (self.r[k], self.r[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.value[k], self.value[k + 1]);
        let (m0, m1) = (self.deriv[k] * h, self.deriv[k + 1] * h);
        // Cubic in t: y0 + m0 t + a t^2 + b t^3
        let a = 3.0 * (y1 - y0) - 2.0 * m0 - m1;
        let b = 2.0 * (y0 - y1) + m0 + m1;
        let v = y0 + t * (m0 + t * (a + t * b));
        let d1 = (m0 + t * (2.0 * a + 3.0 * t * b)) / h;
        let d2 = (2.0 * a + 6.0 * t * b) / (h * h);
        let d3 = 6.0 * b / (h * h * h);
        Ok([v, d1, d2, d3])
    }
}

/// A function of `r` alone: a parsed formula or a sampled table.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFunction {
    Expr(ExpressionTree),
    Table(HermiteTable),
}

impl ScalarFunction {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(ScalarFunction::Expr(parse_expression(text, &[Var::R])?))
    }

    pub fn constant(v: f64) -> Self {
        ScalarFunction::Expr(
            ExpressionTree::from_node(super::tree::Node::Const(v), &[Var::R])
                .expect("constants reference no variables"),
        )
    }

    pub fn jet(&self, r: f64) -> Result<Jet3> {
        match self {
            ScalarFunction::Expr(t) => t.eval_jet(r, 0.0),
            ScalarFunction::Table(tab) => Ok(Jet3::from_r_derivatives(tab.derivatives(r)?)),
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        match self {
            ScalarFunction::Expr(t) => t.eval(r, 0.0, 0.0),
            ScalarFunction::Table(tab) => Ok(tab.derivatives(r)?[0]),
        }
    }

    /// `[f, f', f'', f''']` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<[f64; 4]> {
        let j = self.jet(r)?;
        Ok([
            j.partial(0, 0),
            j.partial(1, 0),
            j.partial(2, 0),
            j.partial(3, 0),
        ])
    }

    pub fn description(&self) -> String {
        match self {
            ScalarFunction::Expr(t) => t.to_string(),
            ScalarFunction::Table(tab) => {
                let (a, b) = tab.range();
                format!("table[{} nodes on [{a}, {b}]]", tab.r.len())
            }
        }
    }
}

/// Value followed by the first `order` derivatives (`order <= 2`).
pub fn eval_scalar(func: &ScalarFunction, r: f64, order: usize) -> Result<Vec<f64>> {
    if order > 2 {
        return Err(Error::invalid(
            "eval_scalar supports derivative order 0, 1 or 2",
        ));
    }
    let d = func.derivatives(r)?;
    if d[..=order].iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(func.description(), d[0]));
    }
    Ok(d[..=order].to_vec())
}
