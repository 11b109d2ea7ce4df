//! Closed-form expressions and their jets.
//!
//! Users describe metrics through short formulas in `r`, `s` (and `w` for
//! family profiles). Every formula is evaluated together with all mixed
//! partials up to total order three.

mod jet;
mod parse;
mod scalar;
mod tree;

pub use jet::{Jet3, DIVISION_FLOOR, INDEX_ORDER, ORDER};
pub use parse::parse_expression;
pub use scalar::{eval_scalar, HermiteTable, ScalarFunction};
pub use tree::{Exponent, ExpressionTree, Func, Node, Var};

use crate::error::Result;

/// Jet of `tree` at `(r, s)`.
pub fn eval_jet(tree: &ExpressionTree, r: f64, s: f64) -> Result<Jet3> {
    tree.eval_jet(r, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_in_s() {
        let t = parse_expression("s^2", &[Var::R, Var::S]).unwrap();
        let j = eval_jet(&t, 0.7, 0.3).unwrap();
        assert!((j.value() - 0.09).abs() < 1e-15);
        assert!((j.partial(0, 1) - 0.6).abs() < 1e-15);
        assert_eq!(j.partial(0, 2), 2.0);
        for a in 1..=3 {
            for b in 0..=3 - a {
                assert_eq!(j.partial(a, b), 0.0);
            }
        }
    }

    #[test]
    fn constant_seven() {
        let t = parse_expression("7", &[Var::R, Var::S]).unwrap();
        let j = eval_jet(&t, 0.4, -0.1).unwrap();
        assert_eq!(j.value(), 7.0);
        assert!(j.partials()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn domain_errors_name_the_node() {
        let t = parse_expression("sqrt(s - 1)", &[Var::R, Var::S]).unwrap();
        match eval_jet(&t, 0.5, 0.2) {
            Err(crate::Error::Domain { node, value }) => {
                assert_eq!(node, "sqrt");
                assert!((value + 0.8).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let t = parse_expression("1/(r - r)", &[Var::R, Var::S]).unwrap();
        assert!(eval_jet(&t, 0.5, 0.0).is_err());
    }
}
