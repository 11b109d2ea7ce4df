use std::fmt;

use super::jet::Jet3;
use crate::error::{Error, Result};

/// Variables an expression may reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    R,
    S,
    W,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::S => "s",
            Var::W => "w",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Var> {
        match name {
            "r" => Some(Var::R),
            "s" => Some(Var::S),
            "w" => Some(Var::W),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "atan" => Some(Func::Atan),
            _ => None,
        }
    }
}

/// Exponent of a power node: an integer or a half-integer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Option<Self> {
        if p.is_finite() && (2.0 * p).fract() == 0.0 {
            Some(Exponent(p))
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn as_integer(self) -> Option<i32> {
        (self.0.fract() == 0.0 && self.0.abs() < i32::MAX as f64).then_some(self.0 as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Exponent),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
            Node::Const(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }

    /// Evaluates the node with jets for every variable supplied by `bind`.
    pub fn eval_jet(&self, bind: &impl Fn(Var) -> Jet3) -> Result<Jet3> {
        Ok(match self {
            Node::Const(c) => Jet3::constant(*c),
            Node::Var(v) => bind(*v),
            Node::Neg(a) => -a.eval_jet(bind)?,
            Node::Add(a, b) => a.eval_jet(bind)? + b.eval_jet(bind)?,
            Node::Sub(a, b) => a.eval_jet(bind)? - b.eval_jet(bind)?,
            Node::Mul(a, b) => a.eval_jet(bind)? * b.eval_jet(bind)?,
            Node::Div(a, b) => {
                let num = a.eval_jet(bind)?;
                num.try_div(&b.eval_jet(bind)?)?
            }
            Node::Pow(a, p) => {
                let base = a.eval_jet(bind)?;
                match p.as_integer() {
                    Some(k) => base.powi(k)?,
                    None => base.powf(p.value())?,
                }
            }
            Node::Call(f, a) => {
                let x = a.eval_jet(bind)?;
                match f {
                    Func::Sqrt => x.sqrt()?,
                    Func::Exp => x.exp(),
                    Func::Log => x.ln()?,
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Atan => x.atan(),
                }
            }
        })
    }

    /// Plain `f64` evaluation with the same domain checks as [`Node::eval_jet`].
    pub fn eval(&self, bind: &impl Fn(Var) -> f64) -> Result<f64> {
        Ok(match self {
            Node::Const(c) => *c,
            Node::Var(v) => bind(*v),
            Node::Neg(a) => -a.eval(bind)?,
            Node::Add(a, b) => a.eval(bind)? + b.eval(bind)?,
            Node::Sub(a, b) => a.eval(bind)? - b.eval(bind)?,
            Node::Mul(a, b) => a.eval(bind)? * b.eval(bind)?,
            Node::Div(a, b) => {
                let d = b.eval(bind)?;
                if d.abs() <= super::jet::DIVISION_FLOOR {
                    return Err(Error::domain("divide", d));
                }
                a.eval(bind)? / d
            }
            Node::Pow(a, p) => {
                let base = a.eval(bind)?;
                match p.as_integer() {
                    Some(k) => {
                        if k < 0 && base.abs() <= super::jet::DIVISION_FLOOR {
                            return Err(Error::domain("power", base));
                        }
                        base.powi(k)
                    }
                    None => {
                        if base <= 0.0 {
                            return Err(Error::domain("power", base));
                        }
                        base.powf(p.value())
                    }
                }
            }
            Node::Call(f, a) => {
                let x = a.eval(bind)?;
                match f {
                    Func::Sqrt if x <= 0.0 => return Err(Error::domain("sqrt", x)),
                    Func::Log if x <= 0.0 => return Err(Error::domain("log", x)),
                    Func::Sqrt => x.sqrt(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Atan => x.atan(),
                }
            }
        })
    }

    pub fn visit_vars(&self, out: &mut Vec<Var>) {
        match self {
            Node::Const(_) => {}
            Node::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.visit_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_vars(out);
                b.visit_vars(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.depth(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Node, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Node::Var(v) => f.write_str(v.name()),
            Node::Neg(a) => {
                f.write_str("-")?;
                // `-2` would reparse as a negative literal.
                let min = if matches!(**a, Node::Const(_)) { 6 } else { 3 };
                write_child(f, a, min)
            }
            Node::Add(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" + ")?;
                write_child(f, b, 2)
            }
            Node::Sub(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" - ")?;
                write_child(f, b, 2)
            }
            Node::Mul(a, b) => {
                write_child(f, a, 2)?;
                f.write_str("*")?;
                write_child(f, b, 3)
            }
            Node::Div(a, b) => {
                write_child(f, a, 2)?;
                f.write_str("/")?;
                write_child(f, b, 3)
            }
            Node::Pow(a, p) => {
                write_child(f, a, 5)?;
                write!(f, "^{}", p.value())
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed closed-form scalar formula.
///
/// Trees are immutable after parsing and can be shared freely across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpressionTree {
    root: Node,
    allowed: Vec<Var>,
}

impl ExpressionTree {
    pub(crate) fn new(root: Node, allowed: Vec<Var>) -> Self {
        ExpressionTree { root, allowed }
    }

    /// Wraps an existing node; fails if it references a variable outside `allowed`.
    pub fn from_node(root: Node, allowed: &[Var]) -> Result<Self> {
        let mut used = Vec::new();
        root.visit_vars(&mut used);
        if let Some(v) = used.iter().find(|v| !allowed.contains(v)) {
            return Err(Error::UnknownIdentifier(v.name().to_string()));
        }
        Ok(ExpressionTree::new(root, allowed.to_vec()))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn allowed_variables(&self) -> &[Var] {
        &self.allowed
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut v = Vec::new();
        self.root.visit_vars(&mut v);
        v
    }

    /// Jet of the expression at `(r, s)`; `w` is not bound here.
    pub fn eval_jet(&self, r: f64, s: f64) -> Result<Jet3> {
        let jr = Jet3::var_r(r);
        let js = Jet3::var_s(s);
        let jet = self.root.eval_jet(&|v| match v {
            Var::R => jr,
            Var::S => js,
            Var::W => Jet3::constant(f64::NAN),
        })?;
        if !jet.is_finite() {
            return Err(Error::domain(self.to_string(), jet.value()));
        }
        Ok(jet)
    }

    /// Jet with caller-supplied bindings for every variable.
    pub fn eval_jet_with(&self, bind: impl Fn(Var) -> Jet3) -> Result<Jet3> {
        let jet = self.root.eval_jet(&bind)?;
        if !jet.is_finite() {
            return Err(Error::domain(self.to_string(), jet.value()));
        }
        Ok(jet)
    }

    pub fn eval(&self, r: f64, s: f64, w: f64) -> Result<f64> {
        self.root.eval(&|v| match v {
            Var::R => r,
            Var::S => s,
            Var::W => w,
        })
    }
}

impl fmt::Display for ExpressionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}
