//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' signed_number)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-s^2` is `-(s^2)`. A minus sign
//! directly in front of a numeric literal (not followed by `^`) folds into a
//! negative constant.

use super::tree::{Exponent, ExpressionTree, Func, Node, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn syntax(pos: usize, expected: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        expected: expected.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, "a numeric literal"))?;
                if !v.is_finite() {
                    return Err(syntax(start, "a finite numeric literal"));
                }
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => return Err(syntax(start, format!("a token, found `{c}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    allowed: &'a [Var],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("{}, found {}", describe(&want), describe(self.peek())),
            ))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Caret {
                    self.bump();
                    return Ok(Node::Const(-v));
                }
            }
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1.0
            }
            Tok::Plus => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        match self.bump() {
            Tok::Num(v) => {
                let p = Exponent::new(sign * v)
                    .ok_or_else(|| syntax(pos, "an integer or half-integer exponent"))?;
                Ok(Node::Pow(Box::new(base), p))
            }
            other => Err(syntax(
                pos,
                format!("a numeric exponent, found {}", describe(&other)),
            )),
        }
    }

    fn base(&mut self) -> Result<Node> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                match Var::from_name(&name) {
                    Some(v) if self.allowed.contains(&v) => Ok(Node::Var(v)),
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
            other => Err(syntax(
                pos,
                format!("an operand, found {}", describe(&other)),
            )),
        }
    }
}

/// Parses `text` into a tree that references only `allowed` variables.
pub fn parse_expression(text: &str, allowed: &[Var]) -> Result<ExpressionTree> {
    if text.trim().is_empty() {
        return Err(syntax(0, "an expression"));
    }
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        allowed,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.pos(),
            format!("an operator or end of input, found {}", describe(p.peek())),
        ));
    }
    Ok(ExpressionTree::new(root, allowed.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RS: &[Var] = &[Var::R, Var::S];

    fn c(v: f64) -> Box<Node> {
        Box::new(Node::Const(v))
    }

    fn var(v: Var) -> Box<Node> {
        Box::new(Node::Var(v))
    }

    #[test]
    fn randers_profile_shape() {
        let t = parse_expression("sqrt(1+s^2)+s", RS).unwrap();
        let expect = Node::Add(
            Box::new(Node::Call(
                Func::Sqrt,
                Box::new(Node::Add(
                    c(1.0),
                    Box::new(Node::Pow(var(Var::S), Exponent::new(2.0).unwrap())),
                )),
            )),
            var(Var::S),
        );
        assert_eq!(t.root(), &expect);
    }

    #[test]
    fn funk_profile_parses() {
        let t = parse_expression("(sqrt(1-r^2+s^2)+s)/(1-r^2)", RS).unwrap();
        assert!(matches!(t.root(), Node::Div(..)));
        assert_eq!(t.variables().len(), 2);
    }

    #[test]
    fn incomplete_expression_reports_end() {
        match parse_expression("s +", RS) {
            Err(Error::Syntax { pos, expected }) => {
                assert_eq!(pos, 3);
                assert!(expected.contains("end of input"), "{expected}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(
            parse_expression("q + 1", RS),
            Err(Error::UnknownIdentifier("q".into()))
        );
        assert_eq!(
            parse_expression("w", RS),
            Err(Error::UnknownIdentifier("w".into()))
        );
        assert!(parse_expression("w", &[Var::W]).is_ok());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let t = parse_expression("-s^2", RS).unwrap();
        assert!(matches!(t.root(), Node::Neg(inner) if matches!(**inner, Node::Pow(..))));
        let t = parse_expression("-2^2", RS).unwrap();
        assert_eq!(t.eval(0.0, 0.0, 0.0).unwrap(), -4.0);
        let t = parse_expression("2*-3", RS).unwrap();
        assert_eq!(t.eval(0.0, 0.0, 0.0).unwrap(), -6.0);
    }

    #[test]
    fn exponents_must_be_half_integers() {
        assert!(parse_expression("r^1.5", RS).is_ok());
        assert!(parse_expression("r^-2", RS).is_ok());
        assert!(matches!(
            parse_expression("r^0.3", RS),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("r^s", RS),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn function_requires_parenthesis() {
        assert!(matches!(
            parse_expression("sqrt r", RS),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("(r", RS),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("", RS),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn scientific_literals() {
        let t = parse_expression("1e-3*r + 2.5E+1", RS).unwrap();
        assert!((t.eval(2.0, 0.0, 0.0).unwrap() - 25.002).abs() < 1e-12);
    }
}
