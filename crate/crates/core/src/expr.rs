//! Tiny expression language for coefficient and initial-data fields:
//! real arithmetic over the variable `x` with sin, cos, exp, pi, and the
//! usual precedence (unary minus, right-associative ^, then * /, then + -).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

/// A parsed expression in the variable x.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    source: String,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            // U+2212 (minus sign) sneaks in from copy-pasted formulas
            chars: source.replace('\u{2212}', "-").chars().collect(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            root,
            source: source.to_string(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_node(&self.root, x)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn eval_node(node: &Node, x: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var => x,
        Node::Neg(a) => -eval_node(a, x),
        Node::Add(a, b) => eval_node(a, x) + eval_node(b, x),
        Node::Sub(a, b) => eval_node(a, x) - eval_node(b, x),
        Node::Mul(a, b) => eval_node(a, x) * eval_node(b, x),
        Node::Div(a, b) => eval_node(a, x) / eval_node(b, x),
        Node::Pow(a, b) => eval_node(a, x).powf(eval_node(b, x)),
        Node::Sin(a) => eval_node(a, x).sin(),
        Node::Cos(a) => eval_node(a, x).cos(),
        Node::Exp(a) => eval_node(a, x).exp(),
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        Error::Expr(format!("{msg} at position {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            // -x^2 parses as -(x^2)
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat('^') {
            // right-associative: 2^3^2 = 2^(3^2)
            let exponent = self.unary()?;
            Ok(Node::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == '.')
        {
            self.pos += 1;
        }
        // scientific suffix: e or E, optional sign, digits
        if self
            .chars
            .get(self.pos)
            .is_some_and(|c| *c == 'e' || *c == 'E')
        {
            let mark = self.pos;
            self.pos += 1;
            if self
                .chars
                .get(self.pos)
                .is_some_and(|c| *c == '+' || *c == '-')
            {
                self.pos += 1;
            }
            if self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| Error::Expr(format!("invalid number '{text}' at position {start}")))
    }

    fn name(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.as_str() {
            "x" => Ok(Node::Var),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "sin" | "cos" | "exp" => {
                if !self.eat('(') {
                    return Err(self.error(&format!("expected '(' after {text}")));
                }
                let arg = Box::new(self.expr()?);
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(match text.as_str() {
                    "sin" => Node::Sin(arg),
                    "cos" => Node::Cos(arg),
                    _ => Node::Exp(arg),
                })
            }
            _ => Err(Error::Expr(format!(
                "unknown name '{text}' at position {start}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: f64) -> f64 {
        Expression::parse(src).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("2+3*4", 0.0), 14.0);
        assert_eq!(eval("2*3^2", 0.0), 18.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("(2+3)*4", 0.0), 20.0);
        assert_eq!(eval("6/3/2", 0.0), 1.0);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
    }

    #[test]
    fn functions_constants_and_literals() {
        assert!((eval("sin(x)", 1.2) - 1.2f64.sin()).abs() < 1e-15);
        assert!((eval("exp(cos(x)-1)", 0.7) - (0.7f64.cos() - 1.0).exp()).abs() < 1e-15);
        assert!((eval("pi", 0.0) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(eval("1.5e-3", 0.0), 1.5e-3);
        assert_eq!(eval("2E2", 0.0), 200.0);
        assert_eq!(eval(".5", 0.0), 0.5);
        // 'e' not followed by digits is not a scientific suffix
        assert!(Expression::parse("2e").is_err());
    }

    #[test]
    fn unicode_minus_is_accepted() {
        assert_eq!(eval("1 \u{2212} x", 0.25), 0.75);
    }

    #[test]
    fn bad_input_is_rejected_with_position() {
        for src in ["", "x +", "sin", "sin x", "(1+2", "1 + y", "2 ** 3", "1..2"] {
            let err = Expression::parse(src).unwrap_err();
            match err {
                Error::Expr(msg) => assert!(msg.contains("position"), "{src}: {msg}"),
                other => panic!("{src}: unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn source_round_trips() {
        let e = Expression::parse("1 + 0.5*sin(x)").unwrap();
        assert_eq!(e.source(), "1 + 0.5*sin(x)");
    }
}
