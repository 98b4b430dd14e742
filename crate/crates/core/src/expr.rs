//! Arithmetic expression language for nonlinearities, densities, and forcing
//! terms.
//!
//! Grammar (loosest to tightest): `+ -`, `* /`, unary `-`, then `^`
//! (right-associative), so `2^3^2 = 512` and `-2^2 = -4`. Identifiers are
//! either variables from the caller-declared set or one of the functions
//! `exp log sqrt abs sin cos pow gamma`.

use crate::error::{Error, Result};
use crate::special;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Pow,
    Gamma,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "pow" => Func::Pow,
            "gamma" => Func::Gamma,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Parsed expression tree; immutable and cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Number(f64),
    Variable(String),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Vec<Expression>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Token, usize)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Token::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Token::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Token::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Token::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Token::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Token::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Token::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Token::Comma
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                other => {
                    return Err(Error::Syntax {
                        position: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Token> {
        let mut end = self.pos;
        let bytes = self.src;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        // optional exponent
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut cursor = end + 1;
            if cursor < bytes.len() && (bytes[cursor] == b'+' || bytes[cursor] == b'-') {
                cursor += 1;
            }
            if cursor < bytes.len() && bytes[cursor].is_ascii_digit() {
                end = cursor;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&bytes[start..end]).unwrap();
        let value = text.parse::<f64>().map_err(|_| Error::Syntax {
            position: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = end;
        Ok(Token::Number(value))
    }

    fn ident(&mut self, start: usize) -> Token {
        let bytes = self.src;
        let mut end = self.pos;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        self.pos = end;
        Token::Ident(std::str::from_utf8(&bytes[start..end]).unwrap().to_string())
    }
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    index: usize,
    end: usize,
    allowed_vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.index)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.index).map(|(t, _)| t.clone());
        self.index += 1;
        t
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.index += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.position(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expression(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.index += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.index += 1;
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.peek() == Some(&Token::Minus) {
            self.index += 1;
            Ok(Expression::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.index += 1;
            // right-associative; the exponent may itself carry a unary minus
            let exponent = self.unary()?;
            Ok(Expression::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expression> {
        let position = self.position();
        match self.advance() {
            Some(Token::Number(v)) => Ok(Expression::Number(v)),
            Some(Token::LParen) => {
                let inner = self.expression()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or(Error::UnknownFunction {
                        name: name.clone(),
                        position,
                    })?;
                    self.index += 1;
                    let mut args = vec![self.expression()?];
                    while self.peek() == Some(&Token::Comma) {
                        self.index += 1;
                        args.push(self.expression()?);
                    }
                    self.expect(&Token::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(Error::Syntax {
                            position,
                            message: format!(
                                "{} takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    Ok(Expression::Call(func, args))
                } else if self.allowed_vars.contains(&name.as_str()) {
                    Ok(Expression::Variable(name))
                } else {
                    Err(Error::UnknownVariable { name, position })
                }
            }
            _ => Err(Error::Syntax {
                position,
                message: "expected an operand".into(),
            }),
        }
    }
}

/// Parse `source` into an expression; identifiers outside `allowed_vars` are
/// rejected.
pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expression> {
    let tokens = Lexer::tokenize(source)?;
    if tokens.is_empty() {
        return Err(Error::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        index: 0,
        end: source.len(),
        allowed_vars,
    };
    let expr = parser.expression()?;
    if parser.index < parser.tokens.len() {
        return Err(Error::Syntax {
            position: parser.position(),
            message: "trailing input after expression".into(),
        });
    }
    Ok(expr)
}

fn real_pow(base: f64, exponent: f64) -> Result<f64> {
    if base < 0.0 {
        if exponent.fract() == 0.0 && exponent.abs() < 9.0e15 {
            let magnitude = (-base).powf(exponent);
            let odd = (exponent as i64).rem_euclid(2) == 1;
            Ok(if odd { -magnitude } else { magnitude })
        } else {
            Err(Error::EvalDomain {
                op: "^",
                detail: format!("negative base {base} with non-integer exponent {exponent}"),
            })
        }
    } else {
        Ok(base.powf(exponent))
    }
}

/// Evaluate with the given variable bindings. IEEE semantics except that any
/// non-finite result is reported as an error.
pub fn evaluate(expr: &Expression, bindings: &[(&str, f64)]) -> Result<f64> {
    let v = eval_inner(expr, bindings)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteResult)
    }
}

fn eval_inner(expr: &Expression, bindings: &[(&str, f64)]) -> Result<f64> {
    match expr {
        Expression::Number(v) => Ok(*v),
        Expression::Variable(name) => bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::MissingBinding(name.clone())),
        Expression::Neg(inner) => Ok(-eval_inner(inner, bindings)?),
        Expression::Binary(op, lhs, rhs) => {
            let a = eval_inner(lhs, bindings)?;
            let b = eval_inner(rhs, bindings)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => Ok(a / b),
                BinOp::Pow => real_pow(a, b),
            }
        }
        Expression::Call(func, args) => {
            let a = eval_inner(&args[0], bindings)?;
            match func {
                Func::Exp => Ok(a.exp()),
                Func::Log => {
                    if a <= 0.0 {
                        Err(Error::EvalDomain {
                            op: "log",
                            detail: format!("argument {a}"),
                        })
                    } else {
                        Ok(a.ln())
                    }
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        Err(Error::EvalDomain {
                            op: "sqrt",
                            detail: format!("argument {a}"),
                        })
                    } else {
                        Ok(a.sqrt())
                    }
                }
                Func::Abs => Ok(a.abs()),
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Gamma => Ok(special::gamma(a)),
                Func::Pow => {
                    let b = eval_inner(&args[1], bindings)?;
                    real_pow(a, b)
                }
            }
        }
    }
}

/// Exact set of variables appearing in the expression.
pub fn free_vars(expr: &Expression) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_vars(expr, &mut out);
    out
}

fn collect_vars(expr: &Expression, out: &mut BTreeSet<String>) {
    match expr {
        Expression::Number(_) => {}
        Expression::Variable(name) => {
            out.insert(name.clone());
        }
        Expression::Neg(inner) => collect_vars(inner, out),
        Expression::Binary(_, lhs, rhs) => {
            collect_vars(lhs, out);
            collect_vars(rhs, out);
        }
        Expression::Call(_, args) => {
            for a in args {
                collect_vars(a, out);
            }
        }
    }
}

// Fully parenthesized so that re-parsing reproduces the tree (and therefore
// the exact evaluation order).
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(v) => write!(f, "{v:?}"),
            Expression::Variable(name) => write!(f, "{name}"),
            Expression::Neg(inner) => write!(f, "(-{inner})"),
            Expression::Binary(op, lhs, rhs) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({lhs} {sym} {rhs})")
            }
            Expression::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TU: &[&str] = &["t", "u"];

    #[test]
    fn parses_decreasing_exponential_nonlinearity() {
        let e = parse("1 - t + exp(t/4 - u)", TU).unwrap();
        let vars = free_vars(&e);
        assert!(vars.contains("t") && vars.contains("u") && vars.len() == 2);
        let at_origin = evaluate(&e, &[("t", 0.0), ("u", 0.0)]).unwrap();
        assert!((at_origin - 2.0).abs() < 1e-15);
        let at_t1 = evaluate(&e, &[("t", 1.0), ("u", 0.0)]).unwrap();
        assert!((at_t1 - 0.25f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn caret_is_right_associative() {
        let e = parse("2^3^2", &[]).unwrap();
        assert_eq!(evaluate(&e, &[]).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_caret() {
        let e = parse("-2^2", &[]).unwrap();
        assert_eq!(evaluate(&e, &[]).unwrap(), -4.0);
        let e = parse("2^-1", &[]).unwrap();
        assert_eq!(evaluate(&e, &[]).unwrap(), 0.5);
    }

    #[test]
    fn dangling_operator_position() {
        match parse("1 +", &[]) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn constant_with_empty_bindings() {
        let e = parse("3", &[]).unwrap();
        assert_eq!(evaluate(&e, &[]).unwrap(), 3.0);
        assert!(free_vars(&e).is_empty());
        assert_eq!(free_vars(&parse("exp(s)", &["s"]).unwrap()).len(), 1);
    }

    #[test]
    fn unknown_identifiers_rejected() {
        assert!(matches!(
            parse("y + 1", TU),
            Err(Error::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("foo(t)", TU),
            Err(Error::UnknownFunction { .. })
        ));
    }

    #[test]
    fn missing_binding_reported() {
        let e = parse("t + u", TU).unwrap();
        assert!(matches!(
            evaluate(&e, &[("t", 1.0)]),
            Err(Error::MissingBinding(_))
        ));
    }

    #[test]
    fn domain_errors() {
        let e = parse("log(t)", &["t"]).unwrap();
        assert!(matches!(
            evaluate(&e, &[("t", -1.0)]),
            Err(Error::EvalDomain { .. })
        ));
        let e = parse("sqrt(t)", &["t"]).unwrap();
        assert!(matches!(
            evaluate(&e, &[("t", -1.0)]),
            Err(Error::EvalDomain { .. })
        ));
        let e = parse("t ^ 0.5", &["t"]).unwrap();
        assert!(matches!(
            evaluate(&e, &[("t", -2.0)]),
            Err(Error::EvalDomain { .. })
        ));
        let e = parse("1 / t", &["t"]).unwrap();
        assert!(matches!(
            evaluate(&e, &[("t", 0.0)]),
            Err(Error::NonFiniteResult)
        ));
    }

    #[test]
    fn negative_base_integer_exponent() {
        let e = parse("t ^ 3", &["t"]).unwrap();
        assert_eq!(evaluate(&e, &[("t", -2.0)]).unwrap(), -8.0);
        let e = parse("t ^ 2", &["t"]).unwrap();
        assert_eq!(evaluate(&e, &[("t", -2.0)]).unwrap(), 4.0);
    }

    #[test]
    fn gamma_builtin() {
        let e = parse("gamma(t + 1)", &["t"]).unwrap();
        let v = evaluate(&e, &[("t", 4.0)]).unwrap();
        assert!((v - 24.0).abs() < 1e-12);
    }

    #[test]
    fn display_reparses_to_same_tree() {
        let sources = [
            "1 - t + exp(t/4 - u)",
            "2^3^2",
            "-t * (u + 1) / 3",
            "pow(t, 2) - abs(u)",
        ];
        for src in sources {
            let e = parse(src, TU).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed, TU).unwrap();
            assert_eq!(e, reparsed, "round trip failed for `{src}` -> `{printed}`");
        }
    }
}
