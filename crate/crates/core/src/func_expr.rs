//! Small arithmetic expression language for scalar functions on R^n.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? integer)?
//! primary := number | xN | func '(' expr (',' expr)* ')' | 'dot' '(' '[' list ']' ')' | '(' expr ')'
//! ```
//!
//! `-x1^2` is therefore `-(x1^2)`. Variables are one-based (`x1 .. xn`).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier '{name}' at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable x{index} at byte {pos} exceeds arity {arity}")]
    ArityOverflow { pos: usize, index: usize, arity: usize },
    #[error("domain error in '{subexpr}' (path {path:?}): {detail}")]
    Domain { path: Vec<usize>, subexpr: String, detail: String },
    #[error("expected {expected} inputs, got {got}")]
    InputLength { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Max,
    Min,
    Exp,
    Sqrt,
    Floor,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Max => "max",
            Func::Min => "min",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Floor => "floor",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "max" => Func::Max,
            "min" => Func::Min,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "floor" => Func::Floor,
            _ => return None,
        })
    }

    fn unary(self) -> bool {
        !matches!(self, Func::Max | Func::Min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
    /// Inner product with a constant vector.
    Dot(Vec<f64>),
}

/// Coarse curvature class used to decide whether an expression is known convex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    Constant,
    Affine,
    Convex,
    Concave,
    Unknown,
}

impl Curvature {
    fn negate(self) -> Self {
        match self {
            Curvature::Convex => Curvature::Concave,
            Curvature::Concave => Curvature::Convex,
            c => c,
        }
    }

    fn add(self, other: Self) -> Self {
        use Curvature::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (Constant, c) | (c, Constant) => c,
            (Affine, c) | (c, Affine) => c,
            (Convex, Convex) => Convex,
            (Concave, Concave) => Concave,
            _ => Unknown,
        }
    }

    fn is_convex(self) -> bool {
        matches!(self, Curvature::Constant | Curvature::Affine | Curvature::Convex)
    }

    fn is_concave(self) -> bool {
        matches!(self, Curvature::Constant | Curvature::Affine | Curvature::Concave)
    }
}

impl Expr {
    /// Evaluate at `x`, reporting the failing subexpression on domain errors.
    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        let mut path = Vec::new();
        self.eval_at(x, &mut path)
    }

    fn eval_at(&self, x: &[f64], path: &mut Vec<usize>) -> Result<f64, ExprError> {
        let child = |e: &Expr, i: usize, path: &mut Vec<usize>| {
            path.push(i);
            let r = e.eval_at(x, path);
            if r.is_ok() {
                path.pop();
            }
            r
        };
        let domain = |path: &Vec<usize>, e: &Expr, detail: &str| ExprError::Domain {
            path: path.clone(),
            subexpr: e.to_string(),
            detail: detail.to_string(),
        };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(*i).ok_or(ExprError::InputLength {
                expected: i + 1,
                got: x.len(),
            })?,
            Expr::Neg(a) => -child(a, 0, path)?,
            Expr::Add(a, b) => child(a, 0, path)? + child(b, 1, path)?,
            Expr::Sub(a, b) => child(a, 0, path)? - child(b, 1, path)?,
            Expr::Mul(a, b) => child(a, 0, path)? * child(b, 1, path)?,
            Expr::Div(a, b) => {
                let num = child(a, 0, path)?;
                let den = child(b, 1, path)?;
                if den == 0.0 {
                    return Err(domain(path, self, "division by zero"));
                }
                num / den
            }
            Expr::Pow(a, k) => {
                let base = child(a, 0, path)?;
                if base == 0.0 && *k < 0 {
                    return Err(domain(path, self, "zero raised to a negative power"));
                }
                base.powi(*k)
            }
            Expr::Call(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    vals.push(child(a, i, path)?);
                }
                match f {
                    Func::Abs => vals[0].abs(),
                    Func::Exp => vals[0].exp(),
                    Func::Floor => vals[0].floor(),
                    Func::Sqrt => {
                        if vals[0] < 0.0 {
                            return Err(domain(path, self, "square root of a negative number"));
                        }
                        vals[0].sqrt()
                    }
                    Func::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    Func::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
                }
            }
            Expr::Dot(c) => {
                if x.len() < c.len() {
                    return Err(ExprError::InputLength {
                        expected: c.len(),
                        got: x.len(),
                    });
                }
                c.iter().zip(x).map(|(a, b)| a * b).sum()
            }
        })
    }

    /// Largest variable index referenced plus one (zero for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Dot(c) => c.len(),
            Expr::Neg(a) | Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }

    pub fn contains_floor(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Dot(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.contains_floor(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_floor() || b.contains_floor()
            }
            Expr::Call(f, args) => *f == Func::Floor || args.iter().any(Expr::contains_floor),
        }
    }

    fn constant_value(&self) -> Option<f64> {
        if self.arity() == 0 {
            self.eval(&[]).ok()
        } else {
            None
        }
    }

    /// Conservative curvature inference; `Unknown` means no guarantee.
    pub fn curvature(&self) -> Curvature {
        use Curvature::*;
        match self {
            Expr::Const(_) => Constant,
            Expr::Var(_) | Expr::Dot(_) => Affine,
            Expr::Neg(a) => a.curvature().negate(),
            Expr::Add(a, b) => a.curvature().add(b.curvature()),
            Expr::Sub(a, b) => a.curvature().add(b.curvature().negate()),
            Expr::Mul(a, b) => match (a.constant_value(), b.constant_value()) {
                (Some(_), Some(_)) => Constant,
                (Some(c), None) => scaled(b.curvature(), c),
                (None, Some(c)) => scaled(a.curvature(), c),
                (None, None) => Unknown,
            },
            Expr::Div(a, b) => match b.constant_value() {
                Some(c) if c != 0.0 => scaled(a.curvature(), 1.0 / c),
                _ => {
                    if a.constant_value().is_some() && b.constant_value().is_some() {
                        Constant
                    } else {
                        Unknown
                    }
                }
            },
            Expr::Pow(a, k) => {
                let c = a.curvature();
                match *k {
                    0 => Constant,
                    1 => c,
                    _ if c == Constant => Constant,
                    k if k > 0 && k % 2 == 0 && c == Affine => Convex,
                    _ => Unknown,
                }
            }
            Expr::Call(f, args) => {
                let cs: Vec<Curvature> = args.iter().map(Expr::curvature).collect();
                if cs.iter().all(|c| *c == Constant) {
                    return Constant;
                }
                match f {
                    Func::Abs if cs[0] == Affine => Convex,
                    Func::Max if cs.iter().all(|c| c.is_convex()) => Convex,
                    Func::Min if cs.iter().all(|c| c.is_concave()) => Concave,
                    Func::Exp if cs[0].is_convex() => Convex,
                    Func::Sqrt if cs[0].is_concave() => Concave,
                    _ => Unknown,
                }
            }
        }
    }

    pub fn is_known_convex(&self) -> bool {
        self.curvature().is_convex()
    }
}

fn scaled(c: Curvature, k: f64) -> Curvature {
    if k == 0.0 {
        Curvature::Constant
    } else if k > 0.0 {
        c
    } else {
        c.negate()
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{:?}", c)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesised form; parsing it returns the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_number(f, *c),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a}^{k})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Dot(c) => {
                write!(f, "dot([")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{:?}", v)?;
                }
                write!(f, "])")
            }
        }
    }
}

/// Parse `src` as a function of `arity` variables.
pub fn parse(src: &str, arity: usize) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        arity,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let negative = self.eat(b'-');
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected an integer exponent"));
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: i32 = text.parse().map_err(|_| ExprError::Syntax {
                pos: start,
                message: "exponent out of range".into(),
            })?;
            if self.peek() == Some(b'.') {
                return Err(self.error("only integer exponents are supported"));
            }
            return Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            let b = *p;
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
            *p > b
        };
        let mut p = self.pos;
        let int = digits(&mut p);
        let mut frac = false;
        if p < s.len() && s[p] == b'.' {
            p += 1;
            frac = digits(&mut p);
        }
        if !int && !frac {
            return Err(self.error("expected a number"));
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
            } else {
                self.pos = q;
                return Err(self.error("malformed exponent"));
            }
        }
        self.pos = p;
        let text = std::str::from_utf8(&s[start..p]).unwrap();
        text.parse().map_err(|_| ExprError::Syntax {
            pos: start,
            message: format!("bad number '{text}'"),
        })
    }

    fn signed_number(&mut self) -> Result<f64, ExprError> {
        let neg = self.eat(b'-');
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = rest.parse().map_err(|_| ExprError::UnknownIdentifier {
                    pos: start,
                    name: name.to_string(),
                })?;
                if index == 0 || index > self.arity {
                    return Err(ExprError::ArityOverflow {
                        pos: start,
                        index,
                        arity: self.arity,
                    });
                }
                return Ok(Expr::Var(index - 1));
            }
        }
        if name == "dot" {
            self.expect(b'(')?;
            self.expect(b'[')?;
            let mut coeffs = vec![self.signed_number()?];
            while self.eat(b',') {
                coeffs.push(self.signed_number()?);
            }
            self.expect(b']')?;
            self.expect(b')')?;
            if coeffs.len() > self.arity {
                return Err(ExprError::ArityOverflow {
                    pos: start,
                    index: coeffs.len(),
                    arity: self.arity,
                });
            }
            return Ok(Expr::Dot(coeffs));
        }
        let func = Func::lookup(name).ok_or_else(|| ExprError::UnknownIdentifier {
            pos: start,
            name: name.to_string(),
        })?;
        self.expect(b'(')?;
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        if func.unary() && args.len() != 1 {
            return Err(ExprError::Syntax {
                pos: start,
                message: format!("{} takes exactly one argument", func.name()),
            });
        }
        if !func.unary() && args.len() < 2 {
            return Err(ExprError::Syntax {
                pos: start,
                message: format!("{} takes at least two arguments", func.name()),
            });
        }
        Ok(Expr::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("-x1^2 + 3*x2", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 1.0]).unwrap(), -1.0);
        let e = parse("2 - 3 - 4", 0).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -5.0);
        let e = parse("8 / 2 / 2", 0).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 2.0);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse("x1 + x3", 2).unwrap_err(),
            ExprError::ArityOverflow { pos: 5, index: 3, arity: 2 }
        );
        assert!(matches!(parse("foo(x1)", 1), Err(ExprError::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(parse("x1 + ", 1), Err(ExprError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x1^1.5", 1), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + sqrt(x1 - 2)", 1).unwrap();
        match e.eval(&[1.0]) {
            Err(ExprError::Domain { path, subexpr, .. }) => {
                assert_eq!(path, vec![1]);
                assert_eq!(subexpr, "sqrt((x1 - 2.0))");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("1/x1", 1).unwrap().eval(&[0.0]), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn curvature_classes() {
        assert!(parse("x1^2 + abs(x2 - 1)", 2).unwrap().is_known_convex());
        assert!(parse("max(x1, -x2, 3) + exp(x1^2)", 2).unwrap().is_known_convex());
        assert!(!parse("floor(x1)", 1).unwrap().is_known_convex());
        assert!(parse("-sqrt(1 - abs(x1))", 1).unwrap().is_known_convex());
        assert!(!parse("sqrt(x1^2)", 1).unwrap().is_known_convex());
        assert!(!parse("x1*x2", 2).unwrap().is_known_convex());
        assert!(parse("floor(x1)", 1).unwrap().contains_floor());
    }

    #[test]
    fn dot_and_print() {
        let e = parse("dot([1, -2.5])", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 2.0]).unwrap(), -3.0);
        assert_eq!(parse(&e.to_string(), 2).unwrap(), e);
        let e = parse("-3 * x1 ^ -2", 1).unwrap();
        assert_eq!(parse(&e.to_string(), 1).unwrap(), e);
    }
}
