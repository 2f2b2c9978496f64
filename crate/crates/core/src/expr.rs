//! Scalar expressions over the chart coordinates `x1..x4`.
//!
//! Metric components and structure fields are written in a small expression
//! language. Expressions are parsed into an immutable [`Expr`] tree, can be
//! differentiated symbolically with respect to any coordinate, and evaluated
//! in double precision at a point.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right associative, constant exponent
//! atom    := number | x1..x4 | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// One of the four chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord(u8);

impl Coord {
    pub const X1: Coord = Coord(0);
    pub const X2: Coord = Coord(1);
    pub const X3: Coord = Coord(2);
    pub const X4: Coord = Coord(3);
    pub const ALL: [Coord; 4] = [Coord::X1, Coord::X2, Coord::X3, Coord::X4];

    /// Coordinate from its 1-based number, as in `x1..x4`.
    pub fn new(number: usize) -> Option<Coord> {
        (1..=4).contains(&number).then(|| Coord(number as u8 - 1))
    }

    /// Coordinate from a 0-based array axis.
    pub fn from_axis(axis: usize) -> Option<Coord> {
        (axis < 4).then_some(Coord(axis as u8))
    }

    /// 0-based array axis.
    pub fn axis(self) -> usize {
        self.0 as usize
    }

    /// 1-based coordinate number.
    pub fn number(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    fn from_function_name(name: &str) -> Option<UnaryOp> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => PREC_SUM,
            BinaryOp::Mul | BinaryOp::Div => PREC_PRODUCT,
        }
    }
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Expression tree. Children are reference counted so derivative trees can
/// share subexpressions, and the whole tree is `Send + Sync`.
///
/// The exponent of [`Expr::Pow`] is a plain constant, which keeps
/// differentiation total.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Coord),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("log of a non-positive value")]
    LogDomain,
    #[error("sqrt of a negative value")]
    SqrtDomain,
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite intermediate value")]
    NonFinite,
}

#[allow(clippy::should_implement_trait, clippy::redundant_guards)]
impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(coord: Coord) -> Expr {
        Expr::Var(coord)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// True when no coordinate occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    // Folding constructors. These collapse constant operands and the
    // neutral/absorbing cases x+0, x-0, x*1, x*0, x/1, 0/x.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Binary(BinaryOp::Add, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Binary(BinaryOp::Sub, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::Binary(BinaryOp::Mul, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Binary(BinaryOp::Div, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Unary(UnaryOp::Neg, inner) => Arc::unwrap_or_clone(inner),
            other => Expr::Unary(UnaryOp::Neg, Arc::new(other)),
        }
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        if exponent == 0.0 {
            return Expr::one();
        }
        if exponent == 1.0 {
            return base;
        }
        if let Some(x) = base.as_const() {
            let v = x.powf(exponent);
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        Expr::Pow(Arc::new(base), exponent)
    }

    pub fn apply(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(x) = a.as_const() {
            if let Ok(v) = eval_unary(op, x) {
                return Expr::Const(v);
            }
        }
        Expr::Unary(op, Arc::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::apply(UnaryOp::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::apply(UnaryOp::Cos, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::apply(UnaryOp::Exp, a)
    }

    pub fn log(a: Expr) -> Expr {
        Expr::apply(UnaryOp::Log, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::apply(UnaryOp::Sqrt, a)
    }

    /// Rebuilds the tree bottom-up through the folding constructors.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::apply(*op, a.fold()),
            Expr::Pow(a, n) => Expr::pow(a.fold(), *n),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.fold(), b.fold());
                match op {
                    BinaryOp::Add => Expr::add(a, b),
                    BinaryOp::Sub => Expr::sub(a, b),
                    BinaryOp::Mul => Expr::mul(a, b),
                    BinaryOp::Div => Expr::div(a, b),
                }
            }
        }
    }

    /// Exact partial derivative with respect to `coord`, constant-folded.
    pub fn differentiate(&self, coord: Coord) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(c) => Expr::Const(if *c == coord { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.differentiate(coord);
                if da.is_const(0.0) {
                    return Expr::zero();
                }
                let a = (**a).clone();
                let outer = match op {
                    UnaryOp::Neg => return Expr::neg(da),
                    UnaryOp::Sin => Expr::cos(a),
                    UnaryOp::Cos => Expr::neg(Expr::sin(a)),
                    UnaryOp::Exp => Expr::exp(a),
                    UnaryOp::Log => return Expr::div(da, a),
                    UnaryOp::Sqrt => return Expr::div(da, Expr::mul(Expr::Const(2.0), Expr::sqrt(a))),
                };
                Expr::mul(outer, da)
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(coord);
                if da.is_const(0.0) {
                    return Expr::zero();
                }
                let outer = Expr::mul(Expr::Const(*n), Expr::pow((**a).clone(), n - 1.0));
                Expr::mul(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(coord);
                let db = b.differentiate(coord);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        if db.is_const(0.0) {
                            return Expr::div(da, b);
                        }
                        let numer = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db));
                        Expr::div(numer, Expr::pow(b, 2.0))
                    }
                }
            }
        }
    }

    /// Value at `point`. Any domain violation or non-finite intermediate is
    /// an error, which callers treat as "reject this point".
    pub fn evaluate(&self, point: &[f64; 4]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(c) => point[c.axis()],
            Expr::Unary(op, a) => eval_unary(*op, a.evaluate(point)?)?,
            Expr::Pow(a, n) => a.evaluate(point)?.powf(*n),
            Expr::Binary(op, a, b) => {
                let x = a.evaluate(point)?;
                let y = b.evaluate(point)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x / y
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if c.is_sign_negative() => PREC_UNARY,
            Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
            Expr::Unary(UnaryOp::Neg, _) => PREC_UNARY,
            Expr::Unary(_, _) => PREC_ATOM,
            Expr::Pow(_, _) => PREC_POWER,
            Expr::Binary(op, _, _) => op.precedence(),
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(c) => write!(f, "{c}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                a.fmt_at(f, PREC_UNARY)
            }
            Expr::Unary(op, a) => {
                write!(f, "{}(", op.function_name().unwrap_or_default())?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Pow(a, n) => {
                a.fmt_at(f, PREC_ATOM)?;
                if n.is_sign_negative() {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                a.fmt_at(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_at(f, p + 1)
            }
        }
    }
}

fn eval_unary(op: UnaryOp, x: f64) -> Result<f64, EvalError> {
    let v = match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Log => {
            if x <= 0.0 {
                return Err(EvalError::LogDomain);
            }
            x.ln()
        }
        UnaryOp::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::SqrtDomain);
            }
            x.sqrt()
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses an expression. The tree mirrors the input; the only rewrites are
/// that a minus applied directly to a constant becomes a negative constant,
/// and a constant exponent subexpression is evaluated.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0 };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error_at(0, "empty expression"));
    }
    let e = parser.expr()?;
    parser.skip_ws();
    if !parser.at_end() {
        let c = parser.src[parser.pos] as char;
        let msg = if c == ')' { "unbalanced ')'".to_string() } else { format!("unexpected character '{c}'") };
        return Err(parser.error_at(parser.pos, msg));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error_at(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError { position: position.min(self.src.len()), message: message.into() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinaryOp::Add
            } else if self.eat(b'-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinaryOp::Mul
            } else if self.eat(b'/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            let operand = self.unary()?;
            return Ok(match operand {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Unary(UnaryOp::Neg, Arc::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let exponent = self.unary()?;
        if !exponent.is_constant() {
            return Err(self.error_at(start, "exponent must be a constant"));
        }
        let value = exponent.evaluate(&[0.0; 4]).map_err(|e| self.error_at(start, format!("invalid exponent: {e}")))?;
        Ok(Expr::Pow(Arc::new(base), value))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error_at(start, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error_at(start, "unbalanced '('"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(b')') => Err(self.error_at(start, "unbalanced ')'")),
            Some(c) => Err(self.error_at(start, format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            return Err(self.error_at(start, "malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(self.error_at(start, "malformed number: missing exponent digits"));
            }
        }
        if matches!(self.peek(), Some(c) if c == b'.' || c.is_ascii_alphanumeric() || c == b'_') {
            return Err(self.error_at(start, "malformed number"));
        }
        // The slice is ASCII by construction.
        let literal = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        literal
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Expr::Const)
            .ok_or_else(|| self.error_at(start, "malformed number"))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if let Some(op) = UnaryOp::from_function_name(name) {
            if !self.eat(b'(') {
                return Err(self.error_at(self.pos, format!("expected '(' after '{name}'")));
            }
            let open = self.pos - 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error_at(open, "unbalanced '('"));
            }
            return Ok(Expr::Unary(op, Arc::new(arg)));
        }
        let coord =
            name.strip_prefix('x').filter(|n| n.len() == 1).and_then(|n| n.parse::<usize>().ok()).and_then(Coord::new);
        coord.map(Expr::Var).ok_or_else(|| self.error_at(start, format!("unknown identifier '{name}'")))
    }
}
