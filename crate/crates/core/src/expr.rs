//! A small arithmetic expression language for user-defined coefficient and
//! nonlinearity functions.
//!
//! Grammar (recursive descent):
//!
//! ```text
//! expression := term (('+' | '-') term)*
//! term       := factor (('*' | '/') factor)*
//! factor     := ('-')? atom ('^' factor)?
//! atom       := number | identifier | identifier '(' args ')' | '(' expression ')'
//! ```
//!
//! `^` is right-associative; unary minus binds looser than `^`, so `-t^2`
//! is `-(t^2)`. Numbers are decimal literals with an optional exponent.
//! Variables are `t` and the solution components `u1` ... `u8`. The
//! function whitelist is fixed: `abs`, `min`, `max`, `exp`, `log`, `sqrt`,
//! `pow`, `sin`, `cos`.
//!
//! ASTs are immutable after parsing and evaluation is pure, so expressions
//! can be shared freely between workers. Evaluation is total over its
//! domain: out-of-domain inputs (negative `sqrt`/`log`, division by zero,
//! fractional powers of negatives) and non-finite results are reported as
//! errors, never returned as NaN or infinity.

use std::fmt;
use thiserror::Error;

/// Maximum number of solution components addressable as `u1` ... `u8`.
pub const MAX_COMPONENTS: usize = 8;

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Exp,
    Log,
    Sqrt,
    Pow,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Constant(f64),
    /// The independent variable `t`.
    Time,
    /// Solution component `u{index+1}` (zero-based index).
    Component(usize),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Vec<ExprAst>),
}

/// Parsed arithmetic expression with source spans.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown identifier '{0}' (variables are t, u1..u8)")]
    UnknownIdentifier(String),
    #[error("function '{name}' takes {expected} argument(s), got {got}")]
    WrongArity {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("malformed number literal")]
    InvalidNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source where the error was detected.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("component u{} referenced but only {supplied} component value(s) supplied", index + 1)]
    MissingComponent { index: usize, supplied: usize },
    #[error("domain error in '{op}': {message} (argument {arg})")]
    Domain {
        op: &'static str,
        message: &'static str,
        arg: f64,
    },
    #[error("'{op}' produced a non-finite value")]
    NonFinite { op: &'static str },
}

impl ExprAst {
    fn new(kind: ExprKind, span: Span) -> Self {
        ExprAst { kind, span }
    }

    /// Constant expression (no variables).
    pub fn constant(value: f64) -> Self {
        ExprAst::new(ExprKind::Constant(value), Span { start: 0, end: 0 })
    }

    /// Whether the expression references the time variable `t`.
    pub fn uses_time(&self) -> bool {
        match &self.kind {
            ExprKind::Time => true,
            ExprKind::Constant(_) | ExprKind::Component(_) => false,
            ExprKind::Unary(_, inner) => inner.uses_time(),
            ExprKind::Binary(_, lhs, rhs) => lhs.uses_time() || rhs.uses_time(),
            ExprKind::Call(_, args) => args.iter().any(|a| a.uses_time()),
        }
    }

    /// Largest component index referenced, if any (zero-based).
    pub fn max_component(&self) -> Option<usize> {
        match &self.kind {
            ExprKind::Constant(_) | ExprKind::Time => None,
            ExprKind::Component(i) => Some(*i),
            ExprKind::Unary(_, inner) => inner.max_component(),
            ExprKind::Binary(_, lhs, rhs) => lhs.max_component().max(rhs.max_component()),
            ExprKind::Call(_, args) => args.iter().filter_map(|a| a.max_component()).max(),
        }
    }

    /// Evaluates the expression at time `t` with component values `u`.
    pub fn evaluate(&self, t: f64, u: &[f64]) -> Result<f64, EvalError> {
        let v = match &self.kind {
            ExprKind::Constant(c) => *c,
            ExprKind::Time => t,
            ExprKind::Component(i) => {
                if *i < u.len() {
                    u[*i]
                } else {
                    return Err(EvalError::MissingComponent {
                        index: *i,
                        supplied: u.len(),
                    });
                }
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => -inner.evaluate(t, u)?,
            ExprKind::Binary(op, lhs, rhs) => {
                let a = lhs.evaluate(t, u)?;
                let b = rhs.evaluate(t, u)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::Domain {
                                op: "/",
                                message: "division by zero",
                                arg: b,
                            });
                        }
                        a / b
                    }
                    BinaryOp::Pow => eval_pow("^", a, b)?,
                }
            }
            ExprKind::Call(func, args) => {
                let a = args[0].evaluate(t, u)?;
                match func {
                    Func::Abs => a.abs(),
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "log",
                                message: "argument must be positive",
                                arg: a,
                            });
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain {
                                op: "sqrt",
                                message: "argument must be nonnegative",
                                arg: a,
                            });
                        }
                        a.sqrt()
                    }
                    Func::Min => a.min(args[1].evaluate(t, u)?),
                    Func::Max => a.max(args[1].evaluate(t, u)?),
                    Func::Pow => eval_pow("pow", a, args[1].evaluate(t, u)?)?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite {
                op: self.kind_name(),
            })
        }
    }

    fn kind_name(&self) -> &'static str {
        match &self.kind {
            ExprKind::Constant(_) => "constant",
            ExprKind::Time => "t",
            ExprKind::Component(_) => "component",
            ExprKind::Unary(..) => "negation",
            ExprKind::Binary(op, ..) => op.symbol(),
            ExprKind::Call(f, _) => f.name(),
        }
    }

    /// Structural equality ignoring source spans.
    pub fn same_shape(&self, other: &ExprAst) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Constant(a), ExprKind::Constant(b)) => a == b,
            (ExprKind::Time, ExprKind::Time) => true,
            (ExprKind::Component(a), ExprKind::Component(b)) => a == b,
            (ExprKind::Unary(oa, a), ExprKind::Unary(ob, b)) => oa == ob && a.same_shape(b),
            (ExprKind::Binary(oa, la, ra), ExprKind::Binary(ob, lb, rb)) => {
                oa == ob && la.same_shape(lb) && ra.same_shape(rb)
            }
            (ExprKind::Call(fa, aa), ExprKind::Call(fb, ab)) => {
                fa == fb && aa.len() == ab.len() && aa.iter().zip(ab).all(|(x, y)| x.same_shape(y))
            }
            _ => false,
        }
    }

    /// Returns a copy with every occurrence of `t` replaced by `replacement`.
    ///
    /// Used by the radial reduction, where the original expression is a
    /// function of the radius and the radius becomes an affine function of
    /// the new variable.
    pub fn substitute_time(&self, replacement: &ExprAst) -> ExprAst {
        match &self.kind {
            ExprKind::Time => replacement.clone(),
            ExprKind::Constant(_) | ExprKind::Component(_) => self.clone(),
            ExprKind::Unary(op, inner) => ExprAst::new(
                ExprKind::Unary(*op, Box::new(inner.substitute_time(replacement))),
                self.span,
            ),
            ExprKind::Binary(op, lhs, rhs) => ExprAst::new(
                ExprKind::Binary(
                    *op,
                    Box::new(lhs.substitute_time(replacement)),
                    Box::new(rhs.substitute_time(replacement)),
                ),
                self.span,
            ),
            ExprKind::Call(func, args) => ExprAst::new(
                ExprKind::Call(
                    *func,
                    args.iter()
                        .map(|a| a.substitute_time(replacement))
                        .collect(),
                ),
                self.span,
            ),
        }
    }

    // Precedence for the printer: higher binds tighter.
    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            ExprKind::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            ExprKind::Unary(..) => 3,
            ExprKind::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn eval_pow(op: &'static str, base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::Domain {
            op,
            message: "zero base with negative exponent",
            arg: exponent,
        });
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain {
            op,
            message: "negative base with fractional exponent",
            arg: base,
        });
    }
    Ok(base.powf(exponent))
}

/// Parses `text` into an AST.
pub fn parse(text: &str) -> Result<ExprAst, ParseError> {
    let mut parser = Parser::new(text);
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error(ParseErrorKind::UnexpectedEnd));
    }
    let ast = parser.expression()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.error_at(
            parser.pos,
            ParseErrorKind::UnexpectedChar(parser.peek().unwrap()),
        ));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.pos,
        }
    }

    fn error_at(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Expected(what)))
        }
    }

    fn expression(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some('+') => BinaryOp::Add,
                Some('-') => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = ExprAst::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some('*') => BinaryOp::Mul,
                Some('/') => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = ExprAst::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    // factor := ('-')? atom ('^' factor)?
    // The optional power is parsed before applying the minus sign, so
    // `-t^2` means `-(t^2)`.
    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let negate = self.eat('-');
        let atom = self.atom()?;
        let mut expr = if self.eat('^') {
            let exponent = self.factor()?;
            let span = Span {
                start: atom.span.start,
                end: exponent.span.end,
            };
            ExprAst::new(
                ExprKind::Binary(BinaryOp::Pow, Box::new(atom), Box::new(exponent)),
                span,
            )
        } else {
            atom
        };
        if negate {
            let span = Span {
                start,
                end: expr.span.end,
            };
            expr = ExprAst::new(ExprKind::Unary(UnaryOp::Neg, Box::new(expr)), span);
        }
        Ok(expr)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some('(') => {
                self.pos += 1;
                let inner = self.expression()?;
                self.expect(')', "closing ')'")?;
                Ok(ExprAst::new(
                    inner.kind,
                    Span {
                        start,
                        end: self.pos,
                    },
                ))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(c) => Err(self.error(ParseErrorKind::UnexpectedChar(c))),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2e` followed by junk);
                // let the trailing-input check report it.
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| self.error_at(start, ParseErrorKind::InvalidNumber))?;
        if !value.is_finite() {
            return Err(self.error_at(start, ParseErrorKind::InvalidNumber));
        }
        Ok(ExprAst::new(
            ExprKind::Constant(value),
            Span {
                start,
                end: self.pos,
            },
        ))
    }

    fn identifier(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        let span = Span {
            start,
            end: self.pos,
        };

        if let Some(func) = Func::from_name(name) {
            self.expect('(', "'(' after function name")?;
            let mut args = vec![self.expression()?];
            while self.eat(',') {
                args.push(self.expression()?);
            }
            self.expect(')', "closing ')'")?;
            if args.len() != func.arity() {
                return Err(self.error_at(
                    start,
                    ParseErrorKind::WrongArity {
                        name: func.name(),
                        expected: func.arity(),
                        got: args.len(),
                    },
                ));
            }
            return Ok(ExprAst::new(
                ExprKind::Call(func, args),
                Span {
                    start,
                    end: self.pos,
                },
            ));
        }

        if name == "t" {
            return Ok(ExprAst::new(ExprKind::Time, span));
        }
        if let Some(digits) = name.strip_prefix('u') {
            if let Ok(k) = digits.parse::<usize>() {
                if (1..=MAX_COMPONENTS).contains(&k) {
                    return Ok(ExprAst::new(ExprKind::Component(k - 1), span));
                }
            }
        }
        Err(self.error_at(start, ParseErrorKind::UnknownIdentifier(name.to_string())))
    }
}

// Compact printer; output reparses to a structurally identical AST.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &ExprAst, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match &self.kind {
            ExprKind::Constant(c) => {
                if *c < 0.0 {
                    // Negative literals print parenthesised so that e.g.
                    // `x^c` with c = -2 stays grammatical.
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            ExprKind::Time => write!(f, "t"),
            ExprKind::Component(i) => write!(f, "u{}", i + 1),
            ExprKind::Unary(UnaryOp::Neg, inner) => {
                write!(f, "-")?;
                // The printed operand must bind at least as tightly as `^`
                // (the grammar hangs any `^` after an atom onto the minus).
                paren(f, inner, inner.precedence() < 5)
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let prec = self.precedence();
                match op {
                    // The four left-associative operators parenthesise an
                    // equal-precedence right operand so the reparse keeps
                    // the original tree shape.
                    BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
                        paren(f, lhs, lhs.precedence() < prec)?;
                        write!(f, "{}", op.symbol())?;
                        paren(f, rhs, rhs.precedence() <= prec)
                    }
                    BinaryOp::Pow => {
                        // Left operand of `^` must be an atom.
                        paren(f, lhs, lhs.precedence() < 5)?;
                        write!(f, "^")?;
                        paren(f, rhs, rhs.precedence() < prec)
                    }
                }
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}
