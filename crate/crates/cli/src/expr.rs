//! The series expression language.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" exponent)?
//! exponent:= INT | "-" INT | "(" "-"? INT ")"
//! atom    := INT | INT "/" INT | NAME | "(" expr ")"
//!          | "scale" "(" expr "," INT ")"
//!          | "deriv" "(" expr ")"
//!          | "bracket" "(" expr "," INT ")"
//!          | "coeff" "(" expr "," "-"? INT ")"
//! ```
//!
//! `INT "/" INT` with no whitespace around the slash is a rational literal;
//! anything else with `/` is division. `^` binds tighter than unary minus,
//! so `-theta2^2` is `-(theta2^2)`. Names are the series names of
//! [`NamedSeries`]; `coeff` takes an exponent in eighths of a power of `q`.

use std::fmt;

use donaldson_core::named::NamedSeries;
use donaldson_core::Rat;

/// Byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Spans are bookkeeping only and do not take part in equality.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(NamedSeries),
    IntLit(i64),
    RatLit(Rat),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i64),
    Scale(Box<Expr>, i64),
    Deriv(Box<Expr>),
    Bracket(Box<Expr>, u32),
    Coeff(Box<Expr>, i64),
}

/// Line and column (both 1-based, columns in characters) of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Unexpected { line: usize, column: usize, expected: Vec<String>, found: String },

    #[error("{line}:{column}: unknown series name `{name}`")]
    UnknownName { line: usize, column: usize, name: String },

    #[error("{line}:{column}: {message}")]
    Invalid { line: usize, column: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Rat(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Rat(r) => format!("rational `{r}`"),
            Tok::Ident(s) => format!("name `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const FUNCTIONS: [&str; 4] = ["bracket", "coeff", "deriv", "scale"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = line_col(self.src, at);
        ParseError::Invalid { line, column, message: message.into() }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Span)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let rest = &self.src[self.pos..];
            let Some(c) = rest.chars().next() else {
                let at = self.pos;
                out.push((Tok::Eof, Span { start: at, end: at }));
                return Ok(out);
            };
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                continue;
            }
            let start = self.pos;
            let tok = if c.is_ascii_digit() {
                let num = self.digits();
                let slash_digit = self.src[self.pos..].starts_with('/')
                    && self.src[self.pos + 1..].starts_with(|c: char| c.is_ascii_digit());
                if slash_digit {
                    self.pos += 1;
                    let den = self.digits();
                    let value: Rat = format!("{num}/{den}")
                        .parse()
                        .map_err(|_| self.err(start, "rational literal with zero denominator"))?;
                    Tok::Rat(value)
                } else {
                    Tok::Int(num.parse().map_err(|_| self.err(start, "integer literal out of range"))?)
                }
            } else if c.is_ascii_alphabetic() || c == '_' {
                while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            } else {
                self.pos += c.len_utf8();
                match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => return Err(self.err(start, format!("unexpected character `{c}`"))),
                }
            };
            out.push((tok, Span { start, end: self.pos }));
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn span(&self) -> Span {
        self.toks[self.at].1
    }

    fn prev_end(&self) -> usize {
        if self.at == 0 {
            0
        } else {
            self.toks[self.at - 1].1.end
        }
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let (line, column) = line_col(self.src, self.span().start);
        ParseError::Unexpected {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn invalid(&self, span: Span, message: impl Into<String>) -> ParseError {
        let (line, column) = line_col(self.src, span.start);
        ParseError::Invalid { line, column, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&[label]))
        }
    }

    fn node(&self, kind: ExprKind, start: usize) -> Expr {
        Expr { kind, span: Span { start, end: self.prev_end() } }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ExprKind::Add,
                Tok::Minus => ExprKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = self.node(op(Box::new(lhs), Box::new(rhs)), start);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ExprKind::Mul,
                Tok::Slash => ExprKind::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = self.node(op(Box::new(lhs), Box::new(rhs)), start);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(self.node(ExprKind::Neg(Box::new(inner)), start));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let k = self.exponent()?;
        Ok(self.node(ExprKind::PowInt(Box::new(base), k), start))
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let k = self.signed_int()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(k);
        }
        match self.peek() {
            Tok::Int(_) | Tok::Minus => self.signed_int(),
            _ => Err(self.unexpected(&["integer", "`-`", "`(`"])),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        let (tok, span) = self.bump();
        match tok {
            Tok::Int(n) => Ok(self.node(ExprKind::IntLit(n), start)),
            Tok::Rat(r) => Ok(self.node(ExprKind::RatLit(r), start)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                // parentheses only group; keep the inner node but widen its span
                Ok(Expr { kind: inner.kind, span: Span { start, end: self.prev_end() } })
            }
            Tok::Ident(name) if FUNCTIONS.contains(&name.as_str()) => self.call(&name, start),
            Tok::Ident(name) => match name.parse::<NamedSeries>() {
                Ok(n) => Ok(self.node(ExprKind::Name(n), start)),
                Err(_) => {
                    let (line, column) = line_col(self.src, span.start);
                    Err(ParseError::UnknownName { line, column, name })
                }
            },
            _ => {
                self.at -= usize::from(tok != Tok::Eof);
                Err(self.unexpected(&["number", "series name", "function call", "`(`", "`-`"]))
            }
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let arg = Box::new(self.expr()?);
        let kind = if name == "deriv" {
            ExprKind::Deriv(arg)
        } else {
            self.expect(Tok::Comma, "`,`")?;
            let int_span = self.span();
            let k = self.signed_int()?;
            match name {
                "scale" if k >= 1 => ExprKind::Scale(arg, k),
                "scale" => return Err(self.invalid(int_span, "scale factor must be a positive integer")),
                "bracket" => match u32::try_from(k) {
                    Ok(l) => ExprKind::Bracket(arg, l),
                    Err(_) => return Err(self.invalid(int_span, "bracket order must be a non-negative integer")),
                },
                _ => ExprKind::Coeff(arg, k),
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(self.node(kind, start))
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = Lexer { src: source, pos: 0 }.tokens()?;
    let mut p = Parser { src: source, toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

// Binding strength used by the printer.
fn precedence(k: &ExprKind) -> u8 {
    match k {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) | ExprKind::Div(..) => 2,
        ExprKind::Neg(..) => 3,
        ExprKind::PowInt(..) => 4,
        _ => 5,
    }
}

struct Wrap<'a>(&'a Expr, u8);

impl fmt::Display for Wrap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(&self.0.kind) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints source text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Name(n) => write!(f, "{n}"),
            ExprKind::IntLit(n) if *n < 0 => write!(f, "(-{})", n.unsigned_abs()),
            ExprKind::IntLit(n) => write!(f, "{n}"),
            ExprKind::RatLit(r) if r.is_negative() => write!(f, "(-{})", r.abs()),
            // an integral rational still needs its slash to stay a rational literal
            ExprKind::RatLit(r) if r.is_integer() => write!(f, "{r}/1"),
            ExprKind::RatLit(r) => write!(f, "{r}"),
            ExprKind::Neg(a) => write!(f, "-{}", Wrap(a, 3)),
            ExprKind::Add(a, b) => write!(f, "{} + {}", Wrap(a, 1), Wrap(b, 2)),
            ExprKind::Sub(a, b) => write!(f, "{} - {}", Wrap(a, 1), Wrap(b, 2)),
            ExprKind::Mul(a, b) => write!(f, "{} * {}", Wrap(a, 2), Wrap(b, 3)),
            ExprKind::Div(a, b) => write!(f, "{} / {}", Wrap(a, 2), Wrap(b, 3)),
            ExprKind::PowInt(a, k) if *k < 0 => write!(f, "{}^({k})", Wrap(a, 5)),
            ExprKind::PowInt(a, k) => write!(f, "{}^{k}", Wrap(a, 5)),
            ExprKind::Scale(a, k) => write!(f, "scale({a}, {k})"),
            ExprKind::Deriv(a) => write!(f, "deriv({a})"),
            ExprKind::Bracket(a, l) => write!(f, "bracket({a}, {l})"),
            ExprKind::Coeff(a, e) => write!(f, "coeff({a}, {e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use donaldson_core::modforms::{QPlus, ThetaIndex};

    fn name(n: NamedSeries) -> Box<Expr> {
        Box::new(Expr { kind: ExprKind::Name(n), span: Span::default() })
    }

    #[test]
    fn sum_of_powers() {
        let e = parse("theta2^4 + theta3^4").unwrap();
        let pow = |j| Box::new(Expr { kind: ExprKind::PowInt(name(NamedSeries::Theta(j)), 4), span: Span::default() });
        assert_eq!(e.kind, ExprKind::Add(pow(ThetaIndex::Two), pow(ThetaIndex::Three)));
        assert_eq!(e.span, Span { start: 0, end: 19 });
    }

    #[test]
    fn bracket_call() {
        let e = parse("bracket(Q01plus, 2)").unwrap();
        assert_eq!(e.kind, ExprKind::Bracket(name(NamedSeries::QPlus(QPlus::Q01)), 2));
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            parse("theta5").unwrap_err(),
            ParseError::UnknownName { line: 1, column: 1, name: "theta5".into() }
        );
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(parse("-u^2").unwrap(), parse("-(u^2)").unwrap());
        assert_eq!(parse("1 - u - h").unwrap(), parse("(1 - u) - h").unwrap());
        assert_eq!(parse("u / h * T").unwrap(), parse("(u / h) * T").unwrap());
        assert_eq!(parse("u^-2").unwrap(), parse("u^(-2)").unwrap());
    }

    #[test]
    fn rational_literals_need_adjacent_slash() {
        assert_eq!(parse("1/2").unwrap().kind, ExprKind::RatLit(Rat::new(1, 2)));
        assert!(matches!(parse("1 / 2").unwrap().kind, ExprKind::Div(..)));
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn error_positions() {
        let err = parse("u +\n  * h").unwrap_err();
        let ParseError::Unexpected { line, column, found, .. } = err else { panic!("{err:?}") };
        assert_eq!((line, column, found.as_str()), (2, 3, "`*`"));
        assert!(matches!(parse("scale(u, 0)"), Err(ParseError::Invalid { column: 10, .. })));
        assert!(matches!(parse("(u"), Err(ParseError::Unexpected { .. })));
        assert!(matches!(parse("u $"), Err(ParseError::Invalid { column: 3, .. })));
    }

    #[test]
    fn printing_reparses() {
        for src in ["-(u - h)^3 * 2/3", "coeff(deriv(E2), -8)", "(1 - u)^(-2) / -h", "scale(Estar, 4) - 16*Theta2^4"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }
}
