// Recursive-descent parser for the expression language. The grammar is
// LL(1): the leading keyword decides the production.
//
//   expr ::= "x" INT
//          | "chi" "(" num "," expr ")"
//          | "med" "(" num "," expr "," expr ")"
//          | "join" "(" expr { "," expr } ")"
//          | "meet" "(" expr { "," expr } ")"
//   num  ::= DECIMAL | INT "/" INT

use std::fmt;

use thiserror::Error;

use crate::expr::BasisExpr;
use crate::types::{GridPoint, Param, UnitValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    Expected { expected: String, found: String },
    UnknownKeyword(String),
    BadProjection(String),
    NumberOutOfRange(String),
    BadNumber(String),
    ZeroDenominator,
    EmptyArguments(&'static str),
    ProjectionBeyondArity { index: usize, arity: usize },
    ZeroArity,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::Expected { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UnknownKeyword(k) => write!(f, "unknown keyword {k:?}"),
            ParseErrorKind::BadProjection(k) => write!(f, "malformed projection {k:?}"),
            ParseErrorKind::NumberOutOfRange(n) => write!(f, "number {n} lies outside [0,1]"),
            ParseErrorKind::BadNumber(n) => write!(f, "malformed number {n:?}"),
            ParseErrorKind::ZeroDenominator => write!(f, "zero denominator"),
            ParseErrorKind::EmptyArguments(k) => write!(f, "{k} needs at least one argument"),
            ParseErrorKind::ProjectionBeyondArity { index, arity } => {
                write!(f, "projection x{index} exceeds expected arity {arity}")
            }
            ParseErrorKind::ZeroArity => write!(f, "expected arity must be at least 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(String),
    Decimal(String),
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("{w:?}"),
            Tok::Int(s) | Tok::Decimal(s) => format!("number {s}"),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn take_while(&mut self, out: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, Position)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
                self.bump();
            }
            let pos = self.here();
            let Some(&c) = self.chars.peek() else {
                out.push((Tok::End, pos));
                return Ok(out);
            };
            let tok = match c {
                '(' | ')' | ',' | '/' => {
                    self.bump();
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Slash,
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let mut w = String::new();
                    self.take_while(&mut w, |c| c.is_ascii_alphanumeric() || c == '_');
                    Tok::Word(w)
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let mut s = String::new();
                    self.take_while(&mut s, |c| c.is_ascii_digit());
                    let mut decimal = false;
                    if self.chars.peek() == Some(&'.') {
                        decimal = true;
                        s.push('.');
                        self.bump();
                        self.take_while(&mut s, |c| c.is_ascii_digit());
                    }
                    if matches!(self.chars.peek(), Some('e' | 'E')) {
                        decimal = true;
                        s.push('e');
                        self.bump();
                        if let Some(&sign @ ('+' | '-')) = self.chars.peek() {
                            s.push(sign);
                            self.bump();
                        }
                        self.take_while(&mut s, |c| c.is_ascii_digit());
                    }
                    if decimal {
                        Tok::Decimal(s)
                    } else {
                        Tok::Int(s)
                    }
                }
                other => {
                    return Err(ParseError {
                        position: pos,
                        kind: ParseErrorKind::UnexpectedChar(other),
                    })
                }
            };
            out.push((tok, pos));
        }
    }
}

// Projection arity is only known after the whole text is read, so the
// parser first builds this shape and then lowers it.
enum Raw {
    Proj(usize, Position),
    Chi(Param, Box<Raw>),
    Med(Param, Box<Raw>, Box<Raw>),
    Join(Vec<Raw>),
    Meet(Vec<Raw>),
}

impl Raw {
    fn max_projection(&self) -> (usize, Position) {
        match self {
            Raw::Proj(i, p) => (*i, *p),
            Raw::Chi(_, e) => e.max_projection(),
            Raw::Med(_, l, r) => {
                let (a, b) = (l.max_projection(), r.max_projection());
                if b.0 > a.0 {
                    b
                } else {
                    a
                }
            }
            Raw::Join(cs) | Raw::Meet(cs) => cs
                .iter()
                .map(Raw::max_projection)
                .reduce(|a, b| if b.0 > a.0 { b } else { a })
                .expect("nonempty children"),
        }
    }

    fn lower(self, arity: usize) -> BasisExpr {
        // Arity consistency is established before lowering, so the smart
        // constructors cannot fail here.
        match self {
            Raw::Proj(i, _) => BasisExpr::proj(i, arity).expect("index checked"),
            Raw::Chi(a, e) => BasisExpr::chi(a, e.lower(arity)),
            Raw::Med(b, l, r) => BasisExpr::med(b, l.lower(arity), r.lower(arity)).expect("uniform arity"),
            Raw::Join(cs) => {
                BasisExpr::join(cs.into_iter().map(|c| c.lower(arity)).collect()).expect("uniform arity")
            }
            Raw::Meet(cs) => {
                BasisExpr::meet(cs.into_iter().map(|c| c.lower(arity)).collect()).expect("uniform arity")
            }
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Position) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Position) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(pos: Position, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { position: pos, kind })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(())
        } else {
            Self::fail(
                pos,
                ParseErrorKind::Expected {
                    expected: what.into(),
                    found: tok.describe(),
                },
            )
        }
    }

    fn expr(&mut self) -> Result<Raw, ParseError> {
        let (tok, pos) = self.next();
        let word = match tok {
            Tok::Word(w) => w,
            other => {
                return Self::fail(
                    pos,
                    ParseErrorKind::Expected {
                        expected: "expression".into(),
                        found: other.describe(),
                    },
                )
            }
        };
        match word.as_str() {
            "chi" => {
                self.expect(Tok::LParen, "'('")?;
                let a = self.num()?;
                self.expect(Tok::Comma, "','")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Raw::Chi(a, Box::new(e)))
            }
            "med" => {
                self.expect(Tok::LParen, "'('")?;
                let b = self.num()?;
                self.expect(Tok::Comma, "','")?;
                let l = self.expr()?;
                self.expect(Tok::Comma, "','")?;
                let r = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Raw::Med(b, Box::new(l), Box::new(r)))
            }
            "join" => Ok(Raw::Join(self.args("join")?)),
            "meet" => Ok(Raw::Meet(self.args("meet")?)),
            w if w.starts_with('x') => {
                let digits = &w[1..];
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Self::fail(pos, ParseErrorKind::BadProjection(w.into()));
                }
                let idx = digits
                    .parse::<usize>()
                    .or_else(|_| Self::fail(pos, ParseErrorKind::BadProjection(w.into())))?;
                Ok(Raw::Proj(idx, pos))
            }
            _ => Self::fail(pos, ParseErrorKind::UnknownKeyword(word)),
        }
    }

    fn args(&mut self, what: &'static str) -> Result<Vec<Raw>, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        if let (Tok::RParen, pos) = self.peek() {
            return Self::fail(*pos, ParseErrorKind::EmptyArguments(what));
        }
        let mut out = vec![self.expr()?];
        loop {
            let (tok, pos) = self.next();
            match tok {
                Tok::Comma => out.push(self.expr()?),
                Tok::RParen => return Ok(out),
                other => {
                    return Self::fail(
                        pos,
                        ParseErrorKind::Expected {
                            expected: "',' or ')'".into(),
                            found: other.describe(),
                        },
                    )
                }
            }
        }
    }

    fn num(&mut self) -> Result<Param, ParseError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Int(n) => {
                if let (Tok::Slash, _) = self.peek() {
                    self.next();
                    let (dtok, dpos) = self.next();
                    let Tok::Int(d) = dtok else {
                        return Self::fail(
                            dpos,
                            ParseErrorKind::Expected {
                                expected: "integer denominator".into(),
                                found: dtok.describe(),
                            },
                        );
                    };
                    let text = format!("{n}/{d}");
                    let num: u64 = n
                        .parse()
                        .or_else(|_| Self::fail(pos, ParseErrorKind::BadNumber(text.clone())))?;
                    let den: u64 = d
                        .parse()
                        .or_else(|_| Self::fail(dpos, ParseErrorKind::BadNumber(text.clone())))?;
                    if den == 0 {
                        return Self::fail(dpos, ParseErrorKind::ZeroDenominator);
                    }
                    GridPoint::new(num, den)
                        .map(Param::Ratio)
                        .or_else(|_| Self::fail(pos, ParseErrorKind::NumberOutOfRange(text)))
                } else {
                    Self::real(&n, pos)
                }
            }
            Tok::Decimal(s) => Self::real(&s, pos),
            other => Self::fail(
                pos,
                ParseErrorKind::Expected {
                    expected: "number".into(),
                    found: other.describe(),
                },
            ),
        }
    }

    fn real(text: &str, pos: Position) -> Result<Param, ParseError> {
        let v: f64 = text
            .parse()
            .or_else(|_| Self::fail(pos, ParseErrorKind::BadNumber(text.into())))?;
        UnitValue::new(v)
            .map(Param::Real)
            .or_else(|_| Self::fail(pos, ParseErrorKind::NumberOutOfRange(text.into())))
    }
}

/// Parses one expression. With `expected_arity` the projections get that
/// arity (and must fit it); otherwise the arity is one more than the largest
/// projection index.
pub fn parse(src: &str, expected_arity: Option<usize>) -> Result<BasisExpr, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut parser = Parser { toks, at: 0 };
    let raw = parser.expr()?;
    let (tok, pos) = parser.next();
    if tok != Tok::End {
        return Parser::fail(
            pos,
            ParseErrorKind::Expected {
                expected: "end of input".into(),
                found: tok.describe(),
            },
        );
    }
    let (max_index, max_pos) = raw.max_projection();
    let arity = match expected_arity {
        Some(0) => {
            return Parser::fail(Position { line: 1, column: 1 }, ParseErrorKind::ZeroArity);
        }
        Some(n) if max_index >= n => {
            return Parser::fail(
                max_pos,
                ParseErrorKind::ProjectionBeyondArity {
                    index: max_index,
                    arity: n,
                },
            )
        }
        Some(n) => n,
        None => max_index + 1,
    };
    Ok(raw.lower(arity))
}

/// Parses a single `num` (`DECIMAL` or `INT/INT`) on its own.
pub fn parse_num(src: &str) -> Result<Param, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut parser = Parser { toks, at: 0 };
    let p = parser.num()?;
    let (tok, pos) = parser.next();
    if tok != Tok::End {
        return Parser::fail(
            pos,
            ParseErrorKind::Expected {
                expected: "end of input".into(),
                found: tok.describe(),
            },
        );
    }
    Ok(p)
}
