//! Connection fixtures: matrix-valued forms written entry by entry.
//!
//! ```text
//! # flat A, covariantly closed B on R^3
//! dim = 3
//! rank = 2
//! flags = flat, covariantly-closed
//! A[1][2] = -0.5 * (x2 * dx1 + x1 * dx2)
//! A[2][1] =  0.5 * (x2 * dx1 + x1 * dx2)
//! B[1][1] = 2 * dx3
//! ```
//!
//! Right-hand sides are sums of products of numbers, coordinates `x1..xn`,
//! differentials `dx1..dxn`, `pi`, and the functions `sin cos tan exp log
//! sqrt sinh cosh tanh`. Products of differentials are wedge products.
//! `^` is a power of a scalar. Indices are 1-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use bf_numeric::{index_sets, ConnectionSample, Mat, MatrixForm};
use nalgebra::DMatrix;

use crate::error::{CliError, ParseError};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        }
    }
}

/// Scalar coefficient of a form term.
#[derive(Clone, Debug, PartialEq)]
enum Scalar {
    Num(f64),
    X(usize),
    Neg(Box<Scalar>),
    Add(Box<Scalar>, Box<Scalar>),
    Mul(Box<Scalar>, Box<Scalar>),
    Div(Box<Scalar>, Box<Scalar>),
    Pow(Box<Scalar>, Box<Scalar>),
    Call(Func, Box<Scalar>),
}

impl Scalar {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Scalar::Num(v) => *v,
            Scalar::X(i) => x[*i],
            Scalar::Neg(a) => -a.eval(x),
            Scalar::Add(a, b) => a.eval(x) + b.eval(x),
            Scalar::Mul(a, b) => a.eval(x) * b.eval(x),
            Scalar::Div(a, b) => a.eval(x) / b.eval(x),
            Scalar::Pow(a, b) => {
                let e = b.eval(x);
                if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
                    a.eval(x).powi(e as i32)
                } else {
                    a.eval(x).powf(e)
                }
            }
            Scalar::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// `Σ c_I dx^I` with sorted index sets `I`.
#[derive(Clone, Debug, Default)]
struct Form(Vec<(Vec<usize>, Scalar)>);

impl Form {
    fn scalar(s: Scalar) -> Form {
        Form(vec![(Vec::new(), s)])
    }

    fn as_scalar(&self) -> Option<Scalar> {
        if self.0.iter().any(|(i, _)| !i.is_empty()) {
            return None;
        }
        Some(
            self.0
                .iter()
                .map(|(_, s)| s.clone())
                .reduce(|a, b| Scalar::Add(Box::new(a), Box::new(b)))
                .unwrap_or(Scalar::Num(0.0)),
        )
    }

    fn plus(mut self, other: Form) -> Form {
        self.0.extend(other.0);
        self
    }

    fn neg(self) -> Form {
        Form(self.0.into_iter().map(|(i, s)| (i, Scalar::Neg(Box::new(s)))).collect())
    }

    fn wedge(&self, other: &Form) -> Form {
        let mut out = Vec::new();
        for (i, a) in &self.0 {
            for (j, b) in &other.0 {
                let mut idx = i.clone();
                idx.extend(j);
                let Some(sign) = bf_numeric::form::sort_sign(&idx) else { continue };
                idx.sort_unstable();
                let prod = Scalar::Mul(Box::new(a.clone()), Box::new(b.clone()));
                out.push((idx, if sign < 0.0 { Scalar::Neg(Box::new(prod)) } else { prod }));
            }
        }
        Form(out)
    }

    fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.0.iter().map(|(i, _)| i.len()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

/// Tokens with 1-based columns.
fn lex(line: usize, col0: usize, src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<(usize, char)> = src.chars().enumerate().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (p, c) = chars[i];
        let col = col0 + p;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
            let v = text.parse::<f64>().map_err(|_| ParseError::new(line, col, format!("malformed number `{text}`")))?;
            out.push((col, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().map(|(_, c)| c).collect())));
        } else if "+-*/^()".contains(c) {
            out.push((col, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError::new(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    end_col: usize,
    n: usize,
}

impl Parser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end_col)
    }

    fn err(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, col, msg)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some((_, Tok::Sym(s))) if *s == c)
    }

    fn expr(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.peek_sym('+') {
                self.pos += 1;
                acc = acc.plus(self.term()?);
            } else if self.peek_sym('-') {
                self.pos += 1;
                acc = acc.plus(self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.peek_sym('*') {
                self.pos += 1;
                acc = acc.wedge(&self.unary()?);
            } else if self.peek_sym('/') {
                self.pos += 1;
                let col = self.col();
                let d = self.unary()?.as_scalar().ok_or_else(|| self.err(col, "division by a differential form"))?;
                acc = Form(acc.0.into_iter().map(|(i, s)| (i, Scalar::Div(Box::new(s), Box::new(d.clone())))).collect());
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Form, ParseError> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Form, ParseError> {
        let col = self.col();
        let base = self.atom()?;
        if !self.peek_sym('^') {
            return Ok(base);
        }
        self.pos += 1;
        let ecol = self.col();
        let e = self.unary()?.as_scalar().ok_or_else(|| self.err(ecol, "exponent must be a scalar"))?;
        let b = base.as_scalar().ok_or_else(|| self.err(col, "only scalars can be raised to a power; use `*` for wedge products"))?;
        Ok(Form::scalar(Scalar::Pow(Box::new(b), Box::new(e))))
    }

    fn index(&self, col: usize, name: &str, digits: &str) -> Result<usize, ParseError> {
        match digits.parse::<usize>() {
            Ok(i) if (1..=self.n).contains(&i) => Ok(i - 1),
            _ => Err(self.err(col, format!("`{name}` is not a coordinate of R^{}", self.n))),
        }
    }

    fn atom(&mut self) -> Result<Form, ParseError> {
        let col = self.col();
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return Err(self.err(col, "unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Form::scalar(Scalar::Num(v))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                if !self.peek_sym(')') {
                    return Err(self.err(self.col(), "expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Sym(c) => Err(self.err(col, format!("unexpected `{c}`"))),
            Tok::Ident(name) => {
                if name == "pi" {
                    return Ok(Form::scalar(Scalar::Num(std::f64::consts::PI)));
                }
                if let Some(f) = Func::from_name(&name) {
                    if !self.peek_sym('(') {
                        return Err(self.err(self.col(), format!("expected `(` after `{name}`")));
                    }
                    let acol = self.col();
                    let arg = self.atom()?.as_scalar().ok_or_else(|| self.err(acol, format!("argument of `{name}` must be a scalar")))?;
                    return Ok(Form::scalar(Scalar::Call(f, Box::new(arg))));
                }
                if let Some(d) = name.strip_prefix("dx") {
                    let i = self.index(col, &name, d)?;
                    return Ok(Form(vec![(vec![i], Scalar::Num(1.0))]));
                }
                if let Some(d) = name.strip_prefix('x') {
                    let i = self.index(col, &name, d)?;
                    return Ok(Form::scalar(Scalar::X(i)));
                }
                Err(self.err(col, format!("unknown name `{name}`")))
            }
        }
    }
}

/// Parse a complete right-hand side.
fn parse_form(line: usize, col0: usize, src: &str, n: usize) -> Result<Form, ParseError> {
    let toks = lex(line, col0, src)?;
    let mut p = Parser { line, toks: &toks, pos: 0, end_col: col0 + src.chars().count(), n };
    let f = p.expr()?;
    if p.pos < toks.len() {
        return Err(p.err(p.col(), "unexpected trailing input"));
    }
    Ok(f)
}

/// Which matrix form an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Which {
    A,
    B,
}

/// A parsed fixture.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub dim: usize,
    pub rank: usize,
    pub flat: bool,
    pub covariantly_closed: bool,
    entries: BTreeMap<(Which, usize, usize), Form>,
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Column (1-based, in chars) of byte offset `off` in `line`.
fn col_of(line: &str, off: usize) -> usize {
    line[..off].chars().count() + 1
}

fn directive_value(line: usize, raw: &str, key: &str) -> Option<Result<(usize, String), ParseError>> {
    let t = raw.trim_start();
    let rest = t.strip_prefix(key)?;
    let rest_t = rest.trim_start();
    let Some(v) = rest_t.strip_prefix('=') else {
        let off = raw.len() - rest_t.len();
        return Some(Err(ParseError::new(line, col_of(raw, off), format!("expected `=` after `{key}`"))));
    };
    let off = raw.len() - v.len();
    Some(Ok((col_of(raw, off), v.trim().to_string())))
}

/// `A[i][j]` or `B[i][j]`, returning the entry and the byte offset after `=`.
fn entry_lhs(line: usize, raw: &str, rank: usize) -> Result<(Which, usize, usize, usize), ParseError> {
    let t = raw.trim_start();
    let start = raw.len() - t.len();
    let which = match t.chars().next() {
        Some('A') => Which::A,
        Some('B') => Which::B,
        _ => return Err(ParseError::new(line, col_of(raw, start), "expected `A[i][j] = …`, `B[i][j] = …` or a directive")),
    };
    let mut off = start + 1;
    let mut idx = [0usize; 2];
    for slot in &mut idx {
        let rest = &raw[off..];
        let open = rest.trim_start();
        off += rest.len() - open.len();
        if !open.starts_with('[') {
            return Err(ParseError::new(line, col_of(raw, off), "expected `[`"));
        }
        let close = open.find(']').ok_or_else(|| ParseError::new(line, col_of(raw, off), "missing `]`"))?;
        let inner = open[1..close].trim();
        *slot = match inner.parse::<usize>() {
            Ok(i) if (1..=rank).contains(&i) => i - 1,
            _ => {
                return Err(ParseError::new(line, col_of(raw, off + 1), format!("matrix index `{inner}` outside 1..={rank}")));
            }
        };
        off += close + 1;
    }
    let rest = &raw[off..];
    let eq = rest.trim_start();
    off += rest.len() - eq.len();
    if !eq.starts_with('=') {
        return Err(ParseError::new(line, col_of(raw, off), "expected `=`"));
    }
    Ok((which, idx[0], idx[1], off + 1))
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture, ParseError> {
        let (mut dim, mut rank) = (3usize, 2usize);
        let (mut flat, mut closed) = (false, false);
        let mut body = Vec::new();
        let mut seen_entry = false;
        for (i, full) in text.lines().enumerate() {
            let line = i + 1;
            let raw = strip_comment(full);
            if raw.trim().is_empty() {
                continue;
            }
            let mut directive = false;
            for key in ["dim", "rank"] {
                if let Some(v) = directive_value(line, raw, key) {
                    let (col, v) = v?;
                    if seen_entry {
                        return Err(ParseError::new(line, 1, format!("`{key}` must come before the entries")));
                    }
                    let x: usize = v.parse().map_err(|_| ParseError::new(line, col, format!("`{key}` needs a positive integer")))?;
                    if x == 0 {
                        return Err(ParseError::new(line, col, format!("`{key}` needs a positive integer")));
                    }
                    if key == "dim" {
                        if x < 3 {
                            return Err(ParseError::new(line, col, "dimension must be at least 3"));
                        }
                        dim = x;
                    } else {
                        rank = x;
                    }
                    directive = true;
                }
            }
            if let Some(v) = directive_value(line, raw, "flags") {
                let (col, v) = v?;
                for f in v.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                    match f {
                        "flat" => flat = true,
                        "covariantly-closed" => closed = true,
                        _ => return Err(ParseError::new(line, col, format!("unknown flag `{f}`"))),
                    }
                }
                directive = true;
            }
            if !directive {
                seen_entry = true;
                body.push((line, raw));
            }
        }
        let mut entries = BTreeMap::new();
        for (line, raw) in body {
            let (which, i, j, off) = entry_lhs(line, raw, rank)?;
            let form = parse_form(line, col_of(raw, off), &raw[off..], dim)?;
            let want = match which {
                Which::A => 1,
                Which::B => dim - 2,
            };
            let bad: Vec<usize> = form.degrees().into_iter().filter(|&d| d != want).collect();
            if !bad.is_empty() {
                return Err(ParseError::new(
                    line,
                    col_of(raw, off),
                    format!("entry of {which:?} must be a {want}-form, found a term of degree {}", bad[0]),
                ));
            }
            if entries.insert((which, i, j), form).is_some() {
                return Err(ParseError::new(line, 1, format!("{which:?}[{}][{}] assigned twice", i + 1, j + 1)));
            }
        }
        Ok(Fixture { dim, rank, flat, covariantly_closed: closed, entries })
    }

    fn matrix_form(&self, which: Which) -> MatrixForm {
        let (n, rank) = (self.dim, self.rank);
        let p = match which {
            Which::A => 1,
            Which::B => n - 2,
        };
        let sets = index_sets(n, p);
        // (set position, row, col, coefficient)
        let terms: Arc<Vec<(usize, usize, usize, Scalar)>> = Arc::new(
            self.entries
                .iter()
                .filter(|((w, _, _), _)| *w == which)
                .flat_map(|((_, i, j), f)| {
                    let sets = &sets;
                    f.0.iter().map(move |(idx, s)| (sets.iter().position(|x| x == idx).expect("sorted index set"), *i, *j, s.clone()))
                })
                .collect(),
        );
        let count = sets.len();
        MatrixForm::new(n, p, rank, move |x| {
            let mut out: Vec<Mat> = vec![DMatrix::zeros(rank, rank); count];
            for (k, i, j, s) in terms.iter() {
                out[*k][(*i, *j)] += s.eval(x);
            }
            out
        })
    }

    pub fn connection(&self) -> Result<ConnectionSample, CliError> {
        Ok(ConnectionSample::new(self.matrix_form(Which::A), self.matrix_form(Which::B))?.flagged(self.flat, self.covariantly_closed))
    }
}
