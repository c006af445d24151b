//! Canonical text form of expressions and its JSON mirror.
//!
//! ```text
//! (sum n=3 (mono (coef (t -1 kappa^2)) (int (tr f:A:1:0:1:m f:B:1:0:0:m)) (w f:A:1:0:0:m)))
//! ```
//!
//! A generator token is `kind:name:deg:gh:level:m|s` (`m` for matrix valued).
//! Factor tags: `int` (integral of scalars and traces), `s` (scalar letter),
//! `tr` (trace), and the open word `w`. On input an open word may also be
//! given in dot order with `dot` or `·`.

use serde::{Deserialize, Serialize};

use crate::coeff::{format_q, parse_q, Coeff, ParamMono};
use crate::error::{CoreError, Result};
use crate::expr::{Factor, GExpr, Local, Word};
use crate::grading::{dot_to_wedge_odd, Generator, Grading, Kind};

pub fn generator_token(g: &Generator) -> String {
    let b = g.base_grading();
    format!(
        "{}:{}:{}:{}:{}:{}",
        g.kind().code(),
        g.name(),
        b.deg,
        b.gh,
        g.level(),
        if g.is_algebra() { 'm' } else { 's' }
    )
}

pub fn parse_generator(tok: &str) -> Option<Generator> {
    let parts: Vec<&str> = tok.split(':').collect();
    let [kind, name, deg, gh, level, alg] = parts.as_slice() else {
        return None;
    };
    let mut cs = kind.chars();
    let kind = Kind::from_code(cs.next()?)?;
    if cs.next().is_some() || name.is_empty() {
        return None;
    }
    let base = Grading::new(deg.parse().ok()?, gh.parse().ok()?);
    let algebra = match *alg {
        "m" => true,
        "s" => false,
        _ => return None,
    };
    let level: u8 = level.parse().ok()?;
    Some(Generator::new(name, base, kind, algebra).with_level(level))
}

fn coeff_sexpr(c: &Coeff) -> String {
    let mut s = String::from("(coef");
    for (m, v) in c.terms() {
        s.push_str(" (t ");
        s.push_str(&format_q(v));
        for (name, e) in m.pairs() {
            s.push_str(&format!(" {name}^{e}"));
        }
        s.push(')');
    }
    s.push(')');
    s
}

fn word_sexpr(tag: &str, w: &[Generator]) -> String {
    let mut s = format!("({tag}");
    for g in w {
        s.push(' ');
        s.push_str(&generator_token(g));
    }
    s.push(')');
    s
}

/// Canonical S-expression of an expression.
pub fn to_sexpr(e: &GExpr) -> String {
    let mut s = format!("(sum n={}", e.n());
    for m in e.monomials() {
        s.push_str(" (mono ");
        s.push_str(&coeff_sexpr(m.coeff));
        for f in &m.shape.factors {
            s.push(' ');
            match f {
                Factor::Integral(l) => {
                    s.push_str("(int");
                    for g in &l.scalars {
                        s.push(' ');
                        s.push_str(&word_sexpr("s", std::slice::from_ref(g)));
                    }
                    for w in &l.traces {
                        s.push(' ');
                        s.push_str(&word_sexpr("tr", w));
                    }
                    s.push(')');
                }
                Factor::Scalar(g) => s.push_str(&word_sexpr("s", std::slice::from_ref(g))),
                Factor::Trace(w) => s.push_str(&word_sexpr("tr", w)),
            }
        }
        if let Some(w) = &m.shape.open {
            s.push(' ');
            s.push_str(&word_sexpr("w", w));
        }
        s.push(')');
    }
    s.push(')');
    s
}

// --- reader ------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Sx {
    Atom(String, usize, usize),
    List(Vec<Sx>, usize, usize),
}

impl Sx {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sx::Atom(_, l, c) | Sx::List(_, l, c) => (*l, *c),
        }
    }
}

fn err(at: (usize, usize), message: impl Into<String>) -> CoreError {
    CoreError::Parse { line: at.0, column: at.1, message: message.into() }
}

fn read(text: &str) -> Result<Sx> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    let (mut line, mut col) = (1usize, 1usize);
    let mut stack: Vec<(Vec<Sx>, usize, usize)> = Vec::new();
    let mut result: Option<Sx> = None;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            '(' => {
                stack.push((Vec::new(), line, col));
                i += 1;
                col += 1;
            }
            ')' => {
                let (items, l, c) = stack.pop().ok_or_else(|| err((line, col), "unbalanced ')'"))?;
                let node = Sx::List(items, l, c);
                match stack.last_mut() {
                    Some(top) => top.0.push(node),
                    None if result.is_none() => result = Some(node),
                    None => return Err(err((line, col), "trailing input")),
                }
                i += 1;
                col += 1;
            }
            c if c.is_whitespace() => {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            _ => {
                let (l, c0) = (line, col);
                let mut tok = String::new();
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '(' && chars[i] != ')' {
                    tok.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                match stack.last_mut() {
                    Some(top) => top.0.push(Sx::Atom(tok, l, c0)),
                    None => return Err(err((l, c0), "atom outside of a list")),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(err((*l, *c), "unclosed '('"));
    }
    result.ok_or_else(|| err((line, col), "empty input"))
}

fn list<'a>(x: &'a Sx, tag: &str) -> Result<&'a [Sx]> {
    match x {
        Sx::List(items, ..) => match items.first() {
            Some(Sx::Atom(t, ..)) if t == tag => Ok(&items[1..]),
            _ => Err(err(x.pos(), format!("expected ({tag} ...)"))),
        },
        Sx::Atom(..) => Err(err(x.pos(), format!("expected ({tag} ...)"))),
    }
}

fn head(x: &Sx) -> Option<&str> {
    match x {
        Sx::List(items, ..) => match items.first() {
            Some(Sx::Atom(t, ..)) => Some(t.as_str()),
            _ => None,
        },
        Sx::Atom(..) => None,
    }
}

fn atoms(xs: &[Sx]) -> Result<Vec<(&str, (usize, usize))>> {
    xs.iter()
        .map(|x| match x {
            Sx::Atom(t, l, c) => Ok((t.as_str(), (*l, *c))),
            Sx::List(..) => Err(err(x.pos(), "expected an atom")),
        })
        .collect()
}

fn gens(xs: &[Sx]) -> Result<Word> {
    atoms(xs)?
        .into_iter()
        .map(|(t, p)| parse_generator(t).ok_or_else(|| err(p, format!("bad generator token `{t}`"))))
        .collect()
}

fn parse_coeff(x: &Sx) -> Result<Coeff> {
    let mut c = Coeff::zero();
    for t in list(x, "coef")? {
        let parts = atoms(list(t, "t")?)?;
        let Some(((v, vp), rest)) = parts.split_first() else {
            return Err(err(t.pos(), "empty coefficient term"));
        };
        let v = parse_q(v).ok_or_else(|| err(*vp, format!("bad rational `{v}`")))?;
        let mut pairs = Vec::new();
        for (p, pp) in rest {
            let (name, e) = p.split_once('^').ok_or_else(|| err(*pp, "expected name^exponent"))?;
            let e: i32 = e.parse().map_err(|_| err(*pp, "bad exponent"))?;
            pairs.push((name.to_string(), e));
        }
        c.add_term(ParamMono::from_pairs(pairs), v);
    }
    Ok(c)
}

/// Parse the text form. Input need not be canonical; the result is.
pub fn from_sexpr(text: &str) -> Result<GExpr> {
    let root = read(text)?;
    let items = list(&root, "sum")?;
    let Some((Sx::Atom(nt, l, c), monos)) = items.split_first() else {
        return Err(err(root.pos(), "expected n=<dimension>"));
    };
    let n: u32 = nt
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err((*l, *c), "expected n=<dimension>"))?;
    let mut out = GExpr::zero(n);
    for m in monos {
        let parts = list(m, "mono")?;
        let Some((cx, rest)) = parts.split_first() else {
            return Err(err(m.pos(), "empty monomial"));
        };
        let mut coeff = parse_coeff(cx)?;
        let mut factors = Vec::new();
        let mut open = None;
        for f in rest {
            match head(f) {
                Some("s") => {
                    let w = gens(list(f, "s")?)?;
                    factors.extend(w.into_iter().map(Factor::Scalar));
                }
                Some("tr") => factors.push(Factor::Trace(gens(list(f, "tr")?)?)),
                Some("int") => {
                    let mut local = Local::default();
                    for g in list(f, "int")? {
                        match head(g) {
                            Some("s") => local.scalars.extend(gens(list(g, "s")?)?),
                            Some("tr") => local.traces.push(gens(list(g, "tr")?)?),
                            _ => return Err(err(g.pos(), "expected (s ...) or (tr ...) inside int")),
                        }
                    }
                    factors.push(Factor::Integral(local));
                }
                Some(tag @ ("w" | "dot" | "·")) => {
                    let w = gens(list(f, tag)?)?;
                    if tag != "w" {
                        let gr: Vec<Grading> = w.iter().map(Generator::grading).collect();
                        coeff = coeff.signed(dot_to_wedge_odd(&gr));
                    }
                    open = Some(w);
                }
                _ => return Err(err(f.pos(), "unknown factor tag")),
            }
        }
        out.add_raw(coeff, factors, open);
    }
    Ok(out)
}

// --- JSON mirror ---------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonTerm {
    pub coeff: Vec<(String, Vec<(String, i32)>)>,
    pub factors: Vec<JsonFactor>,
    pub open: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum JsonFactor {
    Int { scalars: Vec<String>, traces: Vec<Vec<String>> },
    Scalar(String),
    Trace(Vec<String>),
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonExpr {
    pub n: u32,
    pub terms: Vec<JsonTerm>,
}

fn toks(w: &[Generator]) -> Vec<String> {
    w.iter().map(generator_token).collect()
}

pub fn to_json(e: &GExpr) -> JsonExpr {
    let terms = e
        .monomials()
        .map(|m| JsonTerm {
            coeff: m
                .coeff
                .terms()
                .map(|(p, v)| (format_q(v), p.pairs().to_vec()))
                .collect(),
            factors: m
                .shape
                .factors
                .iter()
                .map(|f| match f {
                    Factor::Integral(l) => JsonFactor::Int { scalars: toks(&l.scalars), traces: l.traces.iter().map(|w| toks(w)).collect() },
                    Factor::Scalar(g) => JsonFactor::Scalar(generator_token(g)),
                    Factor::Trace(w) => JsonFactor::Trace(toks(w)),
                })
                .collect(),
            open: m.shape.open.as_deref().map(toks),
        })
        .collect();
    JsonExpr { n: e.n(), terms }
}

fn untoks(ts: &[String]) -> Result<Word> {
    ts.iter()
        .map(|t| parse_generator(t).ok_or_else(|| err((0, 0), format!("bad generator token `{t}`"))))
        .collect()
}

pub fn from_json(j: &JsonExpr) -> Result<GExpr> {
    let mut out = GExpr::zero(j.n);
    for t in &j.terms {
        let mut c = Coeff::zero();
        for (v, pairs) in &t.coeff {
            let v = parse_q(v).ok_or_else(|| err((0, 0), format!("bad rational `{v}`")))?;
            c.add_term(ParamMono::from_pairs(pairs.iter().cloned()), v);
        }
        let mut factors = Vec::new();
        for f in &t.factors {
            factors.push(match f {
                JsonFactor::Int { scalars, traces } => Factor::Integral(Local {
                    scalars: untoks(scalars)?,
                    traces: traces.iter().map(|w| untoks(w)).collect::<Result<_>>()?,
                }),
                JsonFactor::Scalar(g) => Factor::Scalar(untoks(std::slice::from_ref(g))?.remove(0)),
                JsonFactor::Trace(w) => Factor::Trace(untoks(w)?),
            });
        }
        let open = t.open.as_deref().map(untoks).transpose()?;
        out.add_raw(c, factors, open);
    }
    Ok(out)
}
