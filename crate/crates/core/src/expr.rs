//! Canonical expression IR for the bigraded algebra.
//!
//! A monomial is a rational-polynomial coefficient times a product of
//! factors followed by an optional open (matrix-valued) word:
//!
//! ```text
//!   c · ∫(local) ⋯ ∫(local) · s1 ⋯ sk · Tr(w1) ⋯ Tr(wm) · (x1 ∧ ⋯ ∧ xl)
//! ```
//!
//! Products are stored in wedge order; the sign for swapping homogeneous
//! α, β is `(-1)^(deg α deg β + gh α gh β)`. Dot products and dot brackets
//! are converted to wedge order on construction. Integrated factors carry
//! grading `(0, gh)` and are normalized modulo total derivatives.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::{Coeff, Q};
use crate::error::CoreError;
use crate::grading::{dot_to_wedge_odd, koszul, word_grading, Generator, Grading, Kind};
use crate::stokes;

pub type Word = Vec<Generator>;

/// A local density: commuting scalar letters times traces of words, all at
/// one point of the manifold.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Local {
    pub scalars: Vec<Generator>,
    pub traces: Vec<Word>,
}

impl Local {
    pub fn grading(&self) -> Grading {
        self.scalars.iter().map(Generator::grading).sum::<Grading>()
            + self.traces.iter().map(|w| word_grading(w)).sum()
    }

    pub fn letters(&self) -> impl Iterator<Item = &Generator> {
        self.scalars.iter().chain(self.traces.iter().flatten())
    }

    pub fn has_superfield(&self) -> bool {
        self.letters().any(|g| g.kind() == Kind::Superfield)
    }

    pub fn derivative_count(&self) -> usize {
        self.letters().filter(|g| g.level() > 0).count()
    }

    pub fn letter_count(&self) -> usize {
        self.scalars.len() + self.traces.iter().map(Vec::len).sum::<usize>()
    }

    /// Apply `f` to the letter at flat position `pos` (scalars first, then
    /// trace letters in order).
    pub(crate) fn map_letter(&self, pos: usize, f: impl FnOnce(&Generator) -> Generator) -> Local {
        let mut out = self.clone();
        if pos < out.scalars.len() {
            out.scalars[pos] = f(&out.scalars[pos]);
            return out;
        }
        let mut p = pos - out.scalars.len();
        for w in out.traces.iter_mut() {
            if p < w.len() {
                w[p] = f(&w[p]);
                return out;
            }
            p -= w.len();
        }
        panic!("letter position {pos} out of range");
    }

    pub(crate) fn flat_letters(&self) -> Vec<Generator> {
        self.letters().cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// `∫_M` of a top-degree local density.
    Integral(Local),
    /// A scalar (non algebra-valued) generator.
    Scalar(Generator),
    /// Trace of a word of algebra-valued generators.
    Trace(Word),
}

impl Factor {
    pub fn grading(&self) -> Grading {
        match self {
            Factor::Integral(l) => Grading::new(0, l.grading().gh),
            Factor::Scalar(g) => g.grading(),
            Factor::Trace(w) => word_grading(w),
        }
    }

    fn local_deg(&self) -> i32 {
        match self {
            Factor::Integral(_) => 0,
            Factor::Scalar(g) => truncating_deg(g),
            Factor::Trace(w) => w.iter().map(truncating_deg).sum(),
        }
    }
}

fn truncating_deg(g: &Generator) -> i32 {
    if g.kind() == Kind::Superfield {
        0
    } else {
        g.grading().deg
    }
}

/// The non-coefficient part of a monomial; the key of [`GExpr`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shape {
    pub factors: Vec<Factor>,
    pub open: Option<Word>,
}

impl Shape {
    pub fn grading(&self) -> Grading {
        self.factors.iter().map(Factor::grading).sum::<Grading>()
            + self.open.as_deref().map(word_grading).unwrap_or_default()
    }

    /// Form degree at the evaluation point (integrals excluded).
    pub fn local_deg(&self) -> i32 {
        self.factors.iter().map(Factor::local_deg).sum::<i32>()
            + self
                .open
                .as_deref()
                .map(|w| w.iter().map(truncating_deg).sum())
                .unwrap_or(0)
    }

    pub fn is_algebra_valued(&self) -> bool {
        self.open.is_some()
    }

    /// All letters, integrals included.
    pub fn letters(&self) -> Vec<&Generator> {
        let mut out = Vec::new();
        for f in &self.factors {
            match f {
                Factor::Integral(l) => out.extend(l.letters()),
                Factor::Scalar(g) => out.push(g),
                Factor::Trace(w) => out.extend(w.iter()),
            }
        }
        if let Some(w) = &self.open {
            out.extend(w.iter());
        }
        out
    }

    pub fn contains(&self, pred: impl Fn(&Generator) -> bool) -> bool {
        self.letters().into_iter().any(pred)
    }
}

/// Borrowed view of one monomial.
#[derive(Clone, Copy, Debug)]
pub struct Monomial<'a> {
    pub coeff: &'a Coeff,
    pub shape: &'a Shape,
}

/// How a differential distributes over products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LeibnizMode {
    /// Wedge algebra: `d(αβ) = dα β + (-1)^{deg α} α dβ`.
    Wedge,
    /// Dot algebra: `d(α·β) = dα·β + (-1)^{total α} α·dβ`.
    Dot,
}

/// A canonical formal sum of monomials bound to a dimension-`n` context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GExpr {
    n: u32,
    terms: BTreeMap<Shape, Coeff>,
}

// --- canonicalization helpers ------------------------------------------------

/// Insertion sort that tracks the Koszul sign. Returns `None` when two equal
/// adjacent items are odd under self-exchange (the product vanishes).
pub(crate) fn sort_signed<T: Ord>(items: &mut [T], grading: impl Fn(&T) -> Grading) -> Option<bool> {
    let mut neg = false;
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1] > items[j] {
            neg ^= koszul(grading(&items[j - 1]), grading(&items[j]));
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in items.windows(2) {
        if w[0] == w[1] {
            let g = grading(&w[0]);
            if koszul(g, g) {
                return None;
            }
        }
    }
    Some(neg)
}

/// Rotate a trace word to its lexicographically minimal rotation (lowest
/// rotation index on ties), applying the cyclic Koszul sign. `None` when two
/// rotations give the same word with opposite signs.
pub fn canon_trace(w: &[Generator]) -> Option<(bool, Word)> {
    if w.is_empty() {
        return Some((false, Vec::new()));
    }
    let mut cur: Word = w.to_vec();
    let mut sign = false;
    let mut best = cur.clone();
    let mut best_sign = false;
    let mut conflict = false;
    for r in 0..w.len() {
        if r > 0 {
            if cur < best {
                best = cur.clone();
                best_sign = sign;
                conflict = false;
            } else if cur == best && sign != best_sign {
                conflict = true;
            }
        }
        let first = cur[0].grading();
        let rest = word_grading(&cur[1..]);
        sign ^= koszul(first, rest);
        cur.rotate_left(1);
    }
    if conflict {
        None
    } else {
        Some((best_sign, best))
    }
}

fn exceeds(g: &Generator, n: u32) -> bool {
    g.kind() != Kind::Superfield && g.grading().deg > n as i32
}

/// Canonicalize a local density without integration by parts. Empty traces
/// are returned separately as a count (each is `Tr(1) = N`).
pub(crate) fn canon_local(local: &Local, n: u32) -> Option<(bool, Local, u32)> {
    if local.letters().any(|g| exceeds(g, n)) {
        return None;
    }
    let mut neg = false;
    let mut scalars = local.scalars.clone();
    neg ^= sort_signed(&mut scalars, Generator::grading)?;
    let mut traces = Vec::new();
    let mut n_unit = 0;
    for w in &local.traces {
        let (s, cw) = canon_trace(w)?;
        neg ^= s;
        if cw.is_empty() {
            n_unit += 1;
        } else {
            traces.push(cw);
        }
    }
    neg ^= sort_signed(&mut traces, |w| word_grading(w))?;
    Some((neg, Local { scalars, traces }, n_unit))
}

fn n_power(count: u32) -> Coeff {
    if count == 0 {
        Coeff::one()
    } else {
        Coeff::param("N", count as i32)
    }
}

/// Canonicalize a raw product. Returns the list of `(multiplier, shape)`
/// pairs it expands to (integration by parts may produce several).
pub(crate) fn canon_shape(factors: Vec<Factor>, open: Option<Word>, n: u32) -> Vec<(Coeff, Shape)> {
    if let Some(w) = &open {
        if w.iter().any(|g| exceeds(g, n)) {
            return Vec::new();
        }
    }
    // Expand each factor into a linear combination of canonical factors.
    let mut options: Vec<Vec<(Coeff, Option<Factor>)>> = Vec::with_capacity(factors.len());
    for f in factors {
        let opts = match f {
            Factor::Scalar(g) => {
                if exceeds(&g, n) {
                    return Vec::new();
                }
                vec![(Coeff::one(), Some(Factor::Scalar(g)))]
            }
            Factor::Trace(w) => {
                if w.iter().any(|g| exceeds(g, n)) {
                    return Vec::new();
                }
                match canon_trace(&w) {
                    None => return Vec::new(),
                    Some((neg, cw)) if cw.is_empty() => {
                        vec![(Coeff::param("N", 1).signed(neg), None)]
                    }
                    Some((neg, cw)) => vec![(Coeff::one().signed(neg), Some(Factor::Trace(cw)))],
                }
            }
            Factor::Integral(local) => {
                let Some((neg, cl, units)) = canon_local(&local, n) else {
                    return Vec::new();
                };
                let pre = n_power(units).signed(neg);
                if cl.has_superfield() {
                    vec![(pre, Some(Factor::Integral(cl)))]
                } else {
                    if cl.grading().deg != n as i32 {
                        return Vec::new();
                    }
                    let reduced = stokes::reduce(&cl, n);
                    if reduced.is_empty() {
                        return Vec::new();
                    }
                    reduced
                        .into_iter()
                        .map(|(c, l)| (pre.scale(c), Some(Factor::Integral(l))))
                        .collect()
                }
            }
        };
        options.push(opts);
    }

    let mut combos: Vec<(Coeff, Vec<Factor>)> = vec![(Coeff::one(), Vec::new())];
    for opts in options {
        let mut next = Vec::with_capacity(combos.len() * opts.len());
        for (c, fs) in &combos {
            for (c2, f) in &opts {
                let mut fs2 = fs.clone();
                if let Some(f) = f {
                    fs2.push(f.clone());
                }
                next.push((c * c2, fs2));
            }
        }
        combos = next;
    }

    let mut out = Vec::new();
    for (c, mut fs) in combos {
        let Some(neg) = sort_signed(&mut fs, Factor::grading) else {
            continue;
        };
        let shape = Shape { factors: fs, open: open.clone() };
        if shape.local_deg() > n as i32 {
            continue;
        }
        out.push((c.signed(neg), shape));
    }
    out
}

// --- GExpr -------------------------------------------------------------------

impl GExpr {
    pub fn zero(n: u32) -> Self {
        GExpr { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// A scalar constant.
    pub fn constant(n: u32, c: Coeff) -> Self {
        let mut e = GExpr::zero(n);
        e.push_canonical(c, Shape::default());
        e
    }

    /// The algebra identity times `c`.
    pub fn identity(n: u32, c: Coeff) -> Self {
        let mut e = GExpr::zero(n);
        e.push_canonical(c, Shape { factors: Vec::new(), open: Some(Vec::new()) });
        e
    }

    /// A single generator: open word if algebra valued, scalar factor otherwise.
    pub fn gen(n: u32, g: &Generator) -> Self {
        GExpr::from_raw(n, Coeff::one(), raw_letter(g))
    }

    pub fn from_raw(n: u32, coeff: Coeff, (factors, open): (Vec<Factor>, Option<Word>)) -> Self {
        let mut e = GExpr::zero(n);
        e.add_raw(coeff, factors, open);
        e
    }

    /// Canonicalize and accumulate a raw product.
    pub fn add_raw(&mut self, coeff: Coeff, factors: Vec<Factor>, open: Option<Word>) {
        if coeff.is_zero() {
            return;
        }
        for (m, shape) in canon_shape(factors, open, self.n) {
            self.push_canonical(&coeff * &m, shape);
        }
    }

    /// Accumulate a monomial whose shape is already canonical (for example
    /// one taken from another expression of the same dimension).
    pub fn push_canonical(&mut self, coeff: Coeff, shape: Shape) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(shape.clone()).or_default();
        *slot += &coeff;
        if slot.is_zero() {
            self.terms.remove(&shape);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial<'_>> {
        self.terms.iter().map(|(shape, coeff)| Monomial { coeff, shape })
    }

    pub fn coefficient(&self, shape: &Shape) -> Coeff {
        self.terms.get(shape).cloned().unwrap_or_default()
    }

    fn check(&self, other: &GExpr) -> Result<(), CoreError> {
        if self.n != other.n {
            return Err(CoreError::ContextMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn plus(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.check(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.push_canonical(c.clone(), s.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.plus(&other.neg())
    }

    pub fn neg(&self) -> GExpr {
        self.scaled(&Coeff::int(-1))
    }

    pub fn scaled(&self, c: &Coeff) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, v) in &self.terms {
            out.push_canonical(v * c, s.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &GExpr) -> Result<(), CoreError> {
        self.check(other)?;
        for (s, c) in &other.terms {
            self.push_canonical(c.clone(), s.clone());
        }
        Ok(())
    }

    /// Wedge product (bilinear, canonicalized, eager top-degree truncation).
    pub fn wedge(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.check(other)?;
        let mut out = GExpr::zero(self.n);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let (coeff, raw) = wedge_shapes(s1, s2);
                out.add_raw(&(c1 * c2) * &coeff, raw.0, raw.1);
            }
        }
        Ok(out)
    }

    /// `α·β = (-1)^{gh α deg β} α∧β`, applied monomial-pairwise.
    pub fn dot(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.check(other)?;
        let mut out = GExpr::zero(self.n);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let odd = (s1.grading().gh * s2.grading().deg).rem_euclid(2) == 1;
                let (coeff, raw) = wedge_shapes(s1, s2);
                out.add_raw(&(c1 * c2) * &coeff.signed(odd), raw.0, raw.1);
            }
        }
        Ok(out)
    }

    /// Graded commutator `[α,β] = α∧β - (-1)^{deg α deg β + gh α gh β} β∧α`
    /// of algebra-valued expressions.
    pub fn bracket(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.bracket_impl(other, false)
    }

    /// `[α,β]· = (-1)^{gh α deg β} [α,β]`.
    pub fn dot_bracket(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.bracket_impl(other, true)
    }

    fn bracket_impl(&self, other: &GExpr, dotted: bool) -> Result<GExpr, CoreError> {
        self.check(other)?;
        if !self.is_algebra_valued() || !other.is_algebra_valued() {
            return Err(CoreError::NotAlgebraValued);
        }
        let mut out = GExpr::zero(self.n);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let (g1, g2) = (s1.grading(), s2.grading());
                let pre = dotted && (g1.gh * g2.deg).rem_euclid(2) == 1;
                let c = (c1 * c2).signed(pre);
                let (k, raw) = wedge_shapes(s1, s2);
                out.add_raw(&c * &k, raw.0, raw.1);
                let (k, raw) = wedge_shapes(s2, s1);
                out.add_raw((&c * &k).signed(!koszul(g1, g2)), raw.0, raw.1);
            }
        }
        Ok(out)
    }

    /// `true` if every monomial is algebra valued (and there is at least one,
    /// or the expression is zero).
    pub fn is_algebra_valued(&self) -> bool {
        self.terms.keys().all(Shape::is_algebra_valued)
    }

    /// Trace of an algebra-valued expression.
    pub fn trace(&self) -> Result<GExpr, CoreError> {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            let Some(w) = &s.open else {
                return Err(CoreError::NotAlgebraValued);
            };
            let mut fs = s.factors.clone();
            fs.push(Factor::Trace(w.clone()));
            out.add_raw(c.clone(), fs, None);
        }
        Ok(out)
    }

    /// `⟨α,β⟩ = Tr(α∧β)`.
    pub fn pairing(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.wedge(other)?.trace()
    }

    /// `⟨α,β⟩· = (-1)^{gh α deg β} ⟨α,β⟩ = Tr(α·β)`.
    pub fn dot_pairing(&self, other: &GExpr) -> Result<GExpr, CoreError> {
        self.dot(other)?.trace()
    }

    /// Integral over M of the form-degree-`n` part. Scalar and trace factors
    /// are absorbed into the integrand; integral factors stay outside.
    pub fn integrate_top(&self) -> Result<GExpr, CoreError> {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            if s.open.is_some() {
                return Err(CoreError::NotScalar);
            }
            let mut outer = Vec::new();
            let mut local = Local::default();
            for f in &s.factors {
                match f {
                    Factor::Integral(_) => outer.push(f.clone()),
                    Factor::Scalar(g) => local.scalars.push(g.clone()),
                    Factor::Trace(w) => local.traces.push(w.clone()),
                }
            }
            if !local.has_superfield() && local.grading().deg != self.n as i32 {
                continue;
            }
            outer.push(Factor::Integral(local));
            out.add_raw(c.clone(), outer, None);
        }
        Ok(out)
    }

    /// The background covariant differential `d_{A0}` (flat, so `d² = 0`).
    pub fn differential(&self, mode: LeibnizMode) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            match mode {
                LeibnizMode::Wedge => differential_wedge(s, c, &mut out),
                LeibnizMode::Dot => differential_dot(s, c, &mut out),
            }
        }
        out
    }

    /// Replace letters: `f` returns the image of a letter, or `None` to keep
    /// it. Products are rebuilt in the original order.
    pub fn substitute(&self, f: &dyn Fn(&Generator) -> Option<GExpr>) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            let e = rebuild(self.n, c, s, &mut |_, g| f(g));
            out.add_assign(&e).expect("same context");
        }
        out
    }

    /// Drop every monomial containing a letter matching `pred`.
    pub fn set_zero(&self, pred: impl Fn(&Generator) -> bool) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            if !s.contains(&pred) {
                out.push_canonical(c.clone(), s.clone());
            }
        }
        out
    }

    /// Keep only monomials whose shape satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Shape) -> bool) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            if keep(s) {
                out.push_canonical(c.clone(), s.clone());
            }
        }
        out
    }

    /// Apply a map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            out.push_canonical(f(c), s.clone());
        }
        out
    }

    /// Re-run canonicalization on every monomial.
    pub fn recanonicalize(&self) -> GExpr {
        let mut out = GExpr::zero(self.n);
        for (s, c) in &self.terms {
            out.add_raw(c.clone(), s.factors.clone(), s.open.clone());
        }
        out
    }

    /// Distinct (form degree, ghost number) pairs appearing.
    pub fn gradings(&self) -> Vec<Grading> {
        let mut v: Vec<Grading> = self.terms.keys().map(Shape::grading).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Grading audit: every monomial must have `0 <= local deg <= n` and
    /// every generator `0 <= deg <= n`. Returns the offending shapes.
    pub fn audit(&self) -> Vec<Shape> {
        self.terms
            .keys()
            .filter(|s| {
                let ld = s.local_deg();
                ld < 0
                    || ld > self.n as i32
                    || s
                        .letters()
                        .iter()
                        .any(|g| g.kind() != Kind::Superfield && (g.grading().deg < 0 || g.grading().deg > self.n as i32))
            })
            .cloned()
            .collect()
    }

    /// Largest absolute rational coefficient (parameter-free part ignored).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(Coeff::max_abs).fold(0.0, f64::max)
    }
}

/// Rebuild one monomial, replacing the letter at flat position `pos` by
/// `f(pos, letter)` when that returns `Some`. Flat positions run over the
/// letters of the factors in order (integrands included), then the open word.
pub(crate) fn rebuild(
    n: u32,
    coeff: &Coeff,
    s: &Shape,
    f: &mut dyn FnMut(usize, &Generator) -> Option<GExpr>,
) -> GExpr {
    let mut pos = 0usize;
    let mut image = |g: &Generator| {
        let r = f(pos, g).unwrap_or_else(|| GExpr::gen(n, g));
        pos += 1;
        r
    };
    let mut acc = GExpr::constant(n, coeff.clone());
    for fac in &s.factors {
        let piece = match fac {
            Factor::Scalar(g) => image(g),
            Factor::Trace(w) => {
                let p = product(n, w.iter().map(&mut image).collect::<Vec<_>>());
                p.trace().expect("trace of word")
            }
            Factor::Integral(l) => {
                let mut body = GExpr::constant(n, Coeff::one());
                for g in &l.scalars {
                    body = body.wedge(&image(g)).expect("same context");
                }
                for w in &l.traces {
                    let p = product(n, w.iter().map(&mut image).collect::<Vec<_>>());
                    body = body.wedge(&p.trace().expect("trace of word")).expect("same context");
                }
                body.integrate_top().expect("scalar integrand")
            }
        };
        acc = acc.wedge(&piece).expect("same context");
        if acc.is_zero() {
            return acc;
        }
    }
    if let Some(w) = &s.open {
        let p = if w.is_empty() {
            GExpr::identity(n, Coeff::one())
        } else {
            product(n, w.iter().map(&mut image).collect::<Vec<_>>())
        };
        acc = acc.wedge(&p).expect("same context");
    }
    acc
}

/// Ordered product of expressions in the wedge algebra.
pub fn product(n: u32, items: impl IntoIterator<Item = GExpr>) -> GExpr {
    let mut acc: Option<GExpr> = None;
    for e in items {
        acc = Some(match acc {
            None => e,
            Some(a) => a.wedge(&e).expect("same context"),
        });
    }
    acc.unwrap_or_else(|| GExpr::constant(n, Coeff::one()))
}

/// Ordered product in the dot algebra.
pub fn dot_product(n: u32, items: impl IntoIterator<Item = GExpr>) -> GExpr {
    let mut acc: Option<GExpr> = None;
    for e in items {
        acc = Some(match acc {
            None => e,
            Some(a) => a.dot(&e).expect("same context"),
        });
    }
    acc.unwrap_or_else(|| GExpr::constant(n, Coeff::one()))
}

pub(crate) fn raw_letter(g: &Generator) -> (Vec<Factor>, Option<Word>) {
    if g.is_algebra() {
        (Vec::new(), Some(vec![g.clone()]))
    } else {
        (vec![Factor::Scalar(g.clone())], None)
    }
}

/// Raw wedge product of two canonical shapes: the factors of `b` move left
/// past the open word of `a`.
fn wedge_shapes(a: &Shape, b: &Shape) -> (Coeff, (Vec<Factor>, Option<Word>)) {
    let mut factors = a.factors.clone();
    factors.extend(b.factors.iter().cloned());
    let b_fac: Grading = b.factors.iter().map(Factor::grading).sum();
    let a_open = a.open.as_deref().map(word_grading).unwrap_or_default();
    let neg = koszul(a_open, b_fac);
    let open = match (&a.open, &b.open) {
        (Some(x), Some(y)) => {
            let mut w = x.clone();
            w.extend(y.iter().cloned());
            Some(w)
        }
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (None, None) => None,
    };
    (Coeff::one().signed(neg), (factors, open))
}

/// Flat sequence of "atoms" of a shape for Leibniz rules: integrals are
/// inert atoms, every other letter is its own atom.
#[derive(Clone)]
enum Atom {
    Inert(Grading),
    Letter(Generator),
}

impl Atom {
    fn grading(&self) -> Grading {
        match self {
            Atom::Inert(g) => *g,
            Atom::Letter(l) => l.grading(),
        }
    }
}

fn atoms(s: &Shape) -> Vec<Atom> {
    let mut v = Vec::new();
    for f in &s.factors {
        match f {
            Factor::Integral(_) => v.push(Atom::Inert(f.grading())),
            Factor::Scalar(g) => v.push(Atom::Letter(g.clone())),
            Factor::Trace(w) => v.extend(w.iter().cloned().map(Atom::Letter)),
        }
    }
    if let Some(w) = &s.open {
        v.extend(w.iter().cloned().map(Atom::Letter));
    }
    v
}

/// Rebuild a raw shape from `s` with the letter at atom position `pos`
/// replaced by `g`.
fn replace_atom(s: &Shape, pos: usize, g: Generator) -> (Vec<Factor>, Option<Word>) {
    let mut idx = 0usize;
    let mut factors = Vec::with_capacity(s.factors.len());
    let mut g = Some(g);
    for f in &s.factors {
        match f {
            Factor::Integral(_) => {
                factors.push(f.clone());
                idx += 1;
            }
            Factor::Scalar(x) => {
                factors.push(Factor::Scalar(if idx == pos { g.take().unwrap() } else { x.clone() }));
                idx += 1;
            }
            Factor::Trace(w) => {
                let mut w2 = w.clone();
                for l in w2.iter_mut() {
                    if idx == pos {
                        *l = g.take().unwrap();
                    }
                    idx += 1;
                }
                factors.push(Factor::Trace(w2));
            }
        }
    }
    let open = s.open.as_ref().map(|w| {
        let mut w2 = w.clone();
        for l in w2.iter_mut() {
            if idx == pos {
                *l = g.take().unwrap();
            }
            idx += 1;
        }
        w2
    });
    (factors, open)
}

fn differential_wedge(s: &Shape, c: &Coeff, out: &mut GExpr) {
    let ats = atoms(s);
    let mut deg_before = 0i32;
    for (i, a) in ats.iter().enumerate() {
        if let Atom::Letter(g) = a {
            if let Some(dg) = g.derived() {
                let neg = deg_before.rem_euclid(2) == 1;
                let (f, o) = replace_atom(s, i, dg);
                out.add_raw(c.signed(neg), f, o);
            }
        }
        deg_before += a.grading().deg;
    }
}

fn differential_dot(s: &Shape, c: &Coeff, out: &mut GExpr) {
    let ats = atoms(s);
    let grads: Vec<Grading> = ats.iter().map(Atom::grading).collect();
    // wedge = (-1)^{s0} dot
    let s0 = dot_to_wedge_odd(&grads);
    let mut total_before = 0i32;
    for (i, a) in ats.iter().enumerate() {
        if let Atom::Letter(g) = a {
            if let Some(dg) = g.derived() {
                let mut g2 = grads.clone();
                g2[i] = dg.grading();
                let s1 = dot_to_wedge_odd(&g2);
                let neg = s0 ^ (total_before.rem_euclid(2) == 1) ^ s1;
                let (f, o) = replace_atom(s, i, dg);
                out.add_raw(c.signed(neg), f, o);
            }
        }
        total_before += a.grading().total();
    }
}

impl fmt::Display for GExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for fac in &s.factors {
                match fac {
                    Factor::Integral(l) => {
                        write!(f, " ∫[")?;
                        let mut first = true;
                        for g in &l.scalars {
                            if !first {
                                write!(f, " ")?;
                            }
                            write!(f, "{g}")?;
                            first = false;
                        }
                        for w in &l.traces {
                            if !first {
                                write!(f, " ")?;
                            }
                            write!(f, "Tr({})", join(w))?;
                            first = false;
                        }
                        write!(f, "]")?;
                    }
                    Factor::Scalar(g) => write!(f, " {g}")?,
                    Factor::Trace(w) => write!(f, " Tr({})", join(w))?,
                }
            }
            if let Some(w) = &s.open {
                if w.is_empty() {
                    write!(f, " 1")?;
                } else {
                    write!(f, " {}", join(w))?;
                }
            }
        }
        Ok(())
    }
}

fn join(w: &[Generator]) -> String {
    w.iter().map(ToString::to_string).collect::<Vec<_>>().join("∧")
}

/// Convenience: multiply by a rational.
pub fn rat(n: u32, v: Q) -> GExpr {
    GExpr::constant(n, Coeff::from_q(v))
}
