//! Chen iterated integrals on the loop as formal words.
//!
//! A term `Tr_ρ[ Y(γ(0)) ⟨X₁|X₂|…|X_l⟩ ]` stands for
//! `∫_{Δ_l} Tr_ρ[Y · H|₀^{t₁} X₁(t₁) H|_{t₁}^{t₂} ⋯ X_l(t_l) H|_{t_l}^1]`,
//! where each slot `X_i` is a dot-ordered word of letters pulled back at
//! `t_i` and `Y` is an optional word sitting at the base point. The
//! background transports are implicit: their differential
//! `dH|_s^t = -A₀(s)H|_s^t + H|_s^t A₀(t)` turns `d` on slots into the
//! covariant `d_{A₀}`.
//!
//! The boundary of `Δ_l` has the collapse faces `t_i = t_{i+1}` and the two
//! endpoint faces `t₁ = 0`, `t_l = 1`. With bar degree `|X| - 1` of a slot
//! and `ε_i = Σ_{j<i} (|X_j| - 1)` the differential is
//!
//! ```text
//! D⟨X₁|…|X_l⟩ = Σ_i (-1)^{ε_i}     ⟨…|QX_i|…⟩                      interior
//!             + Σ_i (-1)^{ε_{i+1}} ⟨…|X_i X_{i+1}|…⟩               collapse
//!             +                    Tr[X₁(γ(0)) ⟨X₂|…|X_l⟩]         t₁ = 0
//!             - (-1)^{ε_l}         Tr[⟨X₁|…|X_{l-1}⟩ X_l(γ(1))]    t_l = 1
//! ```
//!
//! and the last face is rotated to the front by the cyclic trace, which
//! costs `(-1)^{|X_l| ε_l}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::coeff::Coeff;
use crate::grading::{Generator, Kind};

/// A dot-ordered word of letters in one slot.
pub type SlotWord = Vec<Generator>;

/// A polynomial of slot words.
pub type SlotPoly = Vec<(Coeff, SlotWord)>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IteratedTerm {
    pub based: Option<SlotWord>,
    pub slots: Vec<SlotWord>,
}

pub fn total_degree(w: &[Generator]) -> i32 {
    w.iter().map(|g| g.grading().total()).sum()
}

/// Form degree of a word; superfield letters count zero.
pub fn form_degree(w: &[Generator]) -> i32 {
    w.iter().filter(|g| g.kind() != Kind::Superfield).map(|g| g.grading().deg).sum()
}

fn bar_degree(w: &[Generator]) -> i32 {
    total_degree(w) - 1
}

impl IteratedTerm {
    pub fn unbased(slots: Vec<SlotWord>) -> Self {
        IteratedTerm { based: None, slots }
    }

    pub fn order(&self) -> usize {
        self.slots.len()
    }

    /// Ghost number of all letters.
    pub fn gh(&self) -> i32 {
        self.letters().map(|g| g.grading().gh).sum()
    }

    /// Form degree on the loop space: `Σ (deg X_i - 1)` plus the based word.
    pub fn lm_degree(&self) -> i32 {
        self.slots.iter().map(|w| form_degree(w) - 1).sum::<i32>()
            + self.based.as_deref().map(form_degree).unwrap_or(0)
    }

    pub fn letters(&self) -> impl Iterator<Item = &Generator> {
        self.based.iter().flatten().chain(self.slots.iter().flatten())
    }
}

fn word_str(w: &[Generator]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(ToString::to_string).collect::<Vec<_>>().join("·")
}

impl fmt::Display for IteratedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tr[")?;
        if let Some(b) = &self.based {
            write!(f, "{}@0 ", word_str(b))?;
        }
        write!(f, "⟨")?;
        for (i, w) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{}", word_str(w))?;
        }
        write!(f, "⟩]")
    }
}

/// Which part of the boundary operator produced a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Face {
    /// `Q` applied inside a slot.
    Interior,
    /// Collapse of consecutive points `t_i = t_{i+1}`.
    Collapse,
    /// Endpoint face `t₁ = 0`.
    Start,
    /// Endpoint face `t_l = 1`.
    End,
}

impl Face {
    pub fn is_endpoint(self) -> bool {
        matches!(self, Face::Start | Face::End)
    }
}

/// Formal sum of iterated terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoopExpr {
    terms: BTreeMap<IteratedTerm, Coeff>,
}

impl LoopExpr {
    pub fn new() -> Self {
        LoopExpr::default()
    }

    pub fn add(&mut self, t: IteratedTerm, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(t.clone()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IteratedTerm, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> LoopExpr {
        let mut out = LoopExpr::new();
        for (t, c) in &self.terms {
            out.add(t.clone(), &f(c));
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&IteratedTerm) -> bool) -> LoopExpr {
        let mut out = LoopExpr::new();
        for (t, c) in &self.terms {
            if keep(t) {
                out.add(t.clone(), c);
            }
        }
        out
    }

    pub fn plus(&self, other: &LoopExpr) -> LoopExpr {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add(t.clone(), c);
        }
        out
    }
}

/// Sum over all words of at most `k` slots, each slot drawn from `poly`.
pub fn words_up_to(poly: &SlotPoly, k: usize) -> LoopExpr {
    let mut out = LoopExpr::new();
    let mut layer: Vec<(Coeff, Vec<SlotWord>)> = vec![(Coeff::one(), Vec::new())];
    out.add(IteratedTerm::unbased(Vec::new()), &Coeff::one());
    for _ in 0..k {
        let mut next = Vec::new();
        for (c, slots) in &layer {
            for (pc, w) in poly {
                let mut s = slots.clone();
                s.push(w.clone());
                let c2 = c * pc;
                out.add(IteratedTerm::unbased(s.clone()), &c2);
                next.push((c2, s));
            }
        }
        layer = next;
    }
    out
}

/// Derivation `Q` on dot words with total-degree Leibniz signs.
pub fn derive_word(w: &[Generator], q: &dyn Fn(&Generator) -> SlotPoly) -> SlotPoly {
    let mut out = Vec::new();
    let mut before = 0i32;
    for (i, g) in w.iter().enumerate() {
        for (c, img) in q(g) {
            let mut nw = w[..i].to_vec();
            nw.extend(img);
            nw.extend_from_slice(&w[i + 1..]);
            out.push((c.signed(before.rem_euclid(2) == 1), nw));
        }
        before += g.grading().total();
    }
    out
}

/// The boundary operator, with per-face bookkeeping.
pub struct BarDifferential<'a> {
    pub q: &'a dyn Fn(&Generator) -> SlotPoly,
    /// Slot words of form degree above `n` vanish (superfield letters
    /// excluded). `None` disables the rule.
    pub top_degree: Option<i32>,
}

/// Result of applying the boundary operator: the total and, per term, the
/// faces that contributed.
#[derive(Clone, Debug, Default)]
pub struct FaceSum {
    pub total: LoopExpr,
    pub faces: BTreeMap<IteratedTerm, BTreeSet<Face>>,
}

impl FaceSum {
    fn add(&mut self, t: IteratedTerm, c: &Coeff, face: Face) {
        if c.is_zero() {
            return;
        }
        self.faces.entry(t.clone()).or_default().insert(face);
        self.total.add(t, c);
    }

    /// Faces contributing to a surviving term.
    pub fn faces_of(&self, t: &IteratedTerm) -> Vec<Face> {
        self.faces.get(t).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }
}

impl BarDifferential<'_> {
    fn alive(&self, w: &[Generator]) -> bool {
        self.top_degree.is_none_or(|n| form_degree(w) <= n)
    }

    /// Apply to unbased terms; based input terms are rejected by panic since
    /// the closedness checks never need them.
    pub fn apply(&self, e: &LoopExpr) -> FaceSum {
        let mut out = FaceSum::default();
        for (t, c) in e.terms() {
            assert!(t.based.is_none(), "boundary operator on based term");
            let l = t.slots.len();
            let eps: Vec<i32> = (0..=l).map(|i| t.slots[..i].iter().map(|w| bar_degree(w)).sum()).collect();
            for i in 0..l {
                for (qc, qw) in derive_word(&t.slots[i], self.q) {
                    if !self.alive(&qw) {
                        continue;
                    }
                    let mut s = t.slots.clone();
                    s[i] = qw;
                    out.add(IteratedTerm::unbased(s), &(c * &qc).signed(eps[i].rem_euclid(2) == 1), Face::Interior);
                }
            }
            for i in 0..l.saturating_sub(1) {
                let mut merged = t.slots[i].clone();
                merged.extend(t.slots[i + 1].iter().cloned());
                if !self.alive(&merged) {
                    continue;
                }
                let mut s = t.slots[..i].to_vec();
                s.push(merged);
                s.extend_from_slice(&t.slots[i + 2..]);
                out.add(IteratedTerm::unbased(s), &c.signed(eps[i + 1].rem_euclid(2) == 1), Face::Collapse);
            }
            if l >= 1 {
                let start = IteratedTerm { based: Some(t.slots[0].clone()), slots: t.slots[1..].to_vec() };
                out.add(start, c, Face::Start);
                let last = &t.slots[l - 1];
                let odd = (eps[l - 1] + total_degree(last) * eps[l - 1]).rem_euclid(2) == 1;
                let end = IteratedTerm { based: Some(last.clone()), slots: t.slots[..l - 1].to_vec() };
                out.add(end, &c.signed(!odd), Face::End);
            }
        }
        out
    }
}
