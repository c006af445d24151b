//! Component expansion of the observables and ghost-number projection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bv::{antibracket, formal_laplacian, BVContext, Report, Status};
use crate::coeff::{qf, Coeff};
use crate::error::{CoreError, Result};
use crate::expr::{GExpr, Shape};
use crate::grading::{Generator, Kind};
use crate::sexpr;

use super::closedness::{connection_slot, interaction_sign, superfield_letters};
use super::family::{order_weight, project_coeff, CoefficientSequences, Family, Projection, KAPPA};
use super::iterated::{form_degree, words_up_to, IteratedTerm, LoopExpr, SlotPoly, SlotWord};

/// The superfield-level holonomy `Σ_{l ≤ k} ⟨𝒜|…|𝒜⟩` with `𝒜 = 𝖺 + κ𝖡`.
pub fn expand_holonomy(n: u32, k: i64) -> Result<LoopExpr> {
    if k < 0 {
        return Err(CoreError::Argument(format!("truncation order must be non-negative, got {k}")));
    }
    let (a, b) = superfield_letters(n);
    let poly: SlotPoly = vec![(Coeff::one(), vec![a]), (Coeff::param(KAPPA, 1), vec![b])];
    Ok(words_up_to(&poly, k as usize))
}

/// Components of `𝖺` and `𝖡` as `(sign, letter)` lists.
pub fn superfield_components(ctx: &BVContext) -> (SlotPoly, SlotPoly) {
    let (a, b) = ctx.build_superfields();
    let comps = |e: &GExpr| -> SlotPoly {
        e.monomials()
            .map(|m| (m.coeff.clone(), m.shape.open.clone().expect("algebra-valued superfield")))
            .collect()
    };
    (comps(a.expr()), comps(b.expr()))
}

/// Which strand of the framed loop a component letter lives on: components
/// of `𝖺` on the loop itself, components of `𝖡` on the framing companion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strand {
    Imbedding,
    Companion,
}

fn expand_word(word: &SlotWord, a: &Generator, comps_a: &SlotPoly, comps_b: &SlotPoly, n: i32) -> SlotPoly {
    let mut acc: SlotPoly = vec![(Coeff::one(), Vec::new())];
    for g in word {
        let comps = if g == a { comps_a } else { comps_b };
        let mut next = Vec::new();
        for (c, w) in &acc {
            for (cc, cw) in comps {
                let mut nw = w.clone();
                nw.extend(cw.iter().cloned());
                if form_degree(&nw) <= n {
                    next.push((c * cc, nw));
                }
            }
        }
        acc = next;
    }
    acc
}

/// Replace superfield letters by their components. Slots of form degree
/// zero drop out of the fiber integral, as do slots above the top degree.
pub fn expand_components(ctx: &BVContext, e: &LoopExpr) -> LoopExpr {
    let n = ctx.n() as i32;
    let (a, _) = superfield_letters(ctx.n());
    let (ca, cb) = superfield_components(ctx);
    let mut out = LoopExpr::new();
    for (t, c) in e.terms() {
        let mut acc: Vec<(Coeff, Vec<SlotWord>)> = vec![(c.clone(), Vec::new())];
        for slot in &t.slots {
            let mut next = Vec::new();
            for (pc, slots) in &acc {
                for (wc, w) in expand_word(slot, &a, &ca, &cb, n) {
                    if form_degree(&w) < 1 {
                        continue;
                    }
                    let mut s = slots.clone();
                    s.push(w);
                    next.push((pc * &wc, s));
                }
            }
            acc = next;
        }
        for (c, slots) in acc {
            out.add(IteratedTerm { based: t.based.clone(), slots }, &c);
        }
    }
    out
}

/// `S₃ = (1/6)∫⟨𝖡, [𝖡,𝖡]·⟩·`.
pub fn cubic_interaction(ctx: &BVContext) -> Result<GExpr> {
    let (_, b) = ctx.build_superfields();
    let b = b.expr();
    Ok(b.dot_pairing(&b.dot_bracket(b)?)?.integrate_top()?.scaled(&Coeff::from_q(qf(1, 6))))
}

/// `O_r = (1/r)∫Tr 𝖡^r`.
pub fn power_interaction(ctx: &BVContext, r: usize) -> Result<GExpr> {
    if r == 0 {
        return Err(CoreError::Argument("O_r needs r ≥ 1".into()));
    }
    let (_, b) = ctx.build_superfields();
    let b = b.expr();
    let mut p = b.clone();
    for _ in 1..r {
        p = p.dot(b)?;
    }
    Ok(p.trace()?.integrate_top()?.scaled(&Coeff::from_q(qf(1, r as i128))))
}

/// The functional in the exponent, without the `i/ℏ`.
pub fn interaction(ctx: &BVContext, family: Family, seqs: &CoefficientSequences) -> Result<GExpr> {
    let n = ctx.n();
    if family == Family::Hhat {
        let s3 = cubic_interaction(ctx)?;
        if s3.is_zero() {
            return Err(CoreError::VanishingInteraction(format!(
                "⟨𝖡,[𝖡,𝖡]·⟩· vanishes identically for n = {n}; use hhat-odd"
            )));
        }
        return Ok(s3.scaled(&seqs.mu(2)));
    }
    let mut out = GExpr::zero(n);
    for (i, m) in seqs.mu.iter().enumerate() {
        if !m.is_zero() {
            out = out.plus(&power_interaction(ctx, i + 2)?.scaled(m))?;
        }
    }
    Ok(out.scaled(&interaction_sign(n)))
}

/// `exp[(i/ℏ) I]` expanded while the expansion order stays within `k`.
/// With `ih = iℏ`, `i/ℏ = -ih⁻¹`.
pub fn exponential(i: &GExpr, k: usize) -> GExpr {
    let n = i.n();
    let pref = Coeff::param("ih", -1).scale(qf(-1, 1));
    let x = i.scaled(&pref);
    let mut out = GExpr::constant(n, Coeff::one());
    let mut power = GExpr::constant(n, Coeff::one());
    for m in 1..=k {
        power = power.wedge(&x).expect("same context").map_coeffs(|c| c.filter(|p| weight_of(p) <= k as i64));
        if power.is_zero() {
            break;
        }
        out = out.plus(&power.scaled(&Coeff::from_q(qf(1, factorial(m))))).expect("same context");
    }
    out
}

fn weight_of(p: &crate::coeff::ParamMono) -> i64 {
    p.pairs().iter().map(|(name, e)| order_weight(name) * *e as i64).sum()
}

fn within(c: &Coeff, k: usize) -> Coeff {
    c.filter(|p| weight_of(p) <= k as i64)
}

/// Drop the parts of `λ` and `μ` beyond expansion order `k`.
fn truncated(seqs: &CoefficientSequences, k: usize) -> CoefficientSequences {
    CoefficientSequences {
        lambda: seqs.lambda.iter().map(|c| within(c, k)).collect(),
        mu: seqs.mu.iter().map(|c| within(c, k)).collect(),
    }
}

fn factorial(m: usize) -> i128 {
    (1..=m as i128).product()
}

/// Key of a component term: a functional prefactor times an iterated term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObsKey {
    pub functional: Shape,
    pub term: IteratedTerm,
}

impl ObsKey {
    pub fn gh(&self) -> i32 {
        self.functional.grading().gh + self.term.gh()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableSeries {
    pub n: u32,
    pub family: Family,
    pub order: usize,
    terms: BTreeMap<ObsKey, Coeff>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeriesGroup {
    pub order: usize,
    pub gh: i32,
    pub lm_degree: i32,
    pub terms: Vec<String>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Termwise equality, ignoring the family label.
    pub fn same_terms(&self, other: &ObservableSeries) -> bool {
        self.n == other.n && self.terms == other.terms
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ObsKey, &Coeff)> {
        self.terms.iter()
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> ObservableSeries {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        ObservableSeries { terms, ..self.clone() }
    }

    pub fn plus(&self, other: &ObservableSeries) -> ObservableSeries {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            let e = out.terms.entry(k.clone()).or_default();
            *e += c;
            if e.is_zero() {
                out.terms.remove(k);
            }
        }
        out
    }

    /// Terms grouped by `(order, ghost number, loop-space form degree)`.
    pub fn grouped(&self) -> Vec<SeriesGroup> {
        let mut map: BTreeMap<(usize, i32, i32), Vec<String>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let f = if k.functional.factors.is_empty() {
                String::new()
            } else {
                let mut g = GExpr::zero(self.n);
                g.push_canonical(Coeff::one(), k.functional.clone());
                format!("{} · ", sexpr::to_sexpr(&g))
            };
            map.entry((k.term.order(), k.gh(), k.term.lm_degree()))
                .or_default()
                .push(format!("({c}) {f}{}", k.term));
        }
        map.into_iter()
            .map(|((order, gh, lm_degree), terms)| SeriesGroup { order, gh, lm_degree, terms })
            .collect()
    }
}

/// `{·}₀`: keep ghost number zero.
pub fn project_ghost_zero(s: &ObservableSeries) -> ObservableSeries {
    ObservableSeries { terms: s.terms.iter().filter(|(k, _)| k.gh() == 0).map(|(k, c)| (k.clone(), c.clone())).collect(), ..s.clone() }
}

/// The component expansion of a family up to `k` insertions and expansion
/// order `k` in `κ, λ, μ`, before the ghost-number projection.
pub fn build_unprojected(ctx: &BVContext, family: Family, seqs: &CoefficientSequences, k: usize) -> Result<ObservableSeries> {
    let n = ctx.n();
    let seqs = &truncated(seqs, k);
    let interaction = interaction(ctx, family, seqs)?;
    let exp = exponential(&interaction, k);
    let words = words_up_to(&connection_slot(n, seqs), k).map_coeffs(|c| within(c, k));
    let comps = expand_components(ctx, &words);
    let proj = family.projection();
    let mut terms: BTreeMap<ObsKey, Coeff> = BTreeMap::new();
    for m in exp.monomials() {
        for (t, c) in comps.terms() {
            let mut coeff = within(&(m.coeff * c), k);
            if proj != Projection::Full {
                coeff = project_coeff(&coeff, proj);
            }
            if coeff.is_zero() {
                continue;
            }
            let key = ObsKey { functional: m.shape.clone(), term: t.clone() };
            let e = terms.entry(key.clone()).or_default();
            *e += &coeff;
            if e.is_zero() {
                terms.remove(&key);
            }
        }
    }
    Ok(ObservableSeries { n, family, order: k, terms })
}

/// The observable `{exp[(i/ℏ) I] Tr_ρ hol}₀` up to `k` insertions.
pub fn build_observable(ctx: &BVContext, family: Family, seqs: &CoefficientSequences, k: usize) -> Result<ObservableSeries> {
    Ok(project_ghost_zero(&build_unprojected(ctx, family, seqs, k)?))
}

pub fn strand(ctx: &BVContext, g: &Generator) -> Strand {
    let (ca, _) = superfield_components(ctx);
    if ca.iter().any(|(_, w)| w.first() == Some(&g.underived())) {
        Strand::Imbedding
    } else {
        Strand::Companion
    }
}

/// Field/antifield pairs inside the loop part of the observable, split by
/// whether both letters sit on the same strand. The formal Laplacian can
/// only contract same-strand pairs, so `Δ𝓗 = 0` when that count is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StrandCount {
    pub same_strand: usize,
    pub cross_strand: usize,
}

pub fn strand_pairs(ctx: &BVContext, s: &ObservableSeries) -> StrandCount {
    let t = ctx.table();
    let (ca, _) = superfield_components(ctx);
    let on_imbedding: Vec<Generator> = ca.iter().filter_map(|(_, w)| w.first().cloned()).collect();
    let strand_of = |g: &Generator| on_imbedding.contains(&g.underived());
    let mut count = StrandCount { same_strand: 0, cross_strand: 0 };
    for (k, _) in s.terms() {
        let letters: Vec<&Generator> = k.term.letters().collect();
        for (i, x) in letters.iter().enumerate() {
            if x.kind() != Kind::Antifield {
                continue;
            }
            let Some(phi) = t.partner(&x.underived()) else { continue };
            for (j, y) in letters.iter().enumerate() {
                if i != j && y.underived() == phi {
                    if strand_of(x) == strand_of(y) {
                        count.same_strand += 1;
                    } else {
                        count.cross_strand += 1;
                    }
                }
            }
        }
    }
    count
}

/// The identities behind closedness that live on the functional side:
/// `(S_BV, I) = 0`, `Δ exp[(i/ℏ) I] = 0` to the truncation order, and the
/// absence of same-strand pairs in the loop part, which gives `Δ𝓗 = 0`.
pub fn auxiliary_reports(ctx: &BVContext, family: Family, seqs: &CoefficientSequences, k: usize) -> Result<Vec<Report>> {
    let n = ctx.n();
    let t = ctx.table();
    let i = interaction(ctx, family, &truncated(seqs, k))?;
    let si = antibracket(t, &ctx.bv_action(), &i)?;
    let lap = formal_laplacian(t, &exponential(&i, k))?;
    let u = build_unprojected(ctx, family, seqs, k)?;
    let pairs = strand_pairs(ctx, &u);
    let mut strand_report = Report::from_residual("Delta H = 0 (same-strand pairs)", n, &GExpr::zero(n), vec![
        format!("same-strand pairs: {}", pairs.same_strand),
        format!("cross-strand pairs: {}", pairs.cross_strand),
    ]);
    if pairs.same_strand > 0 {
        strand_report.status = Status::Fail;
        strand_report.residual_terms = pairs.same_strand;
    }
    Ok(vec![
        Report::from_residual("(S_BV, I) = 0", n, &si, vec![format!("interaction: {} monomials", i.len())]),
        Report::from_residual("Delta exp[(i/hbar) I] = 0", n, &lap, Vec::new()),
        strand_report,
    ])
}
