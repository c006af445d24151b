//! Formal BV Laplacian.
//!
//! Contractions between different local factors are expressed through the
//! antibracket. A contraction of `φ⁺` with `φ` inside one density uses the
//! completeness relation of the trace form, `Σ_a (T_a)_{ij} (T^a)_{kl} =
//! δ_il δ_jk`, and leaves the coincident-point kernel as a scalar letter
//! `vol` of grading `(n, 0)`. Derived letters never meet their partner at a
//! point since the form degree would exceed `n`.

use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::expr::{Factor, GExpr, Local, Word};
use crate::grading::{koszul, word_grading, Generator, Grading, Kind};

use super::bracket::antibracket;
use super::FieldTable;

/// The coincident-point kernel.
pub fn vol_generator(n: u32) -> Generator {
    Generator::scalar("vol", n as i32, 0, Kind::Parameter)
}

/// Position of a letter inside the traces of a density.
#[derive(Clone, Copy)]
struct Pos {
    trace: usize,
    index: usize,
}

fn positions(local: &Local, phi: &Generator) -> Vec<Pos> {
    let mut out = Vec::new();
    for (t, w) in local.traces.iter().enumerate() {
        for (i, g) in w.iter().enumerate() {
            if g.same_base(phi) && g.level() == 0 {
                out.push(Pos { trace: t, index: i });
            }
        }
    }
    out
}

fn flat_index(local: &Local, p: Pos) -> usize {
    local.scalars.len() + local.traces[..p.trace].iter().map(Vec::len).sum::<usize>() + p.index
}

fn contract(local: &Local, plus: Pos, field: Pos, n: u32) -> GExpr {
    let letters = local.flat_letters();
    let ip = flat_index(local, plus);
    let iq = flat_index(local, field);
    let before = |i: usize, skip: usize| -> Grading {
        letters[..i].iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, g)| g.grading()).sum()
    };
    let mut neg = koszul(letters[ip].grading(), before(ip, usize::MAX));
    neg ^= koszul(letters[iq].grading(), before(iq, ip));

    let mut traces: Vec<Word> = local.traces.clone();
    if plus.trace == field.trace {
        let w = &local.traces[plus.trace];
        let (i, j) = (plus.index.min(field.index), plus.index.max(field.index));
        let w1 = &w[..i];
        let w2 = w[i + 1..j].to_vec();
        let w3 = &w[j + 1..];
        neg ^= koszul(word_grading(w1), word_grading(&w2));
        let mut w13 = w1.to_vec();
        w13.extend_from_slice(w3);
        traces[plus.trace] = w13;
        traces.insert(plus.trace, w2);
    } else {
        let (a, b) = if plus.trace < field.trace { (plus, field) } else { (field, plus) };
        let wa = &local.traces[a.trace];
        let wb = &local.traces[b.trace];
        let (p, q) = (&wa[..a.index], &wa[a.index + 1..]);
        let (r, s) = (&wb[..b.index], &wb[b.index + 1..]);
        let mid: Grading = local.traces[a.trace + 1..b.trace].iter().map(|w| word_grading(w)).sum();
        neg ^= koszul(word_grading(r) + word_grading(s), mid);
        neg ^= koszul(word_grading(p), word_grading(q));
        neg ^= koszul(word_grading(r), word_grading(s));
        let mut merged = q.to_vec();
        merged.extend_from_slice(p);
        merged.extend_from_slice(s);
        merged.extend_from_slice(r);
        traces[a.trace] = merged;
        traces.remove(b.trace);
    }
    let mut scalars = vec![vol_generator(n)];
    scalars.extend(local.scalars.iter().cloned());
    let out = Local { scalars, traces };
    GExpr::from_raw(n, Coeff::one().signed(neg), (vec![Factor::Integral(out)], None))
}

fn laplacian_local(t: &FieldTable, local: &Local) -> Result<GExpr> {
    let n = t.n();
    let mut out = GExpr::zero(n);
    for e in t.entries() {
        if local.scalars.iter().any(|g| g.same_base(&e.field) || g.same_base(&e.antifield)) {
            return Err(CoreError::UnsupportedExpression("scalar field occurrence".into()));
        }
        for p in positions(local, &e.antifield) {
            for q in positions(local, &e.field) {
                out.add_assign(&contract(local, p, q, n))?;
            }
        }
    }
    Ok(out)
}

fn laplacian_product(t: &FieldTable, ls: &[Local]) -> Result<GExpr> {
    let n = t.n();
    let Some((first, rest)) = ls.split_first() else {
        return Ok(GExpr::zero(n));
    };
    let i1 = GExpr::from_raw(n, Coeff::one(), (vec![Factor::Integral(first.clone())], None));
    let r = GExpr::from_raw(n, Coeff::one(), (rest.iter().cloned().map(Factor::Integral).collect(), None));
    let odd = first.grading().gh.rem_euclid(2) == 1;
    // Δ(I R) = ΔI R + (-1)^{gh I} I ΔR + (-1)^{gh I} (I, R)
    let mut out = laplacian_local(t, first)?.wedge(&r)?;
    if !rest.is_empty() {
        let tail = i1.wedge(&laplacian_product(t, rest)?)?.plus(&antibracket(t, &i1, &r)?)?;
        out.add_assign(&tail.scaled(&Coeff::one().signed(odd)))?;
    }
    Ok(out)
}

/// Formal BV Laplacian of a sum of products of local functionals.
pub fn formal_laplacian(t: &FieldTable, f: &GExpr) -> Result<GExpr> {
    let mut out = GExpr::zero(f.n());
    for m in f.monomials() {
        if m.shape.open.is_some() {
            return Err(CoreError::UnsupportedExpression("Laplacian of algebra-valued expression".into()));
        }
        let mut ls = Vec::new();
        for fac in &m.shape.factors {
            match fac {
                Factor::Integral(l) => ls.push(l.clone()),
                _ => {
                    return Err(CoreError::UnsupportedExpression(
                        "Laplacian operand must be a product of local functionals".into(),
                    ))
                }
            }
        }
        out.add_assign(&laplacian_product(t, &ls)?.scaled(m.coeff))?;
    }
    Ok(out)
}
