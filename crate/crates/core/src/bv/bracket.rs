//! Functional derivatives by graded deletion and the BV antibracket.

use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::expr::{Factor, GExpr, LeibnizMode, Local, Shape, Word};
use crate::grading::{koszul, word_grading, Generator, Grading};

use super::superfield::sign;
use super::FieldTable;

fn factor_list(local: &Local) -> Vec<Factor> {
    local
        .scalars
        .iter()
        .cloned()
        .map(Factor::Scalar)
        .chain(local.traces.iter().cloned().map(Factor::Trace))
        .collect()
}

fn grading_of(fs: &[Factor]) -> Grading {
    fs.iter().map(Factor::grading).sum()
}

/// Occurrences of `phi` (underived or once derived) in a local density, as
/// `(sign, letter, rest-factors-before, rest-factors-after, P, Q)` with the
/// trace written `Tr(P φ Q)`.
struct Occurrence {
    letter: Generator,
    before: Vec<Factor>,
    after: Vec<Factor>,
    p: Word,
    q: Word,
}

fn occurrences(local: &Local, phi: &Generator) -> Result<Vec<Occurrence>> {
    if local.scalars.iter().any(|g| g.same_base(phi)) {
        return Err(CoreError::UnsupportedExpression(format!(
            "scalar occurrence of matrix field {phi}"
        )));
    }
    let fs = factor_list(local);
    let mut out = Vec::new();
    for (t, f) in fs.iter().enumerate() {
        let Factor::Trace(w) = f else { continue };
        for (i, g) in w.iter().enumerate() {
            if g.same_base(phi) {
                out.push(Occurrence {
                    letter: g.clone(),
                    before: fs[..t].to_vec(),
                    after: fs[t + 1..].to_vec(),
                    p: w[..i].to_vec(),
                    q: w[i + 1..].to_vec(),
                });
            }
        }
    }
    Ok(out)
}

fn concat(a: &[Generator], b: &[Generator]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    w
}

/// `X` with `∫L = ∫Tr(X ∧ φ)`, integrating by parts on `dφ`.
fn right_local(local: &Local, phi: &Generator, n: u32) -> Result<GExpr> {
    let mut out = GExpr::zero(n);
    for o in occurrences(local, phi)? {
        let lg = o.letter.grading();
        let pg = word_grading(&o.p) + lg;
        let mut neg = koszul(pg, word_grading(&o.q));
        let trace_g = pg + word_grading(&o.q);
        neg ^= koszul(trace_g, grading_of(&o.after));
        let mut rest = o.before.clone();
        rest.extend(o.after.iter().cloned());
        let z = GExpr::from_raw(n, Coeff::one().signed(neg), (rest, Some(concat(&o.q, &o.p))));
        if o.letter.level() == 0 {
            out.add_assign(&z)?;
        } else {
            // ∫Tr(Z∧dφ) = -(-1)^{deg Z} ∫Tr(dZ∧φ)
            let dz = z.differential(LeibnizMode::Wedge);
            let zdeg = n as i64 - lg.deg as i64;
            out.add_assign(&dz.scaled(&sign(zdeg + 1)))?;
        }
    }
    Ok(out)
}

/// `Y` with `∫L = ∫Tr(φ ∧ Y)`, integrating by parts on `dφ`.
fn left_local(local: &Local, phi: &Generator, n: u32) -> Result<GExpr> {
    let mut out = GExpr::zero(n);
    for o in occurrences(local, phi)? {
        let lg = o.letter.grading();
        let qg = word_grading(&o.q) + lg;
        let mut neg = koszul(word_grading(&o.p), qg);
        let trace_g = qg + word_grading(&o.p);
        neg ^= koszul(grading_of(&o.before), trace_g);
        let mut rest = o.before.clone();
        rest.extend(o.after.iter().cloned());
        let open = GExpr::from_raw(n, Coeff::one().signed(neg), (Vec::new(), Some(concat(&o.q, &o.p))));
        let y = open.wedge(&GExpr::from_raw(n, Coeff::one(), (rest, None)))?;
        if o.letter.level() == 0 {
            out.add_assign(&y)?;
        } else {
            // ∫Tr(dφ∧Y) = -(-1)^{deg φ} ∫Tr(φ∧dY)
            let dy = y.differential(LeibnizMode::Wedge);
            out.add_assign(&dy.scaled(&sign(phi.base_grading().deg as i64 + 1)))?;
        }
    }
    Ok(out)
}

fn single_integral(shape: &Shape) -> Result<&Local> {
    match (shape.factors.as_slice(), &shape.open) {
        ([Factor::Integral(l)], None) => Ok(l),
        _ => Err(CoreError::UnsupportedExpression(
            "functional derivative needs a sum of single local functionals".into(),
        )),
    }
}

/// Right functional derivative `F ∂̄/∂φ` of a sum of local functionals.
pub fn right_derivative(f: &GExpr, phi: &Generator) -> Result<GExpr> {
    let mut out = GExpr::zero(f.n());
    for m in f.monomials() {
        let l = single_integral(m.shape)?;
        out.add_assign(&right_local(l, phi, f.n())?.scaled(m.coeff))?;
    }
    Ok(out)
}

/// Left functional derivative `∂̄/∂φ G` of a sum of local functionals.
pub fn left_derivative(g: &GExpr, phi: &Generator) -> Result<GExpr> {
    let mut out = GExpr::zero(g.n());
    for m in g.monomials() {
        let l = single_integral(m.shape)?;
        out.add_assign(&left_local(l, phi, g.n())?.scaled(m.coeff))?;
    }
    Ok(out)
}

/// Bracket density of two single local functionals, before integration.
/// Also returns the number of nonzero pairings that were summed.
pub(crate) fn bracket_density(t: &FieldTable, l1: &Local, l2: &Local) -> Result<(GExpr, usize)> {
    let n = t.n();
    let mut out = GExpr::zero(n);
    let mut raw = 0;
    for e in t.entries() {
        let x = right_local(l1, &e.field, n)?;
        let y = left_local(l2, &e.antifield, n)?;
        if !x.is_zero() && !y.is_zero() {
            let p = x.pairing(&y)?;
            raw += p.len();
            out.add_assign(&p)?;
        }
        let x = right_local(l1, &e.antifield, n)?;
        let y = left_local(l2, &e.field, n)?;
        if !x.is_zero() && !y.is_zero() {
            let s = sign(e.field.base_grading().deg as i64 * (n as i64 + 1) + 1);
            let p = x.pairing(&y)?.scaled(&s);
            raw += p.len();
            out.add_assign(&p)?;
        }
    }
    Ok((out, raw))
}

/// Bracket of two single local functionals.
fn bracket_locals(t: &FieldTable, l1: &Local, l2: &Local) -> Result<GExpr> {
    bracket_density(t, l1, l2)?.0.integrate_top()
}

pub(crate) fn integrals(shape: &Shape) -> Result<Vec<&Local>> {
    if shape.open.is_some() {
        return Err(CoreError::UnsupportedExpression("antibracket of algebra-valued expression".into()));
    }
    shape
        .factors
        .iter()
        .map(|f| match f {
            Factor::Integral(l) => Ok(l),
            _ => Err(CoreError::UnsupportedExpression(
                "antibracket operands must be products of local functionals".into(),
            )),
        })
        .collect()
}

fn gh_odd(ls: &[&Local]) -> bool {
    ls.iter().map(|l| l.grading().gh).sum::<i32>().rem_euclid(2) == 1
}

fn integral_product(n: u32, ls: &[&Local]) -> GExpr {
    let fs = ls.iter().map(|l| Factor::Integral((*l).clone())).collect();
    GExpr::from_raw(n, Coeff::one(), (fs, None))
}

/// The antibracket `(F, G)`, extended to products of local functionals as
/// a biderivation.
pub fn antibracket(t: &FieldTable, f: &GExpr, g: &GExpr) -> Result<GExpr> {
    let n = t.n();
    if f.n() != n || g.n() != n {
        return Err(CoreError::ContextMismatch { left: f.n(), right: g.n() });
    }
    let mut out = GExpr::zero(n);
    for mf in f.monomials() {
        let is = integrals(mf.shape)?;
        for mg in g.monomials() {
            let js = integrals(mg.shape)?;
            let g_odd = gh_odd(&js);
            let coeff = mf.coeff * mg.coeff;
            for p in 0..is.len() {
                for q in 0..js.len() {
                    let core = bracket_locals(t, is[p], js[q])?;
                    if core.is_zero() {
                        continue;
                    }
                    // (F,G) = Σ ± I_<p J_<q (I_p, J_q) J_>q I_>p
                    let s1 = gh_odd(&is[p + 1..]) && !g_odd;
                    let s2 = gh_odd(&js[..q]) && (is[p].grading().gh + 1).rem_euclid(2) == 1;
                    let term = integral_product(n, &is[..p])
                        .wedge(&integral_product(n, &js[..q]))?
                        .wedge(&core)?
                        .wedge(&integral_product(n, &js[q + 1..]))?
                        .wedge(&integral_product(n, &is[p + 1..]))?;
                    out.add_assign(&term.scaled(&coeff.signed(s1 ^ s2)))?;
                }
            }
        }
    }
    Ok(out)
}
