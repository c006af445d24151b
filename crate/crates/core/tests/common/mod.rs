#![allow(dead_code)]

use bf_core::bv::FieldTable;
use bf_core::expr::Factor;
use bf_core::{Coeff, GExpr, Generator, Local};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fields, antifields and their first derivatives.
pub fn letters(n: u32) -> Vec<Generator> {
    let t = FieldTable::new(n).unwrap();
    let mut out = Vec::new();
    for e in t.entries() {
        for g in [&e.field, &e.antifield] {
            out.push(g.clone());
            if let Some(d) = g.derived() {
                out.push(d);
            }
        }
    }
    out
}

pub fn underived_letters(n: u32) -> Vec<Generator> {
    letters(n).into_iter().filter(|g| g.level() == 0).collect()
}

pub fn word(r: &mut ChaCha8Rng, pool: &[Generator], max_len: usize) -> Vec<Generator> {
    let len = r.gen_range(1..=max_len);
    (0..len).map(|_| pool.choose(r).unwrap().clone()).collect()
}

fn small_coeff(r: &mut ChaCha8Rng) -> Coeff {
    let v = r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 };
    Coeff::int(v)
}

/// A single homogeneous algebra-valued monomial, possibly with a trace factor.
pub fn matrix_monomial(r: &mut ChaCha8Rng, n: u32) -> GExpr {
    let pool = letters(n);
    let w = word(r, &pool, 3);
    let mut factors = Vec::new();
    if r.gen_bool(0.3) {
        factors.push(Factor::Trace(word(r, &pool, 2)));
    }
    GExpr::from_raw(n, small_coeff(r), (factors, Some(w)))
}

/// A single homogeneous scalar monomial: a product of one or two traces.
pub fn scalar_monomial(r: &mut ChaCha8Rng, n: u32) -> GExpr {
    let pool = letters(n);
    let k = r.gen_range(1..=2);
    let factors = (0..k).map(|_| Factor::Trace(word(r, &pool, 3))).collect();
    GExpr::from_raw(n, small_coeff(r), (factors, None))
}

/// A sum of a few algebra-valued monomials.
pub fn matrix_expr(r: &mut ChaCha8Rng, n: u32, terms: usize) -> GExpr {
    let mut e = GExpr::zero(n);
    for _ in 0..terms {
        e = e.plus(&matrix_monomial(r, n)).unwrap();
    }
    e
}

/// A nonzero local functional `c ∫ Tr(w)` (optionally times a second trace)
/// of top form degree, built from underived letters and a derivative.
pub fn local_functional(r: &mut ChaCha8Rng, n: u32) -> GExpr {
    let pool = letters(n);
    loop {
        let w = word(r, &pool, 4);
        let deg: i32 = w.iter().map(|g| g.grading().deg).sum();
        if deg != n as i32 {
            continue;
        }
        let local = Local { scalars: Vec::new(), traces: vec![w] };
        let e = GExpr::from_raw(n, small_coeff(r), (vec![Factor::Integral(local)], None));
        if !e.is_zero() {
            return e;
        }
    }
}

/// A random polynomial in the superfields: a sum of dot words in `𝖺, 𝖡`,
/// traced or open.
pub fn superfield_polynomial(r: &mut ChaCha8Rng, a: &GExpr, b: &GExpr, traced: bool) -> GExpr {
    let n = a.n();
    let mut out = GExpr::zero(n);
    for _ in 0..r.gen_range(1..=2) {
        let len = r.gen_range(1..=2);
        let mut w = if r.gen_bool(0.5) { a.clone() } else { b.clone() };
        for _ in 1..len {
            let x = if r.gen_bool(0.5) { a } else { b };
            w = w.dot(x).unwrap();
        }
        let w = if traced { w.trace().unwrap() } else { w };
        out = out.plus(&w.scaled(&small_coeff(r))).unwrap();
    }
    out
}

/// Parity of the total degree of a homogeneous expression.
pub fn total_odd(e: &GExpr) -> bool {
    e.monomials().next().map(|m| m.shape.grading().total().rem_euclid(2) == 1).unwrap_or(false)
}

pub fn sign(odd: bool) -> Coeff {
    Coeff::one().signed(odd)
}
