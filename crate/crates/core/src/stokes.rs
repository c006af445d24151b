//! Normal form of integrated densities modulo total derivatives.
//!
//! For a canonical density with `m` differentiated letters we strip the
//! differentials to get a skeleton, then work in the span of all ways of
//! putting `m` differentials on the skeleton. Total derivatives of the
//! placements with `m - 1` differentials span the relations. Exact row
//! reduction with pivots on the largest keys gives a unique remainder.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::coeff::Q;
use crate::expr::{canon_local, Local};

type Cache = Mutex<HashMap<(Local, u32), Vec<(Q, Local)>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Reduce a canonical top-degree density. Returns `(coefficient, density)`
/// pairs of the normal form; empty when the density is exact.
pub fn reduce(local: &Local, n: u32) -> Vec<(Q, Local)> {
    let m = local.derivative_count();
    if m == 0 {
        return vec![(Q::one(), local.clone())];
    }
    let key = (local.clone(), n);
    if let Some(v) = cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let out = reduce_uncached(local, n, m);
    cache().lock().unwrap().insert(key, out.clone());
    out
}

/// Positions of the skeleton that can carry a differential.
fn derivable(skel: &Local) -> Vec<usize> {
    skel.flat_letters()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.derived().is_some())
        .map(|(i, _)| i)
        .collect()
}

fn with_derivs(skel: &Local, set: &[usize]) -> Local {
    let mut l = skel.clone();
    for &p in set {
        l = l.map_letter(p, |g| g.derived().expect("derivable letter"));
    }
    l
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Canonical form of a raw density as a sparse vector (possibly zero).
fn canon_vec(l: &Local, n: u32) -> BTreeMap<Local, Q> {
    let mut v = BTreeMap::new();
    if let Some((neg, cl, units)) = canon_local(l, n) {
        // Densities with empty traces do not arise from skeletons of
        // canonical densities, since canonical forms drop them.
        debug_assert_eq!(units, 0);
        v.insert(cl, if neg { -Q::one() } else { Q::one() });
    }
    v
}

fn axpy(acc: &mut BTreeMap<Local, Q>, s: Q, v: &BTreeMap<Local, Q>) {
    for (k, x) in v {
        let e = acc.entry(k.clone()).or_insert_with(Q::zero);
        *e += s * x;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

fn reduce_uncached(local: &Local, n: u32, m: usize) -> Vec<(Q, Local)> {
    let skel = {
        let mut l = local.clone();
        for p in 0..l.letter_count() {
            l = l.map_letter(p, |g| g.underived());
        }
        l
    };
    let slots = derivable(&skel);

    // Relations: d of every placement with m-1 differentials.
    let mut relations: Vec<BTreeMap<Local, Q>> = Vec::new();
    for set in subsets(&slots, m - 1) {
        let base = with_derivs(&skel, &set);
        let letters = base.flat_letters();
        let mut rel = BTreeMap::new();
        let mut deg_before = 0i32;
        for (i, g) in letters.iter().enumerate() {
            if let Some(dg) = g.derived() {
                let s = if deg_before.rem_euclid(2) == 1 { -Q::one() } else { Q::one() };
                let v = canon_vec(&base.map_letter(i, |_| dg.clone()), n);
                axpy(&mut rel, s, &v);
            }
            deg_before += g.grading().deg;
        }
        if !rel.is_empty() {
            relations.push(rel);
        }
    }

    // Row reduce with the largest key of each row as pivot.
    let mut pivots: BTreeMap<Local, BTreeMap<Local, Q>> = BTreeMap::new();
    for mut row in relations {
        loop {
            // eliminate existing pivots, largest first
            let mut changed = false;
            let keys: Vec<Local> = row.keys().rev().cloned().collect();
            for k in keys {
                if let Some(p) = pivots.get(&k) {
                    let f = row[&k] / p[&k];
                    axpy(&mut row, -f, p);
                    changed = true;
                    break;
                }
            }
            if !changed {
                break;
            }
        }
        if let Some((lead, _)) = row.iter().next_back() {
            let lead = lead.clone();
            let c = row[&lead];
            let normalized: BTreeMap<Local, Q> = row.into_iter().map(|(k, v)| (k, v / c)).collect();
            // keep pivots fully reduced against the new one
            let others: Vec<Local> = pivots.keys().cloned().collect();
            for ok in others {
                let prow = pivots.get_mut(&ok).unwrap();
                if let Some(x) = prow.get(&lead).copied() {
                    axpy(prow, -x, &normalized);
                }
            }
            pivots.insert(lead, normalized);
        }
    }

    let mut target: BTreeMap<Local, Q> = BTreeMap::new();
    target.insert(local.clone(), Q::one());
    loop {
        let hit = target.keys().rev().find(|k| pivots.contains_key(*k)).cloned();
        match hit {
            Some(k) => {
                let f = target[&k];
                let p = pivots[&k].clone();
                axpy(&mut target, -f, &p);
            }
            None => break,
        }
    }
    target.into_iter().map(|(k, v)| (v, k)).collect()
}
