//! Derivations on the bigraded algebra and the BV variation `δ = (S_BV, ·)`.

use std::collections::HashMap;

use crate::error::Result;
use crate::expr::{rebuild, GExpr, LeibnizMode};
use crate::grading::{koszul, Generator, Grading, Kind};

use super::bracket::right_derivative;
use super::superfield::sign;
use super::BVContext;

/// A derivation of form degree 0 and ghost number `gh`, determined by its
/// values on generators: `D(xy) = D(x) y + (-1)^{gh · gh x} x D(y)`.
pub struct Derivation<'a> {
    gh: i32,
    image: Box<dyn Fn(&Generator) -> Option<GExpr> + 'a>,
}

impl<'a> Derivation<'a> {
    pub fn new(gh: i32, image: impl Fn(&Generator) -> Option<GExpr> + 'a) -> Self {
        Derivation { gh, image: Box::new(image) }
    }

    pub fn apply(&self, x: &GExpr) -> GExpr {
        let n = x.n();
        let op = Grading::new(0, self.gh);
        let mut out = GExpr::zero(n);
        for m in x.monomials() {
            let letters: Vec<Generator> = m.shape.letters().into_iter().cloned().collect();
            let mut before = Grading::ZERO;
            for (i, g) in letters.iter().enumerate() {
                if let Some(img) = (self.image)(g) {
                    if !img.is_zero() {
                        let neg = koszul(op, before);
                        let e = rebuild(n, m.coeff, m.shape, &mut |p, _| (p == i).then(|| img.clone()));
                        out.add_assign(&e.scaled(&crate::Coeff::one().signed(neg))).expect("same context");
                    }
                }
                before = before + g.grading();
            }
        }
        out
    }
}

impl BVContext {
    /// `δ` on a single generator: `δφ = -(-1)^{deg φ (n+1)} S ∂̄/∂φ⁺`,
    /// `δφ⁺ = S ∂̄/∂φ`, `δ(dφ) = d(δφ)`. Zero on constants.
    pub fn delta_generator(&self, g: &Generator) -> Result<GExpr> {
        if let Some(v) = self.delta_cache.lock().unwrap().get(g) {
            return Ok(v.clone());
        }
        let v = self.hamiltonian_image(&self.bv_action(), g)?;
        self.delta_cache.lock().unwrap().insert(g.clone(), v.clone());
        Ok(v)
    }

    /// `(F, g)` for a generator `g`, by the same rule as [`Self::delta_generator`].
    fn hamiltonian_image(&self, f: &GExpr, g: &Generator) -> Result<GExpr> {
        let n = self.n();
        Ok(if g.level() > 0 {
            self.hamiltonian_image(f, &g.underived())?.differential(LeibnizMode::Wedge)
        } else if g.kind() == Kind::Antifield {
            match self.table().partner(g) {
                Some(phi) => right_derivative(f, &phi)?,
                None => GExpr::zero(n),
            }
        } else if self.table().is_field(g) {
            let plus = self.table().plus(g);
            let s = sign(g.base_grading().deg as i64 * (n as i64 + 1) + 1);
            right_derivative(f, &plus)?.scaled(&s)
        } else {
            GExpr::zero(n)
        })
    }

    /// `(F, x)` for an integrated functional `F` of ghost number `gh`,
    /// applied as a derivation of ghost number `gh + 1`.
    pub fn hamiltonian_variation(&self, f: &GExpr, gh: i32, x: &GExpr) -> Result<GExpr> {
        let mut map = HashMap::new();
        for e in self.table().entries() {
            for g in [&e.field, &e.antifield] {
                map.insert(g.clone(), self.hamiltonian_image(f, g)?);
                if let Some(dg) = g.derived() {
                    map.insert(dg.clone(), self.hamiltonian_image(f, &dg)?);
                }
            }
        }
        Ok(Derivation::new(gh + 1, move |g| map.get(g).cloned()).apply(x))
    }

    fn delta_images(&self) -> Result<HashMap<Generator, GExpr>> {
        let mut map = HashMap::new();
        for e in self.table().entries() {
            for g in [&e.field, &e.antifield] {
                map.insert(g.clone(), self.delta_generator(g)?);
                if let Some(dg) = g.derived() {
                    map.insert(dg.clone(), self.delta_generator(&dg)?);
                }
            }
        }
        Ok(map)
    }

    /// The BV variation `δ_BV`, a derivation of bidegree `(0,1)`.
    pub fn bv_delta(&self, x: &GExpr) -> Result<GExpr> {
        let map = self.delta_images()?;
        Ok(Derivation::new(1, move |g| map.get(g).cloned()).apply(x))
    }

    /// The shifted variation `𝛅α = (-1)^{deg α} δα`, monomial by monomial.
    pub fn bv_variation(&self, x: &GExpr) -> Result<GExpr> {
        let d = self.bv_delta(x)?;
        Ok(shift_by_degree(&d))
    }
}

pub(crate) fn shift_by_degree(x: &GExpr) -> GExpr {
    let mut out = GExpr::zero(x.n());
    for m in x.monomials() {
        let odd = m.shape.grading().deg.rem_euclid(2) == 1;
        out.push_canonical(m.coeff.signed(odd), m.shape.clone());
    }
    out
}
