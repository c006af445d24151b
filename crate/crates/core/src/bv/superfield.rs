//! Superfields `𝖺 = 𝖠 - A₀`, `𝖡`, the supercurvature and the BV action.

use std::collections::BTreeMap;

use crate::coeff::{qf, Coeff};
use crate::error::Result;
use crate::expr::{GExpr, LeibnizMode};
use crate::grading::Generator;

use super::BVContext;

/// An inhomogeneous sum of fixed total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperField {
    total: i32,
    expr: GExpr,
}

impl SuperField {
    pub fn new(total: i32, expr: GExpr) -> Self {
        SuperField { total, expr }
    }

    pub fn total(&self) -> i32 {
        self.total
    }

    pub fn expr(&self) -> &GExpr {
        &self.expr
    }

    /// Components keyed by form degree.
    pub fn components(&self) -> BTreeMap<i32, GExpr> {
        let mut out: BTreeMap<i32, GExpr> = BTreeMap::new();
        for m in self.expr.monomials() {
            let d = m.shape.grading().deg;
            let e = out.entry(d).or_insert_with(|| GExpr::zero(self.expr.n()));
            e.push_canonical(m.coeff.clone(), m.shape.clone());
        }
        out
    }

    /// `true` when every monomial has `deg + gh = total`.
    pub fn is_homogeneous(&self) -> bool {
        self.expr.monomials().all(|m| m.shape.grading().total() == self.total)
    }
}

pub(crate) fn sign(e: i64) -> Coeff {
    Coeff::int(if e.rem_euclid(2) == 0 { 1 } else { -1 })
}

fn term(n: u32, s: i64, g: &Generator) -> GExpr {
    GExpr::gen(n, g).scaled(&sign(s))
}

impl BVContext {
    /// `𝖺 = (-1)^{n+1} c + a + (-1)^n B⁺ + Σ_k (-1)^{n(k+1)+k(k-1)/2} τ_k⁺`
    /// and `𝖡 = Σ_k (-1)^{k(k-1)/2} τ_k + B + (-1)^n A⁺ + c⁺`.
    pub fn build_superfields(&self) -> (SuperField, SuperField) {
        let n = self.n();
        let ni = n as i64;
        let t = self.table();
        let mut sa = term(n, ni + 1, &t.c());
        sa = sa.plus(&term(n, 0, &t.a())).unwrap();
        sa = sa.plus(&term(n, ni, &t.plus(&t.b()))).unwrap();
        let mut sb = GExpr::zero(n);
        for k in 1..=ni - 2 {
            let tau = t.tau(k as u32);
            sa = sa.plus(&term(n, ni * (k + 1) + k * (k - 1) / 2, &t.plus(&tau))).unwrap();
            sb = sb.plus(&term(n, k * (k - 1) / 2, &tau)).unwrap();
        }
        sb = sb.plus(&term(n, 0, &t.b())).unwrap();
        sb = sb.plus(&term(n, ni, &t.plus(&t.a()))).unwrap();
        sb = sb.plus(&term(n, 0, &t.plus(&t.c()))).unwrap();
        (SuperField::new(1, sa), SuperField::new(ni as i32 - 2, sb))
    }

    /// `𝖥 = d_{A₀}𝖺 + ½[𝖺,𝖺]·` (the background curvature vanishes).
    pub fn supercurvature(&self, a: &GExpr) -> Result<GExpr> {
        let da = a.differential(LeibnizMode::Wedge);
        let br = a.dot_bracket(a)?.scaled(&Coeff::from_q(qf(1, 2)));
        da.plus(&br)
    }

    /// `d_𝖠 X = d_{A₀}X + [𝖺, X]·`.
    pub fn covariant_d(&self, a: &GExpr, x: &GExpr) -> Result<GExpr> {
        x.differential(LeibnizMode::Wedge).plus(&a.dot_bracket(x)?)
    }

    /// `S_BV = ∫ ⟨𝖡, 𝖥⟩·`.
    pub fn bv_action(&self) -> GExpr {
        self.action_cache
            .get_or_init(|| {
                let (a, b) = self.build_superfields();
                let f = self.supercurvature(a.expr()).expect("algebra valued");
                b.expr().dot_pairing(&f).expect("same context").integrate_top().expect("scalar")
            })
            .clone()
    }

    /// The classical action `∫⟨B, F_A⟩` with `F_A = d_{A₀}a + a∧a`.
    pub fn classical_action(&self) -> GExpr {
        let n = self.n();
        let t = self.table();
        let a = GExpr::gen(n, &t.a());
        let b = GExpr::gen(n, &t.b());
        let f = a.differential(LeibnizMode::Wedge).plus(&a.wedge(&a).unwrap()).unwrap();
        b.pairing(&f).unwrap().integrate_top().unwrap()
    }
}
