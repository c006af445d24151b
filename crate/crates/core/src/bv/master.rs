//! Reports for the structural identities of the BV action.

use crate::error::Result;
use crate::expr::GExpr;

use super::bracket::{bracket_density, integrals};
use super::laplacian::formal_laplacian;
use super::report::Report;
use super::superfield::sign;
use super::BVContext;

impl BVContext {
    /// `(S_BV, S_BV) = 0`, tracing the term counts through the density sum,
    /// its algebraic canonicalization and the reduction modulo exact forms.
    pub fn master_equation_report(&self) -> Result<Report> {
        let n = self.n();
        let s = self.bv_action();
        let mut density = GExpr::zero(n);
        let mut raw = 0;
        for m1 in s.monomials() {
            for m2 in s.monomials() {
                let (l1, l2) = (integrals(m1.shape)?, integrals(m2.shape)?);
                let (d, r) = bracket_density(self.table(), l1[0], l2[0])?;
                raw += r;
                density.add_assign(&d.scaled(&(m1.coeff * m2.coeff)))?;
            }
        }
        let integrated = density.integrate_top()?;
        let trace = vec![
            format!("action: {} monomials", s.len()),
            format!("density pairings: {raw} raw products"),
            format!("density after algebraic cancellation: {} terms", density.len()),
            format!("after reduction modulo exact forms: {} terms", integrated.len()),
        ];
        Ok(Report::from_residual("(S,S) = 0", n, &integrated, trace))
    }

    /// `Δ S_BV = 0` for the formal Laplacian.
    pub fn laplacian_report(&self) -> Result<Report> {
        let s = self.bv_action();
        let mut per_term = 0;
        for m in s.monomials() {
            let mut single = GExpr::zero(self.n());
            single.push_canonical(m.coeff.clone(), m.shape.clone());
            if !formal_laplacian(self.table(), &single)?.is_zero() {
                per_term += 1;
            }
        }
        let r = formal_laplacian(self.table(), &s)?;
        let trace = vec![
            format!("action: {} monomials", s.len()),
            format!("monomials with nonzero Laplacian: {per_term}"),
            format!("sum: {} terms", r.len()),
        ];
        Ok(Report::from_residual("Delta S = 0", self.n(), &r, trace))
    }

    /// `𝛅𝖠 = (-1)^n 𝖥`, `𝛅𝖡 = (-1)^n d_𝖠𝖡` and `𝛅² = 0` on both.
    pub fn variation_reports(&self) -> Result<Vec<Report>> {
        let n = self.n();
        let (a, b) = self.build_superfields();
        let (a, b) = (a.expr(), b.expr());
        let s = sign(n as i64);
        let f = self.supercurvature(a)?.scaled(&s);
        let dab = self.covariant_d(a, b)?.scaled(&s);
        let va = self.bv_variation(a)?;
        let vb = self.bv_variation(b)?;
        let count = |label: &str, e: &GExpr| format!("{label}: {} terms", e.len());
        Ok(vec![
            Report::from_residual(
                "delta a = (-1)^n F",
                n,
                &va.minus(&f)?,
                vec![count("variation", &va), count("(-1)^n F", &f)],
            ),
            Report::from_residual(
                "delta B = (-1)^n d_a B",
                n,
                &vb.minus(&dab)?,
                vec![count("variation", &vb), count("(-1)^n d_a B", &dab)],
            ),
            Report::from_residual("delta^2 a = 0", n, &self.bv_variation(&va)?, vec![count("delta a", &va)]),
            Report::from_residual("delta^2 B = 0", n, &self.bv_variation(&vb)?, vec![count("delta B", &vb)]),
        ])
    }

    /// All structural identities of the action.
    pub fn identity_reports(&self) -> Result<Vec<Report>> {
        let mut out = vec![self.master_equation_report()?, self.laplacian_report()?];
        out.extend(self.variation_reports()?);
        Ok(out)
    }
}
