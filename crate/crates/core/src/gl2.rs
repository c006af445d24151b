//! Structure-constant backend for `gl(2)` with the trace form.
//!
//! Every matrix letter `X` is expanded into four scalar components
//! `X.ij`, so `Tr(X₁⋯X_k) = Σ X₁^{i₁i₂} ⋯ X_k^{i_k i₁}`. The background
//! connection is the trivial flat one, so `d` acts on components directly.
//! Brackets and variations are recomputed on components with their own
//! deletion rules, independently of the word-level machinery.

use crate::bv::{Derivation, FieldTable};
use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::expr::{Factor, GExpr, LeibnizMode, Local};
use crate::grading::{koszul, Generator, Grading, Kind};

/// Component `X.ij` of a matrix letter.
pub fn component(g: &Generator, i: usize, j: usize) -> Generator {
    Generator::new(&format!("{}.{}{}", g.name(), i, j), g.base_grading(), g.kind(), false).with_level(g.level())
}

/// The matrix letter and indices a component came from.
pub fn parse_component(g: &Generator) -> Option<(Generator, usize, usize)> {
    let (base, idx) = g.name().rsplit_once('.')?;
    let b = idx.as_bytes();
    if b.len() != 2 || g.is_algebra() {
        return None;
    }
    let (i, j) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
    if i > 1 || j > 1 {
        return None;
    }
    let m = Generator::new(base, g.base_grading(), g.kind(), true).with_level(g.level());
    Some((m, i, j))
}

/// A 2×2 matrix of scalar component expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2 {
    n: u32,
    e: [[GExpr; 2]; 2],
}

impl Mat2 {
    pub fn zero(n: u32) -> Self {
        let z = GExpr::zero(n);
        Mat2 { n, e: [[z.clone(), z.clone()], [z.clone(), z]] }
    }

    pub fn identity(n: u32) -> Self {
        let mut m = Mat2::zero(n);
        m.e[0][0] = GExpr::constant(n, Coeff::one());
        m.e[1][1] = GExpr::constant(n, Coeff::one());
        m
    }

    pub fn letter(n: u32, g: &Generator) -> Self {
        let mut m = Mat2::zero(n);
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = GExpr::gen(n, &component(g, i, j));
            }
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> &GExpr {
        &self.e[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().flatten().all(GExpr::is_zero)
    }

    fn map(&self, f: impl Fn(&GExpr) -> GExpr) -> Mat2 {
        let mut m = Mat2::zero(self.n);
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = f(&self.e[i][j]);
            }
        }
        m
    }

    pub fn plus(&self, o: &Mat2) -> Mat2 {
        let mut m = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = m.e[i][j].plus(&o.e[i][j]).expect("same context");
            }
        }
        m
    }

    pub fn minus(&self, o: &Mat2) -> Mat2 {
        self.plus(&o.scaled(&Coeff::int(-1)))
    }

    pub fn scaled(&self, c: &Coeff) -> Mat2 {
        self.map(|x| x.scaled(c))
    }

    /// Left multiplication by a scalar expression.
    pub fn scalar_left(&self, s: &GExpr) -> Mat2 {
        self.map(|x| s.wedge(x).expect("same context"))
    }

    fn product(&self, o: &Mat2, dot: bool) -> Mat2 {
        let mut m = Mat2::zero(self.n);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let p = if dot { self.e[i][k].dot(&o.e[k][j]) } else { self.e[i][k].wedge(&o.e[k][j]) };
                    m.e[i][j].add_assign(&p.expect("same context")).expect("same context");
                }
            }
        }
        m
    }

    pub fn wedge(&self, o: &Mat2) -> Mat2 {
        self.product(o, false)
    }

    pub fn dot(&self, o: &Mat2) -> Mat2 {
        self.product(o, true)
    }

    /// Total-degree graded commutator of the dot algebra, computed
    /// monomial-wise from the entries: `[X,Y]· = X·Y - (-1)^{|X||Y|} Y·X`.
    pub fn dot_bracket(&self, o: &Mat2) -> Mat2 {
        let mut m = Mat2::zero(self.n);
        for (xa, xg) in self.homogeneous_parts() {
            for (yb, yg) in o.homogeneous_parts() {
                let odd = (xg.total() * yg.total()).rem_euclid(2) == 1;
                let t = xa.dot(&yb).minus(&yb.dot(&xa).scaled(&Coeff::one().signed(odd)));
                m = m.plus(&t);
            }
        }
        m
    }

    /// Split by total-degree parity and grading of the monomials.
    fn homogeneous_parts(&self) -> Vec<(Mat2, Grading)> {
        let mut parts: Vec<(Mat2, Grading)> = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for mono in self.e[i][j].monomials() {
                    let g = mono.shape.grading();
                    let idx = match parts.iter().position(|(_, h)| *h == g) {
                        Some(p) => p,
                        None => {
                            parts.push((Mat2::zero(self.n), g));
                            parts.len() - 1
                        }
                    };
                    parts[idx].0.e[i][j].push_canonical(mono.coeff.clone(), mono.shape.clone());
                }
            }
        }
        parts
    }

    pub fn differential(&self, mode: LeibnizMode) -> Mat2 {
        self.map(|x| x.differential(mode))
    }

    pub fn trace(&self) -> GExpr {
        self.e[0][0].plus(&self.e[1][1]).expect("same context")
    }
}

fn word_matrix(n: u32, w: &[Generator]) -> Mat2 {
    let mut acc = Mat2::identity(n);
    for g in w {
        acc = acc.wedge(&Mat2::letter(n, g));
    }
    acc
}

fn expand_local(n: u32, l: &Local) -> GExpr {
    let mut acc = GExpr::constant(n, Coeff::one());
    for g in &l.scalars {
        acc = acc.wedge(&GExpr::gen(n, g)).expect("same context");
    }
    for w in &l.traces {
        acc = acc.wedge(&word_matrix(n, w).trace()).expect("same context");
    }
    acc
}

/// Expand each monomial into (scalar part, optional matrix part).
fn expand_parts(e: &GExpr) -> Vec<(GExpr, Option<Mat2>)> {
    let n = e.n();
    let mut out = Vec::new();
    for m in e.monomials() {
        let mut s = GExpr::constant(n, m.coeff.clone());
        for f in &m.shape.factors {
            let piece = match f {
                Factor::Scalar(g) => GExpr::gen(n, g),
                Factor::Trace(w) => word_matrix(n, w).trace(),
                Factor::Integral(l) => expand_local(n, l).integrate_top().expect("scalar"),
            };
            s = s.wedge(&piece).expect("same context");
        }
        out.push((s, m.shape.open.as_deref().map(|w| word_matrix(n, w))));
    }
    out
}

/// Component expansion of a scalar-valued expression.
pub fn expand_scalar(e: &GExpr) -> Result<GExpr> {
    let mut out = GExpr::zero(e.n());
    for (s, m) in expand_parts(e) {
        if m.is_some() {
            return Err(CoreError::NotScalar);
        }
        out.add_assign(&s)?;
    }
    Ok(out)
}

/// Component expansion of an algebra-valued expression.
pub fn expand_matrix(e: &GExpr) -> Result<Mat2> {
    let mut out = Mat2::zero(e.n());
    for (s, m) in expand_parts(e) {
        let m = m.ok_or(CoreError::NotAlgebraValued)?;
        out = out.plus(&m.scalar_left(&s));
    }
    Ok(out)
}

fn scalar_local(shape: &crate::expr::Shape) -> Result<&Local> {
    match (shape.factors.as_slice(), &shape.open) {
        ([Factor::Integral(l)], None) if l.traces.is_empty() => Ok(l),
        _ => Err(CoreError::UnsupportedExpression(
            "component bracket needs single integrals of component letters".into(),
        )),
    }
}

fn local_expr(n: u32, gens: &[Generator], neg: bool) -> GExpr {
    let mut acc = GExpr::constant(n, Coeff::one().signed(neg));
    for g in gens {
        acc = acc.wedge(&GExpr::gen(n, g)).expect("same context");
    }
    acc
}

/// Right derivative by a scalar component letter: `∫ L = ∫ X ∧ x`.
pub fn component_right(f: &GExpr, x: &Generator) -> Result<GExpr> {
    let n = f.n();
    let mut out = GExpr::zero(n);
    for m in f.monomials() {
        let l = scalar_local(m.shape)?;
        for (p, g) in l.scalars.iter().enumerate() {
            if !g.same_base(x) {
                continue;
            }
            let after: Grading = l.scalars[p + 1..].iter().map(Generator::grading).sum();
            let neg = koszul(g.grading(), after);
            let mut rest = l.scalars.clone();
            rest.remove(p);
            let z = local_expr(n, &rest, neg).scaled(m.coeff);
            if g.level() == 0 {
                out.add_assign(&z)?;
            } else {
                let zdeg: i32 = rest.iter().map(|r| r.grading().deg).sum();
                let s = Coeff::one().signed(zdeg.rem_euclid(2) == 0);
                out.add_assign(&z.differential(LeibnizMode::Wedge).scaled(&s))?;
            }
        }
    }
    Ok(out)
}

/// Left derivative by a scalar component letter: `∫ L = ∫ x ∧ Y`.
pub fn component_left(f: &GExpr, x: &Generator) -> Result<GExpr> {
    let n = f.n();
    let mut out = GExpr::zero(n);
    for m in f.monomials() {
        let l = scalar_local(m.shape)?;
        for (p, g) in l.scalars.iter().enumerate() {
            if !g.same_base(x) {
                continue;
            }
            let before: Grading = l.scalars[..p].iter().map(Generator::grading).sum();
            let neg = koszul(before, g.grading());
            let mut rest = l.scalars.clone();
            rest.remove(p);
            let y = local_expr(n, &rest, neg).scaled(m.coeff);
            if g.level() == 0 {
                out.add_assign(&y)?;
            } else {
                let s = Coeff::one().signed(x.base_grading().deg.rem_euclid(2) == 0);
                out.add_assign(&y.differential(LeibnizMode::Wedge).scaled(&s))?;
            }
        }
    }
    Ok(out)
}

/// Antibracket on component functionals; `φ^{ij}` pairs with `φ⁺^{ji}`.
pub fn component_antibracket(t: &FieldTable, f: &GExpr, g: &GExpr) -> Result<GExpr> {
    let n = t.n();
    let mut out = GExpr::zero(n);
    for e in t.entries() {
        let s2 = Coeff::one().signed((e.field.base_grading().deg * (n as i32 + 1)).rem_euclid(2) == 0);
        for i in 0..2 {
            for j in 0..2 {
                let phi = component(&e.field, i, j);
                let plus = component(&e.antifield, j, i);
                let x = component_right(f, &phi)?;
                if !x.is_zero() {
                    let y = component_left(g, &plus)?;
                    out.add_assign(&x.wedge(&y)?.integrate_top()?)?;
                }
                let x = component_right(f, &component(&e.antifield, i, j))?;
                if !x.is_zero() {
                    let y = component_left(g, &component(&e.field, j, i))?;
                    out.add_assign(&x.wedge(&y)?.integrate_top()?.scaled(&s2))?;
                }
            }
        }
    }
    Ok(out)
}

/// Component BV variation driven by a component action `s`.
pub fn component_delta<'a>(t: &'a FieldTable, s: &'a GExpr) -> Derivation<'a> {
    let n = t.n();
    Derivation::new(1, move |g: &Generator| {
        let (m, i, j) = parse_component(g)?;
        let base = m.underived();
        let v = if base.kind() == Kind::Antifield {
            let phi = t.partner(&base)?;
            component_right(s, &component(&phi, j, i)).ok()?
        } else if t.is_field(&base) {
            let plus = t.plus(&base);
            let sg = Coeff::one().signed((base.base_grading().deg * (n as i32 + 1)).rem_euclid(2) == 0);
            component_right(s, &component(&plus, j, i)).ok()?.scaled(&sg)
        } else {
            return None;
        };
        Some(if g.level() > 0 { v.differential(LeibnizMode::Wedge) } else { v })
    })
}

/// Component-level residual norms (largest absolute coefficient) of the
/// action identities in the `gl(2)` backend.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Gl2Check {
    pub n: u32,
    pub action_components: usize,
    pub master_norm: f64,
    pub variation_norm: f64,
    pub square_norm: f64,
}

impl Gl2Check {
    pub fn max_norm(&self) -> f64 {
        self.master_norm.max(self.variation_norm).max(self.square_norm)
    }
}

fn shifted(x: &GExpr) -> GExpr {
    let mut out = GExpr::zero(x.n());
    for m in x.monomials() {
        out.push_canonical(m.coeff.signed(m.shape.grading().deg.rem_euclid(2) == 1), m.shape.clone());
    }
    out
}

/// `(S,S)`, `𝛅𝖠 - (-1)^n 𝖥` and `𝛅²𝖠` on components.
pub fn gl2_check(ctx: &crate::bv::BVContext) -> Result<Gl2Check> {
    let n = ctx.n();
    let s = expand_scalar(&ctx.bv_action())?;
    let master = component_antibracket(ctx.table(), &s, &s)?;
    let (a, _) = ctx.build_superfields();
    let am = expand_matrix(a.expr())?;
    let half = Coeff::from_q(crate::coeff::qf(1, 2));
    let f = am.differential(LeibnizMode::Wedge).plus(&am.dot_bracket(&am).scaled(&half));
    let sign = Coeff::one().signed(n % 2 == 1);
    let delta = component_delta(ctx.table(), &s);
    let (mut var, mut sq) = (0.0f64, 0.0f64);
    for i in 0..2 {
        for j in 0..2 {
            let v = shifted(&delta.apply(am.entry(i, j)));
            var = var.max(v.minus(&f.entry(i, j).scaled(&sign))?.max_abs_coeff());
            sq = sq.max(shifted(&delta.apply(&v)).max_abs_coeff());
        }
    }
    Ok(Gl2Check {
        n,
        action_components: s.len(),
        master_norm: master.max_abs_coeff(),
        variation_norm: var,
        square_norm: sq,
    })
}
