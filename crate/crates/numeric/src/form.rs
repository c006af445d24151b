//! Matrix-valued differential forms on `ℝⁿ`, given componentwise.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{NumericError, Result};

pub type Mat = DMatrix<f64>;

/// Increasing index sets of size `p` in `0..n`, in lexicographic order.
pub fn index_sets(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Sign of the permutation sorting `xs`, or `None` on a repeated entry.
pub fn sort_sign(xs: &[usize]) -> Option<f64> {
    let mut inversions = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            match xs[i].cmp(&xs[j]) {
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

type ComponentFn = dyn Fn(&[f64]) -> Vec<Mat> + Send + Sync;

/// A `rank × rank` matrix-valued `degree`-form on `ℝⁿ`. Components are
/// listed in the order of [`index_sets`].
#[derive(Clone)]
pub struct MatrixForm {
    n: usize,
    degree: usize,
    rank: usize,
    f: Arc<ComponentFn>,
}

impl std::fmt::Debug for MatrixForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MatrixForm {{ n: {}, degree: {}, rank: {} }}", self.n, self.degree, self.rank)
    }
}

impl MatrixForm {
    pub fn new(n: usize, degree: usize, rank: usize, f: impl Fn(&[f64]) -> Vec<Mat> + Send + Sync + 'static) -> Self {
        MatrixForm { n, degree, rank, f: Arc::new(f) }
    }

    pub fn zero(n: usize, degree: usize, rank: usize) -> Self {
        let count = index_sets(n, degree).len();
        MatrixForm::new(n, degree, rank, move |_| vec![Mat::zeros(rank, rank); count])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self, x: &[f64]) -> Result<Vec<Mat>> {
        let cs = (self.f)(x);
        let want = index_sets(self.n, self.degree).len();
        if cs.len() != want {
            return Err(NumericError::Data(format!("{}-form on R^{} needs {want} components, got {}", self.degree, self.n, cs.len())));
        }
        for c in &cs {
            if c.nrows() != self.rank || c.ncols() != self.rank {
                return Err(NumericError::Data(format!("component of shape {}x{}, expected rank {}", c.nrows(), c.ncols(), self.rank)));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(NumericError::Data(format!("non-finite form component at {x:?}")));
            }
        }
        Ok(cs)
    }

    /// `ω(v₁, …, v_p) = Σ_I ω_I det[v_j^{I_k}]`.
    pub fn contract(&self, x: &[f64], vs: &[DVector<f64>]) -> Result<Mat> {
        if vs.len() != self.degree {
            return Err(NumericError::Argument(format!("{}-form contracted with {} vectors", self.degree, vs.len())));
        }
        let cs = self.components(x)?;
        let mut out = Mat::zeros(self.rank, self.rank);
        for (set, c) in index_sets(self.n, self.degree).iter().zip(&cs) {
            let m = DMatrix::from_fn(self.degree, self.degree, |j, k| vs[j][set[k]]);
            let det = if self.degree == 0 { 1.0 } else { m.determinant() };
            if det != 0.0 {
                out += c * det;
            }
        }
        Ok(out)
    }

    pub fn plus(&self, other: &MatrixForm) -> MatrixForm {
        let (f, g) = (self.f.clone(), other.f.clone());
        MatrixForm::new(self.n, self.degree, self.rank, move |x| {
            f(x).into_iter().zip(g(x)).map(|(a, b)| a + b).collect()
        })
    }
}

/// Components of `α ∧ β` from components of a `p`-form and a `q`-form.
pub fn wedge(n: usize, p: usize, a: &[Mat], q: usize, b: &[Mat]) -> Vec<Mat> {
    let rank = a.first().or(b.first()).map(|m| m.nrows()).unwrap_or(0);
    let target = index_sets(n, p + q);
    let mut out = vec![Mat::zeros(rank, rank); target.len()];
    for (i, si) in index_sets(n, p).iter().enumerate() {
        for (j, sj) in index_sets(n, q).iter().enumerate() {
            let mut joined = si.clone();
            joined.extend(sj);
            let Some(sign) = sort_sign(&joined) else { continue };
            joined.sort_unstable();
            let k = target.iter().position(|s| *s == joined).expect("sorted index set");
            out[k] += &a[i] * &b[j] * sign;
        }
    }
    out
}

/// Components of `dω` at `x` by central differences with step `h`.
pub fn exterior_derivative(form: &MatrixForm, x: &[f64], h: f64) -> Result<Vec<Mat>> {
    let n = form.n;
    let p = form.degree;
    let sets = index_sets(n, p);
    let mut partials = Vec::with_capacity(n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (form.components(&xp)?, form.components(&xm)?);
        partials.push(fp.into_iter().zip(fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let target = index_sets(n, p + 1);
    let mut out = vec![Mat::zeros(form.rank, form.rank); target.len()];
    for (k, set) in target.iter().enumerate() {
        for (pos, &i) in set.iter().enumerate() {
            let mut rest = set.clone();
            rest.remove(pos);
            let j = sets.iter().position(|s| *s == rest).expect("sub index set");
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out[k] += &partials[i][j] * sign;
        }
    }
    Ok(out)
}

fn max_abs(ms: &[Mat]) -> f64 {
    ms.iter().flat_map(|m| m.iter()).fold(0.0, |acc, v| acc.max(v.abs()))
}

/// A connection `A` together with an `(n-2)`-form `B`, and the properties
/// the caller asserts about them.
#[derive(Clone, Debug)]
pub struct ConnectionSample {
    pub a: MatrixForm,
    pub b: MatrixForm,
    pub flat: bool,
    pub covariantly_closed: bool,
}

/// Largest residuals seen by [`ConnectionSample::check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FlagCheck {
    pub curvature: f64,
    pub covariant_derivative: f64,
}

impl ConnectionSample {
    pub fn new(a: MatrixForm, b: MatrixForm) -> Result<Self> {
        if a.degree != 1 {
            return Err(NumericError::Argument(format!("A must be a 1-form, got degree {}", a.degree)));
        }
        if a.n < 3 || b.n != a.n || b.degree != a.n - 2 || b.rank != a.rank {
            return Err(NumericError::Argument(format!(
                "B must be a rank-{} (n-2)-form on R^{}, got a rank-{} {}-form on R^{}",
                a.rank, a.n, b.rank, b.degree, b.n
            )));
        }
        Ok(ConnectionSample { a, b, flat: false, covariantly_closed: false })
    }

    pub fn flagged(mut self, flat: bool, covariantly_closed: bool) -> Self {
        self.flat = flat;
        self.covariantly_closed = covariantly_closed;
        self
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn rank(&self) -> usize {
        self.a.rank
    }

    /// `F = dA + A∧A`.
    pub fn curvature(&self, x: &[f64], h: f64) -> Result<Vec<Mat>> {
        let n = self.n();
        let a = self.a.components(x)?;
        let da = exterior_derivative(&self.a, x, h)?;
        Ok(da.into_iter().zip(wedge(n, 1, &a, 1, &a)).map(|(d, w)| d + w).collect())
    }

    /// `d_A B = dB + A∧B - (-1)^p B∧A`.
    pub fn covariant_derivative_b(&self, x: &[f64], h: f64) -> Result<Vec<Mat>> {
        let n = self.n();
        let p = self.b.degree;
        let a = self.a.components(x)?;
        let b = self.b.components(x)?;
        let db = exterior_derivative(&self.b, x, h)?;
        let ab = wedge(n, 1, &a, p, &b);
        let ba = wedge(n, p, &b, 1, &a);
        let s = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(db.into_iter().zip(ab).zip(ba).map(|((d, x), y)| d + x - y * s).collect())
    }

    /// Check the asserted flags at the given points.
    pub fn check(&self, points: &[Vec<f64>], tol: &Tolerances) -> Result<FlagCheck> {
        let mut r = FlagCheck { curvature: 0.0, covariant_derivative: 0.0 };
        for x in points {
            if self.flat {
                r.curvature = r.curvature.max(max_abs(&self.curvature(x, tol.derivative_step)?));
            }
            if self.covariantly_closed {
                r.covariant_derivative = r.covariant_derivative.max(max_abs(&self.covariant_derivative_b(x, tol.derivative_step)?));
            }
        }
        if r.curvature >= tol.flatness {
            return Err(NumericError::Connection(format!("connection flagged flat but |F| = {:.3e}", r.curvature)));
        }
        if r.covariant_derivative >= tol.flatness {
            return Err(NumericError::Connection(format!(
                "B flagged covariantly closed but |d_A B| = {:.3e}",
                r.covariant_derivative
            )));
        }
        Ok(r)
    }
}
