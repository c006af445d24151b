//! Iterated integrals `∫_{Δ_k} Tr[H|₀^{t₁} X₁ H|_{t₁}^{t₂} ⋯ X_k H|_{t_k}^1]`.
//!
//! With `P(t) = H|_0^t` the integrand is `Tr[Y₁(t₁)⋯Y_k(t_k) P(1)]`,
//! `Y(t) = P(t) X(t) P(t)⁻¹`. The ordered integral of the `Y` is built one
//! simplex dimension at a time on composite Gauss–Legendre nodes, with the
//! running integrals `∫_0^{x_i}` taken from the Legendre expansion on each
//! panel.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::Tolerances;
use crate::curve::LoopCurve;
use crate::error::{NumericError, Result};
use crate::form::{sort_sign, ConnectionSample, Mat, MatrixForm};
use crate::transport::{connection_along, Transport};

/// A matrix-valued function on the loop parameter.
pub type SlotFn<'a> = dyn Fn(f64) -> Result<Mat> + Sync + 'a;

/// Composite Gauss–Legendre rule with equal panels on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pairs: Vec<(f64, f64)>,
    panels: usize,
    /// `S_ij ≈ ∫_{-1}^{x_i} ℓ_j`, the indefinite integrals of the Lagrange
    /// basis on the nodes.
    cumulative: Vec<Vec<f64>>,
}

/// `P_0(x) … P_m(x)`.
fn legendre(x: f64, m: usize) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for n in 1..m {
        p.push(((2 * n + 1) as f64 * x * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64);
    }
    p.truncate(m + 1);
    p
}

impl Quadrature {
    pub fn new(points: usize, panels: usize) -> Result<Self> {
        let p = NonZeroUsize::new(points).ok_or_else(|| NumericError::Argument("quadrature needs at least one point".into()))?;
        if panels == 0 {
            return Err(NumericError::Argument("quadrature needs at least one panel".into()));
        }
        let pairs = GaussLegendre::new(p).as_node_weight_pairs().to_vec();
        let n = pairs.len();
        // expand in P_0..P_{n-1} by the discrete transform, integrate termwise
        let at_nodes: Vec<Vec<f64>> = pairs.iter().map(|&(x, _)| legendre(x, n)).collect();
        let cumulative = pairs
            .iter()
            .enumerate()
            .map(|(i, &(xi, _))| {
                let pi = &at_nodes[i];
                let integral = |k: usize| if k == 0 { xi + 1.0 } else { (pi[k + 1] - pi[k - 1]) / (2 * k + 1) as f64 };
                (0..n)
                    .map(|j| (0..n).map(|k| (2 * k + 1) as f64 / 2.0 * pairs[j].1 * at_nodes[j][k] * integral(k)).sum())
                    .collect()
            })
            .collect();
        Ok(Quadrature { pairs, panels, cumulative })
    }

    pub fn from_tolerances(tol: &Tolerances) -> Result<Self> {
        Quadrature::new(tol.gauss_points, tol.panels)
    }

    /// Nodes and weights for `∫_0^u`, panel breakpoints at multiples of
    /// `1/panels`.
    pub fn nodes(&self, u: f64) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = (0..self.panels).map(|j| j as f64 / self.panels as f64).take_while(|&c| c < u).collect();
        cuts.push(u);
        let mut out = Vec::with_capacity(self.pairs.len() * cuts.len());
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &(x, wt) in &self.pairs {
                out.push((0.5 * ((b - a) * x + b + a), 0.5 * (b - a) * wt));
            }
        }
        out
    }

    /// Running integrals `∫_0^{x_i} f` at all nodes of `[0, 1]` from the
    /// values `f(x_j)`, in the order of [`Quadrature::nodes`]`(1.0)`; the
    /// last entry is `∫_0^1 f`.
    pub fn running(&self, values: &[Mat], rank: usize) -> Vec<Mat> {
        let n = self.pairs.len();
        let half = 0.5 / self.panels as f64;
        let mut start = DMatrix::zeros(rank, rank);
        let mut out = Vec::with_capacity(values.len() + 1);
        for panel in values.chunks(n) {
            for row in &self.cumulative {
                let mut acc = start.clone();
                for (f, s) in panel.iter().zip(row) {
                    acc += f * (s * half);
                }
                out.push(acc);
            }
            for (f, (_, w)) in panel.iter().zip(&self.pairs) {
                start += f * (w * half);
            }
        }
        out.push(start);
        out
    }
}

struct Nested<'a> {
    transport: Transport<'a>,
    slots: &'a [&'a SlotFn<'a>],
    quad: &'a Quadrature,
    rank: usize,
}

impl Nested<'_> {
    fn conjugated(&self, m: usize, s: f64) -> Result<Mat> {
        let p = self.transport.from_origin(s)?;
        let inv = p.clone().try_inverse().ok_or_else(|| NumericError::Data(format!("singular transport at t = {s}")))?;
        Ok(p * (self.slots[m])(s)? * inv)
    }

    /// `∫_{Δ_k} Y₁⋯Y_k`: `J_m(x) = ∫_0^x J_{m-1} Y_m` level by level.
    fn top(&self) -> Result<Mat> {
        let nodes = self.quad.nodes(1.0);
        let k = self.slots.len();
        let ys = (0..k)
            .into_par_iter()
            .map(|m| nodes.iter().map(|&(s, _)| self.conjugated(m, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut j: Vec<Mat> = vec![DMatrix::identity(self.rank, self.rank); nodes.len()];
        let mut total = DMatrix::zeros(self.rank, self.rank);
        for y in &ys {
            let integrand: Vec<Mat> = j.iter().zip(y).map(|(a, b)| a * b).collect();
            let mut running = self.quad.running(&integrand, self.rank);
            total = running.pop().expect("total");
            j = running;
        }
        Ok(total)
    }
}

/// `∫_{Δ_k} Tr[H|₀^{t₁} X₁(t₁) ⋯ X_k(t_k) H|_{t_k}^1]` for explicit slots.
pub fn slot_integral(curve: &LoopCurve, a: &MatrixForm, slots: &[&SlotFn], tol: &Tolerances) -> Result<f64> {
    if slots.is_empty() {
        return Err(NumericError::Argument("iterated integral needs k >= 1".into()));
    }
    let quad = Quadrature::from_tolerances(tol)?;
    let transport = Transport::new(curve, a, tol.transport_steps)?;
    let hol = transport.holonomy().clone();
    let nested = Nested { transport, slots, quad: &quad, rank: a.rank() };
    Ok((nested.top()? * hol).trace())
}

/// The same integral from the block upper-triangular transport equation
/// `dZ/dt = Z M(t)`, `M` with `A(γ̇)` on the diagonal and `X_i` on the
/// superdiagonal; the integral is `Tr Z(1)_{0k}`.
pub fn chen_integral(curve: &LoopCurve, a: &MatrixForm, slots: &[&SlotFn], steps: usize) -> Result<f64> {
    let k = slots.len();
    if k == 0 {
        return Err(NumericError::Argument("iterated integral needs k >= 1".into()));
    }
    let r = a.rank();
    let size = (k + 1) * r;
    let generator = |t: f64| -> Result<Mat> {
        let mut m = DMatrix::zeros(size, size);
        let at = connection_along(curve, a, t)?;
        for i in 0..=k {
            m.view_mut((i * r, i * r), (r, r)).copy_from(&at);
        }
        for (i, x) in slots.iter().enumerate() {
            m.view_mut((i * r, (i + 1) * r), (r, r)).copy_from(&x(t)?);
        }
        Ok(m)
    };
    let dt = 1.0 / steps as f64;
    let mut z = DMatrix::identity(size, size);
    for i in 0..steps {
        let t = i as f64 * dt;
        let (m0, mm, m1) = (generator(t)?, generator(t + dt / 2.0)?, generator(t + dt)?);
        let k1 = &z * &m0;
        let k2 = (&z + &k1 * (dt / 2.0)) * &mm;
        let k3 = (&z + &k2 * (dt / 2.0)) * &mm;
        let k4 = (&z + &k3 * dt) * &m1;
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    Ok(z.view((0, k * r), (r, r)).trace())
}

/// A tangent vector to the loop space: a vector field along the loop.
pub type Direction<'a> = dyn Fn(f64) -> DVector<f64> + Sync + 'a;

/// Forward-difference tangent `(γ_h - γ_0)/h` of a family of loops
/// `family(h, t)`.
pub fn deformation_field(family: impl Fn(f64, f64) -> DVector<f64> + Sync, h: f64) -> impl Fn(f64) -> DVector<f64> + Sync {
    move |t| (family(h, t) - family(0.0, t)) / h
}

/// Ordered assignments of `0..m` to `k` blocks of size `per`, increasing
/// inside each block.
fn assignments(m: usize, k: usize, per: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(left: &[usize], k: usize, per: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for block in crate::form::index_sets(left.len(), per) {
            let chosen: Vec<usize> = block.iter().map(|&i| left[i]).collect();
            let rest: Vec<usize> = left.iter().copied().filter(|x| !chosen.contains(x)).collect();
            cur.push(chosen);
            go(&rest, k, per, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&(0..m).collect::<Vec<_>>(), k, per, &mut Vec::new(), &mut out);
    out
}

/// `h_k = ∫_{Δ_k} Tr[H B H ⋯ B H]` as a `k(n-3)`-form on the loop space,
/// evaluated on the given directions. The pulled-back form is contracted
/// as `ω(∂_{t₁}, …, ∂_{t_k}, ξ₁, …, ξ_m)`; slot `i` takes `∂_{t_i}` and
/// `n - 3` of the `ξ`. For `n = 3` there are no directions.
pub fn iterated_integral(curve: &LoopCurve, conn: &ConnectionSample, k: usize, directions: &[&Direction], tol: &Tolerances) -> Result<f64> {
    if k < 1 {
        return Err(NumericError::Argument("iterated integral needs k >= 1".into()));
    }
    let n = conn.n();
    if curve.dim() != n {
        return Err(NumericError::Argument(format!("curve lives in R^{}, connection on R^{n}", curve.dim())));
    }
    let per = n - 3;
    if directions.len() != k * per {
        return Err(NumericError::Argument(format!(
            "h_{k} is a {}-form for n = {n}, got {} directions",
            k * per,
            directions.len()
        )));
    }
    let mut total = 0.0;
    for blocks in assignments(k * per, k, per) {
        let mut order = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            order.push(i);
            order.extend(b.iter().map(|j| k + j));
        }
        let sign = sort_sign(&order).expect("distinct vectors");
        let slot_fns: Vec<Box<SlotFn>> = blocks
            .iter()
            .map(|b| {
                let b = b.clone();
                Box::new(move |t: f64| {
                    let (x, v) = curve.point_and_velocity(t);
                    let mut vs = vec![v];
                    vs.extend(b.iter().map(|&j| directions[j](t)));
                    conn.b.contract(x.as_slice(), &vs)
                }) as Box<SlotFn>
            })
            .collect();
        let slots: Vec<&SlotFn> = slot_fns.iter().map(|b| b.as_ref()).collect();
        total += sign * slot_integral(curve, &conn.a, &slots, tol)?;
    }
    Ok(total)
}
