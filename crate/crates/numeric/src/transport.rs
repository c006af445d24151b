//! Parallel transport by fixed-step RK4.

use nalgebra::DMatrix;

use crate::curve::LoopCurve;
use crate::error::{NumericError, Result};
use crate::form::{Mat, MatrixForm};

/// `A(γ̇)` at parameter `t`.
pub fn connection_along(curve: &LoopCurve, a: &MatrixForm, t: f64) -> Result<Mat> {
    let (x, v) = curve.point_and_velocity(t);
    a.contract(x.as_slice(), &[v])
}

/// One RK4 step of `dH/dt = H · A(γ̇)` from `t` to `t + dt`.
fn step(curve: &LoopCurve, a: &MatrixForm, h: &Mat, t: f64, dt: f64) -> Result<Mat> {
    let a0 = connection_along(curve, a, t)?;
    let am = connection_along(curve, a, t + dt / 2.0)?;
    let a1 = connection_along(curve, a, t + dt)?;
    let k1 = h * &a0;
    let k2 = (h + &k1 * (dt / 2.0)) * &am;
    let k3 = (h + &k2 * (dt / 2.0)) * &am;
    let k4 = (h + &k3 * dt) * &a1;
    Ok(h + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(NumericError::Data("transport became non-finite".into()));
    }
    Ok(())
}

/// `H|_s^t`, the transport from `γ(t)` back to `γ(s)`. The interval gets
/// `⌈steps · (t - s)⌉` equal RK4 steps.
pub fn parallel_transport(curve: &LoopCurve, a: &MatrixForm, s: f64, t: f64, steps: usize) -> Result<Mat> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) || s > t {
        return Err(NumericError::Argument(format!("transport needs 0 <= s <= t <= 1, got s = {s}, t = {t}")));
    }
    let r = a.rank();
    let mut h = DMatrix::identity(r, r);
    if t == s {
        return Ok(h);
    }
    let count = ((steps as f64 * (t - s)).ceil() as usize).max(1);
    let dt = (t - s) / count as f64;
    for i in 0..count {
        h = step(curve, a, &h, s + i as f64 * dt, dt)?;
    }
    check_finite(&h)?;
    Ok(h)
}

/// `hol = H|_0^1`.
pub fn holonomy(curve: &LoopCurve, a: &MatrixForm, steps: usize) -> Result<Mat> {
    parallel_transport(curve, a, 0.0, 1.0, steps)
}

/// `P(t) = H|_0^t` cached on a uniform grid; values in between take one
/// RK4 step from the grid point below.
#[derive(Clone, Debug)]
pub struct Transport<'a> {
    curve: &'a LoopCurve,
    a: &'a MatrixForm,
    nodes: Vec<Mat>,
}

impl<'a> Transport<'a> {
    pub fn new(curve: &'a LoopCurve, a: &'a MatrixForm, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(NumericError::Argument("transport needs at least one step".into()));
        }
        let r = a.rank();
        let dt = 1.0 / steps as f64;
        let mut nodes = Vec::with_capacity(steps + 1);
        nodes.push(DMatrix::identity(r, r));
        for i in 0..steps {
            let next = step(curve, a, &nodes[i], i as f64 * dt, dt)?;
            nodes.push(next);
        }
        check_finite(&nodes[steps])?;
        Ok(Transport { curve, a, nodes })
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `H|_0^t`.
    pub fn from_origin(&self, t: f64) -> Result<Mat> {
        let steps = self.steps();
        let x = t.clamp(0.0, 1.0) * steps as f64;
        let i = (x.floor() as usize).min(steps);
        let t0 = i as f64 / steps as f64;
        if i == steps || t == t0 {
            return Ok(self.nodes[i].clone());
        }
        step(self.curve, self.a, &self.nodes[i], t0, t - t0)
    }

    /// `H|_0^1`.
    pub fn holonomy(&self) -> &Mat {
        &self.nodes[self.steps()]
    }
}
