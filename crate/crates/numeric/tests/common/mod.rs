#![allow(dead_code)]

use std::f64::consts::TAU;

use bf_numeric::{ConnectionSample, LoopCurve, Mat, MatrixForm, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn m2(a: f64, b: f64, c: f64, d: f64) -> Mat {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn j2() -> Mat {
    m2(0.0, -1.0, 1.0, 0.0)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Circle of radius `r` in the x1x2-plane of R^n, framed by `e_n`.
pub fn circle(n: usize, r: f64, m: usize) -> LoopCurve {
    LoopCurve::from_fn(
        "circle",
        m,
        |t| {
            let mut p = vec![0.0; n];
            p[0] = r * (TAU * t).cos();
            p[1] = r * (TAU * t).sin();
            p
        },
        |_| {
            let mut v = vec![0.0; n];
            v[n - 1] = 1.0;
            v
        },
        &Tolerances::default(),
    )
    .unwrap()
}

/// Unit circle whose framing turns once around it.
pub fn twisted_circle(m: usize) -> LoopCurve {
    LoopCurve::from_fn(
        "twisted",
        m,
        |t| vec![(TAU * t).cos(), (TAU * t).sin(), 0.0],
        |t| {
            let (s, c) = (TAU * t).sin_cos();
            let (sw, cw) = (TAU * t).sin_cos();
            vec![cw * c, cw * s, -sw]
        },
        &Tolerances::default(),
    )
    .unwrap()
}

/// A loop winding once around the x3-axis, tilted out of the plane.
pub fn winding_loop(m: usize) -> LoopCurve {
    LoopCurve::from_fn(
        "winding",
        m,
        |t| {
            let (s, c) = (TAU * t).sin_cos();
            vec![1.5 * c, s, 0.3 * (2.0 * TAU * t).sin()]
        },
        |_| vec![0.0, 0.0, 1.0],
        &Tolerances::default(),
    )
    .unwrap()
}

/// Small smooth random vector field along the loop.
pub fn random_field(r: &mut ChaCha8Rng, n: usize) -> impl Fn(f64) -> DVector<f64> + Sync + Clone {
    let modes: Vec<(usize, Vec<f64>, Vec<f64>)> = (1..=3)
        .map(|k| (k, (0..n).map(|_| r.gen_range(-1.0..1.0)).collect(), (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()))
        .collect();
    move |t| {
        let mut v = DVector::zeros(n);
        for (k, a, b) in &modes {
            let (s, c) = (TAU * *k as f64 * t).sin_cos();
            for i in 0..n {
                v[i] += a[i] * c + b[i] * s;
            }
        }
        v
    }
}

fn g_parts(x: &[f64]) -> (f64, f64, [f64; 3], [f64; 3]) {
    let phi = x[0] + 0.5 * x[1] * x[2];
    let psi = x[1] - x[0] * x[2];
    (phi, psi, [1.0, 0.5 * x[2], 0.5 * x[1]], [-x[2], 1.0, -x[0]])
}

/// `g = R(φ) U(ψ)` with a rotation `R` and a unipotent `U`.
pub fn gauge(x: &[f64]) -> Mat {
    let (phi, psi, _, _) = g_parts(x);
    let (s, c) = phi.sin_cos();
    m2(c, -s, s, c) * m2(1.0, psi, 0.0, 1.0)
}

/// `A = g⁻¹dg`.
pub fn pure_gauge() -> MatrixForm {
    MatrixForm::new(3, 1, 2, |x| {
        let (_, psi, dphi, dpsi) = g_parts(x);
        let rot = m2(-psi, -1.0 - psi * psi, 1.0, psi);
        let nil = m2(0.0, 1.0, 0.0, 0.0);
        (0..3).map(|i| &rot * dphi[i] + &nil * dpsi[i]).collect()
    })
}

/// `dθ` around the x3-axis.
pub fn dtheta(x: &[f64]) -> [f64; 3] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    [-x[1] / r2, x[0] / r2, 0.0]
}

fn sigma(x: &[f64]) -> (Mat, [Mat; 3]) {
    let s = m2(x[2], x[0] * x[1], x[0] - x[2] * x[2], 0.5 * x[1]) * 0.3;
    let d = [
        m2(0.0, x[1], 1.0, 0.0) * 0.3,
        m2(0.0, x[0], 0.0, 0.5) * 0.3,
        m2(1.0, 0.0, -2.0 * x[2], 0.0) * 0.3,
    ];
    (s, d)
}

/// Flat `A = αJ dθ` and `d_A`-closed `B = (β + γJ) dθ + d_A σ`.
pub fn angular(alpha: f64, beta: f64, gamma: f64, with_sigma: bool) -> ConnectionSample {
    let x_gen = j2() * alpha;
    let y = Mat::identity(2, 2) * beta + j2() * gamma;
    let xa = x_gen.clone();
    let a = MatrixForm::new(3, 1, 2, move |x| dtheta(x).iter().map(|w| &xa * *w).collect());
    let b = MatrixForm::new(3, 1, 2, move |x| {
        let th = dtheta(x);
        let mut out: Vec<Mat> = th.iter().map(|w| &y * *w).collect();
        if with_sigma {
            let (s, ds) = sigma(x);
            let comm = &x_gen * &s - &s * &x_gen;
            for i in 0..3 {
                out[i] += &ds[i] + &comm * th[i];
            }
        }
        out
    });
    ConnectionSample::new(a, b).unwrap().flagged(true, true)
}

/// A random connection `A_μ = C_μ + Σ_ν x_ν D_μν`.
pub fn random_connection(r: &mut ChaCha8Rng, n: usize, rank: usize) -> MatrixForm {
    let mut mat = |s: f64| DMatrix::from_fn(rank, rank, |_, _| r.gen_range(-s..s));
    let c: Vec<Mat> = (0..n).map(|_| mat(1.0)).collect();
    let d: Vec<Vec<Mat>> = (0..n).map(|_| (0..n).map(|_| mat(0.5)).collect()).collect();
    MatrixForm::new(n, 1, rank, move |x| {
        (0..n)
            .map(|mu| {
                let mut m = c[mu].clone();
                for nu in 0..n {
                    m += &d[mu][nu] * x[nu];
                }
                m
            })
            .collect()
    })
}
