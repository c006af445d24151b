mod common;

use std::f64::consts::PI;

use bf_numeric::{
    chen_integral, iterated_integral, slot_integral, ConnectionSample, Direction, LoopCurve, Mat, MatrixForm, NumericError, SlotFn,
    Tolerances,
};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn pulled_back<'a>(c: &'a LoopCurve, f: &'a MatrixForm) -> impl Fn(f64) -> bf_numeric::Result<Mat> + Sync + 'a {
    move |t| {
        let (x, v) = c.point_and_velocity(t);
        f.contract(x.as_slice(), &[v])
    }
}

#[test]
fn zero_insertion_gives_zero() {
    let c = winding_loop(128);
    let conn = angular(0.4, 0.0, 0.0, false);
    let zero = ConnectionSample::new(conn.a.clone(), MatrixForm::zero(3, 1, 2)).unwrap();
    let tol = Tolerances::default();
    for k in 1..=3 {
        assert_eq!(iterated_integral(&c, &zero, k, &[], &tol).unwrap(), 0.0);
    }
    assert!(matches!(iterated_integral(&c, &zero, 0, &[], &tol), Err(NumericError::Argument(_))));
}

#[test]
fn first_order_on_a_circle_is_a_line_integral() {
    let r = 0.7;
    let c = circle(3, r, 64);
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, -0.25]));
    let dd = d.clone();
    let b = MatrixForm::new(3, 1, 2, move |x| vec![Mat::zeros(2, 2), &dd * x[0], Mat::zeros(2, 2)]);
    let conn = ConnectionSample::new(MatrixForm::zero(3, 1, 2), b).unwrap();
    let h1 = iterated_integral(&c, &conn, 1, &[], &Tolerances::default()).unwrap();
    let exact = d.trace() * PI * r * r;
    assert!((h1 - exact).abs() < 1e-8, "{h1} vs {exact}");
}

#[test]
fn nested_quadrature_matches_the_chen_equation() {
    let c = winding_loop(128);
    let tol = Tolerances::default();
    for seed in 0..3 {
        let mut r = rng(seed);
        let a = random_connection(&mut r, 3, 2);
        let forms: Vec<MatrixForm> = (0..3).map(|_| random_connection(&mut r, 3, 2)).collect();
        let fns: Vec<_> = forms.iter().map(|f| pulled_back(&c, f)).collect();
        let slots: Vec<&SlotFn> = fns.iter().map(|f| f as &SlotFn).collect();
        for k in 1..=3 {
            let quad = slot_integral(&c, &a, &slots[..k], &tol).unwrap();
            let ode = chen_integral(&c, &a, &slots[..k], 4096).unwrap();
            assert!((quad - ode).abs() < 1e-8 * (1.0 + ode.abs()), "seed {seed}, k {k}: {quad} vs {ode}");
        }
    }
}

#[test]
fn quadrature_converges_at_fourth_order() {
    let c = winding_loop(128);
    let mut r = rng(11);
    let a = random_connection(&mut r, 3, 2);
    let forms: Vec<MatrixForm> = (0..2).map(|_| random_connection(&mut r, 3, 2)).collect();
    let fns: Vec<_> = forms.iter().map(|f| pulled_back(&c, f)).collect();
    let slots: Vec<&SlotFn> = fns.iter().map(|f| f as &SlotFn).collect();
    let reference = slot_integral(&c, &a, &slots, &Tolerances::default()).unwrap();
    let at = |panels| {
        let tol = Tolerances { gauss_points: 3, panels, ..Tolerances::default() };
        (slot_integral(&c, &a, &slots, &tol).unwrap() - reference).abs()
    };
    let (e1, e2, e3) = (at(4), at(8), at(16));
    assert!(e1 / e2 >= 8.0, "{e1} / {e2}");
    assert!(e2 / e3 >= 8.0, "{e2} / {e3}");
}

fn drift(conn: &ConnectionSample, k: usize, seed: u64) -> (f64, f64) {
    let tol = Tolerances::default();
    let base = winding_loop(128);
    let pts: Vec<Vec<f64>> = base.samples().iter().map(|p| p.as_slice().to_vec()).collect();
    conn.check(&pts, &tol).unwrap();
    let mut r = rng(seed);
    let h0 = iterated_integral(&base, conn, k, &[], &tol).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let field = random_field(&mut r, 3);
        let eps = r.gen_range(0.02..0.08);
        let moved = base.deformed(eps, field, &tol).unwrap();
        worst = worst.max((iterated_integral(&moved, conn, k, &[], &tol).unwrap() - h0).abs());
    }
    (h0, worst)
}

#[test]
fn flat_data_gives_locally_constant_values() {
    let (h1, d1) = drift(&angular(0.4, 0.7, -0.3, true), 1, 5);
    assert!(h1.abs() > 1e-2);
    assert!(d1 < 1e-4, "{d1}");
    // h_2 picks up B∧B on the collapse face; it vanishes for B ∝ dθ
    let (h2, d2) = drift(&angular(0.4, 0.7, -0.3, false), 2, 6);
    assert!(h2.abs() > 1e-2);
    assert!(d2 < 1e-4, "{d2}");
    let (_, d2) = drift(&angular(0.4, 0.7, -0.3, true), 2, 6);
    assert!(d2 > 1e-3);
}

#[test]
fn non_closed_b_is_not_invariant() {
    let tol = Tolerances::default();
    let base = winding_loop(128);
    let conn = angular(0.4, 0.7, -0.3, true);
    let b = MatrixForm::new(3, 1, 2, |x| vec![Mat::zeros(2, 2), j2() * x[0], Mat::zeros(2, 2)]);
    let bad = ConnectionSample::new(conn.a.clone(), b).unwrap().flagged(true, true);
    let pts: Vec<Vec<f64>> = base.samples().iter().map(|p| p.as_slice().to_vec()).collect();
    assert!(matches!(bad.check(&pts, &tol), Err(NumericError::Connection(_))));
    let field = random_field(&mut rng(1), 3);
    let moved = base.deformed(0.05, field, &tol).unwrap();
    let h0 = iterated_integral(&base, &bad, 1, &[], &tol).unwrap();
    let h = iterated_integral(&moved, &bad, 1, &[], &tol).unwrap();
    assert!((h - h0).abs() > 1e-3);
}

fn const_dir(v: Vec<f64>) -> impl Fn(f64) -> DVector<f64> + Sync {
    move |_| DVector::from_vec(v.clone())
}

#[test]
fn higher_dimensional_contraction() {
    let tol = Tolerances::default();
    let r = 0.8;
    let c = circle(4, r, 64);
    // B = D x1 dx2∧dx3 on R^4; h_1(e3) = Tr D ∮ x1 dx2
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
    let dd = d.clone();
    let b = MatrixForm::new(4, 2, 2, move |x| {
        let mut cs = vec![Mat::zeros(2, 2); 6];
        cs[3] = &dd * x[0];
        cs
    });
    let conn = ConnectionSample::new(MatrixForm::zero(4, 1, 2), b).unwrap();
    let e3 = const_dir(vec![0.0, 0.0, 1.0, 0.0]);
    let h1 = iterated_integral(&c, &conn, 1, &[&e3 as &Direction], &tol).unwrap();
    assert!((h1 - d.trace() * PI * r * r).abs() < 1e-8);
    assert!(matches!(iterated_integral(&c, &conn, 1, &[], &tol), Err(NumericError::Argument(_))));

    // h_2 is a 2-form: alternating and linear in the directions
    let a = random_connection(&mut rng(2), 4, 2);
    let b2 = MatrixForm::new(4, 2, 2, |x| (0..6).map(|i| Mat::from_fn(2, 2, |r, c| ((i + r + 2 * c) as f64 * 0.3).sin() * (1.0 + x[i % 4]))).collect());
    let conn = ConnectionSample::new(a, b2).unwrap();
    let u = const_dir(vec![0.0, 0.3, 1.0, -0.5]);
    let w = random_field(&mut rng(9), 4);
    let w2 = {
        let w = w.clone();
        move |t| w(t) * 2.0
    };
    let h = |x: &Direction, y: &Direction| iterated_integral(&c, &conn, 2, &[x, y], &tol).unwrap();
    let huw = h(&u, &w);
    assert!(huw.abs() > 1e-6);
    assert!((huw + h(&w, &u)).abs() < 1e-10);
    assert!(h(&u, &u).abs() < 1e-10);
    assert!((h(&u, &w2) - 2.0 * huw).abs() < 1e-9);
}
