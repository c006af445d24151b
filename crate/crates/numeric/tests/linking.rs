mod common;

use bf_numeric::linking::linking_with;
use bf_numeric::{linking_integral, LoopCurve, NumericError, Tolerances};
use common::*;
use rand::Rng;

#[test]
fn unlinked_pushoff() {
    let c = circle(3, 1.0, 128);
    let r = linking_integral(&c, &Tolerances::default()).unwrap();
    assert_eq!(r.rounded, 0);
    assert!(r.value.abs() < 1e-3);
}

#[test]
fn twisted_framing_links_once() {
    let c = twisted_circle(128);
    let tol = Tolerances::default();
    let r = linking_integral(&c, &tol).unwrap();
    assert_eq!(r.rounded, 1);
    assert!(r.deviation.abs() < 1e-3, "{r:?}");
    assert!((r.epsilon - 0.05 * c.diameter()).abs() < 1e-15);

    let fine = linking_with(&c, r.epsilon, 4096, false).unwrap();
    assert!((fine.value - 1.0).abs() < 1e-6, "{fine:?}");

    let back = linking_with(&c, r.epsilon, tol.linking_grid, true).unwrap();
    assert!((back.value + r.value).abs() < 1e-9);
}

#[test]
fn invariant_under_small_isotopies() {
    let c = twisted_circle(128);
    let tol = Tolerances::default();
    let base = linking_integral(&c, &tol).unwrap();
    let mut r = rng(4);
    for _ in 0..10 {
        let field = random_field(&mut r, 3);
        let moved = c.deformed(r.gen_range(0.01..0.04), field, &tol).unwrap();
        let l = linking_with(&moved, base.epsilon, tol.linking_grid, false).unwrap();
        assert!((l.value - base.value).abs() < 1e-3);
    }
}

#[test]
fn crossing_companion_is_rejected() {
    let c = LoopCurve::from_fn(
        "inward",
        128,
        |t| vec![(std::f64::consts::TAU * t).cos(), (std::f64::consts::TAU * t).sin(), 0.0],
        |t| vec![-(std::f64::consts::TAU * t).cos(), -(std::f64::consts::TAU * t).sin(), 0.0],
        &Tolerances::default(),
    )
    .unwrap();
    assert!(matches!(linking_with(&c, 2.0, 256, false), Err(NumericError::Framing(_))));
    assert!(matches!(linking_integral(&circle(4, 1.0, 32), &Tolerances::default()), Err(NumericError::Argument(_))));
}
