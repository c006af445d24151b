//! Instantiating the symbolic first-order loop observable with numeric data.

use bf_core::bv::BVContext;
use bf_core::loops::{build_observable, CoefficientSequences, Family, KAPPA};
use bf_core::{Coeff, Generator, Kind};
use bf_numeric::{chen_integral, iterated_integral, ConnectionSample, LoopCurve, Mat, SlotFn, Tolerances};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct H1Check {
    /// The `κ`-linear single-slot part of the observable, evaluated term by
    /// term with the background connection in the transports.
    pub symbolic: f64,
    /// `h_1` from the nested quadrature.
    pub numeric: f64,
    pub difference: f64,
    pub terms: Vec<String>,
}

/// How a letter evaluates on classical data: the whole connection sits in
/// the background transport, ghosts and antifields vanish.
enum Letter {
    Zero,
    B,
}

fn classify(g: &Generator) -> Result<Letter> {
    match g.kind() {
        Kind::Ghost | Kind::Antifield => Ok(Letter::Zero),
        Kind::Field if g.level() == 0 && g.name() == "A" => Ok(Letter::Zero),
        Kind::Field if g.level() == 0 && g.name() == "B" => Ok(Letter::B),
        _ => Err(CliError::Argument(format!("no numeric value for letter {g}"))),
    }
}

/// Compare the symbolic `h_1` at `n = 3` with [`iterated_integral`].
pub fn h1_crosscheck(curve: &LoopCurve, conn: &ConnectionSample, tol: &Tolerances) -> Result<H1Check> {
    if conn.n() != 3 || curve.dim() != 3 {
        return Err(CliError::Argument("the h_1 cross-check runs on R^3".into()));
    }
    let ctx = BVContext::new(3)?;
    let series = build_observable(&ctx, Family::Hhat, &CoefficientSequences::hhat(), 1)?;
    let slot = |t: f64| -> bf_numeric::Result<Mat> {
        let (x, v) = curve.point_and_velocity(t);
        conn.b.contract(x.as_slice(), &[v])
    };
    let slots: [&SlotFn; 1] = [&slot];
    let mut symbolic = 0.0;
    let mut terms = Vec::new();
    for (key, coeff) in series.terms() {
        let t = &key.term;
        if !key.functional.factors.is_empty() || t.based.is_some() || t.slots.len() != 1 || t.lm_degree() != 0 {
            continue;
        }
        let linear = coeff.filter(|m| m.exponent(KAPPA) == 1 && m.pairs().len() == 1);
        if linear.is_zero() {
            continue;
        }
        let letters = t.slots[0].iter().map(classify).collect::<Result<Vec<_>>>()?;
        if letters.iter().any(|l| matches!(l, Letter::Zero)) {
            continue;
        }
        if letters.len() != 1 {
            return Err(CliError::Argument(format!("unexpected product slot in {t}")));
        }
        let value = linear
            .substitute(KAPPA, &Coeff::one())
            .and_then(|c| c.as_rational())
            .and_then(|q| q.to_f64())
            .ok_or_else(|| CliError::Argument(format!("coefficient {coeff} is not numeric")))?;
        terms.push(format!("({linear}) {t}"));
        symbolic += value * chen_integral(curve, &conn.a, &slots, tol.transport_steps)?;
    }
    let numeric = iterated_integral(curve, conn, 1, &[], tol)?;
    Ok(H1Check { symbolic, numeric, difference: (symbolic - numeric).abs(), terms })
}
