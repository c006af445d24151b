//! Observable families and their coefficient sequences.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::coeff::Coeff;
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `{exp[(i/ℏ)κ²S₃] 𝓗}₀`, odd `n`.
    Hhat,
    /// Odd part in `κ` of `{exp[(i/ℏ)κ²O₃] 𝓗}₀`.
    HhatOdd,
    /// Even part in `κ` of the same observable; not closed for even `n`.
    HhatEven,
    /// `{exp[(i/ℏ)Σ μ_r O_{r+1}] Tr hol(𝖠 + Σ λ_s 𝖡^s)}₀`.
    Htilde,
    /// Odd part in the `λ, μ` grading of [`Family::Htilde`].
    HtildeOdd,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Hhat, Family::HhatOdd, Family::HhatEven, Family::Htilde, Family::HtildeOdd];

    pub fn name(self) -> &'static str {
        match self {
            Family::Hhat => "hhat",
            Family::HhatOdd => "hhat-odd",
            Family::HhatEven => "h-even-part",
            Family::Htilde => "htilde",
            Family::HtildeOdd => "htilde-odd",
        }
    }

    /// Which graded part of the observable is kept.
    pub fn projection(self) -> Projection {
        match self {
            Family::HhatOdd | Family::HtildeOdd => Projection::Odd,
            Family::HhatEven => Projection::Even,
            Family::Hhat | Family::Htilde => Projection::Full,
        }
    }

    pub fn is_htilde(self) -> bool {
        matches!(self, Family::Htilde | Family::HtildeOdd)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CoreError::Argument(format!("unknown family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    Full,
    Odd,
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(n: u32) -> Parity {
        if n % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

impl FromStr for Parity {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            _ => Err(CoreError::Argument(format!("parity must be `odd` or `even`, got `{s}`"))),
        }
    }
}

pub const KAPPA: &str = "kappa";

pub fn lambda_name(s: usize) -> String {
    format!("lambda{s}")
}

pub fn mu_name(r: usize) -> String {
    format!("mu{r}")
}

/// `λ_s` multiplies `𝖡^s` in the connection, `μ_r` multiplies `O_{r+1}` in
/// the interaction. Both are 1-indexed; index `i` is stored at `i - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSequences {
    pub lambda: Vec<Coeff>,
    pub mu: Vec<Coeff>,
}

impl CoefficientSequences {
    /// `λ = (κ)`, `μ = (0, κ²)`.
    pub fn hhat() -> Self {
        let k = Coeff::param(KAPPA, 1);
        CoefficientSequences { lambda: vec![k.clone()], mu: vec![Coeff::zero(), k.pow(2)] }
    }

    /// Formal `λ_1..λ_len` with `μ` fixed by the closedness conditions. For
    /// odd `n` the even-indexed `λ` are zero.
    pub fn formal(len: usize, parity: Parity) -> Self {
        let lambda: Vec<Coeff> = (1..=len)
            .map(|s| {
                if parity == Parity::Odd && s % 2 == 0 {
                    Coeff::zero()
                } else {
                    Coeff::param(&lambda_name(s), 1)
                }
            })
            .collect();
        let mu = required_mu(&lambda, parity);
        CoefficientSequences { lambda, mu }
    }

    /// Formal `λ_1..λ_l` and independent formal `μ_1..μ_m`.
    pub fn free(l: usize, m: usize) -> Self {
        CoefficientSequences {
            lambda: (1..=l).map(|s| Coeff::param(&lambda_name(s), 1)).collect(),
            mu: (1..=m).map(|r| Coeff::param(&mu_name(r), 1)).collect(),
        }
    }

    pub fn lambda(&self, s: usize) -> Coeff {
        self.lambda.get(s.wrapping_sub(1)).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn mu(&self, r: usize) -> Coeff {
        self.mu.get(r.wrapping_sub(1)).cloned().unwrap_or_else(Coeff::zero)
    }
}

/// The `μ` sequence making the observable closed for the given `λ`.
///
/// Odd `n`: `μ_l = Σ_{i+j=l} λ_i λ_j` over `i, j ≥ 1`, which requires the
/// even `λ` and odd `μ` to vanish, checked separately. Even `n`: the same
/// convolution with no vanishing constraint.
pub fn required_mu(lambda: &[Coeff], _parity: Parity) -> Vec<Coeff> {
    let len = 2 * lambda.len();
    let mut mu = vec![Coeff::zero(); len];
    for (i, li) in lambda.iter().enumerate() {
        for (j, lj) in lambda.iter().enumerate() {
            mu[i + j + 1] += &(li * lj);
        }
    }
    while mu.last().is_some_and(Coeff::is_zero) {
        mu.pop();
    }
    mu
}

/// Outcome of checking a concrete pair of sequences against the conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem4Check {
    pub parity: Parity,
    pub required_mu: Vec<String>,
    pub violations: Vec<String>,
    pub satisfied: bool,
}

pub fn theorem4_conditions(seqs: &CoefficientSequences, parity: Parity) -> Theorem4Check {
    let req = required_mu(&seqs.lambda, parity);
    let mut violations = Vec::new();
    if parity == Parity::Odd {
        for (i, l) in seqs.lambda.iter().enumerate() {
            if (i + 1) % 2 == 0 && !l.is_zero() {
                violations.push(format!("lambda{} = {} must vanish", i + 1, l));
            }
        }
        for (i, m) in seqs.mu.iter().enumerate() {
            if (i + 1) % 2 == 1 && !m.is_zero() {
                violations.push(format!("mu{} = {} must vanish", i + 1, m));
            }
        }
    }
    let len = req.len().max(seqs.mu.len());
    for r in 1..=len {
        let want = req.get(r - 1).cloned().unwrap_or_else(Coeff::zero);
        let have = seqs.mu(r);
        if want != have {
            violations.push(format!("mu{r} = {have}, required {want}"));
        }
    }
    Theorem4Check {
        parity,
        required_mu: req.iter().map(ToString::to_string).collect(),
        satisfied: violations.is_empty(),
        violations,
    }
}

/// Keep the part of a coefficient that is odd (or even) under `κ → -κ`,
/// `λ → -λ`. The `μ` are held fixed.
pub fn project_coeff(c: &Coeff, p: Projection) -> Coeff {
    if p == Projection::Full {
        return c.clone();
    }
    let want_odd = p == Projection::Odd;
    c.filter(|m| {
        let d: i64 = m
            .pairs()
            .iter()
            .filter(|(name, _)| name == KAPPA || name.starts_with("lambda"))
            .map(|(_, e)| *e as i64)
            .sum();
        (d.rem_euclid(2) == 1) == want_odd
    })
}

/// Expansion order of a parameter: `κ` counts 1, `λ_s` counts `s` and
/// `μ_r` counts `r`, so that `μ_r = Σ λ_i λ_j` is homogeneous.
pub fn order_weight(name: &str) -> i64 {
    if name == KAPPA {
        1
    } else if let Some(s) = name.strip_prefix("lambda").or_else(|| name.strip_prefix("mu")) {
        s.parse().unwrap_or(0)
    } else {
        0
    }
}

/// Lowest expansion order among the terms of a coefficient.
pub fn coeff_order(c: &Coeff) -> i64 {
    c.terms()
        .map(|(m, _)| m.pairs().iter().map(|(name, e)| order_weight(name) * *e as i64).sum::<i64>())
        .min()
        .unwrap_or(0)
}
