//! Exact coefficients: Laurent polynomials in named formal parameters
//! (`kappa`, `ih`, `lambda1`, `mu2`, `N`, ...) over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar.
pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qf(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// A monomial in the formal parameters, e.g. `kappa^2 ih^-1`.
/// Stored sorted by parameter name with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamMono(Vec<(String, i32)>);

impl ParamMono {
    pub fn one() -> Self {
        ParamMono(Vec::new())
    }

    pub fn var(name: &str, exp: i32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        ParamMono(vec![(name.to_string(), exp)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, i32)>) -> Self {
        let mut m = Self::one();
        for (name, e) in pairs {
            m = m.mul(&ParamMono::var(&name, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(String, i32)] {
        &self.0
    }

    pub fn exponent(&self, name: &str) -> i32 {
        self.0
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &ParamMono) -> ParamMono {
        let mut map: BTreeMap<String, i32> = self.0.iter().cloned().collect();
        for (n, e) in &other.0 {
            *map.entry(n.clone()).or_insert(0) += *e;
        }
        ParamMono(map.into_iter().filter(|(_, e)| *e != 0).collect())
    }
}

impl fmt::Display for ParamMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{n}")?;
            } else {
                write!(f, "{n}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Laurent polynomial with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coeff {
    terms: BTreeMap<ParamMono, Q>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::from_q(Q::one())
    }

    pub fn int(n: i128) -> Self {
        Coeff::from_q(q(n))
    }

    pub fn from_q(v: Q) -> Self {
        let mut c = Coeff::zero();
        c.add_term(ParamMono::one(), v);
        c
    }

    /// The formal parameter `name` raised to `exp`.
    pub fn param(name: &str, exp: i32) -> Self {
        let mut c = Coeff::zero();
        c.add_term(ParamMono::var(name, exp), Q::one());
        c
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (ParamMono, Q)>) -> Self {
        let mut c = Coeff::zero();
        for (m, v) in terms {
            c.add_term(m, v);
        }
        c
    }

    pub fn add_term(&mut self, m: ParamMono, v: Q) {
        if v.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *slot += v;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamMono, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value if the coefficient has no parameter dependence.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, v) = self.terms.iter().next().unwrap();
                m.is_one().then_some(*v)
            }
            _ => None,
        }
    }

    pub fn scale(&self, s: Q) -> Coeff {
        if s.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * s)).collect(),
        }
    }

    pub fn signed(&self, negative: bool) -> Coeff {
        if negative {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, e: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Keep only monomials for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&ParamMono) -> bool) -> Coeff {
        Coeff {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, v)| (m.clone(), *v))
                .collect(),
        }
    }

    /// Substitute every occurrence of `name` by `value` (nonnegative powers only;
    /// negative powers of `name` are rejected with `None`).
    pub fn substitute(&self, name: &str, value: &Coeff) -> Option<Coeff> {
        let mut out = Coeff::zero();
        for (m, v) in &self.terms {
            let e = m.exponent(name);
            if e < 0 {
                return None;
            }
            let rest = ParamMono(m.0.iter().filter(|(n, _)| n != name).cloned().collect());
            let mut t = Coeff::zero();
            t.add_term(rest, *v);
            out += &(&t * &value.pow(e as u32));
        }
        Some(out)
    }

    /// Largest absolute value of the rational coefficients, as a float.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|v| *v.numer() as f64 / *v.denom() as f64)
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    /// Least common multiple of denominators; used to clear fractions.
    pub fn denominator_lcm(&self) -> i128 {
        self.terms.values().fold(1i128, |acc, v| acc.lcm(v.denom()))
    }
}

impl From<i128> for Coeff {
    fn from(n: i128) -> Self {
        Coeff::int(n)
    }
}

impl From<Q> for Coeff {
    fn from(v: Q) -> Self {
        Coeff::from_q(v)
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        for (m, v) in &rhs.terms {
            self.add_term(m.clone(), *v);
        }
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        let mut c = self.clone();
        c += rhs;
        c
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        let mut c = self.clone();
        c += &(-rhs.clone());
        c
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.into_iter().map(|(m, v)| (m, -v)).collect(),
        }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (m1, v1) in &self.terms {
            for (m2, v2) in &rhs.terms {
                out.add_term(m1.mul(m2), v1 * v2);
            }
        }
        out
    }
}

fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        format!("{}", v.numer())
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, v)) in self.terms.iter().enumerate() {
            let neg = v.is_negative();
            let a = v.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn format_q(v: &Q) -> String {
    fmt_q(v)
}

pub(crate) fn parse_q(s: &str) -> Option<Q> {
    match s.split_once('/') {
        Some((a, b)) => {
            let d: i128 = b.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Q::new(a.trim().parse().ok()?, d))
        }
        None => Some(q(s.trim().parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_merges_and_cancels() {
        let k = Coeff::param("kappa", 1);
        let a = &k + &Coeff::int(1);
        let b = &k - &Coeff::int(1);
        let p = &a * &b;
        assert_eq!(p, &Coeff::param("kappa", 2) - &Coeff::int(1));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn laurent_powers_cancel() {
        let h = Coeff::param("ih", 1);
        let hinv = Coeff::param("ih", -1);
        assert_eq!(&h * &hinv, Coeff::one());
    }

    #[test]
    fn substitution_negates_odd_part() {
        let l = Coeff::param("lambda1", 1);
        let c = &(&l * &l) + &l;
        let flipped = c.substitute("lambda1", &(-l.clone())).unwrap();
        assert_eq!(flipped, &(&l * &l) - &l);
    }

    #[test]
    fn display_is_stable() {
        let c = &Coeff::from_q(qf(3, 2)) - &Coeff::param("kappa", 2);
        assert_eq!(c.to_string(), "3/2 - kappa^2");
    }
}
