//! Bigradings (form degree, ghost number) and the generators of the algebra.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Form degree and ghost number of a homogeneous element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Grading {
    pub deg: i32,
    pub gh: i32,
}

impl Grading {
    pub const ZERO: Grading = Grading { deg: 0, gh: 0 };

    pub const fn new(deg: i32, gh: i32) -> Self {
        Grading { deg, gh }
    }

    pub const fn total(self) -> i32 {
        self.deg + self.gh
    }

    /// `true` when swapping two elements of these gradings costs a minus sign
    /// in the wedge algebra: `(-1)^(deg a deg b + gh a gh b)`.
    pub fn swap_odd(self, other: Grading) -> bool {
        (self.deg * other.deg + self.gh * other.gh).rem_euclid(2) == 1
    }

    /// Total-degree parity of the dot algebra.
    pub fn total_odd(self) -> bool {
        self.total().rem_euclid(2) == 1
    }
}

impl std::ops::Add for Grading {
    type Output = Grading;
    fn add(self, rhs: Grading) -> Grading {
        Grading::new(self.deg + rhs.deg, self.gh + rhs.gh)
    }
}

impl std::ops::Sub for Grading {
    type Output = Grading;
    fn sub(self, rhs: Grading) -> Grading {
        Grading::new(self.deg - rhs.deg, self.gh - rhs.gh)
    }
}

impl std::iter::Sum for Grading {
    fn sum<I: Iterator<Item = Grading>>(iter: I) -> Grading {
        iter.fold(Grading::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.deg, self.gh)
    }
}

/// Role of a generator. The declaration order is the primary sort key of the
/// canonical generator order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Field,
    Ghost,
    Antifield,
    /// Background parallel transport segment `H(A0)|_s^t`; grading (0,0).
    Transport,
    Parameter,
    /// An inhomogeneous superfield treated as a single letter of fixed total
    /// degree. Exempt from form-degree truncation.
    Superfield,
}

impl Kind {
    pub fn code(self) -> char {
        match self {
            Kind::Field => 'f',
            Kind::Ghost => 'g',
            Kind::Antifield => 'a',
            Kind::Transport => 't',
            Kind::Parameter => 'p',
            Kind::Superfield => 's',
        }
    }

    pub fn from_code(c: char) -> Option<Kind> {
        Some(match c {
            'f' => Kind::Field,
            'g' => Kind::Ghost,
            'a' => Kind::Antifield,
            't' => Kind::Transport,
            'p' => Kind::Parameter,
            's' => Kind::Superfield,
            _ => return None,
        })
    }
}

/// A letter of the algebra: a field, ghost, antifield, transport segment,
/// parameter or superfield symbol, possibly with `level` applications of the
/// background covariant differential.
///
/// Ordering is `(kind, name, level)` first, so canonical words sort stably.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    kind: Kind,
    name: Arc<str>,
    level: u8,
    base: Grading,
    algebra: bool,
}

impl Generator {
    pub fn new(name: &str, base: Grading, kind: Kind, algebra: bool) -> Self {
        let base = if kind == Kind::Transport { Grading::ZERO } else { base };
        Generator {
            kind,
            name: Arc::from(name),
            level: 0,
            base,
            algebra,
        }
    }

    /// Matrix (Lie/associative algebra) valued generator.
    pub fn matrix(name: &str, deg: i32, gh: i32, kind: Kind) -> Self {
        Generator::new(name, Grading::new(deg, gh), kind, true)
    }

    /// Scalar (commutative) generator.
    pub fn scalar(name: &str, deg: i32, gh: i32, kind: Kind) -> Self {
        Generator::new(name, Grading::new(deg, gh), kind, false)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn is_algebra(&self) -> bool {
        self.algebra
    }

    /// Grading of the underived generator.
    pub fn base_grading(&self) -> Grading {
        self.base
    }

    /// Grading including the applied differentials.
    pub fn grading(&self) -> Grading {
        Grading::new(self.base.deg + self.level as i32, self.base.gh)
    }

    /// Whether the generator is annihilated by the differential outright.
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Transport | Kind::Parameter)
    }

    /// The generator with one more differential applied. `None` when the
    /// result vanishes (constants, or `d` of an already derived letter since
    /// the background connection is flat).
    pub fn derived(&self) -> Option<Generator> {
        if self.is_constant() || self.level >= 1 || self.kind == Kind::Superfield {
            return None;
        }
        let mut g = self.clone();
        g.level += 1;
        Some(g)
    }

    pub fn with_level(&self, level: u8) -> Generator {
        let mut g = self.clone();
        g.level = level;
        g
    }

    /// The underived generator this letter was built from.
    pub fn underived(&self) -> Generator {
        self.with_level(0)
    }

    pub fn same_base(&self, other: &Generator) -> bool {
        self.kind == other.kind && self.name == other.name && self.base == other.base
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.level {
            write!(f, "d")?;
        }
        write!(f, "{}", self.name)
    }
}

/// Sign of moving a block of grading `a` past a block of grading `b`.
pub fn koszul(a: Grading, b: Grading) -> bool {
    a.swap_odd(b)
}

/// Total grading of a word.
pub fn word_grading(w: &[Generator]) -> Grading {
    w.iter().map(Generator::grading).sum()
}

/// Sign relating a dot-ordered word to the same letters in wedge order:
/// `x1 · x2 · ... = (-1)^(sum_{i<j} gh_i deg_j) x1 ∧ x2 ∧ ...`.
pub fn dot_to_wedge_odd(gradings: &[Grading]) -> bool {
    let mut gh_acc = 0i64;
    let mut exp = 0i64;
    for g in gradings {
        exp += gh_acc * g.deg as i64;
        gh_acc += g.gh as i64;
    }
    exp.rem_euclid(2) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_sum() {
        let g = Grading::new(3, -2);
        assert_eq!(g.total(), 1);
    }

    #[test]
    fn ghost_and_one_form_commute_in_wedge() {
        let c = Grading::new(0, 1);
        let a = Grading::new(1, 0);
        assert!(!c.swap_odd(a));
        assert!(a.swap_odd(a));
        assert!(c.swap_odd(c));
    }

    #[test]
    fn derivative_raises_degree_and_is_nilpotent() {
        let b = Generator::matrix("B", 2, 0, Kind::Field);
        let db = b.derived().unwrap();
        assert_eq!(db.grading(), Grading::new(3, 0));
        assert!(db.derived().is_none());
        let h = Generator::matrix("H", 5, 5, Kind::Transport);
        assert_eq!(h.grading(), Grading::ZERO);
        assert!(h.derived().is_none());
    }

    #[test]
    fn canonical_order_is_kind_then_name_then_level() {
        let a = Generator::matrix("Z", 1, 0, Kind::Field);
        let b = Generator::matrix("A", 0, 1, Kind::Ghost);
        assert!(a < b);
        let x = Generator::matrix("B", 2, 0, Kind::Field);
        assert!(x < x.derived().unwrap());
    }

    #[test]
    fn dot_prefactor_for_ghost_then_form() {
        // c · A = (-1)^{gh c deg A} c ∧ A
        assert!(dot_to_wedge_odd(&[Grading::new(0, 1), Grading::new(1, 0)]));
        assert!(!dot_to_wedge_odd(&[Grading::new(1, 0), Grading::new(0, 1)]));
    }
}
