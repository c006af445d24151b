//! Field content of BF theory in dimension `n`: connection, B-field, ghost,
//! ghosts for ghosts and their antifields.

use crate::error::{CoreError, Result};
use crate::grading::{Generator, Grading, Kind};

/// A field together with its antifield.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldEntry {
    pub field: Generator,
    pub antifield: Generator,
}

/// The roster `A (1,0)`, `B (n-2,0)`, `c (0,1)`, `τ_k (n-2-k,k)` and the
/// partners `φ⁺` with `deg = n - deg φ`, `gh = -gh φ - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTable {
    n: u32,
    entries: Vec<FieldEntry>,
}

pub fn antifield_grading(n: u32, g: Grading) -> Grading {
    Grading::new(n as i32 - g.deg, -g.gh - 1)
}

impl FieldTable {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(CoreError::Argument(format!("dimension must be at least 3, got {n}")));
        }
        let ni = n as i32;
        let mut roster = vec![
            ("A", Grading::new(1, 0), Kind::Field),
            ("B", Grading::new(ni - 2, 0), Kind::Field),
            ("c", Grading::new(0, 1), Kind::Ghost),
        ];
        let taus: Vec<(String, Grading)> =
            (1..=ni - 2).map(|k| (format!("tau{k}"), Grading::new(ni - 2 - k, k))).collect();
        let mut entries = Vec::new();
        for (name, g, kind) in roster.drain(..) {
            entries.push(entry(n, name, g, kind));
        }
        for (name, g) in &taus {
            entries.push(entry(n, name, *g, Kind::Ghost));
        }
        Ok(FieldTable { n, entries })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[FieldEntry] {
        &self.entries
    }

    fn lookup(&self, name: &str) -> &FieldEntry {
        self.entries
            .iter()
            .find(|e| e.field.name() == name)
            .unwrap_or_else(|| panic!("no field {name} in table"))
    }

    pub fn a(&self) -> Generator {
        self.lookup("A").field.clone()
    }

    pub fn b(&self) -> Generator {
        self.lookup("B").field.clone()
    }

    pub fn c(&self) -> Generator {
        self.lookup("c").field.clone()
    }

    /// Ghost for ghosts `τ_k`, `1 <= k <= n-2`.
    pub fn tau(&self, k: u32) -> Generator {
        self.lookup(&format!("tau{k}")).field.clone()
    }

    pub fn plus(&self, field: &Generator) -> Generator {
        self.lookup(field.name()).antifield.clone()
    }

    /// The conjugate letter: antifield of a field or field of an antifield.
    /// Derivative level is not carried over.
    pub fn partner(&self, g: &Generator) -> Option<Generator> {
        self.entries.iter().find_map(|e| {
            if e.field.same_base(g) {
                Some(e.antifield.clone())
            } else if e.antifield.same_base(g) {
                Some(e.field.clone())
            } else {
                None
            }
        })
    }

    pub fn is_antifield(&self, g: &Generator) -> bool {
        g.kind() == Kind::Antifield && self.partner(g).is_some()
    }

    pub fn is_field(&self, g: &Generator) -> bool {
        matches!(g.kind(), Kind::Field | Kind::Ghost) && self.partner(g).is_some()
    }
}

fn entry(n: u32, name: &str, g: Grading, kind: Kind) -> FieldEntry {
    FieldEntry {
        field: Generator::new(name, g, kind, true),
        antifield: Generator::new(&format!("{name}+"), antifield_grading(n, g), Kind::Antifield, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_gradings() {
        let t = FieldTable::new(5).unwrap();
        assert_eq!(t.entries().len(), 3 + 3);
        assert_eq!(t.tau(2).grading(), Grading::new(1, 2));
        assert_eq!(t.plus(&t.c()).grading(), Grading::new(5, -2));
        assert_eq!(t.plus(&t.b()).grading(), Grading::new(2, -1));
        assert_eq!(t.partner(&t.plus(&t.a())).unwrap(), t.a());
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(FieldTable::new(2).is_err());
    }
}
