//! BV structure of BF theory: fields, superfields, action, antibracket,
//! BV variation and a formal Laplacian.

mod bracket;
mod brst;
mod fields;
mod laplacian;
mod master;
mod report;
mod superfield;
mod variation;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub use bracket::{antibracket, left_derivative, right_derivative};
pub use brst::{brst_variation, BrstCheck};
pub use fields::{antifield_grading, FieldEntry, FieldTable};
pub use laplacian::{formal_laplacian, vol_generator};
pub use report::{Report, Status, REPORT_SCHEMA};
pub use superfield::SuperField;
pub use variation::Derivation;

use crate::error::Result;
use crate::expr::GExpr;
use crate::grading::Generator;

/// Dimension-`n` BV context with a flat background connection `A₀`.
#[derive(Debug)]
pub struct BVContext {
    table: FieldTable,
    action_cache: OnceLock<GExpr>,
    delta_cache: Mutex<HashMap<Generator, GExpr>>,
}

impl BVContext {
    pub fn new(n: u32) -> Result<Self> {
        Ok(BVContext { table: FieldTable::new(n)?, action_cache: OnceLock::new(), delta_cache: Mutex::new(HashMap::new()) })
    }

    pub fn n(&self) -> u32 {
        self.table.n()
    }

    pub fn table(&self) -> &FieldTable {
        &self.table
    }
}
