use serde::{Deserialize, Serialize};

use crate::expr::GExpr;
use crate::sexpr;

pub const REPORT_SCHEMA: &str = "bf-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A documented failure that was reproduced.
    ExpectedFailure,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Report {
    pub schema: String,
    pub identity: String,
    pub dimension: u32,
    pub status: Status,
    pub residual_expression: String,
    pub residual_terms: usize,
    pub cancellation_trace: Vec<String>,
}

impl Report {
    /// Pass iff `residual` is empty.
    pub fn from_residual(identity: &str, n: u32, residual: &GExpr, trace: Vec<String>) -> Self {
        Report {
            schema: REPORT_SCHEMA.to_string(),
            identity: identity.to_string(),
            dimension: n,
            status: if residual.is_zero() { Status::Pass } else { Status::Fail },
            residual_expression: sexpr::to_sexpr(residual),
            residual_terms: residual.len(),
            cancellation_trace: trace,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}
