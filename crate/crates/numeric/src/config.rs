use serde::{Deserialize, Serialize};

/// Numerical tolerances and resolutions shared by all evaluations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Tolerances {
    /// First and last curve sample must agree to this distance.
    pub closure: f64,
    /// Bound on `‖dA + A∧A‖` (and `‖d_A B‖`) when a connection is flagged.
    pub flatness: f64,
    /// RK4 steps over the whole loop.
    pub transport_steps: usize,
    /// Gauss–Legendre points per panel and simplex dimension.
    pub gauss_points: usize,
    /// Panels of `[0, 1]` for each nested quadrature.
    pub panels: usize,
    /// Framing offset as a fraction of the curve diameter.
    pub framing_fraction: f64,
    /// Forward-difference step for deformation fields.
    pub deformation_step: f64,
    /// Central-difference step for curvature checks.
    pub derivative_step: f64,
    /// Grid size per strand of the linking integral.
    pub linking_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            closure: 1e-12,
            flatness: 1e-8,
            transport_steps: 2048,
            gauss_points: 32,
            panels: 4,
            framing_fraction: 0.05,
            deformation_step: 1e-4,
            derivative_step: 1e-5,
            linking_grid: 512,
        }
    }
}
