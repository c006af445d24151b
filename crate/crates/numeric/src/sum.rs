//! Deterministic summation.

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input.
pub fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise(&xs[..n / 2]) + pairwise(&xs[n / 2..]),
    }
}
