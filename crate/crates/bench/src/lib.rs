//! Shared fixtures for the benchmarks.

use almab_core::seed::derive_seed;

/// Deterministic points in the unit square.
pub fn unit_square_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n as u64)
        .map(|i| {
            let a = derive_seed(seed, &[i, 0]) as f64 / u64::MAX as f64;
            let b = derive_seed(seed, &[i, 1]) as f64 / u64::MAX as f64;
            vec![a, b]
        })
        .collect()
}

/// A smooth test response.
pub fn response(x: &[f64]) -> f64 {
    (3.0 * x[0]).sin() + (2.0 * x[1]).cos()
}
