//! One-dimensional quadrature helpers: composite Simpson on uniform samples
//! and a doubling Simpson scheme for smooth integrands.

use crate::error::{Error, Result};

/// Composite Simpson rule for samples `values[i] = f(a + i h)`.
/// Requires an odd number of samples (even number of intervals).
pub fn simpson_uniform(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson rule needs an odd number of samples >= 3, got {n}"
        )));
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even))
}

/// Result of a doubling Simpson integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpsonEstimate {
    pub value: f64,
    pub intervals: usize,
    /// `|S_n - S_{n/2}|` at the last refinement.
    pub change: f64,
}

/// Doubling composite Simpson on `[a, b]` until successive estimates differ by
/// less than `tol / 2`. Function values are reused between levels.
pub fn simpson_doubling<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_levels: usize,
) -> Result<SimpsonEstimate> {
    let mut n = 2usize;
    let mut h = (b - a) / n as f64;
    let ends = f(a) + f(b);
    let mut evens = 0.0;
    let mut odds = f(a + h);
    let mut prev = h / 3.0 * (ends + 4.0 * odds);
    let mut change = f64::INFINITY;
    for _ in 0..max_levels {
        n *= 2;
        h *= 0.5;
        evens += odds;
        odds = (0..n / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let cur = h / 3.0 * (ends + 4.0 * odds + 2.0 * evens);
        change = (cur - prev).abs();
        if change < 0.5 * tol && n >= 16 {
            return Ok(SimpsonEstimate { value: cur, intervals: n, change });
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence { tol, levels: max_levels, change })
}
