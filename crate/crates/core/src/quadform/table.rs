//! The coefficients `G`, `F`, `𝓕` behind the 2D level analysis and the
//! analytic tail bounds of both dimensions.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::hermite::{ln_factorial, Dim};

/// `G(j,k) = (j+k)! / (2^{j+k-1/2} √(j! k!) ((j+k)/2)!)` for `j+k` even, else 0.
pub fn g_func(j: usize, k: usize) -> f64 {
    let s = j + k;
    if s % 2 == 1 {
        return 0.0;
    }
    let ln = ln_factorial(s)
        - (s as f64 - 0.5) * LN_2
        - 0.5 * (ln_factorial(j) + ln_factorial(k))
        - ln_factorial(s / 2);
    ln.exp()
}

/// `F(m,j,k) = G(j,k) G(m−j, m−k)` for `0 ≤ j, k ≤ m`.
pub fn f_func(m: usize, j: usize, k: usize) -> f64 {
    assert!(j <= m && k <= m, "indices must not exceed the level");
    g_func(j, k) * g_func(m - j, m - k)
}

/// `𝓕(m,j) = Σ_{k ∈ [0,m], j+k even} F(m,j,k)`.
pub fn f_script(m: usize, j: usize) -> f64 {
    assert!(j <= m, "index must not exceed the level");
    (0..=m).filter(|k| (j + k) % 2 == 0).map(|k| f_func(m, j, k)).sum()
}

/// Whether `value` reads as `published` at three decimal places, either
/// rounded or truncated.
pub fn matches_three_decimals(value: f64, published: f64) -> bool {
    let target = (published * 1000.0).round();
    (value * 1000.0).round() == target || (value * 1000.0).floor() == target
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub m: usize,
    pub j: usize,
    pub value: f64,
}

/// `𝓕(m,j)` for `m_min ≤ m ≤ m_max` and all `0 ≤ j ≤ m`.
pub fn f_table(m_min: usize, m_max: usize) -> Vec<TableRow> {
    (m_min..=m_max)
        .flat_map(|m| (0..=m).map(move |j| TableRow { m, j, value: f_script(m, j) }))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub dim: usize,
    pub index: usize,
    pub value: f64,
    /// 1D: the lower bound on `Q(h_j)` is positive. 2D: the upper bound on `𝓕(m,·)` is below 1.
    pub certifies: bool,
}

/// 1D: `Q(h_j) ≥ √(3π)(1 − 3√3/(√2 √(3j+1)))`.
/// 2D: `𝓕(m,j) ≤ 2 [ (1/√(3m+4) + 1/(2√(3m+1))) (3m+2)^{-1/2}
/// ((2√(3m+1)+1)/3 + χ_{m even}/√(1.5m+1)) ]^{1/2}` for every `j`.
pub fn tail_bound(dim: Dim, index: usize) -> TailBound {
    let x = index as f64;
    match dim {
        Dim::One => {
            let value = (3.0 * PI).sqrt() * (1.0 - 3.0 * 3f64.sqrt() / (2f64.sqrt() * (3.0 * x + 1.0).sqrt()));
            TailBound { dim: 1, index, value, certifies: value > 0.0 }
        }
        Dim::Two => {
            let even = if index % 2 == 0 { 1.0 / (1.5 * x + 1.0).sqrt() } else { 0.0 };
            let first = 1.0 / (3.0 * x + 4.0).sqrt() + 0.5 / (3.0 * x + 1.0).sqrt();
            let second = ((2.0 * (3.0 * x + 1.0).sqrt() + 1.0) / 3.0 + even) / (3.0 * x + 2.0).sqrt();
            let value = 2.0 * (first * second).sqrt();
            TailBound { dim: 2, index, value, certifies: value < 1.0 }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::wang_diagonal;

    const TABLE: [(usize, [f64; 7]); 4] = [
        (3, [0.841, 0.591, 0.591, 0.841, 0.0, 0.0, 0.0]),
        (4, [0.785, 0.5, 0.664, 0.5, 0.785, 0.0, 0.0]),
        (5, [0.718, 0.492, 0.573, 0.573, 0.492, 0.718, 0.0]),
        (6, [0.673, 0.454, 0.563, 0.495, 0.563, 0.454, 0.673]),
    ];

    #[test]
    fn table_values_at_three_decimals() {
        for (m, row) in TABLE {
            for j in 0..=m {
                let v = f_script(m, j);
                assert!(matches_three_decimals(v, row[j]), "F({m},{j}) = {v}");
            }
        }
        assert_eq!(f_table(3, 6).len(), 22);
    }

    #[test]
    fn small_level_closed_forms() {
        // G(0,0) = √2, G(1,1) = √2/2, G(0,2) = 1/2, G(2,2) = 3√2/8, G(1,3) = √3/4, G(3,3) = 5√2/16
        let r2 = 2f64.sqrt();
        assert!((g_func(0, 0) - r2).abs() < 1e-15);
        assert!((g_func(1, 1) - r2 / 2.0).abs() < 1e-15);
        assert!((g_func(0, 2) - 0.5).abs() < 1e-15);
        assert!((g_func(2, 2) - 3.0 * r2 / 8.0).abs() < 1e-15);
        assert!((g_func(1, 3) - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((g_func(3, 3) - 5.0 * r2 / 16.0).abs() < 1e-15);
        // 𝓕(3,0) = G(0,0)G(3,3) + G(0,2)G(3,1)
        assert!((f_script(3, 0) - (5.0 + 3f64.sqrt()) / 8.0).abs() < 1e-14);
    }

    #[test]
    fn f_symmetries() {
        for m in 0..12 {
            for j in 0..=m {
                for k in 0..=m {
                    let f = f_func(m, j, k);
                    assert!((f - f_func(m, k, j)).abs() < 1e-15);
                    assert!((f - f_func(m, m - j, m - k)).abs() < 1e-15);
                    if (j + k) % 2 == 1 {
                        assert_eq!(f, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_f_matches_wang_products() {
        // Q(h_{j,m-j}) = π(1 − F(m,j,j)) = π − 4 W_j W_{m-j}
        for m in 1..15 {
            for j in 0..=m {
                let lhs = PI * f_func(m, j, j);
                let rhs = 4.0 * wang_diagonal(j) * wang_diagonal(m - j);
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn bounds() {
        let b5 = tail_bound(Dim::One, 5);
        assert!(b5.certifies);
        let expected = (3.0 * PI).sqrt() * (1.0 - 3.0 * 3f64.sqrt() / (2f64.sqrt() * 4.0));
        assert!((b5.value - expected).abs() < 1e-14);
        assert!(!tail_bound(Dim::One, 4).certifies);
        assert!(tail_bound(Dim::One, 3).value < 0.0);
        assert!(!tail_bound(Dim::Two, 6).certifies);
        for m in 7..200 {
            let b = tail_bound(Dim::Two, m);
            assert!(b.certifies, "m = {m}: {}", b.value);
            for j in 0..=m.min(40) {
                assert!(f_script(m, j) <= b.value);
            }
        }
    }
}
