//! Exact-integer checks of the central binomial bound and the counting
//! inequality used for the 2D level estimate.

use num_bigint::BigUint;
use serde::Serialize;

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralBinomialRow {
    pub m: u64,
    /// `C(2m,m)² (3m+1)`.
    pub lhs_squared: String,
    /// `16^m`.
    pub rhs_squared: String,
    pub holds: bool,
    pub equality: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralBinomialReport {
    pub m_max: u64,
    pub rows: Vec<CentralBinomialRow>,
    pub all_hold: bool,
    pub equality_at: Vec<u64>,
}

/// `C(2m,m) ≤ 4^m / √(3m+1)` for `1 ≤ m ≤ m_max`, compared as
/// `C(2m,m)² (3m+1) ≤ 16^m`.
pub fn central_binomial_bound_check(m_max: u64) -> CentralBinomialReport {
    let rows: Vec<CentralBinomialRow> = (1..=m_max)
        .map(|m| {
            let c = binomial(2 * m, m);
            let lhs = &c * &c * (3 * m + 1);
            let rhs = BigUint::from(16u32).pow(m as u32);
            CentralBinomialRow {
                m,
                holds: lhs <= rhs,
                equality: lhs == rhs,
                lhs_squared: lhs.to_string(),
                rhs_squared: rhs.to_string(),
            }
        })
        .collect();
    CentralBinomialReport {
        m_max,
        all_hold: rows.iter().all(|r| r.holds),
        equality_at: rows.iter().filter(|r| r.equality).map(|r| r.m).collect(),
        rows,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinatoricsRow {
    pub m: u64,
    pub j: u64,
    /// `Σ_{k ≤ m, j+k even} C(j+k, j) C(2m−j−k, m−j)`.
    pub sum: String,
    /// `C(2m+1, m+1) + C(2m, m)`, to be compared with twice the sum.
    pub rhs_doubled: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinatoricsReport {
    pub m_max: u64,
    pub rows: Vec<CombinatoricsRow>,
    pub all_hold: bool,
}

/// `2 Σ_{k ≡ j (mod 2)} C(j+k, j) C(2m−j−k, m−j) ≤ C(2m+1, m+1) + C(2m, m)`
/// for all `0 ≤ j ≤ m ≤ m_max`.
pub fn combinatorics_check(m_max: u64) -> CombinatoricsReport {
    let mut rows = Vec::new();
    for m in 0..=m_max {
        let rhs = binomial(2 * m + 1, m + 1) + binomial(2 * m, m);
        for j in 0..=m {
            let sum: BigUint = (0..=m)
                .filter(|k| (j + k) % 2 == 0)
                .map(|k| binomial(j + k, j) * binomial(2 * m - j - k, m - j))
                .sum();
            let holds = &sum * 2u32 <= rhs;
            rows.push(CombinatoricsRow { m, j, sum: sum.to_string(), rhs_doubled: rhs.to_string(), holds });
        }
    }
    CombinatoricsReport { m_max, all_hold: rows.iter().all(|r| r.holds), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 1), BigUint::from(2u32));
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 5), BigUint::from(0u32));
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn central_bound_with_equality_at_one() {
        let r = central_binomial_bound_check(25);
        assert!(r.all_hold);
        assert_eq!(r.equality_at, vec![1]);
        assert_eq!(r.rows[0].lhs_squared, "16");
    }

    #[test]
    fn counting_inequality() {
        let r = combinatorics_check(25);
        assert!(r.all_hold);
        let first = r.rows.iter().find(|row| row.m == 1 && row.j == 0).unwrap();
        // sum 2 against (3 + 2)/2
        assert_eq!(first.sum, "2");
        assert_eq!(first.rhs_doubled, "5");
    }
}
