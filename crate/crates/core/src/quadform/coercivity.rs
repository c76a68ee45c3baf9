//! Gram matrix of `Q` over the real basis `{h_α} ∪ {i h_α}` and the
//! coercivity certificate on the complement of the kernel directions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::{form_coefficients, tail_bound, time_phase_integral, QuadForm};
use crate::error::{Error, Result};
use crate::gaussian::gaussian_datum;
use crate::hermite::{overlap_table, Dim, SpectralState};

const KERNEL_TOL: f64 = 1e-8;
const CONSISTENCY_TOL: f64 = 1e-9;

/// `Q` as a real symmetric matrix. The real and imaginary parts of the
/// coefficients do not couple, so the matrix is stored as the two diagonal
/// blocks `xx` (acting on `Re c`) and `yy` (acting on `Im c`).
#[derive(Clone, Debug)]
pub struct QuadFormMatrix {
    dim: Dim,
    cutoff: usize,
    levels: Vec<usize>,
    xx: DMatrix<f64>,
    yy: DMatrix<f64>,
    kernel_basis: Vec<DVector<f64>>,
}

impl QuadFormMatrix {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.levels.len()
    }

    /// Size of the full real matrix, twice the number of modes.
    pub fn size(&self) -> usize {
        2 * self.modes()
    }

    /// Level of each real basis vector.
    pub fn level_of(&self, r: usize) -> usize {
        self.levels[r % self.modes()]
    }

    pub fn real_block(&self) -> &DMatrix<f64> {
        &self.xx
    }

    pub fn imag_block(&self) -> &DMatrix<f64> {
        &self.yy
    }

    /// The kernel directions as unit vectors `(Re c, Im c)`.
    pub fn kernel_basis(&self) -> &[DVector<f64>] {
        &self.kernel_basis
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let n = self.modes();
        match (r < n, c < n) {
            (true, true) => self.xx[(r, c)],
            (false, false) => self.yy[(r - n, c - n)],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size(), self.size(), |r, c| self.entry(r, c))
    }

    /// `vᵀ M v` with `v = (Re c, Im c)`.
    pub fn quadratic(&self, state: &SpectralState) -> Result<f64> {
        if state.dim() != self.dim || state.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch("state does not match the Gram matrix".into()));
        }
        let x = DVector::from_iterator(self.modes(), state.coeffs().iter().map(|c| c.re));
        let y = DVector::from_iterator(self.modes(), state.coeffs().iter().map(|c| c.im));
        Ok(x.dot(&(&self.xx * &x)) + y.dot(&(&self.yy * &y)))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.modes();
        let mut worst: f64 = 0.0;
        for block in [&self.xx, &self.yy] {
            for r in 0..n {
                for c in r + 1..n {
                    worst = worst.max((block[(r, c)] - block[(c, r)]).abs());
                }
            }
        }
        worst
    }

    /// Largest entry between basis vectors of different levels.
    pub fn max_off_level(&self) -> f64 {
        let n = self.modes();
        let mut worst: f64 = 0.0;
        for block in [&self.xx, &self.yy] {
            for r in 0..n {
                for c in 0..n {
                    if self.levels[r] != self.levels[c] {
                        worst = worst.max(block[(r, c)].abs());
                    }
                }
            }
        }
        worst
    }

    pub fn norm(&self) -> f64 {
        self.xx.abs().max().max(self.yy.abs().max())
    }
}

fn to_real_vector(state: &SpectralState) -> DVector<f64> {
    let n = state.coeffs().len();
    DVector::from_fn(2 * n, |r, _| {
        let c = state.coeffs()[r % n];
        if r < n {
            c.re
        } else {
            c.im
        }
    })
}

/// `G_0, iG_0, x_j G_0, i x_j G_0, |x|² G_0, i|x|² G_0`, each of unit mass.
pub fn kernel_directions(dim: Dim, cutoff: usize) -> Result<Vec<SpectralState>> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("kernel directions need cutoff ≥ 2".into()));
    }
    let g0 = gaussian_datum(dim, cutoff);
    let mut real = vec![g0.clone()];
    let mut r2 = SpectralState::zeros(dim, cutoff);
    for axis in 0..dim.n() {
        let xg = g0.times_coordinate(axis)?.resized(cutoff);
        r2 = r2.add(&xg.times_coordinate(axis)?.resized(cutoff))?;
        real.push(xg);
    }
    real.push(r2);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(2 * real.len());
    for v in real {
        let unit = v.scaled(Complex64::new(1.0 / v.mass().sqrt(), 0.0));
        out.push(unit.scaled(i));
        out.push(unit);
        let n = out.len();
        out.swap(n - 2, n - 1);
    }
    Ok(out)
}

fn test_vectors(dim: Dim, cutoff: usize) -> Vec<SpectralState> {
    let modes = SpectralState::zeros(dim, cutoff).coeffs().len();
    (1..=3)
        .map(|s| {
            let coeffs = (0..modes)
                .map(|k| {
                    let t = (k + 1) as f64 * s as f64;
                    Complex64::new((1.3 * t).sin(), (0.7 * t + 0.4).cos()) / (1.0 + 0.05 * k as f64)
                })
                .collect();
            SpectralState::from_coeffs(dim, cutoff, coeffs).expect("sizes agree")
        })
        .collect()
}

/// Assembles the Gram matrix of `Q` from the closed time integrals and the
/// overlap table, and checks it against the independent evaluator
/// [`QuadForm::eval`] on deterministic test vectors.
pub fn gram_matrix(dim: Dim, cutoff: usize) -> Result<QuadFormMatrix> {
    if cutoff < 4 {
        return Err(Error::InvalidArgument("Gram matrix needs cutoff ≥ 4".into()));
    }
    let fc = form_coefficients(dim);
    let norm = SpectralState::basis_norm_sq(dim);
    let table = overlap_table(fc.weight, cutoff)?;
    let m1 = cutoff + 1;
    let template = SpectralState::zeros(dim, cutoff);
    let indices = template.indices();
    let levels = template.levels();
    let n = indices.len();
    let overlap = |a: usize, b: usize| -> f64 {
        match dim {
            Dim::One => table[a * m1 + b],
            Dim::Two => {
                let (a1, a2) = (a / m1, a % m1);
                let (b1, b2) = (b / m1, b % m1);
                table[a1 * m1 + b1] * table[a2 * m1 + b2]
            }
        }
    };
    let mut xx = DMatrix::zeros(n, n);
    let mut yy = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let o = overlap(a, b);
            let (la, lb) = (levels[a] as i64, levels[b] as i64);
            let w = time_phase_integral(la - lb) * o;
            let v = time_phase_integral(la + lb) * o;
            let diag = if a == b { fc.c_q * norm } else { 0.0 };
            let rank = if a == 0 && b == 0 { fc.rank_one * norm } else { 0.0 };
            let ex = diag + rank - fc.modulus * w - fc.square * v;
            let ey = diag - fc.modulus * w + fc.square * v;
            xx[(a, b)] = ex;
            xx[(b, a)] = ex;
            yy[(a, b)] = ey;
            yy[(b, a)] = ey;
        }
    }
    let kernel_basis = kernel_directions(dim, cutoff)?.iter().map(to_real_vector).collect();
    let matrix = QuadFormMatrix { dim, cutoff, levels, xx, yy, kernel_basis };

    let form = QuadForm::new(dim, cutoff)?;
    for (index, v) in test_vectors(dim, cutoff).iter().enumerate() {
        let direct = form.eval(v)?;
        let via_matrix = matrix.quadratic(v)?;
        let residual = (direct - via_matrix).abs();
        let tol = CONSISTENCY_TOL * v.mass().max(1.0);
        if residual > tol {
            return Err(Error::SelfConsistency(format!(
                "test vector {index}: matrix gives {via_matrix}, direct evaluation {direct}"
            )));
        }
    }
    Ok(matrix)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelMinimum {
    /// Levels of 𝓗 in the block (levels 0 and 2 share the kernel direction `|x|²G_0`).
    pub levels: Vec<usize>,
    /// `"real"` or `"imag"` part of the coefficients.
    pub part: String,
    pub dimension: usize,
    pub kernel_rank: usize,
    /// Smallest eigenvalue on the complement of the kernel, per unit mass; `None` if the block lies in the kernel.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub dim: usize,
    pub cutoff: usize,
    pub c_min: f64,
    pub kernel_residuals: Vec<f64>,
    pub tail_index: usize,
    /// Analytic lower bound of `Q/‖φ‖²` on the levels just beyond the cutoff.
    pub tail_lower_bound: f64,
    /// Smallest eigenvalue of the undeflated matrix, per unit mass.
    pub psd_min: f64,
    pub max_asymmetry: f64,
    pub max_off_level: f64,
    pub blocks: Vec<LevelMinimum>,
    pub certified: bool,
}

fn smallest_eigenvalue(m: DMatrix<f64>) -> Result<f64> {
    let size = m.nrows();
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000).ok_or(Error::EigenNonConvergence { size })?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Orthonormalizes `vectors` by modified Gram–Schmidt, dropping those whose
/// remaining norm is below `1e-14`.
fn orthonormalize(vectors: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for mut v in vectors {
        for u in &out {
            let d = u.dot(&v);
            v -= u * d;
        }
        let n = v.norm();
        if n > 1e-14 {
            out.push(v / n);
        }
    }
    out
}

/// First index from which the analytic tail bound certifies positivity.
fn first_certified_index(dim: Dim) -> usize {
    let start = match dim {
        Dim::One => 1,
        Dim::Two => 1,
    };
    let mut idx = start;
    let mut run_start = None;
    // the bounds are monotone beyond a few indices; scan a generous window
    while idx < 10_000 {
        if tail_bound(dim, idx).certifies {
            run_start.get_or_insert(idx);
        } else {
            run_start = None;
        }
        idx += 1;
    }
    run_start.unwrap_or(usize::MAX)
}

/// Smallest eigenvalue of `Q` per unit mass on the complement of the kernel
/// directions, computed block by block over complete levels `≤ cutoff`, plus
/// the analytic tail bound for higher levels.
pub fn coercivity_certificate(dim: Dim, cutoff: usize) -> Result<CoercivityReport> {
    if cutoff < 8 {
        return Err(Error::InvalidArgument("coercivity certificate needs cutoff ≥ 8".into()));
    }
    let matrix = gram_matrix(dim, cutoff)?;
    let norm = SpectralState::basis_norm_sq(dim);

    let mut kernel_residuals = Vec::new();
    for (index, v) in kernel_directions(dim, cutoff)?.iter().enumerate() {
        let residual = matrix.quadratic(v)?.abs();
        if residual > KERNEL_TOL {
            return Err(Error::KernelResidual { index, residual, tol: KERNEL_TOL });
        }
        kernel_residuals.push(residual);
    }

    let mut groups: Vec<Vec<usize>> = vec![vec![0, 2], vec![1]];
    groups.extend((3..=cutoff).map(|m| vec![m]));

    let n = matrix.modes();
    let mut blocks = Vec::new();
    let mut c_min = f64::INFINITY;
    let mut psd_min = f64::INFINITY;
    for group in &groups {
        let idx: Vec<usize> = (0..n).filter(|&a| group.contains(&matrix.levels[a])).collect();
        for (part, block, offset) in [("real", &matrix.xx, 0), ("imag", &matrix.yy, n)] {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| block[(idx[r], idx[c])]);
            let restricted: Vec<DVector<f64>> = matrix
                .kernel_basis
                .iter()
                .map(|k| DVector::from_fn(idx.len(), |r, _| k[offset + idx[r]]))
                .filter(|k| k.norm() > 1e-12)
                .collect();
            let kernel = orthonormalize(restricted);
            psd_min = psd_min.min(smallest_eigenvalue(sub.clone())? / norm);
            let value = if kernel.len() >= idx.len() {
                None
            } else {
                let dimn = idx.len();
                let mut proj = DMatrix::<f64>::identity(dimn, dimn);
                let mut kkt = DMatrix::<f64>::zeros(dimn, dimn);
                for k in &kernel {
                    let outer = k * k.transpose();
                    proj -= &outer;
                    kkt += outer;
                }
                let shift = 1.0 + 2.0 * dimn as f64 * sub.abs().max();
                let deflated = &proj * &sub * &proj + kkt * shift;
                let v = smallest_eigenvalue(deflated)? / norm;
                c_min = c_min.min(v);
                Some(v)
            };
            blocks.push(LevelMinimum {
                levels: group.clone(),
                part: part.into(),
                dimension: idx.len(),
                kernel_rank: kernel.len(),
                value,
            });
        }
    }

    let tail_index = first_certified_index(dim);
    let beyond = tail_bound(dim, cutoff + 1);
    let tail_lower_bound = match dim {
        Dim::One => beyond.value / norm,
        Dim::Two => 1.0 - beyond.value,
    };
    let certified = c_min > 0.0 && cutoff + 1 >= tail_index && tail_lower_bound > 0.0;
    Ok(CoercivityReport {
        dim: dim.n(),
        cutoff,
        c_min,
        kernel_residuals,
        tail_index,
        tail_lower_bound,
        psd_min,
        max_asymmetry: matrix.max_asymmetry(),
        max_off_level: matrix.max_off_level(),
        blocks,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::EigenIndex;
    use crate::quadform::q_eval;
    use std::f64::consts::PI;

    #[test]
    fn kernel_directions_are_in_the_kernel() {
        for dim in [Dim::One, Dim::Two] {
            let dirs = kernel_directions(dim, 6).unwrap();
            assert_eq!(dirs.len(), 2 * (dim.n() + 2));
            for v in &dirs {
                assert!((v.mass() - 1.0).abs() < 1e-14);
                assert!(q_eval(v).unwrap().abs() < 1e-8);
            }
        }
        assert!(kernel_directions(Dim::One, 1).is_err());
    }

    #[test]
    fn square_radius_gaussian_coefficients() {
        // y² h_0 = h_0/2 + h_2/√2
        let dirs = kernel_directions(Dim::One, 4).unwrap();
        let r2 = &dirs[4];
        let ratio = r2.coeffs()[2].re / r2.coeffs()[0].re;
        assert!((ratio - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gram_matrix_entries() {
        let m = gram_matrix(Dim::One, 12).unwrap();
        let n = m.modes();
        assert_eq!(m.entry(3, 4), 0.0);
        for j in 1..n {
            assert_eq!(m.entry(j, n + j), 0.0);
        }
        assert!(m.max_asymmetry() < 1e-12);
        let h3 = SpectralState::unit(EigenIndex::One(3), 12).unwrap();
        assert!((m.quadratic(&h3).unwrap() - 2.0 * PI.sqrt() / (3.0 * 3f64.sqrt())).abs() < 1e-12);
        let dense = m.to_dense();
        assert_eq!(dense.nrows(), 26);
        assert!((dense.clone() - dense.transpose()).abs().max() < 1e-12);

        let m2 = gram_matrix(Dim::Two, 8).unwrap();
        assert!(m2.max_off_level() <= 1e-10);
        assert!(m2.max_asymmetry() < 1e-12);
        assert!(gram_matrix(Dim::One, 3).is_err());
    }

    #[test]
    fn one_dimensional_certificate() {
        let r = coercivity_certificate(Dim::One, 64).unwrap();
        assert!((r.c_min - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-6, "{}", r.c_min);
        assert_eq!(r.tail_index, 5);
        assert!(r.certified);
        assert!(r.psd_min >= -1e-8);
        assert!(r.kernel_residuals.iter().all(|&k| k <= 1e-8));
    }

    #[test]
    fn two_dimensional_certificate() {
        let r = coercivity_certificate(Dim::Two, 12).unwrap();
        assert!(r.c_min > 0.0);
        assert_eq!(r.tail_index, 7);
        assert!(r.certified);
        assert!(r.max_off_level <= 1e-10);
        // level 2 complement: |α−β|²/4 and |γ|²/2 against masses 2π and π
        let level2 = r.blocks.iter().find(|b| b.levels == vec![0, 2] && b.part == "real").unwrap();
        assert!((level2.value.unwrap() - 0.5).abs() < 1e-12);
    }
}
