//! The quadratic form `Q` of the second variation of the Strichartz deficit at
//! the Gaussian, written in the harmonic frame.
//!
//! For `φ = Σ c_α h_α` with levels `m_α`,
//!
//! ```text
//! Q(φ) = c_Q ‖φ‖² + K_1 (Re ∫ G_0 φ)²
//!        − K_2 Σ_{α,β} T(m_α − m_β) O_{αβ} Re(c̄_α c_β)
//!        − K_3 Σ_{α,β} T(m_α + m_β) O_{αβ} Re(c_α c_β)
//! ```
//!
//! where `O_{αβ} = ∫ e^{-(2/N)|y|²} h_α h_β`, `T` is [`time_phase_integral`],
//! `c_Q = C_S (N+2)/N`, `K_1 = 4 C_S (N+2)/N²`, `K_2 = (N+2)²/(N² π)` and
//! `K_3 = 2(N+2)/(N² π)`.

mod coercivity;
mod combinatorics;
mod table;

pub use coercivity::{
    coercivity_certificate, gram_matrix, kernel_directions, CoercivityReport, LevelMinimum, QuadFormMatrix,
};
pub use combinatorics::{
    binomial, central_binomial_bound_check, combinatorics_check, CentralBinomialRow, CombinatoricsReport,
    CombinatoricsRow, CentralBinomialReport,
};
pub use table::{f_func, f_script, f_table, g_func, matches_three_decimals, tail_bound, TableRow, TailBound};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::strichartz_constant;
use crate::error::{Error, Result};
use crate::hermite::{
    gauss_hermite_rule, hermite_functions_into, wang_diagonal, Dim, EigenIndex, HermiteGrid, SpectralState,
};

/// `∫_{-π/2}^{π/2} e^{imτ} dτ`: `π` for `m = 0`, `2 sin(mπ/2)/m` otherwise.
pub fn time_phase_integral(m: i64) -> f64 {
    if m == 0 {
        PI
    } else if m % 2 == 0 {
        0.0
    } else {
        let sign = if m.rem_euclid(4) == 1 { 1.0 } else { -1.0 };
        2.0 * sign / m as f64
    }
}

/// Coefficients of the quadratic form in dimension `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormCoefficients {
    pub c_q: f64,
    pub rank_one: f64,
    pub modulus: f64,
    pub square: f64,
    /// Exponent `a = 2/N` of the weight `e^{-a|y|²}` per coordinate.
    pub weight: f64,
}

pub fn form_coefficients(dim: Dim) -> FormCoefficients {
    let n = dim.f();
    let cs = strichartz_constant(dim);
    FormCoefficients {
        c_q: cs * (n + 2.0) / n,
        rank_one: 4.0 * cs * (n + 2.0) / (n * n),
        modulus: (n + 2.0).powi(2) / (n * n * PI),
        square: 2.0 * (n + 2.0) / (n * n * PI),
        weight: 2.0 / n,
    }
}

fn overlap_1d(a: f64, j: usize, k: usize) -> Result<f64> {
    if (j + k) % 2 == 1 {
        return Ok(0.0);
    }
    let rule = gauss_hermite_rule((j + k) / 2 + 2)?;
    let scale = (a + 1.0).sqrt();
    let mut hj = vec![0.0; j.max(k) + 1];
    let mut total = 0.0;
    for (&z, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let y = z / scale;
        hermite_functions_into(y, &mut hj);
        total += w / scale * (-a * y * y).exp() * hj[j] * hj[k];
    }
    Ok(total)
}

/// `∫ e^{-a|y|²} h_j h_k dy` by a Gauss–Hermite rule rescaled to be exact for
/// the integrand; a parity zero is returned as exactly `0.0`.
pub fn overlap_integral(a: f64, j: EigenIndex, k: EigenIndex) -> Result<f64> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("overlap weight exponent must exceed -1, got {a}")));
    }
    match (j, k) {
        (EigenIndex::One(j), EigenIndex::One(k)) => overlap_1d(a, j, k),
        (EigenIndex::Two(j1, j2), EigenIndex::Two(k1, k2)) => {
            let first = overlap_1d(a, j1, k1)?;
            if first == 0.0 {
                return Ok(0.0);
            }
            Ok(first * overlap_1d(a, j2, k2)?)
        }
        _ => Err(Error::DimensionMismatch("overlap between indices of different dimensions".into())),
    }
}

/// Evaluator for `Q` at a fixed dimension and cutoff.
///
/// The spatial integrals are done on a Gauss–Hermite grid rescaled by
/// `√(1 + 2/N)`, exact for the band-limited integrands; the time integrals
/// reduce to [`time_phase_integral`] between level components.
#[derive(Clone, Debug)]
pub struct QuadForm {
    dim: Dim,
    cutoff: usize,
    coeffs: FormCoefficients,
    /// Hermite functions at the 1D grid points, row `s` holds `h_0..h_cutoff`.
    basis: Vec<f64>,
    /// Quadrature weight times `e^{-a|y|²}` at each tensor grid point.
    weights: Vec<f64>,
    order: usize,
}

impl QuadForm {
    pub fn new(dim: Dim, cutoff: usize) -> Result<QuadForm> {
        let coeffs = form_coefficients(dim);
        let order = cutoff + 2;
        let rule = gauss_hermite_rule(order)?;
        let grid = HermiteGrid::scaled(dim, cutoff, &rule, (coeffs.weight + 1.0).sqrt());
        let m = cutoff + 1;
        let mut basis = vec![0.0; order * m];
        for (s, &y) in grid.points().iter().enumerate() {
            hermite_functions_into(y, &mut basis[s * m..(s + 1) * m]);
        }
        let weights = grid
            .tensor_weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let r2: f64 = grid.point(i).iter().map(|y| y * y).sum();
                w * (-coeffs.weight * r2).exp()
            })
            .collect();
        Ok(QuadForm { dim, cutoff, coeffs, basis, weights, order })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coefficients(&self) -> FormCoefficients {
        self.coeffs
    }

    /// Samples of each level component `ψ_m` of `φ` on the grid.
    fn level_components(&self, phi: &SpectralState) -> Vec<Vec<Complex64>> {
        let m1 = self.cutoff + 1;
        let q = self.order;
        let zero = Complex64::new(0.0, 0.0);
        match self.dim {
            Dim::One => (0..m1)
                .map(|n| {
                    let c = phi.coeffs()[n];
                    (0..q).map(|s| c * self.basis[s * m1 + n]).collect()
                })
                .collect(),
            Dim::Two => {
                let levels = 2 * self.cutoff + 1;
                let mut out = vec![vec![zero; q * q]; levels];
                for j in 0..m1 {
                    for k in 0..m1 {
                        let c = phi.coeffs()[j * m1 + k];
                        if c == zero {
                            continue;
                        }
                        let psi = &mut out[j + k];
                        for s in 0..q {
                            let a = c * self.basis[s * m1 + j];
                            for t in 0..q {
                                psi[s * q + t] += a * self.basis[t * m1 + k];
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn eval(&self, phi: &SpectralState) -> Result<f64> {
        if phi.dim() != self.dim || phi.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch(format!(
                "state (dim {}, cutoff {}) for a form of (dim {}, cutoff {})",
                phi.dim().n(),
                phi.cutoff(),
                self.dim.n(),
                self.cutoff
            )));
        }
        let fc = self.coeffs;
        let norm = SpectralState::basis_norm_sq(self.dim);
        // Re ∫ G_0 φ = π^{N/4} Re c_0 since G_0 = π^{-N/4} h_0.
        let g0_pairing = norm.sqrt() * phi.coeffs()[0].re;
        let mut q = fc.c_q * phi.mass() + fc.rank_one * g0_pairing * g0_pairing;

        let psi = self.level_components(phi);
        let active: Vec<usize> = (0..psi.len()).filter(|&m| psi[m].iter().any(|c| c.norm_sqr() > 0.0)).collect();
        let mut modulus = 0.0;
        let mut square = 0.0;
        for (ia, &m) in active.iter().enumerate() {
            for &mp in &active[ia..] {
                let diff = time_phase_integral(m as i64 - mp as i64);
                let sum = time_phase_integral((m + mp) as i64);
                if diff == 0.0 && sum == 0.0 {
                    continue;
                }
                let mult = if m == mp { 1.0 } else { 2.0 };
                let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for ((w, x), y) in self.weights.iter().zip(&psi[m]).zip(&psi[mp]) {
                    a += x.conj() * y * *w;
                    b += x * y * *w;
                }
                modulus += mult * diff * a.re;
                square += mult * sum * b.re;
            }
        }
        q -= fc.modulus * modulus + fc.square * square;
        Ok(q)
    }

    /// `B(φ, ψ) = (Q(φ+ψ) − Q(φ−ψ))/4`.
    pub fn bilinear(&self, phi: &SpectralState, psi: &SpectralState) -> Result<f64> {
        Ok(0.25 * (self.eval(&phi.add(psi)?)? - self.eval(&phi.sub(psi)?)?))
    }
}

/// `Q(φ)` for a band-limited state.
pub fn q_eval(phi: &SpectralState) -> Result<f64> {
    QuadForm::new(phi.dim(), phi.cutoff())?.eval(phi)
}

/// `Q(h_j) = √(3π) − 9 ∫ e^{-2y²} h_j² dy` for `j ≥ 1` in 1D.
pub fn q_diag_1d(j: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidArgument("the h_0 sector is not diagonal".into()));
    }
    Ok((3.0 * PI).sqrt() - 9.0 * overlap_1d(2.0, j, j)?)
}

/// `Q(h_{jk}) = π − 4 W_j W_k` with `W_j = ∫ e^{-y²} h_j²`, for `j + k ≥ 1`.
pub fn q_diag_2d(j: usize, k: usize) -> Result<f64> {
    if j + k == 0 {
        return Err(Error::InvalidArgument("the h_00 sector is not diagonal".into()));
    }
    Ok(PI - 4.0 * wang_diagonal(j) * wang_diagonal(k))
}

/// `Q(α h_02 + β h_20 + γ h_11) = π(|α−β|²/4 + |γ|²/2)`.
pub fn q_level2_2d(alpha: Complex64, beta: Complex64, gamma: Complex64) -> f64 {
    PI * (0.25 * (alpha - beta).norm_sqr() + 0.5 * gamma.norm_sqr())
}

/// `C_S (‖φ‖²)^{1+2/N} − ∬_{(-π/2,π/2)×ℝ^N} |e^{-iτ𝓗/2} φ|^{2+4/N}`, the
/// Strichartz deficit of a band-limited datum. The τ integral uses the
/// π-periodicity of the spatial integral and a trapezoid rule with `tau_nodes`
/// nodes; the spatial integral uses a Gauss–Hermite grid exact for the
/// polynomial-times-Gaussian integrand.
pub fn strichartz_deficit(phi: &SpectralState, tau_nodes: usize) -> Result<f64> {
    let dim = phi.dim();
    let p = dim.strichartz_exponent();
    let half = p / 2.0;
    let c = phi.cutoff();
    let order = (half * c as f64).ceil() as usize + 2;
    let rule = gauss_hermite_rule(order)?;
    let grid = HermiteGrid::scaled(dim, c, &rule, half.sqrt());
    let dt = PI / tau_nodes as f64;
    let mut total = 0.0;
    for i in 0..tau_nodes {
        let tau = -0.5 * PI + i as f64 * dt;
        let v = crate::gaussian::harmonic_propagate(phi, tau);
        let samples = grid.synthesize(&v)?;
        let vals: Vec<f64> = samples.values.iter().map(|z| z.norm_sqr().powf(half)).collect();
        total += dt * grid.integrate(&vals)?;
    }
    Ok(strichartz_constant(dim) * phi.mass().powf(1.0 + 2.0 / dim.f()) - total)
}

/// Number of τ nodes making [`strichartz_deficit`] exact at a given cutoff.
pub fn deficit_tau_nodes(dim: Dim, cutoff: usize) -> usize {
    (dim.strichartz_exponent() / 2.0 * cutoff as f64) as usize + 4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::gaussian_datum;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(dim: Dim, cutoff: usize, rng: &mut ChaCha8Rng) -> SpectralState {
        let modes = match dim {
            Dim::One => cutoff + 1,
            Dim::Two => (cutoff + 1) * (cutoff + 1),
        };
        let coeffs = (0..modes).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = SpectralState::from_coeffs(dim, cutoff, coeffs).unwrap();
        let m = s.mass().sqrt();
        s.scaled(Complex64::new(1.0 / m, 0.0))
    }

    #[test]
    fn time_phase_values() {
        assert_eq!(time_phase_integral(0), PI);
        assert_eq!(time_phase_integral(-6), 0.0);
        assert_eq!(time_phase_integral(1), 2.0);
        assert_eq!(time_phase_integral(-1), 2.0);
        assert_eq!(time_phase_integral(3), -2.0 / 3.0);
        let gl = crate::hermite::CompositeRule::new(-PI / 2.0, PI / 2.0, 8, 8).unwrap();
        for m in -7i64..=7 {
            let v: f64 = gl.integrate(|t: f64| (m as f64 * t).cos());
            assert!((v - time_phase_integral(m)).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn overlap_values() {
        for j in 0..12 {
            let v = overlap_integral(1.0, EigenIndex::One(j), EigenIndex::One(j)).unwrap();
            assert_relative_eq!(v, wang_diagonal(j), max_relative = 1e-12);
        }
        let v = overlap_integral(2.0, EigenIndex::One(3), EigenIndex::One(3)).unwrap();
        assert_relative_eq!(v, 7.0 / 27.0 * (PI / 3.0).sqrt(), max_relative = 1e-13);
        assert_eq!(overlap_integral(0.7, EigenIndex::One(2), EigenIndex::One(5)).unwrap(), 0.0);
        assert_eq!(overlap_integral(0.7, EigenIndex::Two(1, 2), EigenIndex::Two(2, 2)).unwrap(), 0.0);
        assert!(overlap_integral(1.0, EigenIndex::One(0), EigenIndex::Two(0, 0)).is_err());
        let table = crate::hermite::overlap_table(2.0, 10).unwrap();
        for j in 0..=10 {
            for k in 0..=10 {
                let v = overlap_integral(2.0, EigenIndex::One(j), EigenIndex::One(k)).unwrap();
                assert!((v - table[j * 11 + k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_is_in_the_kernel() {
        for dim in [Dim::One, Dim::Two] {
            let g = gaussian_datum(dim, 6);
            assert!(q_eval(&g).unwrap().abs() < 1e-10);
            let ig = g.scaled(Complex64::new(0.0, 1.0));
            assert!(q_eval(&ig).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn explicit_one_dimensional_values() {
        let h3 = SpectralState::unit(EigenIndex::One(3), 8).unwrap();
        let h4 = SpectralState::unit(EigenIndex::One(4), 8).unwrap();
        let s3 = 3f64.sqrt();
        assert!((q_eval(&h3).unwrap() - 2.0 * PI.sqrt() / (3.0 * s3)).abs() < 1e-12);
        assert!((q_eval(&h4).unwrap() - 8.0 * PI.sqrt() / (9.0 * s3)).abs() < 1e-12);
        for j in 0..3 {
            let h = SpectralState::unit(EigenIndex::One(j), 8).unwrap();
            assert!(q_eval(&h).unwrap().abs() < 1e-12);
            assert!(q_eval(&h.scaled(Complex64::new(0.0, 1.0))).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_closed_forms_match() {
        let form = QuadForm::new(Dim::One, 24).unwrap();
        for j in 1..=24 {
            let h = SpectralState::unit(EigenIndex::One(j), 24).unwrap();
            assert!((form.eval(&h).unwrap() - q_diag_1d(j).unwrap()).abs() < 1e-10, "j = {j}");
        }
        let form = QuadForm::new(Dim::Two, 8).unwrap();
        for j in 0..=8 {
            for k in 0..=8 {
                if j + k == 0 {
                    continue;
                }
                let h = SpectralState::unit(EigenIndex::Two(j, k), 8).unwrap();
                assert!((form.eval(&h).unwrap() - q_diag_2d(j, k).unwrap()).abs() < 1e-10);
            }
        }
        assert!((q_diag_2d(1, 1).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!(q_diag_2d(1, 0).unwrap().abs() < 1e-14);
        assert!(q_diag_1d(10).unwrap() > 0.0);
        assert!(q_diag_1d(0).is_err());
        assert!(q_diag_2d(0, 0).is_err());
    }

    #[test]
    fn level_two_closed_form() {
        let form = QuadForm::new(Dim::Two, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a, b, c) = (z(), z(), z());
            let mut s = SpectralState::zeros(Dim::Two, 4);
            *s.coeff_mut(EigenIndex::Two(0, 2)).unwrap() = a;
            *s.coeff_mut(EigenIndex::Two(2, 0)).unwrap() = b;
            *s.coeff_mut(EigenIndex::Two(1, 1)).unwrap() = c;
            assert!((form.eval(&s).unwrap() - q_level2_2d(a, b, c)).abs() < 1e-10);
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(q_level2_2d(one, one, zero), 0.0);
        assert!((q_level2_2d(one, -one, zero) - PI).abs() < 1e-15);
        assert!((q_level2_2d(zero, zero, one) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonnegative_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (dim, cutoff) in [(Dim::One, 12), (Dim::Two, 6)] {
            let form = QuadForm::new(dim, cutoff).unwrap();
            for _ in 0..500 {
                let s = random_state(dim, cutoff, &mut rng);
                assert!(form.eval(&s).unwrap() >= -1e-8);
            }
        }
    }

    #[test]
    fn invariant_under_harmonic_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (dim, cutoff) in [(Dim::One, 10), (Dim::Two, 5)] {
            let form = QuadForm::new(dim, cutoff).unwrap();
            for _ in 0..5 {
                let s = random_state(dim, cutoff, &mut rng);
                let q = form.eval(&s).unwrap();
                for tau in [0.3, 1.0, PI / 2.0] {
                    // e^{-i(𝓗-N)τ/2}: level phases e^{-imτ}
                    let moved = crate::gaussian::level_rotation(&s, tau);
                    assert!((form.eval(&moved).unwrap() - q).abs() <= 1e-9 * q.abs().max(1e-3));
                }
            }
        }
    }

    #[test]
    fn stationarity_of_the_deficit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = Dim::One;
        let cutoff = 8;
        let nodes = deficit_tau_nodes(dim, cutoff);
        let g = gaussian_datum(dim, cutoff);
        let phi = random_state(dim, cutoff, &mut rng);
        let mut slopes = Vec::new();
        for eps in [1e-2, 1e-3] {
            let plus = strichartz_deficit(&g.add(&phi.scaled(Complex64::new(eps, 0.0))).unwrap(), nodes).unwrap();
            let minus = strichartz_deficit(&g.add(&phi.scaled(Complex64::new(-eps, 0.0))).unwrap(), nodes).unwrap();
            slopes.push(((plus - minus) / (2.0 * eps)).abs());
        }
        // the central difference of a function with zero gradient is O(ε²)
        assert!(slopes[0] < 1e-3);
        assert!(slopes[1] < slopes[0] * 0.02 + 1e-10);
    }

    #[test]
    fn deficit_expands_to_second_order() {
        let g = gaussian_datum(Dim::One, 8);
        let h3 = SpectralState::unit(EigenIndex::One(3), 8).unwrap();
        let nodes = deficit_tau_nodes(Dim::One, 8);
        let q = q_eval(&h3).unwrap();
        let eps: f64 = 1e-3;
        let d = strichartz_deficit(&g.add(&h3.scaled(Complex64::new(eps, 0.0))).unwrap(), nodes).unwrap();
        assert!((d / (eps * eps) - q).abs() < 1e-2 * q);
    }

    proptest! {
        #[test]
        fn scale_law(c in -3.0f64..3.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(Dim::One, 6, &mut rng);
            let form = QuadForm::new(Dim::One, 6).unwrap();
            let q = form.eval(&s).unwrap();
            let qc = form.eval(&s.scaled(Complex64::new(c, 0.0))).unwrap();
            prop_assert!((qc - c * c * q).abs() <= 1e-12 * (1.0 + q.abs()) * (1.0 + c * c));
        }
    }
}
