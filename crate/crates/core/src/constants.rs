//! The constants `C_S`, `D_1`, `D_2` with independent numerical routes.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{lens_gaussian, DuhamelSolver};
use crate::hermite::{alpha_coefficient, gauss_hermite_rule, ln_factorial, CompositeRule, Dim, HermiteGrid};
use crate::integrate::simpson_doubling;

/// Best constant of the linear Strichartz inequality: `1/√3` (N=1), `1/2` (N=2).
pub fn strichartz_constant(dim: Dim) -> f64 {
    match dim {
        Dim::One => 1.0 / 3f64.sqrt(),
        Dim::Two => 0.5,
    }
}

/// `∬_{(-π/2,π/2)×ℝ^N} |G̃|^{2+4/N}` by Gauss–Legendre in τ and a rescaled
/// Gauss–Hermite rule in `y`.
pub fn strichartz_crosscheck(dim: Dim) -> Result<f64> {
    let p = dim.strichartz_exponent();
    let rule = gauss_hermite_rule(6)?;
    // |G̃|^p ∝ e^{-p|y|²/2}: the scale √(p/2) makes each coordinate e^{-z²}.
    let grid = HermiteGrid::scaled(dim, 0, &rule, (p / 2.0).sqrt());
    let times = CompositeRule::new(-FRAC_PI_2, FRAC_PI_2, 4, 4)?;
    let mut total = 0.0;
    for (&tau, &wt) in times.nodes.iter().zip(&times.weights) {
        let vals: Vec<f64> = (0..grid.len()).map(|i| lens_gaussian(tau, &grid.point(i)).norm().powf(p)).collect();
        total += wt * grid.integrate(&vals)?;
    }
    Ok(total)
}

/// `(2k)!/(k 9^k (k!)²)`.
fn d1_term(k: usize) -> f64 {
    (ln_factorial(2 * k) - 2.0 * ln_factorial(k) - k as f64 * 9f64.ln()).exp() / k as f64
}

/// `Σ_{k=1}^{terms} (2k)!/(k 9^k (k!)²)`.
pub fn d1_inner_sum(terms: usize) -> f64 {
    // sum smallest terms first
    (1..=terms).rev().map(d1_term).sum()
}

/// Partial sum `D_1 ≈ (1/π) Σ_{k=1}^{terms} (2k)!/(k 9^k (k!)²)`.
pub fn d1_series(terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidArgument("d1_series needs at least one term".into()));
    }
    Ok(d1_inner_sum(terms) / PI)
}

/// `D_1 = (6/π) Σ_{j=1}^{terms} α_{2j}² / (2j)` from the Hermite coefficients of `e^{-5y²/2}`.
pub fn d1_spectral(terms: usize) -> f64 {
    let s: f64 = (1..=terms).rev().map(|j| alpha_coefficient(j).powi(2) / (2 * j) as f64).sum();
    6.0 / PI * s
}

/// `D_2 = ln(4/3) / (2π)`.
pub fn d2_closed() -> f64 {
    (4.0f64 / 3.0).ln() / (2.0 * PI)
}

/// `Re ∫ |G|² Ḡ r dx` at time `t` in 2D:
/// `-(1/16π²)(ln(1+t²) + 2 ln 3 − ln(9+25t²))/(1+t²)`.
pub fn d2_integrand(t: f64) -> f64 {
    let t2 = t * t;
    -((9.0 * (1.0 + t2) / (9.0 + 25.0 * t2)).ln()) / (16.0 * PI * PI * (1.0 + t2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub t_max: f64,
    pub tail: f64,
    pub tail_bound: f64,
    pub intervals: usize,
}

/// Coefficient of `T^{-3}` bounding the tail error of `D_2 = 4 ∫ d2_integrand`.
/// Beyond `T`, `ln(9(1+t²)/(9+25t²)) = ln(9/25) + e(t)` with `0 ≤ e(t) ≤ 16/(25t²)`.
const D2_TAIL_COEFF: f64 = 4.0 * 2.0 * 8.0 / (75.0 * 16.0 * PI * PI);

/// `D_2 = 4 ∫_ℝ d2_integrand(t) dt` with Simpson doubling in `τ = atan t` on
/// `|t| ≤ t_max` and an analytic tail estimate beyond.
pub fn d2_integral(t_max: f64, tol: f64) -> Result<IntegralEstimate> {
    if !(t_max > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("t_max and tol must be positive".into()));
    }
    let tail_bound = D2_TAIL_COEFF / t_max.powi(3);
    if tail_bound > 0.5 * tol {
        let required = (D2_TAIL_COEFF / (0.5 * tol)).cbrt();
        return Err(Error::TailTooLarge { tol, t_max, required });
    }
    // dt/(1+t²) = dτ, so the τ-integrand is smooth up to the endpoint.
    let g = |tau: f64| {
        let t2 = tau.tan().powi(2);
        -8.0 * (9.0 * (1.0 + t2) / (9.0 + 25.0 * t2)).ln() / (16.0 * PI * PI)
    };
    let inner = simpson_doubling(g, 0.0, t_max.atan(), 0.5 * tol, 30)?;
    // midpoint of the bracket ln(9/25) ≤ ln(...) ≤ ln(9/25) + 16/(25t²)
    let tail_core = (9.0f64 / 25.0).ln() * (1.0 / t_max).atan();
    let tail = -8.0 * tail_core / (16.0 * PI * PI) - tail_bound;
    Ok(IntegralEstimate { value: inner.value + tail, t_max, tail, tail_bound, intervals: inner.intervals })
}

/// `∫_ℝ ln(c0 + c1 t²)/(1+t²) dt`, closed form `2π ln(√c0 + √c1)`.
pub fn log_rational_closed(c0: f64, c1: f64) -> f64 {
    2.0 * PI * (c0.sqrt() + c1.sqrt()).ln()
}

/// Numerical route for `∫_ℝ ln(c0 + c1 t²)/(1+t²) dt`: Simpson doubling in
/// `τ = atan t` on `|t| ≤ t_max`, and for `|t| > t_max` the substitution
/// `s = 1/t` followed by term-wise integration of the convergent series of
/// `(ln(c1 + c0 s²) − 2 ln s)/(1+s²)` on `[0, 1/t_max]`.
pub fn log_rational_integral(c0: f64, c1: f64, t_max: f64, tol: f64) -> Result<IntegralEstimate> {
    if !(c0 > 0.0 && c1 > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidArgument("coefficients and t_max must be positive".into()));
    }
    let a = 1.0 / t_max;
    let ratio = c0 / c1;
    if ratio * a * a >= 0.5 {
        let required = (2.0 * ratio).sqrt();
        return Err(Error::TailTooLarge { tol, t_max, required });
    }
    let g = |tau: f64| (c0 + c1 * tau.tan().powi(2)).ln();
    let inner = simpson_doubling(g, 0.0, t_max.atan(), 0.25 * tol, 30)?;

    // (1+s²)^{-1} = Σ (-1)^k s^{2k};  ln(c1 + c0 s²) = ln c1 + Σ_{j≥1} (-1)^{j+1} (ratio s²)^j / j
    let mut tail = 0.0;
    let mut log_coeffs = vec![c1.ln()];
    let mut n = 0usize;
    loop {
        if n > 0 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            log_coeffs.push(sign * ratio.powi(n as i32) / n as f64);
        }
        // coefficient of s^{2n} in ln(c1 + c0 s²)/(1+s²)
        let c: f64 = (0..=n)
            .map(|j| log_coeffs[j] * if (n - j) % 2 == 0 { 1.0 } else { -1.0 })
            .sum();
        let k = (2 * n + 1) as f64;
        let pow = a.powi(2 * n as i32 + 1);
        let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
        // ∫_0^a s^{2n} ds and ∫_0^a -2 ln s (-1)^n s^{2n} ds
        let term = c * pow / k - 2.0 * alt * (pow * a.ln() / k - pow / (k * k));
        tail += term;
        n += 1;
        if term.abs() < 1e-18 || n > 400 {
            break;
        }
    }
    Ok(IntegralEstimate {
        value: 2.0 * (inner.value + tail),
        t_max,
        tail: 2.0 * tail,
        tail_bound: 0.0,
        intervals: inner.intervals,
    })
}

/// `D_N = (2+4/N)/π · Σ_{m_α ≥ 1} a_α² / m_α` with `a_α` the projected
/// coefficients of `e^{-(1/2+2/N)|y|²}`.
pub fn d_n_spectral(solver: &DuhamelSolver) -> f64 {
    let dim = solver.dim();
    let amp = crate::gaussian::source_amplitude(dim);
    let levels = solver.source().levels();
    let s: f64 = solver
        .source()
        .coeffs()
        .iter()
        .zip(levels)
        .filter(|(_, m)| *m >= 1)
        .map(|(c, m)| (c.re / amp).powi(2) / m as f64)
        .sum();
    dim.strichartz_exponent() / PI * s
}

/// `D_N = (2+4/N) Re ∬ |G̃|^{4/N} conj(G̃) r̃ dy dτ` with `r̃` from the numerical
/// Duhamel route and composite Gauss–Legendre panels in τ.
pub fn d_n_duhamel(dim: Dim, cutoff: usize, tau_panels: usize) -> Result<f64> {
    let solver = DuhamelSolver::new(dim, cutoff)?;
    d_n_duhamel_with(&solver, tau_panels)
}

pub fn d_n_duhamel_with(solver: &DuhamelSolver, tau_panels: usize) -> Result<f64> {
    if tau_panels == 0 {
        return Err(Error::InvalidArgument("need at least one τ panel".into()));
    }
    let dim = solver.dim();
    let n = dim.f();
    // |G̃|^{4/N} conj(G̃) = π^{-1-N/4} e^{iNτ/2} e^{-b|y|²}; its coefficients
    // are the (real) source coefficients.
    let profile = solver.source();
    let norm = crate::hermite::SpectralState::basis_norm_sq(dim);
    let times = CompositeRule::new(-FRAC_PI_2, FRAC_PI_2, tau_panels, 4)?;
    let mut total = 0.0;
    for (&tau, &w) in times.nodes.iter().zip(&times.weights) {
        let r = solver.at(tau)?;
        let pairing: Complex64 = profile.coeffs().iter().zip(r.coeffs()).map(|(a, b)| a * b).sum();
        let v = Complex64::from_polar(1.0, n * tau / 2.0) * pairing * norm;
        total += w * v.re;
    }
    Ok(dim.strichartz_exponent() * total)
}

/// Cross-checked constant.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantReport {
    pub name: String,
    pub dim: usize,
    pub closed_form_value: f64,
    pub series_value: Option<f64>,
    pub series_terms: Option<usize>,
    pub quadrature_value: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl ConstantReport {
    pub fn pass(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

pub fn constant_reports(dim: Dim, terms: usize, tol: f64) -> Result<Vec<ConstantReport>> {
    let mut out = Vec::new();
    let cs = strichartz_constant(dim);
    let cs_q = strichartz_crosscheck(dim)?;
    out.push(ConstantReport {
        name: "C_S".into(),
        dim: dim.n(),
        closed_form_value: cs,
        series_value: None,
        series_terms: None,
        quadrature_value: cs_q,
        discrepancy: (cs - cs_q).abs(),
        tolerance: 1e-10,
    });
    match dim {
        Dim::One => {
            let series = d1_series(terms)?;
            let spectral = d1_spectral(terms);
            let duhamel = d_n_duhamel(dim, 96, 64)?;
            out.push(ConstantReport {
                name: "D_1".into(),
                dim: 1,
                closed_form_value: spectral,
                series_value: Some(series),
                series_terms: Some(terms),
                quadrature_value: duhamel,
                discrepancy: (series - duhamel).abs().max((series - spectral).abs()),
                tolerance: tol.max(1e-6),
            });
        }
        Dim::Two => {
            let closed = d2_closed();
            let integral = d2_integral(1e3, tol.min(1e-8))?;
            let duhamel = d_n_duhamel(dim, 64, 64)?;
            out.push(ConstantReport {
                name: "D_2".into(),
                dim: 2,
                closed_form_value: closed,
                series_value: Some(integral.value),
                series_terms: None,
                quadrature_value: duhamel,
                discrepancy: (closed - duhamel).abs().max((closed - integral.value).abs()),
                tolerance: tol.max(1e-6),
            });
        }
    }
    Ok(out)
}

/// `2π ln 2` and `6π ln 2`, the values of the two logarithmic integrals.
pub fn log_identity_values() -> (f64, f64) {
    (2.0 * PI * LN_2, 6.0 * PI * LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn strichartz_values() {
        assert_relative_eq!(strichartz_constant(Dim::One), 0.577_350_269_189_625_8, max_relative = 1e-15);
        assert_eq!(strichartz_constant(Dim::Two), 0.5);
        for dim in [Dim::One, Dim::Two] {
            let q = strichartz_crosscheck(dim).unwrap();
            assert!((q - strichartz_constant(dim)).abs() < 1e-12);
        }
        // π · π^{-3/2} · √(π/3)
        let closed = PI * PI.powf(-1.5) * (PI / 3.0).sqrt();
        assert!((closed - strichartz_constant(Dim::One)).abs() < 1e-15);
    }

    #[test]
    fn d1_first_term_and_limit() {
        assert_relative_eq!(d1_series(1).unwrap(), 2.0 / (9.0 * PI), max_relative = 1e-14);
        assert!((d1_inner_sum(200) - 0.2724).abs() < 5e-5);
        assert!((d1_series(200).unwrap() - 0.0867).abs() < 5e-5);
        assert!((d1_series(400).unwrap() - d1_series(200).unwrap()).abs() < 1e-12);
        assert!(d1_series(0).is_err());
        // closed form of the inner sum: Σ_{k≥1} C(2k,k) x^k / k = 2 ln(2/(1+√(1-4x))), x = 1/9
        let x: f64 = 1.0 / 9.0;
        let exact = 2.0 * (2.0 / (1.0 + (1.0 - 4.0 * x).sqrt())).ln();
        assert!((d1_inner_sum(200) - exact).abs() < 1e-14);
    }

    #[test]
    fn d1_series_is_monotone_with_geometric_tail() {
        let mut prev = 0.0;
        for k in 1..30 {
            let s = d1_series(k).unwrap();
            assert!(s > prev);
            prev = s;
        }
        for k in 2..60 {
            assert!(d1_term(k + 1) / d1_term(k) <= 4.0 / 9.0 + 1e-15);
        }
    }

    #[test]
    fn d1_spectral_matches_series() {
        // j = 1 term: (6/π)(2/27)/2 = 2/(9π)
        assert_relative_eq!(d1_spectral(1), 2.0 / (9.0 * PI), max_relative = 1e-14);
        assert!((d1_spectral(100) - d1_series(100).unwrap()).abs() < 1e-13);
        assert!((d1_spectral(100) - 0.0867).abs() < 5e-5);
    }

    #[test]
    fn d2_closed_and_integral() {
        assert!((d2_closed() - 0.0458).abs() < 5e-5);
        let est = d2_integral(1e3, 1e-9).unwrap();
        assert!((est.value - d2_closed()).abs() < 1e-8, "{} vs {}", est.value, d2_closed());
        let err = d2_integral(10.0, 1e-8).unwrap_err();
        match err {
            Error::TailTooLarge { required, .. } => assert!(required > 10.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn d2_integrand_tail_behaviour() {
        let t: f64 = 1e4;
        let v = d2_integrand(t) * t * t;
        assert!((v + (9.0f64 / 25.0).ln() / (16.0 * PI * PI)).abs() < 1e-8);
    }

    #[test]
    fn logarithmic_identities() {
        let (a, b) = log_identity_values();
        let ia = log_rational_integral(1.0, 1.0, 4.0, 1e-10).unwrap();
        let ib = log_rational_integral(9.0, 25.0, 4.0, 1e-10).unwrap();
        assert!((ia.value - a).abs() < 1e-8, "{} vs {a}", ia.value);
        assert!((ib.value - b).abs() < 1e-8, "{} vs {b}", ib.value);
        assert_relative_eq!(log_rational_closed(9.0, 25.0), b, max_relative = 1e-14);
    }

    #[test]
    fn duhamel_routes() {
        let d1 = d_n_duhamel(Dim::One, 96, 64).unwrap();
        assert!((d1 - d1_series(200).unwrap()).abs() < 1e-6, "{d1}");
        let solver = DuhamelSolver::new(Dim::One, 96).unwrap();
        assert!((d_n_spectral(&solver) - d1_series(200).unwrap()).abs() < 1e-9);
        let d2 = d_n_duhamel(Dim::Two, 64, 64).unwrap();
        assert!((d2 - d2_closed()).abs() < 1e-6, "{d2}");
    }
}
