//! The normalized Gaussian, its linear evolution, the lens transform and the
//! first-order Duhamel remainder in the harmonic frame.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::{
    alpha_coefficient, gauss_hermite_rule, CompositeRule, Dim, HermiteGrid, SpectralState,
};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Panels and nodes per panel of the default Duhamel time quadrature.
pub const DUHAMEL_PANELS: usize = 64;
pub const DUHAMEL_NODES: usize = 4;

/// Relative sup-norm accuracy the source `|G̃|^{4/N} G̃` must be represented with.
pub const SOURCE_TOL: f64 = 1e-8;

/// `G_0 = π^{-N/4} e^{-|x|²/2} = π^{-N/4} h_0`.
pub fn gaussian_datum(dim: Dim, cutoff: usize) -> SpectralState {
    let mut s = SpectralState::zeros(dim, cutoff);
    s.coeffs_mut()[0] = Complex64::new(PI.powf(-dim.f() / 4.0), 0.0);
    s
}

/// `e^{-iΔτ 𝓗/2}`: multiplies each coefficient by `e^{-iλΔτ/2}`.
pub fn harmonic_propagate(state: &SpectralState, dtau: f64) -> SpectralState {
    let n = state.dim().n();
    state.map_levels(|m| Complex64::from_polar(1.0, -((2 * m + n) as f64) * dtau / 2.0))
}

/// `e^{-iτ(𝓗-N)/2}`, the level-only part of the propagator.
pub fn level_rotation(state: &SpectralState, tau: f64) -> SpectralState {
    state.map_levels(|m| Complex64::from_polar(1.0, -(m as f64) * tau))
}

/// Physical-frame point and amplitude factor attached to a lens-frame point.
#[derive(Clone, Debug, PartialEq)]
pub struct LensPoint {
    pub t: f64,
    pub x: Vec<f64>,
    /// `(Łu)(τ, y) = factor · u(t, x)`.
    pub factor: Complex64,
}

/// `t = tan τ`, `x = y / cos τ`, factor `cos^{-N/2}τ · e^{-i|y|² tan τ / 2}`.
pub fn lens_point_map(tau: f64, y: &[f64]) -> Result<LensPoint> {
    if !tau.is_finite() || tau.abs() >= FRAC_PI_2 {
        return Err(Error::LensDomain(tau));
    }
    let n = y.len();
    if n != 1 && n != 2 {
        return Err(Error::DimensionMismatch(format!("points must have dimension 1 or 2, got {n}")));
    }
    let (s, c) = tau.sin_cos();
    let t = s / c;
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let factor = Complex64::from_polar(c.powf(-(n as f64) / 2.0), -y2 * t / 2.0);
    Ok(LensPoint { t, x: y.iter().map(|v| v / c).collect(), factor })
}

/// Inverse of [`lens_point_map`]: returns `(τ, y, factor)` with
/// `u(t, x) = factor · (Łu)(τ, y)`.
pub fn inverse_lens_point(t: f64, x: &[f64]) -> Result<(f64, Vec<f64>, Complex64)> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument("time must be finite".into()));
    }
    let tau = t.atan();
    let c = tau.cos();
    let y: Vec<f64> = x.iter().map(|v| v * c).collect();
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let factor = Complex64::from_polar(c.powf(x.len() as f64 / 2.0), y2 * t / 2.0);
    Ok((tau, y, factor))
}

/// `G(t, x) = π^{-N/4} (1+it)^{-N/2} e^{-|x|²/(2(1+it))}`.
pub fn physical_gaussian(t: f64, x: &[f64]) -> Complex64 {
    let n = x.len() as f64;
    let z = Complex64::new(1.0, t);
    let x2: f64 = x.iter().map(|v| v * v).sum();
    PI.powf(-n / 4.0) * z.powf(-n / 2.0) * (-x2 / (2.0 * z)).exp()
}

/// `G̃(τ, y) = π^{-N/4} e^{-iNτ/2} e^{-|y|²/2}`.
pub fn lens_gaussian(tau: f64, y: &[f64]) -> Complex64 {
    let n = y.len() as f64;
    let y2: f64 = y.iter().map(|v| v * v).sum();
    Complex64::from_polar(PI.powf(-n / 4.0) * (-y2 / 2.0).exp(), -n * tau / 2.0)
}

/// Exponent `b` of the source profile `e^{-b|y|²}` with `b = 1/2 + 2/N`.
pub fn source_exponent(dim: Dim) -> f64 {
    0.5 + 2.0 / dim.f()
}

/// Amplitude `π^{-1-N/4}` of `|G̃|^{4/N} G̃ = π^{-1-N/4} e^{-iNτ/2} e^{-b|y|²}`.
pub fn source_amplitude(dim: Dim) -> f64 {
    PI.powf(-1.0 - dim.f() / 4.0)
}

/// Eigenbasis coefficients of the real profile `e^{-b|y|²}`, obtained by
/// projecting grid samples, together with the relative sup-norm error of the
/// truncated expansion on a check grid.
#[derive(Clone, Debug)]
pub struct SourceProfile {
    pub coeffs: SpectralState,
    pub residual: f64,
}

pub fn source_profile(dim: Dim, cutoff: usize) -> Result<SourceProfile> {
    let b = source_exponent(dim);
    let rule = gauss_hermite_rule(cutoff + 2)?;
    // e^{-b y²} h_k = e^{-(b+1/2) y²}·poly: a grid scaled by √(b+1/2) is exact.
    let grid = HermiteGrid::scaled(dim, cutoff, &rule, (b + 0.5).sqrt());
    let samples = grid.sample(|y| {
        let y2: f64 = y.iter().map(|v| v * v).sum();
        Complex64::new((-b * y2).exp(), 0.0)
    });
    let coeffs = grid.analyze(&samples)?;

    let check: Vec<f64> = (0..=80).map(|i| -6.0 + 0.15 * i as f64).collect();
    let axes: Vec<&[f64]> = vec![&check; dim.n()];
    let values = coeffs.evaluate_tensor(&axes)?;
    let mut residual: f64 = 0.0;
    for (idx, v) in values.iter().enumerate() {
        let y2 = match dim {
            Dim::One => check[idx].powi(2),
            Dim::Two => check[idx / check.len()].powi(2) + check[idx % check.len()].powi(2),
        };
        residual = residual.max((v.re - (-b * y2).exp()).abs().max(v.im.abs()));
    }
    Ok(SourceProfile { coeffs, residual })
}

/// Closed-form 1D remainder
/// `r̃ = (i/π^{5/4}) e^{-iτ/2} (τ α_0 h_0 − i Σ_{k≥1} (α_k/k)(1 − e^{-ikτ}) h_k)`.
pub fn duhamel_remainder_closed_1d(tau: f64, cutoff: usize) -> Result<SpectralState> {
    if tau.abs() > FRAC_PI_2 + 1e-15 {
        return Err(Error::LensDomain(tau));
    }
    let mut r = SpectralState::zeros(Dim::One, cutoff);
    let pre = I * PI.powf(-1.25) * Complex64::from_polar(1.0, -tau / 2.0);
    for k in (0..=cutoff).step_by(2) {
        let alpha = alpha_coefficient(k / 2);
        let inner = if k == 0 {
            Complex64::new(tau * alpha, 0.0)
        } else {
            -I * (alpha / k as f64) * (1.0 - Complex64::from_polar(1.0, -(k as f64) * tau))
        };
        r.coeffs_mut()[k] = pre * inner;
    }
    Ok(r)
}

/// Numerical Duhamel route for `r̃(τ) = i ∫_0^τ e^{-i(τ-σ)𝓗/2} (|G̃|^{4/N}G̃)(σ) dσ`.
///
/// The source is projected once; each evaluation integrates the time
/// kernel `e^{-i(τ-σ)λ/2} e^{-iNσ/2}` with composite Gauss–Legendre panels.
#[derive(Clone, Debug)]
pub struct DuhamelSolver {
    dim: Dim,
    cutoff: usize,
    source: SpectralState,
    panels: usize,
    nodes: usize,
    pub residual: f64,
}

impl DuhamelSolver {
    pub fn new(dim: Dim, cutoff: usize) -> Result<DuhamelSolver> {
        Self::with_panels(dim, cutoff, DUHAMEL_PANELS, DUHAMEL_NODES)
    }

    pub fn with_panels(dim: Dim, cutoff: usize, panels: usize, nodes: usize) -> Result<DuhamelSolver> {
        if cutoff < 4 {
            return Err(Error::InvalidArgument("Duhamel remainder needs cutoff >= 4".into()));
        }
        let profile = source_profile(dim, cutoff)?;
        if profile.residual > SOURCE_TOL {
            return Err(Error::UnderResolved { cutoff, residual: profile.residual, tol: SOURCE_TOL });
        }
        let source = profile.coeffs.scaled(Complex64::new(source_amplitude(dim), 0.0));
        Ok(DuhamelSolver { dim, cutoff, source, panels, nodes, residual: profile.residual })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Projected source coefficients `π^{-1-N/4} a_α` at `σ = 0`.
    pub fn source(&self) -> &SpectralState {
        &self.source
    }

    pub fn at(&self, tau: f64) -> Result<SpectralState> {
        if tau.abs() > FRAC_PI_2 + 1e-15 {
            return Err(Error::LensDomain(tau));
        }
        if tau == 0.0 {
            return Ok(SpectralState::zeros(self.dim, self.cutoff));
        }
        let rule = CompositeRule::new(0.0, tau, self.panels, self.nodes)?;
        let n = self.dim.f();
        let max_level = self.dim.n() * self.cutoff;
        let kernel: Vec<Complex64> = (0..=max_level)
            .map(|m| {
                let half_lambda = m as f64 + n / 2.0;
                let v: Complex64 = rule.integrate(|s| {
                    Complex64::from_polar(1.0, -(tau - s) * half_lambda - n * s / 2.0)
                });
                I * v
            })
            .collect();
        Ok(self.source.map_levels(|m| kernel[m]))
    }
}

/// `r̃(τ)` by the numerical Duhamel route.
pub fn duhamel_remainder(dim: Dim, tau: f64, cutoff: usize) -> Result<SpectralState> {
    DuhamelSolver::new(dim, cutoff)?.at(tau)
}
