//! Orthogonality fixing: the residual map `Φ_δ`, its Jacobian at the reference
//! point and a damped Newton solve for the symmetry parameters.
//!
//! For parameters `(θ, ρ, ξ, x₀, t₀)` and a datum `f`,
//! `U_δ(x) = δG_0(x) − e^{iθ} ρ^{N/2} e^{ix·ξ} ũ_δ(t₀, ρx + x₀)` where `ũ_δ`
//! solves the nonlinear equation with data `δf`. The solution at time `t₀` is
//! obtained in the harmonic frame at `τ₀ = arctan t₀` and mapped back through
//! the lens transform.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::gaussian_datum;
use crate::hermite::{gauss_hermite_rule, default_order, Dim, HermiteGrid, QuadratureRule, SpectralState};
use crate::sim::{evolve_to, SimConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Parameters of the symmetry group action: phase, scale, Galilean velocity,
/// translation and time shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryParams {
    pub theta: f64,
    pub rho: f64,
    pub xi: Vec<f64>,
    pub x0: Vec<f64>,
    pub t0: f64,
}

impl SymmetryParams {
    /// `(θ, ρ, ξ, x₀, t₀) = (0, 1, 0, 0, 0)`.
    pub fn identity(dim: Dim) -> SymmetryParams {
        let n = dim.n();
        SymmetryParams { theta: 0.0, rho: 1.0, xi: vec![0.0; n], x0: vec![0.0; n], t0: 0.0 }
    }

    pub fn len(dim: Dim) -> usize {
        3 + 2 * dim.n()
    }

    /// Flattened in the order `θ, ρ, ξ, x₀, t₀`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.theta, self.rho];
        v.extend(&self.xi);
        v.extend(&self.x0);
        v.push(self.t0);
        v
    }

    pub fn from_slice(dim: Dim, v: &[f64]) -> Result<SymmetryParams> {
        let n = dim.n();
        if v.len() != Self::len(dim) {
            return Err(Error::DimensionMismatch(format!("expected {} parameters, got {}", Self::len(dim), v.len())));
        }
        Ok(SymmetryParams {
            theta: v[0],
            rho: v[1],
            xi: v[2..2 + n].to_vec(),
            x0: v[2 + n..2 + 2 * n].to_vec(),
            t0: v[2 + 2 * n],
        })
    }

    pub fn validate(&self, dim: Dim) -> Result<()> {
        let n = dim.n();
        if self.xi.len() != n || self.x0.len() != n {
            return Err(Error::DimensionMismatch(format!("ξ and x₀ must have {n} components")));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidArgument(format!("ρ must be positive, got {}", self.rho)));
        }
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(())
    }

    /// Largest componentwise difference.
    pub fn distance(&self, other: &SymmetryParams) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `f = α G_0 + φ` with `α = Re ∫ f G_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoDecomposition {
    pub alpha: f64,
    pub phi: SpectralState,
}

pub fn decompose_datum(f: &SpectralState) -> OrthoDecomposition {
    let g0 = gaussian_datum(f.dim(), f.cutoff());
    let alpha = f.pairing(&g0).expect("same shape").re;
    let phi = f.sub(&g0.scaled(Complex64::new(alpha, 0.0))).expect("same shape");
    OrthoDecomposition { alpha, phi }
}

/// The moments `∫ φ G_0`, `∫ φ |x|² G_0` and `∫ φ x_j G_0`, all without conjugation.
pub fn ortho_moments(phi: &SpectralState) -> Result<Vec<Complex64>> {
    let dim = phi.dim();
    let c = phi.cutoff();
    let g0 = gaussian_datum(dim, c);
    let mut weights = vec![g0.clone()];
    let mut r2 = SpectralState::zeros(dim, c);
    let mut linear = Vec::new();
    for axis in 0..dim.n() {
        let xg = g0.times_coordinate(axis)?.resized(c);
        r2 = r2.add(&xg.times_coordinate(axis)?.resized(c))?;
        linear.push(xg);
    }
    weights.push(r2);
    weights.extend(linear);
    weights.iter().map(|w| phi.pairing(w)).collect()
}

/// Numerical settings of the gauge solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeSettings {
    pub gamma: f64,
    /// Spectral cutoff of the nonlinear evolution.
    pub cutoff: usize,
    /// Strang steps from τ = 0 to τ₀.
    pub steps: usize,
    /// Gauss–Hermite order per dimension of the moment quadrature.
    pub moment_order: usize,
    /// Central-difference step of the Jacobian.
    pub fd_step: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Largest admissible mass fraction lost to, or carried by, the top quarter of the spectrum.
    pub leakage_limit: f64,
}

impl GaugeSettings {
    pub fn new(dim: Dim) -> GaugeSettings {
        GaugeSettings {
            gamma: 1.0,
            cutoff: match dim {
                Dim::One => 32,
                Dim::Two => 24,
            },
            steps: 64,
            moment_order: 64,
            fd_step: 1e-5,
            max_iterations: 30,
            max_halvings: 8,
            leakage_limit: 1e-6,
        }
    }
}

/// Result of [`Gauge::solve`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeFit {
    pub params: SymmetryParams,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// The map `Φ_δ` for a fixed `δ`, dimension and resolution.
#[derive(Clone, Debug)]
pub struct Gauge {
    dim: Dim,
    delta: f64,
    settings: GaugeSettings,
    rule: QuadratureRule,
}

impl Gauge {
    pub fn new(dim: Dim, delta: f64) -> Result<Gauge> {
        Self::with_settings(dim, delta, GaugeSettings::new(dim))
    }

    pub fn with_settings(dim: Dim, delta: f64, settings: GaugeSettings) -> Result<Gauge> {
        if !(delta > 0.0 && delta <= 0.3) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 0.3], got {delta}")));
        }
        if settings.cutoff < 16 {
            return Err(Error::InvalidArgument(format!("cutoff must be ≥ 16, got {}", settings.cutoff)));
        }
        if settings.steps == 0 || settings.moment_order < 8 {
            return Err(Error::InvalidArgument("need at least one step and a moment order ≥ 8".into()));
        }
        if !(settings.fd_step > 0.0 && settings.fd_step < 1e-2) {
            return Err(Error::FiniteDifference(format!("step {} outside (0, 1e-2)", settings.fd_step)));
        }
        let rule = gauss_hermite_rule(settings.moment_order)?;
        Ok(Gauge { dim, delta, settings, rule })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn settings(&self) -> &GaugeSettings {
        &self.settings
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.dim, self.delta, self.settings.gamma).with_resolution(self.settings.cutoff, 2)
    }

    /// `δ f` brought to the working cutoff, checking the truncated mass.
    fn scaled_datum(&self, f: &SpectralState) -> Result<SpectralState> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch("datum dimension differs from the gauge".into()));
        }
        let mass = f.mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument("datum must have positive finite mass".into()));
        }
        let g = f.resized(self.settings.cutoff);
        let lost = (mass - g.mass()).max(0.0) / mass;
        if lost > self.settings.leakage_limit {
            return Err(Error::Leakage { leakage: lost, limit: self.settings.leakage_limit });
        }
        Ok(g.scaled(Complex64::new(self.delta, 0.0)))
    }

    /// Harmonic-frame state at `τ₀ = arctan t₀` evolved from `δ f`.
    fn evolved(&self, f: &SpectralState, t0: f64) -> Result<(f64, SpectralState)> {
        let v0 = self.scaled_datum(f)?;
        let tau0 = t0.atan();
        let v = if t0 == 0.0 { v0 } else { evolve_to(&self.sim_config(), &v0, tau0, self.settings.steps)? };
        let leak = v.tail_fraction(0.75);
        if leak > self.settings.leakage_limit {
            return Err(Error::Leakage { leakage: leak, limit: self.settings.leakage_limit });
        }
        Ok((tau0, v))
    }

    /// `W(x) = e^{iθ} ρ^{N/2} e^{ix·ξ} ũ_δ(t₀, ρx + x₀)` on the tensor grid `axes`.
    fn transformed_values(&self, params: &SymmetryParams, f: &SpectralState, axes: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        params.validate(self.dim)?;
        let (tau0, v) = self.evolved(f, params.t0)?;
        let c = tau0.cos();
        let y_axes: Vec<Vec<f64>> = axes
            .iter()
            .enumerate()
            .map(|(j, xs)| xs.iter().map(|x| (params.rho * x + params.x0[j]) * c).collect())
            .collect();
        let refs: Vec<&[f64]> = y_axes.iter().map(Vec::as_slice).collect();
        let vals = v.evaluate_tensor(&refs)?;
        let amp = params.rho.powf(self.dim.f() / 2.0) * c.powf(self.dim.f() / 2.0);
        let global = Complex64::from_polar(amp, params.theta);
        let out = match self.dim {
            Dim::One => vals
                .iter()
                .enumerate()
                .map(|(i, u)| {
                    let (x, y) = (axes[0][i], y_axes[0][i]);
                    global * u * (I * (x * params.xi[0] + y * y * params.t0 / 2.0)).exp()
                })
                .collect(),
            Dim::Two => {
                let q1 = axes[1].len();
                vals.iter()
                    .enumerate()
                    .map(|(idx, u)| {
                        let (a, b) = (idx / q1, idx % q1);
                        let (ya, yb) = (y_axes[0][a], y_axes[1][b]);
                        let phase = axes[0][a] * params.xi[0]
                            + axes[1][b] * params.xi[1]
                            + (ya * ya + yb * yb) * params.t0 / 2.0;
                        global * u * (I * phase).exp()
                    })
                    .collect()
            }
        };
        Ok(out)
    }

    /// The `3 + 2N` residuals `Φ_δ(θ, Γ, f)`.
    pub fn residual(&self, params: &SymmetryParams, f: &SpectralState) -> Result<Vec<f64>> {
        let n = self.dim.n();
        // Rescaled nodes match the Gaussian decay of U·G_0, about e^{-(1+ρ²)|x|²/2}.
        let s = (2.0 / (1.0 + params.rho * params.rho)).sqrt();
        let xs: Vec<f64> = self.rule.nodes.iter().map(|z| s * z).collect();
        let ws: Vec<f64> = self.rule.scaled_weights.iter().map(|w| s * w).collect();
        let axes = vec![xs.clone(); n];
        let w = self.transformed_values(params, f, &axes)?;
        let g0_norm = PI.powf(-self.dim.f() / 4.0);
        let q = xs.len();
        let mut m_one = Complex64::new(0.0, 0.0);
        let mut m_r2 = Complex64::new(0.0, 0.0);
        let mut m_lin = vec![Complex64::new(0.0, 0.0); n];
        for (idx, wv) in w.iter().enumerate() {
            let point: Vec<f64> = match self.dim {
                Dim::One => vec![xs[idx]],
                Dim::Two => vec![xs[idx / q], xs[idx % q]],
            };
            let weight: f64 = match self.dim {
                Dim::One => ws[idx],
                Dim::Two => ws[idx / q] * ws[idx % q],
            };
            let r2: f64 = point.iter().map(|x| x * x).sum();
            let g0 = g0_norm * (-r2 / 2.0).exp();
            let u = self.delta * g0 - wv;
            let base = u * (weight * g0);
            m_one += base;
            m_r2 += base * (r2 - self.dim.f() / 2.0);
            for (m, x) in m_lin.iter_mut().zip(&point) {
                *m += base * *x;
            }
        }
        let d = self.delta;
        let mut out = vec![m_one.im / d, m_r2.re / d];
        out.extend(m_lin.iter().map(|m| m.im / d));
        out.extend(m_lin.iter().map(|m| m.re / d));
        out.push(m_r2.im / d);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { step: 0 });
        }
        Ok(out)
    }

    /// Central-difference Jacobian in the parameters; columns are computed in parallel.
    pub fn jacobian(&self, params: &SymmetryParams, f: &SpectralState) -> Result<DMatrix<f64>> {
        let p = params.to_vec();
        let k = p.len();
        let h = self.settings.fd_step;
        if params.rho <= h {
            return Err(Error::FiniteDifference(format!("ρ = {} too close to zero for step {h}", params.rho)));
        }
        let columns: Vec<Result<Vec<f64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..k)
                .map(|j| {
                    let p = &p;
                    scope.spawn(move || -> Result<Vec<f64>> {
                        let mut plus = p.clone();
                        let mut minus = p.clone();
                        plus[j] += h;
                        minus[j] -= h;
                        let rp = self.residual(&SymmetryParams::from_slice(self.dim, &plus)?, f)?;
                        let rm = self.residual(&SymmetryParams::from_slice(self.dim, &minus)?, f)?;
                        Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
                    })
                })
                .collect();
            handles.into_iter().map(|t| t.join().expect("worker panicked")).collect()
        });
        let mut jac = DMatrix::zeros(k, k);
        for (j, col) in columns.into_iter().enumerate() {
            let col = col?;
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::FiniteDifference(format!("non-finite derivative in column {j}")));
            }
            for (i, v) in col.into_iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        Ok(jac)
    }

    /// Damped Newton iteration from the identity until `‖Φ_δ‖₂ ≤ tol`.
    pub fn solve(&self, f: &SpectralState, tol: f64) -> Result<GaugeFit> {
        let mut params = SymmetryParams::identity(self.dim);
        let mut residual = self.residual(&params, f)?;
        let mut norm = l2(&residual);
        for iteration in 0..=self.settings.max_iterations {
            if norm <= tol {
                return Ok(GaugeFit { params, residual, residual_norm: norm, iterations: iteration });
            }
            if iteration == self.settings.max_iterations {
                break;
            }
            let jac = self.jacobian(&params, f)?;
            let step = newton_step(jac, &residual)?;
            let current = params.to_vec();
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..=self.settings.max_halvings {
                let trial: Vec<f64> = current.iter().zip(&step).map(|(p, s)| p - scale * s).collect();
                let candidate = SymmetryParams::from_slice(self.dim, &trial)?;
                if candidate.rho > 0.0 {
                    if let Ok(r) = self.residual(&candidate, f) {
                        let n = l2(&r);
                        if n < norm {
                            accepted = Some((candidate, r, n));
                            break;
                        }
                    }
                }
                scale /= 2.0;
            }
            match accepted {
                Some((p, r, n)) => {
                    params = p;
                    residual = r;
                    norm = n;
                }
                None => break,
            }
        }
        Err(Error::NewtonNonConvergence { iterations: self.settings.max_iterations, residual: norm })
    }

    /// `e^{iθ} Γ(ũ_δ)|_{t=0} / δ` projected onto the eigenbasis at `cutoff`.
    pub fn transformed_datum(&self, params: &SymmetryParams, f: &SpectralState, cutoff: usize) -> Result<SpectralState> {
        let rule = gauss_hermite_rule(default_order(cutoff))?;
        let grid = HermiteGrid::new(self.dim, cutoff, &rule);
        let axes = vec![grid.points().to_vec(); self.dim.n()];
        let values = self.transformed_values(params, f, &axes)?;
        let mut samples = grid.sample(|_| Complex64::new(0.0, 0.0));
        samples.values = values;
        Ok(grid.analyze(&samples)?.scaled(Complex64::new(1.0 / self.delta, 0.0)))
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton_step(jac: DMatrix<f64>, residual: &[f64]) -> Result<Vec<f64>> {
    let scale = jac.amax();
    let lu = jac.lu();
    let pivot = lu.u().diagonal().iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    if !(pivot > 1e-10 * scale.max(1.0)) {
        return Err(Error::SingularJacobian { pivot });
    }
    let rhs = DVector::from_column_slice(residual);
    let step = lu.solve(&rhs).ok_or(Error::SingularJacobian { pivot })?;
    Ok(step.iter().copied().collect())
}

/// `Φ_δ(params, f)` with default settings and focusing nonlinearity.
pub fn phi_residual(delta: f64, params: &SymmetryParams, f: &SpectralState) -> Result<Vec<f64>> {
    Gauge::new(f.dim(), delta)?.residual(params, f)
}

/// Finite-difference Jacobian at `(0, Γ_id, G_0)`.
pub fn jacobian_at_reference(delta: f64, dim: Dim) -> Result<DMatrix<f64>> {
    if delta > 0.2 {
        return Err(Error::InvalidArgument(format!("delta must be ≤ 0.2, got {delta}")));
    }
    let gauge = Gauge::new(dim, delta)?;
    gauge.jacobian(&SymmetryParams::identity(dim), &gaussian_datum(dim, gauge.settings.cutoff))
}

/// Leading-order Jacobian at the reference point, from `∇G_0 = −xG_0`,
/// `ΔG_0 = (|x|²−N)G_0` and the Gaussian moments.
pub fn leading_jacobian(dim: Dim) -> DMatrix<f64> {
    let n = dim.n();
    let nf = dim.f();
    let k = 3 + 2 * n;
    let mut j = DMatrix::zeros(k, k);
    j[(0, 0)] = -1.0;
    j[(1, 1)] = nf / 2.0;
    for a in 0..n {
        j[(2 + a, 2 + a)] = -0.5;
        j[(2 + n + a, 2 + n + a)] = 0.5;
    }
    j[(0, k - 1)] = nf / 4.0;
    j[(k - 1, k - 1)] = -nf / 4.0;
    j
}

/// Damped Newton gauge fix with default settings.
pub fn newton_gauge_fix(delta: f64, f: &SpectralState, tol: f64) -> Result<GaugeFit> {
    Gauge::new(f.dim(), delta)?.solve(f, tol)
}

/// `e^{-iθ} ρ^{-N/2} e^{-i((z−x₀)/ρ)·ξ} G_0((z−x₀)/ρ)`, the datum that the
/// parameters (with `t₀ = 0`) map exactly onto `G_0`.
pub fn planted_datum(params: &SymmetryParams, dim: Dim, cutoff: usize) -> Result<SpectralState> {
    params.validate(dim)?;
    if params.t0 != 0.0 {
        return Err(Error::InvalidArgument("planted data require t₀ = 0".into()));
    }
    let rule = gauss_hermite_rule(default_order(cutoff))?;
    let grid = HermiteGrid::new(dim, cutoff, &rule);
    let norm = PI.powf(-dim.f() / 4.0) * params.rho.powf(-dim.f() / 2.0);
    let samples = grid.sample(|z| {
        let w: Vec<f64> = z.iter().zip(&params.x0).map(|(z, x0)| (z - x0) / params.rho).collect();
        let r2: f64 = w.iter().map(|v| v * v).sum();
        let dot: f64 = w.iter().zip(&params.xi).map(|(a, b)| a * b).sum();
        Complex64::from_polar(norm * (-r2 / 2.0).exp(), -params.theta - dot)
    });
    grid.analyze(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::EigenIndex;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    #[test]
    fn decomposition_examples() {
        let g0 = gaussian_datum(Dim::One, 20);
        let d = decompose_datum(&g0);
        assert!((d.alpha - 1.0).abs() < 1e-14);
        assert!(d.phi.mass() < 1e-28);

        let ig0 = g0.scaled(I);
        let d = decompose_datum(&ig0);
        assert!(d.alpha.abs() < 1e-14);
        assert!(d.phi.sub(&ig0).unwrap().mass() < 1e-28);

        let h3 = SpectralState::unit(EigenIndex::One(3), 20).unwrap();
        let d = decompose_datum(&g0.add(&h3).unwrap());
        assert!((d.alpha - 1.0).abs() < 1e-14);
        assert!(d.phi.sub(&h3).unwrap().mass() < 1e-28);
    }

    #[test]
    fn decomposition_is_pythagorean() {
        let dim = Dim::Two;
        let mut f = gaussian_datum(dim, 6);
        for (k, c) in f.coeffs_mut().iter_mut().enumerate() {
            *c += Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()) * 0.1;
        }
        let d = decompose_datum(&f);
        assert!((d.phi.inner_real(&gaussian_datum(dim, 6)).unwrap()).abs() < 1e-13);
        let recon = d.phi.add(&gaussian_datum(dim, 6).scaled(Complex64::new(d.alpha, 0.0))).unwrap();
        assert!(recon.sub(&f).unwrap().mass() < 1e-26);
        assert!((f.mass() - d.alpha * d.alpha - d.phi.mass()).abs() < 1e-12);
    }

    #[test]
    fn residual_vanishes_at_reference() {
        for dim in [Dim::One, Dim::Two] {
            let g0 = gaussian_datum(dim, 24);
            let r = phi_residual(0.1, &SymmetryParams::identity(dim), &g0).unwrap();
            assert_eq!(r.len(), 3 + 2 * dim.n());
            assert!(max_abs(&r) < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn pure_phase_is_cancelled() {
        let theta_star = 0.37;
        for dim in [Dim::One, Dim::Two] {
            let f = gaussian_datum(dim, 24).scaled(Complex64::from_polar(1.0, theta_star));
            let mut params = SymmetryParams::identity(dim);
            params.theta = -theta_star;
            let r = phi_residual(0.1, &params, &f).unwrap();
            assert!(max_abs(&r) < 1e-8, "{r:?}");
            params.theta = theta_star;
            let r = phi_residual(0.1, &params, &f).unwrap();
            assert!(max_abs(&r) > 0.1);
        }
    }

    #[test]
    fn reference_jacobian_matches_leading_order() {
        for (dim, tol) in [(Dim::One, 1e-3), (Dim::Two, 0.05)] {
            let jac = jacobian_at_reference(0.1, dim).unwrap();
            let lead = leading_jacobian(dim);
            let diff = (&jac - &lead).amax();
            assert!(diff < tol, "{dim:?}: {jac} vs {lead}");
        }
    }

    #[test]
    fn one_dimensional_entries() {
        let j = jacobian_at_reference(0.1, Dim::One).unwrap();
        assert!((j[(0, 0)] + 1.0).abs() < 1e-4);
        assert!((j[(1, 1)] - 0.5).abs() < 1e-4);
        let j2 = jacobian_at_reference(0.05, Dim::One).unwrap();
        let gap = (j[(4, 4)] - j2[(4, 4)]).abs();
        assert!(gap < 1e-3 && (j[(4, 4)] + 0.25).abs() < 1e-3, "{} {}", j[(4, 4)], j2[(4, 4)]);
    }

    #[test]
    fn time_column_carries_nonlinear_correction() {
        // ∂_{t₀}U contains −iγδ^{1+4/N} G_0^{1+4/N}; its moments use ∫ e^{-a|x|²} and ∫ |x|² e^{-a|x|²}.
        let delta: f64 = 0.05;
        for dim in [Dim::One, Dim::Two] {
            let nf = dim.f();
            let a = 1.0 + 2.0 / nf;
            let norm = PI.powf(-(nf / 4.0) * (2.0 + 4.0 / nf));
            let m0 = norm * (PI / a).powf(nf / 2.0);
            let m2 = m0 * nf / (2.0 * a);
            let eps = delta.powf(4.0 / nf);
            let j = jacobian_at_reference(delta, dim).unwrap();
            let k = j.nrows();
            assert!((j[(0, k - 1)] - (nf / 4.0 - eps * m0)).abs() < 1e-6, "{}", j[(0, k - 1)]);
            let expect = -nf / 4.0 - eps * (m2 - nf / 2.0 * m0);
            assert!((j[(k - 1, k - 1)] - expect).abs() < 1e-6, "{}", j[(k - 1, k - 1)]);
        }
    }

    #[test]
    fn round_trip_two_dimensions() {
        let planted = SymmetryParams { theta: 0.06, rho: 1.07, xi: vec![-0.05, 0.03], x0: vec![0.08, -0.02], t0: 0.0 };
        let f = planted_datum(&planted, Dim::Two, 24).unwrap();
        let fit = newton_gauge_fix(0.1, &f, 1e-10).unwrap();
        assert!(fit.params.distance(&planted) < 1e-6, "{:?}", fit.params);
    }

    #[test]
    fn identity_datum_needs_no_iteration() {
        let fit = newton_gauge_fix(0.1, &gaussian_datum(Dim::One, 32), 1e-10).unwrap();
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.params, SymmetryParams::identity(Dim::One));
    }

    #[test]
    fn translation_is_recovered() {
        let mut planted = SymmetryParams::identity(Dim::One);
        planted.x0 = vec![0.05];
        let f = planted_datum(&planted, Dim::One, 32).unwrap();
        let fit = newton_gauge_fix(0.1, &f, 1e-10).unwrap();
        assert!(fit.residual_norm <= 1e-8);
        assert!((fit.params.x0[0] - 0.05).abs() < 1e-6, "{:?}", fit.params);
    }

    #[test]
    fn round_trip_one_dimension() {
        let planted = SymmetryParams { theta: 0.06, rho: 1.07, xi: vec![-0.05], x0: vec![0.08], t0: 0.0 };
        let f = planted_datum(&planted, Dim::One, 32).unwrap();
        let fit = newton_gauge_fix(0.1, &f, 1e-10).unwrap();
        assert!(fit.params.distance(&planted) < 1e-6, "{:?}", fit.params);
    }

    #[test]
    fn h4_perturbation_is_already_orthogonal() {
        let mut f = gaussian_datum(Dim::One, 32);
        f.coeffs_mut()[4] += Complex64::new(0.01, 0.0);
        let gauge = Gauge::new(Dim::One, 0.1).unwrap();
        let fit = gauge.solve(&f, 1e-10).unwrap();
        assert!(fit.params.distance(&SymmetryParams::identity(Dim::One)) < 1e-8);
        let datum = gauge.transformed_datum(&fit.params, &f, 32).unwrap();
        let d = decompose_datum(&datum);
        for m in ortho_moments(&d.phi).unwrap() {
            assert!(m.norm() < 1e-8, "{m}");
        }
    }

    #[test]
    fn transformed_datum_keeps_mass() {
        let gauge = Gauge::new(Dim::One, 0.1).unwrap();
        let f = gaussian_datum(Dim::One, 32);
        let params = SymmetryParams { theta: 0.2, rho: 0.95, xi: vec![0.05], x0: vec![-0.04], t0: 0.03 };
        let datum = gauge.transformed_datum(&params, &f, 40).unwrap();
        assert!((datum.mass() - f.mass()).abs() < 1e-9, "{}", datum.mass() - f.mass());
    }

    #[test]
    fn params_round_trip_through_slices() {
        let p = SymmetryParams { theta: 0.1, rho: 1.2, xi: vec![0.3, -0.1], x0: vec![0.0, 0.2], t0: -0.05 };
        assert_eq!(SymmetryParams::from_slice(Dim::Two, &p.to_vec()).unwrap(), p);
        assert!(SymmetryParams::from_slice(Dim::One, &p.to_vec()).is_err());
    }

    #[test]
    fn truncated_datum_reports_leakage() {
        let mut f = gaussian_datum(Dim::One, 40);
        f.coeffs_mut()[38] = Complex64::new(0.1, 0.0);
        let err = phi_residual(0.1, &SymmetryParams::identity(Dim::One), &f).unwrap_err();
        assert!(matches!(err, Error::Leakage { .. }));
    }
}
