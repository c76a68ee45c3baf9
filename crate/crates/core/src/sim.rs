//! Strang-split integration of `i ∂_τ v − ½ 𝓗 v = −γ |v|^{4/N} v` on
//! `(−π/2, π/2)` in the Hermite eigenbasis, the space-time norm functional,
//! and the experiments built on them.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{d1_series, d2_closed, strichartz_constant};
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_datum, harmonic_propagate, lens_gaussian, DuhamelSolver};
use crate::hermite::{gauss_hermite_rule, Dim, HermiteGrid, SpectralState};

pub const DEFAULT_STEPS: usize = 4096;
const MASS_LIMIT: f64 = 1e-8;

pub fn default_cutoff(dim: Dim) -> usize {
    match dim {
        Dim::One => 96,
        Dim::Two => 48,
    }
}

/// Smallest grid order making the projection of `|v|^{4/N} v h_k` exact:
/// `3c+1` in 1D and `2c+1` in 2D.
pub fn required_order(dim: Dim, cutoff: usize) -> usize {
    ((1.0 + 2.0 / dim.f()) * cutoff as f64).ceil() as usize + 1
}

pub fn default_order(dim: Dim, cutoff: usize) -> usize {
    required_order(dim, cutoff) + 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dim: Dim,
    pub delta: f64,
    /// `+1` focusing, `−1` defocusing, `0` for the linear flow.
    pub gamma: f64,
    pub cutoff: usize,
    /// Number of τ-steps over `(−π/2, π/2)`.
    pub steps: usize,
    pub quadrature_order: usize,
}

impl SimConfig {
    /// Defaults: cutoff 96 (1D) / 48 (2D), 4096 steps, order one above the exact-projection minimum.
    pub fn new(dim: Dim, delta: f64, gamma: f64) -> SimConfig {
        let cutoff = default_cutoff(dim);
        SimConfig { dim, delta, gamma, cutoff, steps: DEFAULT_STEPS, quadrature_order: default_order(dim, cutoff) }
    }

    pub fn with_resolution(mut self, cutoff: usize, steps: usize) -> SimConfig {
        self.cutoff = cutoff;
        self.steps = steps;
        self.quadrature_order = default_order(self.dim, cutoff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.steps % 2 == 1 {
            return Err(Error::InvalidArgument(format!("steps must be even and ≥ 2, got {}", self.steps)));
        }
        if self.cutoff < 16 {
            return Err(Error::InvalidArgument(format!("cutoff must be ≥ 16, got {}", self.cutoff)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidArgument(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        if ![-1.0, 0.0, 1.0].contains(&self.gamma) {
            return Err(Error::InvalidArgument(format!("gamma must be +1, -1 or 0, got {}", self.gamma)));
        }
        let need = required_order(self.dim, self.cutoff);
        if self.quadrature_order < need {
            return Err(Error::InvalidArgument(format!(
                "quadrature order {} below the required {need}",
                self.quadrature_order
            )));
        }
        Ok(())
    }

    pub fn dtau(&self) -> f64 {
        PI / self.steps as f64
    }

    /// τ at step boundary `i`, `0 ≤ i ≤ steps`.
    pub fn tau(&self, i: usize) -> f64 {
        -FRAC_PI_2 + i as f64 * self.dtau()
    }
}

/// Grid evaluation of the nonlinear substep and of `∫ |v|^p dy`.
#[derive(Clone, Debug)]
struct Stepper {
    gamma: f64,
    exponent: f64,
    grid: HermiteGrid,
}

impl Stepper {
    fn new(config: &SimConfig) -> Result<Stepper> {
        let rule = gauss_hermite_rule(config.quadrature_order)?;
        let scale = (1.0 + 2.0 / config.dim.f()).sqrt();
        Ok(Stepper {
            gamma: config.gamma,
            exponent: 2.0 / config.dim.f(),
            grid: HermiteGrid::scaled(config.dim, config.cutoff, &rule, scale),
        })
    }

    /// `v ← v e^{iγ|v|^{4/N}Δτ}`, projected back. The increment
    /// `(e^{iθ} − 1) v` carries the factor `|v|^{4/N}`, which keeps its
    /// projection on the scaled grid exact to first order in `Δτ`.
    fn nonlinear(&self, state: &SpectralState, dtau: f64) -> Result<SpectralState> {
        if self.gamma == 0.0 {
            return Ok(state.clone());
        }
        let mut samples = self.grid.synthesize(state)?;
        for v in samples.values.iter_mut() {
            let theta = self.gamma * v.norm_sqr().powf(self.exponent) * dtau;
            let phase = Complex64::new(theta.cos() - 1.0, theta.sin());
            *v *= phase;
        }
        state.add(&self.grid.analyze(&samples)?)
    }

    /// `∫ |v|^p dy` on the scaled grid, exact for `p = 2 + 4/N`.
    fn density_integral(&self, state: &SpectralState, p: f64) -> Result<f64> {
        let samples = self.grid.synthesize(state)?;
        let vals: Vec<f64> = samples.values.iter().map(|v| v.norm_sqr().powf(p / 2.0)).collect();
        self.grid.integrate(&vals)
    }
}

/// Runs the splitting from the datum at τ = 0 forward to π/2 and backward to
/// −π/2, calling `visit(i, state)` for every step boundary `i` (τ = config.tau(i)).
fn run<F>(config: &SimConfig, initial: &SpectralState, stepper: &Stepper, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &SpectralState) -> Result<()>,
{
    config.validate()?;
    if initial.dim() != config.dim || initial.cutoff() != config.cutoff {
        return Err(Error::DimensionMismatch("initial state does not match the configuration".into()));
    }
    let half = config.steps / 2;
    let mass0 = initial.mass();
    visit(half, initial)?;
    for direction in [1.0f64, -1.0] {
        let dt = direction * config.dtau();
        let mut v = initial.clone();
        for k in 1..=half {
            v = harmonic_propagate(&v, dt / 2.0);
            v = stepper.nonlinear(&v, dt)?;
            v = harmonic_propagate(&v, dt / 2.0);
            if v.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Overflow { step: k });
            }
            let mass = v.mass();
            if mass0 > 0.0 {
                let drift = (mass - mass0).abs() / mass0;
                if drift > MASS_LIMIT {
                    return Err(Error::MassDrift { step: k, drift, limit: MASS_LIMIT });
                }
            }
            let index = if direction > 0.0 { half + k } else { half - k };
            visit(index, &v)?;
        }
    }
    Ok(())
}

/// Stored solution at every step boundary, ordered by τ from −π/2 to π/2.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    pub states: Vec<SpectralState>,
    pub masses: Vec<f64>,
}

impl Trajectory {
    pub fn taus(&self) -> Vec<f64> {
        (0..self.states.len()).map(|i| self.config.tau(i)).collect()
    }

    /// Largest relative deviation of the recorded masses from the initial mass.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.masses[self.config.steps / 2];
        if m0 == 0.0 {
            return self.masses.iter().fold(0.0, |a, &m| a.max(m));
        }
        self.masses.iter().fold(0.0, |a, &m| a.max((m - m0).abs() / m0))
    }
}

/// Evolves `δ G_0`.
pub fn evolve(config: &SimConfig) -> Result<Trajectory> {
    let initial = gaussian_datum(config.dim, config.cutoff).scaled(Complex64::new(config.delta, 0.0));
    evolve_from(config, &initial)
}

/// Evolves a caller-supplied state given at τ = 0.
pub fn evolve_from(config: &SimConfig, initial: &SpectralState) -> Result<Trajectory> {
    let stepper = Stepper::new(config)?;
    let n = config.steps + 1;
    let mut slots: Vec<Option<SpectralState>> = vec![None; n];
    run(config, initial, &stepper, |i, v| {
        slots[i] = Some(v.clone());
        Ok(())
    })?;
    let states: Vec<SpectralState> = slots.into_iter().map(|s| s.expect("every boundary visited")).collect();
    let masses = states.iter().map(SpectralState::mass).collect();
    Ok(Trajectory { config: config.clone(), states, masses })
}

/// State at `τ_target ∈ (−π/2, π/2)` reached with `steps` uniform Strang steps from τ = 0.
pub fn evolve_to(config: &SimConfig, initial: &SpectralState, tau_target: f64, steps: usize) -> Result<SpectralState> {
    if tau_target.abs() >= FRAC_PI_2 {
        return Err(Error::LensDomain(tau_target));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let stepper = Stepper::new(config)?;
    let dt = tau_target / steps as f64;
    let mut v = initial.clone();
    for k in 1..=steps {
        v = harmonic_propagate(&v, dt / 2.0);
        v = stepper.nonlinear(&v, dt)?;
        v = harmonic_propagate(&v, dt / 2.0);
        if v.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Overflow { step: k });
        }
    }
    Ok(v)
}

/// Composite Simpson weight of boundary `i` out of `steps` (even) intervals.
fn simpson_weight(i: usize, steps: usize, h: f64) -> f64 {
    let w = if i == 0 || i == steps {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    };
    w * h / 3.0
}

fn check_norm_order(config: &SimConfig, p: f64) -> Result<()> {
    let need = (p / 2.0 * config.cutoff as f64).ceil() as usize + 1;
    if config.quadrature_order < need || p > config.dim.strichartz_exponent() {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {} cannot integrate |v|^{p} exactly (needs {need})",
            config.quadrature_order
        )));
    }
    Ok(())
}

/// `∬ |v|^p dy dτ` with composite Simpson over the step boundaries.
pub fn spacetime_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    check_norm_order(&traj.config, p)?;
    let stepper = Stepper::new(&traj.config)?;
    let h = traj.config.dtau();
    let mut total = 0.0;
    for (i, v) in traj.states.iter().enumerate() {
        total += simpson_weight(i, traj.config.steps, h) * stepper.density_integral(v, p)?;
    }
    Ok(total)
}

/// `∬ |v|^{2+4/N}` for `δ G_0` without storing the trajectory.
pub fn strichartz_functional(config: &SimConfig) -> Result<f64> {
    let p = config.dim.strichartz_exponent();
    check_norm_order(config, p)?;
    let stepper = Stepper::new(config)?;
    let initial = gaussian_datum(config.dim, config.cutoff).scaled(Complex64::new(config.delta, 0.0));
    let h = config.dtau();
    let mut total = 0.0;
    run(config, &initial, &stepper, |i, v| {
        total += simpson_weight(i, config.steps, h) * stepper.density_integral(v, p)?;
        Ok(())
    })?;
    Ok(total)
}

/// Largest relative mass deviation over a full run from `initial`, without storing the trajectory.
pub fn mass_drift(config: &SimConfig, initial: &SpectralState) -> Result<f64> {
    let stepper = Stepper::new(config)?;
    let m0 = initial.mass();
    let mut worst: f64 = 0.0;
    run(config, initial, &stepper, |_, v| {
        let d = v.mass() - m0;
        worst = worst.max(if m0 > 0.0 { d.abs() / m0 } else { d.abs() });
        Ok(())
    })?;
    Ok(worst)
}

/// `D_1 ≈ 0.0867` or `D_2 = ln(4/3)/(2π)`.
pub fn reference_constant(dim: Dim) -> Result<f64> {
    match dim {
        Dim::One => d1_series(200),
        Dim::Two => Ok(d2_closed()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub cutoff: usize,
    pub steps: usize,
}

impl Resolution {
    pub fn default_for(dim: Dim) -> Resolution {
        Resolution { cutoff: default_cutoff(dim), steps: DEFAULT_STEPS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub delta: f64,
    pub s_hat: f64,
    pub d_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub dim: usize,
    pub gamma: f64,
    pub cutoff: usize,
    pub steps: usize,
    pub rows: Vec<ExpansionRow>,
    pub extrapolated: f64,
    pub reference: f64,
    pub relative_error: f64,
    /// Relative error of `D̂` at the smallest δ, before extrapolation.
    pub last_relative_error: f64,
    /// Successive differences of `D̂` shrink as `δ^{4/N}` predicts (within a factor 2).
    pub ratio_consistent: bool,
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values of delta".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d <= 0.3)) {
        return Err(Error::InvalidArgument("each delta must lie in (0, 0.3]".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("deltas must be strictly decreasing".into()));
    }
    Ok(())
}

fn parallel_map<T: Send, F: Fn(f64) -> Result<T> + Sync>(values: &[f64], f: F) -> Result<Vec<T>> {
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = values.iter().map(|&v| scope.spawn(move || f(v))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Measures `D̂(δ) = (Ŝ(δ) − C_S δ^{2+4/N}) / δ^{2+8/N}` and extrapolates the
/// last two values assuming a remainder `O(δ^{4/N})`.
pub fn expansion_experiment(dim: Dim, gamma: f64, deltas: &[f64], resolution: Resolution) -> Result<ExpansionReport> {
    check_deltas(deltas)?;
    let p = dim.strichartz_exponent();
    let cs = strichartz_constant(dim);
    let s_hats = parallel_map(deltas, |delta| {
        let config = SimConfig::new(dim, delta, gamma).with_resolution(resolution.cutoff, resolution.steps);
        strichartz_functional(&config)
    })?;
    let rows: Vec<ExpansionRow> = deltas
        .iter()
        .zip(&s_hats)
        .map(|(&delta, &s_hat)| ExpansionRow {
            delta,
            s_hat,
            d_hat: (s_hat - cs * delta.powf(p)) / delta.powf(2.0 + 8.0 / dim.f()),
        })
        .collect();
    let q = 4.0 / dim.f();
    let (a, b) = (rows[rows.len() - 2], rows[rows.len() - 1]);
    let (wa, wb) = (a.delta.powf(q), b.delta.powf(q));
    let extrapolated = (b.d_hat * wa - a.d_hat * wb) / (wa - wb);
    let reference = gamma * reference_constant(dim)?;
    let ratio_consistent = rows.windows(3).all(|w| {
        let observed = (w[0].d_hat - w[1].d_hat) / (w[1].d_hat - w[2].d_hat);
        let predicted = (w[0].delta.powf(q) - w[1].delta.powf(q)) / (w[1].delta.powf(q) - w[2].delta.powf(q));
        observed > 0.5 * predicted && observed < 2.0 * predicted
    });
    Ok(ExpansionReport {
        dim: dim.n(),
        gamma,
        cutoff: resolution.cutoff,
        steps: resolution.steps,
        relative_error: (extrapolated - reference).abs() / reference.abs(),
        last_relative_error: (b.d_hat - reference).abs() / reference.abs(),
        rows,
        extrapolated,
        reference,
        ratio_consistent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationRow {
    pub delta: f64,
    pub error: f64,
    pub error_over_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub dim: usize,
    pub gamma: f64,
    pub rows: Vec<PerturbationRow>,
    pub slope: f64,
    pub expected_slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Cutoff at which the Duhamel source is resolved to the required accuracy.
fn remainder_cutoff(dim: Dim, cutoff: usize) -> usize {
    cutoff.max(match dim {
        Dim::One => 96,
        Dim::Two => 64,
    })
}

/// `e(δ) = ‖v − δ(G̃ + γ δ^{4/N} r̃)‖_{L^{2+4/N}_{τ,y}}` with `v` the simulated
/// solution for data `δ G_0`, and the fitted slope of `log e` against `log δ`.
pub fn perturbation_order_check(
    dim: Dim,
    gamma: f64,
    deltas: &[f64],
    resolution: Resolution,
) -> Result<PerturbationReport> {
    check_deltas(deltas)?;
    if gamma == 0.0 {
        return Err(Error::InvalidArgument("the perturbation check needs a nonlinear run".into()));
    }
    let p = dim.strichartz_exponent();
    let solver = DuhamelSolver::new(dim, remainder_cutoff(dim, resolution.cutoff))?;
    let errors = parallel_map(deltas, |delta| {
        let config = SimConfig::new(dim, delta, gamma).with_resolution(resolution.cutoff, resolution.steps);
        check_norm_order(&config, p)?;
        let stepper = Stepper::new(&config)?;
        let initial = gaussian_datum(dim, config.cutoff).scaled(Complex64::new(delta, 0.0));
        let g0 = gaussian_datum(dim, config.cutoff);
        let h = config.dtau();
        let weight = gamma * delta.powf(4.0 / dim.f());
        let mut total = 0.0;
        run(&config, &initial, &stepper, |i, v| {
            let tau = config.tau(i);
            let r = solver.at(tau)?.resized(config.cutoff);
            let approx = harmonic_propagate(&g0, tau).add(&r.scaled(Complex64::new(weight, 0.0)))?;
            let diff = v.sub(&approx.scaled(Complex64::new(delta, 0.0)))?;
            total += simpson_weight(i, config.steps, h) * stepper.density_integral(&diff, p)?;
            Ok(())
        })?;
        Ok(total.max(0.0).powf(1.0 / p))
    })?;
    let rows: Vec<PerturbationRow> = deltas
        .iter()
        .zip(&errors)
        .map(|(&delta, &error)| PerturbationRow { delta, error, error_over_delta: error / delta })
        .collect();
    Ok(PerturbationReport {
        dim: dim.n(),
        gamma,
        slope: log_log_slope(deltas, &errors),
        expected_slope: 1.0 + 8.0 / dim.f(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingReport {
    pub dim: usize,
    pub delta: f64,
    pub steps: Vec<usize>,
    pub s_hat: Vec<f64>,
    /// `|Ŝ_{steps[k]} − Ŝ_{steps[k+1]}|`.
    pub differences: Vec<f64>,
    /// Ratios of consecutive differences; about 4 for a second-order scheme.
    pub ratios: Vec<f64>,
}

/// `Ŝ` under successive step doublings.
pub fn splitting_order_study(dim: Dim, gamma: f64, delta: f64, cutoff: usize, steps: &[usize]) -> Result<SplittingReport> {
    if steps.len() < 3 {
        return Err(Error::InvalidArgument("need at least three step counts".into()));
    }
    let as_f64: Vec<f64> = steps.iter().map(|&s| s as f64).collect();
    let s_hat = parallel_map(&as_f64, |s| {
        let config = SimConfig::new(dim, delta, gamma).with_resolution(cutoff, s as usize);
        strichartz_functional(&config)
    })?;
    let differences: Vec<f64> = s_hat.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let ratios = differences.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(SplittingReport { dim: dim.n(), delta, steps: steps.to_vec(), s_hat, differences, ratios })
}

/// `δ G̃(τ, y)`, the linear solution with data `δ G_0`, for comparisons on grids.
pub fn linear_gaussian(delta: f64, tau: f64, y: &[f64]) -> Complex64 {
    delta * lens_gaussian(tau, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::EigenIndex;

    fn small(dim: Dim, delta: f64, gamma: f64) -> SimConfig {
        let cutoff = match dim {
            Dim::One => 32,
            Dim::Two => 16,
        };
        SimConfig::new(dim, delta, gamma).with_resolution(cutoff, 256)
    }

    #[test]
    fn config_validation() {
        let mut c = small(Dim::One, 0.1, 1.0);
        assert!(c.validate().is_ok());
        c.steps = 7;
        assert!(c.validate().is_err());
        let mut c = small(Dim::One, 0.1, 1.0);
        c.quadrature_order = 10;
        assert!(c.validate().is_err());
        assert!(small(Dim::One, 1.5, 1.0).validate().is_err());
        assert!(small(Dim::One, 0.1, 0.5).validate().is_err());
        assert!(SimConfig::new(Dim::One, 0.1, 1.0).with_resolution(8, 16).validate().is_err());
        assert_eq!(required_order(Dim::One, 96), 289);
        assert_eq!(required_order(Dim::Two, 48), 97);
    }

    #[test]
    fn linear_run_is_exact() {
        for dim in [Dim::One, Dim::Two] {
            let c = small(dim, 0.7, 0.0);
            let traj = evolve(&c).unwrap();
            let g = gaussian_datum(dim, c.cutoff);
            for (i, s) in traj.states.iter().enumerate() {
                let expected = harmonic_propagate(&g, c.tau(i)).scaled(Complex64::new(0.7, 0.0));
                let err = s.sub(&expected).unwrap().mass().sqrt();
                assert!(err < 1e-12);
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let traj = evolve(&small(Dim::One, 0.0, 1.0)).unwrap();
        assert!(traj.states.iter().all(|s| s.mass() == 0.0));
    }

    #[test]
    fn mass_is_conserved() {
        let traj = evolve(&small(Dim::One, 0.1, 1.0)).unwrap();
        assert!((traj.masses.last().unwrap() - 0.01).abs() < 1e-11);
        assert!(traj.max_mass_drift() < 1e-9);
        let traj = evolve(&small(Dim::Two, 0.3, -1.0)).unwrap();
        assert!(traj.max_mass_drift() < 1e-9);
    }

    #[test]
    fn linear_norm_matches_strichartz_constant() {
        for dim in [Dim::One, Dim::Two] {
            let c = small(dim, 1.0, 0.0);
            let traj = evolve(&c).unwrap();
            let s = spacetime_norm(&traj, dim.strichartz_exponent()).unwrap();
            assert!((s - strichartz_constant(dim)).abs() < 1e-8, "{s}");
            let c2 = small(dim, 0.5, 0.0);
            let s2 = spacetime_norm(&evolve(&c2).unwrap(), dim.strichartz_exponent()).unwrap();
            assert!((s2 - 0.5f64.powf(dim.strichartz_exponent()) * s).abs() < 1e-14);
        }
    }

    #[test]
    fn time_reversal_and_parity() {
        for gamma in [0.0, 1.0] {
            let c = small(Dim::One, 0.3, gamma);
            let traj = evolve(&c).unwrap();
            let n = c.steps;
            for i in 0..=n / 2 {
                let a = &traj.states[n / 2 + i];
                let b = traj.states[n / 2 - i].conj();
                let tol = if gamma == 0.0 { 1e-14 } else { 1e-8 };
                assert!(a.sub(&b).unwrap().mass().sqrt() < tol);
            }
            for s in &traj.states {
                for k in (1..=c.cutoff).step_by(2) {
                    assert!(s.coeff(EigenIndex::One(k)).unwrap().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn splitting_is_second_order() {
        let r = splitting_order_study(Dim::One, 1.0, 0.3, 32, &[64, 128, 256, 512]).unwrap();
        for ratio in &r.ratios {
            assert!((ratio - 4.0).abs() < 0.4, "{:?}", r.ratios);
        }
    }

    #[test]
    fn evolve_to_matches_trajectory() {
        let c = small(Dim::One, 0.2, 1.0);
        let traj = evolve(&c).unwrap();
        let i = c.steps / 2 + 32;
        let initial = gaussian_datum(Dim::One, c.cutoff).scaled(Complex64::new(0.2, 0.0));
        let v = evolve_to(&c, &initial, c.tau(i), 32).unwrap();
        assert!(v.sub(&traj.states[i]).unwrap().mass().sqrt() < 1e-14);
        assert!(evolve_to(&c, &initial, 2.0, 4).is_err());
    }

    #[test]
    fn delta_list_checks() {
        let res = Resolution { cutoff: 32, steps: 64 };
        assert!(expansion_experiment(Dim::One, 1.0, &[0.1, 0.2], res).is_err());
        assert!(expansion_experiment(Dim::One, 1.0, &[0.5, 0.2], res).is_err());
        assert!(expansion_experiment(Dim::One, 1.0, &[0.2], res).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(5)).collect();
        assert!((log_log_slope(&x, &y) - 5.0).abs() < 1e-12);
    }
}
