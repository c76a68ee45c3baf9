//! The ten acceptance criteria as runnable checks, shared by the test suite
//! and the command-line `selftest`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{
    d1_inner_sum, d1_series, d2_closed, d2_integral, d_n_duhamel, log_rational_integral, strichartz_constant,
    strichartz_crosscheck,
};
use crate::error::Result;
use crate::gauge::{
    jacobian_at_reference, leading_jacobian, newton_gauge_fix, phi_residual, planted_datum, SymmetryParams,
};
use crate::gaussian::{gaussian_datum, harmonic_propagate, level_rotation};
use crate::hermite::{
    alpha_coefficient, alpha_coefficient_quadrature, gauss_hermite_rule, overlap_table, wang_diagonal, Dim, EigenIndex,
    SpectralState,
};
use crate::quadform::{
    central_binomial_bound_check, coercivity_certificate, combinatorics_check, deficit_tau_nodes, f_script,
    kernel_directions, matches_three_decimals, q_diag_1d, q_level2_2d, strichartz_deficit, tail_bound, QuadForm,
};
use crate::sim::{
    expansion_experiment, log_log_slope, mass_drift, perturbation_order_check, splitting_order_study, Resolution,
    SimConfig,
};

/// One named comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64, pass: bool) -> Check {
        Check { name: name.into(), computed, reference, tolerance, pass }
    }

    /// `|computed − reference| ≤ tolerance`.
    pub fn close(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Check {
        let pass = (computed - reference).abs() <= tolerance;
        Check::new(name, computed, reference, tolerance, pass)
    }

    /// `|computed − reference| ≤ tolerance · |reference|`.
    pub fn relative(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Check {
        let pass = (computed - reference).abs() <= tolerance * reference.abs();
        Check::new(name, computed, reference, tolerance, pass)
    }

    /// `computed ≤ limit`.
    pub fn at_most(name: impl Into<String>, computed: f64, limit: f64) -> Check {
        Check::new(name, computed, limit, 0.0, computed <= limit)
    }

    /// `computed ≥ bound`.
    pub fn at_least(name: impl Into<String>, computed: f64, bound: f64) -> Check {
        Check::new(name, computed, bound, 0.0, computed >= bound)
    }

    /// `computed > bound`.
    pub fn above(name: impl Into<String>, computed: f64, bound: f64) -> Check {
        Check::new(name, computed, bound, 0.0, computed > bound)
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        let v = if ok { 1.0 } else { 0.0 };
        Check::new(name, v, 1.0, 0.0, ok)
    }
}

/// Result of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub checks: Vec<Check>,
    /// Set when a computation aborted before all checks were made.
    pub error: Option<String>,
    pub elapsed_ms: u64,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// `criterion  3  PASS  quadratic form  (14/14 checks, 1.23 s)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.pass).count();
        let status = if self.pass() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "criterion {:>2}  {status}  {}  ({ok}/{} checks, {:.2} s)",
            self.id,
            self.title,
            self.checks.len(),
            self.elapsed_ms as f64 / 1000.0
        );
        if let Some(e) = &self.error {
            line.push_str(&format!("  error: {e}"));
        }
        for c in self.failures() {
            line.push_str(&format!(
                "\n    failed {}: computed {:.15e}, reference {:.15e}, tolerance {:.3e}",
                c.name, c.computed, c.reference, c.tolerance
            ));
        }
        line
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "constants"),
    (2, "spectral identities"),
    (3, "quadratic form"),
    (4, "coefficient table"),
    (5, "coercivity certificate"),
    (6, "combinatorics"),
    (7, "simulation expansion"),
    (8, "solver properties"),
    (9, "symmetry properties"),
    (10, "gauge"),
];

/// Wall-clock budget in milliseconds, where one is set.
fn budget(id: usize) -> Option<f64> {
    match id {
        1 => Some(10_000.0),
        4 => Some(1_000.0),
        6 => Some(5_000.0),
        _ => None,
    }
}

pub fn run_criterion(id: usize) -> CriterionOutcome {
    let title = CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, t)| t.to_string()).unwrap_or_default();
    let start = Instant::now();
    let result = match id {
        1 => constants(),
        2 => spectral_identities(),
        3 => quadratic_form(),
        4 => coefficient_table(),
        5 => coercivity(),
        6 => combinatorics(),
        7 => simulation_expansion(),
        8 => solver_properties(),
        9 => symmetry_properties(),
        10 => gauge(),
        _ => Err(crate::Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let ms = start.elapsed().as_secs_f64() * 1000.0;
    let (mut checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    if let Some(limit) = budget(id) {
        checks.push(Check::at_most("elapsed_ms", ms, limit));
    }
    CriterionOutcome { id, title, checks, error, elapsed_ms: ms as u64 }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id)).collect()
}

fn dims() -> [Dim; 2] {
    [Dim::One, Dim::Two]
}

/// `(1/π) Σ_{k ≤ 200} (2k)!/(k 9^k (k!)²)` by the ratio recurrence of the terms.
fn d1_oracle() -> f64 {
    let mut ratio = 1.0;
    let mut sum = 0.0;
    for k in 1..=200u32 {
        let kf = k as f64;
        ratio *= (2.0 * kf) * (2.0 * kf - 1.0) / (kf * kf * 9.0);
        sum += ratio / kf;
    }
    sum / PI
}

fn d_oracle(dim: Dim) -> f64 {
    match dim {
        Dim::One => d1_oracle(),
        Dim::Two => (4.0f64 / 3.0).ln() / (2.0 * PI),
    }
}

fn random_state(dim: Dim, cutoff: usize, rng: &mut ChaCha8Rng) -> Result<SpectralState> {
    let modes = match dim {
        Dim::One => cutoff + 1,
        Dim::Two => (cutoff + 1) * (cutoff + 1),
    };
    let coeffs = (0..modes).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let s = SpectralState::from_coeffs(dim, cutoff, coeffs)?;
    let m = s.mass().sqrt();
    Ok(s.scaled(Complex64::new(1.0 / m, 0.0)))
}

fn constants() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (dim, exact) in [(Dim::One, 1.0 / 3f64.sqrt()), (Dim::Two, 0.5)] {
        let cs = strichartz_constant(dim);
        out.push(Check::close(format!("C_S[{}]", dim.n()), cs, exact, 1e-15));
        out.push(Check::close(format!("C_S_lens_quadrature[{}]", dim.n()), strichartz_crosscheck(dim)?, cs, 1e-10));
    }
    let d1 = d1_series(200)?;
    out.push(Check::close("D_1_series_4dp", d1, 0.0867, 5e-5));
    out.push(Check::close("D_1_inner_sum_4dp", d1_inner_sum(200), 0.2724, 5e-5));
    out.push(Check::close("D_1_series_vs_recurrence", d1, d1_oracle(), 1e-14));
    let d2 = d2_closed();
    out.push(Check::close("D_2_closed_form", d2, d_oracle(Dim::Two), 1e-15));
    out.push(Check::close("D_2_closed_4sf", d2, 0.0458, 5e-5));
    out.push(Check::close("D_2_integral", d2_integral(1e3, 1e-8)?.value, d2, 1e-8));
    let a = log_rational_integral(1.0, 1.0, 4.0, 1e-10)?;
    out.push(Check::close("log_integral_2pi_ln2", a.value, 2.0 * PI * LN_2, 1e-8));
    let b = log_rational_integral(9.0, 25.0, 4.0, 1e-10)?;
    out.push(Check::close("log_integral_6pi_ln2", b.value, 6.0 * PI * LN_2, 1e-8));
    out.push(Check::close("D_1_duhamel", d_n_duhamel(Dim::One, 96, 64)?, d_oracle(Dim::One), 1e-6));
    out.push(Check::close("D_2_duhamel", d_n_duhamel(Dim::Two, 64, 64)?, d_oracle(Dim::Two), 1e-6));
    Ok(out)
}

fn spectral_identities() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let table = overlap_table(1.0, 30)?;
    let wang = (0..=30)
        .map(|j| (wang_diagonal(j) - table[j * 31 + j]).abs() / table[j * 31 + j])
        .fold(0.0, f64::max);
    out.push(Check::at_most("wang_diagonal_max_rel_j<=30", wang, 1e-10));
    let alpha = (0..=15)
        .map(|j| Ok((alpha_coefficient(j) - alpha_coefficient_quadrature(2 * j)?).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::at_most("alpha_2j_max_abs_j<=15", alpha, 1e-9));
    // ∫ |x|^{2k} G_0² with G_0² = π^{-N/2} e^{-|x|²}: Gauss–Hermite is exact for these moments.
    let rule = gauss_hermite_rule(8)?;
    for dim in dims() {
        let n = dim.n();
        let mut moments = [0.0; 3];
        let q = rule.order;
        for idx in 0..q.pow(n as u32) {
            let (mut r2, mut w) = (0.0, 1.0);
            let mut rest = idx;
            for _ in 0..n {
                let s = rest % q;
                rest /= q;
                r2 += rule.nodes[s] * rule.nodes[s];
                w *= rule.weights[s];
            }
            for (k, m) in moments.iter_mut().enumerate() {
                *m += w * r2.powi(k as i32);
            }
        }
        let norm = PI.powf(-dim.f() / 2.0);
        let nf = dim.f();
        let expected = [1.0, nf / 2.0, nf * (nf + 2.0) / 4.0];
        for (k, (m, e)) in moments.iter().zip(expected).enumerate() {
            out.push(Check::close(format!("gaussian_moment_{}[{n}]", 2 * k), norm * m, e, 1e-10));
        }
    }
    Ok(out)
}

/// Orthogonal projection onto the real complement of the kernel directions, then unit mass.
fn kernel_orthogonal(phi: &SpectralState, kernel: &[SpectralState]) -> Result<SpectralState> {
    let mut basis: Vec<SpectralState> = Vec::new();
    for k in kernel {
        let mut v = k.clone();
        for b in &basis {
            v = v.sub(&b.scaled(Complex64::new(v.inner_real(b)?, 0.0)))?;
        }
        let m = v.mass().sqrt();
        basis.push(v.scaled(Complex64::new(1.0 / m, 0.0)));
    }
    let mut v = phi.clone();
    for b in &basis {
        v = v.sub(&b.scaled(Complex64::new(v.inner_real(b)?, 0.0)))?;
    }
    let m = v.mass().sqrt();
    Ok(v.scaled(Complex64::new(1.0 / m, 0.0)))
}

/// Fitted exponent of `max(|R(ε)|, |R(−ε)|)`, `R(ε) = D(ε) − ε²Q(φ)`, over
/// `ε ∈ {10^{-1}, …, 10^{-3}}`, smallest over the sampled directions. Taking
/// both signs of `ε` keeps a sign change of `Aε³ + Bε⁴` out of the fit.
pub fn second_order_exponent(dim: Dim, cutoff: usize, directions: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = QuadForm::new(dim, cutoff)?;
    let kernel = kernel_directions(dim, cutoff)?;
    let g0 = gaussian_datum(dim, cutoff);
    let nodes = deficit_tau_nodes(dim, cutoff);
    let eps: Vec<f64> = (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect();
    let mut worst = f64::INFINITY;
    for _ in 0..directions {
        let phi = kernel_orthogonal(&random_state(dim, cutoff, &mut rng)?, &kernel)?;
        let q = form.eval(&phi)?;
        let remainders = eps
            .iter()
            .map(|&e| {
                let mut worst: f64 = 0.0;
                for s in [e, -e] {
                    let d = strichartz_deficit(&g0.add(&phi.scaled(Complex64::new(s, 0.0)))?, nodes)?;
                    worst = worst.max((d - s * s * q).abs());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = worst.min(log_log_slope(&eps, &remainders));
    }
    Ok(worst)
}

fn quadratic_form() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (dim, cutoff) in [(Dim::One, 8), (Dim::Two, 6)] {
        let form = QuadForm::new(dim, cutoff)?;
        let worst = kernel_directions(dim, cutoff)?
            .iter()
            .map(|k| form.eval(k).map(f64::abs))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::at_most(format!("kernel_max_abs_Q[{}]", dim.n()), worst, 1e-8));
    }
    let form = QuadForm::new(Dim::One, 100)?;
    let s3 = 3f64.sqrt();
    let q3 = form.eval(&SpectralState::unit(EigenIndex::One(3), 100)?)?;
    let q4 = form.eval(&SpectralState::unit(EigenIndex::One(4), 100)?)?;
    out.push(Check::close("Q(h_3)", q3, 2.0 * PI.sqrt() / (3.0 * s3), 1e-10));
    out.push(Check::close("Q(h_4)", q4, 8.0 * PI.sqrt() / (9.0 * s3), 1e-10));
    let mut min_q = f64::INFINITY;
    let mut max_gap: f64 = 0.0;
    for j in 3..=100 {
        let q = form.eval(&SpectralState::unit(EigenIndex::One(j), 100)?)?;
        min_q = min_q.min(q);
        max_gap = max_gap.max((q - q_diag_1d(j)?).abs());
    }
    out.push(Check::above("min_Q(h_j)_3<=j<=100", min_q, 0.0));
    out.push(Check::at_most("Q(h_j)_grid_vs_closed_form", max_gap, 1e-10));
    let tail_min = (5..=100).map(|j| tail_bound(Dim::One, j).value).fold(f64::INFINITY, f64::min);
    out.push(Check::above("tail_bound_min_5<=j<=100", tail_min, 0.0));
    out.push(Check::holds("tail_bound_not_positive_at_j=4", tail_bound(Dim::One, 4).value <= 0.0));

    let form2 = QuadForm::new(Dim::Two, 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b, c) = (z(), z(), z());
        let mut s = SpectralState::zeros(Dim::Two, 4);
        *s.coeff_mut(EigenIndex::Two(0, 2))? = a;
        *s.coeff_mut(EigenIndex::Two(2, 0))? = b;
        *s.coeff_mut(EigenIndex::Two(1, 1))? = c;
        // π(¼|α−β|² + ½|γ|²)
        let oracle = PI * (0.25 * (a - b).norm_sqr() + 0.5 * c.norm_sqr());
        worst = worst.max((form2.eval(&s)? - oracle).abs()).max((q_level2_2d(a, b, c) - oracle).abs());
    }
    out.push(Check::at_most("level2_closed_form_max_abs", worst, 1e-10));
    for (dim, cutoff) in [(Dim::One, 8), (Dim::Two, 4)] {
        let slope = second_order_exponent(dim, cutoff, 20, 99)?;
        out.push(Check::at_least(format!("second_order_remainder_exponent[{}]", dim.n()), slope, 2.9));
    }
    Ok(out)
}

/// Table entries at three decimals, listed for `j ≤ m/2`; the rest follow from `𝓕(m,j) = 𝓕(m,m−j)`.
pub const PUBLISHED_TABLE: [(usize, &[f64]); 4] = [
    (3, &[0.841, 0.591]),
    (4, &[0.785, 0.5, 0.664]),
    (5, &[0.718, 0.492, 0.573]),
    (6, &[0.673, 0.454, 0.563, 0.495]),
];

pub fn published_table_value(m: usize, j: usize) -> Option<f64> {
    let (_, row) = PUBLISHED_TABLE.iter().find(|(mm, _)| *mm == m)?;
    row.get(j.min(m - j)).copied()
}

fn coefficient_table() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (m, _) in PUBLISHED_TABLE {
        for j in 0..=m {
            let published = published_table_value(m, j).expect("row present");
            let v = f_script(m, j);
            out.push(Check::new(format!("F({m},{j})"), v, published, 1e-3, matches_three_decimals(v, published)));
        }
    }
    Ok(out)
}

fn coercivity() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (dim, base) in [(Dim::One, 64), (Dim::Two, 24)] {
        let n = dim.n();
        let lo = coercivity_certificate(dim, base)?;
        let hi = coercivity_certificate(dim, 2 * base)?;
        if dim == Dim::One {
            out.push(Check::close("c_min[1]", lo.c_min, 2.0 / (3.0 * 3f64.sqrt()), 1e-6));
        } else {
            out.push(Check::above("c_min[2]", lo.c_min, 0.0));
        }
        out.push(Check::relative(format!("c_min_doubling[{n}]"), hi.c_min, lo.c_min, 0.05));
        for r in [&lo, &hi] {
            let worst = r.kernel_residuals.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
            out.push(Check::at_most(format!("kernel_residual[{n}, cutoff {}]", r.cutoff), worst, 1e-8));
            out.push(Check::at_most(format!("off_level_entries[{n}, cutoff {}]", r.cutoff), r.max_off_level, 1e-10));
            out.push(Check::holds(format!("certified[{n}, cutoff {}]", r.cutoff), r.certified));
        }
    }
    Ok(out)
}

fn combinatorics() -> Result<Vec<Check>> {
    let central = central_binomial_bound_check(25);
    let comb = combinatorics_check(25);
    Ok(vec![
        Check::holds("central_binomial_m<=25", central.all_hold),
        Check::holds("central_binomial_equality_only_at_m=1", central.equality_at == vec![1]),
        Check::holds("combinatorics_m<=25_all_j", comb.all_hold),
        Check::at_least("combinatorics_rows", comb.rows.len() as f64, (1..=25).map(|m| m + 1).sum::<usize>() as f64),
    ])
}

fn simulation_expansion() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for dim in dims() {
        for gamma in [1.0, -1.0] {
            let start = Instant::now();
            let r = expansion_experiment(dim, gamma, &[0.2, 0.1, 0.05], Resolution::default_for(dim))?;
            let ms = start.elapsed().as_secs_f64() * 1000.0;
            let reference = gamma * d_oracle(dim);
            let tag = format!("[{}, {:+}]", dim.n(), gamma);
            out.push(Check::relative(format!("extrapolated_D{tag}"), r.extrapolated, reference, 0.10));
            let last = r.rows.last().expect("three rows").d_hat;
            out.push(Check::relative(format!("D_hat(0.05){tag}"), last, reference, 0.25));
            out.push(Check::at_most(format!("elapsed_ms{tag}"), ms, 300_000.0));
        }
    }
    Ok(out)
}

fn solver_properties() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for dim in dims() {
        for gamma in [1.0, -1.0] {
            let steps = if dim == Dim::One { 4096 } else { 1024 };
            let config = SimConfig::new(dim, 0.2, gamma).with_resolution(crate::sim::default_cutoff(dim), steps);
            let initial = gaussian_datum(dim, config.cutoff).scaled(Complex64::new(0.2, 0.0));
            let drift = mass_drift(&config, &initial)?;
            out.push(Check::at_most(format!("mass_drift[{}, {:+}]", dim.n(), gamma), drift, 1e-9));
        }
    }
    for (dim, cutoff) in [(Dim::One, 32), (Dim::Two, 24)] {
        let r = splitting_order_study(dim, 1.0, 0.3, cutoff, &[128, 256, 512])?;
        for (k, ratio) in r.ratios.iter().enumerate() {
            out.push(Check::close(format!("splitting_ratio[{}, {k}]", dim.n()), *ratio, 4.0, 0.5));
        }
    }
    for (dim, bound) in [(Dim::One, 8.8), (Dim::Two, 4.8)] {
        let r = perturbation_order_check(dim, 1.0, &[0.2, 0.1, 0.05], Resolution::default_for(dim))?;
        out.push(Check::at_least(format!("perturbation_slope[{}]", dim.n()), r.slope, bound));
    }
    Ok(out)
}

fn symmetry_properties() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (dim, cutoff) in [(Dim::One, 12), (Dim::Two, 6)] {
        let form = QuadForm::new(dim, cutoff)?;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let phi = random_state(dim, cutoff, &mut rng)?;
            let q = form.eval(&phi)?;
            for tau in [0.3, 1.0, FRAC_PI_2] {
                let moved = form.eval(&level_rotation(&phi, tau))?;
                worst = worst.max((moved - q).abs() / q.abs().max(1e-300));
            }
        }
        out.push(Check::at_most(format!("Q_invariance_max_rel[{}]", dim.n()), worst, 1e-9));

        let mut gap: f64 = 0.0;
        for _ in 0..20 {
            let phi = random_state(dim, cutoff, &mut rng)?;
            let tau = rng.gen_range(-PI..PI);
            let lhs = harmonic_propagate(&phi, PI + tau);
            let phase = Complex64::from_polar(1.0, -dim.f() * FRAC_PI_2);
            let rhs = harmonic_propagate(&phi.reflected(), tau).scaled(phase);
            gap = gap.max(lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        out.push(Check::at_most(format!("half_period_identity[{}]", dim.n()), gap, 1e-12));
    }
    Ok(out)
}

fn gauge() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let delta: f64 = 0.1;
    for dim in dims() {
        let n = dim.n();
        let cutoff = if dim == Dim::One { 32 } else { 24 };
        let r = phi_residual(delta, &SymmetryParams::identity(dim), &gaussian_datum(dim, cutoff))?;
        let worst = r.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
        out.push(Check::at_most(format!("residual_at_reference[{n}]"), worst, 1e-8));

        let jac = jacobian_at_reference(delta, dim)?;
        let tol = (1.0 * delta * delta).max(1e-3);
        out.push(Check::at_most(format!("jacobian_vs_appendix[{n}]"), (&jac - leading_jacobian(dim)).amax(), tol));

        let planted = match dim {
            Dim::One => SymmetryParams { theta: 0.06, rho: 1.07, xi: vec![-0.05], x0: vec![0.08], t0: 0.0 },
            Dim::Two => {
                SymmetryParams { theta: -0.04, rho: 0.94, xi: vec![0.03, -0.06], x0: vec![-0.05, 0.07], t0: 0.0 }
            }
        };
        let f = planted_datum(&planted, dim, cutoff)?;
        let fit = newton_gauge_fix(delta, &f, 1e-10)?;
        out.push(Check::at_most(format!("newton_round_trip[{n}]"), fit.params.distance(&planted), 1e-6));
    }
    Ok(out)
}
