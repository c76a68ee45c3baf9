//! One function per subcommand, each returning a report and an optional CSV projection.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};
use strichartz::acceptance::{self, published_table_value, Check, CRITERIA};
use strichartz::constants::{constant_reports, d2_closed, d1_series, strichartz_constant};
use strichartz::gauge::{decompose_datum, ortho_moments, Gauge};
use strichartz::gaussian::gaussian_datum;
use strichartz::hermite::{
    alpha_coefficient, alpha_coefficient_quadrature, gauss_hermite_rule, overlap_table, wang_diagonal, Dim,
    EigenIndex, SpectralState,
};
use strichartz::io::{parse_datum_json, parse_number_list, trajectory_csv};
use strichartz::quadform::{
    central_binomial_bound_check, coercivity_certificate, combinatorics_check, f_table, kernel_directions,
    matches_three_decimals, q_diag_1d, q_diag_2d, tail_bound, QuadForm,
};
use strichartz::sim::{
    default_cutoff, evolve, expansion_experiment, mass_drift, perturbation_order_check, spacetime_norm,
    strichartz_functional, Resolution, SimConfig, DEFAULT_STEPS,
};

use crate::report::Report;
use crate::{usage, Settings};

pub struct CommandResult {
    pub report: Report,
    pub csv: Option<String>,
}

type Outcome = anyhow::Result<CommandResult>;

fn json_only(report: Report) -> Outcome {
    Ok(CommandResult { report, csv: None })
}

fn dims(settings: &Settings) -> Vec<Dim> {
    match settings.dim {
        Some(d) => vec![d],
        None => vec![Dim::One, Dim::Two],
    }
}

fn dim_or_one(settings: &Settings) -> Dim {
    settings.dim.unwrap_or(Dim::One)
}

fn reference_d(dim: Dim) -> f64 {
    match dim {
        Dim::One => 0.0867,
        Dim::Two => 0.0458,
    }
}

fn theorem_constants() -> Value {
    json!({
        "Theorem 1": {
            "C_S[1]": 1.0 / 3f64.sqrt(),
            "C_S[2]": 0.5,
            "D_1": 0.0867,
            "D_2": 0.0458,
        }
    })
}

pub fn constants(settings: &Settings) -> Outcome {
    let terms = settings.terms.unwrap_or(200);
    let tol = settings.tol.unwrap_or(1e-8);
    let mut report = Report::new("constants");
    report.inputs = json!({ "dims": dims(settings).iter().map(|d| d.n()).collect::<Vec<_>>(), "terms": terms, "tol": tol });
    let mut outputs = serde_json::Map::new();
    for dim in dims(settings) {
        let n = dim.n();
        let rows = constant_reports(dim, terms, tol)?;
        for r in &rows {
            report.checks.push(Check::at_most(format!("{}[{n}]_discrepancy", r.name), r.discrepancy, r.tolerance));
        }
        report.checks.push(Check::close(
            format!("C_S[{n}]_closed_form"),
            strichartz_constant(dim),
            match dim {
                Dim::One => 1.0 / 3f64.sqrt(),
                Dim::Two => 0.5,
            },
            1e-15,
        ));
        let d = match dim {
            Dim::One => d1_series(terms)?,
            Dim::Two => d2_closed(),
        };
        report.checks.push(Check::close(format!("D_{n}_vs_published"), d, reference_d(dim), 5e-5));
        outputs.insert(format!("dim{n}"), serde_json::to_value(&rows)?);
    }
    report.outputs = Value::Object(outputs);
    report.references = theorem_constants();
    json_only(report)
}

pub fn hermite(settings: &Settings) -> Outcome {
    let cutoff = settings.cutoff.unwrap_or(30);
    let tol = settings.tol.unwrap_or(1e-10);
    let mut report = Report::new("hermite");
    report.inputs = json!({ "cutoff": cutoff, "tol": tol });

    let table = overlap_table(1.0, cutoff)?;
    let m = cutoff + 1;
    let mut wang = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..=cutoff {
        let closed = wang_diagonal(j);
        let quad = table[j * m + j];
        worst = worst.max((closed - quad).abs() / closed);
        wang.push(json!({ "j": j, "closed_form": closed, "quadrature": quad }));
    }
    report.checks.push(Check::at_most("wang_diagonal_max_rel", worst, tol));

    let mut alphas = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..=cutoff / 2 {
        let closed = alpha_coefficient(j);
        let quad = alpha_coefficient_quadrature(2 * j)?;
        worst = worst.max((closed - quad).abs());
        alphas.push(json!({ "k": 2 * j, "closed_form": closed, "quadrature": quad }));
    }
    report.checks.push(Check::at_most("alpha_max_abs", worst, tol.max(1e-9)));

    let rule = gauss_hermite_rule(8)?;
    let mut moments = serde_json::Map::new();
    for dim in [Dim::One, Dim::Two] {
        let nf = dim.f();
        let a: Vec<f64> =
            (0..3).map(|k| rule.integrate_plain(|y| (-y * y).exp() * y.powi(2 * k) / PI.sqrt())).collect();
        let (m0, m2, m4) = match dim {
            Dim::One => (a[0], a[1], a[2]),
            Dim::Two => (a[0] * a[0], 2.0 * a[1] * a[0], 2.0 * a[2] * a[0] + 2.0 * a[1] * a[1]),
        };
        let n = dim.n();
        report.checks.push(Check::close(format!("moment0[{n}]"), m0, 1.0, tol));
        report.checks.push(Check::close(format!("moment2[{n}]"), m2, nf / 2.0, tol));
        report.checks.push(Check::close(format!("moment4[{n}]"), m4, nf * (nf + 2.0) / 4.0, tol));
        moments.insert(format!("dim{n}"), json!([m0, m2, m4]));
    }

    report.outputs = json!({ "wang_diagonal": wang, "alpha": alphas, "gaussian_moments": moments });
    report.references = json!({
        "Wang product formula": "∫ e^{-y²} h_j² = (2j)!/(2^{2j}(j!)²) √(π/2)",
        "Gaussian moments": [1.0, "N/2", "N(N+2)/4"],
    });
    json_only(report)
}

pub fn qform(settings: &Settings) -> Outcome {
    let dim = dim_or_one(settings);
    let n = dim.n();
    let cutoff = settings.cutoff.unwrap_or(match dim {
        Dim::One => 100,
        Dim::Two => 8,
    });
    if cutoff < 4 {
        return Err(usage("qform needs --cutoff ≥ 4"));
    }
    let tol = settings.tol.unwrap_or(1e-8);
    let mut report = Report::new("qform");
    report.inputs = json!({ "dim": n, "cutoff": cutoff, "tol": tol });

    let form = QuadForm::new(dim, cutoff)?;
    let kernel: Vec<f64> = kernel_directions(dim, cutoff)?
        .iter()
        .map(|k| form.eval(k))
        .collect::<strichartz::Result<_>>()?;
    let worst = kernel.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    report.checks.push(Check::at_most("kernel_max_abs_Q", worst, tol));

    let mut diag = Vec::new();
    let mut gap: f64 = 0.0;
    let mut min_q = f64::INFINITY;
    match dim {
        Dim::One => {
            for j in 3..=cutoff {
                let q = form.eval(&SpectralState::unit(EigenIndex::One(j), cutoff)?)?;
                let closed = q_diag_1d(j)?;
                gap = gap.max((q - closed).abs());
                min_q = min_q.min(q);
                diag.push(json!({ "j": j, "Q": q, "closed_form": closed, "tail_bound": tail_bound(dim, j).value }));
            }
            let s3 = 3f64.sqrt();
            report.checks.push(Check::close("Q(h_3)", diag[0]["Q"].as_f64().unwrap_or(f64::NAN), 2.0 * PI.sqrt() / (3.0 * s3), 1e-10));
            report.checks.push(Check::close("Q(h_4)", diag[1]["Q"].as_f64().unwrap_or(f64::NAN), 8.0 * PI.sqrt() / (9.0 * s3), 1e-10));
        }
        Dim::Two => {
            for j in 0..=cutoff {
                for k in 0..=cutoff - j {
                    if j + k < 3 {
                        continue;
                    }
                    let q = form.eval(&SpectralState::unit(EigenIndex::Two(j, k), cutoff)?)?;
                    let closed = q_diag_2d(j, k)?;
                    gap = gap.max((q - closed).abs());
                    min_q = min_q.min(q);
                    diag.push(json!({ "j": j, "k": k, "Q": q, "closed_form": closed }));
                }
            }
        }
    }
    report.checks.push(Check::above("min_Q_off_kernel_levels", min_q, 0.0));
    report.checks.push(Check::at_most("Q_vs_closed_form_max_abs", gap, 1e-10));

    report.outputs = json!({ "kernel_Q": kernel, "diagonal": diag });
    report.references = json!({
        "Theorem 2": { "Q(h_3)": 2.0 * PI.sqrt() / (3.0 * 3f64.sqrt()), "Q(h_4)": 8.0 * PI.sqrt() / (9.0 * 3f64.sqrt()) },
    });
    json_only(report)
}

pub fn table_f(settings: &Settings) -> Outcome {
    let m_min = settings.m_min.unwrap_or(3);
    let m_max = settings.m_max.unwrap_or(6);
    if m_max > 200 {
        return Err(usage("--m-max must be ≤ 200"));
    }
    let mut report = Report::new("table-f");
    report.inputs = json!({ "m_min": m_min, "m_max": m_max });
    let rows = f_table(m_min, m_max);
    let mut csv = String::from("m,j,value\n");
    let mut published = serde_json::Map::new();
    for r in &rows {
        csv.push_str(&format!("{},{},{:.15e}\n", r.m, r.j, r.value));
        if let Some(p) = published_table_value(r.m, r.j) {
            report.checks.push(Check::new(
                format!("F({},{})", r.m, r.j),
                r.value,
                p,
                1e-3,
                matches_three_decimals(r.value, p),
            ));
            published.insert(format!("F({},{})", r.m, r.j), json!(p));
        }
    }
    report.outputs = json!({ "rows": rows });
    report.references = json!({ "Table 1": published });
    Ok(CommandResult { report, csv: Some(csv) })
}

pub fn coercivity(settings: &Settings) -> Outcome {
    let dim = dim_or_one(settings);
    let n = dim.n();
    let cutoff = settings.cutoff.unwrap_or(match dim {
        Dim::One => 64,
        Dim::Two => 24,
    });
    let tol = settings.tol.unwrap_or(1e-6);
    let mut report = Report::new("coercivity");
    report.inputs = json!({ "dim": n, "cutoff": cutoff, "tol": tol });
    let cert = coercivity_certificate(dim, cutoff)?;
    if dim == Dim::One {
        report.checks.push(Check::close("c_min", cert.c_min, 2.0 / (3.0 * 3f64.sqrt()), tol));
    } else {
        report.checks.push(Check::above("c_min", cert.c_min, 0.0));
    }
    let worst = cert.kernel_residuals.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    report.checks.push(Check::at_most("kernel_residual_max", worst, 1e-8));
    report.checks.push(Check::at_most("off_level_max", cert.max_off_level, 1e-10));
    report.checks.push(Check::holds("certified", cert.certified));
    report.outputs = serde_json::to_value(&cert)?;
    report.references = json!({ "Theorem 2": { "c_min[1]": 2.0 / (3.0 * 3f64.sqrt()) } });
    json_only(report)
}

pub fn combinatorics(settings: &Settings) -> Outcome {
    let m_max = settings.m_max.unwrap_or(25);
    if m_max > 400 {
        return Err(usage("--m-max must be ≤ 400"));
    }
    let mut report = Report::new("combinatorics");
    report.inputs = json!({ "m_max": m_max });
    let central = central_binomial_bound_check(m_max as u64);
    let comb = combinatorics_check(m_max as u64);
    report.checks.push(Check::holds("central_binomial_bound", central.all_hold));
    report.checks.push(Check::holds("central_binomial_equality_only_at_m=1", m_max == 0 || central.equality_at == vec![1]));
    report.checks.push(Check::holds("combinatorics_bound", comb.all_hold));
    report.outputs = json!({ "central_binomial": central, "combinatorics": comb });
    report.references = json!({ "Lemma (central binomial)": "C(2m,m)² (3m+1) ≤ 16^m, equality at m = 1" });
    json_only(report)
}

fn sim_config(settings: &Settings, dim: Dim) -> anyhow::Result<SimConfig> {
    let delta = settings.delta.unwrap_or(0.1);
    let gamma = settings.gamma.unwrap_or(1.0);
    let cutoff = settings.cutoff.unwrap_or(default_cutoff(dim));
    let steps = settings.steps.unwrap_or(DEFAULT_STEPS);
    let config = SimConfig::new(dim, delta, gamma).with_resolution(cutoff, steps);
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

pub fn simulate(settings: &Settings) -> Outcome {
    let dim = dim_or_one(settings);
    let config = sim_config(settings, dim)?;
    let tol = settings.tol.unwrap_or(1e-9);
    let p = dim.strichartz_exponent();
    let mut report = Report::new("simulate");
    report.inputs = json!({
        "dim": dim.n(), "delta": config.delta, "gamma": config.gamma,
        "cutoff": config.cutoff, "steps": config.steps, "tol": tol,
    });
    let (s_hat, drift, csv) = if settings.csv {
        let traj = evolve(&config)?;
        (spacetime_norm(&traj, p)?, traj.max_mass_drift(), Some(trajectory_csv(&traj)))
    } else {
        let initial = gaussian_datum(dim, config.cutoff).scaled(Complex64::new(config.delta, 0.0));
        (strichartz_functional(&config)?, mass_drift(&config, &initial)?, None)
    };
    let cs = strichartz_constant(dim);
    let d_hat = (s_hat - cs * config.delta.powf(p)) / config.delta.powf(2.0 + 8.0 / dim.f());
    report.checks.push(Check::at_most("mass_drift", drift, tol));
    report.outputs = json!({ "S_hat": s_hat, "D_hat": d_hat, "mass_drift": drift, "linear_value": cs * config.delta.powf(p) });
    report.references = json!({ "Theorem 1": { "gamma_D": config.gamma * reference_d(dim) } });
    Ok(CommandResult { report, csv })
}

fn deltas(settings: &Settings) -> anyhow::Result<Vec<f64>> {
    match (&settings.deltas, settings.delta) {
        (Some(d), _) => Ok(d.clone()),
        (None, Some(_)) => Err(usage("use --deltas for a list of δ values")),
        (None, None) => Ok(parse_number_list("0.2,0.1,0.05")?),
    }
}

fn resolution(settings: &Settings, dim: Dim) -> Resolution {
    let base = Resolution::default_for(dim);
    Resolution { cutoff: settings.cutoff.unwrap_or(base.cutoff), steps: settings.steps.unwrap_or(base.steps) }
}

pub fn expansion(settings: &Settings) -> Outcome {
    let dim = dim_or_one(settings);
    let gamma = settings.gamma.unwrap_or(1.0);
    let deltas = deltas(settings)?;
    let res = resolution(settings, dim);
    let tol = settings.tol.unwrap_or(0.10);
    let mut report = Report::new("expansion");
    report.inputs = json!({
        "dim": dim.n(), "gamma": gamma, "deltas": deltas, "cutoff": res.cutoff, "steps": res.steps, "tol": tol,
    });
    let r = expansion_experiment(dim, gamma, &deltas, res)?;
    report.checks.push(Check::relative("D_extrapolated", r.extrapolated, r.reference, tol));
    let last = r.rows.last().map(|row| row.d_hat).unwrap_or(f64::NAN);
    report.checks.push(Check::relative("D_hat_smallest_delta", last, r.reference, 0.25));
    let mut csv = String::from("delta,s_hat,d_hat\n");
    for row in &r.rows {
        csv.push_str(&format!("{:.15e},{:.15e},{:.15e}\n", row.delta, row.s_hat, row.d_hat));
    }
    report.outputs = serde_json::to_value(&r)?;
    report.references = json!({ "Theorem 1": { "gamma_D": gamma * reference_d(dim) } });
    Ok(CommandResult { report, csv: Some(csv) })
}

pub fn perturbation(settings: &Settings) -> Outcome {
    let dim = dim_or_one(settings);
    let gamma = settings.gamma.unwrap_or(1.0);
    let deltas = deltas(settings)?;
    let res = resolution(settings, dim);
    let slack = settings.tol.unwrap_or(0.2);
    let mut report = Report::new("perturbation");
    report.inputs = json!({
        "dim": dim.n(), "gamma": gamma, "deltas": deltas, "cutoff": res.cutoff, "steps": res.steps, "tol": slack,
    });
    let r = perturbation_order_check(dim, gamma, &deltas, res)?;
    report.checks.push(Check::at_least("fitted_slope", r.slope, r.expected_slope - slack));
    let mut csv = String::from("delta,error,error_over_delta\n");
    for row in &r.rows {
        csv.push_str(&format!("{:.15e},{:.15e},{:.15e}\n", row.delta, row.error, row.error_over_delta));
    }
    report.outputs = serde_json::to_value(&r)?;
    report.references = json!({ "Lemma (Duhamel expansion)": { "slope": 1.0 + 8.0 / dim.f() } });
    Ok(CommandResult { report, csv: Some(csv) })
}

pub fn gauge_fix(settings: &Settings, datum: Option<&Path>) -> Outcome {
    let f = match datum {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            parse_datum_json(&text)?
        }
        None => {
            let dim = dim_or_one(settings);
            gaussian_datum(dim, settings.cutoff.unwrap_or(strichartz::gauge::GaugeSettings::new(dim).cutoff))
        }
    };
    let dim = f.dim();
    if settings.dim.is_some_and(|d| d != dim) {
        return Err(usage(format!("--dim {} disagrees with the datum dimension {}", settings.dim.map_or(0, Dim::n), dim.n())));
    }
    let delta = settings.delta.unwrap_or(0.1);
    let tol = settings.tol.unwrap_or(1e-10);
    let mut gauge_settings = strichartz::gauge::GaugeSettings::new(dim);
    if let Some(g) = settings.gamma {
        gauge_settings.gamma = g;
    }
    if let Some(s) = settings.steps {
        gauge_settings.steps = s;
    }
    let gauge = Gauge::with_settings(dim, delta, gauge_settings)?;
    let mut report = Report::new("gauge-fix");
    report.inputs = json!({
        "dim": dim.n(), "delta": delta, "tol": tol, "datum_cutoff": f.cutoff(),
        "settings": gauge.settings(),
    });
    let fit = gauge.solve(&f, tol)?;
    let moved = gauge.transformed_datum(&fit.params, &f, f.cutoff().max(gauge.settings().cutoff))?;
    let decomposition = decompose_datum(&moved);
    let moments = ortho_moments(&decomposition.phi)?;
    let moment_max = moments.iter().fold(0.0, |a: f64, m| a.max(m.norm()));
    report.checks.push(Check::at_most("residual_norm", fit.residual_norm, tol));
    report.outputs = json!({
        "fit": fit,
        "alpha": decomposition.alpha,
        "orthogonality_moments_max_abs": moment_max,
    });
    report.references = json!({ "Appendix A": "moment conditions Φ_δ = 0" });
    json_only(report)
}

pub fn selftest(only: Option<&str>) -> Outcome {
    let ids: Vec<usize> = match only {
        Some(text) => {
            let values = parse_number_list(text).map_err(|e| usage(format!("--only: {e}")))?;
            let mut ids = Vec::new();
            for v in values {
                let id = v as usize;
                if v.fract() != 0.0 || !CRITERIA.iter().any(|(i, _)| *i == id) {
                    return Err(usage(format!("--only: no criterion {v}")));
                }
                ids.push(id);
            }
            ids
        }
        None => CRITERIA.iter().map(|(i, _)| *i).collect(),
    };
    let mut report = Report::new("selftest");
    report.inputs = json!({ "criteria": ids });
    let mut outcomes = Vec::new();
    for id in &ids {
        let outcome = acceptance::run_criterion(*id);
        eprintln!("{}", outcome.summary_line());
        for c in &outcome.checks {
            let mut c = c.clone();
            c.name = format!("c{id}.{}", c.name);
            report.checks.push(c);
        }
        if let Some(e) = &outcome.error {
            report.checks.push(Check::new(format!("c{id}.error: {e}"), f64::NAN, 0.0, 0.0, false));
        }
        outcomes.push(json!({ "id": id, "title": outcome.title, "pass": outcome.pass() }));
    }
    report.outputs = json!({ "criteria": outcomes });
    json_only(report)
}
