//! Text formats: spectral data as JSON, run configuration files, number lists
//! and trajectory tables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{Dim, SpectralState};
use crate::sim::Trajectory;

/// One coefficient, written either as a real number or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl CoeffRepr {
    fn value(self) -> Complex64 {
        match self {
            CoeffRepr::Real(re) => Complex64::new(re, 0.0),
            CoeffRepr::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Serialized spectral datum. Coefficients are listed in index order
/// (`n` in 1D, `(j, k)` row-major in 2D); `cutoff` is inferred when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumFile {
    pub dim: Dim,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub coeffs: Vec<CoeffRepr>,
}

/// Largest cutoff accepted from text input.
pub const MAX_CUTOFF: usize = 512;

impl DatumFile {
    pub fn from_state(state: &SpectralState) -> DatumFile {
        DatumFile {
            dim: state.dim(),
            cutoff: Some(state.cutoff()),
            coeffs: state.coeffs().iter().map(|c| CoeffRepr::Complex([c.re, c.im])).collect(),
        }
    }

    pub fn to_state(&self) -> Result<SpectralState> {
        let len = self.coeffs.len();
        let per_dim = match self.dim {
            Dim::One => len,
            Dim::Two => {
                let r = (len as f64).sqrt().round() as usize;
                if r * r != len {
                    return Err(Error::Parse(format!("{len} coefficients do not form a square 2D array")));
                }
                r
            }
        };
        if per_dim == 0 {
            return Err(Error::Parse("a datum needs at least one coefficient".into()));
        }
        let cutoff = per_dim - 1;
        if let Some(c) = self.cutoff {
            if c != cutoff {
                return Err(Error::Parse(format!("cutoff {c} does not match {len} coefficients")));
            }
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::Parse(format!("cutoff {cutoff} exceeds {MAX_CUTOFF}")));
        }
        let coeffs: Vec<Complex64> = self.coeffs.iter().map(|c| c.value()).collect();
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Parse("coefficients must be finite".into()));
        }
        SpectralState::from_coeffs(self.dim, cutoff, coeffs)
    }
}

pub fn parse_datum_json(text: &str) -> Result<SpectralState> {
    let file: DatumFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_state()
}

pub fn datum_to_json(state: &SpectralState) -> String {
    serde_json::to_string(&DatumFile::from_state(state)).expect("datum serializes")
}

/// Optional run settings read from a configuration file. Keys mirror the
/// command-line flags; absent keys leave the defaults in place.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub dim: Option<Dim>,
    pub cutoff: Option<usize>,
    pub steps: Option<usize>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub terms: Option<usize>,
    #[serde(alias = "m_min")]
    pub m_min: Option<usize>,
    #[serde(alias = "m_max")]
    pub m_max: Option<usize>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parse(format!("{name} must be finite")))
            }
        };
        if let Some(d) = self.delta {
            finite("delta", d)?;
            if d <= 0.0 {
                return Err(Error::Parse(format!("delta must be positive, got {d}")));
            }
        }
        if let Some(ds) = &self.deltas {
            if ds.is_empty() {
                return Err(Error::Parse("deltas must not be empty".into()));
            }
            for &d in ds {
                finite("deltas", d)?;
                if d <= 0.0 {
                    return Err(Error::Parse(format!("deltas must be positive, got {d}")));
                }
            }
        }
        if let Some(g) = self.gamma {
            if g != 1.0 && g != -1.0 {
                return Err(Error::Parse(format!("gamma must be +1 or -1, got {g}")));
            }
        }
        if let Some(t) = self.tol {
            finite("tol", t)?;
            if t <= 0.0 {
                return Err(Error::Parse(format!("tol must be positive, got {t}")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.m_min, self.m_max) {
            if lo > hi {
                return Err(Error::Parse(format!("m-min {lo} exceeds m-max {hi}")));
            }
        }
        if let Some(c) = self.cutoff {
            if c > MAX_CUTOFF {
                return Err(Error::Parse(format!("cutoff {c} exceeds {MAX_CUTOFF}")));
            }
        }
        Ok(())
    }
}

pub fn parse_config_json(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Finite numbers separated by commas and/or whitespace, e.g. `0.2, 0.1 0.05`.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("not finite: {s:?}")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::Parse("empty number list".into()));
    }
    Ok(values)
}

/// `tau,mass,relative_drift` rows, one per step boundary.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let m0 = traj.masses[traj.config.steps / 2];
    let mut out = String::from("tau,mass,relative_drift\n");
    for (tau, mass) in traj.taus().iter().zip(&traj.masses) {
        out.push_str(&format!("{tau:.15e},{mass:.15e},{:.6e}\n", (mass - m0).abs() / m0));
    }
    out
}
