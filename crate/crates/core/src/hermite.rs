//! Hermite functions, harmonic-oscillator eigenbasis and Gauss–Hermite transforms.
//!
//! Hermite functions are normalized so that `‖h_n‖²_{L²} = √π`; a 2D basis
//! element is the tensor product `h_{jk}(y) = h_j(y₁) h_k(y₂)`. All
//! coefficient formulas in the crate assume this normalization.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension. Only 1 and 2 are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn new(n: usize) -> Result<Dim> {
        match n {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {n}"))),
        }
    }

    pub fn n(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn f(self) -> f64 {
        self.n() as f64
    }

    /// Exponent `2 + 4/N` of the critical space-time norm.
    pub fn strichartz_exponent(self) -> f64 {
        2.0 + 4.0 / self.f()
    }
}

impl TryFrom<u8> for Dim {
    type Error = Error;
    fn try_from(v: u8) -> Result<Dim> {
        Dim::new(v as usize)
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.n() as u8
    }
}

/// Index of a harmonic-oscillator eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EigenIndex {
    One(usize),
    Two(usize, usize),
}

impl EigenIndex {
    pub fn dim(self) -> Dim {
        match self {
            EigenIndex::One(_) => Dim::One,
            EigenIndex::Two(..) => Dim::Two,
        }
    }

    /// Total degree `n` or `j + k`.
    pub fn level(self) -> usize {
        match self {
            EigenIndex::One(n) => n,
            EigenIndex::Two(j, k) => j + k,
        }
    }

    /// Eigenvalue of `-Δ + |y|²`: `2n+1` in 1D, `2(j+k)+2` in 2D.
    pub fn eigenvalue(self) -> f64 {
        (2 * self.level() + self.dim().n()) as f64
    }

    pub fn max_component(self) -> usize {
        match self {
            EigenIndex::One(n) => n,
            EigenIndex::Two(j, k) => j.max(k),
        }
    }
}

// ---------------------------------------------------------------------------
// factorials

const LN_FACT_TABLE: usize = 2048;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_fact_table()[n];
    }
    // Stirling series, error below 1e-17 relative for n >= 2048.
    let x = n as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

// ---------------------------------------------------------------------------
// Hermite functions

const RESCALE: f64 = 1e150;

/// Fills `out[n] = h_n(y)` for `n < out.len()` with the normalized three-term
/// recurrence. The Gaussian factor is carried as a separate log-scale so large
/// `|y|` underflows to zero instead of producing NaNs.
pub fn hermite_functions_into(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut log_scale = -0.5 * y * y;
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = log_scale.exp();
    for n in 1..out.len() {
        let nf = n as f64;
        let next = (2.0 / nf).sqrt() * y * cur - ((nf - 1.0) / nf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out[n] = cur * log_scale.exp();
    }
}

/// `[h_0(y), ..., h_{n_max}(y)]`.
pub fn hermite_functions(n_max: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    hermite_functions_into(y, &mut out);
    out
}

/// Single 1D Hermite function `h_n(y)`.
pub fn hermite_fn(n: usize, y: f64) -> f64 {
    hermite_functions(n, y)[n]
}

/// `h_n(y)` in 1D or `h_j(y₁)h_k(y₂)` in 2D.
pub fn hermite_function(index: EigenIndex, y: &[f64]) -> Result<f64> {
    match (index, y.len()) {
        (EigenIndex::One(n), 1) => Ok(hermite_fn(n, y[0])),
        (EigenIndex::Two(j, k), 2) => Ok(hermite_fn(j, y[0]) * hermite_fn(k, y[1])),
        (idx, len) => Err(Error::DimensionMismatch(format!(
            "index of dimension {} evaluated at a point of dimension {len}",
            idx.dim().n()
        ))),
    }
}

// ---------------------------------------------------------------------------
// quadrature rules

/// Gauss–Hermite rule for `∫ f(y) e^{-y²} dy ≈ Σ weights[s] f(nodes[s])`.
///
/// `scaled_weights[s] = weights[s]·e^{nodes[s]²}` is kept separately since the
/// plain weights underflow for large orders.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    /// `∫ g(y) dy` for a function `g` that decays like a Gaussian.
    pub fn integrate_plain<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.scaled_weights).map(|(&z, &w)| w * g(z)).sum()
    }
}

fn tridiagonal_eigenvalues(offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = offdiag.len() + 1;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (k, &b) in offdiag.iter().enumerate() {
        jac[(k + 1, k)] = b;
        jac[(k, k + 1)] = b;
    }
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 100 * n.max(10))
        .ok_or(Error::EigenNonConvergence { size: n })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence { size: n });
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values)
}

fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// Gauss–Hermite nodes and weights from the eigenvalues of the symmetric
/// tridiagonal Jacobi matrix of the Hermite recurrence, polished by Newton
/// steps on `h_n`. Weights use the Christoffel form `√π / Σ_{k<n} h_k(z)²`.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    let offdiag: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&offdiag)?;

    let mut h = vec![0.0; order + 1];
    for z in nodes.iter_mut() {
        for _ in 0..3 {
            hermite_functions_into(*z, &mut h);
            let d = (2.0 * order as f64).sqrt() * h[order - 1] - *z * h[order];
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = h[order] / d;
            if !step.is_finite() || step.abs() > 1e-3 {
                break;
            }
            *z -= step;
        }
    }
    symmetrize(&mut nodes);

    let sqrt_pi = PI.sqrt();
    let mut scaled_weights = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for &z in &nodes {
        hermite_functions_into(z, &mut h[..order]);
        let s: f64 = h[..order].iter().map(|v| v * v).sum();
        let w_scaled = sqrt_pi / s;
        scaled_weights.push(w_scaled);
        weights.push(w_scaled * (-z * z).exp());
    }
    Ok(QuadratureRule { order, nodes, weights, scaled_weights })
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct LegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gauss_legendre_rule(order: usize) -> Result<LegendreRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    let offdiag: Vec<f64> = (1..order)
        .map(|k| {
            let kf = k as f64;
            kf / (4.0 * kf * kf - 1.0).sqrt()
        })
        .collect();
    let mut nodes = tridiagonal_eigenvalues(&offdiag)?;
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = legendre_and_derivative(order, *x);
            let step = p / d;
            if !step.is_finite() || step.abs() > 1e-3 {
                break;
            }
            *x -= step;
        }
    }
    symmetrize(&mut nodes);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, d) = legendre_and_derivative(order, x);
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect();
    Ok(LegendreRule { nodes, weights })
}

/// Composite Gauss–Legendre nodes/weights on `[a, b]`.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, per_panel: usize) -> Result<CompositeRule> {
        if panels == 0 {
            return Err(Error::InvalidArgument("need at least one panel".into()));
        }
        let base = gauss_legendre_rule(per_panel)?;
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Ok(CompositeRule { nodes, weights })
    }

    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: Fn(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

// ---------------------------------------------------------------------------
// spectral states

/// Complex coefficients over the eigenbasis. Indices run over `0..=cutoff` in
/// each dimension; 2D coefficients are stored row-major as `[j*(cutoff+1)+k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    dim: Dim,
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    pub fn zeros(dim: Dim, cutoff: usize) -> SpectralState {
        let m = cutoff + 1;
        let len = if dim == Dim::One { m } else { m * m };
        SpectralState { dim, cutoff, coeffs: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_coeffs(dim: Dim, cutoff: usize, coeffs: Vec<Complex64>) -> Result<SpectralState> {
        let m = cutoff + 1;
        let len = if dim == Dim::One { m } else { m * m };
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "expected {len} coefficients for dim {} cutoff {cutoff}, got {}",
                dim.n(),
                coeffs.len()
            )));
        }
        Ok(SpectralState { dim, cutoff, coeffs })
    }

    pub fn unit(index: EigenIndex, cutoff: usize) -> Result<SpectralState> {
        let mut s = SpectralState::zeros(index.dim(), cutoff);
        *s.coeff_mut(index)? = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.cutoff + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    fn offset(&self, index: EigenIndex) -> Result<usize> {
        if index.dim() != self.dim {
            return Err(Error::DimensionMismatch("index dimension differs from state".into()));
        }
        if index.max_component() > self.cutoff {
            return Err(Error::InvalidArgument(format!(
                "index {index:?} beyond cutoff {}",
                self.cutoff
            )));
        }
        Ok(match index {
            EigenIndex::One(n) => n,
            EigenIndex::Two(j, k) => j * self.modes() + k,
        })
    }

    pub fn coeff(&self, index: EigenIndex) -> Result<Complex64> {
        Ok(self.coeffs[self.offset(index)?])
    }

    pub fn coeff_mut(&mut self, index: EigenIndex) -> Result<&mut Complex64> {
        let o = self.offset(index)?;
        Ok(&mut self.coeffs[o])
    }

    /// Eigen-index of each stored coefficient, in storage order.
    pub fn indices(&self) -> Vec<EigenIndex> {
        let m = self.modes();
        match self.dim {
            Dim::One => (0..m).map(EigenIndex::One).collect(),
            Dim::Two => (0..m * m).map(|i| EigenIndex::Two(i / m, i % m)).collect(),
        }
    }

    /// Level `n` (1D) or `j+k` (2D) of each stored coefficient.
    pub fn levels(&self) -> Vec<usize> {
        self.indices().into_iter().map(EigenIndex::level).collect()
    }

    /// Squared norm of a basis element, `π^{N/2}`.
    pub fn basis_norm_sq(dim: Dim) -> f64 {
        PI.powf(dim.f() / 2.0)
    }

    /// `‖φ‖²_{L²} = π^{N/2} Σ |c|²`.
    pub fn mass(&self) -> f64 {
        Self::basis_norm_sq(self.dim) * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Real inner product `Re ∫ φ ψ̄`.
    pub fn inner_real(&self, other: &SpectralState) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(Self::basis_norm_sq(self.dim) * s)
    }

    /// Bilinear pairing `∫ φ ψ` (no conjugation).
    pub fn pairing(&self, other: &SpectralState) -> Result<Complex64> {
        self.check_compatible(other)?;
        let s: Complex64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum();
        Ok(s * Self::basis_norm_sq(self.dim))
    }

    fn check_compatible(&self, other: &SpectralState) -> Result<()> {
        if self.dim != other.dim || self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch(format!(
                "states (dim {}, cutoff {}) and (dim {}, cutoff {})",
                self.dim.n(),
                self.cutoff,
                other.dim.n(),
                other.cutoff
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, a: Complex64) -> SpectralState {
        SpectralState {
            dim: self.dim,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &SpectralState) -> Result<SpectralState> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(SpectralState { dim: self.dim, cutoff: self.cutoff, coeffs })
    }

    pub fn sub(&self, other: &SpectralState) -> Result<SpectralState> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Truncates or zero-pads to a new cutoff.
    pub fn resized(&self, cutoff: usize) -> SpectralState {
        let mut out = SpectralState::zeros(self.dim, cutoff);
        let keep = self.cutoff.min(cutoff) + 1;
        match self.dim {
            Dim::One => out.coeffs[..keep].copy_from_slice(&self.coeffs[..keep]),
            Dim::Two => {
                let (mi, mo) = (self.modes(), out.modes());
                for j in 0..keep {
                    out.coeffs[j * mo..j * mo + keep].copy_from_slice(&self.coeffs[j * mi..j * mi + keep]);
                }
            }
        }
        out
    }

    /// Multiplies each coefficient by `f(level)`.
    pub fn map_levels<F: Fn(usize) -> Complex64>(&self, f: F) -> SpectralState {
        let levels = self.levels();
        let coeffs = self.coeffs.iter().zip(levels).map(|(c, l)| c * f(l)).collect();
        SpectralState { dim: self.dim, cutoff: self.cutoff, coeffs }
    }

    /// `φ(-y)`: parity `(-1)^level` on each coefficient.
    pub fn reflected(&self) -> SpectralState {
        self.map_levels(|l| Complex64::new(if l % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
    }

    pub fn conj(&self) -> SpectralState {
        SpectralState {
            dim: self.dim,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Pointwise evaluation at one point.
    pub fn evaluate(&self, y: &[f64]) -> Result<Complex64> {
        if y.len() != self.dim.n() {
            return Err(Error::DimensionMismatch("point dimension differs from state".into()));
        }
        let hy = hermite_functions(self.cutoff, y[0]);
        Ok(match self.dim {
            Dim::One => self.coeffs.iter().zip(&hy).map(|(c, h)| c * h).sum(),
            Dim::Two => {
                let hz = hermite_functions(self.cutoff, y[1]);
                let m = self.modes();
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    let row: Complex64 =
                        self.coeffs[j * m..(j + 1) * m].iter().zip(&hz).map(|(c, h)| c * h).sum();
                    acc += row * hy[j];
                }
                acc
            }
        })
    }

    /// Values on the tensor grid `axis0 × axis1` (or `axis0` in 1D), row-major.
    pub fn evaluate_tensor(&self, axes: &[&[f64]]) -> Result<Vec<Complex64>> {
        if axes.len() != self.dim.n() {
            return Err(Error::DimensionMismatch("number of axes differs from state dimension".into()));
        }
        let bases: Vec<Vec<f64>> = axes.iter().map(|pts| basis_matrix(pts, self.cutoff)).collect();
        let m = self.modes();
        Ok(match self.dim {
            Dim::One => synth_1d(&bases[0], axes[0].len(), m, &self.coeffs),
            Dim::Two => synth_2d(&bases[0], axes[0].len(), &bases[1], axes[1].len(), m, &self.coeffs),
        })
    }

    /// Spectral `∂/∂y_axis`; the cutoff grows by one.
    pub fn derivative(&self, axis: usize) -> Result<SpectralState> {
        self.ladder(axis, -1.0)
    }

    /// Multiplication by `y_axis`; the cutoff grows by one.
    pub fn times_coordinate(&self, axis: usize) -> Result<SpectralState> {
        self.ladder(axis, 1.0)
    }

    // y h_n = √(n/2) h_{n-1} + √((n+1)/2) h_{n+1};  h_n' = √(n/2) h_{n-1} - √((n+1)/2) h_{n+1}
    fn ladder(&self, axis: usize, lower_sign: f64) -> Result<SpectralState> {
        if axis >= self.dim.n() {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        let src = self.resized(self.cutoff + 1);
        let mut out = SpectralState::zeros(self.dim, self.cutoff + 1);
        let m = out.modes();
        let apply = |get: &dyn Fn(usize) -> Complex64, n: usize| -> Complex64 {
            let mut v = Complex64::new(0.0, 0.0);
            if n + 1 < m {
                v += get(n + 1) * ((n + 1) as f64 / 2.0).sqrt();
            }
            if n >= 1 {
                v += get(n - 1) * (n as f64 / 2.0).sqrt() * lower_sign;
            }
            v
        };
        match (self.dim, axis) {
            (Dim::One, _) => {
                for n in 0..m {
                    out.coeffs[n] = apply(&|i| src.coeffs[i], n);
                }
            }
            (Dim::Two, 0) => {
                for j in 0..m {
                    for k in 0..m {
                        out.coeffs[j * m + k] = apply(&|i| src.coeffs[i * m + k], j);
                    }
                }
            }
            (Dim::Two, _) => {
                for j in 0..m {
                    for k in 0..m {
                        out.coeffs[j * m + k] = apply(&|i| src.coeffs[j * m + i], k);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Fraction of the mass carried by indices above `frac·cutoff` in any direction.
    pub fn tail_fraction(&self, frac: f64) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let start = ((self.cutoff as f64) * frac).floor() as usize;
        let tail: f64 = self
            .indices()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(i, _)| i.max_component() > start)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        tail / total
    }
}

// ---------------------------------------------------------------------------
// transforms

fn basis_matrix(points: &[f64], cutoff: usize) -> Vec<f64> {
    let m = cutoff + 1;
    let mut b = vec![0.0; points.len() * m];
    for (s, &y) in points.iter().enumerate() {
        hermite_functions_into(y, &mut b[s * m..(s + 1) * m]);
    }
    b
}

fn synth_1d(basis: &[f64], q: usize, m: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..q)
        .map(|s| basis[s * m..(s + 1) * m].iter().zip(coeffs).map(|(b, c)| c * b).sum())
        .collect()
}

// V = B0 · C · B1ᵀ
fn synth_2d(b0: &[f64], q0: usize, b1: &[f64], q1: usize, m: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut t = vec![zero; q0 * m];
    for s in 0..q0 {
        let row = &mut t[s * m..(s + 1) * m];
        for j in 0..m {
            let b = b0[s * m + j];
            if b == 0.0 {
                continue;
            }
            for (r, c) in row.iter_mut().zip(&coeffs[j * m..(j + 1) * m]) {
                *r += c * b;
            }
        }
    }
    let mut v = vec![zero; q0 * q1];
    for s in 0..q0 {
        let trow = &t[s * m..(s + 1) * m];
        for u in 0..q1 {
            let brow = &b1[u * m..(u + 1) * m];
            let mut acc = zero;
            for (x, b) in trow.iter().zip(brow) {
                acc += x * b;
            }
            v[s * q1 + u] = acc;
        }
    }
    v
}

/// Samples of a function on a (tensor) quadrature grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSamples {
    pub dim: Dim,
    pub order: usize,
    pub values: Vec<Complex64>,
}

/// Precomputed forward/backward transforms between spectral coefficients and
/// samples at the (possibly rescaled) Gauss–Hermite nodes `y = z/scale`.
///
/// With `scale = 1` and `order ≥ cutoff + 1` the round trip is exact for
/// band-limited states. A scale `σ > 1` makes projections of products of
/// `σ²` Hermite functions exact with about `σ²·cutoff/2` nodes.
#[derive(Clone, Debug)]
pub struct HermiteGrid {
    dim: Dim,
    cutoff: usize,
    scale: f64,
    points: Vec<f64>,
    /// `∫ g(y) dy ≈ Σ weights[s] g(points[s])` in 1D.
    weights: Vec<f64>,
    basis: Vec<f64>,
    proj: Vec<f64>,
}

impl HermiteGrid {
    pub fn new(dim: Dim, cutoff: usize, rule: &QuadratureRule) -> HermiteGrid {
        Self::scaled(dim, cutoff, rule, 1.0)
    }

    pub fn scaled(dim: Dim, cutoff: usize, rule: &QuadratureRule, scale: f64) -> HermiteGrid {
        let q = rule.order;
        let m = cutoff + 1;
        let points: Vec<f64> = rule.nodes.iter().map(|z| z / scale).collect();
        let weights: Vec<f64> = rule.scaled_weights.iter().map(|w| w / scale).collect();
        let basis = basis_matrix(&points, cutoff);
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        let mut proj = vec![0.0; m * q];
        for s in 0..q {
            for n in 0..m {
                proj[n * q + s] = inv_sqrt_pi * weights[s] * basis[s * m + n];
            }
        }
        HermiteGrid { dim, cutoff, scale, points, weights, basis, proj }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights_1d(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        let q = self.order();
        if self.dim == Dim::One {
            q
        } else {
            q * q
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point coordinates in storage order.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let q = self.order();
        match self.dim {
            Dim::One => vec![self.points[idx]],
            Dim::Two => vec![self.points[idx / q], self.points[idx % q]],
        }
    }

    /// Tensor quadrature weight of each grid point for `∫ g(y) dy`.
    pub fn tensor_weights(&self) -> Vec<f64> {
        match self.dim {
            Dim::One => self.weights.clone(),
            Dim::Two => {
                let q = self.order();
                let mut w = Vec::with_capacity(q * q);
                for s in 0..q {
                    for t in 0..q {
                        w.push(self.weights[s] * self.weights[t]);
                    }
                }
                w
            }
        }
    }

    /// `∫ g(y) dy` from real samples on the grid.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                self.len()
            )));
        }
        let q = self.order();
        Ok(match self.dim {
            Dim::One => values.iter().zip(&self.weights).map(|(v, w)| v * w).sum(),
            Dim::Two => (0..q)
                .map(|s| {
                    let row: f64 = values[s * q..(s + 1) * q].iter().zip(&self.weights).map(|(v, w)| v * w).sum();
                    row * self.weights[s]
                })
                .sum(),
        })
    }

    pub fn synthesize(&self, state: &SpectralState) -> Result<GridSamples> {
        if state.dim != self.dim || state.cutoff != self.cutoff {
            return Err(Error::DimensionMismatch(format!(
                "state (dim {}, cutoff {}) on grid (dim {}, cutoff {})",
                state.dim.n(),
                state.cutoff,
                self.dim.n(),
                self.cutoff
            )));
        }
        let q = self.order();
        let m = self.cutoff + 1;
        let values = match self.dim {
            Dim::One => synth_1d(&self.basis, q, m, &state.coeffs),
            Dim::Two => synth_2d(&self.basis, q, &self.basis, q, m, &state.coeffs),
        };
        Ok(GridSamples { dim: self.dim, order: q, values })
    }

    pub fn analyze(&self, samples: &GridSamples) -> Result<SpectralState> {
        let q = self.order();
        if samples.dim != self.dim || samples.order != q || samples.values.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "samples (dim {}, order {}, {} values) on grid (dim {}, order {q})",
                samples.dim.n(),
                samples.order,
                samples.values.len(),
                self.dim.n()
            )));
        }
        let m = self.cutoff + 1;
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = match self.dim {
            Dim::One => (0..m)
                .map(|n| self.proj[n * q..(n + 1) * q].iter().zip(&samples.values).map(|(p, v)| v * p).sum())
                .collect(),
            Dim::Two => {
                // U = P · V  (m × q), C = U · Pᵀ  (m × m)
                let mut u = vec![zero; m * q];
                for n in 0..m {
                    let urow = &mut u[n * q..(n + 1) * q];
                    for s in 0..q {
                        let p = self.proj[n * q + s];
                        if p == 0.0 {
                            continue;
                        }
                        for (x, v) in urow.iter_mut().zip(&samples.values[s * q..(s + 1) * q]) {
                            *x += v * p;
                        }
                    }
                }
                let mut c = vec![zero; m * m];
                for n in 0..m {
                    let urow = &u[n * q..(n + 1) * q];
                    for k in 0..m {
                        let prow = &self.proj[k * q..(k + 1) * q];
                        let mut acc = zero;
                        for (x, p) in urow.iter().zip(prow) {
                            acc += x * p;
                        }
                        c[n * m + k] = acc;
                    }
                }
                c
            }
        };
        Ok(SpectralState { dim: self.dim, cutoff: self.cutoff, coeffs })
    }

    /// Samples `f` at every grid point.
    pub fn sample<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> GridSamples {
        let values = (0..self.len()).map(|i| f(&self.point(i))).collect();
        GridSamples { dim: self.dim, order: self.order(), values }
    }
}

/// Default quadrature order for a given cutoff: `2·cutoff + 8`.
pub fn default_order(cutoff: usize) -> usize {
    2 * cutoff + 8
}

/// Projects grid samples onto the eigenbasis up to `cutoff`.
pub fn analyze(samples: &GridSamples, rule: &QuadratureRule, cutoff: usize) -> Result<SpectralState> {
    if samples.order != rule.order {
        return Err(Error::DimensionMismatch(format!(
            "samples of order {} with a rule of order {}",
            samples.order, rule.order
        )));
    }
    HermiteGrid::new(samples.dim, cutoff, rule).analyze(samples)
}

/// Evaluates a state at the nodes of `rule`.
pub fn synthesize(state: &SpectralState, rule: &QuadratureRule) -> Result<GridSamples> {
    HermiteGrid::new(state.dim(), state.cutoff(), rule).synthesize(state)
}

// ---------------------------------------------------------------------------
// closed forms

/// `∫ e^{-y²} h_j(y)² dy = (2j)!/(2^{2j}(j!)²)·√(π/2)`.
pub fn wang_diagonal(j: usize) -> f64 {
    let ln = ln_factorial(2 * j) - 2.0 * j as f64 * std::f64::consts::LN_2 - 2.0 * ln_factorial(j);
    ln.exp() * (PI / 2.0).sqrt()
}

/// `α_{2j} = (-1)^j √((2j)!) / (3^j √3 j!)`, the coefficient of `h_{2j}` in `e^{-5y²/2}`.
pub fn alpha_coefficient(j: usize) -> f64 {
    let ln = 0.5 * ln_factorial(2 * j) - j as f64 * 3f64.ln() - ln_factorial(j);
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * ln.exp() / 3f64.sqrt()
}

/// Coefficients `c_k = π^{-1/2} ∫ e^{-a y²/2} h_k(y) dy`, `k = 0..=cutoff`, by a
/// rescaled Gauss–Hermite rule that is exact for this integrand.
pub fn gaussian_coefficients(a: f64, cutoff: usize) -> Result<Vec<f64>> {
    if a <= -1.0 {
        return Err(Error::InvalidArgument("Gaussian exponent must exceed -1".into()));
    }
    let rule = gauss_hermite_rule(cutoff / 2 + 2)?;
    // e^{-a y²/2} h_k = e^{-(a+1)y²/2} · poly, so z = y·√((a+1)/2) makes it e^{-z²}·poly.
    let scale = ((a + 1.0) / 2.0).sqrt();
    let mut out = vec![0.0; cutoff + 1];
    let mut h = vec![0.0; cutoff + 1];
    for (&z, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let y = z / scale;
        hermite_functions_into(y, &mut h);
        let g = (-0.5 * a * y * y).exp();
        for (o, hk) in out.iter_mut().zip(&h) {
            *o += w / scale * g * hk;
        }
    }
    let inv = 1.0 / PI.sqrt();
    for o in out.iter_mut() {
        *o *= inv;
    }
    Ok(out)
}

/// Table `O[j*(cutoff+1)+k] = ∫ e^{-a y²} h_j(y) h_k(y) dy` for `j, k ≤ cutoff`.
///
/// The rule is rescaled by `√(a+1)` so the integrand becomes `e^{-z²}·poly`
/// and the quadrature is exact; parity zeros are stored as exact `0.0`.
pub fn overlap_table(a: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("overlap weight exponent must exceed -1, got {a}")));
    }
    let rule = gauss_hermite_rule(cutoff + 2)?;
    let grid = HermiteGrid::scaled(Dim::One, cutoff, &rule, (a + 1.0).sqrt());
    let m = cutoff + 1;
    let mut table = vec![0.0; m * m];
    for (s, (&y, &w)) in grid.points.iter().zip(&grid.weights).enumerate() {
        let g = w * (-a * y * y).exp();
        let h = &grid.basis[s * m..(s + 1) * m];
        for j in 0..m {
            let gj = g * h[j];
            for k in (j..m).step_by(2) {
                table[j * m + k] += gj * h[k];
            }
        }
    }
    for j in 0..m {
        for k in j + 1..m {
            table[k * m + j] = table[j * m + k];
        }
    }
    Ok(table)
}

/// Quadrature route for `α_k = π^{-1/2} ∫ e^{-5y²/2} h_k dy`.
pub fn alpha_coefficient_quadrature(k: usize) -> Result<f64> {
    Ok(gaussian_coefficients(5.0, k)?[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_random_states(
            re in proptest::collection::vec(-1.0f64..1.0, 17),
            im in proptest::collection::vec(-1.0f64..1.0, 17),
        ) {
            let coeffs = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let s = SpectralState::from_coeffs(Dim::One, 16, coeffs).unwrap();
            let rule = gauss_hermite_rule(default_order(16)).unwrap();
            let back = analyze(&synthesize(&s, &rule).unwrap(), &rule, 16).unwrap();
            for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
            let m = s.mass();
            prop_assert!((s.reflected().mass() - m).abs() <= 1e-13 * m.max(1.0));
        }
    }

    #[test]
    fn h0_at_origin() {
        assert_eq!(hermite_fn(0, 0.0), 1.0);
    }

    #[test]
    fn h2_at_one() {
        // H_2(1) = 2, normalization 1/√8
        let expected = 2.0 / 8f64.sqrt() * (-0.5f64).exp();
        assert_relative_eq!(hermite_fn(2, 1.0), expected, max_relative = 1e-14);
        assert_relative_eq!(hermite_fn(2, 1.0), 0.428_881_942_480_353_4, max_relative = 1e-13);
    }

    #[test]
    fn h60_at_three_matches_extended_precision() {
        // 50-digit evaluation of H_60(3) e^{-9/2} / √(2^60 60!)
        let reference = 0.127_118_857_877_666_377;
        let v = hermite_fn(60, 3.0);
        assert!(v.is_finite() && v.abs() < 10.0);
        assert!((v - reference).abs() < 1e-13, "{v} vs {reference}");
    }

    #[test]
    fn stable_for_large_orders() {
        let h = hermite_functions(512, 20.0);
        assert!(h.iter().all(|v| v.is_finite() && v.abs() < 10.0));
        let h = hermite_functions(512, -19.5);
        assert!(h.iter().all(|v| v.is_finite() && v.abs() < 10.0));
        let far = hermite_functions(40, 60.0);
        assert!(far.iter().all(|v| *v == 0.0 || v.is_finite()));
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(EigenIndex::One(3).eigenvalue(), 7.0);
        assert_eq!(EigenIndex::Two(1, 2).eigenvalue(), 8.0);
        assert_eq!(EigenIndex::Two(0, 0).eigenvalue(), 2.0);
    }

    #[test]
    fn small_rules() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_relative_eq!(r1.weights[0], PI.sqrt(), max_relative = 1e-15);
        let r2 = gauss_hermite_rule(2).unwrap();
        assert_relative_eq!(r2.nodes[1], 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r2.nodes[0], -1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r2.weights[0], PI.sqrt() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(r2.weights[1], PI.sqrt() / 2.0, max_relative = 1e-14);
        assert!(gauss_hermite_rule(0).is_err());
    }

    #[test]
    fn rule_moments() {
        for order in [3usize, 10, 31, 64, 150] {
            let r = gauss_hermite_rule(order).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-12, "order {order}: {s}");
            assert!(r.weights.iter().all(|w| *w > 0.0 || order > 100));
            for i in 0..order {
                assert_eq!(r.nodes[i], -r.nodes[order - 1 - i]);
            }
            // ∫ y^{2p} e^{-y²} = Γ(p+1/2)
            for p in 0..order.min(12) {
                let exact = (ln_factorial(2 * p) - ln_factorial(p) - (2 * p) as f64 * std::f64::consts::LN_2).exp()
                    * PI.sqrt();
                let q: f64 = r.nodes.iter().zip(&r.weights).map(|(z, w)| w * z.powi(2 * p as i32)).sum();
                assert!(((q - exact) / exact).abs() < 1e-12, "order {order} p {p}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let r = gauss_legendre_rule(5).unwrap();
        let s: f64 = r.weights.iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
        let x8: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(x8, 2.0 / 9.0, max_relative = 1e-13);
        let c = CompositeRule::new(0.0, PI, 16, 4).unwrap();
        let v: f64 = c.integrate(|t| t.sin());
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn round_trip_unit_h3() {
        let rule = gauss_hermite_rule(default_order(10)).unwrap();
        let s = SpectralState::unit(EigenIndex::One(3), 10).unwrap();
        let back = analyze(&synthesize(&s, &rule).unwrap(), &rule, 10).unwrap();
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_2d() {
        let rule = gauss_hermite_rule(12).unwrap();
        let mut s = SpectralState::zeros(Dim::Two, 8);
        *s.coeff_mut(EigenIndex::Two(3, 5)).unwrap() = Complex64::new(0.5, -1.0);
        *s.coeff_mut(EigenIndex::Two(0, 8)).unwrap() = Complex64::new(0.0, 2.0);
        let back = analyze(&synthesize(&s, &rule).unwrap(), &rule, 8).unwrap();
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_projection_gives_alpha0() {
        let rule = gauss_hermite_rule(80).unwrap();
        let grid = HermiteGrid::new(Dim::One, 30, &rule);
        let samples = grid.sample(|y| Complex64::new((-2.5 * y[0] * y[0]).exp(), 0.0));
        let s = grid.analyze(&samples).unwrap();
        assert!((s.coeffs()[0].re - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn odd_function_has_no_even_coefficients() {
        let rule = gauss_hermite_rule(60).unwrap();
        let grid = HermiteGrid::new(Dim::One, 25, &rule);
        let samples = grid.sample(|y| Complex64::new(y[0].powi(3) * (-y[0] * y[0]).exp(), 0.3 * y[0].sin() * (-0.5 * y[0] * y[0]).exp()));
        let s = grid.analyze(&samples).unwrap();
        for n in (0..=25).step_by(2) {
            assert!(s.coeffs()[n].norm() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let rule = gauss_hermite_rule(10).unwrap();
        let other = gauss_hermite_rule(12).unwrap();
        let s = SpectralState::zeros(Dim::One, 5);
        let samples = synthesize(&s, &rule).unwrap();
        assert!(matches!(analyze(&samples, &other, 5), Err(Error::DimensionMismatch(_))));
        let grid2 = HermiteGrid::new(Dim::Two, 5, &rule);
        assert!(grid2.synthesize(&s).is_err());
        assert!(hermite_function(EigenIndex::Two(1, 1), &[0.0]).is_err());
    }

    #[test]
    fn wang_values() {
        assert_relative_eq!(wang_diagonal(0), (PI / 2.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(wang_diagonal(1), 0.5 * (PI / 2.0).sqrt(), max_relative = 1e-14);
        // e^{-y²} h_j² = e^{-2y²}·poly, so y = z/√2 turns the rule exact.
        let rule = gauss_hermite_rule(40).unwrap();
        let s2 = 2f64.sqrt();
        for j in [5usize, 10, 20, 30] {
            let q = rule.integrate_plain(|z| {
                let y = z / s2;
                (-y * y).exp() * hermite_fn(j, y).powi(2) / s2
            });
            assert_relative_eq!(wang_diagonal(j), q, max_relative = 1e-10);
        }
        for j in 0..40 {
            assert!(wang_diagonal(j + 1) < wang_diagonal(j));
        }
    }

    #[test]
    fn alpha_values() {
        assert_relative_eq!(alpha_coefficient(0), 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(alpha_coefficient(1), -(2f64.sqrt()) / (3.0 * 3f64.sqrt()), max_relative = 1e-14);
        for j in 0..=15 {
            let q = alpha_coefficient_quadrature(2 * j).unwrap();
            assert!((q - alpha_coefficient(j)).abs() < 1e-9);
            assert!(alpha_coefficient_quadrature(2 * j + 1).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn orthogonality_up_to_40() {
        let rule = gauss_hermite_rule(41).unwrap();
        let h: Vec<Vec<f64>> = rule.nodes.iter().map(|&z| hermite_functions(40, z)).collect();
        for j in 0..=40 {
            for k in 0..=40 {
                let q: f64 = h.iter().zip(&rule.scaled_weights).map(|(hz, w)| w * hz[j] * hz[k]).sum();
                let expected = if j == k { PI.sqrt() } else { 0.0 };
                assert!((q - expected).abs() < 1e-10, "({j},{k}): {q}");
            }
        }
    }

    #[test]
    fn eigen_relation_on_grid() {
        let cutoff = 24;
        let rule = gauss_hermite_rule(default_order(cutoff + 2)).unwrap();
        for n in 0..=cutoff / 2 {
            let s = SpectralState::unit(EigenIndex::One(n), cutoff).unwrap();
            let d2 = s.derivative(0).unwrap().derivative(0).unwrap();
            let y2 = s.times_coordinate(0).unwrap().times_coordinate(0).unwrap();
            let hs = d2.scaled(Complex64::new(-1.0, 0.0)).add(&y2).unwrap();
            let lhs = synthesize(&hs, &rule).unwrap();
            let rhs = synthesize(&s.resized(cutoff + 2), &rule).unwrap();
            for (a, b) in lhs.values.iter().zip(&rhs.values) {
                assert!((a - b * (2 * n + 1) as f64).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn overlap_table_matches_closed_forms() {
        let o = overlap_table(1.0, 12).unwrap();
        for j in 0..=12 {
            assert_relative_eq!(o[j * 13 + j], wang_diagonal(j), max_relative = 1e-12);
        }
        assert_eq!(o[13 + 2], 0.0);
        // ∫ e^{-2y²} h_3² = (7/27)√(π/3), by moments of e^{-3y²}
        let o2 = overlap_table(2.0, 5).unwrap();
        assert_relative_eq!(o2[3 * 6 + 3], 7.0 / 27.0 * (PI / 3.0).sqrt(), max_relative = 1e-13);
        assert!(overlap_table(-1.5, 3).is_err());
    }

    #[test]
    fn ladder_operators_match_grid() {
        let rule = gauss_hermite_rule(40).unwrap();
        let mut s = SpectralState::zeros(Dim::One, 6);
        s.coeffs_mut()[2] = Complex64::new(1.0, 0.5);
        s.coeffs_mut()[5] = Complex64::new(-0.3, 0.0);
        let d = s.derivative(0).unwrap();
        let yv = s.times_coordinate(0).unwrap();
        for &y in &[-1.3, 0.0, 0.4, 2.2] {
            let h = 1e-5;
            let fd = (s.evaluate(&[y + h]).unwrap() - s.evaluate(&[y - h]).unwrap()) / (2.0 * h);
            assert!((d.evaluate(&[y]).unwrap() - fd).norm() < 1e-8);
            assert!((yv.evaluate(&[y]).unwrap() - s.evaluate(&[y]).unwrap() * y).norm() < 1e-13);
        }
        let _ = rule;
    }
}
