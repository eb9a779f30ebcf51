//! Analytic state kernels.
//!
//! A state is `ρ = p·|ω⟩⟨ω|/N + (1−p)·ρ_mix`: a real pure kernel `Ψ` with
//! normalisation `N = ∫Ψ²`, mixed with position-diagonal noise of density
//! `g`. Sharp matrix elements follow the density convention: the diagonal
//! noise contributes `g(x)` at `⟨x|ρ_mix|x⟩` and nothing off the diagonal.

mod family;
mod gaussian;
mod indicator;
mod noise;
mod poly;

pub use family::{build_family_state, Family, FamilyParams, NoiseKind, Param, StateParams};
pub use gaussian::{GaussianMeasure, QuadraticExponent};
pub use indicator::{BoxConstraint, ConstraintAxes, IndicatorState};
pub use noise::DiagonalNoise;
pub use poly::{Monomial, Polynomial};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_box, QuadOptions};

/// Highest total degree allowed for a state's polynomial prefactor.
pub const MAX_POLY_DEGREE: u32 = 6;

/// Largest supported subsystem count for state kernels.
pub const MAX_STATE_DIM: usize = 6;

/// One term `w · base(x + s)` of a [`GaussianSumState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerm {
    pub weight: f64,
    pub shift: Vec<f64>,
}

/// `Ψ(x) = Σ_j w_j · base(x + s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSumState {
    base: QuadraticExponent,
    terms: Vec<ShiftTerm>,
}

impl GaussianSumState {
    pub fn new(base: QuadraticExponent, terms: Vec<ShiftTerm>) -> Result<Self> {
        let n = base.dim();
        if n > MAX_STATE_DIM {
            return Err(Error::SizeLimit(format!("state dimension {n} exceeds {MAX_STATE_DIM}")));
        }
        if terms.is_empty() {
            return Err(invalid("a Gaussian sum needs at least one term"));
        }
        if terms.iter().all(|t| t.weight == 0.0) {
            return Err(invalid("all term weights are zero"));
        }
        for t in &terms {
            if t.shift.len() != n {
                return Err(invalid("shift vector dimension mismatch"));
            }
            if !t.weight.is_finite() || t.shift.iter().any(|s| !s.is_finite()) {
                return Err(invalid("non-finite term weight or shift"));
            }
        }
        Ok(Self { base, terms })
    }

    /// A single unshifted Gaussian.
    pub fn single(base: QuadraticExponent) -> Self {
        let n = base.dim();
        Self {
            base,
            terms: vec![ShiftTerm {
                weight: 1.0,
                shift: vec![0.0; n],
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &QuadraticExponent {
        &self.base
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    /// Each term as an explicit exponent `w · exp(q_j(x))`.
    pub fn shifted_terms(&self) -> impl Iterator<Item = (f64, QuadraticExponent)> + '_ {
        self.terms.iter().map(|t| (t.weight, self.base.shifted(&t.shift)))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut shifted = vec![0.0; x.len()];
        self.terms
            .iter()
            .map(|t| {
                for (s, (xi, si)) in shifted.iter_mut().zip(x.iter().zip(&t.shift)) {
                    *s = xi + si;
                }
                t.weight * self.base.eval(&shifted)
            })
            .sum()
    }

    /// `∫Ψ²` from pairwise Gaussian overlaps.
    pub fn norm_squared(&self) -> Result<f64> {
        let shifted: Vec<(f64, QuadraticExponent)> = self.shifted_terms().collect();
        let mut total = 0.0;
        for j in 0..shifted.len() {
            for l in j..shifted.len() {
                let (wj, qj) = &shifted[j];
                let (wl, ql) = &shifted[l];
                let overlap = wj * wl * qj.product(ql).integral()?;
                total += if j == l { overlap } else { 2.0 * overlap };
            }
        }
        Ok(total)
    }

    pub fn to_poly(&self) -> PolyGaussianState {
        let n = self.dim();
        PolyGaussianState {
            n,
            terms: self
                .shifted_terms()
                .map(|(w, gauss)| PolyGaussianTerm {
                    poly: Polynomial::constant(n, w),
                    gauss,
                })
                .collect(),
        }
    }
}

/// One term `P(x) · exp(q(x))` of a [`PolyGaussianState`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussianTerm {
    pub poly: Polynomial,
    pub gauss: QuadraticExponent,
}

/// `Ψ(x) = Σ_j P_j(x) · exp(q_j(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussianState {
    n: usize,
    terms: Vec<PolyGaussianTerm>,
}

impl PolyGaussianState {
    pub fn new(terms: Vec<PolyGaussianTerm>) -> Result<Self> {
        let n = terms
            .first()
            .map(|t| t.gauss.dim())
            .ok_or_else(|| invalid("a polynomial-Gaussian state needs at least one term"))?;
        for t in &terms {
            if t.gauss.dim() != n || t.poly.dim() != n {
                return Err(invalid("term dimension mismatch"));
            }
            if t.poly.degree() > MAX_POLY_DEGREE {
                return Err(Error::Unsupported(format!(
                    "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
                    t.poly.degree()
                )));
            }
        }
        let terms = terms.into_iter().filter(|t| !t.poly.is_zero()).collect();
        Ok(Self { n, terms })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PolyGaussianTerm] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0)
    }

    /// True when every term cancelled (e.g. annihilating a vacuum).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.poly.eval(x) * t.gauss.eval(x)).sum()
    }

    /// `∫Ψ²` through Gaussian moments of the pairwise products.
    pub fn norm_squared(&self) -> Result<f64> {
        let mut total = 0.0;
        for (j, tj) in self.terms.iter().enumerate() {
            for (l, tl) in self.terms.iter().enumerate().skip(j) {
                let measure = tj.gauss.product(&tl.gauss).measure()?;
                let value = measure.integrate_poly(&tj.poly.mul(&tl.poly));
                total += if j == l { value } else { 2.0 * value };
            }
        }
        Ok(total.max(0.0))
    }
}

/// How the ladder operator `a_i` acts on a position-space kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderConvention {
    /// `a_i = (x_i + ∂/∂x_i)/√2` with `ħ = m = ω = 1`.
    NaturalUnits,
    /// `a_i` acts as multiplication by `x_i`; matches the closed-form
    /// normalisation of the annihilated GHZ-like state.
    PositionQuadrature,
}

impl LadderConvention {
    pub fn tag(self) -> &'static str {
        match self {
            LadderConvention::NaturalUnits => "natural_units: a_i = (x_i + d/dx_i)/sqrt(2), hbar = m = omega = 1",
            LadderConvention::PositionQuadrature => "position_quadrature: a_i acts as x_i",
        }
    }
}

/// Applies `a_mode` to a Gaussian or polynomial-Gaussian kernel.
///
/// On a term `P·exp(−½xᵀMx + bᵀx + c)` the natural-units operator gives
/// `(x_i P + ∂_i P + P·(b_i − (Mx)_i))/√2` times the same exponential.
pub fn annihilate(state: &PureState, mode: usize, convention: LadderConvention) -> Result<PolyGaussianState> {
    let source = match state {
        PureState::GaussianSum(g) => g.to_poly(),
        PureState::PolyGaussian(p) => p.clone(),
        PureState::Indicator(_) => {
            return Err(Error::Unsupported(
                "ladder operators on discontinuous indicator kernels".into(),
            ))
        }
    };
    let n = source.dim();
    if mode >= n {
        return Err(invalid(format!("mode {mode} out of range for n = {n}")));
    }
    let x = Polynomial::coordinate(n, mode);
    let mut terms = Vec::with_capacity(source.terms.len());
    for t in &source.terms {
        let poly = match convention {
            LadderConvention::PositionQuadrature => x.mul(&t.poly),
            LadderConvention::NaturalUnits => {
                let grad: Vec<f64> = t.gauss.gradient_row(mode).iter().map(|v| -v).collect();
                let log_derivative = Polynomial::linear(&grad, t.gauss.linear()[mode]);
                x.mul(&t.poly)
                    .add(&t.poly.derivative(mode))
                    .add(&t.poly.mul(&log_derivative))
                    .scale(std::f64::consts::FRAC_1_SQRT_2)
            }
        };
        if poly.degree() > MAX_POLY_DEGREE {
            return Err(Error::Unsupported(format!(
                "annihilation would raise the polynomial degree to {}",
                poly.degree()
            )));
        }
        terms.push(PolyGaussianTerm {
            poly,
            gauss: t.gauss.clone(),
        });
    }
    Ok(PolyGaussianState {
        n,
        terms: terms.into_iter().filter(|t| !t.poly.is_zero()).collect(),
    })
}

/// The pure part of a state.
#[derive(Debug, Clone, PartialEq)]
pub enum PureState {
    GaussianSum(GaussianSumState),
    PolyGaussian(PolyGaussianState),
    Indicator(IndicatorState),
}

impl PureState {
    pub fn dim(&self) -> usize {
        match self {
            PureState::GaussianSum(g) => g.dim(),
            PureState::PolyGaussian(p) => p.dim(),
            PureState::Indicator(i) => i.dim(),
        }
    }

    /// Unnormalised amplitude `Ψ(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(invalid(format!(
                "point has dimension {}, state has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            PureState::GaussianSum(g) => g.eval(x),
            PureState::PolyGaussian(p) => p.eval(x),
            PureState::Indicator(i) => i.eval(x),
        }
    }

    /// `⟨ω|ω⟩` of the unnormalised kernel; zero kernels are rejected.
    pub fn normalization_constant(&self) -> Result<f64> {
        let n = match self {
            PureState::GaussianSum(g) => g.norm_squared()?,
            PureState::PolyGaussian(p) => p.norm_squared()?,
            PureState::Indicator(i) => i.norm_squared(),
        };
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonNormalizable(format!("kernel norm is {n:e}")));
        }
        Ok(n)
    }

    /// `∫_box Ψ` over the product box `∏ [lo_i, hi_i]`.
    pub fn box_integral(&self, lo: &[f64], hi: &[f64], opts: &QuadOptions) -> Result<f64> {
        match self {
            PureState::GaussianSum(g) => {
                if let Some(anchor) = star_anchor(g.base()) {
                    let mut total = 0.0;
                    for (w, q) in g.shifted_terms() {
                        total += w * star_box_integral(&q, anchor, lo, hi, opts)?;
                    }
                    Ok(total)
                } else {
                    Ok(integrate_box(|x| g.eval(x), lo, hi, opts)?.value)
                }
            }
            PureState::PolyGaussian(p) => Ok(integrate_box(|x| p.eval(x), lo, hi, opts)?.value),
            PureState::Indicator(i) => Ok(i.box_integral(lo, hi)),
        }
    }
}

/// An anchor coordinate `a` such that all couplings in `M` run through `a`
/// (the other coordinates are conditionally independent given `x_a`).
pub(crate) fn star_anchor(q: &QuadraticExponent) -> Option<usize> {
    let m = q.matrix();
    let n = q.dim();
    if n < 2 {
        return None;
    }
    (0..n).find(|&a| {
        (0..n).all(|i| (i == a || m[(i, i)] > 0.0) && (0..n).all(|j| i == j || i == a || j == a || m[(i, j)] == 0.0))
    })
}

/// Box integral of `exp(q)` for star-structured `q`: the non-anchor
/// coordinates integrate in closed form to error functions, leaving a 1D
/// integral over the anchor.
pub(crate) fn star_box_integral(
    q: &QuadraticExponent,
    anchor: usize,
    lo: &[f64],
    hi: &[f64],
    opts: &QuadOptions,
) -> Result<f64> {
    let m = q.matrix();
    let b = q.linear();
    let n = q.dim();
    let others: Vec<usize> = (0..n).filter(|&i| i != anchor).collect();
    let integrand = |t: f64| {
        let mut log_w = -0.5 * m[(anchor, anchor)] * t * t + b[anchor] * t + q.constant();
        let mut factor = 1.0;
        for &i in &others {
            let mii = m[(i, i)];
            let beta = b[i] - m[(i, anchor)] * t;
            let mean = beta / mii;
            let s = (0.5 * mii).sqrt();
            log_w += beta * beta / (2.0 * mii);
            factor *=
                (std::f64::consts::PI / (2.0 * mii)).sqrt() * erf_interval(s * (lo[i] - mean), s * (hi[i] - mean));
        }
        factor * log_w.exp()
    };
    Ok(integrate(integrand, lo[anchor], hi[anchor], opts)?.value)
}

/// `erf(v) − erf(u)` for `u ≤ v`, using `erfc` in the tails.
pub fn erf_interval(u: f64, v: f64) -> f64 {
    if u >= 0.0 {
        libm::erfc(u) - libm::erfc(v)
    } else if v <= 0.0 {
        libm::erfc(-v) - libm::erfc(-u)
    } else {
        libm::erf(v) - libm::erf(u)
    }
}

/// Mixed state `p·|ω⟩⟨ω|/N + (1−p)·ρ_mix`, optionally scaled by an overall
/// kernel factor (detector efficiency, scaling checks).
#[derive(Debug, Clone, PartialEq)]
pub struct CvState {
    p: f64,
    pure: PureState,
    noise: DiagonalNoise,
    pure_norm: f64,
    scale: f64,
}

impl CvState {
    pub fn new(p: f64, pure: PureState, noise: DiagonalNoise) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("mixing weight p = {p} outside [0, 1]")));
        }
        noise.validate()?;
        let pure_norm = pure.normalization_constant()?;
        Ok(Self {
            p,
            pure,
            noise,
            pure_norm,
            scale: 1.0,
        })
    }

    /// Same state with every kernel value multiplied by `lambda > 0`.
    pub fn with_kernel_scale(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!(
                "kernel scale {lambda} must be finite and non-negative"
            )));
        }
        self.scale *= lambda;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.pure.dim()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pure(&self) -> &PureState {
        &self.pure
    }

    pub fn noise(&self) -> &DiagonalNoise {
        &self.noise
    }

    pub fn pure_norm(&self) -> f64 {
        self.pure_norm
    }

    pub fn kernel_scale(&self) -> f64 {
        self.scale
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!(
                "point has dimension {}, state has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `⟨x|ρ|x⟩` under the density convention.
    pub fn diag_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.diag_unchecked(x))
    }

    pub(crate) fn diag_unchecked(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        if self.p > 0.0 {
            let psi = self.pure.eval_unchecked(x);
            v += self.p * psi * psi / self.pure_norm;
        }
        if self.p < 1.0 {
            v += (1.0 - self.p) * self.noise.density(x);
        }
        self.scale * v
    }

    /// `⟨x|ρ|y⟩` for `x ≠ y`; the noise is diagonal and drops out.
    pub fn offdiag_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        if x == y {
            return Err(invalid("offdiag_value needs distinct points; use diag_value"));
        }
        Ok(self.offdiag_unchecked(x, y))
    }

    pub(crate) fn offdiag_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        if self.p == 0.0 {
            return 0.0;
        }
        self.scale * self.p * self.pure.eval_unchecked(x) * self.pure.eval_unchecked(y) / self.pure_norm
    }
}
