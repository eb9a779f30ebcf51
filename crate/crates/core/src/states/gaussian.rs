//! Quadratic exponents `exp(−½ xᵀMx + bᵀx + c)` and their integrals.
//!
//! Closed forms:
//!
//! ```text
//! ∫ exp(−½ xᵀAx + bᵀx + c) dx = (2π)^{n/2} det(A)^{−1/2} exp(½ bᵀA⁻¹b + c)
//! ```
//!
//! Polynomial moments under the same weight are reduced to central moments of
//! the normal law with mean `A⁻¹b` and covariance `A⁻¹`; central moments obey
//! `E[z_i z^β] = Σ_j Σ_ij β_j E[z^{β−e_j}]` (Isserlis).

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::poly::{Monomial, Polynomial};
use crate::error::{invalid, Error, Result};

/// Tolerance on asymmetry and negative eigenvalues of `M`.
const SYMMETRY_TOL: f64 = 1e-12;

/// `exp(−½ xᵀMx + bᵀx + c)` with symmetric positive-semidefinite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticExponent {
    m: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl QuadraticExponent {
    pub fn new(m: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || b.len() != n || n == 0 {
            return Err(invalid("quadratic exponent dimensions disagree"));
        }
        if m.iter().chain(b.iter()).any(|v| !v.is_finite()) || !c.is_finite() {
            return Err(invalid("quadratic exponent has non-finite entries"));
        }
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(invalid("quadratic form matrix is not symmetric"));
        }
        let min_eig = m.clone().symmetric_eigenvalues().min();
        if min_eig < -SYMMETRY_TOL * scale {
            return Err(invalid(format!(
                "quadratic form matrix is not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { m, b, c })
    }

    /// Convenience constructor from a row-major matrix.
    pub fn from_rows(rows: &[Vec<f64>], b: &[f64], c: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix rows must all have length n"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m, DVector::from_column_slice(b), c)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Value of the exponent (the argument of `exp`).
    pub fn log_value(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for i in 0..n {
            let row: f64 = x.iter().enumerate().map(|(j, xj)| self.m[(i, j)] * xj).sum();
            quad += x[i] * row;
        }
        let lin: f64 = (0..n).map(|i| self.b[i] * x[i]).sum();
        -0.5 * quad + lin + self.c
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.log_value(x).exp()
    }

    /// The exponent of `x ↦ self(x + s)`.
    pub fn shifted(&self, s: &[f64]) -> Self {
        let s = DVector::from_column_slice(s);
        let ms = &self.m * &s;
        let b = &self.b - &ms;
        let c = -0.5 * s.dot(&ms) + self.b.dot(&s) + self.c;
        Self {
            m: self.m.clone(),
            b,
            c,
        }
    }

    /// Pointwise product of two exponentials.
    pub fn product(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
            b: &self.b + &other.b,
            c: self.c + other.c,
        }
    }

    /// `(Mx)_i`, needed for derivatives.
    pub fn gradient_row(&self, i: usize) -> Vec<f64> {
        self.m.row(i).iter().copied().collect()
    }

    /// Natural log of `∫ exp(−½ xᵀMx + bᵀx + c) dx` over `ℝⁿ`.
    pub fn log_integral(&self) -> Result<f64> {
        Ok(self.measure()?.log_mass)
    }

    pub fn integral(&self) -> Result<f64> {
        Ok(self.log_integral()?.exp())
    }

    /// Mean, covariance and total mass of the Gaussian measure.
    pub fn measure(&self) -> Result<GaussianMeasure> {
        let n = self.dim();
        let chol = Cholesky::<f64, Dyn>::new(self.m.clone())
            .ok_or_else(|| Error::NonNormalizable("quadratic form is singular or indefinite".into()))?;
        let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        if !log_det.is_finite() {
            return Err(Error::NonNormalizable("determinant underflow".into()));
        }
        let mean = chol.solve(&self.b);
        let cov = chol.inverse();
        let log_mass =
            0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det + 0.5 * self.b.dot(&mean) + self.c;
        Ok(GaussianMeasure {
            mean: mean.iter().copied().collect(),
            cov,
            log_mass,
        })
    }
}

/// Normal law `N(mean, cov)` scaled to total mass `exp(log_mass)`.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub log_mass: f64,
}

impl GaussianMeasure {
    /// `∫ P(x) dμ(x)` for a polynomial `P`.
    pub fn integrate_poly(&self, poly: &Polynomial) -> f64 {
        let mut central = CentralMoments::new(&self.cov);
        let mut total = 0.0;
        for (mono, coeff) in poly.terms() {
            total += coeff * self.raw_moment(mono, &mut central);
        }
        total * self.log_mass.exp()
    }

    /// `E[x^α]` under the normalised law.
    pub fn expect_monomial(&self, alpha: &[u32]) -> f64 {
        let mut central = CentralMoments::new(&self.cov);
        self.raw_moment(&Monomial::from_exponents(alpha), &mut central)
    }

    // E[(μ+z)^α] = Σ_{β≤α} ∏ C(α_i,β_i) μ_i^{α_i−β_i} E[z^β]
    fn raw_moment(&self, alpha: &Monomial, central: &mut CentralMoments) -> f64 {
        let exps = alpha.exponents();
        let n = exps.len();
        let mut beta = vec![0u32; n];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for i in 0..n {
                w *= binomial(exps[i], beta[i]) * self.mean[i].powi((exps[i] - beta[i]) as i32);
            }
            if w != 0.0 {
                total += w * central.get(&beta);
            }
            // odometer over β ≤ α
            let mut i = 0;
            while i < n {
                if beta[i] < exps[i] {
                    beta[i] += 1;
                    break;
                }
                beta[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        total
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Memoised central moments `E[z^β]` of `N(0, Σ)`.
struct CentralMoments<'a> {
    cov: &'a DMatrix<f64>,
    memo: HashMap<Vec<u32>, f64>,
}

impl<'a> CentralMoments<'a> {
    fn new(cov: &'a DMatrix<f64>) -> Self {
        Self {
            cov,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, beta: &[u32]) -> f64 {
        let degree: u32 = beta.iter().sum();
        if degree == 0 {
            return 1.0;
        }
        if degree % 2 == 1 {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(beta) {
            return v;
        }
        let i = beta.iter().position(|&e| e > 0).expect("non-zero degree");
        let mut rest = beta.to_vec();
        rest[i] -= 1;
        let mut total = 0.0;
        for j in 0..rest.len() {
            if rest[j] == 0 || self.cov[(i, j)] == 0.0 {
                continue;
            }
            let mut reduced = rest.clone();
            reduced[j] -= 1;
            total += self.cov[(i, j)] * rest[j] as f64 * self.get(&reduced);
        }
        self.memo.insert(beta.to_vec(), total);
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ghz(sigma: f64, eps: f64) -> QuadraticExponent {
        let e = 1.0 / eps;
        QuadraticExponent::from_rows(
            &[vec![1.0 / sigma + 2.0 * e, -e, -e], vec![-e, e, 0.0], vec![-e, 0.0, e]],
            &[0.0; 3],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn ghz_kernel_values() {
        let g = ghz(1.0, 1.0);
        assert_eq!(g.eval(&[0.0, 0.0, 0.0]), 1.0);
        let v = g.eval(&[-1.0, 1.0, 1.0]);
        let by_hand = (-0.5f64).exp() * (-4.0f64).exp();
        assert!((v - by_hand).abs() < 1e-15);
    }

    #[test]
    fn ghz_squared_norm() {
        for (s, e) in [(1.0, 1.0), (0.7, 2.5), (3.0, 0.2)] {
            let g = ghz(s, e);
            let n = g.product(&g).integral().unwrap();
            let expected = PI.powf(1.5) * e * f64::sqrt(s);
            assert!((n / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shifting_matches_evaluation() {
        let g = QuadraticExponent::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]], &[0.3, -0.2], 0.1).unwrap();
        let s = [0.7, -1.1];
        let h = g.shifted(&s);
        let x = [0.25, 0.4];
        assert!((h.eval(&x) - g.eval(&[x[0] + s[0], x[1] + s[1]])).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(QuadraticExponent::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]], &[0.0, 0.0], 0.0).is_err());
        assert!(QuadraticExponent::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]], &[0.0, 0.0], 0.0).is_err());
        let singular = QuadraticExponent::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[0.0, 0.0], 0.0).unwrap();
        assert!(matches!(singular.integral(), Err(Error::NonNormalizable(_))));
    }

    #[test]
    fn one_dimensional_moments() {
        // weight exp(-x²/2): E[x^2] = 1, E[x^4] = 3, E[x^6] = 15
        let g = QuadraticExponent::from_rows(&[vec![1.0]], &[0.0], 0.0).unwrap();
        let mu = g.measure().unwrap();
        assert!((mu.expect_monomial(&[2]) - 1.0).abs() < 1e-14);
        assert!((mu.expect_monomial(&[4]) - 3.0).abs() < 1e-14);
        assert!((mu.expect_monomial(&[6]) - 15.0).abs() < 1e-13);
        assert_eq!(mu.expect_monomial(&[3]), 0.0);
        // shifted mean: b = 2 gives N(2, 1); E[x^3] = μ³ + 3μ = 14
        let g = QuadraticExponent::from_rows(&[vec![1.0]], &[2.0], 0.0).unwrap();
        assert!((g.measure().unwrap().expect_monomial(&[3]) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn isserlis_four_point() {
        let g = QuadraticExponent::from_rows(&[vec![2.0, 0.6], vec![0.6, 1.5]], &[0.0, 0.0], 0.0).unwrap();
        let mu = g.measure().unwrap();
        let s = &mu.cov;
        // E[z0² z1²] = Σ00 Σ11 + 2 Σ01²
        let expected = s[(0, 0)] * s[(1, 1)] + 2.0 * s[(0, 1)].powi(2);
        assert!((mu.expect_monomial(&[2, 2]) - expected).abs() < 1e-14);
    }
}
