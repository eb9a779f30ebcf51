use serde::{Deserialize, Serialize};

use super::erf_interval;
use crate::error::{invalid, Result};

/// Position-diagonal noise `∫ g(x) |x⟩⟨x| dx` with a product density `g`.
///
/// `Gaussian { delta }` uses `g_i(x) = (2πδ)^{−1/2} exp(−x²/2δ)` (δ is a
/// variance); `Box { delta }` is uniform on `[−δ, δ]` per subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagonalNoise {
    Gaussian { delta: f64 },
    Box { delta: f64 },
}

impl DiagonalNoise {
    pub fn delta(&self) -> f64 {
        match *self {
            DiagonalNoise::Gaussian { delta } | DiagonalNoise::Box { delta } => delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.delta();
        if !(d > 0.0 && d.is_finite()) {
            return Err(invalid(format!("noise width must be positive, got {d}")));
        }
        Ok(())
    }

    /// Single-subsystem density.
    pub fn density_1d(&self, x: f64) -> f64 {
        match *self {
            DiagonalNoise::Gaussian { delta } => {
                (-x * x / (2.0 * delta)).exp() / (2.0 * std::f64::consts::PI * delta).sqrt()
            }
            DiagonalNoise::Box { delta } => {
                if x.abs() < delta {
                    0.5 / delta
                } else {
                    0.0
                }
            }
        }
    }

    /// `g(x) = ∏ g_i(x_i)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.density_1d(xi)).product()
    }

    /// `∫_lo^hi g_i`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            DiagonalNoise::Gaussian { delta } => {
                let s = 1.0 / (2.0 * delta).sqrt();
                0.5 * erf_interval(lo * s, hi * s)
            }
            DiagonalNoise::Box { delta } => {
                let overlap = hi.min(delta) - lo.max(-delta);
                overlap.max(0.0) / (2.0 * delta)
            }
        }
    }
}
