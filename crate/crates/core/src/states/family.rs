//! The tripartite state families and their flat parameter sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    annihilate, BoxConstraint, ConstraintAxes, CvState, DiagonalNoise, GaussianSumState, IndicatorState,
    LadderConvention, PureState, QuadraticExponent, ShiftTerm,
};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Correlated Gaussian, `Δ = 0`.
    GhzLike,
    /// Six shifted copies of the correlated Gaussian.
    WLike,
    /// Constant amplitude on `|x₁| < β, |x₁−x₂| < ε, |x₁−x₃| < ε`.
    Indicator,
    /// `a₁a₂a₃` applied to the GHZ-like kernel.
    AnnihilatedGhz,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::GhzLike => "ghz_like",
            Family::WLike => "w_like",
            Family::Indicator => "indicator",
            Family::AnnihilatedGhz => "annihilated_ghz",
        }
    }

    /// Ladder convention used by [`Family::AnnihilatedGhz`].
    pub const ANNIHILATED_CONVENTION: LadderConvention = LadderConvention::PositionQuadrature;
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz_like" | "ghz" => Ok(Family::GhzLike),
            "w_like" | "w" => Ok(Family::WLike),
            "indicator" => Ok(Family::Indicator),
            "annihilated_ghz" => Ok(Family::AnnihilatedGhz),
            other => Err(invalid(format!("unknown family '{other}'"))),
        }
    }
}

/// Shape parameters of a family; unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub sigma: f64,
    pub epsilon: f64,
    /// `Δ`, the W-like displacement.
    pub shift: f64,
    pub beta: f64,
}

impl FamilyParams {
    pub fn ghz(sigma: f64, epsilon: f64) -> Self {
        Self {
            sigma,
            epsilon,
            shift: 0.0,
            beta: 1.0,
        }
    }

    pub fn w_like(sigma: f64, epsilon: f64, shift: f64) -> Self {
        Self {
            sigma,
            epsilon,
            shift,
            beta: 1.0,
        }
    }

    pub fn indicator(beta: f64, epsilon: f64) -> Self {
        Self {
            sigma: 1.0,
            epsilon,
            shift: 0.0,
            beta,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `exp(−x₁²/2σ − ((x₁−x₂)² + (x₁−x₃)²)/2ε)`.
fn ghz_exponent(sigma: f64, epsilon: f64) -> Result<QuadraticExponent> {
    positive("sigma", sigma)?;
    positive("epsilon", epsilon)?;
    let e = 1.0 / epsilon;
    QuadraticExponent::from_rows(
        &[vec![1.0 / sigma + 2.0 * e, -e, -e], vec![-e, e, 0.0], vec![-e, 0.0, e]],
        &[0.0; 3],
        0.0,
    )
}

/// Builds the pure kernel of a family.
pub fn build_family_state(family: Family, params: &FamilyParams) -> Result<PureState> {
    match family {
        Family::GhzLike => Ok(PureState::GaussianSum(GaussianSumState::single(ghz_exponent(
            params.sigma,
            params.epsilon,
        )?))),
        Family::WLike => {
            let d = params.shift;
            if !(d >= 0.0 && d.is_finite()) {
                return Err(invalid(format!("shift must be non-negative, got {d}")));
            }
            let base = ghz_exponent(params.sigma, params.epsilon)?;
            // Kets |x₁−Δ, x₂, x₃+Δ⟩ etc.: the amplitude at y is base(y − k)
            // for ket displacement k, i.e. a term shift s = −k.
            let kets = [
                [-d, 0.0, d],
                [0.0, d, -d],
                [d, -d, 0.0],
                [d, 0.0, -d],
                [0.0, -d, d],
                [-d, d, 0.0],
            ];
            let terms = kets
                .iter()
                .map(|k| ShiftTerm {
                    weight: 1.0,
                    shift: k.iter().map(|v| -v).collect(),
                })
                .collect();
            Ok(PureState::GaussianSum(GaussianSumState::new(base, terms)?))
        }
        Family::Indicator => {
            positive("beta", params.beta)?;
            positive("epsilon", params.epsilon)?;
            let state = IndicatorState::new(
                3,
                vec![
                    BoxConstraint {
                        axes: ConstraintAxes::Single(0),
                        center: 0.0,
                        half_width: params.beta,
                    },
                    BoxConstraint {
                        axes: ConstraintAxes::Pair(0, 1),
                        center: 0.0,
                        half_width: params.epsilon,
                    },
                    BoxConstraint {
                        axes: ConstraintAxes::Pair(0, 2),
                        center: 0.0,
                        half_width: params.epsilon,
                    },
                ],
                1.0,
            )?;
            Ok(PureState::Indicator(state))
        }
        Family::AnnihilatedGhz => {
            let mut state =
                PureState::GaussianSum(GaussianSumState::single(ghz_exponent(params.sigma, params.epsilon)?));
            for mode in 0..3 {
                state = PureState::PolyGaussian(annihilate(&state, mode, Family::ANNIHILATED_CONVENTION)?);
            }
            Ok(state)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Box,
}

/// Complete flat description of a mixed state from one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub family: Family,
    pub sigma: f64,
    pub epsilon: f64,
    pub shift: f64,
    pub beta: f64,
    pub noise: NoiseKind,
    pub delta: f64,
    pub p: f64,
}

impl StateParams {
    pub fn family_params(&self) -> FamilyParams {
        FamilyParams {
            sigma: self.sigma,
            epsilon: self.epsilon,
            shift: self.shift,
            beta: self.beta,
        }
    }

    pub fn noise(&self) -> DiagonalNoise {
        match self.noise {
            NoiseKind::Gaussian => DiagonalNoise::Gaussian { delta: self.delta },
            NoiseKind::Box => DiagonalNoise::Box { delta: self.delta },
        }
    }

    pub fn build(&self) -> Result<CvState> {
        let pure = build_family_state(self.family, &self.family_params())?;
        CvState::new(self.p, pure, self.noise())
    }

    pub fn get(&self, param: Param) -> Option<f64> {
        match param {
            Param::P => Some(self.p),
            Param::Sigma => Some(self.sigma),
            Param::Epsilon => Some(self.epsilon),
            Param::Delta => Some(self.delta),
            Param::Shift => Some(self.shift),
            Param::Beta => Some(self.beta),
            Param::X0 => None,
        }
    }

    /// Sets a state parameter; `x0` belongs to the probe and is rejected.
    pub fn set(&mut self, param: Param, value: f64) -> Result<()> {
        let slot = match param {
            Param::P => &mut self.p,
            Param::Sigma => &mut self.sigma,
            Param::Epsilon => &mut self.epsilon,
            Param::Delta => &mut self.delta,
            Param::Shift => &mut self.shift,
            Param::Beta => &mut self.beta,
            Param::X0 => return Err(invalid("x0 is a probe parameter, not a state parameter")),
        };
        *slot = value;
        Ok(())
    }
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    P,
    Sigma,
    Epsilon,
    /// Noise width δ.
    Delta,
    /// W-like displacement Δ.
    Shift,
    Beta,
    /// Probe position.
    X0,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Sigma => "sigma",
            Param::Epsilon => "epsilon",
            Param::Delta => "delta",
            Param::Shift => "shift",
            Param::Beta => "beta",
            Param::X0 => "x0",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Param::P),
            "sigma" | "σ" => Ok(Param::Sigma),
            "epsilon" | "eps" | "ε" => Ok(Param::Epsilon),
            "delta" | "δ" => Ok(Param::Delta),
            "shift" | "Δ" => Ok(Param::Shift),
            "beta" | "β" => Ok(Param::Beta),
            "x0" => Ok(Param::X0),
            other => Err(invalid(format!("unknown parameter '{other}'"))),
        }
    }
}
